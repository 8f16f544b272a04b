//! Restructuring: move an initial solution toward a goal solution while
//! the total change cost stays within a budget.
//!
//! Two solution spaces are covered: subsets of elements (insert/delete
//! moves, optional knapsack capacity) and one-item-per-group selections
//! (re-pick moves). The search is exhaustive over the budgeted move
//! neighborhood of the initial solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, EPS};

/// Largest number of search nodes visited before giving up.
pub const SEARCH_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proximity {
    /// Number of elements (or groups) on which the solutions differ.
    #[default]
    ElementDifference,
    /// Absolute difference of the objective values.
    ObjectiveGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetElement {
    pub id: String,
    #[serde(default)]
    pub weight: f64,
    #[serde(default)]
    pub value: f64,
    pub insert_cost: f64,
    pub delete_cost: f64,
}

/// Subset solution space; solutions are membership vectors aligned with
/// `elements`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetProblem {
    pub elements: Vec<SubsetElement>,
    /// Knapsack capacity on total weight; `None` means unconstrained.
    pub capacity: Option<f64>,
    pub initial: Vec<bool>,
    pub goal: Vec<bool>,
    pub budget: f64,
    pub proximity: Proximity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceItem {
    pub id: String,
    #[serde(default)]
    pub weight: f64,
    #[serde(default)]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceGroup {
    pub id: String,
    /// Cost of re-picking this group's item.
    pub switch_cost: f64,
    pub items: Vec<ChoiceItem>,
}

/// One-item-per-group solution space; solutions are item indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceProblem {
    pub groups: Vec<ChoiceGroup>,
    pub capacity: Option<f64>,
    pub initial: Vec<usize>,
    pub goal: Vec<usize>,
    pub budget: f64,
    pub proximity: Proximity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome<S> {
    pub solution: S,
    pub change_cost: f64,
    pub proximity: f64,
}

fn check_budget(budget: f64) -> Result<()> {
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::InvalidInput(format!(
            "budget must be nonnegative, got {budget}"
        )));
    }
    Ok(())
}

fn check_costs<'a>(costs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<()> {
    for (id, c) in costs {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "move cost of {id} must be finite and nonnegative"
            )));
        }
    }
    Ok(())
}

/// Best candidate so far under (ρ, H, lexicographic) ordering.
struct Incumbent<S> {
    best: Option<(f64, f64, S)>,
}

impl<S: Ord + Clone> Incumbent<S> {
    fn offer(&mut self, rho: f64, cost: f64, s: &S) {
        let better = match &self.best {
            None => true,
            Some((r, h, t)) => {
                if rho < r - EPS {
                    true
                } else if rho > r + EPS {
                    false
                } else if cost < h - EPS {
                    true
                } else if cost > h + EPS {
                    false
                } else {
                    s < t
                }
            }
        };
        if better {
            self.best = Some((rho, cost, s.clone()));
        }
    }
}

impl SubsetProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.elements.len();
        if self.initial.len() != n || self.goal.len() != n {
            return Err(Error::InvalidInput(format!(
                "membership vectors must have {n} entries"
            )));
        }
        check_budget(self.budget)?;
        check_costs(self.elements.iter().flat_map(|e| {
            [
                (e.id.as_str(), e.insert_cost),
                (e.id.as_str(), e.delete_cost),
            ]
        }))
    }

    pub fn objective(&self, s: &[bool]) -> f64 {
        num::round(
            self.elements
                .iter()
                .zip(s)
                .filter(|(_, &x)| x)
                .map(|(e, _)| e.value)
                .sum(),
        )
    }

    pub fn weight(&self, s: &[bool]) -> f64 {
        self.elements
            .iter()
            .zip(s)
            .filter(|(_, &x)| x)
            .map(|(e, _)| e.weight)
            .sum()
    }

    pub fn within_capacity(&self, s: &[bool]) -> bool {
        self.capacity.is_none_or(|cap| self.weight(s) <= cap + EPS)
    }

    /// Sum of insertion and deletion costs over `from Δ to`.
    pub fn change_cost(&self, from: &[bool], to: &[bool]) -> f64 {
        let h: f64 = self
            .elements
            .iter()
            .zip(from.iter().zip(to))
            .map(|(e, (&a, &b))| match (a, b) {
                (false, true) => e.insert_cost,
                (true, false) => e.delete_cost,
                _ => 0.0,
            })
            .sum();
        num::round(h)
    }

    pub fn proximity(&self, s: &[bool]) -> f64 {
        match self.proximity {
            Proximity::ElementDifference => {
                s.iter().zip(&self.goal).filter(|(a, b)| a != b).count() as f64
            }
            Proximity::ObjectiveGap => {
                num::round((self.objective(s) - self.objective(&self.goal)).abs())
            }
        }
    }
}

/// Restructures a subset solution with the capacity check as feasibility
/// predicate.
pub fn restructure_subset(p: &SubsetProblem) -> Result<Outcome<Vec<bool>>> {
    restructure_subset_with(p, |s| p.within_capacity(s))
}

/// Restructures a subset solution under a caller-supplied feasibility
/// predicate. The initial solution must satisfy the predicate.
pub fn restructure_subset_with(
    p: &SubsetProblem,
    feasible: impl Fn(&[bool]) -> bool,
) -> Result<Outcome<Vec<bool>>> {
    p.validate()?;
    if !feasible(&p.initial) {
        return Err(Error::InvalidInput("initial solution is infeasible".into()));
    }
    let mut current = p.initial.clone();
    let mut inc = Incumbent { best: None };
    let mut visits = 0u64;
    subset_dfs(p, &feasible, 0, 0.0, &mut current, &mut inc, &mut visits)?;
    let (rho, cost, solution) = inc
        .best
        .expect("the initial solution is always a candidate");
    Ok(Outcome {
        solution,
        change_cost: cost,
        proximity: rho,
    })
}

fn subset_dfs(
    p: &SubsetProblem,
    feasible: &dyn Fn(&[bool]) -> bool,
    i: usize,
    spent: f64,
    current: &mut Vec<bool>,
    inc: &mut Incumbent<Vec<bool>>,
    visits: &mut u64,
) -> Result<()> {
    *visits += 1;
    if *visits > SEARCH_LIMIT {
        return Err(Error::TooLarge(
            "restructuring neighborhood exceeds the search limit".into(),
        ));
    }
    if i == current.len() {
        if feasible(current) {
            inc.offer(p.proximity(current), num::round(spent), current);
        }
        return Ok(());
    }
    subset_dfs(p, feasible, i + 1, spent, current, inc, visits)?;
    let e = &p.elements[i];
    let cost = if current[i] {
        e.delete_cost
    } else {
        e.insert_cost
    };
    if spent + cost <= p.budget + EPS {
        current[i] = !current[i];
        subset_dfs(p, feasible, i + 1, spent + cost, current, inc, visits)?;
        current[i] = !current[i];
    }
    Ok(())
}

impl ChoiceProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.groups.len();
        if self.initial.len() != n || self.goal.len() != n {
            return Err(Error::InvalidInput(format!(
                "selections must have {n} entries"
            )));
        }
        for (g, (&a, &b)) in self.groups.iter().zip(self.initial.iter().zip(&self.goal)) {
            if g.items.is_empty() {
                return Err(Error::InvalidInput(format!("group {} is empty", g.id)));
            }
            if a >= g.items.len() || b >= g.items.len() {
                return Err(Error::InvalidInput(format!(
                    "pick out of range in group {}",
                    g.id
                )));
            }
        }
        check_budget(self.budget)?;
        check_costs(self.groups.iter().map(|g| (g.id.as_str(), g.switch_cost)))
    }

    pub fn objective(&self, s: &[usize]) -> f64 {
        num::round(
            self.groups
                .iter()
                .zip(s)
                .map(|(g, &j)| g.items[j].value)
                .sum(),
        )
    }

    pub fn within_capacity(&self, s: &[usize]) -> bool {
        self.capacity.is_none_or(|cap| {
            let w: f64 = self
                .groups
                .iter()
                .zip(s)
                .map(|(g, &j)| g.items[j].weight)
                .sum();
            w <= cap + EPS
        })
    }

    pub fn change_cost(&self, from: &[usize], to: &[usize]) -> f64 {
        num::round(
            self.groups
                .iter()
                .zip(from.iter().zip(to))
                .filter(|(_, (a, b))| a != b)
                .map(|(g, _)| g.switch_cost)
                .sum(),
        )
    }

    pub fn proximity(&self, s: &[usize]) -> f64 {
        match self.proximity {
            Proximity::ElementDifference => {
                s.iter().zip(&self.goal).filter(|(a, b)| a != b).count() as f64
            }
            Proximity::ObjectiveGap => {
                num::round((self.objective(s) - self.objective(&self.goal)).abs())
            }
        }
    }
}

/// Restructures a one-per-group selection; each re-picked group costs its
/// `switch_cost`.
pub fn restructure_mckp(p: &ChoiceProblem) -> Result<Outcome<Vec<usize>>> {
    p.validate()?;
    if !p.within_capacity(&p.initial) {
        return Err(Error::InvalidInput("initial solution is infeasible".into()));
    }
    let mut current = p.initial.clone();
    let mut inc = Incumbent { best: None };
    let mut visits = 0u64;
    choice_dfs(p, 0, 0.0, &mut current, &mut inc, &mut visits)?;
    let (rho, cost, solution) = inc
        .best
        .expect("the initial solution is always a candidate");
    Ok(Outcome {
        solution,
        change_cost: cost,
        proximity: rho,
    })
}

fn choice_dfs(
    p: &ChoiceProblem,
    gi: usize,
    spent: f64,
    current: &mut Vec<usize>,
    inc: &mut Incumbent<Vec<usize>>,
    visits: &mut u64,
) -> Result<()> {
    *visits += 1;
    if *visits > SEARCH_LIMIT {
        return Err(Error::TooLarge(
            "restructuring neighborhood exceeds the search limit".into(),
        ));
    }
    if gi == current.len() {
        if p.within_capacity(current) {
            inc.offer(p.proximity(current), num::round(spent), current);
        }
        return Ok(());
    }
    let start = p.initial[gi];
    let cost = p.groups[gi].switch_cost;
    for j in 0..p.groups[gi].items.len() {
        if j == start {
            choice_dfs(p, gi + 1, spent, current, inc, visits)?;
        } else if spent + cost <= p.budget + EPS {
            current[gi] = j;
            choice_dfs(p, gi + 1, spent + cost, current, inc, visits)?;
            current[gi] = start;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five() -> SubsetProblem {
        let data = [(3.0, 4.0), (4.0, 5.0), (2.0, 3.0), (5.0, 8.0), (1.0, 1.0)];
        SubsetProblem {
            elements: data
                .iter()
                .enumerate()
                .map(|(i, &(w, v))| SubsetElement {
                    id: format!("e{i}"),
                    weight: w,
                    value: v,
                    insert_cost: 1.0,
                    delete_cost: 1.0,
                })
                .collect(),
            capacity: Some(8.0),
            initial: vec![true, true, false, false, true],
            goal: vec![false, false, true, true, true],
            budget: 1.0,
            proximity: Proximity::ElementDifference,
        }
    }

    fn brute_subset(p: &SubsetProblem) -> (f64, f64, Vec<bool>) {
        let n = p.elements.len();
        let mut best: Option<(f64, f64, Vec<bool>)> = None;
        for mask in 0u32..(1 << n) {
            let s: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let h = p.change_cost(&p.initial, &s);
            if h > p.budget + EPS || !p.within_capacity(&s) {
                continue;
            }
            let r = p.proximity(&s);
            let cand = (r, h, s);
            best = match best {
                Some(b)
                    if (b.0, b.1) < (cand.0, cand.1)
                        || ((b.0, b.1) == (cand.0, cand.1) && b.2 <= cand.2) =>
                {
                    Some(b)
                }
                _ => Some(cand),
            };
        }
        best.unwrap()
    }

    #[test]
    fn zero_budget_keeps_initial() {
        let p = SubsetProblem {
            budget: 0.0,
            ..five()
        };
        let out = restructure_subset(&p).unwrap();
        assert_eq!(out.solution, p.initial);
        assert_eq!(out.change_cost, 0.0);
    }

    #[test]
    fn large_budget_reaches_goal() {
        let p = SubsetProblem {
            budget: 10.0,
            ..five()
        };
        let out = restructure_subset(&p).unwrap();
        assert_eq!(out.solution, p.goal);
        assert_eq!(out.proximity, 0.0);
        let p = SubsetProblem {
            budget: f64::INFINITY,
            ..five()
        };
        assert_eq!(restructure_subset(&p).unwrap().solution, p.goal);
    }

    #[test]
    fn one_move_matches_brute_force() {
        let p = five();
        let out = restructure_subset(&p).unwrap();
        let (r, h, s) = brute_subset(&p);
        assert_eq!((out.proximity, out.change_cost, out.solution), (r, h, s));
    }

    #[test]
    fn objective_gap_mode() {
        let p = SubsetProblem {
            proximity: Proximity::ObjectiveGap,
            ..five()
        };
        let out = restructure_subset(&p).unwrap();
        assert_eq!(
            (out.proximity, out.change_cost, out.solution),
            brute_subset(&p)
        );
    }

    #[test]
    fn infeasible_initial_is_rejected() {
        let p = SubsetProblem {
            capacity: Some(1.0),
            ..five()
        };
        assert!(matches!(
            restructure_subset(&p),
            Err(Error::InvalidInput(_))
        ));
        let out = restructure_subset_with(&five(), |s| s[4]).unwrap();
        assert!(out.solution[4]);
    }

    fn three_by_three(budget: f64) -> ChoiceProblem {
        ChoiceProblem {
            groups: (0..3)
                .map(|g| ChoiceGroup {
                    id: format!("g{g}"),
                    switch_cost: 1.0,
                    items: (0..3)
                        .map(|j| ChoiceItem {
                            id: format!("g{g}i{j}"),
                            weight: (g + j) as f64,
                            value: (2 * j + g) as f64,
                        })
                        .collect(),
                })
                .collect(),
            capacity: None,
            initial: vec![0, 1, 2],
            goal: vec![2, 0, 1],
            budget,
            proximity: Proximity::ElementDifference,
        }
    }

    fn brute_choice(p: &ChoiceProblem) -> (f64, f64, Vec<usize>) {
        let mut best: Option<(f64, f64, Vec<usize>)> = None;
        let sizes: Vec<usize> = p.groups.iter().map(|g| g.items.len()).collect();
        let total: usize = sizes.iter().product();
        for mut code in 0..total {
            let mut s = vec![0; sizes.len()];
            for i in (0..sizes.len()).rev() {
                s[i] = code % sizes[i];
                code /= sizes[i];
            }
            let h = p.change_cost(&p.initial, &s);
            if h > p.budget + EPS || !p.within_capacity(&s) {
                continue;
            }
            let cand = (p.proximity(&s), h, s);
            best = match best {
                Some(b)
                    if (b.0, b.1) < (cand.0, cand.1)
                        || ((b.0, b.1) == (cand.0, cand.1) && b.2 <= cand.2) =>
                {
                    Some(b)
                }
                _ => Some(cand),
            };
        }
        best.unwrap()
    }

    #[test]
    fn identical_initial_and_goal() {
        let mut p = three_by_three(2.0);
        p.goal = p.initial.clone();
        let out = restructure_mckp(&p).unwrap();
        assert_eq!((out.proximity, out.change_cost), (0.0, 0.0));
        assert_eq!(out.solution, p.initial);
    }

    #[test]
    fn choice_matches_brute_force() {
        for budget in [0.0, 1.0, 2.0, 3.0] {
            let p = three_by_three(budget);
            let out = restructure_mckp(&p).unwrap();
            assert_eq!(
                (out.proximity, out.change_cost, out.solution),
                brute_choice(&p)
            );
        }
        let mut p = three_by_three(2.0);
        p.capacity = Some(6.0);
        p.proximity = Proximity::ObjectiveGap;
        let out = restructure_mckp(&p).unwrap();
        assert_eq!(
            (out.proximity, out.change_cost, out.solution),
            brute_choice(&p)
        );
    }

    #[test]
    fn unbounded_budget_reaches_goal() {
        let p = three_by_three(f64::INFINITY);
        let out = restructure_mckp(&p).unwrap();
        assert_eq!(out.solution, p.goal);
        assert_eq!(out.proximity, 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_subset() -> impl Strategy<Value = SubsetProblem> {
            (1usize..8).prop_flat_map(|n| {
                (
                    proptest::collection::vec((0u8..6, 0u8..9, 0u8..4, 0u8..4), n),
                    proptest::collection::vec(any::<bool>(), n),
                    proptest::collection::vec(any::<bool>(), n),
                    0u8..6,
                    any::<bool>(),
                )
                    .prop_map(|(els, initial, goal, budget, gap)| SubsetProblem {
                        elements: els
                            .into_iter()
                            .enumerate()
                            .map(|(i, (w, v, ci, cd))| SubsetElement {
                                id: format!("e{i}"),
                                weight: w as f64,
                                value: v as f64,
                                insert_cost: ci as f64,
                                delete_cost: cd as f64,
                            })
                            .collect(),
                        capacity: None,
                        initial,
                        goal,
                        budget: budget as f64,
                        proximity: if gap {
                            Proximity::ObjectiveGap
                        } else {
                            Proximity::ElementDifference
                        },
                    })
            })
        }

        proptest! {
            #[test]
            fn subset_matches_brute_force(p in arb_subset()) {
                let out = restructure_subset(&p).unwrap();
                prop_assert!(out.change_cost <= p.budget + EPS);
                prop_assert_eq!((out.proximity, out.change_cost, out.solution.clone()), brute_subset(&p));
                let bigger = restructure_subset(&SubsetProblem { budget: p.budget + 1.0, ..p.clone() }).unwrap();
                prop_assert!(bigger.proximity <= out.proximity + EPS);
                if p.proximity == Proximity::ElementDifference {
                    prop_assert_eq!(out.proximity == 0.0, out.solution == p.goal);
                }
            }
        }
    }
}
