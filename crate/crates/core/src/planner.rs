//! Multiple-choice knapsack solvers and application of the selected
//! improvement actions back onto a morphological structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Composition, MorphStructure, QualityVector, Sense};
use crate::num::{self, EPS};
use crate::synthesis::{evaluate, Bottleneck, Subject};

/// Cost unit used to scale costs and budgets onto an integer axis.
pub const DEFAULT_GRANULARITY: f64 = 0.1;

/// Upper bound on DP cells (groups × budget units).
const MAX_DP_CELLS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Item {
    pub id: String,
    pub cost: f64,
    pub profit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profits: Option<Vec<f64>>,
    /// Improvement action the item stands for, when generated from
    /// bottlenecks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Bottleneck>,
}

impl Item {
    pub fn new(id: impl Into<String>, cost: f64, profit: f64) -> Self {
        Self {
            id: id.into(),
            cost,
            profit,
            profits: None,
            action: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    pub id: String,
    pub items: Vec<Item>,
}

/// Pick exactly one item per group, total cost within `budget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MckpInstance {
    pub groups: Vec<Group>,
    pub budget: f64,
    pub granularity: f64,
}

impl MckpInstance {
    pub fn with_budget(&self, budget: f64) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.granularity > 0.0 && self.granularity.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "granularity must be positive, got {}",
                self.granularity
            )));
        }
        if self.budget.is_nan() || self.budget < 0.0 {
            return Err(Error::InvalidInput(format!(
                "budget must be nonnegative, got {}",
                self.budget
            )));
        }
        for g in &self.groups {
            if g.items.is_empty() {
                return Err(Error::InvalidInput(format!("group {} is empty", g.id)));
            }
            for it in &g.items {
                if !(it.cost.is_finite() && it.cost >= 0.0) || !it.profit.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "item {} of group {} has cost {} and profit {}",
                        it.id, g.id, it.cost, it.profit
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of one-per-group selections, saturating.
    pub fn selection_count(&self) -> u128 {
        self.groups
            .iter()
            .fold(1u128, |acc, g| acc.saturating_mul(g.items.len() as u128))
    }

    pub fn selection_from(&self, chosen: Vec<usize>) -> Selection {
        let mut total_cost = 0.0;
        let mut total_profit = 0.0;
        for (g, &j) in self.groups.iter().zip(&chosen) {
            total_cost += g.items[j].cost;
            total_profit += g.items[j].profit;
        }
        Selection {
            chosen,
            total_cost: num::round(total_cost),
            total_profit: num::round(total_profit),
        }
    }

    pub fn chosen_items<'a>(
        &'a self,
        s: &'a Selection,
    ) -> impl Iterator<Item = (&'a Group, &'a Item)> + 'a {
        self.groups
            .iter()
            .zip(&s.chosen)
            .map(|(g, &j)| (g, &g.items[j]))
    }

    /// Renders a selection as `<a ⋆ b ⋆ c>` from the chosen item ids.
    pub fn plan_label(&self, s: &Selection) -> String {
        let ids: Vec<&str> = self.chosen_items(s).map(|(_, it)| it.id.as_str()).collect();
        format!("<{}>", ids.join(" ⋆ "))
    }
}

/// One chosen item index per group plus the totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub chosen: Vec<usize>,
    pub total_cost: f64,
    pub total_profit: f64,
}

fn ratio_key(it: &Item) -> f64 {
    if it.cost == 0.0 {
        if it.profit > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        it.profit / it.cost
    }
}

/// Ratio greedy: items sorted by profit/cost descending (ties: higher
/// profit, lower group index, lower item index); a sweep takes each item
/// whose group is still open and whose cost fits the remaining budget.
/// Zero-cost items with positive profit rank first, zero-cost items without
/// profit carry ratio 0.
pub fn mckp_greedy(inst: &MckpInstance) -> Result<Selection> {
    inst.validate()?;
    let mut order: Vec<(usize, usize)> = inst
        .groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| (0..g.items.len()).map(move |j| (gi, j)))
        .collect();
    let item = |&(g, j): &(usize, usize)| &inst.groups[g].items[j];
    order.sort_by(|a, b| {
        let (ia, ib) = (item(a), item(b));
        ratio_key(ib)
            .total_cmp(&ratio_key(ia))
            .then(ib.profit.total_cmp(&ia.profit))
            .then(a.cmp(b))
    });
    let mut remaining = inst.budget;
    let mut chosen: Vec<Option<usize>> = vec![None; inst.groups.len()];
    for (g, j) in order {
        if chosen[g].is_some() {
            continue;
        }
        let cost = inst.groups[g].items[j].cost;
        if cost <= remaining + EPS {
            chosen[g] = Some(j);
            remaining -= cost;
        }
    }
    let chosen = chosen
        .into_iter()
        .enumerate()
        .map(|(g, c)| {
            c.ok_or_else(|| {
                Error::Infeasible(format!(
                    "group {} has no affordable item",
                    inst.groups[g].id
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(inst.selection_from(chosen))
}

/// Exact dynamic program over the integer-scaled budget. Among optimal
/// selections the lexicographically smallest index vector is returned.
pub fn mckp_exact(inst: &MckpInstance) -> Result<Selection> {
    inst.validate()?;
    let g = inst.granularity;
    let costs: Vec<Vec<i64>> = inst
        .groups
        .iter()
        .map(|grp| {
            grp.items
                .iter()
                .map(|it| {
                    num::to_units(it.cost, g).ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "cost {} of item {} is not a multiple of granularity {g}",
                            it.cost, it.id
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let max_useful: i64 = costs
        .iter()
        .map(|c| c.iter().copied().max().unwrap_or(0))
        .sum();
    let cap = num::budget_units(inst.budget, g).min(max_useful).max(0) as usize;
    let n = inst.groups.len();
    if (n + 1).saturating_mul(cap + 1) > MAX_DP_CELLS {
        return Err(Error::TooLarge(format!(
            "{n} groups over {} budget units",
            cap + 1
        )));
    }
    // best[gi][b]: max profit of groups gi.. within b units
    let mut best = vec![vec![f64::NEG_INFINITY; cap + 1]; n + 1];
    best[n].iter_mut().for_each(|v| *v = 0.0);
    for gi in (0..n).rev() {
        for b in 0..=cap {
            let mut v = f64::NEG_INFINITY;
            for (j, &c) in costs[gi].iter().enumerate() {
                if c as usize <= b {
                    let rest = best[gi + 1][b - c as usize];
                    if rest > f64::NEG_INFINITY {
                        v = v.max(inst.groups[gi].items[j].profit + rest);
                    }
                }
            }
            best[gi][b] = v;
        }
    }
    if best[0][cap] == f64::NEG_INFINITY {
        return Err(Error::Infeasible(format!(
            "no selection fits budget {}",
            num::fmt(inst.budget)
        )));
    }
    let mut target = best[0][cap];
    let mut b = cap;
    let mut chosen = Vec::with_capacity(n);
    for gi in 0..n {
        let j = (0..costs[gi].len())
            .find(|&j| {
                let c = costs[gi][j] as usize;
                c <= b && {
                    let v = inst.groups[gi].items[j].profit + best[gi + 1][b - c];
                    v >= target - EPS * target.abs().max(1.0)
                }
            })
            .expect("an optimal continuation exists");
        target -= inst.groups[gi].items[j].profit;
        b -= costs[gi][j] as usize;
        chosen.push(j);
    }
    Ok(inst.selection_from(chosen))
}

/// Scalarized or Pareto treatment of vector profits.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiMode {
    Weighted(Vec<f64>),
    Pareto,
}

/// A selection together with its summed profit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSelection {
    pub selection: Selection,
    pub profits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiOutcome {
    Single(VectorSelection),
    Front(Vec<VectorSelection>),
}

/// Largest number of selections the Pareto mode will enumerate.
pub const PARETO_LIMIT: u128 = 100_000;

fn profit_vectors(inst: &MckpInstance, dims: usize) -> Result<Vec<Vec<&[f64]>>> {
    inst.groups
        .iter()
        .map(|g| {
            g.items
                .iter()
                .map(|it| match &it.profits {
                    Some(p) if p.len() == dims && p.iter().all(|x| x.is_finite()) => {
                        Ok(p.as_slice())
                    }
                    _ => Err(Error::InvalidInput(format!(
                        "item {} of group {} needs a profit vector of length {dims}",
                        it.id, g.id
                    ))),
                })
                .collect()
        })
        .collect()
}

fn sum_vector(vectors: &[Vec<&[f64]>], chosen: &[usize], dims: usize) -> Vec<f64> {
    let mut out = vec![0.0; dims];
    for (g, &j) in chosen.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(vectors[g][j]) {
            *o += v;
        }
    }
    out.into_iter().map(num::round).collect()
}

/// True when `a` is at least as good as `b` everywhere and better somewhere.
pub fn vector_dominates(a: &[f64], b: &[f64], senses: &[Sense]) -> bool {
    let mut strict = false;
    for ((x, y), s) in a.iter().zip(b).zip(senses) {
        let (x, y) = (x * s.sign(), y * s.sign());
        if x < y - EPS {
            return false;
        }
        if x > y + EPS {
            strict = true;
        }
    }
    strict
}

/// Multicriteria multiple-choice problem. Weighted mode scalarizes each
/// item as `Σ w_k · sign_k · c_k` and solves exactly. Pareto mode
/// enumerates every budget-feasible selection and keeps one
/// (lexicographically smallest) selection per non-dominated profit vector.
pub fn mckp_multicriteria(
    inst: &MckpInstance,
    senses: &[Sense],
    mode: &MultiMode,
) -> Result<MultiOutcome> {
    inst.validate()?;
    if senses.is_empty() {
        return Err(Error::InvalidInput("no criteria".into()));
    }
    let dims = senses.len();
    let vectors = profit_vectors(inst, dims)?;
    match mode {
        MultiMode::Weighted(weights) => {
            if weights.len() != dims || weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidWeights(format!(
                    "expected {dims} finite weights, got {}",
                    weights.len()
                )));
            }
            let mut scalar = inst.clone();
            for (g, grp) in scalar.groups.iter_mut().enumerate() {
                for (j, it) in grp.items.iter_mut().enumerate() {
                    it.profit = vectors[g][j]
                        .iter()
                        .zip(weights)
                        .zip(senses)
                        .map(|((v, w), s)| v * w * s.sign())
                        .sum();
                }
            }
            let selection = mckp_exact(&scalar)?;
            let profits = sum_vector(&vectors, &selection.chosen, dims);
            Ok(MultiOutcome::Single(VectorSelection { selection, profits }))
        }
        MultiMode::Pareto => {
            let count = inst.selection_count();
            if count > PARETO_LIMIT {
                return Err(Error::TooLarge(format!("{count} selections to enumerate")));
            }
            let mut front: Vec<VectorSelection> = Vec::new();
            for chosen in all_selections(inst) {
                let s = inst.selection_from(chosen);
                if s.total_cost > inst.budget + EPS {
                    continue;
                }
                let profits = sum_vector(&vectors, &s.chosen, dims);
                if front.iter().any(|f| {
                    vector_dominates(&f.profits, &profits, senses)
                        || f.profits
                            .iter()
                            .zip(&profits)
                            .all(|(a, b)| num::approx_eq(*a, *b))
                }) {
                    continue;
                }
                front.retain(|f| !vector_dominates(&profits, &f.profits, senses));
                front.push(VectorSelection {
                    selection: s,
                    profits,
                });
            }
            if front.is_empty() && !inst.groups.is_empty() {
                return Err(Error::Infeasible("no selection fits the budget".into()));
            }
            front.sort_by(|a, b| a.selection.chosen.cmp(&b.selection.chosen));
            Ok(MultiOutcome::Front(front))
        }
    }
}

/// All one-per-group index vectors in lexicographic order.
pub fn all_selections(inst: &MckpInstance) -> impl Iterator<Item = Vec<usize>> + '_ {
    let sizes: Vec<usize> = inst.groups.iter().map(|g| g.items.len()).collect();
    let mut next = if sizes.contains(&0) {
        None
    } else {
        Some(vec![0usize; sizes.len()])
    };
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < sizes[i] {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    })
}

/// Applies the non-None actions of a selection to a copy of the structure
/// and re-evaluates the composition.
pub fn apply_actions(
    ms: &MorphStructure,
    c: &Composition,
    inst: &MckpInstance,
    s: &Selection,
) -> Result<(MorphStructure, QualityVector)> {
    if s.chosen.len() != inst.groups.len() {
        return Err(Error::InvalidInput(format!(
            "selection has {} picks for {} groups",
            s.chosen.len(),
            inst.groups.len()
        )));
    }
    let mut out = ms.clone();
    for (g, &j) in inst.groups.iter().zip(&s.chosen) {
        let item = g
            .items
            .get(j)
            .ok_or_else(|| Error::InvalidInput(format!("group {} has no item #{j}", g.id)))?;
        let Some(action) = &item.action else { continue };
        for id in action.subject.ids() {
            let in_composition = ms.position(id).is_some_and(|p| c.contains(p));
            if !in_composition {
                return Err(Error::StaleAction(format!(
                    "{} refers to {id}, which is not part of the composition",
                    action.label()
                )));
            }
        }
        match &action.subject {
            Subject::Element(a) => out.set_priority(a, action.proposed)?,
            Subject::Pair(a, b) => out.set_compatibility(a, b, action.proposed)?,
        }
    }
    let quality = evaluate(&out, c)?;
    Ok((out, quality))
}
