//! Tree upgrades: hotlinks from the root that shorten the expected search
//! path, and budgeted selection of Steiner points.
//!
//! Search model: a search for leaf `v` follows the shortest root-to-`v`
//! path in the tree augmented with the hotlinks. Since every hotlink leaves
//! the root, a node's distance is 1 when it is hotlinked and its parent's
//! distance plus one otherwise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, EPS};
use crate::planner::{mckp_exact, Group, Item, MckpInstance, Selection, DEFAULT_GRANULARITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeNode {
    pub id: String,
    #[serde(default)]
    pub parent: Option<String>,
    /// Access frequency; only leaves may carry weight.
    #[serde(default)]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    ids: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    weight: Vec<f64>,
    root: usize,
    /// Parents before children.
    order: Vec<usize>,
    total_weight: f64,
}

impl RootedTree {
    pub fn new(nodes: &[TreeNode]) -> Result<Self> {
        let n = nodes.len();
        let mut seen = BTreeSet::new();
        for node in nodes {
            if !seen.insert(node.id.as_str()) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate node {}",
                    node.id
                )));
            }
        }
        let index = |id: &str| nodes.iter().position(|x| x.id == id);
        let mut parent = Vec::with_capacity(n);
        let mut roots = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            match &node.parent {
                None => {
                    roots.push(i);
                    parent.push(None);
                }
                Some(p) => parent.push(Some(index(p).ok_or_else(|| {
                    Error::InvalidStructure(format!("node {} has unknown parent {p}", node.id))
                })?)),
            }
        }
        let [root] = roots[..] else {
            return Err(Error::InvalidStructure(format!(
                "expected one root, found {}",
                roots.len()
            )));
        };
        let mut children = vec![Vec::new(); n];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(i);
            }
        }
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend(children[v].iter().copied());
        }
        if order.len() != n {
            return Err(Error::InvalidStructure(
                "parent links contain a cycle".into(),
            ));
        }
        let weight: Vec<f64> = nodes.iter().map(|x| x.weight).collect();
        for (i, &w) in weight.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidStructure(format!(
                    "node {} has weight {w}",
                    nodes[i].id
                )));
            }
            if w > 0.0 && !children[i].is_empty() {
                return Err(Error::InvalidStructure(format!(
                    "inner node {} carries weight",
                    nodes[i].id
                )));
            }
        }
        let total_weight: f64 = weight.iter().sum();
        if total_weight <= 0.0 {
            return Err(Error::InvalidStructure(
                "leaf weights must sum to a positive value".into(),
            ));
        }
        Ok(Self {
            ids: nodes.iter().map(|x| x.id.clone()).collect(),
            parent,
            children,
            weight,
            root,
            order,
            total_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weight[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    /// Hotlinks may not target the root or a child of the root.
    pub fn can_target(&self, v: usize) -> bool {
        v < self.len() && v != self.root && self.parent[v] != Some(self.root)
    }

    fn distances(&self, hotlinked: &[bool]) -> Vec<u32> {
        let mut dist = vec![0u32; self.len()];
        for &v in &self.order[1..] {
            dist[v] = if hotlinked[v] {
                1
            } else {
                dist[self.parent[v].expect("non-root")] + 1
            };
        }
        dist
    }

    fn weighted_length(&self, hotlinked: &[bool]) -> f64 {
        let dist = self.distances(hotlinked);
        let s: f64 = (0..self.len())
            .map(|v| self.weight[v] * dist[v] as f64)
            .sum();
        num::round(s / self.total_weight)
    }

    fn mask(&self, hotlinks: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.len()];
        for &h in hotlinks {
            if !self.can_target(h) {
                let name = self.ids.get(h).map_or("?", String::as_str);
                return Err(Error::InvalidHotlink(format!(
                    "{name} is the root, a child of the root or unknown"
                )));
            }
            mask[h] = true;
        }
        Ok(mask)
    }
}

/// Weighted mean search length over the leaves, weights normalized by
/// their total.
pub fn expected_path_length(t: &RootedTree, hotlinks: &[usize]) -> Result<f64> {
    Ok(t.weighted_length(&t.mask(hotlinks)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hotlink {
    pub node: usize,
    /// Decrease of the expected path length.
    pub gain: f64,
}

/// Best single hotlink for the plain tree.
pub fn assign_single_hotlink(t: &RootedTree) -> Option<Hotlink> {
    best_hotlink(t, &[]).expect("no existing hotlinks")
}

/// Best additional hotlink given the existing ones; exhaustive over the
/// eligible nodes, ties by node position. `None` when nothing is eligible.
pub fn best_hotlink(t: &RootedTree, existing: &[usize]) -> Result<Option<Hotlink>> {
    let mut mask = t.mask(existing)?;
    let base = t.weighted_length(&mask);
    let mut best: Option<Hotlink> = None;
    for v in 0..t.len() {
        if !t.can_target(v) || mask[v] {
            continue;
        }
        mask[v] = true;
        let gain = num::round(base - t.weighted_length(&mask));
        mask[v] = false;
        if best.is_none_or(|b| gain > b.gain + EPS) {
            best = Some(Hotlink { node: v, gain });
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotlinkPlan {
    pub hotlinks: Vec<usize>,
    /// Expected path length before any hotlink and after each one.
    pub lengths: Vec<f64>,
    /// Fewer hotlinks than requested were available.
    pub short: bool,
}

/// Repeatedly adds the best single hotlink, `count` times or until no node
/// is eligible.
pub fn assign_hotlinks_greedy(t: &RootedTree, count: usize) -> Result<HotlinkPlan> {
    extend_hotlinks_greedy(t, &[], count)
}

/// Greedy continuation from `existing` hotlinks. The plan lists only the
/// added hotlinks; `lengths[0]` is the length with `existing` alone.
pub fn extend_hotlinks_greedy(
    t: &RootedTree,
    existing: &[usize],
    count: usize,
) -> Result<HotlinkPlan> {
    if count == 0 {
        return Err(Error::InvalidInput(
            "hotlink count must be at least 1".into(),
        ));
    }
    let mut all = existing.to_vec();
    let mut lengths = vec![expected_path_length(t, &all)?];
    while all.len() - existing.len() < count {
        let Some(h) = best_hotlink(t, &all)? else {
            break;
        };
        all.push(h.node);
        let len = expected_path_length(t, &all)?;
        debug_assert!(len <= lengths.last().copied().unwrap_or(f64::INFINITY) + EPS);
        lengths.push(len);
    }
    let hotlinks = all.split_off(existing.len());
    Ok(HotlinkPlan {
        short: hotlinks.len() < count,
        hotlinks,
        lengths,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinerCandidate {
    pub id: String,
    pub cost: f64,
    pub profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinerRegion {
    pub id: String,
    pub candidates: Vec<SteinerCandidate>,
}

/// Candidate Steiner points per region; at most one point per region is
/// inserted.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerInstance {
    pub regions: Vec<SteinerRegion>,
    pub budget: f64,
    pub granularity: f64,
}

impl SteinerInstance {
    pub fn new(regions: Vec<SteinerRegion>, budget: f64) -> Self {
        Self {
            regions,
            budget,
            granularity: DEFAULT_GRANULARITY,
        }
    }

    /// Multiple-choice form: each region is a group whose first item is
    /// the implicit "None".
    pub fn to_mckp(&self) -> Result<MckpInstance> {
        for r in &self.regions {
            for c in &r.candidates {
                if c.cost < 0.0 || c.profit < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "candidate {} needs nonnegative cost and profit",
                        c.id
                    )));
                }
            }
        }
        Ok(MckpInstance {
            groups: self
                .regions
                .iter()
                .map(|r| Group {
                    id: r.id.clone(),
                    items: std::iter::once(Item::new("None", 0.0, 0.0))
                        .chain(
                            r.candidates
                                .iter()
                                .map(|c| Item::new(c.id.clone(), c.cost, c.profit)),
                        )
                        .collect(),
                })
                .collect(),
            budget: self.budget,
            granularity: self.granularity,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerChoice {
    pub points: Vec<String>,
    pub selection: Selection,
}

/// Exact budgeted choice of Steiner points.
pub fn steiner_selection(inst: &SteinerInstance) -> Result<SteinerChoice> {
    let m = inst.to_mckp()?;
    let selection = mckp_exact(&m)?;
    let points = m
        .chosen_items(&selection)
        .filter(|(_, it)| it.id != "None")
        .map(|(_, it)| it.id.clone())
        .collect();
    Ok(SteinerChoice { points, selection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn node(id: &str, parent: Option<&str>, weight: f64) -> TreeNode {
        TreeNode {
            id: id.into(),
            parent: parent.map(Into::into),
            weight,
        }
    }

    fn path() -> RootedTree {
        RootedTree::new(&[
            node("r", None, 0.0),
            node("a", Some("r"), 0.0),
            node("b", Some("a"), 0.0),
            node("c", Some("b"), 1.0),
        ])
        .unwrap()
    }

    /// Expected length by breadth-first search over the augmented graph.
    pub(crate) fn bfs_length(t: &RootedTree, hotlinks: &[usize]) -> f64 {
        let n = t.len();
        let mut adj: Vec<Vec<usize>> = (0..n).map(|v| t.children(v).to_vec()).collect();
        adj[t.root()].extend(hotlinks.iter().copied());
        let mut dist = vec![usize::MAX; n];
        dist[t.root()] = 0;
        let mut q = VecDeque::from([t.root()]);
        while let Some(v) = q.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    q.push_back(u);
                }
            }
        }
        let total: f64 = (0..n).map(|v| t.weight(v)).sum();
        (0..n).map(|v| t.weight(v) * dist[v] as f64).sum::<f64>() / total
    }

    pub(crate) fn brute_single(t: &RootedTree) -> Option<(usize, f64)> {
        let base = bfs_length(t, &[]);
        let mut best: Option<(usize, f64)> = None;
        for v in 0..t.len() {
            if v == t.root() || t.parent(v) == Some(t.root()) {
                continue;
            }
            let gain = base - bfs_length(t, &[v]);
            if best.is_none_or(|(_, g)| gain > g + 1e-9) {
                best = Some((v, gain));
            }
        }
        best
    }

    #[test]
    fn path_examples() {
        let t = path();
        assert_eq!(expected_path_length(&t, &[]).unwrap(), 3.0);
        assert_eq!(expected_path_length(&t, &[3]).unwrap(), 1.0);
        let h = assign_single_hotlink(&t).unwrap();
        assert_eq!((h.node, h.gain), (3, 2.0));
        assert!(matches!(
            expected_path_length(&t, &[1]),
            Err(Error::InvalidHotlink(_))
        ));
        assert!(matches!(
            expected_path_length(&t, &[0]),
            Err(Error::InvalidHotlink(_))
        ));
    }

    #[test]
    fn star_has_no_candidate() {
        let t = RootedTree::new(&[
            node("r", None, 0.0),
            node("a", Some("r"), 1.0),
            node("b", Some("r"), 2.0),
        ])
        .unwrap();
        assert!(assign_single_hotlink(&t).is_none());
        let plan = assign_hotlinks_greedy(&t, 2).unwrap();
        assert!(plan.short && plan.hotlinks.is_empty());
    }

    fn binary(depth: u32) -> RootedTree {
        let mut nodes = vec![node("n1", None, 0.0)];
        let last = (1u32 << (depth + 1)) - 1;
        for i in 2..=last {
            let leaf = i >= 1 << depth;
            nodes.push(node(
                &format!("n{i}"),
                Some(&format!("n{}", i / 2)),
                if leaf { 1.0 } else { 0.0 },
            ));
        }
        RootedTree::new(&nodes).unwrap()
    }

    #[test]
    fn binary_tree_single_hotlink() {
        let t = binary(3);
        let n4 = t.index("n4").unwrap();
        // leaves n8, n9 drop from depth 3 to 2; six others stay at 3
        let expected = (2.0 * 2.0 + 6.0 * 3.0) / 8.0;
        assert_eq!(expected_path_length(&t, &[n4]).unwrap(), expected);
        assert!((bfs_length(&t, &[n4]) - expected).abs() < 1e-12);
    }

    #[test]
    fn greedy_examples() {
        let t = path();
        let one = assign_hotlinks_greedy(&t, 1).unwrap();
        assert_eq!(one.hotlinks, vec![assign_single_hotlink(&t).unwrap().node]);
        let two = assign_hotlinks_greedy(&t, 2).unwrap();
        // with c linked, b is the only remaining eligible node and gains nothing
        assert_eq!(two.hotlinks, vec![3, 2]);
        assert_eq!(two.lengths, vec![3.0, 1.0, 1.0]);
        assert!(!two.short);
        let all = assign_hotlinks_greedy(&t, 5).unwrap();
        assert!(all.short);
        assert_eq!(
            *all.lengths.last().unwrap(),
            expected_path_length(&t, &all.hotlinks).unwrap()
        );
        assert!(assign_hotlinks_greedy(&t, 0).is_err());
    }

    #[test]
    fn greedy_continues_from_existing() {
        let t = path();
        let plan = extend_hotlinks_greedy(&t, &[2], 1).unwrap();
        assert_eq!(plan.hotlinks, vec![3]);
        assert_eq!(plan.lengths, vec![2.0, 1.0]);
        let full = extend_hotlinks_greedy(&t, &[2, 3], 1).unwrap();
        assert!(full.hotlinks.is_empty() && full.short);
        assert!(extend_hotlinks_greedy(&t, &[1], 1).is_err());
    }

    #[test]
    fn structure_validation() {
        assert!(RootedTree::new(&[node("r", None, 0.0), node("s", None, 1.0)]).is_err());
        assert!(RootedTree::new(&[node("r", None, 0.0), node("a", Some("x"), 1.0)]).is_err());
        assert!(RootedTree::new(&[node("r", None, 0.0), node("a", Some("r"), 0.0)]).is_err());
        assert!(RootedTree::new(&[
            node("r", None, 0.0),
            node("a", Some("b"), 1.0),
            node("b", Some("a"), 1.0)
        ])
        .is_err());
    }

    fn table9() -> SteinerInstance {
        let region = |id: &str, c: &[(&str, f64, f64)]| SteinerRegion {
            id: id.into(),
            candidates: c
                .iter()
                .map(|&(id, cost, profit)| SteinerCandidate {
                    id: id.into(),
                    cost,
                    profit,
                })
                .collect(),
        };
        SteinerInstance::new(
            vec![
                region("1", &[("s11", 1.5, 3.1), ("s12", 1.4, 1.2)]),
                region("2", &[("s21", 1.3, 2.0)]),
                region("3", &[("s31", 1.4, 2.4), ("s32", 1.3, 1.8)]),
                region("4", &[("s41", 1.2, 1.5)]),
            ],
            2.9,
        )
    }

    #[test]
    fn steiner_examples() {
        let out = steiner_selection(&table9()).unwrap();
        assert_eq!(out.points, vec!["s11", "s31"]);
        assert_eq!(out.selection.total_profit, 5.5);
        let zero = steiner_selection(&SteinerInstance {
            budget: 0.0,
            ..table9()
        })
        .unwrap();
        assert!(zero.points.is_empty());
        let all = steiner_selection(&SteinerInstance {
            budget: 5.4,
            ..table9()
        })
        .unwrap();
        assert_eq!(all.points, vec!["s11", "s21", "s31", "s41"]);
        assert_eq!(all.selection.total_profit, 9.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_tree() -> impl Strategy<Value = RootedTree> {
            (2usize..40).prop_flat_map(|n| {
                (
                    proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                    proptest::collection::vec(0u8..5, n),
                )
                    .prop_map(move |(parents, weights)| {
                        let mut has_child = vec![false; n];
                        let ps: Vec<usize> = parents
                            .iter()
                            .enumerate()
                            .map(|(i, ix)| ix.index(i + 1))
                            .collect();
                        for &p in &ps {
                            has_child[p] = true;
                        }
                        let mut nodes = vec![node("v0", None, 0.0)];
                        for (i, &p) in ps.iter().enumerate() {
                            let v = i + 1;
                            let w = if has_child[v] {
                                0.0
                            } else {
                                weights[v] as f64 + 1.0
                            };
                            nodes.push(node(&format!("v{v}"), Some(&format!("v{p}")), w));
                        }
                        RootedTree::new(&nodes).unwrap()
                    })
            })
        }

        proptest! {
            #[test]
            fn single_matches_bfs_brute_force(t in arb_tree()) {
                prop_assert!((expected_path_length(&t, &[]).unwrap() - bfs_length(&t, &[])).abs() < 1e-9);
                match (assign_single_hotlink(&t), brute_single(&t)) {
                    (None, None) => {}
                    (Some(h), Some((v, g))) => {
                        prop_assert_eq!(h.node, v);
                        prop_assert!((h.gain - g).abs() < 1e-9);
                    }
                    (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
                }
            }

            #[test]
            fn greedy_is_monotone(t in arb_tree(), k in 1usize..6) {
                let plan = assign_hotlinks_greedy(&t, k).unwrap();
                for w in plan.lengths.windows(2) {
                    prop_assert!(w[1] <= w[0] + 1e-9);
                }
                prop_assert!((bfs_length(&t, &plan.hotlinks) - plan.lengths.last().unwrap()).abs() < 1e-9);
            }
        }
    }
}
