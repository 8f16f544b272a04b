//! Domain types: ordinal scales, morphological structures, quality vectors
//! and interval multiset estimates.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization sense of one criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    pub fn sign(self) -> f64 {
        match self {
            Sense::Max => 1.0,
            Sense::Min => -1.0,
        }
    }
}

/// Priority scale `[1..k]` (1 is best) and compatibility scale `[0..l]`
/// (`l` is best, 0 means incompatible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinalScales {
    pub priority_levels: u32,
    pub compatibility_levels: u32,
}

impl OrdinalScales {
    pub fn new(priority_levels: u32, compatibility_levels: u32) -> Result<Self> {
        if priority_levels < 1 || compatibility_levels < 1 {
            return Err(Error::InvalidStructure(format!(
                "scales need k >= 1 and l >= 1, got k={priority_levels}, l={compatibility_levels}"
            )));
        }
        Ok(Self {
            priority_levels,
            compatibility_levels,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alternative {
    pub id: String,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub id: String,
    pub alternatives: Vec<Alternative>,
}

/// Position of a design alternative: component index and alternative index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AltPos {
    pub component: usize,
    pub alternative: usize,
}

/// Components, their design alternatives with priorities, and the pairwise
/// compatibility between alternatives of different components.
///
/// Pairs without an explicit entry are incompatible (`w = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct MorphStructure {
    scales: OrdinalScales,
    components: Vec<Component>,
    lookup: BTreeMap<String, AltPos>,
    compat: BTreeMap<(AltPos, AltPos), u32>,
}

fn ordered(a: AltPos, b: AltPos) -> (AltPos, AltPos) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MorphStructure {
    pub fn new(scales: OrdinalScales, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidStructure("no components".into()));
        }
        let mut lookup = BTreeMap::new();
        let mut component_ids = BTreeMap::new();
        for (ci, comp) in components.iter().enumerate() {
            if component_ids.insert(comp.id.clone(), ci).is_some() {
                return Err(Error::InvalidStructure(format!(
                    "duplicate component id {}",
                    comp.id
                )));
            }
            if comp.alternatives.is_empty() {
                return Err(Error::InvalidStructure(format!(
                    "component {} has no alternatives",
                    comp.id
                )));
            }
            for (ai, alt) in comp.alternatives.iter().enumerate() {
                if alt.priority < 1 || alt.priority > scales.priority_levels {
                    return Err(Error::InvalidStructure(format!(
                        "priority {} of {} outside [1..{}]",
                        alt.priority, alt.id, scales.priority_levels
                    )));
                }
                let pos = AltPos {
                    component: ci,
                    alternative: ai,
                };
                if lookup.insert(alt.id.clone(), pos).is_some() {
                    return Err(Error::InvalidStructure(format!(
                        "duplicate alternative id {}",
                        alt.id
                    )));
                }
            }
        }
        Ok(Self {
            scales,
            components,
            lookup,
            compat: BTreeMap::new(),
        })
    }

    pub fn scales(&self) -> OrdinalScales {
        self.scales
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn position(&self, id: &str) -> Option<AltPos> {
        self.lookup.get(id).copied()
    }

    pub fn alternative(&self, pos: AltPos) -> &Alternative {
        &self.components[pos.component].alternatives[pos.alternative]
    }

    pub fn priority(&self, pos: AltPos) -> u32 {
        self.alternative(pos).priority
    }

    fn resolve(&self, id: &str) -> Result<AltPos> {
        self.position(id)
            .ok_or_else(|| Error::InvalidStructure(format!("unknown alternative {id}")))
    }

    pub fn set_priority(&mut self, id: &str, priority: u32) -> Result<()> {
        let pos = self.resolve(id)?;
        if priority < 1 || priority > self.scales.priority_levels {
            return Err(Error::InvalidStructure(format!(
                "priority {priority} outside [1..{}]",
                self.scales.priority_levels
            )));
        }
        self.components[pos.component].alternatives[pos.alternative].priority = priority;
        Ok(())
    }

    /// Sets the (symmetric) compatibility of two alternatives.
    pub fn set_compatibility(&mut self, a: &str, b: &str, level: u32) -> Result<()> {
        let pa = self.resolve(a)?;
        let pb = self.resolve(b)?;
        if pa.component == pb.component {
            return Err(Error::InvalidStructure(format!(
                "{a} and {b} belong to the same component"
            )));
        }
        if level > self.scales.compatibility_levels {
            return Err(Error::InvalidStructure(format!(
                "compatibility {level} outside [0..{}]",
                self.scales.compatibility_levels
            )));
        }
        self.compat.insert(ordered(pa, pb), level);
        Ok(())
    }

    pub fn compatibility(&self, a: AltPos, b: AltPos) -> u32 {
        self.compat.get(&ordered(a, b)).copied().unwrap_or(0)
    }

    /// Explicit compatibility entries, in position order.
    pub fn compatibility_entries(&self) -> impl Iterator<Item = (&str, &str, u32)> + '_ {
        self.compat.iter().map(move |((a, b), w)| {
            (
                self.alternative(*a).id.as_str(),
                self.alternative(*b).id.as_str(),
                *w,
            )
        })
    }
}

/// One alternative per component, stored as alternative indices in
/// component order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    picks: Vec<usize>,
}

impl Composition {
    pub fn new(ms: &MorphStructure, picks: Vec<usize>) -> Result<Self> {
        if picks.len() != ms.num_components() {
            return Err(Error::InvalidComposition(format!(
                "expected {} picks, got {}",
                ms.num_components(),
                picks.len()
            )));
        }
        for (ci, &ai) in picks.iter().enumerate() {
            if ai >= ms.components()[ci].alternatives.len() {
                return Err(Error::InvalidComposition(format!(
                    "component {} has no alternative #{ai}",
                    ms.components()[ci].id
                )));
            }
        }
        Ok(Self { picks })
    }

    /// Builds a composition from alternative ids, which must be given in
    /// component order.
    pub fn from_ids<S: AsRef<str>>(ms: &MorphStructure, ids: &[S]) -> Result<Self> {
        if ids.len() != ms.num_components() {
            return Err(Error::InvalidComposition(format!(
                "expected {} picks, got {}",
                ms.num_components(),
                ids.len()
            )));
        }
        let mut picks = Vec::with_capacity(ids.len());
        for (ci, id) in ids.iter().enumerate() {
            let id = id.as_ref();
            let pos = ms
                .position(id)
                .ok_or_else(|| Error::InvalidComposition(format!("unknown alternative {id}")))?;
            if pos.component != ci {
                return Err(Error::InvalidComposition(format!(
                    "{id} is not an alternative of component {}",
                    ms.components()[ci].id
                )));
            }
            picks.push(pos.alternative);
        }
        Ok(Self { picks })
    }

    pub fn picks(&self) -> &[usize] {
        &self.picks
    }

    pub fn positions(&self) -> impl Iterator<Item = AltPos> + '_ {
        self.picks
            .iter()
            .enumerate()
            .map(|(component, &alternative)| AltPos {
                component,
                alternative,
            })
    }

    pub fn contains(&self, pos: AltPos) -> bool {
        self.picks.get(pos.component) == Some(&pos.alternative)
    }

    pub fn ids<'a>(&self, ms: &'a MorphStructure) -> Vec<&'a str> {
        self.positions()
            .map(|p| ms.alternative(p).id.as_str())
            .collect()
    }

    /// Renders as `X2⋆Y1⋆Z2`.
    pub fn label(&self, ms: &MorphStructure) -> String {
        self.ids(ms).join("⋆")
    }
}

/// Splits a composition written as `X2*Y1*Z2` (or with `⋆`) into ids.
pub fn parse_composition(text: &str) -> Result<Vec<String>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::InvalidComposition("empty composition".into()));
    }
    text.split(['*', '⋆'])
        .map(|tok| {
            let tok = tok.trim();
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                Err(Error::InvalidComposition(format!(
                    "malformed alternative {tok:?} in {text:?}"
                )))
            } else {
                Ok(tok.to_string())
            }
        })
        .collect()
}

/// `N(S) = (w; n1..nk)`: minimum pairwise compatibility and the number of
/// picks at each priority level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QualityVector {
    pub w: u32,
    pub n: Vec<u32>,
}

/// Verdict of a partial-order comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    Dominates,
    Dominated,
    Equal,
    Incomparable,
}

impl QualityVector {
    pub fn new(w: u32, n: Vec<u32>) -> Self {
        Self { w, n }
    }

    pub fn size(&self) -> u32 {
        self.n.iter().sum()
    }

    /// Cumulative counts `Σ_{r≤t} n_r`.
    pub fn prefix_sums(&self) -> Vec<u32> {
        self.n
            .iter()
            .scan(0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }
}

impl fmt::Display for QualityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n: Vec<String> = self.n.iter().map(|x| x.to_string()).collect();
        write!(f, "({}; {})", self.w, n.join(","))
    }
}

/// Partial order on quality vectors: `a ⪰ b` iff `a.w ≥ b.w` and every
/// prefix sum of `a.n` is at least the matching prefix sum of `b.n`.
pub fn compare_quality(a: &QualityVector, b: &QualityVector) -> Result<Dominance> {
    if a.n.len() != b.n.len() {
        return Err(Error::InvalidComparison(format!(
            "priority scales differ ({} vs {} levels)",
            a.n.len(),
            b.n.len()
        )));
    }
    if a.size() != b.size() {
        return Err(Error::InvalidComparison(format!(
            "component counts differ ({} vs {})",
            a.size(),
            b.size()
        )));
    }
    let (pa, pb) = (a.prefix_sums(), b.prefix_sums());
    let a_ge = a.w >= b.w && pa.iter().zip(&pb).all(|(x, y)| x >= y);
    let b_ge = b.w >= a.w && pb.iter().zip(&pa).all(|(x, y)| x >= y);
    Ok(match (a_ge, b_ge) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::Dominated,
        (false, false) => Dominance::Incomparable,
    })
}

/// Interval multiset estimate: counts over an ordinal assessment scale.
/// `{1,2,2}` on a three-level scale is `(1,2,0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultisetEstimate {
    pub counts: Vec<u32>,
}

/// The eight three-element estimates over a three-level scale, listed from
/// the ideal point down. Positions 4 and 5 are incomparable in the
/// underlying poset and are linearized in this order.
const CHAIN_3_3: [[u32; 3]; 8] = [
    [3, 0, 0],
    [2, 1, 0],
    [1, 2, 0],
    [0, 3, 0],
    [1, 1, 1],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

impl MultisetEstimate {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Parses `(1,2,0)` (counts) or `{1,2,2}` (elements on a scale of
    /// `levels` levels).
    pub fn parse(text: &str, levels: usize) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidInput(format!("malformed estimate {text:?}"));
        let (open, close) = match text.chars().next() {
            Some('(') => ('(', ')'),
            Some('{') => ('{', '}'),
            _ => return Err(bad()),
        };
        let inner = text
            .strip_prefix(open)
            .and_then(|t| t.strip_suffix(close))
            .ok_or_else(bad)?;
        let values = inner
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<u32>>>()?;
        if open == '(' {
            if values.len() != levels {
                return Err(Error::ScaleMismatch(format!(
                    "{text} has {} positions, scale has {levels}",
                    values.len()
                )));
            }
            Ok(Self::new(values))
        } else {
            let mut counts = vec![0u32; levels];
            for v in values {
                if v < 1 || v as usize > levels {
                    return Err(Error::ScaleMismatch(format!(
                        "element {v} outside [1..{levels}]"
                    )));
                }
                counts[v as usize - 1] += 1;
            }
            Ok(Self::new(counts))
        }
    }

    /// Position on the linearized chain for three-element estimates over a
    /// three-level scale: 1 is the ideal point `(3,0,0)`, 8 is `(0,0,3)`.
    pub fn chain_index(&self) -> Result<usize> {
        if self.counts.len() == 3 {
            if let Some(i) = CHAIN_3_3.iter().position(|c| c[..] == self.counts[..]) {
                return Ok(i + 1);
            }
        }
        Err(Error::UnsupportedEstimate(self.to_string()))
    }
}

impl fmt::Display for MultisetEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.counts.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", c.join(","))
    }
}

/// Median-like aggregation: the input whose chain index is the lower median
/// of all chain indices.
pub fn aggregate_median(estimates: &[MultisetEstimate]) -> Result<MultisetEstimate> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut indexed = estimates
        .iter()
        .map(|e| e.chain_index().map(|i| (i, e)))
        .collect::<Result<Vec<_>>>()?;
    indexed.sort_by_key(|(i, _)| *i);
    Ok(indexed[(indexed.len() - 1) / 2].1.clone())
}

/// Integrated estimate: element-wise sum of the counts.
pub fn aggregate_integrated(estimates: &[MultisetEstimate]) -> Result<MultisetEstimate> {
    let first = estimates.first().ok_or(Error::EmptyInput)?;
    let mut sum = vec![0u32; first.counts.len()];
    for e in estimates {
        if e.counts.len() != sum.len() {
            return Err(Error::ScaleMismatch(format!(
                "{} vs {} levels",
                e.counts.len(),
                sum.len()
            )));
        }
        for (s, c) in sum.iter_mut().zip(&e.counts) {
            *s += c;
        }
    }
    Ok(MultisetEstimate::new(sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qv(w: u32, n: &[u32]) -> QualityVector {
        QualityVector::new(w, n.to_vec())
    }

    fn est(c: [u32; 3]) -> MultisetEstimate {
        MultisetEstimate::new(c.to_vec())
    }

    #[test]
    fn compare_examples() {
        assert_eq!(
            compare_quality(&qv(2, &[1, 1, 1]), &qv(1, &[1, 1, 1])).unwrap(),
            Dominance::Dominates
        );
        assert_eq!(
            compare_quality(&qv(2, &[2, 0, 1]), &qv(2, &[1, 2, 0])).unwrap(),
            Dominance::Incomparable
        );
        assert_eq!(
            compare_quality(&qv(3, &[2, 1, 0]), &qv(3, &[2, 1, 0])).unwrap(),
            Dominance::Equal
        );
        assert_eq!(
            compare_quality(&qv(1, &[1, 1, 1]), &qv(2, &[1, 1, 1])).unwrap(),
            Dominance::Dominated
        );
    }

    #[test]
    fn compare_rejects_mismatch() {
        assert!(matches!(
            compare_quality(&qv(1, &[1, 1]), &qv(1, &[1, 1, 0])),
            Err(Error::InvalidComparison(_))
        ));
        assert!(matches!(
            compare_quality(&qv(1, &[1, 1, 0]), &qv(1, &[1, 1, 1])),
            Err(Error::InvalidComparison(_))
        ));
    }

    /// Hasse diagram of n(S) for m = 3, k = 3, drawn as covering pairs
    /// (upper, lower).
    const HASSE: [([u32; 3], [u32; 3]); 12] = [
        ([3, 0, 0], [2, 1, 0]),
        ([2, 1, 0], [2, 0, 1]),
        ([2, 1, 0], [1, 2, 0]),
        ([2, 0, 1], [1, 1, 1]),
        ([1, 2, 0], [1, 1, 1]),
        ([1, 2, 0], [0, 3, 0]),
        ([1, 1, 1], [1, 0, 2]),
        ([1, 1, 1], [0, 2, 1]),
        ([0, 3, 0], [0, 2, 1]),
        ([1, 0, 2], [0, 1, 2]),
        ([0, 2, 1], [0, 1, 2]),
        ([0, 1, 2], [0, 0, 3]),
    ];

    #[test]
    fn prefix_order_matches_hasse_closure() {
        let mut nodes: Vec<[u32; 3]> = Vec::new();
        for (a, b) in HASSE {
            for x in [a, b] {
                if !nodes.contains(&x) {
                    nodes.push(x);
                }
            }
        }
        assert_eq!(nodes.len(), 10);
        let idx = |x: [u32; 3]| nodes.iter().position(|y| *y == x).unwrap();
        let n = nodes.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in HASSE {
            reach[idx(a)][idx(b)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let verdict = compare_quality(&qv(1, &nodes[i]), &qv(1, &nodes[j])).unwrap();
                let expected = match (reach[i][j], reach[j][i]) {
                    (true, true) => Dominance::Equal,
                    (true, false) => Dominance::Dominates,
                    (false, true) => Dominance::Dominated,
                    (false, false) => Dominance::Incomparable,
                };
                assert_eq!(verdict, expected, "{:?} vs {:?}", nodes[i], nodes[j]);
            }
        }
    }

    #[test]
    fn chain_index_examples() {
        assert_eq!(est([3, 0, 0]).chain_index().unwrap(), 1);
        assert_eq!(est([0, 0, 3]).chain_index().unwrap(), 8);
        assert_eq!(est([1, 1, 1]).chain_index().unwrap(), 5);
        assert_eq!(est([0, 3, 0]).chain_index().unwrap(), 4);
        assert_eq!(est([0, 2, 1]).chain_index().unwrap(), 6);
        assert!(matches!(
            est([2, 0, 1]).chain_index(),
            Err(Error::UnsupportedEstimate(_))
        ));
        assert!(MultisetEstimate::new(vec![1, 1]).chain_index().is_err());
    }

    #[test]
    fn chain_index_is_a_bijection() {
        let mut seen = std::collections::BTreeSet::new();
        for c in CHAIN_3_3 {
            seen.insert(est(c).chain_index().unwrap());
        }
        assert_eq!(
            seen.into_iter().collect::<Vec<_>>(),
            (1..=8).collect::<Vec<_>>()
        );
    }

    #[test]
    fn median_examples() {
        let a = [est([0, 2, 1]), est([1, 1, 1]), est([1, 2, 0])];
        assert_eq!(aggregate_median(&a).unwrap(), est([1, 1, 1]));
        let b = [
            est([1, 2, 0]),
            est([1, 1, 1]),
            est([1, 2, 0]),
            est([3, 0, 0]),
        ];
        assert_eq!(aggregate_median(&b).unwrap(), est([1, 2, 0]));
        let c = [est([0, 3, 0]), est([0, 3, 0])];
        assert_eq!(aggregate_median(&c).unwrap(), est([0, 3, 0]));
        assert_eq!(aggregate_median(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn integrated_examples() {
        assert_eq!(
            aggregate_integrated(&[est([1, 2, 0]), est([1, 1, 1])]).unwrap(),
            est([2, 3, 1])
        );
        assert_eq!(
            aggregate_integrated(&[est([3, 0, 0])]).unwrap(),
            est([3, 0, 0])
        );
        assert_eq!(
            aggregate_integrated(&[est([0, 0, 3]), est([0, 0, 3]), est([0, 0, 3])]).unwrap(),
            MultisetEstimate::new(vec![0, 0, 9])
        );
        assert_eq!(aggregate_integrated(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn parse_estimates() {
        assert_eq!(
            MultisetEstimate::parse("{1,2,2}", 3).unwrap(),
            est([1, 2, 0])
        );
        assert_eq!(
            MultisetEstimate::parse(" (0, 2, 1) ", 3).unwrap(),
            est([0, 2, 1])
        );
        assert!(MultisetEstimate::parse("{1,4}", 3).is_err());
        assert!(MultisetEstimate::parse("(1,2)", 3).is_err());
        assert!(MultisetEstimate::parse("[1,2,3]", 3).is_err());
        assert!(MultisetEstimate::parse("{", 3).is_err());
    }

    #[test]
    fn parse_compositions() {
        assert_eq!(
            parse_composition("X2*Y1 * Z2").unwrap(),
            vec!["X2", "Y1", "Z2"]
        );
        assert_eq!(parse_composition("X2⋆Y1").unwrap(), vec!["X2", "Y1"]);
        assert!(parse_composition("X2**Y1").is_err());
        assert!(parse_composition("").is_err());
    }

    #[test]
    fn structure_validation() {
        let scales = OrdinalScales::new(2, 3).unwrap();
        let comp = |id: &str, alts: &[(&str, u32)]| Component {
            id: id.into(),
            alternatives: alts
                .iter()
                .map(|(a, r)| Alternative {
                    id: (*a).into(),
                    priority: *r,
                })
                .collect(),
        };
        assert!(MorphStructure::new(scales, vec![comp("X", &[("X1", 3)])]).is_err());
        assert!(MorphStructure::new(
            scales,
            vec![comp("X", &[("X1", 1)]), comp("Y", &[("X1", 1)])]
        )
        .is_err());
        let mut ms = MorphStructure::new(
            scales,
            vec![comp("X", &[("X1", 1), ("X2", 2)]), comp("Y", &[("Y1", 1)])],
        )
        .unwrap();
        assert!(ms.set_compatibility("X1", "X2", 1).is_err());
        assert!(ms.set_compatibility("X1", "Y1", 4).is_err());
        ms.set_compatibility("Y1", "X1", 2).unwrap();
        let (x1, y1, x2) = (
            ms.position("X1").unwrap(),
            ms.position("Y1").unwrap(),
            ms.position("X2").unwrap(),
        );
        assert_eq!(ms.compatibility(x1, y1), 2);
        assert_eq!(ms.compatibility(y1, x1), 2);
        assert_eq!(ms.compatibility(x2, y1), 0);
        assert!(OrdinalScales::new(0, 1).is_err());
    }

    fn arb_qv() -> impl Strategy<Value = QualityVector> {
        (0u32..4, 0u32..=4, 0u32..=4).prop_map(|(w, a, b)| {
            let a = a.min(4);
            let b = b.min(4 - a);
            QualityVector::new(w, vec![a, b, 4 - a - b])
        })
    }

    proptest! {
        #[test]
        fn compare_is_a_partial_order(a in arb_qv(), b in arb_qv(), c in arb_qv()) {
            prop_assert_eq!(compare_quality(&a, &a).unwrap(), Dominance::Equal);
            let ab = compare_quality(&a, &b).unwrap();
            let ba = compare_quality(&b, &a).unwrap();
            let flipped = match ab {
                Dominance::Dominates => Dominance::Dominated,
                Dominance::Dominated => Dominance::Dominates,
                x => x,
            };
            prop_assert_eq!(ba, flipped);
            if ab == Dominance::Equal {
                prop_assert_eq!(&a, &b);
            }
            let bc = compare_quality(&b, &c).unwrap();
            if ab == Dominance::Dominates && bc == Dominance::Dominates {
                prop_assert_eq!(compare_quality(&a, &c).unwrap(), Dominance::Dominates);
            }
        }

        #[test]
        fn median_returns_an_input(idx in proptest::collection::vec(0usize..8, 1..12)) {
            let es: Vec<_> = idx.iter().map(|&i| est(CHAIN_3_3[i])).collect();
            let m = aggregate_median(&es).unwrap();
            prop_assert!(es.contains(&m));
        }
    }
}
