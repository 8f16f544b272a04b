//! Morphological synthesis: evaluation of compositions, Pareto-efficient
//! composition search, bottleneck detection and generation of costed
//! improvement actions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compare_quality, Composition, Dominance, MorphStructure, QualityVector};
use crate::planner::{Group, Item, MckpInstance, DEFAULT_GRANULARITY};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredComposition {
    pub composition: Composition,
    pub quality: QualityVector,
}

/// Quality vector of a composition. Fails when some pair of picks is
/// incompatible. A single-component composition has `w = l`.
pub fn evaluate(ms: &MorphStructure, c: &Composition) -> Result<QualityVector> {
    if c.picks().len() != ms.num_components() {
        return Err(Error::InvalidComposition(format!(
            "expected {} picks, got {}",
            ms.num_components(),
            c.picks().len()
        )));
    }
    let scales = ms.scales();
    let positions: Vec<_> = c.positions().collect();
    let mut n = vec![0u32; scales.priority_levels as usize];
    for &p in &positions {
        if p.alternative >= ms.components()[p.component].alternatives.len() {
            return Err(Error::InvalidComposition(format!(
                "component {} has no alternative #{}",
                ms.components()[p.component].id,
                p.alternative
            )));
        }
        n[ms.priority(p) as usize - 1] += 1;
    }
    let mut w = scales.compatibility_levels;
    for (i, &a) in positions.iter().enumerate() {
        for &b in &positions[i + 1..] {
            let level = ms.compatibility(a, b);
            if level == 0 {
                return Err(Error::Infeasible(format!(
                    "{} and {} are incompatible",
                    ms.alternative(a).id,
                    ms.alternative(b).id
                )));
            }
            w = w.min(level);
        }
    }
    Ok(QualityVector::new(w, n))
}

/// Pareto frontier of all feasible compositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frontier {
    pub members: Vec<ScoredComposition>,
    /// Number of feasible compositions seen during enumeration.
    pub feasible: usize,
}

impl Frontier {
    pub fn is_infeasible(&self) -> bool {
        self.feasible == 0
    }
}

/// Exhaustive enumeration with pruning on incompatible pairs. The frontier
/// is ordered lexicographically by alternative ids.
pub fn pareto_synthesize(ms: &MorphStructure) -> Frontier {
    let m = ms.num_components();
    let mut picks = Vec::with_capacity(m);
    let mut frontier: Vec<ScoredComposition> = Vec::new();
    let mut feasible = 0usize;
    enumerate(ms, &mut picks, &mut |picks| {
        let composition = Composition::new(ms, picks.to_vec()).expect("enumerated picks are valid");
        let quality = evaluate(ms, &composition).expect("enumerated picks are compatible");
        feasible += 1;
        offer(
            &mut frontier,
            ScoredComposition {
                composition,
                quality,
            },
        );
    });
    frontier.sort_by(|a, b| a.composition.ids(ms).cmp(&b.composition.ids(ms)));
    Frontier {
        members: frontier,
        feasible,
    }
}

fn enumerate(ms: &MorphStructure, picks: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    let ci = picks.len();
    if ci == ms.num_components() {
        visit(picks);
        return;
    }
    'alts: for ai in 0..ms.components()[ci].alternatives.len() {
        let here = crate::model::AltPos {
            component: ci,
            alternative: ai,
        };
        for (cj, &aj) in picks.iter().enumerate() {
            let there = crate::model::AltPos {
                component: cj,
                alternative: aj,
            };
            if ms.compatibility(here, there) == 0 {
                continue 'alts;
            }
        }
        picks.push(ai);
        enumerate(ms, picks, visit);
        picks.pop();
    }
}

fn offer(frontier: &mut Vec<ScoredComposition>, candidate: ScoredComposition) {
    let beats = |a: &QualityVector, b: &QualityVector| {
        compare_quality(a, b).expect("same structure") == Dominance::Dominates
    };
    if frontier
        .iter()
        .any(|m| beats(&m.quality, &candidate.quality))
    {
        return;
    }
    frontier.retain(|m| !beats(&candidate.quality, &m.quality));
    frontier.push(candidate);
}

/// What an improvement action acts on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subject {
    /// A design alternative (its priority).
    Element(String),
    /// A pair of design alternatives (their compatibility).
    Pair(String, String),
}

impl Subject {
    pub fn kind(&self) -> &'static str {
        match self {
            Subject::Element(_) => "element",
            Subject::Pair(..) => "pair",
        }
    }

    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        match ids {
            [a] => Ok(Subject::Element(a.as_ref().to_string())),
            [a, b] => Ok(Subject::Pair(
                a.as_ref().to_string(),
                b.as_ref().to_string(),
            )),
            _ => Err(Error::InvalidInput(format!(
                "subject needs one or two alternative ids, got {}",
                ids.len()
            ))),
        }
    }

    pub fn ids(&self) -> Vec<&str> {
        match self {
            Subject::Element(a) => vec![a],
            Subject::Pair(a, b) => vec![a, b],
        }
    }

    /// Pairs are unordered: `(V2,U1)` and `(U1,V2)` are the same subject.
    pub fn canonical(&self) -> Subject {
        match self {
            Subject::Pair(a, b) if b < a => Subject::Pair(b.clone(), a.clone()),
            s => s.clone(),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Element(a) => write!(f, "{a}"),
            Subject::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// A single improvement proposal: move `subject` from `current` to
/// `proposed` (a lower priority or a higher compatibility).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bottleneck {
    pub subject: Subject,
    pub current: u32,
    pub proposed: u32,
}

impl Bottleneck {
    pub fn label(&self) -> String {
        format!("{}: {}=>{}", self.subject, self.current, self.proposed)
    }
}

/// Element bottlenecks (each pick with `r > 1`, proposing every better
/// level down to 1) followed by pair bottlenecks (each pair with `w < l`,
/// proposing every better level up to `l`).
pub fn detect_bottlenecks(ms: &MorphStructure, c: &Composition) -> Result<Vec<Bottleneck>> {
    evaluate(ms, c)?;
    let l = ms.scales().compatibility_levels;
    let positions: Vec<_> = c.positions().collect();
    let mut out = Vec::new();
    for &p in &positions {
        let r = ms.priority(p);
        for proposed in (1..r).rev() {
            out.push(Bottleneck {
                subject: Subject::Element(ms.alternative(p).id.clone()),
                current: r,
                proposed,
            });
        }
    }
    for (i, &a) in positions.iter().enumerate() {
        for &b in &positions[i + 1..] {
            let w = ms.compatibility(a, b);
            for proposed in w + 1..=l {
                out.push(Bottleneck {
                    subject: Subject::Pair(
                        ms.alternative(a).id.clone(),
                        ms.alternative(b).id.clone(),
                    ),
                    current: w,
                    proposed,
                });
            }
        }
    }
    Ok(out)
}

/// Cost and profit of one improvement proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub subject: Subject,
    pub proposed: u32,
    pub cost: f64,
    pub profit: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionCatalog {
    entries: BTreeMap<(Subject, u32), (f64, f64)>,
}

impl ActionCatalog {
    pub fn new(entries: impl IntoIterator<Item = CatalogEntry>) -> Self {
        let entries = entries
            .into_iter()
            .map(|e| ((e.subject.canonical(), e.proposed), (e.cost, e.profit)))
            .collect();
        Self { entries }
    }

    pub fn get(&self, subject: &Subject, proposed: u32) -> Option<(f64, f64)> {
        self.entries.get(&(subject.canonical(), proposed)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds a multiple-choice instance with one group per bottleneck subject
/// (in order of first appearance). Each group starts with a zero "None"
/// item followed by the subject's proposals.
pub fn generate_actions(
    bottlenecks: &[Bottleneck],
    catalog: &ActionCatalog,
) -> Result<MckpInstance> {
    let mut groups: Vec<Group> = Vec::new();
    let mut index: BTreeMap<Subject, usize> = BTreeMap::new();
    for b in bottlenecks {
        let (cost, profit) = catalog
            .get(&b.subject, b.proposed)
            .ok_or_else(|| Error::IncompleteCatalog(b.label()))?;
        let gi = *index.entry(b.subject.canonical()).or_insert_with(|| {
            groups.push(Group {
                id: b.subject.to_string(),
                items: vec![Item::new("None", 0.0, 0.0)],
            });
            groups.len() - 1
        });
        let mut item = Item::new(format!("{}=>{}", b.current, b.proposed), cost, profit);
        item.action = Some(b.clone());
        groups[gi].items.push(item);
    }
    Ok(MckpInstance {
        groups,
        budget: 0.0,
        granularity: DEFAULT_GRANULARITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{bundled, InstanceBody};
    use crate::model::{Alternative, Component, OrdinalScales};

    pub(crate) fn fig16() -> (MorphStructure, crate::instance::MorphologyDoc) {
        let inst = crate::instance::parse_instance(bundled::get("fig16_table4").unwrap()).unwrap();
        match inst.body {
            InstanceBody::Morphology(doc) => (doc.structure().unwrap(), doc),
            _ => unreachable!(),
        }
    }

    fn comp(ms: &MorphStructure, text: &str) -> Composition {
        Composition::from_ids(ms, &crate::model::parse_composition(text).unwrap()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let (ms, _) = fig16();
        assert_eq!(
            evaluate(&ms, &comp(&ms, "X2*Y1*Z2*U1*V2")).unwrap(),
            QualityVector::new(1, vec![3, 2, 0, 0])
        );
        assert_eq!(
            evaluate(&ms, &comp(&ms, "X2*Y1*Z3*U2*V2")).unwrap(),
            QualityVector::new(3, vec![1, 3, 1, 0])
        );
        assert!(matches!(
            evaluate(&ms, &comp(&ms, "X1*Y1*Z1*U3*V1")),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn frontier_contains_reported_compositions() {
        let (ms, _) = fig16();
        let f = pareto_synthesize(&ms);
        let labels: Vec<String> = f.members.iter().map(|s| s.composition.label(&ms)).collect();
        assert!(labels.contains(&"X2⋆Y1⋆Z2⋆U1⋆V2".to_string()), "{labels:?}");
        assert!(labels.contains(&"X2⋆Y1⋆Z3⋆U2⋆V2".to_string()), "{labels:?}");
    }

    fn single(alts: &[(&str, u32)], k: u32) -> MorphStructure {
        MorphStructure::new(
            OrdinalScales::new(k, 3).unwrap(),
            vec![Component {
                id: "X".into(),
                alternatives: alts
                    .iter()
                    .map(|(id, r)| Alternative {
                        id: (*id).into(),
                        priority: *r,
                    })
                    .collect(),
            }],
        )
        .unwrap()
    }

    #[test]
    fn single_component_frontier() {
        let ms = single(&[("X1", 2), ("X2", 1)], 2);
        let f = pareto_synthesize(&ms);
        assert_eq!(f.members.len(), 1);
        assert_eq!(f.members[0].composition.ids(&ms), vec!["X2"]);
        assert_eq!(f.members[0].quality, QualityVector::new(3, vec![1, 0]));
    }

    #[test]
    fn uniform_structure_keeps_everything() {
        let comps = (0..3)
            .map(|c| Component {
                id: format!("C{c}"),
                alternatives: (0..2)
                    .map(|a| Alternative {
                        id: format!("C{c}A{a}"),
                        priority: 1,
                    })
                    .collect(),
            })
            .collect();
        let mut ms = MorphStructure::new(OrdinalScales::new(2, 2).unwrap(), comps).unwrap();
        for c1 in 0..3 {
            for c2 in c1 + 1..3 {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        ms.set_compatibility(&format!("C{c1}A{a1}"), &format!("C{c2}A{a2}"), 2)
                            .unwrap();
                    }
                }
            }
        }
        let f = pareto_synthesize(&ms);
        assert_eq!(f.members.len(), 8);
        assert!(f
            .members
            .iter()
            .all(|s| s.quality == QualityVector::new(2, vec![3, 0])));
    }

    #[test]
    fn infeasible_structure_is_flagged() {
        let comps = vec![
            Component {
                id: "X".into(),
                alternatives: vec![Alternative {
                    id: "X1".into(),
                    priority: 1,
                }],
            },
            Component {
                id: "Y".into(),
                alternatives: vec![Alternative {
                    id: "Y1".into(),
                    priority: 1,
                }],
            },
        ];
        let ms = MorphStructure::new(OrdinalScales::new(1, 1).unwrap(), comps).unwrap();
        let f = pareto_synthesize(&ms);
        assert!(f.is_infeasible());
        assert!(f.members.is_empty());
    }

    #[test]
    fn bottleneck_examples() {
        let (ms, _) = fig16();
        let s2 = detect_bottlenecks(&ms, &comp(&ms, "X2*Y1*Z3*U2*V2")).unwrap();
        assert!(s2.contains(&Bottleneck {
            subject: Subject::Element("X2".into()),
            current: 2,
            proposed: 1
        }));
        let labels: Vec<String> = s2.iter().map(Bottleneck::label).collect();
        assert_eq!(
            labels,
            vec!["X2: 2=>1", "Z3: 3=>2", "Z3: 3=>1", "U2: 2=>1", "V2: 2=>1"]
        );
        let s1 = detect_bottlenecks(&ms, &comp(&ms, "X2*Y1*Z2*U1*V2")).unwrap();
        assert!(s1.contains(&Bottleneck {
            subject: Subject::Pair("U1".into(), "V2".into()),
            current: 1,
            proposed: 3
        }));
        // Σ(r-1) + Σ(l-w)
        assert_eq!(s1.len(), 2 + 2);
    }

    #[test]
    fn ideal_composition_has_no_bottlenecks() {
        let ms = single(&[("X1", 1)], 3);
        let c = Composition::from_ids(&ms, &["X1"]).unwrap();
        assert!(detect_bottlenecks(&ms, &c).unwrap().is_empty());
    }

    #[test]
    fn actions_follow_the_catalog() {
        let (ms, doc) = fig16();
        let c = comp(&ms, "X2*Y1*Z3*U2*V2");
        let catalog = doc.catalog().unwrap();
        let inst = generate_actions(&detect_bottlenecks(&ms, &c).unwrap(), &catalog).unwrap();
        let sizes: Vec<usize> = inst.groups.iter().map(|g| g.items.len()).collect();
        assert_eq!(sizes, vec![2, 3, 2, 2]);
        let ac: Vec<(f64, f64)> = inst
            .groups
            .iter()
            .flat_map(|g| g.items.iter().skip(1).map(|i| (i.cost, i.profit)))
            .collect();
        assert_eq!(
            ac,
            vec![(3.0, 4.0), (1.0, 2.0), (5.0, 4.0), (4.0, 4.0), (2.0, 4.0)]
        );
        for g in &inst.groups {
            assert_eq!((g.items[0].cost, g.items[0].profit), (0.0, 0.0));
            assert!(g.items[0].action.is_none());
        }
        let empty = generate_actions(&[], &catalog).unwrap();
        assert!(empty.groups.is_empty());
    }

    #[test]
    fn missing_catalog_entry() {
        let b = Bottleneck {
            subject: Subject::Element("Q".into()),
            current: 2,
            proposed: 1,
        };
        assert!(matches!(
            generate_actions(&[b], &ActionCatalog::default()),
            Err(Error::IncompleteCatalog(_))
        ));
    }
}
