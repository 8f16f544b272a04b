//! JSON instance documents.
//!
//! Every document is an object with a `schema` version, a `kind`
//! discriminator, an optional `provenance` note and the kind-specific
//! payload at the top level. Parsing validates the payload by building
//! the corresponding model.

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    parse_composition, Component, Composition, MorphStructure, OrdinalScales, Sense,
};
use crate::netassign::{AssignmentInstance, Linkage, OutrankParams, RegionPoint};
use crate::planner::{Group, MckpInstance, DEFAULT_GRANULARITY};
use crate::recolor::{Graph, RecolorInstance};
use crate::restructure::{ChoiceGroup, ChoiceProblem, Proximity, SubsetElement, SubsetProblem};
use crate::synthesis::{ActionCatalog, CatalogEntry};
use crate::trees::{RootedTree, SteinerInstance, SteinerRegion, TreeNode};

pub const SCHEMA_VERSION: u64 = 1;

pub const KINDS: [&str; 8] = [
    "morphology",
    "mckp",
    "restructure",
    "recolor",
    "tree",
    "steiner",
    "cluster",
    "network",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub schema: u64,
    pub provenance: Option<String>,
    pub body: InstanceBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceBody {
    Morphology(MorphologyDoc),
    Mckp(MckpDoc),
    Restructure(RestructureDoc),
    Recolor(RecolorDoc),
    Tree(TreeDoc),
    Steiner(SteinerDoc),
    Cluster(ClusterDoc),
    Network(NetworkDoc),
}

impl InstanceBody {
    pub fn kind(&self) -> &'static str {
        match self {
            InstanceBody::Morphology(_) => "morphology",
            InstanceBody::Mckp(_) => "mckp",
            InstanceBody::Restructure(_) => "restructure",
            InstanceBody::Recolor(_) => "recolor",
            InstanceBody::Tree(_) => "tree",
            InstanceBody::Steiner(_) => "steiner",
            InstanceBody::Cluster(_) => "cluster",
            InstanceBody::Network(_) => "network",
        }
    }
}

fn schema_err(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn payload<T: DeserializeOwned>(obj: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| schema_err(e.to_string()))
}

fn unique<'a>(scope: &str, ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(schema_err(format!("duplicate {scope} id {id}")));
        }
    }
    Ok(())
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let value: Value = serde_json::from_str(text).map_err(|e| schema_err(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(schema_err("document must be a JSON object"));
    };
    let schema = match obj.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => SCHEMA_VERSION,
        Some(v) => return Err(schema_err(format!("unsupported schema {v}"))),
        None => return Err(schema_err("missing schema")),
    };
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(schema_err("kind must be a string")),
        None => return Err(schema_err("missing kind")),
    };
    let provenance = match obj.remove("provenance") {
        None | Some(Value::Null) => None,
        Some(Value::String(p)) => Some(p),
        Some(_) => return Err(schema_err("provenance must be a string")),
    };
    let body = match kind.as_str() {
        "morphology" => InstanceBody::Morphology(payload(obj)?),
        "mckp" => InstanceBody::Mckp(payload(obj)?),
        "restructure" => InstanceBody::Restructure(payload(obj)?),
        "recolor" => InstanceBody::Recolor(payload(obj)?),
        "tree" => InstanceBody::Tree(payload(obj)?),
        "steiner" => InstanceBody::Steiner(payload(obj)?),
        "cluster" => InstanceBody::Cluster(payload(obj)?),
        "network" => InstanceBody::Network(payload(obj)?),
        other => return Err(schema_err(format!("unknown kind {other:?}"))),
    };
    let inst = Instance {
        schema,
        provenance,
        body,
    };
    inst.validate()?;
    Ok(inst)
}

impl Instance {
    /// Builds every model the document describes.
    pub fn validate(&self) -> Result<()> {
        let result = match &self.body {
            InstanceBody::Morphology(d) => d.structure().and_then(|ms| {
                d.composition(&ms)?;
                d.catalog()?;
                if let Some(b) = d.budget {
                    if b < 0.0 {
                        return Err(schema_err("budget must be nonnegative"));
                    }
                }
                Ok(())
            }),
            InstanceBody::Mckp(d) => d.instance().map(drop),
            InstanceBody::Restructure(d) => d.validate(),
            InstanceBody::Recolor(d) => d.instance().map(drop),
            InstanceBody::Tree(d) => d.tree().and_then(|t| d.hotlink_indices(&t)).map(drop),
            InstanceBody::Steiner(d) => d.instance().to_mckp().and_then(|m| m.validate()),
            InstanceBody::Cluster(d) => d.validate(),
            InstanceBody::Network(d) => d.validate(),
        };
        result.map_err(|e| match e {
            Error::Schema(_) => e,
            other => schema_err(other.to_string()),
        })
    }

    pub fn to_value(&self) -> Value {
        let payload = match &self.body {
            InstanceBody::Morphology(d) => serde_json::to_value(d),
            InstanceBody::Mckp(d) => serde_json::to_value(d),
            InstanceBody::Restructure(d) => serde_json::to_value(d),
            InstanceBody::Recolor(d) => serde_json::to_value(d),
            InstanceBody::Tree(d) => serde_json::to_value(d),
            InstanceBody::Steiner(d) => serde_json::to_value(d),
            InstanceBody::Cluster(d) => serde_json::to_value(d),
            InstanceBody::Network(d) => serde_json::to_value(d),
        }
        .expect("documents serialize");
        let Value::Object(mut obj) = payload else {
            unreachable!("documents are structs")
        };
        obj.insert("schema".into(), Value::from(self.schema));
        obj.insert("kind".into(), Value::from(self.body.kind()));
        if let Some(p) = &self.provenance {
            obj.insert("provenance".into(), Value::from(p.clone()));
        }
        Value::Object(obj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("values serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphologyDoc {
    pub scales: OrdinalScales,
    pub components: Vec<Component>,
    /// `[a, b, level]`; pairs not listed are incompatible.
    pub compatibility: Vec<(String, String, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composition: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<CatalogEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

impl MorphologyDoc {
    pub fn structure(&self) -> Result<MorphStructure> {
        let scales = OrdinalScales::new(
            self.scales.priority_levels,
            self.scales.compatibility_levels,
        )?;
        let mut ms = MorphStructure::new(scales, self.components.clone())?;
        let mut seen = BTreeSet::new();
        for (a, b, level) in &self.compatibility {
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(schema_err(format!("pair ({a},{b}) listed twice")));
            }
            ms.set_compatibility(a, b, *level)?;
        }
        Ok(ms)
    }

    pub fn composition(&self, ms: &MorphStructure) -> Result<Option<Composition>> {
        self.composition
            .as_deref()
            .map(|text| Composition::from_ids(ms, &parse_composition(text)?))
            .transpose()
    }

    pub fn catalog(&self) -> Result<ActionCatalog> {
        let mut seen = BTreeSet::new();
        for e in &self.actions {
            if !(e.cost.is_finite() && e.cost >= 0.0 && e.profit.is_finite()) {
                return Err(schema_err(format!(
                    "action on {} has invalid cost or profit",
                    e.subject
                )));
            }
            if !seen.insert((e.subject.canonical(), e.proposed)) {
                return Err(schema_err(format!(
                    "action {} => {} listed twice",
                    e.subject, e.proposed
                )));
            }
        }
        Ok(ActionCatalog::new(self.actions.iter().cloned()))
    }
}

fn default_granularity() -> f64 {
    DEFAULT_GRANULARITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MckpDoc {
    pub groups: Vec<Group>,
    #[serde(default)]
    pub budget: f64,
    #[serde(default = "default_granularity")]
    pub granularity: f64,
    /// Senses of the profit-vector coordinates, for multicriteria use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub senses: Option<Vec<Sense>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl MckpDoc {
    pub fn instance(&self) -> Result<MckpInstance> {
        unique("group", self.groups.iter().map(|g| g.id.as_str()))?;
        for g in &self.groups {
            unique("item", g.items.iter().map(|i| i.id.as_str()))?;
        }
        let inst = MckpInstance {
            groups: self.groups.clone(),
            budget: self.budget,
            granularity: self.granularity,
        };
        inst.validate()?;
        if let Some(senses) = &self.senses {
            let ok = inst
                .groups
                .iter()
                .flat_map(|g| &g.items)
                .all(|i| i.profits.as_ref().is_some_and(|p| p.len() == senses.len()));
            if !ok {
                return Err(schema_err(
                    "every item needs a profit vector matching the senses",
                ));
            }
        }
        Ok(inst)
    }
}

/// Restructuring document; `budget` absent means unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum RestructureDoc {
    Subset(SubsetDoc),
    Choice(ChoiceDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetDoc {
    pub elements: Vec<SubsetElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    /// Ids of the members of the initial solution.
    pub initial: Vec<String>,
    pub goal: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default)]
    pub proximity: Proximity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceDoc {
    pub groups: Vec<ChoiceGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    /// Picked item id per group.
    pub initial: Vec<String>,
    pub goal: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default)]
    pub proximity: Proximity,
}

impl RestructureDoc {
    pub fn validate(&self) -> Result<()> {
        match self {
            RestructureDoc::Subset(d) => d.problem(None).and_then(|p| p.validate()),
            RestructureDoc::Choice(d) => d.problem(None).and_then(|p| p.validate()),
        }
    }
}

impl SubsetDoc {
    /// `budget` overrides the document's budget.
    pub fn problem(&self, budget: Option<f64>) -> Result<SubsetProblem> {
        unique("element", self.elements.iter().map(|e| e.id.as_str()))?;
        let members = |ids: &[String]| -> Result<Vec<bool>> {
            unique("member", ids.iter().map(String::as_str))?;
            let mut v = vec![false; self.elements.len()];
            for id in ids {
                let i = self
                    .elements
                    .iter()
                    .position(|e| &e.id == id)
                    .ok_or_else(|| schema_err(format!("unknown element {id}")))?;
                v[i] = true;
            }
            Ok(v)
        };
        Ok(SubsetProblem {
            elements: self.elements.clone(),
            capacity: self.capacity,
            initial: members(&self.initial)?,
            goal: members(&self.goal)?,
            budget: budget.or(self.budget).unwrap_or(f64::INFINITY),
            proximity: self.proximity,
        })
    }
}

impl ChoiceDoc {
    pub fn problem(&self, budget: Option<f64>) -> Result<ChoiceProblem> {
        unique("group", self.groups.iter().map(|g| g.id.as_str()))?;
        let picks = |ids: &[String]| -> Result<Vec<usize>> {
            if ids.len() != self.groups.len() {
                return Err(schema_err(format!("expected {} picks", self.groups.len())));
            }
            self.groups
                .iter()
                .zip(ids)
                .map(|(g, id)| {
                    g.items
                        .iter()
                        .position(|i| &i.id == id)
                        .ok_or_else(|| schema_err(format!("group {} has no item {id}", g.id)))
                })
                .collect()
        };
        Ok(ChoiceProblem {
            groups: self.groups.clone(),
            capacity: self.capacity,
            initial: picks(&self.initial)?,
            goal: picks(&self.goal)?,
            budget: budget.or(self.budget).unwrap_or(f64::INFINITY),
            proximity: self.proximity,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecolorDoc {
    pub vertices: Vec<String>,
    pub colors: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub initial: Vec<String>,
    pub goal: Vec<String>,
    /// Per-vertex transition matrices; unit costs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

impl RecolorDoc {
    pub fn instance(&self) -> Result<RecolorInstance> {
        self.instance_with_budget(None)
    }

    pub fn instance_with_budget(&self, budget: Option<f64>) -> Result<RecolorInstance> {
        unique("color", self.colors.iter().map(String::as_str))?;
        let graph = Graph::from_ids(&self.vertices, &self.edges)?;
        let colors = |names: &[String]| -> Result<Vec<usize>> {
            names
                .iter()
                .map(|c| {
                    self.colors
                        .iter()
                        .position(|x| x == c)
                        .ok_or_else(|| schema_err(format!("unknown color {c}")))
                })
                .collect()
        };
        let costs = self
            .costs
            .clone()
            .unwrap_or_else(|| RecolorInstance::unit_costs(self.vertices.len(), self.colors.len()));
        RecolorInstance::new(
            graph,
            self.colors.clone(),
            colors(&self.initial)?,
            colors(&self.goal)?,
            costs,
            budget.or(self.budget).unwrap_or(f64::INFINITY),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub nodes: Vec<TreeNode>,
    /// Hotlinks already present, by target node id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hotlinks: Vec<String>,
}

impl TreeDoc {
    pub fn tree(&self) -> Result<RootedTree> {
        RootedTree::new(&self.nodes)
    }

    pub fn hotlink_indices(&self, t: &RootedTree) -> Result<Vec<usize>> {
        let v = self
            .hotlinks
            .iter()
            .map(|id| {
                t.index(id)
                    .ok_or_else(|| schema_err(format!("unknown node {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        crate::trees::expected_path_length(t, &v)?;
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinerDoc {
    pub regions: Vec<SteinerRegion>,
    #[serde(default)]
    pub budget: f64,
    #[serde(default = "default_granularity")]
    pub granularity: f64,
}

impl SteinerDoc {
    pub fn instance(&self) -> SteinerInstance {
        SteinerInstance {
            regions: self.regions.clone(),
            budget: self.budget,
            granularity: self.granularity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterDoc {
    /// Names of the parameter coordinates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<String>,
    pub points: Vec<RegionPoint>,
    #[serde(default)]
    pub linkage: Linkage,
    pub threshold: f64,
}

impl ClusterDoc {
    pub fn validate(&self) -> Result<()> {
        unique("point", self.points.iter().map(|p| p.id.as_str()))?;
        if !self.parameters.is_empty()
            && self
                .points
                .iter()
                .any(|p| p.params.len() != self.parameters.len())
        {
            return Err(schema_err(
                "parameter vectors must match the parameter names",
            ));
        }
        crate::netassign::cluster_agglomerative(&self.points, self.linkage, self.threshold)
            .map(drop)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRegion {
    pub id: String,
    pub users: Vec<crate::netassign::User>,
    pub points: Vec<crate::netassign::AccessPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_limit: Option<f64>,
}

impl NetworkRegion {
    pub fn instance(&self) -> AssignmentInstance {
        AssignmentInstance {
            users: self.users.clone(),
            points: self.points.clone(),
            distance_limit: self.distance_limit,
        }
    }
}

/// One region (plain assignment) or two regions (initial plus extension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub regions: Vec<NetworkRegion>,
    #[serde(default)]
    pub outranking: OutrankParams,
    /// Externally reported re-assignment set to compare against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_reassigned: Option<Vec<u32>>,
}

impl NetworkDoc {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.regions.len()) {
            return Err(schema_err("a network document has one or two regions"));
        }
        unique("region", self.regions.iter().map(|r| r.id.as_str()))?;
        for r in &self.regions {
            r.instance().validate()?;
        }
        if let [a, b] = &self.regions[..] {
            crate::netassign::merge_regions(&a.instance(), &b.instance())?;
        }
        Ok(())
    }
}

/// Worked examples shipped with the crate.
pub mod bundled {
    pub const NAMES: [&str; 7] = [
        "fig16_table4",
        "table6",
        "table9",
        "fig18",
        "table11",
        "table13",
        "table14",
    ];

    pub fn get(name: &str) -> Option<&'static str> {
        Some(match name {
            "fig16_table4" => include_str!("../../../instances/fig16_table4.json"),
            "table6" => include_str!("../../../instances/table6.json"),
            "table9" => include_str!("../../../instances/table9.json"),
            "fig18" => include_str!("../../../instances/fig18.json"),
            "table11" => include_str!("../../../instances/table11.json"),
            "table13" => include_str!("../../../instances/table13.json"),
            "table14" => include_str!("../../../instances/table14.json"),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_examples_parse_and_round_trip() {
        for name in bundled::NAMES {
            let inst = parse_instance(bundled::get(name).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(inst.provenance.is_some(), "{name}");
            let again = parse_instance(&inst.to_json()).unwrap();
            assert_eq!(inst, again, "{name}");
        }
    }

    #[test]
    fn bundled_kinds() {
        let kinds: Vec<&str> = bundled::NAMES
            .iter()
            .map(|n| {
                parse_instance(bundled::get(n).unwrap())
                    .unwrap()
                    .body
                    .kind()
            })
            .collect();
        assert_eq!(
            kinds,
            vec![
                "morphology",
                "mckp",
                "steiner",
                "recolor",
                "cluster",
                "network",
                "network"
            ]
        );
    }

    #[test]
    fn rejects_bad_envelopes() {
        for text in [
            "",
            "[]",
            r#"{"kind":"mckp","groups":[]}"#,
            r#"{"schema":2,"kind":"mckp","groups":[]}"#,
            r#"{"schema":1,"kind":"frob"}"#,
            r#"{"schema":1,"kind":"mckp","groups":[],"extra":1}"#,
            r#"{"schema":1,"kind":"mckp","groups":[{"id":"g","items":[]}]}"#,
            r#"{"schema":1,"kind":"mckp","groups":[],"budget":-1}"#,
            r#"{"schema":1,"kind":"tree","nodes":[]}"#,
            r#"{"schema":1,"kind":"cluster","points":[{"id":"a","params":[1]},{"id":"a","params":[2]}],"threshold":1}"#,
        ] {
            assert!(
                matches!(parse_instance(text), Err(Error::Schema(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn restructure_and_tree_documents() {
        let text = r#"{"schema":1,"kind":"restructure","space":"subset",
            "elements":[{"id":"a","weight":1,"value":2,"insert_cost":1,"delete_cost":1},
                        {"id":"b","weight":1,"value":3,"insert_cost":1,"delete_cost":1}],
            "initial":["a"],"goal":["b"],"budget":1}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(parse_instance(&inst.to_json()).unwrap(), inst);
        let text = r#"{"schema":1,"kind":"restructure","space":"choice",
            "groups":[{"id":"g","switch_cost":1,"items":[{"id":"x"},{"id":"y"}]}],
            "initial":["x"],"goal":["y"],"proximity":"objective-gap"}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(parse_instance(&inst.to_json()).unwrap(), inst);
        let text = r#"{"schema":1,"kind":"tree","nodes":[{"id":"r"},{"id":"a","parent":"r"},
            {"id":"b","parent":"a","weight":1}],"hotlinks":["a"]}"#;
        assert!(parse_instance(text).is_err());
    }
}
