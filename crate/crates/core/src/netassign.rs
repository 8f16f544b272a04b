//! Network extension workflow: agglomerative clustering of regions, an
//! outranking ranking of alternatives, capacitated greedy assignment of
//! users to access points, and strategies for extending a network with a
//! second region.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Sense;
use crate::num::{self, EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionPoint {
    pub id: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Single,
    Complete,
    Average,
}

/// One agglomeration step; clusters are given by member indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Member indices, each sorted, clusters ordered by first member.
    pub clusters: Vec<Vec<usize>>,
    pub merges: Vec<Merge>,
}

fn linkage_distance(d: &[Vec<f64>], a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    let pairs = a.iter().flat_map(|&i| b.iter().map(move |&j| d[i][j]));
    match linkage {
        Linkage::Single => pairs.fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs.fold(0.0, f64::max),
        Linkage::Average => pairs.sum::<f64>() / (a.len() * b.len()) as f64,
    }
}

/// Agglomerative clustering on Euclidean distance between parameter
/// vectors. The closest pair of clusters is merged while its distance does
/// not exceed `threshold`; ties go to the pair with the lowest first
/// members.
pub fn cluster_agglomerative(
    points: &[RegionPoint],
    linkage: Linkage,
    threshold: f64,
) -> Result<Clustering> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidInput(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    if let Some(first) = points.first() {
        let dims = first.params.len();
        for p in points {
            if p.params.len() != dims || p.params.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "point {} needs {dims} finite parameters",
                    p.id
                )));
            }
        }
    }
    let n = points.len();
    let d: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| num::euclidean(&points[i].params, &points[j].params))
                .collect()
        })
        .collect();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let dist = linkage_distance(&d, &clusters[a], &clusters[b], linkage);
                if best.is_none_or(|(bd, _, _)| dist < bd - EPS) {
                    best = Some((dist, a, b));
                }
            }
        }
        let Some((dist, a, b)) = best else { break };
        if dist > threshold + EPS {
            break;
        }
        let right = clusters.remove(b);
        let left = clusters[a].clone();
        clusters[a].extend(&right);
        clusters[a].sort_unstable();
        merges.push(Merge {
            left,
            right,
            distance: num::round(dist),
        });
    }
    Ok(Clustering { clusters, merges })
}

/// Outranking thresholds and criterion weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutrankParams {
    /// Concordance threshold α.
    #[serde(default = "default_concordance")]
    pub concordance: f64,
    /// Discordance threshold β.
    #[serde(default = "default_discordance")]
    pub discordance: f64,
    /// Criterion weights; equal weights when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

fn default_concordance() -> f64 {
    0.6
}

fn default_discordance() -> f64 {
    0.4
}

impl Default for OutrankParams {
    fn default() -> Self {
        Self {
            concordance: default_concordance(),
            discordance: default_discordance(),
            weights: None,
        }
    }
}

/// Pairwise outranking relation `s[a][b]` (a outranks b).
pub fn outranking_relation(
    alts: &[Vec<f64>],
    senses: &[Sense],
    params: &OutrankParams,
) -> Result<Vec<Vec<bool>>> {
    let k = senses.len();
    if k == 0 {
        return Err(Error::InvalidInput("no criteria".into()));
    }
    if !(params.concordance > 0.0 && params.concordance <= 1.0)
        || !(0.0..1.0).contains(&params.discordance)
    {
        return Err(Error::InvalidInput(format!(
            "thresholds out of range: concordance {}, discordance {}",
            params.concordance, params.discordance
        )));
    }
    let weights = match &params.weights {
        None => vec![1.0; k],
        Some(w)
            if w.len() == k
                && w.iter().all(|x| x.is_finite() && *x >= 0.0)
                && w.iter().sum::<f64>() > 0.0 =>
        {
            w.clone()
        }
        Some(w) => {
            return Err(Error::InvalidWeights(format!(
                "expected {k} nonnegative weights with positive sum, got {w:?}"
            )))
        }
    };
    let total: f64 = weights.iter().sum();
    for a in alts {
        if a.len() != k || a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "alternatives need {k} finite criteria"
            )));
        }
    }
    let range: Vec<f64> = (0..k)
        .map(|c| {
            let (lo, hi) = alts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                    (lo.min(a[c]), hi.max(a[c]))
                });
            hi - lo
        })
        .collect();
    let n = alts.len();
    let mut s = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let mut conc = 0.0;
            let mut disc: f64 = 0.0;
            for c in 0..k {
                let gap = senses[c].sign() * (alts[a][c] - alts[b][c]);
                if gap >= -EPS {
                    conc += weights[c];
                } else if range[c] > 0.0 {
                    disc = disc.max(-gap / range[c]);
                }
            }
            s[a][b] = conc / total >= params.concordance - EPS && disc <= params.discordance + EPS;
        }
    }
    Ok(s)
}

/// Ordinal layers (1 = best). Each round extracts the remaining
/// alternatives with the fewest distinct strict outrankers among the
/// remaining ones, where distinct means distinct criteria vectors. With an
/// acyclic relation this is the usual extraction of non-outranked
/// alternatives; with cycles it still makes progress.
pub fn outrank_rank(
    alts: &[Vec<f64>],
    senses: &[Sense],
    params: &OutrankParams,
) -> Result<Vec<usize>> {
    let s = outranking_relation(alts, senses, params)?;
    let n = alts.len();
    let key = |a: usize| alts[a].iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    let mut layer = vec![0usize; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut current = 1;
    while !remaining.is_empty() {
        let counts: Vec<usize> = remaining
            .iter()
            .map(|&a| {
                remaining
                    .iter()
                    .filter(|&&b| s[b][a] && !s[a][b])
                    .map(|&b| key(b))
                    .collect::<BTreeSet<_>>()
                    .len()
            })
            .collect();
        let min = *counts.iter().min().expect("nonempty");
        let mut next = Vec::new();
        for (&a, &c) in remaining.iter().zip(&counts) {
            if c == min {
                layer[a] = current;
            } else {
                next.push(a);
            }
        }
        remaining = next;
        current += 1;
    }
    Ok(layer)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct User {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Required bandwidth.
    pub bandwidth: f64,
    /// 1 is the most important.
    pub priority: u32,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPoint {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Bandwidth capacity.
    pub bandwidth: f64,
    pub max_users: u32,
    pub reliability: f64,
}

/// Priority levels; merit of a user is `PRIORITY_LEVELS + 1 - priority`.
pub const PRIORITY_LEVELS: u32 = 3;

impl User {
    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn merit(&self) -> f64 {
        (PRIORITY_LEVELS + 1) as f64 - self.priority as f64
    }
}

impl AccessPoint {
    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentInstance {
    pub users: Vec<User>,
    pub points: Vec<AccessPoint>,
    /// Largest admissible user-to-point distance; unbounded when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_limit: Option<f64>,
}

impl AssignmentInstance {
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for u in &self.users {
            if !ids.insert(u.id) {
                return Err(Error::InvalidInput(format!("duplicate user {}", u.id)));
            }
            let finite = [u.x, u.y, u.z, u.bandwidth, u.reliability]
                .iter()
                .all(|v| v.is_finite());
            if !finite || u.bandwidth < 0.0 || !(1..=PRIORITY_LEVELS).contains(&u.priority) {
                return Err(Error::InvalidInput(format!(
                    "user {} has invalid data",
                    u.id
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for p in &self.points {
            if !ids.insert(p.id) {
                return Err(Error::InvalidInput(format!(
                    "duplicate access point {}",
                    p.id
                )));
            }
            let finite = [p.x, p.y, p.z, p.bandwidth, p.reliability]
                .iter()
                .all(|v| v.is_finite());
            if !finite || p.bandwidth <= 0.0 || p.max_users == 0 {
                return Err(Error::InvalidInput(format!(
                    "access point {} has invalid data",
                    p.id
                )));
            }
        }
        if let Some(l) = self.distance_limit {
            if l.is_nan() || l < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "distance limit must be nonnegative, got {l}"
                )));
            }
        }
        Ok(())
    }

    pub fn distance(&self, user: usize, point: usize) -> f64 {
        num::euclidean(&self.users[user].position(), &self.points[point].position())
    }

    pub fn in_range(&self, user: usize, point: usize) -> bool {
        self.distance_limit
            .is_none_or(|l| self.distance(user, point) <= l + EPS)
    }
}

/// `user_point[i]` is the access point serving user `i`, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub user_point: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub bandwidth: f64,
    pub users: u32,
}

impl Assignment {
    pub fn empty(users: usize) -> Self {
        Self {
            user_point: vec![None; users],
        }
    }

    pub fn loads(&self, inst: &AssignmentInstance) -> Vec<PointLoad> {
        let mut loads = vec![
            PointLoad {
                bandwidth: 0.0,
                users: 0
            };
            inst.points.len()
        ];
        for (i, p) in self.user_point.iter().enumerate() {
            if let Some(j) = *p {
                loads[j].bandwidth += inst.users[i].bandwidth;
                loads[j].users += 1;
            }
        }
        loads
    }

    pub fn assigned_count(&self) -> usize {
        self.user_point.iter().flatten().count()
    }

    /// Checks the bandwidth, user-count and distance constraints.
    pub fn verify(&self, inst: &AssignmentInstance) -> Result<()> {
        if self.user_point.len() != inst.users.len() {
            return Err(Error::InvalidInput(
                "assignment does not cover every user".into(),
            ));
        }
        for (i, p) in self.user_point.iter().enumerate() {
            if let Some(j) = *p {
                if j >= inst.points.len() || !inst.in_range(i, j) {
                    return Err(Error::InvalidInput(format!(
                        "user {} is out of range of its point",
                        inst.users[i].id
                    )));
                }
            }
        }
        for (j, load) in self.loads(inst).iter().enumerate() {
            let p = &inst.points[j];
            if load.bandwidth > p.bandwidth + EPS || load.users > p.max_users {
                return Err(Error::InvalidInput(format!(
                    "access point {} is overloaded",
                    p.id
                )));
            }
        }
        Ok(())
    }

    /// True when no unassigned user has an admissible pair with spare
    /// capacity.
    pub fn is_maximal(
        &self,
        inst: &AssignmentInstance,
        allowed: impl Fn(usize, usize) -> bool,
    ) -> bool {
        let loads = self.loads(inst);
        self.user_point.iter().enumerate().all(|(i, p)| {
            p.is_some()
                || (0..inst.points.len())
                    .all(|j| !(allowed(i, j) && inst.in_range(i, j) && fits(inst, &loads[j], i, j)))
        })
    }
}

fn fits(inst: &AssignmentInstance, load: &PointLoad, user: usize, point: usize) -> bool {
    let p = &inst.points[point];
    load.users < p.max_users && load.bandwidth + inst.users[user].bandwidth <= p.bandwidth + EPS
}

/// Criteria of a user/point pair: link reliability, requested bandwidth,
/// user merit; all maximized.
pub fn pair_criteria(inst: &AssignmentInstance, user: usize, point: usize) -> Vec<f64> {
    let u = &inst.users[user];
    vec![
        u.reliability.min(inst.points[point].reliability),
        u.bandwidth,
        u.merit(),
    ]
}

/// Ranked sweep over the admissible pairs of the users left open in
/// `start`.
fn sweep(
    inst: &AssignmentInstance,
    params: &OutrankParams,
    allowed: &dyn Fn(usize, usize) -> bool,
    start: Assignment,
) -> Result<Assignment> {
    let mut pairs = Vec::new();
    for i in 0..inst.users.len() {
        if start.user_point[i].is_some() {
            continue;
        }
        for j in 0..inst.points.len() {
            if allowed(i, j) && inst.in_range(i, j) {
                pairs.push((i, j));
            }
        }
    }
    let criteria: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(i, j)| pair_criteria(inst, i, j))
        .collect();
    let layers = if pairs.is_empty() {
        Vec::new()
    } else {
        outrank_rank(&criteria, &[Sense::Max; 3], params)?
    };
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        let ((ia, ja), (ib, jb)) = (pairs[a], pairs[b]);
        layers[a]
            .cmp(&layers[b])
            .then(inst.users[ib].merit().total_cmp(&inst.users[ia].merit()))
            .then(inst.users[ia].id.cmp(&inst.users[ib].id))
            .then(inst.distance(ia, ja).total_cmp(&inst.distance(ib, jb)))
            .then(ja.cmp(&jb))
    });
    let mut out = start;
    let mut loads = out.loads(inst);
    for k in order {
        let (i, j) = pairs[k];
        if out.user_point[i].is_none() && fits(inst, &loads[j], i, j) {
            out.user_point[i] = Some(j);
            loads[j].bandwidth += inst.users[i].bandwidth;
            loads[j].users += 1;
        }
    }
    Ok(out)
}

/// Two-stage heuristic: pairs within range are ranked by outranking on
/// their criteria, then a greedy sweep in rank order (ties by user merit,
/// user id, distance, point) assigns each open user to the first point
/// with room.
pub fn assign_users(inst: &AssignmentInstance, params: &OutrankParams) -> Result<Assignment> {
    inst.validate()?;
    let out = sweep(
        inst,
        params,
        &|_, _| true,
        Assignment::empty(inst.users.len()),
    )?;
    out.verify(inst)
        .expect("assignment respects every constraint");
    assert!(out.is_maximal(inst, |_, _| true));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "strategy")]
pub enum Strategy {
    /// Each region keeps to its own access points.
    Separate,
    /// Every user may use every access point.
    Joint,
    /// Separate design, then users near the boundary between the regions
    /// are re-assigned against all access points.
    Border { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    /// Users and points of the first region followed by the second.
    pub merged: AssignmentInstance,
    /// Region (0 or 1) of each merged user.
    pub user_region: Vec<usize>,
    /// Region (0 or 1) of each merged point.
    pub point_region: Vec<usize>,
    pub assignment: Assignment,
    /// Ids of users released for re-assignment (border strategy).
    pub released: Vec<u32>,
}

/// Merged instance of two regions; the distance limit is the tighter of the
/// two.
pub fn merge_regions(a: &AssignmentInstance, b: &AssignmentInstance) -> Result<AssignmentInstance> {
    let limit = match (a.distance_limit, b.distance_limit) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let merged = AssignmentInstance {
        users: a.users.iter().chain(&b.users).cloned().collect(),
        points: a.points.iter().chain(&b.points).cloned().collect(),
        distance_limit: limit,
    };
    merged.validate()?;
    Ok(merged)
}

fn centroid(points: &[AccessPoint]) -> Option<[f64; 3]> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for (acc, v) in c.iter_mut().zip(p.position()) {
            *acc += v / n;
        }
    }
    Some(c)
}

/// Signed distance of `pos` to the plane bisecting the two centroids,
/// positive on the side of `b`.
pub fn boundary_offset(ca: [f64; 3], cb: [f64; 3], pos: [f64; 3]) -> f64 {
    let normal: Vec<f64> = (0..3).map(|k| cb[k] - ca[k]).collect();
    let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len == 0.0 {
        return 0.0;
    }
    (0..3)
        .map(|k| (pos[k] - (ca[k] + cb[k]) / 2.0) * normal[k])
        .sum::<f64>()
        / len
}

type AllowedPairs<'a> = Box<dyn Fn(usize, usize) -> bool + 'a>;

/// Extends the network of region `a` with region `b`.
pub fn extend(
    a: &AssignmentInstance,
    b: &AssignmentInstance,
    strategy: Strategy,
    params: &OutrankParams,
) -> Result<Extension> {
    a.validate()?;
    b.validate()?;
    let merged = merge_regions(a, b)?;
    let user_region: Vec<usize> = (0..merged.users.len())
        .map(|i| usize::from(i >= a.users.len()))
        .collect();
    let point_region: Vec<usize> = (0..merged.points.len())
        .map(|j| usize::from(j >= a.points.len()))
        .collect();
    let own = |i: usize, j: usize| user_region[i] == point_region[j];
    let separate = || -> Result<Assignment> {
        let sa = assign_users(a, params)?;
        let sb = assign_users(b, params)?;
        let shift = a.points.len();
        Ok(Assignment {
            user_point: sa
                .user_point
                .into_iter()
                .chain(sb.user_point.into_iter().map(|p| p.map(|j| j + shift)))
                .collect(),
        })
    };
    let (assignment, released, maximal_for): (Assignment, Vec<usize>, AllowedPairs<'_>) =
        match strategy {
            Strategy::Separate => (separate()?, Vec::new(), Box::new(own)),
            Strategy::Joint => (
                assign_users(&merged, params)?,
                Vec::new(),
                Box::new(|_, _| true),
            ),
            Strategy::Border { radius } => {
                if radius.is_nan() || radius < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "radius must be nonnegative, got {radius}"
                    )));
                }
                let mut start = separate()?;
                let released: Vec<usize> = match (centroid(&a.points), centroid(&b.points)) {
                    (Some(ca), Some(cb)) => (0..merged.users.len())
                        .filter(|&i| {
                            boundary_offset(ca, cb, merged.users[i].position()).abs() < radius
                        })
                        .collect(),
                    _ => Vec::new(),
                };
                for &i in &released {
                    start.user_point[i] = None;
                }
                let is_released = {
                    let mut m = vec![false; merged.users.len()];
                    released.iter().for_each(|&i| m[i] = true);
                    m
                };
                let allowed = move |i: usize, j: usize| is_released[i] || own(i, j);
                let out = sweep(&merged, params, &allowed, start)?;
                (out, released, Box::new(allowed))
            }
        };
    assignment
        .verify(&merged)
        .expect("assignment respects every constraint");
    assert!(assignment.is_maximal(&merged, maximal_for));
    Ok(Extension {
        released: released.iter().map(|&i| merged.users[i].id).collect(),
        merged,
        user_region,
        point_region,
        assignment,
    })
}

/// Ids of users whose serving point differs between two assignments of the
/// same instance.
pub fn reassigned_users(inst: &AssignmentInstance, x: &Assignment, y: &Assignment) -> Vec<u32> {
    inst.users
        .iter()
        .zip(x.user_point.iter().zip(&y.user_point))
        .filter(|(_, (p, q))| p != q)
        .map(|(u, _)| u.id)
        .collect()
}
