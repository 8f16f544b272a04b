//! Budgeted vertex recoloring: move a proper coloring toward a goal
//! coloring, paying per-vertex transition costs, while staying proper.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, EPS};

/// Instances up to this many vertices are solved exactly.
pub const EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = vertices.len();
        let mut seen = std::collections::BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate vertex {v}")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidInput(format!("bad edge ({a},{b})")));
            }
            if !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        Ok(Self {
            vertices,
            edges,
            adjacency,
        })
    }

    /// Builds a graph from vertex ids and id pairs.
    pub fn from_ids<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let index = |id: &str| {
            names
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| Error::InvalidInput(format!("unknown vertex {id}")))
        };
        let edges = edges
            .iter()
            .map(|(a, b)| Ok((index(a.as_ref())?, index(b.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, edges)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

/// No edge joins two vertices of the same color.
pub fn is_proper(g: &Graph, c: &[usize]) -> bool {
    c.len() == g.len() && g.edges().iter().all(|&(a, b)| c[a] != c[b])
}

/// Number of vertices whose color differs from the goal.
pub fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecolorInstance {
    graph: Graph,
    colors: Vec<String>,
    initial: Vec<usize>,
    goal: Vec<usize>,
    /// `costs[v][from][to]`.
    costs: Vec<Vec<Vec<f64>>>,
    budget: f64,
}

impl RecolorInstance {
    pub fn new(
        graph: Graph,
        colors: Vec<String>,
        initial: Vec<usize>,
        goal: Vec<usize>,
        costs: Vec<Vec<Vec<f64>>>,
        budget: f64,
    ) -> Result<Self> {
        let n = graph.len();
        let k = colors.len();
        if k == 0 {
            return Err(Error::InvalidInput("no colors".into()));
        }
        for (name, c) in [("initial", &initial), ("goal", &goal)] {
            if c.len() != n || c.iter().any(|&x| x >= k) {
                return Err(Error::InvalidInput(format!(
                    "{name} configuration must color every vertex"
                )));
            }
        }
        if costs.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} cost matrices")));
        }
        for (v, m) in costs.iter().enumerate() {
            if m.len() != k || m.iter().any(|row| row.len() != k) {
                return Err(Error::InvalidInput(format!(
                    "cost matrix of vertex {v} must be {k}×{k}"
                )));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, &d) in row.iter().enumerate() {
                    if !(d.is_finite() && d >= 0.0) || (i == j && d != 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "cost matrix of vertex {v} needs finite nonnegative entries and a zero diagonal"
                        )));
                    }
                }
            }
        }
        if budget.is_nan() || budget < 0.0 {
            return Err(Error::InvalidInput(format!(
                "budget must be nonnegative, got {budget}"
            )));
        }
        Ok(Self {
            graph,
            colors,
            initial,
            goal,
            costs,
            budget,
        })
    }

    /// Unit cost for every color change.
    pub fn unit_costs(n: usize, k: usize) -> Vec<Vec<Vec<f64>>> {
        let m: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        vec![m; n]
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn goal(&self) -> &[usize] {
        &self.goal
    }

    pub fn costs(&self) -> &[Vec<Vec<f64>>] {
        &self.costs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn with_budget(&self, budget: f64) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    fn step(&self, v: usize, to: usize) -> f64 {
        self.costs[v][self.initial[v]][to]
    }
}

/// Additive transition cost from the initial configuration.
pub fn recolor_cost(inst: &RecolorInstance, c: &[usize]) -> f64 {
    num::round(c.iter().enumerate().map(|(v, &x)| inst.step(v, x)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recoloring {
    pub configuration: Vec<usize>,
    pub cost: f64,
    /// Hamming distance to the goal.
    pub distance: usize,
    /// False when the local search tier produced the result.
    pub exact: bool,
}

/// Closest proper configuration to the goal within budget. Ties go to
/// lower cost, then to the lexicographically smaller color vector.
pub fn recolor_optimize(inst: &RecolorInstance) -> Result<Recoloring> {
    if !is_proper(&inst.graph, &inst.initial) {
        return Err(Error::InvalidInput(
            "initial configuration is not proper".into(),
        ));
    }
    let out = if inst.graph.len() <= EXACT_LIMIT {
        branch_and_bound(inst)
    } else {
        local_search(inst)
    };
    assert!(is_proper(&inst.graph, &out.configuration));
    assert!(out.cost <= inst.budget + EPS);
    Ok(out)
}

struct Search<'a> {
    inst: &'a RecolorInstance,
    order: Vec<usize>,
    current: Vec<Option<usize>>,
    best: (usize, f64, Vec<usize>),
}

impl Search<'_> {
    fn go(&mut self, depth: usize, mismatch: usize, cost: f64) {
        let (bm, bc, _) = &self.best;
        if mismatch > *bm || (mismatch == *bm && cost > bc + EPS) {
            return;
        }
        if depth == self.order.len() {
            let config: Vec<usize> = self.current.iter().map(|c| c.expect("complete")).collect();
            let cost = num::round(cost);
            let (bm, bc, bconf) = &self.best;
            let better = mismatch < *bm || cost < bc - EPS || (cost <= bc + EPS && config < *bconf);
            if better {
                self.best = (mismatch, cost, config);
            }
            return;
        }
        let v = self.order[depth];
        let inst = self.inst;
        let k = inst.colors.len();
        let mut tries = vec![inst.goal[v]];
        if inst.initial[v] != inst.goal[v] {
            tries.push(inst.initial[v]);
        }
        tries.extend((0..k).filter(|&x| x != inst.goal[v] && x != inst.initial[v]));
        for x in tries {
            let step = inst.step(v, x);
            if cost + step > inst.budget + EPS {
                continue;
            }
            if inst
                .graph
                .neighbors(v)
                .iter()
                .any(|&u| self.current[u] == Some(x))
            {
                continue;
            }
            self.current[v] = Some(x);
            self.go(
                depth + 1,
                mismatch + usize::from(x != inst.goal[v]),
                cost + step,
            );
            self.current[v] = None;
        }
    }
}

fn branch_and_bound(inst: &RecolorInstance) -> Recoloring {
    let n = inst.graph.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(inst.graph.neighbors(v).len()), v));
    let mut s = Search {
        inst,
        order,
        current: vec![None; n],
        best: (
            hamming(&inst.initial, &inst.goal),
            0.0,
            inst.initial.clone(),
        ),
    };
    s.go(0, 0, 0.0);
    let (distance, cost, configuration) = s.best;
    Recoloring {
        configuration,
        cost,
        distance,
        exact: true,
    }
}

fn local_search(inst: &RecolorInstance) -> Recoloring {
    let k = inst.colors.len();
    let mut current = inst.initial.clone();
    let mut cost = 0.0;
    let mut distance = hamming(&current, &inst.goal);
    loop {
        let mut best: Option<(usize, f64, usize, usize)> = None;
        for v in 0..current.len() {
            for x in 0..k {
                if x == current[v] || inst.graph.neighbors(v).iter().any(|&u| current[u] == x) {
                    continue;
                }
                let c = num::round(cost - inst.step(v, current[v]) + inst.step(v, x));
                if c > inst.budget + EPS {
                    continue;
                }
                let d = distance - usize::from(current[v] != inst.goal[v])
                    + usize::from(x != inst.goal[v]);
                let improves = d < distance || (d == distance && c < cost - EPS);
                let beats = best.is_none_or(|(bd, bc, _, _)| d < bd || (d == bd && c < bc - EPS));
                if improves && beats {
                    best = Some((d, c, v, x));
                }
            }
        }
        match best {
            Some((d, c, v, x)) => {
                current[v] = x;
                cost = c;
                distance = d;
            }
            None => break,
        }
    }
    Recoloring {
        configuration: current,
        cost,
        distance,
        exact: false,
    }
}
