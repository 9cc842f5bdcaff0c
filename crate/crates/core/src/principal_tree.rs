//! Elastic principal trees grown and pruned by a graph grammar.
//!
//! The tree embedding minimises
//!
//! ```text
//! E = (1/N)·Σᵢ‖xᵢ − v_K(i)‖²  +  λ·Σ_edges‖v_a − v_b‖²  +  μ·Σ_stars‖Σ leaves − k·v₀‖²
//! ```
//!
//! where `K(i)` is the node nearest to data point `i` and the bending sum
//! runs over stars of degree k ≥ 2. With the partition fixed `E` is a
//! positive-definite quadratic form in the node positions, so each
//! coordinate is solved exactly by a single linear system.
//!
//! Structure evolves by the schedule grow, grow, grow, shrink: every
//! candidate operation is applied to a copy, scored by one
//! partition-and-solve pass, and the lowest-energy candidate wins.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accuracy::{first_principal_component, fvu_graph, Dataset};
use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;
use crate::vector::{add, axpy, centroid, dist2, midpoint, mirror, norm2, sub};
use crate::FitStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElasticConfig {
    pub lambda_stretch: f64,
    pub mu_bend: f64,
    pub fvu_threshold: f64,
    pub max_outer_iterations: usize,
    /// Relative total-energy decrease below which optimisation stops.
    pub optimize_tol: f64,
    pub max_optimize_iterations: usize,
}

impl Default for ElasticConfig {
    fn default() -> Self {
        ElasticConfig {
            lambda_stretch: 0.01,
            mu_bend: 0.001,
            fvu_threshold: 0.001,
            max_outer_iterations: 400,
            optimize_tol: 1e-4,
            max_optimize_iterations: 100,
        }
    }
}

impl ElasticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_stretch > 0.0 && self.mu_bend > 0.0) {
            return Err(Error::InvalidConfig("elastic moduli must be > 0".into()));
        }
        if !(self.fvu_threshold > 0.0 && self.fvu_threshold < 1.0) {
            return Err(Error::InvalidConfig("fvu_threshold must lie in (0, 1)".into()));
        }
        if !(self.optimize_tol > 0.0) || self.max_optimize_iterations == 0 {
            return Err(Error::InvalidConfig(
                "optimize_tol must be > 0 and max_optimize_iterations ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// Nearest-node assignment of data points (the node "taxa").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl Partition {
    /// Assigns each point to its nearest node; ties go to the lowest id.
    pub fn nearest(graph: &EmbeddedGraph, data: &Dataset) -> Self {
        let assignment: Vec<usize> = data
            .points()
            .map(|x| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (j, v) in graph.positions().iter().enumerate() {
                    let d = dist2(x, v);
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                best
            })
            .collect();
        Self::from_assignment(assignment, graph.node_count())
    }

    pub fn from_assignment(assignment: Vec<usize>, n_nodes: usize) -> Self {
        let mut members = vec![Vec::new(); n_nodes];
        for (i, &j) in assignment.iter().enumerate() {
            if j < n_nodes {
                members[j].push(i);
            }
        }
        Partition {
            assignment,
            members,
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    fn check(&self, graph: &EmbeddedGraph, data: &Dataset) -> Result<()> {
        if self.assignment.len() != data.len() {
            return Err(Error::InconsistentPartition(format!(
                "{} assignments for {} points",
                self.assignment.len(),
                data.len()
            )));
        }
        if self.members.len() != graph.node_count() {
            return Err(Error::InconsistentPartition(format!(
                "{} taxa for {} nodes",
                self.members.len(),
                graph.node_count()
            )));
        }
        if let Some(&bad) = self.assignment.iter().find(|&&j| j >= graph.node_count()) {
            return Err(Error::InconsistentPartition(format!("node {bad} does not exist")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub total: f64,
    pub approx: f64,
    pub stretch: f64,
    pub bend: f64,
}

pub fn elastic_energy(
    graph: &EmbeddedGraph,
    data: &Dataset,
    partition: &Partition,
    cfg: &ElasticConfig,
) -> Result<Energy> {
    partition.check(graph, data)?;
    if graph.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: graph.dim(),
        });
    }
    let approx = data
        .points()
        .zip(&partition.assignment)
        .map(|(x, &j)| dist2(x, graph.position(j)))
        .sum::<f64>()
        / data.len() as f64;
    let stretch = cfg.lambda_stretch
        * graph
            .edges()
            .iter()
            .map(|&(a, b)| dist2(graph.position(a), graph.position(b)))
            .sum::<f64>();
    let bend = cfg.mu_bend
        * graph
            .adjacency()
            .iter()
            .enumerate()
            .filter(|(_, leaves)| leaves.len() >= 2)
            .map(|(c, leaves)| {
                let k = leaves.len() as f64;
                let mean = centroid(leaves.iter().map(|&l| graph.position(l)), graph.dim());
                // Σ leaves − k·v₀ = k·(mean − v₀)
                k * k * dist2(&mean, graph.position(c))
            })
            .sum::<f64>();
    Ok(Energy {
        total: approx + stretch + bend,
        approx,
        stretch,
        bend,
    })
}

/// Minimises the energy over node positions with the partition fixed.
pub fn solve_positions(
    graph: &EmbeddedGraph,
    data: &Dataset,
    partition: &Partition,
    cfg: &ElasticConfig,
) -> Result<EmbeddedGraph> {
    partition.check(graph, data)?;
    let n = graph.node_count();
    let dim = data.dim();
    let inv_n = 1.0 / data.len() as f64;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, dim);
    for (j, members) in partition.members.iter().enumerate() {
        a[(j, j)] += members.len() as f64 * inv_n;
        for &i in members {
            for (c, x) in data.point(i).iter().enumerate() {
                rhs[(j, c)] += x * inv_n;
            }
        }
    }
    let lambda = cfg.lambda_stretch;
    for &(p, q) in graph.edges() {
        a[(p, p)] += lambda;
        a[(q, q)] += lambda;
        a[(p, q)] -= lambda;
        a[(q, p)] -= lambda;
    }
    let mu = cfg.mu_bend;
    for (c, leaves) in graph.adjacency().iter().enumerate() {
        if leaves.len() < 2 {
            continue;
        }
        // w = (−k at the centre, +1 at each leaf); add μ·w·wᵀ.
        let k = leaves.len() as f64;
        let mut idx = Vec::with_capacity(leaves.len() + 1);
        idx.push((c, -k));
        idx.extend(leaves.iter().map(|&l| (l, 1.0)));
        for &(r, wr) in &idx {
            for &(s, ws) in &idx {
                a[(r, s)] += mu * wr * ws;
            }
        }
    }
    let chol = a.cholesky().ok_or(Error::SingularSystem)?;
    let sol = chol.solve(&rhs);
    let positions = (0..n)
        .map(|j| (0..dim).map(|c| sol[(j, c)]).collect())
        .collect();
    EmbeddedGraph::new(positions, graph.edges().to_vec())
}

#[derive(Debug, Clone)]
pub struct OptimizeRun {
    pub graph: EmbeddedGraph,
    pub energy: Energy,
    /// Total energy before the first pass, then after every pass.
    pub energies: Vec<f64>,
    pub iterations: usize,
}

/// Alternates nearest-node partitioning with the exact quadratic solve until
/// the relative energy decrease falls below `optimize_tol`.
pub fn optimize_graph(
    graph: &EmbeddedGraph,
    data: &Dataset,
    cfg: &ElasticConfig,
) -> Result<OptimizeRun> {
    let mut current = graph.clone();
    let mut partition = Partition::nearest(&current, data);
    let mut energy = elastic_energy(&current, data, &partition, cfg)?;
    let mut energies = vec![energy.total];
    let mut iterations = 0;
    while iterations < cfg.max_optimize_iterations {
        iterations += 1;
        partition = Partition::nearest(&current, data);
        current = solve_positions(&current, data, &partition, cfg)?;
        let next = elastic_energy(&current, data, &partition, cfg)?;
        let decrease = energy.total - next.total;
        energy = next;
        energies.push(energy.total);
        if decrease <= cfg.optimize_tol * energies[energies.len() - 2].abs() {
            break;
        }
    }
    Ok(OptimizeRun {
        graph: current,
        energy,
        energies,
        iterations,
    })
}

/// One nearest-partition then solve pass; returns the solved graph and its
/// energy under that partition.
pub fn single_pass(
    graph: &EmbeddedGraph,
    data: &Dataset,
    cfg: &ElasticConfig,
) -> Result<(EmbeddedGraph, Energy)> {
    let partition = Partition::nearest(graph, data);
    let solved = solve_positions(graph, data, &partition, cfg)?;
    let energy = elastic_energy(&solved, data, &partition, cfg)?;
    Ok((solved, energy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrammarOp {
    AddLeaf(usize),
    BisectEdge(usize, usize),
    RemoveLeaf(usize),
    ContractEdge(usize, usize),
}

impl fmt::Display for GrammarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrammarOp::AddLeaf(v) => write!(f, "add-leaf({v})"),
            GrammarOp::BisectEdge(a, b) => write!(f, "bisect({a},{b})"),
            GrammarOp::RemoveLeaf(v) => write!(f, "remove-leaf({v})"),
            GrammarOp::ContractEdge(a, b) => write!(f, "contract({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grammar {
    Growing,
    Shrinking,
}

/// Candidate applications in a fixed order: node rules by node id, then
/// edge rules by edge order.
pub fn enumerate_grammar(graph: &EmbeddedGraph, grammar: Grammar) -> Vec<GrammarOp> {
    let n = graph.node_count();
    let edges = graph.edges().iter().copied();
    match grammar {
        Grammar::Growing => (0..n)
            .map(GrammarOp::AddLeaf)
            .chain(edges.map(|(a, b)| GrammarOp::BisectEdge(a, b)))
            .collect(),
        Grammar::Shrinking => {
            let deg = graph.degrees();
            (0..n)
                .filter(|&v| deg[v] == 1)
                .map(GrammarOp::RemoveLeaf)
                .chain(edges.map(|(a, b)| GrammarOp::ContractEdge(a, b)))
                .collect()
        }
    }
}

/// Applies one grammar rule to a copy of `graph`.
///
/// `fallback_offset` is used as the new-leaf offset when the centroid-mirror
/// rule yields a zero displacement (isolated nodes, perfectly harmonic stars).
pub fn apply_grammar(
    graph: &EmbeddedGraph,
    op: &GrammarOp,
    fallback_offset: &[f64],
) -> Result<EmbeddedGraph> {
    let mut g = graph.clone();
    match *op {
        GrammarOp::AddLeaf(v) => {
            if v >= g.node_count() {
                return Err(Error::UnknownNode(v));
            }
            let nb = g.neighbours(v);
            let pos = g.position(v).to_vec();
            let new_pos = if nb.len() == 1 {
                mirror(&pos, g.position(nb[0]))
            } else {
                let offset = if nb.is_empty() {
                    vec![0.0; g.dim()]
                } else {
                    sub(&pos, &centroid(nb.iter().map(|&u| g.position(u)), g.dim()))
                };
                if norm2(&offset) > 0.0 {
                    add(&pos, &offset)
                } else {
                    add(&pos, fallback_offset)
                }
            };
            let m = g.add_node(new_pos)?;
            g.add_edge(v, m)?;
        }
        GrammarOp::BisectEdge(a, b) => {
            if !g.has_edge(a, b) {
                return Err(Error::InvalidEdge(a, b));
            }
            let mid = midpoint(g.position(a), g.position(b));
            g.remove_edge(a, b)?;
            let m = g.add_node(mid)?;
            g.add_edge(a, m)?;
            g.add_edge(m, b)?;
        }
        GrammarOp::RemoveLeaf(v) => {
            if v >= g.node_count() {
                return Err(Error::UnknownNode(v));
            }
            if g.degree(v) != 1 {
                return Err(Error::NotALeaf(v));
            }
            g.remove_node(v)?;
        }
        GrammarOp::ContractEdge(a, b) => {
            if !g.has_edge(a, b) {
                return Err(Error::InvalidEdge(a, b));
            }
            let (keep, gone) = (a.min(b), a.max(b));
            let mid = midpoint(g.position(keep), g.position(gone));
            g.set_position(keep, mid)?;
            for u in g.neighbours(gone) {
                if u != keep && !g.has_edge(keep, u) {
                    g.add_edge(keep, u)?;
                }
            }
            g.remove_node(gone)?;
        }
    }
    Ok(g)
}

/// One outer iteration of the tree fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PtStep {
    pub stage: u8,
    pub n_nodes: usize,
    pub fvu: f64,
    /// Applied operation and the energy it scored, if the fit continued.
    pub applied: Option<(GrammarOp, f64)>,
}

#[derive(Debug, Clone)]
pub struct PtFit {
    pub graph: EmbeddedGraph,
    pub fvu: f64,
    pub status: FitStatus,
    pub trace: Vec<PtStep>,
}

/// Two-node tree at `mean ± σ₁·e₁`.
pub fn initial_tree(data: &Dataset) -> Result<EmbeddedGraph> {
    let pc = first_principal_component(data)?;
    let dir = &pc.line.direction;
    let mean = data.mean();
    EmbeddedGraph::chain(vec![
        axpy(mean, -pc.sigma, dir),
        axpy(mean, pc.sigma, dir),
    ])
}

/// Offset used when a new leaf has no natural outward direction.
pub fn fallback_offset(data: &Dataset) -> Result<Vec<f64>> {
    let pc = first_principal_component(data)?;
    Ok(pc
        .line
        .direction
        .iter()
        .map(|v| v * 1e-3 * data.diameter())
        .collect())
}

/// Scores every candidate of `grammar` and returns the winner already
/// passed through one partition-and-solve step. Ties keep the earliest
/// candidate in enumeration order.
pub fn best_grammar_step(
    graph: &EmbeddedGraph,
    data: &Dataset,
    grammar: Grammar,
    offset: &[f64],
    cfg: &ElasticConfig,
) -> Result<Option<(GrammarOp, EmbeddedGraph, Energy)>> {
    let ops = enumerate_grammar(graph, grammar);
    let scored: Vec<Result<(GrammarOp, EmbeddedGraph, Energy)>> = ops
        .par_iter()
        .map(|op| {
            let applied = apply_grammar(graph, op, offset)?;
            let (solved, energy) = single_pass(&applied, data, cfg)?;
            Ok((*op, solved, energy))
        })
        .collect();
    let mut best: Option<(GrammarOp, EmbeddedGraph, Energy)> = None;
    for cand in scored {
        let cand = cand?;
        if best.as_ref().is_none_or(|b| cand.2.total < b.2.total) {
            best = Some(cand);
        }
    }
    Ok(best)
}

pub fn fit_principal_tree(data: &Dataset, cfg: &ElasticConfig) -> Result<PtFit> {
    cfg.validate()?;
    if data.len() < 2 || data.is_degenerate() {
        return Err(Error::DegenerateDataset);
    }
    let offset = fallback_offset(data)?;
    let mut graph = initial_tree(data)?;
    let mut stage: u8 = 1;
    let mut trace = Vec::new();
    let mut outer = 0;
    loop {
        graph = optimize_graph(&graph, data, cfg)?.graph;
        let fvu = fvu_graph(data, &graph)?;
        let mut step = PtStep {
            stage,
            n_nodes: graph.node_count(),
            fvu,
            applied: None,
        };
        let status = if fvu <= cfg.fvu_threshold {
            Some(FitStatus::Converged)
        } else if outer >= cfg.max_outer_iterations {
            Some(FitStatus::Stalled)
        } else {
            None
        };
        if let Some(status) = status {
            trace.push(step);
            return Ok(PtFit {
                graph,
                fvu,
                status,
                trace,
            });
        }
        let grammar = if stage < 4 {
            Grammar::Growing
        } else {
            Grammar::Shrinking
        };
        match best_grammar_step(&graph, data, grammar, &offset, cfg)? {
            Some((op, next, energy)) => {
                step.applied = Some((op, energy.total));
                trace.push(step);
                debug_assert!(next.is_tree());
                graph = next;
            }
            None => {
                trace.push(step);
                return Ok(PtFit {
                    graph,
                    fvu,
                    status: FitStatus::Stalled,
                    trace,
                });
            }
        }
        stage = if stage < 4 { stage + 1 } else { 1 };
        outer += 1;
    }
}
