//! Growing self-organizing polygonal line.
//!
//! A one-dimensional SOM grid is initialised as a two-node segment on the
//! first principal component, trained with the batch SOM rule using a
//! triangular (linear B-spline) neighbourhood kernel, and grown one edge at
//! a time at whichever end lowers the FVU most. By default each extended
//! chain is retrained before its FVU is compared. Growth stops once the FVU
//! reaches the threshold, or stalls when neither end extension helps.

use serde::{Deserialize, Serialize};

use crate::accuracy::{
    first_principal_component, fvu_graph, squared_distances_to_graph, squared_point_to_segment,
    Dataset,
};
use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;
use crate::vector::{axpy, dist2, mirror};
use crate::FitStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SomConfig {
    pub neighbourhood_radius: f64,
    pub fvu_threshold: f64,
    pub max_batch_iterations: usize,
    /// Batch training stops when no node moves more than this fraction of
    /// the data diameter in one step.
    pub convergence_tol: f64,
    pub max_nodes: usize,
    /// Retrain each extended chain before comparing candidate FVUs. When
    /// false the glued node is scored as is.
    pub retrain_candidates: bool,
}

impl Default for SomConfig {
    fn default() -> Self {
        SomConfig {
            neighbourhood_radius: 3.0,
            fvu_threshold: 0.001,
            max_batch_iterations: 100,
            convergence_tol: 1e-4,
            max_nodes: 1000,
            retrain_candidates: true,
        }
    }
}

impl SomConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.neighbourhood_radius > 0.0) {
            return Err(Error::InvalidConfig("neighbourhood_radius must be > 0".into()));
        }
        if !(self.fvu_threshold > 0.0 && self.fvu_threshold < 1.0) {
            return Err(Error::InvalidConfig("fvu_threshold must lie in (0, 1)".into()));
        }
        if self.max_batch_iterations == 0 || self.max_nodes < 2 {
            return Err(Error::InvalidConfig(
                "max_batch_iterations must be ≥ 1 and max_nodes ≥ 2".into(),
            ));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig("convergence_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Nodes of a polygonal line in grid order `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    nodes: Vec<Vec<f64>>,
}

impl Chain {
    pub fn new(nodes: Vec<Vec<f64>>) -> Result<Self> {
        let dim = nodes.first().map(Vec::len).ok_or(Error::TooFewNodes {
            needed: 1,
            found: 0,
        })?;
        if let Some(bad) = nodes.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Chain { nodes })
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn to_graph(&self) -> EmbeddedGraph {
        EmbeddedGraph::chain(self.nodes.clone()).expect("chain nodes share one dimension")
    }

    /// Mirror of the second node through the first: `y₁ + (y₁ − y₂)`.
    pub fn front_extension(&self) -> Result<Vec<f64>> {
        self.require_edge()?;
        Ok(mirror(&self.nodes[0], &self.nodes[1]))
    }

    /// Mirror of the penultimate node through the last: `y_k + (y_k − y_{k−1})`.
    pub fn back_extension(&self) -> Result<Vec<f64>> {
        self.require_edge()?;
        let k = self.nodes.len();
        Ok(mirror(&self.nodes[k - 1], &self.nodes[k - 2]))
    }

    pub fn grow(&mut self, end: End) -> Result<()> {
        match end {
            End::Front => {
                let p = self.front_extension()?;
                self.nodes.insert(0, p);
            }
            End::Back => {
                let p = self.back_extension()?;
                self.nodes.push(p);
            }
        }
        Ok(())
    }

    fn require_edge(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            Err(Error::TooFewNodes {
                needed: 2,
                found: self.nodes.len(),
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Front,
    Back,
}

/// Triangular kernel `max(0, 1 − d/r)`.
pub fn neighbourhood_weight(grid_distance: usize, radius: f64) -> f64 {
    (1.0 - grid_distance as f64 / radius).max(0.0)
}

/// Index of the nearest node for every data point; ties go to the lowest index.
pub fn best_matching_units(chain: &Chain, data: &Dataset) -> Vec<usize> {
    data.points()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, v) in chain.nodes.iter().enumerate() {
                let d = dist2(x, v);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Batch update given a fixed BMU assignment. Nodes that receive zero total
/// weight keep their position.
pub fn batch_update(chain: &Chain, data: &Dataset, bmu: &[usize], radius: f64) -> Chain {
    let k = chain.len();
    let dim = data.dim();
    // Per-unit sums first, so the kernel sum runs over units, not points.
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &g) in data.points().zip(bmu) {
        counts[g] += 1;
        for (s, xi) in sums[g].iter_mut().zip(x) {
            *s += xi;
        }
    }
    let reach = radius.ceil() as usize;
    let nodes = (0..k)
        .map(|j| {
            let lo = j.saturating_sub(reach);
            let hi = (j + reach).min(k - 1);
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            for g in lo..=hi {
                let h = neighbourhood_weight(g.abs_diff(j), radius);
                if h == 0.0 || counts[g] == 0 {
                    continue;
                }
                den += h * counts[g] as f64;
                for (n, s) in num.iter_mut().zip(&sums[g]) {
                    *n += h * s;
                }
            }
            if den > 0.0 {
                num.iter().map(|v| v / den).collect()
            } else {
                chain.nodes[j].clone()
            }
        })
        .collect();
    Chain { nodes }
}

/// One batch SOM step: assign BMUs, then move every node to the
/// kernel-weighted mean of the data.
pub fn batch_som_step(chain: &Chain, data: &Dataset, cfg: &SomConfig) -> Chain {
    let bmu = best_matching_units(chain, data);
    batch_update(chain, data, &bmu, cfg.neighbourhood_radius)
}

fn max_displacement(a: &Chain, b: &Chain) -> f64 {
    a.nodes
        .iter()
        .zip(&b.nodes)
        .map(|(p, q)| dist2(p, q))
        .fold(0.0, f64::max)
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct SomRun {
    pub chain: Chain,
    pub iterations: usize,
    pub converged: bool,
}

/// Repeats [`batch_som_step`] until the largest node displacement drops
/// below `convergence_tol × diameter` or the iteration cap is hit.
pub fn batch_som_optimize(chain: &Chain, data: &Dataset, cfg: &SomConfig) -> SomRun {
    let tol = cfg.convergence_tol * data.diameter();
    let mut current = chain.clone();
    for it in 1..=cfg.max_batch_iterations {
        let next = batch_som_step(&current, data, cfg);
        let moved = max_displacement(&current, &next);
        current = next;
        if moved <= tol {
            return SomRun {
                chain: current,
                iterations: it,
                converged: true,
            };
        }
    }
    SomRun {
        chain: current,
        iterations: cfg.max_batch_iterations,
        converged: false,
    }
}

/// FVUs of the current chain and of its two one-edge extensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowCandidates {
    pub cfvu: f64,
    pub bfvu: f64,
    pub efvu: f64,
    pub front_node: Vec<f64>,
    pub back_node: Vec<f64>,
}

impl GrowCandidates {
    /// Growth decision: the extension with the smaller FVU, provided it
    /// strictly beats the current FVU. Ties between ends go to the back.
    pub fn choice(&self) -> Option<End> {
        if self.efvu < self.cfvu && self.efvu <= self.bfvu {
            Some(End::Back)
        } else if self.bfvu < self.cfvu && self.bfvu < self.efvu {
            Some(End::Front)
        } else {
            None
        }
    }
}

pub fn grow_candidates(chain: &Chain, data: &Dataset) -> Result<GrowCandidates> {
    if data.is_degenerate() {
        return Err(Error::DegenerateDataset);
    }
    let front_node = chain.front_extension()?;
    let back_node = chain.back_extension()?;
    let current = squared_distances_to_graph(data, &chain.to_graph());
    let first = &chain.nodes[0];
    let last = &chain.nodes[chain.len() - 1];
    // Adding one segment only ever lowers a point's distance, so each
    // candidate is the running minimum with the new segment.
    let mut c = 0.0;
    let mut b = 0.0;
    let mut e = 0.0;
    for (x, &d) in data.points().zip(&current) {
        c += d;
        b += d.min(squared_point_to_segment(x, &front_node, first));
        e += d.min(squared_point_to_segment(x, last, &back_node));
    }
    let tv = data.total_variance();
    Ok(GrowCandidates {
        cfvu: c / tv,
        bfvu: b / tv,
        efvu: e / tv,
        front_node,
        back_node,
    })
}

/// Candidates scored after retraining each extended chain with
/// [`batch_som_optimize`]. Also returns the trained front and back chains.
pub fn trained_grow_candidates(
    chain: &Chain,
    data: &Dataset,
    cfg: &SomConfig,
) -> Result<(GrowCandidates, Chain, Chain)> {
    let cfvu = fvu_graph(data, &chain.to_graph())?;
    let train = |end| -> Result<(Chain, f64)> {
        let mut grown = chain.clone();
        grown.grow(end)?;
        let trained = batch_som_optimize(&grown, data, cfg).chain;
        let fvu = fvu_graph(data, &trained.to_graph())?;
        Ok((trained, fvu))
    };
    let (front, bfvu) = train(End::Front)?;
    let (back, efvu) = train(End::Back)?;
    let cands = GrowCandidates {
        cfvu,
        bfvu,
        efvu,
        front_node: chain.front_extension()?,
        back_node: chain.back_extension()?,
    };
    Ok((cands, front, back))
}

/// One pass of the growth loop, recorded for inspection and replay.
#[derive(Debug, Clone, PartialEq)]
pub struct GsomStep {
    pub n_nodes: usize,
    pub som_iterations: usize,
    pub cfvu: f64,
    pub candidates: Option<(f64, f64)>,
    pub grew: Option<End>,
}

#[derive(Debug, Clone)]
pub struct GsomFit {
    pub chain: Chain,
    pub fvu: f64,
    pub status: FitStatus,
    pub trace: Vec<GsomStep>,
}

/// Two nodes at `mean ± σ₁·e₁`.
pub fn initial_chain(data: &Dataset) -> Result<Chain> {
    let pc = first_principal_component(data)?;
    let dir = &pc.line.direction;
    let mean = data.mean();
    Chain::new(vec![axpy(mean, -pc.sigma, dir), axpy(mean, pc.sigma, dir)])
}

pub fn fit_gsom(data: &Dataset, cfg: &SomConfig) -> Result<GsomFit> {
    cfg.validate()?;
    if data.len() < 2 || data.is_degenerate() {
        return Err(Error::DegenerateDataset);
    }
    let mut chain = initial_chain(data)?;
    let mut trace = Vec::new();
    loop {
        let run = batch_som_optimize(&chain, data, cfg);
        chain = run.chain;
        let cfvu = fvu_graph(data, &chain.to_graph())?;
        let mut step = GsomStep {
            n_nodes: chain.len(),
            som_iterations: run.iterations,
            cfvu,
            candidates: None,
            grew: None,
        };
        if cfvu <= cfg.fvu_threshold {
            trace.push(step);
            return Ok(GsomFit {
                chain,
                fvu: cfvu,
                status: FitStatus::Converged,
                trace,
            });
        }
        let mut trained = None;
        let choice = if chain.len() >= cfg.max_nodes {
            None
        } else if cfg.retrain_candidates {
            let (cands, front, back) = trained_grow_candidates(&chain, data, cfg)?;
            step.candidates = Some((cands.bfvu, cands.efvu));
            trained = Some((front, back));
            cands.choice()
        } else {
            let cands = grow_candidates(&chain, data)?;
            step.candidates = Some((cands.bfvu, cands.efvu));
            cands.choice()
        };
        step.grew = choice;
        trace.push(step);
        match (choice, trained) {
            (Some(End::Front), Some((front, _))) => chain = front,
            (Some(End::Back), Some((_, back))) => chain = back,
            (Some(end), None) => chain.grow(end)?,
            (None, _) => {
                return Ok(GsomFit {
                    chain,
                    fvu: cfvu,
                    status: FitStatus::Stalled,
                    trace,
                })
            }
        }
    }
}
