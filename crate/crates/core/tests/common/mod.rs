//! Straight-line reference implementations used as test oracles. They work
//! on plain 2-D arrays and share no code with the library.
#![allow(dead_code)]

use geocomplex::{Dataset, EmbeddedGraph};

pub type P = [f64; 2];

pub fn dataset(points: &[P]) -> Dataset {
    Dataset::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
}

pub fn graph(nodes: &[P], edges: &[(usize, usize)]) -> EmbeddedGraph {
    EmbeddedGraph::new(nodes.iter().map(|p| p.to_vec()).collect(), edges.to_vec()).unwrap()
}

pub fn as_points(g: &EmbeddedGraph) -> Vec<P> {
    g.positions().iter().map(|v| [v[0], v[1]]).collect()
}

pub fn d2(a: P, b: P) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

pub fn seg_d2(x: P, a: P, b: P) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return d2(x, a);
    }
    let t = (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    d2(x, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

pub fn mean(data: &[P]) -> P {
    let n = data.len() as f64;
    [
        data.iter().map(|p| p[0]).sum::<f64>() / n,
        data.iter().map(|p| p[1]).sum::<f64>() / n,
    ]
}

pub fn fvu(data: &[P], nodes: &[P], edges: &[(usize, usize)]) -> f64 {
    let m = mean(data);
    let tv: f64 = data.iter().map(|&x| d2(x, m)).sum();
    let sse: f64 = data
        .iter()
        .map(|&x| {
            if edges.is_empty() {
                nodes.iter().map(|&v| d2(x, v)).fold(f64::INFINITY, f64::min)
            } else {
                edges
                    .iter()
                    .map(|&(a, b)| seg_d2(x, nodes[a], nodes[b]))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .sum();
    sse / tv
}

pub fn chain_edges(k: usize) -> Vec<(usize, usize)> {
    (1..k).map(|i| (i - 1, i)).collect()
}

/// Closed-form 2×2 eigen-decomposition of the 1/n covariance:
/// (λ₁, λ₂, unit e₁ with its largest component positive).
pub fn pca2(data: &[P]) -> (f64, f64, P) {
    let m = mean(data);
    let n = data.len() as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in data {
        let (x, y) = (p[0] - m[0], p[1] - m[1]);
        a += x * x / n;
        b += x * y / n;
        c += y * y / n;
    }
    let half = (a - c) / 2.0;
    let r = (half * half + b * b).sqrt();
    let (l1, l2) = ((a + c) / 2.0 + r, (a + c) / 2.0 - r);
    let mut e = if b != 0.0 {
        [l1 - c, b]
    } else if a >= c {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let norm = (e[0] * e[0] + e[1] * e[1]).sqrt();
    e = [e[0] / norm, e[1] / norm];
    let big = if e[0].abs() >= e[1].abs() { e[0] } else { e[1] };
    if big < 0.0 {
        e = [-e[0], -e[1]];
    }
    (l1, l2, e)
}

pub fn bbox_diagonal(data: &[P]) -> f64 {
    let lo = [0, 1].map(|k| data.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min));
    let hi = [0, 1].map(|k| data.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max));
    d2(lo, hi).sqrt()
}

pub fn initial_pair(data: &[P]) -> Vec<P> {
    let (l1, _, e) = pca2(data);
    let m = mean(data);
    let s = l1.sqrt();
    vec![
        [m[0] - s * e[0], m[1] - s * e[1]],
        [m[0] + s * e[0], m[1] + s * e[1]],
    ]
}

// ---- growing SOM ----

pub fn kernel(d: usize, r: f64) -> f64 {
    (1.0 - d as f64 / r).max(0.0)
}

pub fn nearest(nodes: &[P], x: P) -> usize {
    let mut best = 0;
    for j in 1..nodes.len() {
        if d2(x, nodes[j]) < d2(x, nodes[best]) {
            best = j;
        }
    }
    best
}

/// Batch SOM update written point by point.
pub fn som_step(chain: &[P], data: &[P], r: f64) -> Vec<P> {
    let bmu: Vec<usize> = data.iter().map(|&x| nearest(chain, x)).collect();
    (0..chain.len())
        .map(|j| {
            let mut num = [0.0, 0.0];
            let mut den = 0.0;
            for (x, &g) in data.iter().zip(&bmu) {
                let h = kernel(g.abs_diff(j), r);
                num[0] += h * x[0];
                num[1] += h * x[1];
                den += h;
            }
            if den > 0.0 {
                [num[0] / den, num[1] / den]
            } else {
                chain[j]
            }
        })
        .collect()
}

pub fn som_optimize(chain: &[P], data: &[P], r: f64, tol: f64, max_it: usize) -> Vec<P> {
    let limit = tol * bbox_diagonal(data);
    let mut cur = chain.to_vec();
    for _ in 0..max_it {
        let next = som_step(&cur, data, r);
        let moved = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| d2(*a, *b).sqrt())
            .fold(0.0, f64::max);
        cur = next;
        if moved <= limit {
            break;
        }
    }
    cur
}

pub fn extend(chain: &[P], back: bool) -> Vec<P> {
    let mut out = chain.to_vec();
    if back {
        let (a, b) = (chain[chain.len() - 1], chain[chain.len() - 2]);
        out.push([2.0 * a[0] - b[0], 2.0 * a[1] - b[1]]);
    } else {
        let (a, b) = (chain[0], chain[1]);
        out.insert(0, [2.0 * a[0] - b[0], 2.0 * a[1] - b[1]]);
    }
    out
}

/// One recorded loop pass: node count, CFVU, and the end grown
/// (`Some(true)` back, `Some(false)` front, `None` stop).
#[derive(Debug, Clone, PartialEq)]
pub struct SomPass {
    pub n: usize,
    pub cfvu: f64,
    pub grew_back: Option<bool>,
}

pub struct SomResult {
    pub chain: Vec<P>,
    pub passes: Vec<SomPass>,
    pub converged: bool,
}

/// The growth loop with default training settings (tol 1e-4, 100 steps).
pub fn gsom(data: &[P], r: f64, threshold: f64, retrain: bool, max_nodes: usize) -> SomResult {
    let train = |c: &[P]| som_optimize(c, data, r, 1e-4, 100);
    let mut chain = initial_pair(data);
    let mut passes = Vec::new();
    loop {
        chain = train(&chain);
        let cfvu = fvu(data, &chain, &chain_edges(chain.len()));
        if cfvu <= threshold {
            passes.push(SomPass { n: chain.len(), cfvu, grew_back: None });
            return SomResult { chain, passes, converged: true };
        }
        if chain.len() >= max_nodes {
            passes.push(SomPass { n: chain.len(), cfvu, grew_back: None });
            return SomResult { chain, passes, converged: false };
        }
        let mut front = extend(&chain, false);
        let mut back = extend(&chain, true);
        if retrain {
            front = train(&front);
            back = train(&back);
        }
        let bfvu = fvu(data, &front, &chain_edges(front.len()));
        let efvu = fvu(data, &back, &chain_edges(back.len()));
        let grew_back = if efvu < cfvu && efvu <= bfvu {
            Some(true)
        } else if bfvu < cfvu && bfvu < efvu {
            Some(false)
        } else {
            None
        };
        passes.push(SomPass { n: chain.len(), cfvu, grew_back });
        match grew_back {
            Some(true) => chain = back,
            Some(false) => chain = front,
            None => return SomResult { chain, passes, converged: false },
        }
    }
}

// ---- elastic principal tree ----

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub pos: Vec<P>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Add(usize),
    Bisect(usize, usize),
    Remove(usize),
    Contract(usize, usize),
}

impl Op {
    /// Same text form as the library's operation display.
    pub fn label(&self) -> String {
        match *self {
            Op::Add(v) => format!("add-leaf({v})"),
            Op::Bisect(a, b) => format!("bisect({a},{b})"),
            Op::Remove(v) => format!("remove-leaf({v})"),
            Op::Contract(a, b) => format!("contract({a},{b})"),
        }
    }
}

impl Tree {
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut nb: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        nb.sort();
        nb
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.edges.push((a.min(b), a.max(b)));
    }

    fn drop_node(&mut self, v: usize) {
        self.pos.remove(v);
        let s = |u: usize| if u > v { u - 1 } else { u };
        self.edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != v && b != v)
            .map(|&(a, b)| (s(a), s(b)))
            .collect();
    }
}

pub fn assign(tree: &Tree, data: &[P]) -> Vec<usize> {
    data.iter().map(|&x| nearest(&tree.pos, x)).collect()
}

pub fn energy(tree: &Tree, data: &[P], part: &[usize], lambda: f64, mu: f64) -> f64 {
    let approx: f64 =
        data.iter().zip(part).map(|(&x, &j)| d2(x, tree.pos[j])).sum::<f64>() / data.len() as f64;
    let stretch: f64 = tree.edges.iter().map(|&(a, b)| d2(tree.pos[a], tree.pos[b])).sum();
    let mut bend = 0.0;
    for v in 0..tree.pos.len() {
        let nb = tree.neighbours(v);
        if nb.len() < 2 {
            continue;
        }
        let k = nb.len() as f64;
        let s = nb.iter().fold([0.0, 0.0], |acc, &u| [acc[0] + tree.pos[u][0], acc[1] + tree.pos[u][1]]);
        bend += (s[0] - k * tree.pos[v][0]).powi(2) + (s[1] - k * tree.pos[v][1]).powi(2);
    }
    approx + lambda * stretch + mu * bend
}

/// Gaussian elimination with partial pivoting on an n×n system with two
/// right-hand sides.
fn gauss(mut a: Vec<Vec<f64>>, mut rhs: Vec<P>) -> Vec<P> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            rhs[row][0] -= f * rhs[col][0];
            rhs[row][1] -= f * rhs[col][1];
        }
    }
    let mut x = vec![[0.0; 2]; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc[0] -= a[row][k] * x[k][0];
            acc[1] -= a[row][k] * x[k][1];
        }
        x[row] = [acc[0] / a[row][row], acc[1] / a[row][row]];
    }
    x
}

/// Exact minimiser of the energy for a fixed partition, from the normal
/// equations written out term by term.
pub fn solve(tree: &Tree, data: &[P], part: &[usize], lambda: f64, mu: f64) -> Tree {
    let n = tree.pos.len();
    let nd = data.len() as f64;
    let mut a = vec![vec![0.0; n]; n];
    let mut rhs = vec![[0.0; 2]; n];
    for (x, &j) in data.iter().zip(part) {
        a[j][j] += 1.0 / nd;
        rhs[j][0] += x[0] / nd;
        rhs[j][1] += x[1] / nd;
    }
    for &(p, q) in &tree.edges {
        a[p][p] += lambda;
        a[q][q] += lambda;
        a[p][q] -= lambda;
        a[q][p] -= lambda;
    }
    for v in 0..n {
        let nb = tree.neighbours(v);
        if nb.len() < 2 {
            continue;
        }
        let mut w = vec![0.0; n];
        w[v] = -(nb.len() as f64);
        for &u in &nb {
            w[u] = 1.0;
        }
        for r in 0..n {
            for s in 0..n {
                a[r][s] += mu * w[r] * w[s];
            }
        }
    }
    Tree { pos: gauss(a, rhs), edges: tree.edges.clone() }
}

pub fn optimize(tree: &Tree, data: &[P], lambda: f64, mu: f64, tol: f64, max_it: usize) -> Tree {
    let mut cur = tree.clone();
    let mut e = energy(&cur, data, &assign(&cur, data), lambda, mu);
    for _ in 0..max_it {
        let part = assign(&cur, data);
        cur = solve(&cur, data, &part, lambda, mu);
        let next = energy(&cur, data, &part, lambda, mu);
        let stop = e - next <= tol * e.abs();
        e = next;
        if stop {
            break;
        }
    }
    cur
}

pub fn candidates(tree: &Tree, growing: bool) -> Vec<Op> {
    let n = tree.pos.len();
    let mut ops = Vec::new();
    if growing {
        ops.extend((0..n).map(Op::Add));
        ops.extend(tree.edges.iter().map(|&(a, b)| Op::Bisect(a, b)));
    } else {
        ops.extend((0..n).filter(|&v| tree.neighbours(v).len() == 1).map(Op::Remove));
        ops.extend(tree.edges.iter().map(|&(a, b)| Op::Contract(a, b)));
    }
    ops
}

pub fn apply(tree: &Tree, op: Op, fallback: P) -> Tree {
    let mut t = tree.clone();
    match op {
        Op::Add(v) => {
            let nb = t.neighbours(v);
            let p = t.pos[v];
            let new = if nb.len() == 1 {
                let u = t.pos[nb[0]];
                [2.0 * p[0] - u[0], 2.0 * p[1] - u[1]]
            } else {
                let mut off = [0.0, 0.0];
                if !nb.is_empty() {
                    let k = nb.len() as f64;
                    let c = nb.iter().fold([0.0, 0.0], |acc, &u| [acc[0] + t.pos[u][0] / k, acc[1] + t.pos[u][1] / k]);
                    off = [p[0] - c[0], p[1] - c[1]];
                }
                if off[0] * off[0] + off[1] * off[1] > 0.0 {
                    [p[0] + off[0], p[1] + off[1]]
                } else {
                    [p[0] + fallback[0], p[1] + fallback[1]]
                }
            };
            t.pos.push(new);
            t.add_edge(v, t.pos.len() - 1);
        }
        Op::Bisect(a, b) => {
            let (pa, pb) = (t.pos[a], t.pos[b]);
            t.edges.retain(|&e| e != (a.min(b), a.max(b)));
            t.pos.push([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0]);
            let m = t.pos.len() - 1;
            t.add_edge(a, m);
            t.add_edge(m, b);
        }
        Op::Remove(v) => t.drop_node(v),
        Op::Contract(a, b) => {
            let (keep, gone) = (a.min(b), a.max(b));
            let (pk, pg) = (t.pos[keep], t.pos[gone]);
            t.pos[keep] = [(pk[0] + pg[0]) / 2.0, (pk[1] + pg[1]) / 2.0];
            for u in t.neighbours(gone) {
                let e = (keep.min(u), keep.max(u));
                if u != keep && !t.edges.contains(&e) {
                    t.edges.push(e);
                }
            }
            t.drop_node(gone);
        }
    }
    t
}

/// Replays the fit schedule for `steps` grammar applications (or until the
/// threshold is met) and returns the labels of the applied operations with
/// their one-pass energies.
pub fn pt_replay(data: &[P], lambda: f64, mu: f64, threshold: f64, steps: usize) -> Vec<(String, f64)> {
    let (_, _, e) = pca2(data);
    let diam = bbox_diagonal(data);
    let fallback = [1e-3 * diam * e[0], 1e-3 * diam * e[1]];
    let mut tree = Tree { pos: initial_pair(data), edges: vec![(0, 1)] };
    let mut out = Vec::new();
    for step in 0..steps {
        tree = optimize(&tree, data, lambda, mu, 1e-4, 100);
        if fvu(data, &tree.pos, &tree.edges) <= threshold {
            break;
        }
        let growing = step % 4 < 3;
        let mut best: Option<(Op, Tree, f64)> = None;
        for op in candidates(&tree, growing) {
            let applied = apply(&tree, op, fallback);
            let part = assign(&applied, data);
            let solved = solve(&applied, data, &part, lambda, mu);
            let en = energy(&solved, data, &part, lambda, mu);
            if best.as_ref().is_none_or(|b| en < b.2) {
                best = Some((op, solved, en));
            }
        }
        let (op, solved, en) = best.expect("at least one candidate");
        out.push((op.label(), en));
        tree = solved;
    }
    out
}
