mod common;

use common::*;
use geocomplex::accuracy::{first_principal_component, fvu_line};
use geocomplex::gsom::{
    batch_som_optimize, fit_gsom, grow_candidates, Chain, End, SomConfig,
};
use geocomplex::principal_tree::{elastic_energy, solve_positions, ElasticConfig, Partition};
use geocomplex::FitStatus;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn pc1_line_leaves_the_second_eigenvalue_unexplained() {
    let pts: Vec<P> = (0..40)
        .map(|i| {
            let t = i as f64 * 0.37;
            [t.cos() * 3.0 + 0.1 * t, 0.8 * t.sin() + 0.05 * (i % 7) as f64]
        })
        .collect();
    let data = dataset(&pts);
    let (l1, l2, e) = pca2(&pts);
    let pc = first_principal_component(&data).unwrap();
    assert!(rel_close(pc.eigenvalue, l1, 1e-9));
    assert!((pc.line.direction[0] - e[0]).abs() < 1e-9);
    assert!((pc.line.direction[1] - e[1]).abs() < 1e-9);
    let fvu = fvu_line(&data, &pc.line).unwrap();
    assert!(rel_close(fvu, l2 / (l1 + l2), 1e-9));
}

#[test]
fn two_node_som_converges_to_the_kernel_weighted_cluster_means() {
    // Clusters far apart: point i is always matched to the nearer node, so
    // the fixed point is v0 = (S0 + h·S1)/(n0 + h·n1), v1 symmetric.
    let left = [[0.0, 0.0], [0.2, 0.1], [-0.1, 0.3]];
    let right = [[10.0, 1.0], [10.3, 0.8], [9.9, 1.2], [10.1, 1.1]];
    let pts: Vec<P> = left.iter().chain(&right).copied().collect();
    let data = dataset(&pts);
    for radius in [0.5, 3.0] {
        let h = (1.0f64 - 1.0 / radius).max(0.0);
        let s0 = left.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        let s1 = right.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        let (n0, n1) = (left.len() as f64, right.len() as f64);
        let v0 = [0, 1].map(|k| (s0[k] + h * s1[k]) / (n0 + h * n1));
        let v1 = [0, 1].map(|k| (h * s0[k] + s1[k]) / (h * n0 + n1));
        let cfg = SomConfig {
            neighbourhood_radius: radius,
            convergence_tol: 1e-14,
            max_batch_iterations: 500,
            ..SomConfig::default()
        };
        let start = Chain::new(vec![vec![1.0, 0.0], vec![8.0, 0.0]]).unwrap();
        let run = batch_som_optimize(&start, &data, &cfg);
        assert!(run.converged);
        for k in 0..2 {
            assert!((run.chain.nodes()[0][k] - v0[k]).abs() < 1e-10, "r={radius}");
            assert!((run.chain.nodes()[1][k] - v1[k]).abs() < 1e-10, "r={radius}");
        }
    }
}

#[test]
fn back_extension_beats_current_on_data_past_the_end() {
    let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.1], [4.0, 0.0]];
    let chain_pts = [[0.0, 0.0], [2.0, 0.0]];
    let data = dataset(&pts);
    let chain = Chain::new(chain_pts.iter().map(|p| p.to_vec()).collect()).unwrap();
    let c = grow_candidates(&chain, &data).unwrap();
    let cfvu = fvu(&pts, &chain_pts, &[(0, 1)]);
    let front = [[-2.0, 0.0], [0.0, 0.0], [2.0, 0.0]];
    let back = [[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]];
    assert!(rel_close(c.cfvu, cfvu, 1e-12));
    assert!(rel_close(c.bfvu, fvu(&pts, &front, &chain_edges(3)), 1e-12));
    assert!(rel_close(c.efvu, fvu(&pts, &back, &chain_edges(3)), 1e-12));
    assert!(c.efvu < c.cfvu);
    assert_eq!(c.bfvu, c.cfvu);
    assert_eq!(c.choice(), Some(End::Back));
}

const L_SHAPE: [P; 6] = [[0.0, 0.0], [1.0, 0.05], [2.0, 0.0], [3.0, 0.0], [3.1, 1.0], [3.0, 2.2]];

fn replay_matches(retrain: bool, threshold: f64) {
    let data = dataset(&L_SHAPE);
    let cfg = SomConfig {
        fvu_threshold: threshold,
        retrain_candidates: retrain,
        ..SomConfig::default()
    };
    let fit = fit_gsom(&data, &cfg).unwrap();
    let oracle = gsom(&L_SHAPE, 3.0, threshold, retrain, cfg.max_nodes);
    assert_eq!(fit.trace.len(), oracle.passes.len());
    for (step, pass) in fit.trace.iter().zip(&oracle.passes) {
        assert_eq!(step.n_nodes, pass.n);
        assert!(rel_close(step.cfvu, pass.cfvu, 1e-9), "{} vs {}", step.cfvu, pass.cfvu);
        let grew = step.grew.map(|e| e == End::Back);
        assert_eq!(grew, pass.grew_back);
    }
    assert_eq!(fit.status == FitStatus::Converged, oracle.converged);
    for (a, b) in fit.chain.nodes().iter().zip(&oracle.chain) {
        assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
    }
    let grown = fit.trace.iter().filter(|s| s.grew.is_some()).count();
    assert!(grown >= 2, "only {grown} growth steps");
}

#[test]
fn l_shape_growth_matches_straight_line_replay() {
    replay_matches(true, 1e-3);
}

#[test]
fn l_shape_growth_matches_replay_without_retraining() {
    replay_matches(false, 1e-3);
}

#[test]
fn three_node_solve_matches_gradient_descent() {
    let pts = [[0.0, 0.0], [0.9, 0.4], [1.1, 0.5], [2.0, -0.2], [2.2, 0.1], [3.1, 0.0]];
    let data = dataset(&pts);
    let nodes = [[0.0, 0.0], [1.5, 0.5], [3.0, 0.0]];
    let g = graph(&nodes, &chain_edges(3));
    let cfg = ElasticConfig {
        lambda_stretch: 0.05,
        mu_bend: 0.02,
        ..ElasticConfig::default()
    };
    let part = Partition::nearest(&g, &data);
    let solved = solve_positions(&g, &data, &part, &cfg).unwrap();

    // Plain gradient descent on the fixed-partition energy, gradients by
    // central differences on the oracle energy.
    let tree = Tree { pos: nodes.to_vec(), edges: chain_edges(3) };
    let assignment = part.assignment.clone();
    let f = |pos: &[P]| {
        let t = Tree { pos: pos.to_vec(), edges: tree.edges.clone() };
        energy(&t, &pts, &assignment, cfg.lambda_stretch, cfg.mu_bend)
    };
    let mut x = tree.pos.clone();
    let h = 1e-6;
    for _ in 0..20_000 {
        let mut grad = vec![[0.0; 2]; x.len()];
        for j in 0..x.len() {
            for k in 0..2 {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[j][k] += h;
                dn[j][k] -= h;
                grad[j][k] = (f(&up) - f(&dn)) / (2.0 * h);
            }
        }
        for j in 0..x.len() {
            for k in 0..2 {
                x[j][k] -= 0.5 * grad[j][k];
            }
        }
    }
    for (a, b) in solved.positions().iter().zip(&x) {
        assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6, "{a:?} vs {b:?}");
    }
    let e_lib = elastic_energy(&solved, &data, &part, &cfg).unwrap().total;
    assert!(rel_close(e_lib, f(&x), 1e-9));
}

#[test]
fn elastic_solve_matches_independent_elimination() {
    let pts = [
        [0.0, 0.0], [0.5, 0.3], [1.0, 0.9], [1.2, 1.8], [1.9, 0.8], [2.4, 0.2], [1.0, -0.4],
    ];
    let nodes = [[0.0, 0.0], [1.0, 0.5], [1.2, 1.5], [2.0, 0.5], [1.0, -0.5]];
    let edges = [(0, 1), (1, 2), (1, 3), (1, 4)];
    let cfg = ElasticConfig::default();
    let data = dataset(&pts);
    let g = graph(&nodes, &edges);
    let part = Partition::nearest(&g, &data);
    let lib = solve_positions(&g, &data, &part, &cfg).unwrap();
    let tree = Tree { pos: nodes.to_vec(), edges: edges.to_vec() };
    let oracle = solve(&tree, &pts, &part.assignment, cfg.lambda_stretch, cfg.mu_bend);
    for (a, b) in lib.positions().iter().zip(&oracle.pos) {
        assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
    }
}
