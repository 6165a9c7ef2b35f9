//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use recirc::milp::LinearProgram;
use recirc::pipeline::{self, Mode, RunOutput};
use recirc::routing::{BinNode, CollectionGraph, NodeId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All-integer program with `n` variables in `[0, 3]` and up to six rows of
/// mixed-sign integer coefficients.
pub fn random_milp(r: &mut impl Rng) -> LinearProgram {
    let n = r.random_range(1..=8);
    let m = r.random_range(0..=6);
    let mut lp = LinearProgram::with_objective((0..n).map(|_| r.random_range(-10..=10) as f64).collect());
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| r.random_range(-5..=5) as f64).collect();
        let rhs = r.random_range(-4..=12) as f64;
        lp.push_row(coeffs, rhs);
    }
    lp.upper_bounds = vec![3.0; n];
    lp.integer_mask = vec![true; n];
    lp
}

/// Minimum objective over every integer point in the bounds box, or `None`
/// when no point satisfies all rows.
pub fn brute_force_milp(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let lo: Vec<i64> = lp.lower_bounds.iter().map(|v| v.ceil() as i64).collect();
    let hi: Vec<i64> = lp.upper_bounds.iter().map(|v| v.floor() as i64).collect();
    let mut x: Vec<i64> = lo.clone();
    let mut best: Option<f64> = None;
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return None;
    }
    loop {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        if lp.rows.iter().all(|row| row.activity(&xf) <= row.rhs + 1e-9) {
            let obj = lp.objective_value(&xf);
            if best.is_none_or(|b| obj < b) {
                best = Some(obj);
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                return best;
            }
            if x[j] < hi[j] {
                x[j] += 1;
                break;
            }
            x[j] = lo[j];
            j += 1;
        }
    }
}

/// Depot 0 plus `bins` bins at random points; complete graph with random
/// per-edge emission rates.
pub fn random_complete_graph(r: &mut impl Rng, bins: usize) -> CollectionGraph {
    let pts: Vec<(f64, f64)> = (0..=bins).map(|_| (r.random_range(0.0..10.0), r.random_range(0.0..10.0))).collect();
    let nodes = (0..=bins as NodeId)
        .map(|id| BinNode {
            id,
            fill_level: 1.0,
            is_depot: id == 0,
        })
        .collect();
    let mut g = CollectionGraph::new(nodes);
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let d = ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
            g.add_edge(a as NodeId, b as NodeId, d, r.random_range(0.5..1.5));
        }
    }
    g
}

fn permute(items: &mut Vec<NodeId>, k: usize, visit: &mut impl FnMut(&[NodeId])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Cheapest closed tour from the depot over every service bin, by
/// enumerating all visit orders.
pub fn best_tour(g: &CollectionGraph) -> f64 {
    let depot = g.depot().expect("graph has a depot");
    let mut bins: Vec<NodeId> = g.service_bins();
    let mut best = f64::INFINITY;
    permute(&mut bins, 0, &mut |order| {
        let mut cost = 0.0;
        let mut at = depot;
        for &b in order {
            cost += g.leg_emissions(at, b).expect("complete graph");
            at = b;
        }
        cost += g.leg_emissions(at, depot).expect("complete graph");
        best = best.min(cost);
    });
    best
}

pub fn run_fixture(name: &str, mode: Mode) -> RunOutput {
    let spec = recirc::fixtures::scenario(name).expect("bundled fixture parses");
    pipeline::run(&spec, mode, None).expect("bundled fixture runs")
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
