mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w1plus::graph::VertexId;
use w1plus::orientation::OrientedGraph;
use w1plus::pipeline::{self, PipelineOptions};
use w1plus::transport::UnionMethod;
use w1plus::verify::{self, VerifyOptions};
use w1plus::weights::WeightSystem;

fn random_orientation(seed: u64, max_n: usize) -> Arc<OrientedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = common::random_instance(&mut rng, max_n, 6);
    let g = Arc::new(inst.graph);
    pipeline::orient(&g, &inst.f0, &inst.f1, UnionMethod::Auto).unwrap().1
}

/// All oriented paths from `x` to `y`, by depth-first search.
fn oriented_paths(og: &OrientedGraph, x: VertexId, y: VertexId) -> Vec<Vec<VertexId>> {
    fn go(og: &OrientedGraph, y: VertexId, path: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        let last = *path.last().unwrap();
        if last == y {
            out.push(path.clone());
            return;
        }
        for s in og.successors(last).collect::<Vec<_>>() {
            path.push(s);
            go(og, y, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(og, y, &mut vec![x], &mut out);
    out
}

/// `Π m(edges) / Π m(interior vertices)` straight from the edge weights.
fn chain_weight(w: &WeightSystem, path: &[VertexId]) -> f64 {
    let og = w.oriented();
    if path.len() == 1 {
        return w.vertex_weight(path[0]);
    }
    let mut m = 1.0;
    for pair in path.windows(2) {
        m *= w.edge_weight(og.edge_id(pair[0], pair[1]).unwrap());
    }
    for &v in &path[1..path.len() - 1] {
        m /= w.vertex_weight(v);
    }
    m
}

/// Positive divergence-free weights: a random positive amount routed along
/// one source-to-sink path through every edge.
fn random_flow<R: Rng>(og: &OrientedGraph, rng: &mut R) -> Vec<f64> {
    let mut edge = vec![0.0; og.edges().len()];
    for e in 0..og.edges().len() {
        let (a, b) = og.edges()[e];
        let amount = rng.gen_range(0.5..2.0);
        edge[e] += amount;
        let mut v = a;
        while let Some(p) = og.predecessors(v).next() {
            edge[og.edge_id(p, v).unwrap()] += amount;
            v = p;
        }
        let mut v = b;
        while let Some(s) = og.successors(v).next() {
            edge[og.edge_id(v, s).unwrap()] += amount;
            v = s;
        }
    }
    edge
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pair_weights_sum_over_oriented_paths(seed in any::<u64>()) {
        let og = random_orientation(seed, 25);
        let w = WeightSystem::default_weights(og.clone());
        let order = w.order();
        for &x in og.active() {
            for &y in og.active() {
                if !order.leq(x, y) {
                    prop_assert!(w.pair_weight(x, y).is_err());
                    continue;
                }
                let paths = oriented_paths(&og, x, y);
                if paths.len() > 200 {
                    continue;
                }
                let brute: f64 = paths.iter().map(|p| chain_weight(&w, p)).sum();
                prop_assert!(rel(w.pair_weight(x, y).unwrap(), brute) < 1e-12);
            }
        }
    }

    #[test]
    fn chain_decomposition(seed in any::<u64>()) {
        let og = random_orientation(seed, 30);
        let w = WeightSystem::default_weights(og.clone());
        let order = w.order();
        let act = og.active();
        for &x in act {
            for &z in act.iter().filter(|&&z| order.leq(x, z)) {
                for &y in act.iter().filter(|&&y| order.leq(z, y)) {
                    let chain = w.tuple_weight(&[x, z, y]).unwrap();
                    let split = w.pair_weight(x, z).unwrap() * w.pair_weight(z, y).unwrap() / w.vertex_weight(z);
                    prop_assert!(rel(chain, split) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn kernels_with_random_flows(seed in any::<u64>()) {
        let og = random_orientation(seed, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let w = WeightSystem::custom(og.clone(), random_flow(&og, &mut rng)).unwrap();
        let k = w.kernels();
        let n = og.vertex_count();

        // row sums
        for &x in og.active() {
            let row: f64 = k.k_row(x).iter().map(|&(_, v)| v).sum();
            let star: f64 = k.k_star_row(x).iter().map(|&(_, v)| v).sum();
            prop_assert!(og.is_source(x) || (row - 1.0).abs() < 1e-12);
            prop_assert!(og.is_sink(x) || (star - 1.0).abs() < 1e-12);
        }

        // adjointness
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = k.inner(&k.apply_k(&f), &g);
        let rhs = k.inner(&f, &k.apply_k_star(&g));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));

        // iterated kernel against pair weights
        for &x0 in og.active() {
            let mut e = vec![0.0; n];
            e[x0] = 1.0;
            for &xn in og.active() {
                if let Some(d) = w.oriented_distance(x0, xn) {
                    let kn = k.apply_k_power(&e, d as usize)[xn];
                    let want = w.pair_weight(x0, xn).unwrap() / w.vertex_weight(xn);
                    prop_assert!((kn - want).abs() < 1e-10, "{kn} vs {want}");
                }
            }
        }

        // nilpotency
        prop_assert!(k.nilpotency_index() <= og.depth() + 1);
        let ones = vec![1.0; n];
        prop_assert!(k.apply_k_power(&ones, og.depth() + 1).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn custom_weights_give_a_verified_curve() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let opts = VerifyOptions {
        perturbations: 0,
        ..VerifyOptions::default()
    };
    for _ in 0..12 {
        let inst = common::random_instance(&mut rng, 30, 5);
        let g = Arc::new(inst.graph);
        let og = pipeline::orient(&g, &inst.f0, &inst.f1, UnionMethod::Auto).unwrap().1;
        let w = WeightSystem::custom(og.clone(), random_flow(&og, &mut rng)).unwrap();
        let named = w1plus::io::WeightsDoc::from_weights(&w).named().unwrap();
        let run = pipeline::interpolate(
            g,
            &inst.f0,
            &inst.f1,
            &PipelineOptions {
                weights: pipeline::WeightChoice::Named(named),
                ..PipelineOptions::default()
            },
        );
        let run = match run {
            Err(w1plus::Error::DegenerateFace(..)) => continue,
            r => r.unwrap(),
        };
        let report = verify::verify(&run.curve, &opts);
        let failed: Vec<_> = report.failures().map(|c| (&c.name, c.residual)).collect();
        assert!(report.passed, "{}: {failed:?}", inst.label);
    }
}

#[test]
fn weights_on_the_diamond_and_a_short_path() {
    let g = Arc::new(common::diamond());
    let og = Arc::new(OrientedGraph::from_parts(g, vec![0, 1, 2, 3], vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap());
    let w = WeightSystem::custom(og.clone(), vec![1.0; 4]).unwrap();
    assert_eq!(w.vertex_weight(0), 2.0);
    let err = WeightSystem::custom(og.clone(), vec![2.0, 1.0, 1.0, 1.0]).unwrap_err();
    assert!(matches!(err, w1plus::Error::DivergenceViolation { ref vertex, .. } if vertex == "a"));
    assert_eq!(w.pair_weight(0, 3).unwrap(), 2.0);
    assert_eq!(w.tuple_weight(&[0, 1, 3]).unwrap(), 1.0);
    assert_eq!(w.tuple_weight(&[2]).unwrap(), w.vertex_weight(2));
    let k = w.kernels();
    assert_eq!(k.k_row(3).iter().find(|&&(v, _)| v == 1).unwrap().1, 0.5);
    assert!(k.k_row(0).is_empty());

    let p = Arc::new(w1plus::graph::Graph::path(2));
    let og = Arc::new(OrientedGraph::from_parts(p, vec![0, 1, 2], vec![(0, 1), (1, 2)]).unwrap());
    let w = WeightSystem::custom(og, vec![3.0, 3.0]).unwrap();
    assert_eq!(w.vertex_weight(1), 3.0);
}
