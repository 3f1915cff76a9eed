mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w1plus::curve::uniform_grid;
use w1plus::graph::{Graph, Measure};
use w1plus::oracle::{contraction, thinning};
use w1plus::pipeline::{interpolate, PipelineOptions};
use w1plus::verify::{contraction_residual, path_order};

#[test]
fn paths_from_a_dirac_reproduce_thinning() {
    for n in 1..=12 {
        let g = Graph::path(n);
        let order = path_order(&g).unwrap();
        let r = common::run(g.clone(), &Measure::dirac(&g, order[0]), &Measure::dirac(&g, order[n]));
        let mut target = vec![0.0; n + 1];
        target[n] = 1.0;
        for t in uniform_grid(11) {
            let want = thinning(&target, t).unwrap();
            let got = r.curve.density_at(t);
            for (k, &v) in order.iter().enumerate() {
                assert!((got[v] - want[k]).abs() <= 1e-9, "n={n} t={t} k={k}");
            }
        }
    }
}

#[test]
fn contraction_on_a_path_is_thinning() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(1..10);
        let g = Graph::path(n);
        let k = rng.gen_range(1..=n + 1);
        let f1 = common::random_measure(&mut rng, &g, k);
        for t in [0.0, 0.25, 0.6, 1.0] {
            let c = contraction(&g, 0, &f1, t).unwrap();
            let th = thinning(f1.masses(), t).unwrap();
            for (a, b) in c.iter().zip(&th) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn contraction_onto_the_target_is_constant() {
    let g = common::diamond();
    for t in [0.0, 0.4, 1.0] {
        assert_eq!(contraction(&g, 2, &Measure::dirac(&g, 2), t).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dirac_source_curves_are_contractions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, 40, 6);
        let o = rng.gen_range(0..inst.graph.vertex_count());
        let f0 = Measure::dirac(&inst.graph, o);
        let r = interpolate(Arc::new(inst.graph), &f0, &inst.f1, &PipelineOptions::default()).unwrap();
        let residual = contraction_residual(&r.curve, o, &uniform_grid(11)).unwrap();
        prop_assert!(residual <= 1e-9, "{}: {residual:e}", inst.label);
    }
}
