mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w1plus::graph::Graph;
use w1plus::pipeline::{self, PipelineOptions};
use w1plus::scaling::{minimize_j, CostKernel, ScalingMethod, ScalingOptions};
use w1plus::transport::{is_optimal, Coupling, UnionMethod};
use w1plus::weights::WeightSystem;

use common::{entropy_objective, FacePolytope};

fn two_point() -> (Graph, w1plus::graph::Measure, w1plus::graph::Measure) {
    let g = Graph::path(2);
    let f0 = common::measure(&g, &[0.5, 0.5, 0.0]);
    let f1 = common::measure(&g, &[0.0, 0.5, 0.5]);
    (g, f0, f1)
}

/// Random points of the face polytope: random free masses, rejected until
/// the completion is nonnegative.
fn random_feasible<R: Rng>(poly: &FacePolytope, rng: &mut R, scale: f64) -> Option<Vec<f64>> {
    (0..10_000).find_map(|_| {
        let free: Vec<f64> = (0..poly.dimension()).map(|_| rng.gen_range(0.0..scale)).collect();
        poly.complete(&free)
    })
}

#[test]
fn two_point_costs_and_coupling() {
    let (g, f0, f1) = two_point();
    let r = pipeline::interpolate(Arc::new(g), &f0, &f1, &PipelineOptions::default()).unwrap();
    let ck = &r.kernel;
    let c = |x, y| ck.c[ck.index_of(x, y).unwrap()];
    assert_eq!((c(0, 1), c(1, 2), c(1, 1), c(0, 2)), (1.0, 1.0, 1.0, 0.5));
    let pi = |x, y| r.scaling.pi[ck.index_of(x, y).unwrap()];
    let s = std::f64::consts::SQRT_2;
    for (got, want) in [
        (pi(0, 1), 1.0 - s / 2.0),
        (pi(1, 2), 1.0 - s / 2.0),
        (pi(0, 2), s / 2.0 - 0.5),
        (pi(1, 1), s / 2.0 - 0.5),
    ] {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    // J is minimal against random feasible couplings
    let poly = FacePolytope::new(&ck.pairs, &f0, &f1);
    let best = entropy_objective(&r.scaling.pi, &ck.c);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let pi = random_feasible(&poly, &mut rng, 0.5).unwrap();
        assert!(best <= entropy_objective(&pi, &ck.c) + 1e-14);
    }
}

#[test]
fn objective_rises_monotonically_along_the_iteration() {
    let (g, f0, f1) = two_point();
    let r = pipeline::interpolate(Arc::new(g), &f0, &f1, &PipelineOptions::default()).unwrap();
    let opts = ScalingOptions {
        trace_objective: true,
        ..ScalingOptions::default()
    };
    let sr = minimize_j(&r.kernel, &f0, &f1, opts).unwrap();
    assert_eq!(sr.method, ScalingMethod::Ipfp);
    assert!(sr.objective_trace.len() > 2);
    for w in sr.objective_trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{} then {}", w[0], w[1]);
    }
    let last = *sr.objective_trace.last().unwrap();
    assert!((last - r.kernel.j_value(&sr.pi)).abs() < 1e-12);
}

#[test]
fn single_pair_face_closed_form() {
    let g = Graph::path(2);
    let f0 = common::measure(&g, &[1.0, 0.0, 0.0]);
    let f1 = common::measure(&g, &[0.0, 0.0, 1.0]);
    let r = pipeline::interpolate(Arc::new(g), &f0, &f1, &PipelineOptions::default()).unwrap();
    assert_eq!(r.scaling.method, ScalingMethod::Direct);
    assert_eq!(r.scaling.pi, vec![1.0]);
    let j = r.kernel.j_value(&r.scaling.pi);
    assert!((j - ((1.0f64 / 0.5).ln() - 1.0)).abs() < 1e-15);
}

#[test]
fn identical_measures_couple_diagonally() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let g = common::random_connected(&mut rng, 15, 4);
        let f = common::random_measure(&mut rng, &g, 4);
        let r = pipeline::interpolate(Arc::new(g), &f, &f, &PipelineOptions::default()).unwrap();
        for (x, y, m) in r.scaling.entries(&r.kernel) {
            if x == y {
                assert!((m - f.get(x)).abs() < 1e-15);
            } else {
                assert_eq!(m, 0.0);
            }
        }
        assert!(r.oriented.edges().is_empty());
    }
}

#[test]
fn objective_drops_when_leaving_the_boundary() {
    // from a coupling with an empty face pair, moving towards the minimiser
    // lowers J faster than any linear rate
    let (g, f0, f1) = two_point();
    let r = pipeline::interpolate(Arc::new(g), &f0, &f1, &PipelineOptions::default()).unwrap();
    let ck = &r.kernel;
    let mut corner = vec![0.0; ck.len()];
    corner[ck.index_of(0, 1).unwrap()] = 0.5;
    corner[ck.index_of(1, 2).unwrap()] = 0.5;
    let toward = |s: f64| -> Vec<f64> {
        corner.iter().zip(&r.scaling.pi).map(|(a, b)| a + s * (b - a)).collect()
    };
    let j0 = ck.j_value(&corner);
    let mut slopes = Vec::new();
    for s in [1e-3, 1e-5, 1e-7] {
        let slope = (ck.j_value(&toward(s)) - j0) / s;
        assert!(slope < 0.0);
        slopes.push(slope);
    }
    assert!(slopes[2] < slopes[1] && slopes[1] < slopes[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn minimiser_beats_random_feasible_couplings(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, 20, 4);
        let g = Arc::new(inst.graph);
        let (union, og) = pipeline::orient(&g, &inst.f0, &inst.f1, UnionMethod::Auto).unwrap();
        let w = WeightSystem::default_weights(og);
        let ck = CostKernel::new(&w, &inst.f0, &inst.f1).unwrap();
        let sr = match minimize_j(&ck, &inst.f0, &inst.f1, ScalingOptions::default()) {
            Err(w1plus::Error::DegenerateFace(..)) => return Ok(()),
            r => r.unwrap(),
        };
        prop_assert!(sr.marginal_error <= 1e-12);
        let best = entropy_objective(&sr.pi, &ck.c);
        prop_assert!((best - ck.j_value(&sr.pi)).abs() < 1e-12);

        let poly = FacePolytope::new(&ck.pairs, &inst.f0, &inst.f1);
        for _ in 0..20 {
            if let Some(pi) = random_feasible(&poly, &mut rng, 0.3) {
                prop_assert!(best <= entropy_objective(&pi, &ck.c) + 1e-12);
            }
        }
        // the W1 witness lies in the face and is no better
        let witness = union.coupling.entries().iter().map(|e| (e.x, e.y, e.mass)).collect::<Vec<_>>();
        prop_assert!(best <= ck.j_of_entries(&witness).unwrap() + 1e-12);

        // the minimiser is a W1-optimal coupling
        let d = w1plus::graph::DistanceTable::all_pairs(&g);
        let pi = Coupling::new(sr.entries(&ck), &d);
        prop_assert!(is_optimal(&g, &inst.f0, &inst.f1, &pi).unwrap());
        prop_assert!((pi.cost() - union.w1).abs() <= 1e-8);
    }
}
