mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use w1plus::curve::{ActionSide, Perturbation};
use w1plus::graph::Graph;
use w1plus::verify::{self, VerifyOptions};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn dirac_pair_on_a_path() {
    let g = Graph::path(2);
    let r = common::run(g.clone(), &common::measure(&g, &[1.0, 0.0, 0.0]), &common::measure(&g, &[0.0, 0.0, 1.0]));
    let c = &r.curve;
    close(c.a[0] * c.b[2], 2.0, 1e-15);
    for t in [0.0, 0.3, 0.5, 0.9, 1.0] {
        close(c.factors.p_at(1, t), c.a[0] * t, 1e-15);
        close(c.factors.q_at(1, t), c.b[2] * (1.0 - t), 1e-15);
        close(c.f[1].eval(t), 2.0 * t * (1.0 - t), 1e-15);
    }
    // sources carry constant P
    assert_eq!(c.factors.p[0].degree(), 0);

    let v = c.velocities(0.5).unwrap();
    let e01 = r.oriented.edge_id(0, 1).unwrap();
    close(c.flux_at(0.5)[e01], 1.0, 1e-15);
    close(v.v_plus[e01], 4.0, 1e-12);

    // extremal geodesic: constant path functional
    let c0 = c.c_gamma(&[0, 1, 2], 0.2).unwrap();
    for t in [0.0, 0.5, 1.0] {
        close(c.c_gamma(&[0, 1, 2], t).unwrap(), c0, 1e-14);
    }
    // length zero: the density itself
    close(c.c_gamma(&[1], 0.3).unwrap(), c.density_at(0.3)[1], 1e-15);

    close(c.entropy(0.0), 0.0, 0.0);
    close(c.entropy(1.0), 0.0, 0.0);

    for side in [ActionSide::Plus, ActionSide::Minus] {
        let rep = c
            .criticality(side, &Perturbation::zero(r.oriented.edges().len()), &[1e-2, 1e-3, 1e-4], 201)
            .unwrap();
        assert!(rep.differences.iter().all(|&d| d == 0.0));
    }
}

#[test]
fn diamond_mixture_and_measures() {
    let g = common::diamond();
    let f0 = w1plus::graph::Measure::dirac(&g, 0);
    let f1 = w1plus::graph::Measure::dirac(&g, 3);
    let r = common::run(g, &f0, &f1);
    let mix = r.curve.binomial_mixture(0.5).unwrap();
    for v in mix {
        close(v, 0.25, 1e-15);
    }
    assert_eq!(r.curve.measure_at(0.0).unwrap(), f0);
    assert_eq!(r.curve.measure_at(1.0).unwrap(), f1);
    assert_eq!(r.curve.binomial_mixture(0.0).unwrap(), f0.masses());
    assert_eq!(r.curve.binomial_mixture(1.0).unwrap(), f1.masses());
    assert!(r.curve.measure_at(1.5).is_err());
}

#[test]
fn two_point_midpoint_from_coupling() {
    let g = Graph::path(2);
    let r = common::run(g.clone(), &common::measure(&g, &[0.5, 0.5, 0.0]), &common::measure(&g, &[0.0, 0.5, 0.5]));
    let s = std::f64::consts::SQRT_2;
    let (p01, p11, p02) = (1.0 - s / 2.0, s / 2.0 - 0.5, s / 2.0 - 0.5);
    let want = p01 * 0.5 + p01 * 0.5 + p11 + p02 * 2.0 * 0.25;
    close(want, 0.603553, 1e-6);
    close(r.curve.density_at(0.5)[1], want, 1e-12);
}

#[test]
fn stationary_curve() {
    let g = common::diamond();
    let f = w1plus::graph::Measure::dirac(&g, 1);
    let r = common::run(g, &f, &f);
    assert!(r.oriented.edges().is_empty());
    assert_eq!(r.curve.w1, 0.0);
    let v = r.curve.velocities(0.4).unwrap();
    assert!(v.v_plus.is_empty() && v.v_minus.is_empty());
    assert_eq!(r.curve.measure_at(0.7).unwrap(), f);
    let rep = verify::verify(&r.curve, &VerifyOptions::default());
    assert!(rep.passed, "{}", rep.table());
}

#[test]
fn named_examples_pass_verification() {
    let g = Graph::path(2);
    let p2 = common::run(g.clone(), &common::measure(&g, &[1.0, 0.0, 0.0]), &common::measure(&g, &[0.0, 0.0, 1.0]));
    let d = common::diamond();
    let dia = common::run(d.clone(), &w1plus::graph::Measure::dirac(&d, 0), &w1plus::graph::Measure::dirac(&d, 3));
    for r in [p2, dia] {
        let rep = verify::verify(&r.curve, &VerifyOptions::default());
        assert!(rep.passed, "{}", rep.table());
        assert!(rep.get("contraction").is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_instances_verify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, 40, 5);
        let run = w1plus::pipeline::interpolate(
            std::sync::Arc::new(inst.graph),
            &inst.f0,
            &inst.f1,
            &Default::default(),
        );
        let run = match run {
            Err(w1plus::Error::DegenerateFace(..)) => return Ok(()),
            r => r.unwrap(),
        };
        let rep = verify::verify(&run.curve, &VerifyOptions { seed, ..VerifyOptions::default() });
        prop_assert!(rep.passed, "{}\n{}", inst.label, rep.table());

        // the curve is a probability measure at every sampled time
        for t in w1plus::curve::uniform_grid(21) {
            let f = run.curve.density_at(t);
            prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(f.iter().all(|&v| v >= -1e-12));
        }
    }
}
