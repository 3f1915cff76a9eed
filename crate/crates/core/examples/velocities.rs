//! Velocity fields of the curve and a perturbation test showing that both
//! action functionals are stationary along it.
//!
//! cargo run --example velocities

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use w1plus::curve::{ActionSide, Perturbation};
use w1plus::graph::{Graph, Measure};
use w1plus::pipeline::{interpolate, PipelineOptions};
use w1plus::verify::criticality_with_retry;

fn main() -> w1plus::Result<()> {
    let g = Graph::grid(2, 3);
    let f0 = Measure::new(&g, vec![0.6, 0.4, 0.0, 0.0, 0.0, 0.0])?;
    let f1 = Measure::new(&g, vec![0.0, 0.0, 0.0, 0.0, 0.3, 0.7])?;
    let r = interpolate(g.clone().into(), &f0, &f1, &PipelineOptions::default())?;
    let og = &r.oriented;

    let v = r.curve.velocities(0.5)?;
    for (e, &(a, b)) in og.edges().iter().enumerate() {
        println!(
            "{} -> {}: flux {:.4}, forward velocity {:.4}, backward velocity {:.4}",
            g.name(a),
            g.name(b),
            r.curve.flux_at(0.5)[e],
            v.v_plus[e],
            v.v_minus[e]
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for side in [ActionSide::Plus, ActionSide::Minus] {
        let u = Perturbation::random(og.edges().len(), &mut rng);
        let rep = criticality_with_retry(&r.curve, side, u, &[1e-2, 1e-3, 1e-4], 2001)?;
        println!(
            "{side:?}: action {:.6}, differences {:?}, first-order term {:.1e} relative to {:.1e}",
            r.curve.action(side, 2001),
            rep.differences,
            rep.linear,
            rep.scale
        );
    }
    Ok(())
}
