//! From a Dirac on a square with two geodesics between opposite corners,
//! the curve is the contraction: half the mass follows each geodesic with
//! binomial weights, so at t = 1/2 every vertex holds 1/4.
//!
//! cargo run --example contraction

use w1plus::graph::{Graph, Measure};
use w1plus::oracle::contraction;
use w1plus::pipeline::{interpolate, PipelineOptions};

fn main() -> w1plus::Result<()> {
    let g = Graph::new(&["o", "a", "b", "z"], &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")])?;
    let o = g.id("o")?;
    let f0 = Measure::dirac(&g, o);
    let f1 = Measure::dirac(&g, g.id("z")?);
    let r = interpolate(g.clone().into(), &f0, &f1, &PipelineOptions::default())?;

    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let got = r.curve.density_at(t);
        let want = contraction(&g, o, &f1, t)?;
        let cells: Vec<String> = g.names().iter().zip(&got).map(|(n, v)| format!("{n}={v:.4}")).collect();
        let gap = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t = {t:.2}: {}  (gap {gap:.1e})", cells.join(" "));
    }
    Ok(())
}
