//! Entropy along a curve on a path. When one endpoint measure lies to the
//! left of the other, t -> Σ f log f is convex.
//!
//! cargo run --example entropy

use w1plus::curve::uniform_grid;
use w1plus::graph::{Graph, Measure};
use w1plus::pipeline::{interpolate, PipelineOptions};
use w1plus::verify::entropy_min_second_difference;

fn main() -> w1plus::Result<()> {
    let g = Graph::path(6);
    let f0 = Measure::new(&g, vec![0.5, 0.3, 0.2, 0.0, 0.0, 0.0, 0.0])?;
    let f1 = Measure::new(&g, vec![0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.7])?;
    let r = interpolate(g.into(), &f0, &f1, &PipelineOptions::default())?;
    for (t, h) in r.curve.entropy_profile(&uniform_grid(11)) {
        let bar = "#".repeat((40.0 * (h + 2.0) / 2.0).max(0.0) as usize);
        println!("t = {t:.1}  H = {h:+.5}  {bar}");
    }
    println!(
        "smallest second difference on 101 points: {:.3e}",
        entropy_min_second_difference(&r.curve, 101)
    );
    Ok(())
}
