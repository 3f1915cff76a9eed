//! On a path from a Dirac at one end to a Dirac at the other, the curve is
//! binomial thinning: the mass at position k at time t is Bin(n, t)(k).
//!
//! cargo run --example thinning -- 6

use w1plus::curve::uniform_grid;
use w1plus::graph::{Graph, Measure};
use w1plus::oracle::thinning;
use w1plus::pipeline::{interpolate, PipelineOptions};

fn main() -> w1plus::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let g = Graph::path(n);
    let (f0, f1) = (Measure::dirac(&g, 0), Measure::dirac(&g, n));
    let r = interpolate(g.into(), &f0, &f1, &PipelineOptions::default())?;

    let mut target = vec![0.0; n + 1];
    target[n] = 1.0;
    let mut worst: f64 = 0.0;
    for t in uniform_grid(5) {
        let f = r.curve.density_at(t);
        let want = thinning(&target, t)?;
        worst = f.iter().zip(&want).fold(worst, |w, (a, b)| w.max((a - b).abs()));
        let row: Vec<String> = f.iter().map(|v| format!("{v:.4}")).collect();
        println!("t = {t:.2}: {}", row.join(" "));
    }
    println!("largest gap to binomial thinning: {worst:.1e}");
    println!("density of vertex 1 in powers of t: {:?}", r.curve.f[1].coeffs());
    Ok(())
}
