//! Writes a curve to JSON, reads it back, and compares the reloaded
//! densities, samples and entropy table with the original.
//!
//! cargo run --example save_load

use w1plus::graph::{Graph, Measure};
use w1plus::io;
use w1plus::pipeline::{interpolate, PipelineOptions};

fn main() -> w1plus::Result<()> {
    let g = Graph::grid(2, 3);
    let f0 = Measure::new(&g, vec![0.25, 0.25, 0.0, 0.5, 0.0, 0.0])?;
    let f1 = Measure::new(&g, vec![0.0, 0.0, 0.5, 0.0, 0.25, 0.25])?;
    let r = interpolate(g.into(), &f0, &f1, &PipelineOptions::default())?;

    let path = std::env::temp_dir().join("w1plus-example-curve.json");
    io::save_curve(&path, &r.curve)?;
    let back = io::load_curve(&path)?;
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let gap = (0..=20)
        .map(|i| i as f64 / 20.0)
        .flat_map(|t| {
            let (a, b) = (r.curve.density_at(t), back.density_at(t));
            a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    println!("largest density gap after reload: {gap:e}");
    print!("{}", io::samples_csv(&back, &[0.5])?);
    print!("{}", io::entropy_csv(&back, 3));
    std::fs::remove_file(&path)?;
    Ok(())
}
