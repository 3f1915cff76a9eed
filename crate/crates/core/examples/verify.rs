//! Runs every residual check on a random instance and prints the report.
//!
//! cargo run --example verify -- 42

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w1plus::graph::{Graph, Measure};
use w1plus::pipeline::{interpolate, PipelineOptions};
use w1plus::verify::{verify, VerifyOptions};

fn random_measure(rng: &mut ChaCha8Rng, g: &Graph, k: usize) -> w1plus::Result<Measure> {
    let mut verts: Vec<usize> = (0..g.vertex_count()).collect();
    verts.shuffle(rng);
    let mut mass = vec![0.0; g.vertex_count()];
    for &v in &verts[..k] {
        mass[v] = rng.gen_range(0.1..1.0);
    }
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    let rest = 1.0 - mass.iter().sum::<f64>();
    mass[verts[0]] += rest;
    Measure::new(g, mass)
}

fn main() -> w1plus::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 30;
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let g = Arc::new(Graph::from_index_edges(n, &edges)?);
    let f0 = random_measure(&mut rng, &g, 5)?;
    let f1 = random_measure(&mut rng, &g, 5)?;

    let r = interpolate(g, &f0, &f1, &PipelineOptions::default())?;
    let report = verify(&r.curve, &VerifyOptions { seed, ..VerifyOptions::default() });
    print!("{}", report.table());
    Ok(())
}
