//! The entropy-minimising coupling on the optimal face. For two point
//! masses shifted by one step along a path the face is one-dimensional and
//! the minimiser is π(0,1) = 1 - √2/2, π(0,2) = √2/2 - 1/2.
//!
//! cargo run --example coupling

use w1plus::graph::{Graph, Measure};
use w1plus::pipeline::{interpolate, PipelineOptions};

fn main() -> w1plus::Result<()> {
    let g = Graph::path(2);
    let f0 = Measure::new(&g, vec![0.5, 0.5, 0.0])?;
    let f1 = Measure::new(&g, vec![0.0, 0.5, 0.5])?;
    let r = interpolate(g.clone().into(), &f0, &f1, &PipelineOptions::default())?;
    let ck = &r.kernel;

    println!("method {:?}, {} iterations, marginal error {:.1e}", r.scaling.method, r.scaling.iterations, r.scaling.marginal_error);
    for (k, &(x, y)) in ck.pairs.iter().enumerate() {
        let pi = r.scaling.pi[k];
        let product = ck.c[k] * r.scaling.a[x] * r.scaling.b[y];
        println!("  π({},{}) = {pi:.12}  c = {}  c·a·b = {product:.12}", g.name(x), g.name(y), ck.c[k]);
    }
    println!("J = {:.12}", ck.j_value(&r.scaling.pi));
    println!("1 - √2/2 = {:.12}", 1.0 - std::f64::consts::SQRT_2 / 2.0);
    println!("midpoint mass at vertex 1: {:.6}", r.curve.density_at(0.5)[1]);
    Ok(())
}
