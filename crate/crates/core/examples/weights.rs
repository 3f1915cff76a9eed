//! Path-counting weights on an oriented grid, the pair weights they induce,
//! and the two sub-Markov kernels built from them.
//!
//! cargo run --example weights

use w1plus::graph::{Graph, Measure};
use w1plus::pipeline;
use w1plus::transport::UnionMethod;
use w1plus::weights::WeightSystem;

fn main() -> w1plus::Result<()> {
    let g = std::sync::Arc::new(Graph::grid(3, 3));
    let f0 = Measure::dirac(&g, 0);
    let f1 = Measure::dirac(&g, 8);
    let (_, og) = pipeline::orient(&g, &f0, &f1, UnionMethod::Auto)?;
    let w = WeightSystem::default_weights(og.clone());

    for (e, &(a, b)) in og.edges().iter().enumerate() {
        println!("m({} -> {}) = {}", g.name(a), g.name(b), w.edge_weight(e));
    }
    for &v in og.active() {
        println!("m({}) = {}", g.name(v), w.vertex_weight(v));
    }
    println!("m(0, 8) = {} (geodesics from corner to corner)", w.pair_weight(0, 8)?);

    let k = w.kernels();
    let row: Vec<String> = k.k_row(4).iter().map(|&(v, p)| format!("{}:{p}", g.name(v))).collect();
    println!("backward kernel row of the centre: {}", row.join(" "));
    let ones = vec![1.0; g.vertex_count()];
    let vanished = k.apply_k_power(&ones, og.depth() + 1).iter().all(|&v| v == 0.0);
    println!(
        "kernel nilpotency index {} with longest oriented path {}; K applied {} times vanishes: {vanished}",
        k.nilpotency_index(),
        og.depth(),
        og.depth() + 1
    );
    Ok(())
}
