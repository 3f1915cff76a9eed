//! W₁ distance, an optimal coupling, the set of pairs charged by some
//! optimal coupling, and the orientation those pairs induce.
//!
//! cargo run --example transport

use std::sync::Arc;

use w1plus::graph::{Graph, Measure};
use w1plus::pipeline;
use w1plus::transport::{self, UnionMethod};

fn main() -> w1plus::Result<()> {
    let g = Arc::new(Graph::grid(3, 3));
    let f0 = Measure::new(&g, vec![0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    let f1 = Measure::new(&g, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5])?;

    let (w1, witness) = transport::w1(&g, &f0, &f1)?;
    println!("W1 = {w1} (edge-flow solver: {})", transport::w1_edge_flow(&g, &f0, &f1)?);
    for e in witness.entries() {
        println!("  witness {} -> {}: {}", g.name(e.x), g.name(e.y), e.mass);
    }

    let (union, og) = pipeline::orient(&g, &f0, &f1, UnionMethod::Auto)?;
    let pairs: Vec<String> = union.pairs.iter().map(|&(x, y)| format!("({},{})", g.name(x), g.name(y))).collect();
    println!("support union: {}", pairs.join(" "));
    println!("{} oriented edges, depth {}", og.edges().len(), og.depth());
    for &(a, b) in og.edges() {
        println!("  {} -> {}", g.name(a), g.name(b));
    }
    let names = |vs: &[usize]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>().join(" ");
    println!("sources: {}  sinks: {}", names(og.sources()), names(og.sinks()));
    Ok(())
}
