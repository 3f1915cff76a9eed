//! End-to-end construction of the interpolating curve from a graph and two
//! measures.

use std::collections::HashMap;
use std::sync::Arc;

use crate::curve::GeodesicCurve;
use crate::error::Result;
use crate::graph::{Graph, Measure};
use crate::orientation::OrientedGraph;
use crate::scaling::{minimize_j, CostKernel, ScalingOptions, ScalingResult};
use crate::transport::{support_distances, support_union_with, SupportUnion, UnionMethod};
use crate::weights::WeightSystem;

/// Edge weights for the oriented graph.
#[derive(Debug, Clone, Default)]
pub enum WeightChoice {
    /// Products of oriented path counts from the sources and to the sinks.
    #[default]
    PathCounts,
    /// User weights keyed by `(tail, head)` vertex names.
    Named(HashMap<(String, String), f64>),
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub union: UnionMethod,
    pub scaling: ScalingOptions,
    pub weights: WeightChoice,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            union: UnionMethod::Auto,
            scaling: ScalingOptions::default(),
            weights: WeightChoice::PathCounts,
        }
    }
}

/// Every intermediate object of one run.
#[derive(Debug, Clone)]
pub struct Interpolation {
    pub graph: Arc<Graph>,
    pub union: SupportUnion,
    pub oriented: Arc<OrientedGraph>,
    pub weights: Arc<WeightSystem>,
    pub kernel: CostKernel,
    pub scaling: ScalingResult,
    pub curve: GeodesicCurve,
}

/// Support union and orientation only.
pub fn orient(
    graph: &Arc<Graph>,
    f0: &Measure,
    f1: &Measure,
    method: UnionMethod,
) -> Result<(SupportUnion, Arc<OrientedGraph>)> {
    let dist = support_distances(graph, f0, f1);
    let union = support_union_with(&dist, f0, f1, method)?;
    let og = OrientedGraph::orient(graph.clone(), &union.pairs, &dist)?;
    Ok((union, Arc::new(og)))
}

pub fn build_weights(og: Arc<OrientedGraph>, choice: &WeightChoice) -> Result<WeightSystem> {
    match choice {
        WeightChoice::PathCounts => Ok(WeightSystem::default_weights(og)),
        WeightChoice::Named(map) => WeightSystem::custom_named(og, map),
    }
}

/// Runs the whole construction.
pub fn interpolate(
    graph: Arc<Graph>,
    f0: &Measure,
    f1: &Measure,
    opts: &PipelineOptions,
) -> Result<Interpolation> {
    let (union, oriented) = orient(&graph, f0, f1, opts.union)?;
    log::info!(
        "W1 = {}, {} union pairs, {} active vertices, {} oriented edges",
        union.w1,
        union.pairs.len(),
        oriented.active().len(),
        oriented.edges().len()
    );
    let weights = Arc::new(build_weights(oriented.clone(), &opts.weights)?);
    let kernel = CostKernel::new(&weights, f0, f1)?;
    let scaling = minimize_j(&kernel, f0, f1, opts.scaling)?;
    log::info!(
        "scaling: {:?}, {} iterations, marginal error {:e}",
        scaling.method,
        scaling.iterations,
        scaling.marginal_error
    );
    let curve = GeodesicCurve::build(
        weights.clone(),
        &kernel,
        &scaling,
        f0.clone(),
        f1.clone(),
        union.w1,
    );
    Ok(Interpolation {
        graph,
        union,
        oriented,
        weights,
        kernel,
        scaling,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(g: Graph, f0: Vec<f64>, f1: Vec<f64>) -> Interpolation {
        let f0 = Measure::new(&g, f0).unwrap();
        let f1 = Measure::new(&g, f1).unwrap();
        interpolate(Arc::new(g), &f0, &f1, &PipelineOptions::default()).unwrap()
    }

    #[test]
    fn path_dirac_to_dirac() {
        let r = run(Graph::path(2), vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]);
        let c = &r.curve;
        assert_eq!(c.w1, 2.0);
        let close = |p: &crate::poly::Polynomial, want: &[f64]| {
            for (k, w) in want.iter().enumerate() {
                assert!((p.coeff(k) - w).abs() < 1e-14, "{:?} vs {want:?}", p.coeffs());
            }
            assert!(p.degree() < want.len().max(1));
        };
        close(&c.f[0], &[1.0, -2.0, 1.0]);
        close(&c.f[1], &[0.0, 2.0, -2.0]);
        close(&c.f[2], &[0.0, 0.0, 1.0]);
        close(&c.g[0], &[2.0, -2.0]);
        close(&c.g[1], &[0.0, 2.0]);
        close(&c.h[0], &[2.0]);
    }

    #[test]
    fn diamond_middle_vertices() {
        let g = Graph::new(
            &["o", "a", "b", "z"],
            &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")],
        )
        .unwrap();
        let r = run(g, vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]);
        for v in [1, 2] {
            for t in [0.1, 0.5, 0.8] {
                assert!((r.curve.f[v].eval(t) - t * (1.0 - t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_point_midpoint() {
        let r = run(Graph::path(2), vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]);
        let mid = r.curve.f[1].eval(0.5);
        let want = 0.25 + std::f64::consts::SQRT_2 / 4.0;
        assert!((mid - want).abs() < 1e-10, "{mid} vs {want}");
        let mix = r.curve.binomial_mixture(0.5).unwrap();
        assert!((mix[1] - mid).abs() < 1e-12);
    }
}
