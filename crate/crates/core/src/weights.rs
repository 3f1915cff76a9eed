//! Edge weights with zero interior divergence, their extension to vertices,
//! comparable pairs and ordered tuples, and the associated sub-Markov
//! kernels.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::orientation::{OrientedGraph, PartialOrder};

/// Allowed interior imbalance between incoming and outgoing weight
/// (relative to the larger of the two sums, or 1).
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// Path counts above this bound trigger a precision warning.
const COUNT_WARN: f64 = 4_611_686_018_427_387_904.0; // 2^62

/// Pair weights `m(x, ·)` (forward) or `m(·, y)` (backward) together with
/// the oriented distance.
#[derive(Debug, Clone)]
struct PairRow {
    dist: Vec<u32>,
    weight: Vec<f64>,
}

/// Positive edge weights on an oriented graph with their derived extensions.
#[derive(Debug)]
pub struct WeightSystem {
    og: Arc<OrientedGraph>,
    order: PartialOrder,
    edge: Vec<f64>,
    vertex: Vec<f64>,
    counts: Option<(Vec<f64>, Vec<f64>)>,
    forward: Vec<OnceLock<PairRow>>,
    backward: Vec<OnceLock<PairRow>>,
}

impl WeightSystem {
    fn assemble(og: Arc<OrientedGraph>, edge: Vec<f64>, counts: Option<(Vec<f64>, Vec<f64>)>) -> Self {
        let n = og.vertex_count();
        let mut vertex = vec![0.0; n];
        for &v in og.active() {
            let out: f64 = og.out_edges(v).iter().map(|&e| edge[e]).sum();
            let inc: f64 = og.in_edges(v).iter().map(|&e| edge[e]).sum();
            vertex[v] = if !og.out_edges(v).is_empty() {
                out
            } else if !og.in_edges(v).is_empty() {
                inc
            } else {
                1.0
            };
        }
        let order = og.order();
        WeightSystem {
            order,
            edge,
            vertex,
            counts,
            forward: (0..n).map(|_| OnceLock::new()).collect(),
            backward: (0..n).map(|_| OnceLock::new()).collect(),
            og,
        }
    }

    /// Geodesic-counting weights: `m(x, y) = up(x) * down(y)` where `up`
    /// counts oriented paths from the sources and `down` counts oriented
    /// paths to the sinks.
    pub fn default_weights(og: Arc<OrientedGraph>) -> Self {
        let n = og.vertex_count();
        let mut up = vec![0.0f64; n];
        let mut down = vec![0.0f64; n];
        for &v in og.topo_order() {
            up[v] = if og.is_source(v) {
                1.0
            } else {
                og.predecessors(v).map(|p| up[p]).sum()
            };
        }
        for &v in og.topo_order().iter().rev() {
            down[v] = if og.is_sink(v) {
                1.0
            } else {
                og.successors(v).map(|s| down[s]).sum()
            };
        }
        if up.iter().chain(&down).any(|&c| c > COUNT_WARN) {
            log::warn!("path counts exceed 2^62; weights carry floating-point rounding");
        }
        let edge = og
            .edges()
            .iter()
            .map(|&(a, b)| up[a] * down[b])
            .collect();
        WeightSystem::assemble(og, edge, Some((up, down)))
    }

    /// Validates user-supplied edge weights (one per oriented edge, in edge
    /// id order): each must be positive and finite, and incoming and
    /// outgoing sums must agree at every vertex that is neither a source
    /// nor a sink.
    pub fn custom(og: Arc<OrientedGraph>, edge: Vec<f64>) -> Result<Self> {
        let g = og.graph();
        if edge.len() != og.edges().len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} oriented edges",
                edge.len(),
                og.edges().len()
            )));
        }
        for (e, &w) in edge.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                let (a, b) = og.edges()[e];
                return Err(Error::NonPositiveWeight(
                    g.name(a).to_string(),
                    g.name(b).to_string(),
                ));
            }
        }
        for &v in og.topo_order() {
            if og.is_source(v) || og.is_sink(v) {
                continue;
            }
            let outflow: f64 = og.out_edges(v).iter().map(|&e| edge[e]).sum();
            let inflow: f64 = og.in_edges(v).iter().map(|&e| edge[e]).sum();
            if (outflow - inflow).abs() > DIVERGENCE_TOL * outflow.max(inflow).max(1.0) {
                return Err(Error::DivergenceViolation {
                    vertex: g.name(v).to_string(),
                    inflow,
                    outflow,
                });
            }
        }
        Ok(WeightSystem::assemble(og, edge, None))
    }

    /// Custom weights given by `(tail, head) -> weight` name pairs.
    pub fn custom_named(og: Arc<OrientedGraph>, weights: &HashMap<(String, String), f64>) -> Result<Self> {
        let g = og.graph();
        let mut edge = Vec::with_capacity(og.edges().len());
        for &(a, b) in og.edges() {
            let key = (g.name(a).to_string(), g.name(b).to_string());
            match weights.get(&key) {
                Some(&w) => edge.push(w),
                None => return Err(Error::NonPositiveWeight(key.0, key.1)),
            }
        }
        for (a, b) in weights.keys() {
            let (ia, ib) = (g.id(a)?, g.id(b)?);
            if og.edge_id(ia, ib).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "weight given for {a}->{b}, which is not an oriented edge"
                )));
            }
        }
        WeightSystem::custom(og, edge)
    }

    pub fn oriented(&self) -> &OrientedGraph {
        &self.og
    }

    pub fn oriented_arc(&self) -> Arc<OrientedGraph> {
        Arc::clone(&self.og)
    }

    pub fn order(&self) -> &PartialOrder {
        &self.order
    }

    /// Weight of each oriented edge, by edge id.
    pub fn edge_weights(&self) -> &[f64] {
        &self.edge
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.edge[e]
    }

    /// `m(x)`; zero off the active set.
    pub fn vertex_weight(&self, v: VertexId) -> f64 {
        self.vertex[v]
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex
    }

    /// Path counts `(up, down)` when the weights are geodesic-counting.
    pub fn path_counts(&self) -> Option<(&[f64], &[f64])> {
        self.counts.as_ref().map(|(u, d)| (u.as_slice(), d.as_slice()))
    }

    fn forward_row(&self, x: VertexId) -> &PairRow {
        self.forward[x].get_or_init(|| {
            let og = &self.og;
            let n = og.vertex_count();
            let mut dist = vec![u32::MAX; n];
            let mut weight = vec![0.0; n];
            dist[x] = 0;
            weight[x] = self.vertex[x];
            for &v in og.topo_order() {
                if dist[v] == u32::MAX {
                    continue;
                }
                // weight[v] is final here; spread it to successors
                let factor = if v == x { 1.0 } else { weight[v] / self.vertex[v] };
                for &e in og.out_edges(v) {
                    let w = og.edges()[e].1;
                    let contrib = if v == x { self.edge[e] } else { factor * self.edge[e] };
                    weight[w] += contrib;
                    dist[w] = dist[w].min(dist[v] + 1);
                }
            }
            PairRow { dist, weight }
        })
    }

    fn backward_row(&self, y: VertexId) -> &PairRow {
        self.backward[y].get_or_init(|| {
            let og = &self.og;
            let n = og.vertex_count();
            let mut dist = vec![u32::MAX; n];
            let mut weight = vec![0.0; n];
            dist[y] = 0;
            weight[y] = self.vertex[y];
            for &v in og.topo_order().iter().rev() {
                if dist[v] == u32::MAX {
                    continue;
                }
                let factor = if v == y { 1.0 } else { weight[v] / self.vertex[v] };
                for &e in og.in_edges(v) {
                    let w = og.edges()[e].0;
                    weight[w] += factor * self.edge[e];
                    dist[w] = dist[w].min(dist[v] + 1);
                }
            }
            PairRow { dist, weight }
        })
    }

    /// `m(x, y)` for `x <= y`: the sum of `m(γ)` over oriented paths from
    /// `x` to `y`, computed by dynamic programming from `x`. `m(x, x) = m(x)`.
    pub fn pair_weight(&self, x: VertexId, y: VertexId) -> Result<f64> {
        if !self.og.is_active(x) || !self.og.is_active(y) || !self.order.leq(x, y) {
            let g = self.og.graph();
            return Err(Error::NotComparable(g.name(x).to_string(), g.name(y).to_string()));
        }
        Ok(self.forward_row(x).weight[y])
    }

    /// Same value as [`WeightSystem::pair_weight`], computed backwards from
    /// `y`. Useful as a consistency check.
    pub fn pair_weight_backward(&self, x: VertexId, y: VertexId) -> Result<f64> {
        if !self.og.is_active(x) || !self.og.is_active(y) || !self.order.leq(x, y) {
            let g = self.og.graph();
            return Err(Error::NotComparable(g.name(x).to_string(), g.name(y).to_string()));
        }
        Ok(self.backward_row(y).weight[x])
    }

    /// Length of the oriented paths from `x` to `y` (all equal), if `x <= y`.
    pub fn oriented_distance(&self, x: VertexId, y: VertexId) -> Option<u32> {
        if !self.og.is_active(x) {
            return None;
        }
        let d = self.forward_row(x).dist[y];
        (d != u32::MAX).then_some(d)
    }

    /// `m(x0, ..., xp)` for a chain `x0 <= ... <= xp`:
    /// the product of consecutive pair weights over the product of interior
    /// vertex weights.
    pub fn tuple_weight(&self, chain: &[VertexId]) -> Result<f64> {
        match chain {
            [] => Err(Error::InvalidArgument("empty tuple".into())),
            [x] => {
                if !self.og.is_active(*x) {
                    let name = self.og.graph().name(*x).to_string();
                    return Err(Error::NotComparable(name.clone(), name));
                }
                Ok(self.vertex[*x])
            }
            _ => {
                let mut num = 1.0;
                for w in chain.windows(2) {
                    num *= self.pair_weight(w[0], w[1])?;
                }
                let den: f64 = chain[1..chain.len() - 1].iter().map(|&v| self.vertex[v]).product();
                Ok(num / den)
            }
        }
    }

    /// `m(γ)` for an oriented path given vertex by vertex.
    pub fn path_weight(&self, path: &[VertexId]) -> Result<f64> {
        if !self.og.is_oriented_path(path) {
            return Err(Error::NotOrientedPath);
        }
        if path.len() == 1 {
            return Ok(self.vertex[path[0]]);
        }
        let mut w = 1.0;
        for (i, pair) in path.windows(2).enumerate() {
            w *= self.edge[self.og.edge_id(pair[0], pair[1]).unwrap()];
            if i > 0 {
                w /= self.vertex[pair[0]];
            }
        }
        Ok(w)
    }

    pub fn kernels(&self) -> Kernel {
        let og = &self.og;
        let n = og.vertex_count();
        let mut backward = vec![Vec::new(); n];
        let mut forward = vec![Vec::new(); n];
        for (e, &(a, b)) in og.edges().iter().enumerate() {
            backward[b].push((a, self.edge[e] / self.vertex[b]));
            forward[a].push((b, self.edge[e] / self.vertex[a]));
        }
        Kernel {
            backward,
            forward,
            mass: self.vertex.clone(),
        }
    }
}

/// The backward kernel `K(x1, x0) = m(x0, x1) / m(x1)` and its adjoint
/// `K*(x0, x1) = m(x0, x1) / m(x0)`, stored row by row.
#[derive(Debug, Clone)]
pub struct Kernel {
    backward: Vec<Vec<(VertexId, f64)>>,
    forward: Vec<Vec<(VertexId, f64)>>,
    mass: Vec<f64>,
}

impl Kernel {
    /// Row `x1` of `K`: pairs `(x0, K(x1, x0))` over predecessors.
    pub fn k_row(&self, x1: VertexId) -> &[(VertexId, f64)] {
        &self.backward[x1]
    }

    /// Row `x0` of `K*`: pairs `(x1, K*(x0, x1))` over successors.
    pub fn k_star_row(&self, x0: VertexId) -> &[(VertexId, f64)] {
        &self.forward[x0]
    }

    /// `(K f)(x1) = Σ K(x1, x0) f(x0)`.
    pub fn apply_k(&self, f: &[f64]) -> Vec<f64> {
        self.backward
            .iter()
            .map(|row| row.iter().map(|&(x0, k)| k * f[x0]).sum())
            .collect()
    }

    /// `(K* f)(x0) = Σ K*(x0, x1) f(x1)`.
    pub fn apply_k_star(&self, f: &[f64]) -> Vec<f64> {
        self.forward
            .iter()
            .map(|row| row.iter().map(|&(x1, k)| k * f[x1]).sum())
            .collect()
    }

    pub fn apply_k_power(&self, f: &[f64], n: usize) -> Vec<f64> {
        (0..n).fold(f.to_vec(), |acc, _| self.apply_k(&acc))
    }

    pub fn apply_k_star_power(&self, f: &[f64], n: usize) -> Vec<f64> {
        (0..n).fold(f.to_vec(), |acc, _| self.apply_k_star(&acc))
    }

    /// `⟨u, v⟩ = Σ u(x) v(x) m(x)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// Smallest `n` with `K^n = 0`, found by applying powers to the all-ones
    /// vector (entries are nonnegative, so this is exact).
    pub fn nilpotency_index(&self) -> usize {
        let mut v = vec![1.0; self.backward.len()];
        let mut n = 0;
        while v.iter().any(|&x| x != 0.0) {
            v = self.apply_k(&v);
            n += 1;
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DistanceTable, Graph};

    fn diamond_og() -> Arc<OrientedGraph> {
        let g = Arc::new(
            Graph::new(
                &["o", "a", "b", "z"],
                &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")],
            )
            .unwrap(),
        );
        let dist = DistanceTable::all_pairs(&g);
        Arc::new(OrientedGraph::orient(g, &[(0, 3)], &dist).unwrap())
    }

    fn path_og(len: usize) -> Arc<OrientedGraph> {
        let g = Arc::new(Graph::path(len));
        let dist = DistanceTable::all_pairs(&g);
        Arc::new(OrientedGraph::orient(g, &[(0, len)], &dist).unwrap())
    }

    #[test]
    fn default_on_path_and_diamond() {
        let w = WeightSystem::default_weights(path_og(2));
        assert_eq!(w.vertex_weights(), &[1.0, 1.0, 1.0]);
        assert_eq!(w.edge_weights(), &[1.0, 1.0]);
        let w = WeightSystem::default_weights(diamond_og());
        assert_eq!(w.vertex_weights(), &[2.0, 1.0, 1.0, 2.0]);
        assert!(w.edge_weights().iter().all(|&m| m == 1.0));
        assert_eq!(w.pair_weight(0, 3).unwrap(), 2.0);
        assert_eq!(w.pair_weight_backward(0, 3).unwrap(), 2.0);
        assert_eq!(w.tuple_weight(&[0, 1, 3]).unwrap(), 1.0);
        assert_eq!(w.tuple_weight(&[2]).unwrap(), 1.0);
        assert_eq!(w.pair_weight(1, 2).unwrap_err().code(), "not_comparable");
    }

    #[test]
    fn single_edge() {
        let w = WeightSystem::default_weights(path_og(1));
        assert_eq!(w.vertex_weights(), &[1.0, 1.0]);
        assert_eq!(w.edge_weights(), &[1.0]);
    }

    #[test]
    fn custom_validation() {
        let og = diamond_og();
        let w = WeightSystem::custom(Arc::clone(&og), vec![1.0; 4]).unwrap();
        assert_eq!(w.vertex_weight(0), 2.0);
        // edges are sorted: (o,a), (o,b), (a,z), (b,z)
        let err = WeightSystem::custom(og, vec![2.0, 1.0, 1.0, 1.0]).unwrap_err();
        match err {
            Error::DivergenceViolation { vertex, .. } => assert_eq!(vertex, "a"),
            other => panic!("unexpected {other:?}"),
        }
        let w = WeightSystem::custom(path_og(2), vec![3.0, 3.0]).unwrap();
        assert_eq!(w.vertex_weight(1), 3.0);
    }

    #[test]
    fn diamond_kernels() {
        let w = WeightSystem::default_weights(diamond_og());
        let k = w.kernels();
        assert_eq!(k.k_row(3), &[(1, 0.5), (2, 0.5)]);
        let delta_o = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(k.apply_k_power(&delta_o, 2)[3], 1.0);
        assert!(k.k_row(0).is_empty());
        assert_eq!(k.nilpotency_index(), 3);
    }
}
