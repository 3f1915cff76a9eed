//! Orientation of the graph induced by the support union, the resulting
//! partial order, divergence operators and spanning-forest fluxes.

use std::collections::{HashMap, VecDeque};
use std::ops::{Add, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{DistanceTable, Graph, VertexId};

/// Two consecutive oriented edges `x0 -> x1 -> x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub x0: VertexId,
    pub x1: VertexId,
    pub x2: VertexId,
    /// Edge id of `x0 -> x1`.
    pub first: usize,
    /// Edge id of `x1 -> x2`.
    pub second: usize,
}

/// The active part of a graph with every edge directed along the geodesics
/// of the support-union pairs.
#[derive(Debug, Clone)]
pub struct OrientedGraph {
    graph: Arc<Graph>,
    active: Vec<VertexId>,
    is_active: Vec<bool>,
    edges: Vec<(VertexId, VertexId)>,
    edge_index: HashMap<(VertexId, VertexId), usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    triples: Vec<Triple>,
    triples_by_first: Vec<Vec<usize>>,
    triples_by_second: Vec<Vec<usize>>,
    topo: Vec<VertexId>,
    sources: Vec<VertexId>,
    sinks: Vec<VertexId>,
}

impl OrientedGraph {
    /// Orients `graph` with respect to the pairs `union`: the edge `a - b`
    /// becomes `a -> b` when some pair `(x, y)` has
    /// `d(x, a) + 1 + d(b, y) = d(x, y)`.
    ///
    /// `dist` needs rows for every vertex appearing in `union`. Antisymmetry,
    /// acyclicity and the geodesic property of oriented paths are checked
    /// before returning.
    pub fn orient(
        graph: Arc<Graph>,
        union: &[(VertexId, VertexId)],
        dist: &DistanceTable,
    ) -> Result<Self> {
        if union.is_empty() {
            return Err(Error::EmptySupportUnion);
        }
        let n = graph.vertex_count();
        let mut rows: HashMap<VertexId, &[u32]> = HashMap::new();
        for &(x, y) in union {
            for v in [x, y] {
                let row = dist
                    .row(v)
                    .ok_or_else(|| Error::MissingDistanceRow(graph.name(v).to_string()))?;
                rows.insert(v, row);
            }
        }
        let on_geodesic = |x: VertexId, y: VertexId, a: VertexId, b: VertexId| {
            let (rx, ry) = (rows[&x], rows[&y]);
            rx[a] + 1 + ry[b] == rx[y]
        };

        let mut is_active = vec![false; n];
        for &(x, y) in union {
            let (rx, ry) = (rows[&x], rows[&y]);
            for z in 0..n {
                if rx[z] + ry[z] == rx[y] {
                    is_active[z] = true;
                }
            }
        }

        let mut edges = Vec::new();
        for &(a, b) in graph.edges() {
            if !(is_active[a] && is_active[b]) {
                continue;
            }
            let forward = union.iter().any(|&(x, y)| on_geodesic(x, y, a, b));
            let backward = union.iter().any(|&(x, y)| on_geodesic(x, y, b, a));
            match (forward, backward) {
                (true, true) => {
                    return Err(Error::OrientationConflict(
                        graph.name(a).to_string(),
                        graph.name(b).to_string(),
                    ))
                }
                (true, false) => edges.push((a, b)),
                (false, true) => edges.push((b, a)),
                (false, false) => {}
            }
        }
        edges.sort_unstable();
        let active: Vec<VertexId> = (0..n).filter(|&v| is_active[v]).collect();
        let og = OrientedGraph::from_parts(graph, active, edges)?;
        og.check_geodesic_paths()?;
        Ok(og)
    }

    /// Assembles an oriented graph from explicit parts, checking only
    /// acyclicity. Used by [`OrientedGraph::orient`] and by tests that need
    /// hand-made orientations.
    pub fn from_parts(
        graph: Arc<Graph>,
        mut active: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Result<Self> {
        let n = graph.vertex_count();
        active.sort_unstable();
        active.dedup();
        let mut is_active = vec![false; n];
        for &v in &active {
            is_active[v] = true;
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (id, &(a, b)) in edges.iter().enumerate() {
            if !is_active[a] || !is_active[b] || !graph.has_edge(a, b) {
                return Err(Error::InvalidArgument(format!(
                    "oriented edge {}->{} is not an edge between active vertices",
                    graph.name(a),
                    graph.name(b)
                )));
            }
            if edge_index.insert((a, b), id).is_some() || edge_index.contains_key(&(b, a)) {
                return Err(Error::OrientationConflict(
                    graph.name(a).to_string(),
                    graph.name(b).to_string(),
                ));
            }
            out_edges[a].push(id);
            in_edges[b].push(id);
        }

        // Kahn's algorithm over active vertices
        let mut indeg: Vec<usize> = (0..n).map(|v| in_edges[v].len()).collect();
        let mut queue: VecDeque<VertexId> = active.iter().copied().filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(active.len());
        while let Some(u) = queue.pop_front() {
            topo.push(u);
            for &e in &out_edges[u] {
                let w = edges[e].1;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if topo.len() != active.len() {
            let stuck = active.iter().find(|&&v| indeg[v] > 0).copied().unwrap();
            return Err(Error::OrientedCycle(graph.name(stuck).to_string()));
        }

        let mut triples = Vec::new();
        let mut triples_by_first = vec![Vec::new(); edges.len()];
        let mut triples_by_second = vec![Vec::new(); edges.len()];
        for (e1, &(x0, x1)) in edges.iter().enumerate() {
            for &e2 in &out_edges[x1] {
                let id = triples.len();
                triples.push(Triple {
                    x0,
                    x1,
                    x2: edges[e2].1,
                    first: e1,
                    second: e2,
                });
                triples_by_first[e1].push(id);
                triples_by_second[e2].push(id);
            }
        }
        let sources: Vec<VertexId> = active.iter().copied().filter(|&v| in_edges[v].is_empty()).collect();
        let sinks: Vec<VertexId> = active.iter().copied().filter(|&v| out_edges[v].is_empty()).collect();
        if sources.is_empty() || sinks.is_empty() {
            return Err(Error::NoExtremalVertices);
        }
        Ok(OrientedGraph {
            graph,
            active,
            is_active,
            edges,
            edge_index,
            out_edges,
            in_edges,
            triples,
            triples_by_first,
            triples_by_second,
            topo,
            sources,
            sinks,
        })
    }

    /// Every oriented path from `u` has the length of a shortest path in the
    /// base graph: the shortest and longest oriented path lengths to each
    /// reachable vertex must both equal the hop distance.
    fn check_geodesic_paths(&self) -> Result<()> {
        let n = self.graph.vertex_count();
        let pos = self.topo_positions();
        for &u in &self.active {
            let d = self.graph.bfs(u);
            let mut lo = vec![usize::MAX; n];
            let mut hi = vec![0usize; n];
            lo[u] = 0;
            for &v in &self.topo[pos[u]..] {
                if lo[v] == usize::MAX {
                    continue;
                }
                if lo[v] != d[v] as usize || hi[v] != d[v] as usize {
                    let length = if lo[v] != d[v] as usize { lo[v] } else { hi[v] };
                    return Err(Error::NotGeodesic {
                        from: self.graph.name(u).to_string(),
                        to: self.graph.name(v).to_string(),
                        length,
                        distance: d[v] as usize,
                    });
                }
                for &e in &self.out_edges[v] {
                    let w = self.edges[e].1;
                    lo[w] = lo[w].min(lo[v] + 1);
                    hi[w] = hi[w].max(hi[v] + 1);
                }
            }
        }
        Ok(())
    }

    fn topo_positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.graph.vertex_count()];
        for (i, &v) in self.topo.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<Graph> {
        Arc::clone(&self.graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn active(&self) -> &[VertexId] {
        &self.active
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        self.is_active[v]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge_id(&self, tail: VertexId, head: VertexId) -> Option<usize> {
        self.edge_index.get(&(tail, head)).copied()
    }

    /// Edge ids leaving `v`.
    pub fn out_edges(&self, v: VertexId) -> &[usize] {
        &self.out_edges[v]
    }

    /// Edge ids entering `v`.
    pub fn in_edges(&self, v: VertexId) -> &[usize] {
        &self.in_edges[v]
    }

    /// Successors of `v`.
    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out_edges[v].iter().map(move |&e| self.edges[e].1)
    }

    /// Predecessors of `v`.
    pub fn predecessors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.in_edges[v].iter().map(move |&e| self.edges[e].0)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triples_starting_with(&self, edge: usize) -> &[usize] {
        &self.triples_by_first[edge]
    }

    pub fn triples_ending_with(&self, edge: usize) -> &[usize] {
        &self.triples_by_second[edge]
    }

    /// Active vertices in a topological order.
    pub fn topo_order(&self) -> &[VertexId] {
        &self.topo
    }

    /// Active vertices without incoming edges.
    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    /// Active vertices without outgoing edges.
    pub fn sinks(&self) -> &[VertexId] {
        &self.sinks
    }

    pub fn is_source(&self, v: VertexId) -> bool {
        self.is_active[v] && self.in_edges[v].is_empty()
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.is_active[v] && self.out_edges[v].is_empty()
    }

    /// Length of the longest oriented path.
    pub fn depth(&self) -> usize {
        let mut len = vec![0usize; self.vertex_count()];
        let mut best = 0;
        for &v in &self.topo {
            best = best.max(len[v]);
            for w in self.successors(v).collect::<Vec<_>>() {
                len[w] = len[w].max(len[v] + 1);
            }
        }
        best
    }

    /// Longest oriented path ending at each vertex (from a source).
    pub fn height_from_sources(&self) -> Vec<usize> {
        let mut len = vec![0usize; self.vertex_count()];
        for &v in &self.topo {
            for &e in &self.out_edges[v] {
                let w = self.edges[e].1;
                len[w] = len[w].max(len[v] + 1);
            }
        }
        len
    }

    /// Longest oriented path starting at each vertex (to a sink).
    pub fn height_to_sinks(&self) -> Vec<usize> {
        let mut len = vec![0usize; self.vertex_count()];
        for &v in self.topo.iter().rev() {
            for &e in &self.out_edges[v] {
                let w = self.edges[e].1;
                len[v] = len[v].max(len[w] + 1);
            }
        }
        len
    }

    /// Reachability relation of the oriented graph.
    pub fn order(&self) -> PartialOrder {
        let n = self.vertex_count();
        let words = n.div_ceil(64);
        let mut reach = vec![Vec::new(); n];
        for &v in self.topo.iter().rev() {
            let mut bits = vec![0u64; words];
            bits[v / 64] |= 1 << (v % 64);
            for &e in &self.out_edges[v] {
                let w = self.edges[e].1;
                for (b, r) in bits.iter_mut().zip(&reach[w]) {
                    *b |= *r;
                }
            }
            reach[v] = bits;
        }
        PartialOrder { reach }
    }

    /// True iff `path` follows oriented edges.
    pub fn is_oriented_path(&self, path: &[VertexId]) -> bool {
        !path.is_empty()
            && path.iter().all(|&v| self.is_active[v])
            && path.windows(2).all(|w| self.edge_id(w[0], w[1]).is_some())
    }

    /// Deterministic spanning forest of the oriented skeleton: breadth-first
    /// over oriented edges (ignoring direction), rooted at the sources in
    /// lexicographic order of their names.
    pub fn bfs_forest(&self) -> Vec<usize> {
        let mut roots = self.sources.clone();
        roots.sort_by(|&a, &b| self.graph.name(a).cmp(self.graph.name(b)));
        let mut seen = vec![false; self.vertex_count()];
        let mut forest = Vec::new();
        for r in roots {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            let mut queue = VecDeque::from([r]);
            while let Some(u) = queue.pop_front() {
                for &e in self.out_edges[u].iter().chain(&self.in_edges[u]) {
                    let (a, b) = self.edges[e];
                    let w = if a == u { b } else { a };
                    if !seen[w] {
                        seen[w] = true;
                        forest.push(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        forest
    }
}

/// Reachability `x <= y` on the oriented graph, stored as bitsets.
#[derive(Debug, Clone)]
pub struct PartialOrder {
    reach: Vec<Vec<u64>>,
}

impl PartialOrder {
    /// `x <= y`: there is an oriented path from `x` to `y` (or `x == y`).
    pub fn leq(&self, x: VertexId, y: VertexId) -> bool {
        if x == y {
            return true;
        }
        self.reach[x]
            .get(y / 64)
            .is_some_and(|w| w & (1 << (y % 64)) != 0)
    }

    pub fn comparable(&self, x: VertexId, y: VertexId) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }
}

/// Values that divergence operators can act on.
pub trait FluxValue: Clone + Zero + Add<Output = Self> + Sub<Output = Self> {}
impl<T: Clone + Zero + Add<Output = T> + Sub<Output = T>> FluxValue for T {}

/// Divergence of an edge function: outgoing minus incoming sum at each
/// vertex. The result has one entry per base-graph vertex.
pub fn vertex_divergence<T: FluxValue>(og: &OrientedGraph, g: &[T]) -> Vec<T> {
    assert_eq!(g.len(), og.edges().len());
    let mut out = vec![T::zero(); og.vertex_count()];
    for (e, &(a, b)) in og.edges().iter().enumerate() {
        out[a] = out[a].clone() + g[e].clone();
        out[b] = out[b].clone() - g[e].clone();
    }
    out
}

/// Divergence of a triple function: sum over triples starting with the edge
/// minus sum over triples ending with it.
pub fn edge_divergence<T: FluxValue>(og: &OrientedGraph, h: &[T]) -> Vec<T> {
    assert_eq!(h.len(), og.triples().len());
    let mut out = vec![T::zero(); og.edges().len()];
    for (i, t) in og.triples().iter().enumerate() {
        out[t.first] = out[t.first].clone() + h[i].clone();
        out[t.second] = out[t.second].clone() - h[i].clone();
    }
    out
}

/// Flux on the edges of a spanning forest whose divergence is `-rate`.
///
/// `forest` lists oriented edge ids; it must contain no cycle and connect
/// every component of the oriented skeleton. `rate` is indexed by vertex and
/// must sum to zero on each component. The returned vector is aligned with
/// `forest`: the flux of `x0 -> y0` is minus the total rate on the side of
/// `x0` once the edge is removed.
pub fn tree_flux(og: &OrientedGraph, forest: &[usize], rate: &[f64]) -> Result<Vec<f64>> {
    let n = og.vertex_count();
    let g = og.graph();
    // skeleton components
    let mut comp = vec![usize::MAX; n];
    let mut comps = 0;
    for &s in og.active() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = comps;
        while let Some(u) = stack.pop() {
            for &e in og.out_edges(u).iter().chain(og.in_edges(u)) {
                let (a, b) = og.edges()[e];
                let w = if a == u { b } else { a };
                if comp[w] == usize::MAX {
                    comp[w] = comps;
                    stack.push(w);
                }
            }
        }
        comps += 1;
    }
    // forest adjacency and cycle detection
    let mut adj: Vec<Vec<(VertexId, usize)>> = vec![Vec::new(); n];
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut v: usize) -> usize {
        while uf[v] != v {
            uf[v] = uf[uf[v]];
            v = uf[v];
        }
        v
    }
    for (slot, &e) in forest.iter().enumerate() {
        let (a, b) = *og
            .edges()
            .get(e)
            .ok_or_else(|| Error::NotAForest(format!("unknown edge id {e}")))?;
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra == rb {
            return Err(Error::NotAForest(format!(
                "edge {}->{} closes a cycle",
                g.name(a),
                g.name(b)
            )));
        }
        uf[ra] = rb;
        adj[a].push((b, slot));
        adj[b].push((a, slot));
    }
    let mut root_of_comp = vec![usize::MAX; comps];
    for &v in og.active() {
        let r = find(&mut uf, v);
        let c = comp[v];
        if root_of_comp[c] == usize::MAX {
            root_of_comp[c] = r;
        } else if root_of_comp[c] != r {
            return Err(Error::NotSpanning(g.name(v).to_string()));
        }
    }
    // root each tree at its lexicographically smallest source
    let mut roots: Vec<VertexId> = og.sources().to_vec();
    roots.sort_by(|&a, &b| g.name(a).cmp(g.name(b)));
    let mut parent_slot = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut flux = vec![0.0; forest.len()];
    let mut tail_is_parent = vec![false; forest.len()];
    let mut child_of_slot = vec![usize::MAX; forest.len()];
    for r in roots {
        if seen[r] {
            continue;
        }
        let mut order = vec![r];
        seen[r] = true;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &(w, slot) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent_slot[w] = slot;
                    child_of_slot[slot] = w;
                    tail_is_parent[slot] = og.edges()[forest[slot]].0 == u;
                    order.push(w);
                }
            }
        }
        let mut subtree = vec![0.0; n];
        let mut scale = 0.0;
        for &v in order.iter().rev() {
            subtree[v] += rate[v];
            scale += rate[v].abs();
            if parent_slot[v] != usize::MAX {
                let (a, b) = og.edges()[forest[parent_slot[v]]];
                let p = if a == v { b } else { a };
                subtree[p] += subtree[v];
            }
        }
        let total = subtree[r];
        if total.abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::UnbalancedRates(total));
        }
        for &v in &order[1..] {
            let slot = parent_slot[v];
            flux[slot] = if tail_is_parent[slot] {
                subtree[v] - total
            } else {
                -subtree[v]
            };
        }
    }
    Ok(flux)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Arc<Graph> {
        Arc::new(
            Graph::new(
                &["o", "a", "b", "z"],
                &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")],
            )
            .unwrap(),
        )
    }

    fn orient_pairs(g: Arc<Graph>, pairs: &[(usize, usize)]) -> OrientedGraph {
        let dist = DistanceTable::all_pairs(&g);
        OrientedGraph::orient(g, pairs, &dist).unwrap()
    }

    #[test]
    fn path_orientation() {
        let og = orient_pairs(Arc::new(Graph::path(2)), &[(0, 2)]);
        assert_eq!(og.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(og.sources(), &[0]);
        assert_eq!(og.sinks(), &[2]);
        let og2 = orient_pairs(Arc::new(Graph::path(2)), &[(0, 1), (0, 2), (1, 1), (1, 2)]);
        assert_eq!(og2.edges(), og.edges());
        let ord = og.order();
        assert!(ord.leq(0, 1) && ord.leq(1, 2) && ord.leq(0, 2));
        assert!(!ord.leq(2, 0));
    }

    #[test]
    fn diamond_orientation() {
        let og = orient_pairs(diamond(), &[(0, 3)]);
        assert_eq!(og.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(og.sources(), &[0]);
        assert_eq!(og.sinks(), &[3]);
        let ord = og.order();
        assert!(ord.leq(0, 1) && ord.leq(2, 3) && ord.leq(0, 3));
        assert!(!ord.comparable(1, 2));
        assert_eq!(og.triples().len(), 2);
    }

    #[test]
    fn singleton_active_set() {
        let og = orient_pairs(Arc::new(Graph::path(2)), &[(1, 1)]);
        assert_eq!(og.active(), &[1]);
        assert!(og.edges().is_empty());
        assert_eq!(og.sources(), &[1]);
        assert_eq!(og.sinks(), &[1]);
        let ord = og.order();
        assert!(ord.leq(1, 1));
        assert!(!ord.leq(0, 1));
    }

    #[test]
    fn conflicting_pairs_are_rejected() {
        let g = Arc::new(Graph::path(1));
        let dist = DistanceTable::all_pairs(&g);
        let err = OrientedGraph::orient(g, &[(0, 1), (1, 0)], &dist).unwrap_err();
        assert_eq!(err.code(), "orientation_conflict");
    }

    #[test]
    fn cycles_are_rejected() {
        let g = Arc::new(Graph::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap());
        let err = OrientedGraph::from_parts(g, vec![0, 1, 2], vec![(0, 1), (1, 2), (2, 0)]).unwrap_err();
        assert_eq!(err.code(), "oriented_cycle");
    }

    #[test]
    fn path_tree_flux() {
        let og = orient_pairs(Arc::new(Graph::path(2)), &[(0, 2)]);
        let forest = og.bfs_forest();
        let flux = tree_flux(&og, &forest, &[-1.0, 0.0, 1.0]).unwrap();
        let by_edge: HashMap<_, _> = forest.iter().map(|&e| og.edges()[e]).zip(flux).collect();
        assert_eq!(by_edge[&(0, 1)], 1.0);
        assert_eq!(by_edge[&(1, 2)], 1.0);
        let zero = tree_flux(&og, &forest, &[0.0; 3]).unwrap();
        assert!(zero.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn diamond_tree_flux() {
        let og = orient_pairs(diamond(), &[(0, 3)]);
        let id = |a, b| og.edge_id(a, b).unwrap();
        let forest = [id(0, 1), id(1, 3), id(0, 2)];
        let flux = tree_flux(&og, &forest, &[-1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(flux, vec![1.0, 1.0, 0.0]);
        let mut g = vec![0.0; og.edges().len()];
        for (slot, &e) in forest.iter().enumerate() {
            g[e] = flux[slot];
        }
        let div = vertex_divergence(&og, &g);
        assert_eq!(div, vec![1.0, 0.0, 0.0, -1.0]);
        let missing = tree_flux(&og, &forest[..2], &[-1.0, 0.0, 0.0, 1.0]).unwrap_err();
        assert_eq!(missing.code(), "not_spanning");
        let cyclic = [id(0, 1), id(1, 3), id(0, 2), id(2, 3)];
        assert_eq!(
            tree_flux(&og, &cyclic, &[-1.0, 0.0, 0.0, 1.0]).unwrap_err().code(),
            "not_a_forest"
        );
    }
}
