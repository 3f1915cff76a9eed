//! Finite undirected graphs, hop distances, measures and geodesic enumeration.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};

/// Dense index of a vertex inside a [`Graph`].
pub type VertexId = usize;

/// Geodesic listings above this many paths are refused unless forced.
pub const GEODESIC_LIST_LIMIT: u128 = 10_000;

/// A finite, connected, simple undirected graph with named vertices.
#[derive(Debug, Clone)]
pub struct Graph {
    names: Vec<String>,
    lookup: HashMap<String, VertexId>,
    adj: Vec<Vec<VertexId>>,
    edges: Vec<(VertexId, VertexId)>,
    edge_set: HashSet<(VertexId, VertexId)>,
}

impl Graph {
    /// Builds and validates a graph from vertex names and name pairs.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut names = Vec::with_capacity(vertices.len());
        let mut lookup = HashMap::with_capacity(vertices.len());
        for v in vertices {
            let v = v.as_ref().to_string();
            if lookup.insert(v.clone(), names.len()).is_some() {
                return Err(Error::DuplicateVertex(v));
            }
            names.push(v);
        }
        let mut adj = vec![Vec::new(); names.len()];
        let mut edge_list = Vec::with_capacity(edges.len());
        let mut edge_set = HashSet::with_capacity(edges.len());
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *lookup
                .get(a)
                .ok_or_else(|| Error::DanglingEdge(a.to_string()))?;
            let ib = *lookup
                .get(b)
                .ok_or_else(|| Error::DanglingEdge(b.to_string()))?;
            if ia == ib {
                return Err(Error::SelfLoop(a.to_string()));
            }
            let key = (ia.min(ib), ia.max(ib));
            if !edge_set.insert(key) {
                return Err(Error::DuplicateEdge(a.to_string(), b.to_string()));
            }
            adj[ia].push(ib);
            adj[ib].push(ia);
            edge_list.push(key);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph {
            names,
            lookup,
            adj,
            edges: edge_list,
            edge_set,
        };
        let components = g.component_count();
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    /// Graph on vertices named `0..n` with the given index pairs as edges.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let pairs: Vec<(String, String)> = edges
            .iter()
            .map(|&(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Graph::new(&names, &pairs)
    }

    /// Path graph `0 - 1 - ... - len` (with `len + 1` vertices).
    pub fn path(len: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..len).map(|i| (i, i + 1)).collect();
        Graph::from_index_edges(len + 1, &edges).expect("path graph is valid")
    }

    /// `rows x cols` grid graph; vertex `(r, c)` has index `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Graph::from_index_edges(rows * cols, &edges).expect("grid graph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Result<VertexId> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    /// Undirected edges as `(min, max)` index pairs, in insertion order.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_set.contains(&(a.min(b), a.max(b)))
    }

    /// Hop distances from `source` to every vertex.
    pub fn bfs(&self, source: VertexId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count()];
        let mut count = 0;
        for start in 0..self.vertex_count() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Breadth-first distance rows for a chosen set of source vertices.
///
/// `get(x, y)` succeeds whenever either endpoint has a row, using symmetry.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    rows: HashMap<VertexId, Vec<u32>>,
}

impl DistanceTable {
    pub fn new(g: &Graph, sources: impl IntoIterator<Item = VertexId>) -> Self {
        let mut rows = HashMap::new();
        for s in sources {
            rows.entry(s).or_insert_with(|| g.bfs(s));
        }
        DistanceTable { rows }
    }

    /// Rows from every vertex.
    pub fn all_pairs(g: &Graph) -> Self {
        DistanceTable::new(g, 0..g.vertex_count())
    }

    pub fn has_row(&self, x: VertexId) -> bool {
        self.rows.contains_key(&x)
    }

    pub fn row(&self, x: VertexId) -> Option<&[u32]> {
        self.rows.get(&x).map(|r| r.as_slice())
    }

    pub fn sources(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.rows.keys().copied()
    }

    pub fn try_get(&self, x: VertexId, y: VertexId) -> Option<u32> {
        if let Some(r) = self.rows.get(&x) {
            return Some(r[y]);
        }
        self.rows.get(&y).map(|r| r[x])
    }

    /// Distance between `x` and `y`. Panics if neither has a row.
    pub fn get(&self, x: VertexId, y: VertexId) -> u32 {
        self.try_get(x, y)
            .unwrap_or_else(|| panic!("no distance row for {x} or {y}"))
    }
}

/// Result of a geodesic query: either the listed paths or only their count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeodesicSet {
    Paths(Vec<Vec<VertexId>>),
    TooMany { count: u128 },
}

/// Number of shortest paths from `x` to `y` (saturating).
pub fn geodesic_count(g: &Graph, x: VertexId, y: VertexId) -> u128 {
    let from_x = g.bfs(x);
    let target = from_x[y];
    // count[v] = number of shortest paths x -> v, processed by distance layers
    let mut order: Vec<VertexId> = (0..g.vertex_count())
        .filter(|&v| from_x[v] <= target)
        .collect();
    order.sort_by_key(|&v| from_x[v]);
    let mut count = vec![0u128; g.vertex_count()];
    count[x] = 1;
    for &v in &order {
        if v == x {
            continue;
        }
        let mut c = 0u128;
        for &w in g.neighbors(v) {
            if from_x[w] + 1 == from_x[v] {
                c = c.saturating_add(count[w]);
            }
        }
        count[v] = c;
    }
    count[y]
}

/// Lazy depth-first enumeration of all geodesics from `x` to `y`.
///
/// Each step moves to a neighbour strictly closer to `y`, so every yielded
/// path `p` satisfies `d(x, p[i]) = i` and has length `d(x, y)`.
pub struct GeodesicIter<'a> {
    g: &'a Graph,
    to_target: Vec<u32>,
    path: Vec<VertexId>,
    // per depth, index of the next neighbour to try
    cursor: Vec<usize>,
    done: bool,
}

impl<'a> GeodesicIter<'a> {
    pub fn new(g: &'a Graph, x: VertexId, y: VertexId) -> Self {
        GeodesicIter {
            g,
            to_target: g.bfs(y),
            path: vec![x],
            cursor: vec![0],
            done: false,
        }
    }
}

impl Iterator for GeodesicIter<'_> {
    type Item = Vec<VertexId>;

    fn next(&mut self) -> Option<Vec<VertexId>> {
        if self.done {
            return None;
        }
        loop {
            let top = *self.path.last()?;
            if self.to_target[top] == 0 && self.cursor.last() == Some(&0) {
                let found = self.path.clone();
                // mark exhausted so the next call backtracks
                *self.cursor.last_mut().unwrap() = usize::MAX;
                return Some(found);
            }
            let nbrs = self.g.neighbors(top);
            let cur = self.cursor.last_mut().unwrap();
            let mut advanced = false;
            while *cur < nbrs.len() {
                let w = nbrs[*cur];
                *cur += 1;
                if self.to_target[w] + 1 == self.to_target[top] {
                    self.path.push(w);
                    self.cursor.push(0);
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                self.path.pop();
                self.cursor.pop();
                if self.path.is_empty() {
                    self.done = true;
                    return None;
                }
            }
        }
    }
}

/// All geodesics from `x` to `y`, or their count when it exceeds
/// [`GEODESIC_LIST_LIMIT`] and `force` is false.
pub fn geodesics_between(g: &Graph, x: VertexId, y: VertexId, force: bool) -> GeodesicSet {
    let count = geodesic_count(g, x, y);
    if count > GEODESIC_LIST_LIMIT && !force {
        return GeodesicSet::TooMany { count };
    }
    GeodesicSet::Paths(GeodesicIter::new(g, x, y).collect())
}

/// A probability vector indexed by the vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    mass: Vec<f64>,
}

/// Allowed deviation of the total mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

impl Measure {
    /// Validates nonnegativity, finiteness and unit total mass.
    pub fn new(g: &Graph, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != g.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "measure has {} entries for {} vertices",
                mass.len(),
                g.vertex_count()
            )));
        }
        for (v, &m) in mass.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidMass {
                    vertex: g.name(v).to_string(),
                    mass: m,
                });
            }
        }
        let sum: f64 = mass.iter().sum();
        if mass.iter().all(|&m| m == 0.0) {
            return Err(Error::EmptySupport);
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Measure { mass })
    }

    /// Builds a measure from `(vertex name, mass)` pairs; absent vertices get 0.
    pub fn from_named<'a>(
        g: &Graph,
        entries: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let mut mass = vec![0.0; g.vertex_count()];
        for (name, m) in entries {
            let v = g.id(name)?;
            mass[v] += m;
        }
        Measure::new(g, mass)
    }

    pub fn dirac(g: &Graph, v: VertexId) -> Self {
        let mut mass = vec![0.0; g.vertex_count()];
        mass[v] = 1.0;
        Measure { mass }
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.mass[v]
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Vertices with positive mass, in index order.
    pub fn support(&self) -> Vec<VertexId> {
        (0..self.mass.len()).filter(|&v| self.mass[v] > 0.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Graph {
        Graph::new(
            &["o", "a", "b", "z"],
            &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")],
        )
        .unwrap()
    }

    #[test]
    fn path_distances() {
        let g = Graph::path(2);
        let d = DistanceTable::new(&g, [0]);
        assert_eq!(d.get(0, 1), 1);
        assert_eq!(d.get(0, 2), 2);
        assert_eq!(d.get(2, 0), 2);
        assert_eq!(d.get(0, 0), 0);
    }

    #[test]
    fn validation_errors_are_distinct() {
        let e = Graph::new(&["0", "1"], &[]).unwrap_err();
        assert_eq!(e.code(), "disconnected_graph");
        let e = Graph::new(&["0", "0"], &[]).unwrap_err();
        assert_eq!(e.code(), "duplicate_vertex");
        let e = Graph::new(&["0", "1"], &[("0", "2")]).unwrap_err();
        assert_eq!(e.code(), "dangling_edge");
        let e = Graph::new(&["0", "1"], &[("0", "1"), ("1", "0")]).unwrap_err();
        assert_eq!(e.code(), "duplicate_edge");
        let e = Graph::new(&["0", "1"], &[("0", "0")]).unwrap_err();
        assert_eq!(e.code(), "self_loop");
    }

    #[test]
    fn diamond_geodesics() {
        let g = diamond();
        let (o, a, b, z) = (0, 1, 2, 3);
        let d = DistanceTable::new(&g, [o]);
        assert_eq!(d.get(o, z), 2);
        let GeodesicSet::Paths(mut paths) = geodesics_between(&g, o, z, false) else {
            panic!("expected paths")
        };
        paths.sort();
        assert_eq!(paths, vec![vec![o, a, z], vec![o, b, z]]);
        assert_eq!(geodesic_count(&g, o, z), 2);
    }

    #[test]
    fn trivial_and_path_geodesics() {
        let g = Graph::path(2);
        assert_eq!(
            geodesics_between(&g, 0, 2, false),
            GeodesicSet::Paths(vec![vec![0, 1, 2]])
        );
        assert_eq!(
            geodesics_between(&g, 1, 1, false),
            GeodesicSet::Paths(vec![vec![1]])
        );
    }

    #[test]
    fn large_counts_are_not_listed() {
        let g = Graph::grid(9, 9);
        // C(16, 8) = 12870 monotone lattice paths corner to corner
        match geodesics_between(&g, 0, 80, false) {
            GeodesicSet::TooMany { count } => assert_eq!(count, 12870),
            other => panic!("expected count, got {other:?}"),
        }
    }

    #[test]
    fn measure_validation() {
        let g = Graph::path(2);
        assert!(Measure::new(&g, vec![0.5, 0.5, 0.0]).is_ok());
        assert_eq!(
            Measure::new(&g, vec![0.5, 0.6, 0.0]).unwrap_err().code(),
            "not_normalized"
        );
        assert_eq!(
            Measure::new(&g, vec![-0.5, 1.5, 0.0]).unwrap_err().code(),
            "invalid_mass"
        );
        assert_eq!(
            Measure::new(&g, vec![0.0; 3]).unwrap_err().code(),
            "empty_support"
        );
    }
}
