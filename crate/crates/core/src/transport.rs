//! Wasserstein-1 distance, optimal couplings and the support union of the
//! optimal face.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DistanceTable, Graph, Measure, VertexId};
use crate::mcf::FlowNetwork;

/// Marginal deviation tolerated by [`Coupling::check_feasible`].
pub const MARGINAL_TOL: f64 = 1e-10;
/// Slack used by [`is_optimal`].
pub const OPTIMALITY_SLACK: f64 = 1e-9;
/// A probe declares membership above this mass.
pub const PROBE_THRESHOLD: f64 = 1e-12;

/// One entry of a sparse coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub x: VertexId,
    pub y: VertexId,
    pub mass: f64,
}

/// A sparse joint distribution over ordered vertex pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    entries: Vec<CouplingEntry>,
    cost: f64,
}

impl Coupling {
    /// Builds a coupling from `(x, y, mass)` triples, merging duplicates and
    /// dropping zero entries; the cost is computed from `dist`.
    pub fn new(entries: impl IntoIterator<Item = (VertexId, VertexId, f64)>, dist: &DistanceTable) -> Self {
        let mut merged: Vec<CouplingEntry> = Vec::new();
        let mut raw: Vec<(VertexId, VertexId, f64)> = entries.into_iter().collect();
        raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (x, y, mass) in raw {
            match merged.last_mut() {
                Some(e) if e.x == x && e.y == y => e.mass += mass,
                _ => merged.push(CouplingEntry { x, y, mass }),
            }
        }
        merged.retain(|e| e.mass != 0.0);
        let cost = merged
            .iter()
            .map(|e| e.mass * dist.get(e.x, e.y) as f64)
            .sum();
        Coupling {
            entries: merged,
            cost,
        }
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    /// `Σ π(x, y) d(x, y)`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn mass(&self, x: VertexId, y: VertexId) -> f64 {
        self.entries
            .binary_search_by(|e| (e.x, e.y).cmp(&(x, y)))
            .map(|i| self.entries[i].mass)
            .unwrap_or(0.0)
    }

    /// Row and column sums as dense vectors of length `n`.
    pub fn marginals(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        for e in &self.entries {
            rows[e.x] += e.mass;
            cols[e.y] += e.mass;
        }
        (rows, cols)
    }

    /// Largest deviation of either marginal from the prescribed measures.
    pub fn marginal_error(&self, f0: &Measure, f1: &Measure) -> f64 {
        let (rows, cols) = self.marginals(f0.len());
        let mut err = 0.0f64;
        for v in 0..f0.len() {
            err = err.max((rows[v] - f0.get(v)).abs());
            err = err.max((cols[v] - f1.get(v)).abs());
        }
        err
    }

    /// Rejects negative masses and marginal errors above [`MARGINAL_TOL`].
    pub fn check_feasible(&self, g: &Graph, f0: &Measure, f1: &Measure) -> Result<()> {
        for e in &self.entries {
            if !(e.mass >= 0.0) || !e.mass.is_finite() {
                return Err(Error::InfeasibleCoupling(format!(
                    "mass {} on ({}, {})",
                    e.mass,
                    g.name(e.x),
                    g.name(e.y)
                )));
            }
        }
        let err = self.marginal_error(f0, f1);
        if err > MARGINAL_TOL {
            return Err(Error::InfeasibleCoupling(format!(
                "marginal error {err:e}"
            )));
        }
        Ok(())
    }
}

/// Distance rows from the union of both supports.
pub fn support_distances(g: &Graph, f0: &Measure, f1: &Measure) -> DistanceTable {
    let mut sources = f0.support();
    sources.extend(f1.support());
    DistanceTable::new(g, sources)
}

struct Bipartite {
    xs: Vec<VertexId>,
    ys: Vec<VertexId>,
    net: FlowNetwork,
    // arc handle for each (i, j)
    arcs: Vec<Vec<usize>>,
}

impl Bipartite {
    fn supply(&self, f0: &Measure, f1: &Measure) -> Vec<f64> {
        let mut s: Vec<f64> = self.xs.iter().map(|&x| f0.get(x)).collect();
        s.extend(self.ys.iter().map(|&y| -f1.get(y)));
        s
    }
}

fn bipartite(
    f0: &Measure,
    f1: &Measure,
    cost: impl Fn(usize, usize) -> Option<i64>,
) -> Bipartite {
    let xs = f0.support();
    let ys = f1.support();
    let nx = xs.len();
    let mut net = FlowNetwork::new(nx + ys.len());
    let mut arcs = vec![vec![usize::MAX; ys.len()]; nx];
    for i in 0..nx {
        for j in 0..ys.len() {
            if let Some(c) = cost(i, j) {
                arcs[i][j] = net.add_arc(i, nx + j, f64::INFINITY, c);
            }
        }
    }
    Bipartite { xs, ys, net, arcs }
}

fn extract(b: &Bipartite, dist: &DistanceTable) -> Coupling {
    let mut entries = Vec::new();
    for (i, &x) in b.xs.iter().enumerate() {
        for (j, &y) in b.ys.iter().enumerate() {
            let a = b.arcs[i][j];
            if a != usize::MAX {
                let f = b.net.flow(a);
                if f > 0.0 {
                    entries.push((x, y, f));
                }
            }
        }
    }
    Coupling::new(entries, dist)
}

/// W₁ distance and an optimal coupling, by min-cost flow on the bipartite
/// graph between the two supports.
pub fn w1(g: &Graph, f0: &Measure, f1: &Measure) -> Result<(f64, Coupling)> {
    let dist = support_distances(g, f0, f1);
    w1_with(&dist, f0, f1)
}

/// As [`w1`], reusing a distance table that has rows for one of the supports.
pub fn w1_with(dist: &DistanceTable, f0: &Measure, f1: &Measure) -> Result<(f64, Coupling)> {
    let xs = f0.support();
    let ys = f1.support();
    let mut b = bipartite(f0, f1, |i, j| Some(dist.get(xs[i], ys[j]) as i64));
    let supply = b.supply(f0, f1);
    b.net.solve(&supply)?;
    let coupling = extract(&b, dist);
    Ok((coupling.cost(), coupling))
}

/// W₁ distance by min-cost flow along the graph edges themselves (unit cost
/// per hop in both directions). Independent of the bipartite formulation.
pub fn w1_edge_flow(g: &Graph, f0: &Measure, f1: &Measure) -> Result<f64> {
    let mut net = FlowNetwork::new(g.vertex_count());
    for &(a, b) in g.edges() {
        net.add_arc(a, b, f64::INFINITY, 1);
        net.add_arc(b, a, f64::INFINITY, 1);
    }
    let supply: Vec<f64> = (0..g.vertex_count())
        .map(|v| f0.get(v) - f1.get(v))
        .collect();
    net.solve(&supply)
}

/// True iff `pi` is feasible and its cost is within [`OPTIMALITY_SLACK`] of W₁.
///
/// An infeasible coupling is rejected with [`Error::InfeasibleCoupling`].
pub fn is_optimal(g: &Graph, f0: &Measure, f1: &Measure, pi: &Coupling) -> Result<bool> {
    pi.check_feasible(g, f0, f1)?;
    let (value, _) = w1(g, f0, f1)?;
    Ok(pi.cost() <= value + OPTIMALITY_SLACK)
}

/// How [`support_union`] decides membership of a tight pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnionMethod {
    /// One face-restricted flow per candidate pair that maximises its mass.
    Probe,
    /// Cycle test in the residual network of a single optimal coupling.
    Residual,
    /// Probes for small candidate sets, the residual test otherwise.
    Auto,
}

/// Candidate sets larger than this use the residual test under `Auto`.
pub const PROBE_PAIR_LIMIT: usize = 400;

/// The set of pairs charged by at least one optimal coupling.
#[derive(Debug, Clone)]
pub struct SupportUnion {
    pub pairs: Vec<(VertexId, VertexId)>,
    pub w1: f64,
    /// An optimal coupling; with the probe method it is the average of the
    /// probe optima and charges every pair of the union.
    pub coupling: Coupling,
}

impl SupportUnion {
    pub fn contains(&self, x: VertexId, y: VertexId) -> bool {
        self.pairs.binary_search(&(x, y)).is_ok()
    }
}

/// Support pairs tight for an optimal dual: exactly the pairs any optimal
/// coupling may charge.
fn tight_pairs(
    b: &Bipartite,
    dist: &DistanceTable,
) -> Result<Vec<(usize, usize)>> {
    let pot = b.net.potentials()?;
    let nx = b.xs.len();
    let mut tight = Vec::new();
    for (i, &x) in b.xs.iter().enumerate() {
        for (j, &y) in b.ys.iter().enumerate() {
            let d = dist.get(x, y) as i64;
            if d + pot[i] - pot[nx + j] == 0 {
                tight.push((i, j));
            }
        }
    }
    Ok(tight)
}

/// Computes the support union `C(f0, f1)`.
pub fn support_union(
    g: &Graph,
    f0: &Measure,
    f1: &Measure,
    method: UnionMethod,
) -> Result<SupportUnion> {
    let dist = support_distances(g, f0, f1);
    support_union_with(&dist, f0, f1, method)
}

pub fn support_union_with(
    dist: &DistanceTable,
    f0: &Measure,
    f1: &Measure,
    method: UnionMethod,
) -> Result<SupportUnion> {
    let xs = f0.support();
    let ys = f1.support();
    let mut b = bipartite(f0, f1, |i, j| Some(dist.get(xs[i], ys[j]) as i64));
    let supply = b.supply(f0, f1);
    b.net.solve(&supply)?;
    let base = extract(&b, dist);
    let w1 = base.cost();
    let tight = tight_pairs(&b, dist)?;
    let use_probe = match method {
        UnionMethod::Probe => true,
        UnionMethod::Residual => false,
        UnionMethod::Auto => tight.len() <= PROBE_PAIR_LIMIT,
    };
    let (mut pairs, coupling) = if use_probe {
        probe_union(&b, &tight, f0, f1, dist)?
    } else {
        (residual_union(&b, &tight), base)
    };
    pairs.sort_unstable();
    if pairs.is_empty() {
        return Err(Error::EmptySupportUnion);
    }
    Ok(SupportUnion {
        pairs,
        w1,
        coupling,
    })
}

fn probe_union(
    b: &Bipartite,
    tight: &[(usize, usize)],
    f0: &Measure,
    f1: &Measure,
    dist: &DistanceTable,
) -> Result<(Vec<(VertexId, VertexId)>, Coupling)> {
    let mut is_tight = vec![vec![false; b.ys.len()]; b.xs.len()];
    for &(i, j) in tight {
        is_tight[i][j] = true;
    }
    let mut pairs = Vec::new();
    let mut sum: Vec<(VertexId, VertexId, f64)> = Vec::new();
    let mut probes = 0usize;
    let mut known = vec![vec![false; b.ys.len()]; b.xs.len()];
    for &(pi, pj) in tight {
        if known[pi][pj] {
            continue;
        }
        // maximise the mass on (pi, pj) among couplings on tight pairs
        let mut p = bipartite(f0, f1, |i, j| {
            if !is_tight[i][j] {
                None
            } else if (i, j) == (pi, pj) {
                Some(-1)
            } else {
                Some(0)
            }
        });
        let supply = p.supply(f0, f1);
        p.net.solve(&supply)?;
        let c = extract(&p, dist);
        if c.mass(b.xs[pi], b.ys[pj]) > PROBE_THRESHOLD {
            probes += 1;
            for e in c.entries() {
                let i = b.xs.iter().position(|&x| x == e.x).unwrap();
                let j = b.ys.iter().position(|&y| y == e.y).unwrap();
                if e.mass > PROBE_THRESHOLD {
                    known[i][j] = true;
                }
                sum.push((e.x, e.y, e.mass));
            }
            pairs.push((b.xs[pi], b.ys[pj]));
        }
    }
    for (i, row) in known.iter().enumerate() {
        for (j, &k) in row.iter().enumerate() {
            if k && !pairs.contains(&(b.xs[i], b.ys[j])) {
                pairs.push((b.xs[i], b.ys[j]));
            }
        }
    }
    let scale = 1.0 / probes.max(1) as f64;
    let coupling = Coupling::new(sum.into_iter().map(|(x, y, m)| (x, y, m * scale)), dist);
    Ok((pairs, coupling))
}

/// A tight pair `(x, y)` can carry mass iff it already does, or the arc
/// `x -> y` closes a cycle in the residual network: forward arcs on tight
/// pairs, backward arcs on charged pairs.
fn residual_union(b: &Bipartite, tight: &[(usize, usize)]) -> Vec<(VertexId, VertexId)> {
    let nx = b.xs.len();
    let n = nx + b.ys.len();
    let mut adj = vec![Vec::new(); n];
    let mut charged = vec![vec![false; b.ys.len()]; nx];
    for &(i, j) in tight {
        adj[i].push(nx + j);
        let a = b.arcs[i][j];
        if b.net.flow(a) > PROBE_THRESHOLD {
            charged[i][j] = true;
            adj[nx + j].push(i);
        }
    }
    let mut pairs = Vec::new();
    for &(i, j) in tight {
        if charged[i][j] || reaches(&adj, nx + j, i) {
            pairs.push((b.xs[i], b.ys[j]));
        }
    }
    pairs
}

fn reaches(adj: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2_two_point() -> (Graph, Measure, Measure) {
        let g = Graph::path(2);
        let f0 = Measure::new(&g, vec![0.5, 0.5, 0.0]).unwrap();
        let f1 = Measure::new(&g, vec![0.0, 0.5, 0.5]).unwrap();
        (g, f0, f1)
    }

    #[test]
    fn dirac_pair() {
        let g = Graph::path(2);
        let f0 = Measure::dirac(&g, 0);
        let f1 = Measure::dirac(&g, 2);
        let (v, pi) = w1(&g, &f0, &f1).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(pi.entries(), &[CouplingEntry { x: 0, y: 2, mass: 1.0 }]);
        let c = support_union(&g, &f0, &f1, UnionMethod::Probe).unwrap();
        assert_eq!(c.pairs, vec![(0, 2)]);
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let g = Graph::grid(2, 3);
        let f = Measure::new(&g, vec![0.1, 0.2, 0.3, 0.0, 0.4, 0.0]).unwrap();
        let (v, pi) = w1(&g, &f, &f).unwrap();
        assert_eq!(v, 0.0);
        assert!(pi.entries().iter().all(|e| e.x == e.y));
        for method in [UnionMethod::Probe, UnionMethod::Residual] {
            let c = support_union(&g, &f, &f, method).unwrap();
            assert_eq!(c.pairs, vec![(0, 0), (1, 1), (2, 2), (4, 4)]);
        }
    }

    #[test]
    fn two_point_family() {
        let (g, f0, f1) = p2_two_point();
        let (v, _) = w1(&g, &f0, &f1).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!((w1_edge_flow(&g, &f0, &f1).unwrap() - 1.0).abs() < 1e-15);
        for method in [UnionMethod::Probe, UnionMethod::Residual] {
            let c = support_union(&g, &f0, &f1, method).unwrap();
            assert_eq!(c.pairs, vec![(0, 1), (0, 2), (1, 1), (1, 2)]);
        }
        let dist = support_distances(&g, &f0, &f1);
        let pi = Coupling::new([(0, 1, 0.5), (1, 2, 0.5)], &dist);
        assert!(is_optimal(&g, &f0, &f1, &pi).unwrap());
        let bad = Coupling::new([(0, 0, 0.5), (1, 2, 0.5)], &dist);
        assert_eq!(
            is_optimal(&g, &f0, &f1, &bad).unwrap_err().code(),
            "infeasible_coupling"
        );
    }

    #[test]
    fn probe_coupling_charges_every_pair() {
        let (g, f0, f1) = p2_two_point();
        let c = support_union(&g, &f0, &f1, UnionMethod::Probe).unwrap();
        for &(x, y) in &c.pairs {
            assert!(c.coupling.mass(x, y) > 0.0);
        }
        assert!(c.coupling.marginal_error(&f0, &f1) < 1e-15);
        assert!((c.coupling.cost() - 1.0).abs() < 1e-15);
    }
}
