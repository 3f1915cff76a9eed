//! Successive-shortest-path min-cost flow with integer arc costs and real
//! capacities.
//!
//! Residual capacities are stored directly so a saturating augmentation
//! leaves an exact zero behind. Arc costs may be negative as long as the
//! initial residual network has no negative cycle.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Supply left unrouted above this amount is reported as a failure.
pub const UNROUTED_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    residual: f64,
    cost: i64,
}

/// A directed network; arcs are stored in forward/backward pairs.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    initial: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
            initial: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds an arc and returns its handle for [`FlowNetwork::flow`].
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to,
            residual: capacity,
            cost,
        });
        self.arcs.push(Arc {
            to: from,
            residual: 0.0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        self.initial.push(capacity);
        self.initial.push(0.0);
        id
    }

    /// Flow currently carried by the arc with handle `arc`.
    pub fn flow(&self, arc: usize) -> f64 {
        self.arcs[arc ^ 1].residual
    }

    fn tail(&self, arc: usize) -> usize {
        self.arcs[arc ^ 1].to
    }

    /// Routes `supply[v]` units out of every node (negative values are
    /// demands) at minimum total cost. Returns the cost.
    pub fn solve(&mut self, supply: &[f64]) -> Result<f64> {
        assert_eq!(supply.len(), self.node_count());
        let n = self.node_count();
        let source = n;
        let sink = n + 1;
        let keep = self.arcs.len();
        self.adj.push(Vec::new());
        self.adj.push(Vec::new());
        let mut total = 0.0;
        for (v, &s) in supply.iter().enumerate() {
            if s > 0.0 {
                self.add_arc(source, v, s, 0);
                total += s;
            } else if s < 0.0 {
                self.add_arc(v, sink, -s, 0);
            }
        }
        let result = self.augment_all(source, sink, total);
        // drop the auxiliary terminals so arc handles stay meaningful
        self.arcs.truncate(keep);
        self.initial.truncate(keep);
        self.adj.truncate(n);
        for list in &mut self.adj {
            list.retain(|&a| a < keep);
        }
        result
    }

    fn bellman_ford(&self) -> Result<Vec<i64>> {
        let n = self.adj.len();
        let mut pot = vec![0i64; n];
        for round in 0..=n {
            let mut changed = false;
            for (a, arc) in self.arcs.iter().enumerate() {
                if arc.residual > 0.0 {
                    let u = self.tail(a);
                    let cand = pot[u] + arc.cost;
                    if cand < pot[arc.to] {
                        pot[arc.to] = cand;
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(pot);
            }
            if round == n {
                break;
            }
        }
        Err(Error::Flow("negative cycle in residual network".into()))
    }

    fn augment_all(&mut self, source: usize, sink: usize, total: f64) -> Result<f64> {
        let n = self.adj.len();
        let mut pot = self.bellman_ford()?;
        let mut routed = 0.0;
        loop {
            // Dijkstra on reduced costs
            let mut dist = vec![i64::MAX; n];
            let mut parent = vec![usize::MAX; n];
            let mut heap = BinaryHeap::new();
            dist[source] = 0;
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((du, u))) = heap.pop() {
                if du > dist[u] {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.residual <= 0.0 {
                        continue;
                    }
                    let reduced = arc.cost + pot[u] - pot[arc.to];
                    debug_assert!(reduced >= 0, "negative reduced cost");
                    let nd = du + reduced;
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        parent[arc.to] = a;
                        heap.push(Reverse((nd, arc.to)));
                    }
                }
            }
            if dist[sink] == i64::MAX {
                break;
            }
            let reach_max = dist.iter().filter(|&&d| d != i64::MAX).max().copied().unwrap_or(0);
            for v in 0..n {
                pot[v] += if dist[v] == i64::MAX { reach_max } else { dist[v] };
            }
            let mut delta = f64::INFINITY;
            let mut v = sink;
            while v != source {
                let a = parent[v];
                delta = delta.min(self.arcs[a].residual);
                v = self.tail(a);
            }
            let mut v = sink;
            while v != source {
                let a = parent[v];
                self.arcs[a].residual -= delta;
                self.arcs[a ^ 1].residual += delta;
                v = self.tail(a);
            }
            routed += delta;
        }
        if total - routed > UNROUTED_TOL {
            return Err(Error::Flow(format!(
                "{:e} units of supply could not be routed",
                total - routed
            )));
        }
        let mut cost = 0.0;
        for a in (0..self.arcs.len()).step_by(2) {
            let f = self.arcs[a ^ 1].residual;
            if f > 0.0 {
                cost += f * self.arcs[a].cost as f64;
            }
        }
        Ok(cost)
    }

    /// Node potentials certifying optimality of the current flow: every arc
    /// with positive residual has nonnegative reduced cost.
    pub fn potentials(&self) -> Result<Vec<i64>> {
        self.bellman_ford()
    }

    /// Capacity the arc was created with.
    pub fn capacity(&self, arc: usize) -> f64 {
        self.initial[arc]
    }
}
