//! Entropy minimisation over couplings supported on comparable pairs, and
//! the resulting product-form coupling `π(x, y) = c(x, y) a(x) b(y)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Measure, VertexId};
use crate::mcf::FlowNetwork;
use crate::transport::PROBE_THRESHOLD;
use crate::weights::WeightSystem;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// `ln n!`, exact through the integer factorial for `n <= 20`.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 20 {
        factorial(n).ln()
    } else {
        (2..=n).map(|k| (k as f64).ln()).sum()
    }
}

/// `n!` as a float; exact for `n <= 20`.
pub fn factorial(n: u32) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>() as f64
    } else {
        (1..=n).map(|k| k as f64).product()
    }
}

/// Comparable support pairs `D` with `c(x, y) = m(x, y) / d(x, y)!`.
#[derive(Debug, Clone)]
pub struct CostKernel {
    pub pairs: Vec<(VertexId, VertexId)>,
    pub dist: Vec<u32>,
    pub c: Vec<f64>,
    pub log_c: Vec<f64>,
    xs: Vec<VertexId>,
    ys: Vec<VertexId>,
    // index of each pair's endpoints in xs / ys
    xi: Vec<usize>,
    yi: Vec<usize>,
    graph: Arc<Graph>,
}

impl CostKernel {
    pub fn new(w: &WeightSystem, f0: &Measure, f1: &Measure) -> Result<Self> {
        let xs = f0.support();
        let ys = f1.support();
        let order = w.order();
        let og = w.oriented();
        let mut pairs = Vec::new();
        let mut dist = Vec::new();
        let mut c = Vec::new();
        let mut log_c = Vec::new();
        let mut xi = Vec::new();
        let mut yi = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                if !(og.is_active(x) && og.is_active(y) && order.leq(x, y)) {
                    continue;
                }
                let d = w.oriented_distance(x, y).expect("comparable pair has a distance");
                let m = w.pair_weight(x, y)?;
                pairs.push((x, y));
                dist.push(d);
                c.push(m / factorial(d));
                log_c.push(m.ln() - ln_factorial(d));
                xi.push(i);
                yi.push(j);
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyFace);
        }
        let mut seen_x = vec![false; xs.len()];
        let mut seen_y = vec![false; ys.len()];
        for k in 0..pairs.len() {
            seen_x[xi[k]] = true;
            seen_y[yi[k]] = true;
        }
        if seen_x.iter().chain(&seen_y).any(|s| !s) {
            return Err(Error::EmptyFace);
        }
        Ok(CostKernel {
            pairs,
            dist,
            c,
            log_c,
            xs,
            ys,
            xi,
            yi,
            graph: og.graph_arc(),
        })
    }

    fn degenerate(&self, k: usize) -> Error {
        let (x, y) = self.pairs[k];
        Error::DegenerateFace(
            self.graph.name(x).to_string(),
            self.graph.name(y).to_string(),
        )
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index_of(&self, x: VertexId, y: VertexId) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (x, y))
    }

    /// Sources of the face (support of `f0`).
    pub fn row_vertices(&self) -> &[VertexId] {
        &self.xs
    }

    /// Targets of the face (support of `f1`).
    pub fn col_vertices(&self) -> &[VertexId] {
        &self.ys
    }

    /// Largest row/column deviation of masses `pi` (aligned with `pairs`).
    pub fn marginal_error(&self, pi: &[f64], f0: &Measure, f1: &Measure) -> f64 {
        let mut rows = vec![0.0; self.xs.len()];
        let mut cols = vec![0.0; self.ys.len()];
        for k in 0..self.len() {
            rows[self.xi[k]] += pi[k];
            cols[self.yi[k]] += pi[k];
        }
        let r = self
            .xs
            .iter()
            .zip(&rows)
            .map(|(&x, s)| (s - f0.get(x)).abs());
        let c = self
            .ys
            .iter()
            .zip(&cols)
            .map(|(&y, s)| (s - f1.get(y)).abs());
        r.chain(c).fold(0.0, f64::max)
    }

    /// `J(π) = Σ π log(π / c) - π` with `0 log 0 = 0`.
    pub fn j_value(&self, pi: &[f64]) -> f64 {
        pi.iter()
            .zip(&self.log_c)
            .map(|(&p, &lc)| if p > 0.0 { p * (p.ln() - lc) - p } else { 0.0 })
            .sum()
    }

    /// `J` of a coupling given as `(x, y, mass)` entries; mass outside the
    /// face is an error.
    pub fn j_of_entries(&self, entries: &[(VertexId, VertexId, f64)]) -> Result<f64> {
        let mut pi = vec![0.0; self.len()];
        for &(x, y, m) in entries {
            if m == 0.0 {
                continue;
            }
            match self.index_of(x, y) {
                Some(k) => pi[k] += m,
                None => {
                    return Err(Error::SupportViolation(
                        self.graph.name(x).to_string(),
                        self.graph.name(y).to_string(),
                    ))
                }
            }
        }
        Ok(self.j_value(&pi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMethod {
    /// The face has a single point; `a`, `b` come from a log-linear solve.
    Direct,
    /// Iterative proportional fitting in the log domain.
    Ipfp,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Record `J` of every iterate (after each column update).
    pub trace_objective: bool,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            trace_objective: false,
        }
    }
}

/// Output of [`minimize_j`].
#[derive(Debug, Clone)]
pub struct ScalingResult {
    /// `a(x)`, dense over all vertices, zero off the support of `f0`.
    pub a: Vec<f64>,
    /// `b(y)`, dense over all vertices, zero off the support of `f1`.
    pub b: Vec<f64>,
    pub log_a: Vec<f64>,
    pub log_b: Vec<f64>,
    /// Masses aligned with the kernel's `pairs`, equal to `c a b`.
    pub pi: Vec<f64>,
    pub iterations: usize,
    pub marginal_error: f64,
    pub method: ScalingMethod,
    pub objective_trace: Vec<f64>,
}

impl ScalingResult {
    pub fn entries(&self, ck: &CostKernel) -> Vec<(VertexId, VertexId, f64)> {
        ck.pairs
            .iter()
            .zip(&self.pi)
            .map(|(&(x, y), &m)| (x, y, m))
            .collect()
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Pairs of the face that no feasible coupling supported on it can charge.
fn forced_zero_pairs(ck: &CostKernel, f0: &Measure, f1: &Measure) -> Result<Vec<usize>> {
    let nx = ck.xs.len();
    let mut net = FlowNetwork::new(nx + ck.ys.len());
    let arcs: Vec<usize> = (0..ck.len())
        .map(|k| net.add_arc(ck.xi[k], nx + ck.yi[k], f64::INFINITY, 0))
        .collect();
    let mut supply: Vec<f64> = ck.xs.iter().map(|&x| f0.get(x)).collect();
    supply.extend(ck.ys.iter().map(|&y| -f1.get(y)));
    net.solve(&supply)
        .map_err(|_| Error::InfeasibleCoupling("no coupling is supported on comparable pairs".into()))?;
    let n = nx + ck.ys.len();
    let mut adj = vec![Vec::new(); n];
    for k in 0..ck.len() {
        adj[ck.xi[k]].push(nx + ck.yi[k]);
        if net.flow(arcs[k]) > PROBE_THRESHOLD {
            adj[nx + ck.yi[k]].push(ck.xi[k]);
        }
    }
    let mut forced = Vec::new();
    for k in 0..ck.len() {
        if net.flow(arcs[k]) > PROBE_THRESHOLD {
            continue;
        }
        // chargeable iff the arc closes a residual cycle
        let (from, to) = (nx + ck.yi[k], ck.xi[k]);
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        let mut found = false;
        while let Some(u) = stack.pop() {
            if u == to {
                found = true;
                break;
            }
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !found {
            forced.push(k);
        }
    }
    Ok(forced)
}

/// Whether the bipartite graph of the face pairs is a forest.
fn is_forest(ck: &CostKernel) -> bool {
    let nx = ck.xs.len();
    let mut uf: Vec<usize> = (0..nx + ck.ys.len()).collect();
    fn find(uf: &mut [usize], mut v: usize) -> usize {
        while uf[v] != v {
            uf[v] = uf[uf[v]];
            v = uf[v];
        }
        v
    }
    for k in 0..ck.len() {
        let (a, b) = (find(&mut uf, ck.xi[k]), find(&mut uf, nx + ck.yi[k]));
        if a == b {
            return false;
        }
        uf[a] = b;
    }
    true
}

/// Minimises `J` over couplings of `f0`, `f1` supported on the face.
pub fn minimize_j(
    ck: &CostKernel,
    f0: &Measure,
    f1: &Measure,
    opts: ScalingOptions,
) -> Result<ScalingResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let forced = forced_zero_pairs(ck, f0, f1)?;
    if let Some(&k) = forced.first() {
        return Err(ck.degenerate(k));
    }
    if is_forest(ck) {
        direct_solve(ck, f0, f1)
    } else {
        ipfp(ck, f0, f1, opts)
    }
}

fn direct_solve(ck: &CostKernel, f0: &Measure, f1: &Measure) -> Result<ScalingResult> {
    let nx = ck.xs.len();
    let n = nx + ck.ys.len();
    let mut residual: Vec<f64> = ck.xs.iter().map(|&x| f0.get(x)).collect();
    residual.extend(ck.ys.iter().map(|&y| f1.get(y)));
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..ck.len() {
        incident[ck.xi[k]].push(k);
        incident[nx + ck.yi[k]].push(k);
    }
    let mut degree: Vec<usize> = incident.iter().map(|l| l.len()).collect();
    let mut used = vec![false; ck.len()];
    let mut pi = vec![0.0; ck.len()];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(u) = stack.pop() {
        if degree[u] != 1 {
            continue;
        }
        let k = *incident[u].iter().find(|&&k| !used[k]).unwrap();
        used[k] = true;
        let other = if u < nx { nx + ck.yi[k] } else { ck.xi[k] };
        pi[k] = residual[u];
        residual[u] = 0.0;
        residual[other] -= pi[k];
        degree[u] = 0;
        degree[other] -= 1;
        if degree[other] == 1 {
            stack.push(other);
        }
    }
    if let Some(k) = (0..ck.len()).find(|&k| !(pi[k] > PROBE_THRESHOLD)) {
        return Err(ck.degenerate(k));
    }
    // log-linear solve A(x) + B(y) = ln(π / c), gauge A = 0 at one row per component
    let mut pot = vec![f64::NAN; n];
    for start in 0..n {
        if !pot[start].is_nan() {
            continue;
        }
        pot[start] = 0.0;
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            for &k in &incident[u] {
                let target = pi[k].ln() - ck.log_c[k];
                let (xu, yu) = (ck.xi[k], nx + ck.yi[k]);
                let other = if u == xu { yu } else { xu };
                if pot[other].is_nan() {
                    pot[other] = target - pot[u];
                    queue.push(other);
                }
            }
        }
    }
    let vcount = f0.len();
    let (a, b, log_a, log_b) = dense_factors(ck, &pot[..nx], &pot[nx..], vcount);
    let pi: Vec<f64> = (0..ck.len())
        .map(|k| (ck.log_c[k] + pot[ck.xi[k]] + pot[nx + ck.yi[k]]).exp())
        .collect();
    let marginal_error = ck.marginal_error(&pi, f0, f1);
    Ok(ScalingResult {
        a,
        b,
        log_a,
        log_b,
        pi,
        iterations: 0,
        marginal_error,
        method: ScalingMethod::Direct,
        objective_trace: Vec::new(),
    })
}

fn dense_factors(
    ck: &CostKernel,
    la: &[f64],
    lb: &[f64],
    n: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut log_a = vec![f64::NEG_INFINITY; n];
    let mut log_b = vec![f64::NEG_INFINITY; n];
    for (i, &x) in ck.xs.iter().enumerate() {
        log_a[x] = la[i];
        a[x] = la[i].exp();
    }
    for (j, &y) in ck.ys.iter().enumerate() {
        log_b[y] = lb[j];
        b[y] = lb[j].exp();
    }
    (a, b, log_a, log_b)
}

fn ipfp(ck: &CostKernel, f0: &Measure, f1: &Measure, opts: ScalingOptions) -> Result<ScalingResult> {
    let nx = ck.xs.len();
    let ny = ck.ys.len();
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); nx];
    let mut by_col: Vec<Vec<usize>> = vec![Vec::new(); ny];
    for k in 0..ck.len() {
        by_row[ck.xi[k]].push(k);
        by_col[ck.yi[k]].push(k);
    }
    let ln_f0: Vec<f64> = ck.xs.iter().map(|&x| f0.get(x).ln()).collect();
    let ln_f1: Vec<f64> = ck.ys.iter().map(|&y| f1.get(y).ln()).collect();
    let mut la = vec![0.0; nx];
    let mut lb = vec![0.0; ny];
    let mut trace = Vec::new();
    let mut pi = vec![0.0; ck.len()];
    let mut err = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        for i in 0..nx {
            la[i] = ln_f0[i] - log_sum_exp(by_row[i].iter().map(|&k| ck.log_c[k] + lb[ck.yi[k]]));
        }
        for j in 0..ny {
            lb[j] = ln_f1[j] - log_sum_exp(by_col[j].iter().map(|&k| ck.log_c[k] + la[ck.xi[k]]));
        }
        for k in 0..ck.len() {
            pi[k] = (ck.log_c[k] + la[ck.xi[k]] + lb[ck.yi[k]]).exp();
        }
        if opts.trace_objective {
            trace.push(ck.j_value(&pi));
        }
        err = ck.marginal_error(&pi, f0, f1);
        if err <= opts.tol {
            let (a, b, log_a, log_b) = dense_factors(ck, &la, &lb, f0.len());
            return Ok(ScalingResult {
                a,
                b,
                log_a,
                log_b,
                pi,
                iterations,
                marginal_error: err,
                method: ScalingMethod::Ipfp,
                objective_trace: trace,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual: err,
    })
}
