//! Residual checks of a constructed curve against every structural identity
//! it should satisfy, collected into a serializable report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{
    chebyshev_nodes, interpolate, uniform_grid, ActionSide, CriticalityReport, GeodesicCurve, Perturbation,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, Measure, VertexId};
use crate::oracle;
use crate::orientation::{edge_divergence, tree_flux, vertex_divergence, OrientedGraph};
use crate::poly::Polynomial;
use crate::scaling::factorial;
use crate::transport::{self, UnionMethod};
use crate::weights::{Kernel, WeightSystem};

/// Tolerances of every check, in one place. Missing fields deserialize to
/// their defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub normalization: f64,
    pub boundary: f64,
    pub continuity: f64,
    pub benamou_brenier: f64,
    pub edge_sum: f64,
    pub w1_geodesic: f64,
    pub product_form: f64,
    pub marginal: f64,
    pub optimality: f64,
    pub mixture: f64,
    pub kernel: f64,
    /// Relative to the largest coefficient of `P` or `Q`.
    pub factor_ode: f64,
    pub velocity_ode: f64,
    pub c_gamma_constancy: f64,
    pub c_gamma_fit: f64,
    pub product_quotient: f64,
    pub contraction: f64,
    pub tree_flux: f64,
    pub entropy_convexity: f64,
    pub criticality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            normalization: 1e-10,
            boundary: 1e-10,
            continuity: 1e-10,
            benamou_brenier: 1e-10,
            edge_sum: 1e-9,
            w1_geodesic: 1e-7,
            product_form: 1e-9,
            marginal: 1e-12,
            optimality: 1e-8,
            mixture: 1e-10,
            kernel: 1e-10,
            factor_ode: 1e-12,
            velocity_ode: 1e-4,
            c_gamma_constancy: 1e-9,
            c_gamma_fit: 1e-8,
            product_quotient: 1e-9,
            contraction: 1e-9,
            tree_flux: 1e-12,
            entropy_convexity: 1e-8,
            criticality: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    /// Number of points of the uniform grid used by sampled checks.
    pub grid_points: usize,
    /// `(s, t)` pairs for the W₁-geodesic and stability checks.
    pub time_pairs: Vec<(f64, f64)>,
    /// Random perturbations per action functional; 0 skips the test.
    pub perturbations: usize,
    pub quadrature_points: usize,
    /// Upper bound on enumerated source-to-sink paths.
    pub path_limit: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let marks = [0.0, 0.2, 0.5, 0.7, 1.0];
        let mut time_pairs = Vec::new();
        for (i, &s) in marks.iter().enumerate() {
            for &t in &marks[i + 1..] {
                time_pairs.push((s, t));
            }
        }
        VerifyOptions {
            tolerances: Tolerances::default(),
            grid_points: 11,
            time_pairs,
            perturbations: 1,
            quadrature_points: 2001,
            path_limit: 10_000,
            seed: 7,
        }
    }
}

/// How the residual is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `residual <= tolerance`.
    AtMost,
    /// `residual >= -tolerance`.
    AtLeastNegTol,
    /// `residual > tolerance`.
    Above,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
    /// Reported only; does not affect the overall verdict.
    pub informational: bool,
    pub samples: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerificationReport {
    fn push(&mut self, name: &str, residual: f64, tolerance: f64, relation: Relation, samples: impl Into<String>) {
        let passed = match relation {
            Relation::AtMost => residual <= tolerance,
            Relation::AtLeastNegTol => residual >= -tolerance,
            Relation::Above => residual > tolerance,
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            residual,
            tolerance,
            relation,
            passed,
            informational: false,
            samples: samples.into(),
        });
    }

    fn info(&mut self, name: &str, residual: f64, samples: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            residual,
            tolerance: f64::NAN,
            relation: Relation::AtMost,
            passed: true,
            informational: true,
            samples: samples.into(),
        });
    }

    fn fail(&mut self, name: &str, err: &Error) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            residual: f64::NAN,
            tolerance: f64::NAN,
            relation: Relation::AtMost,
            passed: false,
            informational: false,
            samples: format!("error: {err}"),
        });
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed && !c.informational)
    }

    /// Human-readable table, one row per check.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>12}  {:>9}  status\n", "check", "residual", "tol");
        for c in &self.checks {
            let status = if c.informational {
                "info"
            } else if c.passed {
                "pass"
            } else {
                "FAIL"
            };
            let tol = if c.tolerance.is_nan() { "-".to_string() } else { format!("{:.1e}", c.tolerance) };
            out += &format!("{:<width$}  {:>12.3e}  {:>9}  {status}\n", c.name, c.residual, tol);
        }
        out += if self.passed { "all checks passed\n" } else { "verification FAILED\n" };
        out
    }
}

fn max_coeff_all<'a>(polys: impl IntoIterator<Item = &'a Polynomial>) -> f64 {
    polys.into_iter().map(Polynomial::max_abs_coeff).fold(0.0, f64::max)
}

/// `∂f + ∇g` per vertex, largest Bernstein coefficient.
pub fn continuity_vertex_residual(curve: &GeodesicCurve) -> f64 {
    let b = curve.bernstein();
    let div = vertex_divergence(curve.oriented(), &b.g);
    b.f.iter()
        .zip(&div)
        .map(|(f, d)| (&f.derivative() + d).max_abs_coeff())
        .fold(0.0, f64::max)
}

/// `∂g + ∇h` per oriented edge, largest Bernstein coefficient.
pub fn continuity_edge_residual(curve: &GeodesicCurve) -> f64 {
    let b = curve.bernstein();
    let div = edge_divergence(curve.oriented(), &b.h);
    b.g.iter()
        .zip(&div)
        .map(|(g, d)| (&g.derivative() + d).max_abs_coeff())
        .fold(0.0, f64::max)
}

/// `f(x1) h(x0 x1 x2) - g(x0 x1) g(x1 x2)` over all oriented triples,
/// largest Bernstein coefficient.
pub fn benamou_brenier_residual(curve: &GeodesicCurve) -> f64 {
    let b = curve.bernstein();
    curve
        .oriented()
        .triples()
        .iter()
        .zip(&b.h)
        .map(|(t, h)| (&(&b.f[t.x1] * h) - &(&b.g[t.first] * &b.g[t.second])).max_abs_coeff())
        .fold(0.0, f64::max)
}

pub fn edge_sum_residual(curve: &GeodesicCurve, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&t| (curve.flux_at(t).iter().sum::<f64>() - curve.w1).abs())
        .fold(0.0, f64::max)
}

/// `|W₁(f_s, f_t) - (t - s) W₁(f₀, f₁)|` for each pair, with the edge-flow solver.
pub fn w1_geodesic_residuals(curve: &GeodesicCurve, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    let g = curve.oriented().graph();
    pairs
        .iter()
        .map(|&(s, t)| {
            let fs = curve.measure_at(s)?;
            let ft = curve.measure_at(t)?;
            let d = transport::w1_edge_flow(g, &fs, &ft)?;
            Ok((d - (t - s) * curve.w1).abs())
        })
        .collect()
}

/// Largest relative deviation of the coupling from `c(x, y) a(x) b(y)`.
pub fn product_form_residual(curve: &GeodesicCurve) -> Result<f64> {
    let w = &curve.weights;
    let mut worst: f64 = 0.0;
    for &(x, y, mass) in &curve.coupling.entries {
        let d = w
            .oriented_distance(x, y)
            .ok_or_else(|| Error::NotComparable(name(w, x), name(w, y)))?;
        let c = w.pair_weight(x, y)? / factorial(d);
        worst = worst.max((mass / (c * curve.a[x] * curve.b[y]) - 1.0).abs());
    }
    Ok(worst)
}

fn name(w: &WeightSystem, v: VertexId) -> String {
    w.oriented().graph().name(v).to_string()
}

fn coupling_marginal_error(curve: &GeodesicCurve) -> f64 {
    let n = curve.f0.len();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for &(x, y, m) in &curve.coupling.entries {
        rows[x] += m;
        cols[y] += m;
    }
    (0..n)
        .map(|v| (rows[v] - curve.f0.get(v)).abs().max((cols[v] - curve.f1.get(v)).abs()))
        .fold(0.0, f64::max)
}

/// Kernel checks: row sums, adjointness on random vectors, the iterated
/// kernel identity on all comparable pairs of sampled sources, nilpotency.
#[derive(Debug, Clone, Copy)]
pub struct KernelResiduals {
    pub row_sum: f64,
    pub adjoint: f64,
    pub iterated: f64,
    pub nilpotency_index: usize,
    pub depth: usize,
}

pub fn kernel_residuals<R: Rng>(w: &WeightSystem, rng: &mut R, trials: usize) -> Result<KernelResiduals> {
    let og = w.oriented();
    let kernel: Kernel = w.kernels();
    let n = og.vertex_count();
    let mut row_sum: f64 = 0.0;
    for &v in og.active() {
        if !og.is_source(v) {
            let s: f64 = kernel.k_row(v).iter().map(|&(_, k)| k).sum();
            row_sum = row_sum.max((s - 1.0).abs());
        }
        if !og.is_sink(v) {
            let s: f64 = kernel.k_star_row(v).iter().map(|&(_, k)| k).sum();
            row_sum = row_sum.max((s - 1.0).abs());
        }
    }
    let mut adjoint: f64 = 0.0;
    for _ in 0..trials {
        let mut f = vec![0.0; n];
        let mut g = vec![0.0; n];
        for &v in og.active() {
            f[v] = rng.gen_range(-1.0..1.0);
            g[v] = rng.gen_range(-1.0..1.0);
        }
        let lhs = kernel.inner(&kernel.apply_k(&f), &g);
        let rhs = kernel.inner(&f, &kernel.apply_k_star(&g));
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        adjoint = adjoint.max((lhs - rhs).abs() / scale);
    }
    let mut iterated: f64 = 0.0;
    let order = w.order();
    let mut starts: Vec<VertexId> = og.active().to_vec();
    if starts.len() > 20 {
        starts = (0..20).map(|_| starts[rng.gen_range(0..starts.len())]).collect();
    }
    for &x in &starts {
        let mut delta = vec![0.0; n];
        delta[x] = 1.0;
        let mut power = delta;
        let mut k = 0u32;
        loop {
            for &y in og.active() {
                if order.leq(x, y) && w.oriented_distance(x, y) == Some(k) {
                    let want = w.pair_weight(x, y)? / w.vertex_weight(y);
                    iterated = iterated.max((power[y] - want).abs() / want.max(1.0));
                }
            }
            if power.iter().all(|&p| p == 0.0) {
                break;
            }
            power = kernel.apply_k(&power);
            k += 1;
        }
    }
    Ok(KernelResiduals {
        row_sum,
        adjoint,
        iterated,
        nilpotency_index: kernel.nilpotency_index(),
        depth: og.depth(),
    })
}

/// `∂P - K P` and `∂Q + K* Q`, relative to the largest factor coefficient.
pub fn factor_ode_residual(curve: &GeodesicCurve) -> f64 {
    let og = curve.oriented();
    let kernel = curve.weights.kernels();
    let (p, q) = (&curve.factors.p, &curve.factors.q);
    let scale = max_coeff_all(p.iter().chain(q)).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for &v in og.active() {
        let mut kp = Polynomial::new(Vec::new());
        for &(u, k) in kernel.k_row(v) {
            kp = &kp + &p[u].scale(k);
        }
        let mut kq = Polynomial::new(Vec::new());
        for &(u, k) in kernel.k_star_row(v) {
            kq = &kq + &q[u].scale(k);
        }
        worst = worst.max((&p[v].derivative() - &kp).max_abs_coeff());
        worst = worst.max((&q[v].derivative() + &kq).max_abs_coeff());
    }
    worst / scale
}

/// Residuals of the velocity transport equations
/// `∂v₊ + v₊ (V₊(head) - V₊(tail)) = 0` and the same for `v₋`, with exact
/// time derivatives of the rational velocities. Returned relative to
/// `max(1, |∂v|)`.
pub fn velocity_ode_residual(curve: &GeodesicCurve, times: &[f64]) -> Result<f64> {
    let og = curve.oriented();
    let mut worst: f64 = 0.0;
    for &t in times {
        let vel = curve.velocities(t)?;
        let f = curve.density_at(t);
        let g = curve.flux_at(t);
        let df = curve.density_rate_at(t);
        let dg = curve.flux_rate_at(t);
        for (e, &(x0, x1)) in og.edges().iter().enumerate() {
            let dge = dg[e];
            for (anchor, v, big) in [
                (x0, vel.v_plus[e], &vel.big_v_plus),
                (x1, vel.v_minus[e], &vel.big_v_minus),
            ] {
                let dv = (dge * f[anchor] - g[e] * df[anchor]) / (f[anchor] * f[anchor]);
                let r = dv + v * (big[x1] - big[x0]);
                worst = worst.max(r.abs() / dv.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

/// All oriented paths from sources to sinks, up to `limit`; the flag tells
/// whether the enumeration was cut short.
pub fn extremal_paths(og: &OrientedGraph, limit: usize) -> (Vec<Vec<VertexId>>, bool) {
    let mut out = Vec::new();
    for &s in og.sources() {
        let mut stack = vec![vec![s]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if og.is_sink(last) {
                if out.len() == limit {
                    return (out, true);
                }
                out.push(path);
                continue;
            }
            for w in og.successors(last) {
                let mut next = path.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    (out, false)
}

/// One oriented path from a source to `x` and one from `x` to a sink,
/// following the first predecessor or successor.
pub fn semi_extremal_pair(og: &OrientedGraph, x: VertexId) -> (Vec<VertexId>, Vec<VertexId>) {
    let mut up = vec![x];
    while let Some(p) = og.predecessors(*up.last().unwrap()).next() {
        up.push(p);
    }
    up.reverse();
    let mut down = vec![x];
    while let Some(s) = og.successors(*down.last().unwrap()).next() {
        down.push(s);
    }
    (up, down)
}

/// Spread of `C_γ` over the grid relative to `max(1, max |C_γ|)`, largest
/// over the given paths. The value on an extremal geodesic is
/// `m(γ) a(x0) b(xL)`, which grows like `L!`, so an absolute spread would
/// only measure its size in ulps.
pub fn c_gamma_spread(curve: &GeodesicCurve, paths: &[Vec<VertexId>], grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in paths {
        let vals = grid.iter().map(|&t| curve.c_gamma(p, t)).collect::<Result<Vec<f64>>>()?;
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        worst = worst.max((hi - lo) / scale);
    }
    Ok(worst)
}

/// Fits `C_γ` by interpolation through `bound + 1` Chebyshev nodes and
/// returns the largest deviation at the check points, relative to
/// `max(1, max |C_γ|)`.
pub fn c_gamma_fit_residual(curve: &GeodesicCurve, path: &[VertexId], bound: usize, checks: &[f64]) -> Result<f64> {
    let nodes = chebyshev_nodes(bound + 1);
    let ys = nodes.iter().map(|&t| curve.c_gamma(path, t)).collect::<Result<Vec<f64>>>()?;
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for &t in checks {
        let c = curve.c_gamma(path, t)?;
        scale = scale.max(c.abs());
        worst = worst.max((c - interpolate(&nodes, &ys, t)).abs());
    }
    Ok(worst / scale)
}

/// `|f(x) - C_γ C_γ̃ / C_{γ ∪ γ̃}|` for semi-extremal pairs through each
/// active vertex, and the largest semi-extremal fit residual.
fn semi_extremal_checks(curve: &GeodesicCurve, interior: &[f64]) -> Result<(f64, f64)> {
    let og = curve.oriented();
    let to_sinks = og.height_to_sinks();
    let from_sources = og.height_from_sources();
    let mut quotient: f64 = 0.0;
    let mut fit: f64 = 0.0;
    for &x in og.active() {
        let (up, down) = semi_extremal_pair(og, x);
        let mut joined = up.clone();
        joined.extend_from_slice(&down[1..]);
        for &t in interior {
            let c = curve.c_gamma(&up, t)? * curve.c_gamma(&down, t)? / curve.c_gamma(&joined, t)?;
            quotient = quotient.max((curve.density_at(t)[x] - c).abs());
        }
        fit = fit.max(c_gamma_fit_residual(curve, &up, to_sinks[x], interior)?);
        fit = fit.max(c_gamma_fit_residual(curve, &down, from_sources[x], interior)?);
    }
    Ok((quotient, fit))
}

/// Whether the weights equal the path-counting default.
pub fn has_counting_weights(w: &WeightSystem) -> bool {
    let reference = WeightSystem::default_weights(w.oriented_arc());
    w.edge_weights()
        .iter()
        .zip(reference.edge_weights())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0))
}

/// Largest pointwise gap to the contraction of `f1` onto the Dirac source.
pub fn contraction_residual(curve: &GeodesicCurve, o: VertexId, grid: &[f64]) -> Result<f64> {
    let g = curve.oriented().graph();
    let mut worst: f64 = 0.0;
    for &t in grid {
        let want = oracle::contraction(g, o, &curve.f1, t)?;
        let got = curve.density_at(t);
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Vertices of a path graph from one endpoint to the other, if the graph is
/// a path.
pub fn path_order(g: &Graph) -> Option<Vec<VertexId>> {
    let n = g.vertex_count();
    if g.edge_count() + 1 != n || (0..n).any(|v| g.neighbors(v).len() > 2) {
        return None;
    }
    let start = (0..n).find(|&v| g.neighbors(v).len() <= 1)?;
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&next) = g.neighbors(cur).iter().find(|&&w| w != prev) {
        order.push(next);
        prev = cur;
        cur = next;
    }
    Some(order)
}

/// Positional form of the Benamou-Brenier equation on a path:
/// `f(k) h(k-1) = g(k) g(k-1)` where `g(k)` is the flux between positions
/// `k` and `k+1` and `h(k-1)` the triple centred at `k`. Positions where the
/// flux does not pass through (a source or sink in the middle of the path)
/// carry no triple and are skipped.
pub fn path_benamou_brenier_residual(curve: &GeodesicCurve, order: &[VertexId]) -> f64 {
    let og = curve.oriented();
    let b = curve.bernstein();
    let mut worst: f64 = 0.0;
    for k in 1..order.len().saturating_sub(1) {
        let (l, c, r) = (order[k - 1], order[k], order[k + 1]);
        let through = match (og.edge_id(l, c), og.edge_id(c, r)) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => og.edge_id(r, c).zip(og.edge_id(c, l)),
        };
        let Some((first, second)) = through else {
            continue;
        };
        let h = og
            .triples_starting_with(first)
            .iter()
            .find(|&&i| og.triples()[i].second == second)
            .map(|&i| &b.h[i])
            .expect("consecutive oriented edges form a triple");
        let r = &(&b.f[c] * h) - &(&b.g[first] * &b.g[second]);
        worst = worst.max(r.max_abs_coeff());
    }
    worst
}

/// Smallest second difference of the entropy on a uniform grid.
pub fn entropy_min_second_difference(curve: &GeodesicCurve, points: usize) -> f64 {
    let grid = uniform_grid(points);
    let h: Vec<f64> = grid.iter().map(|&t| curve.entropy(t)).collect();
    h.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min)
}

/// Orients with respect to `(f_s, f_t)` and returns the number of oriented
/// edges outside the original orientation plus the number of union pairs
/// that are not comparable in the original order.
pub fn stability_violations(curve: &GeodesicCurve, s: f64, t: f64) -> Result<usize> {
    let og = curve.oriented();
    let g = og.graph_arc();
    let fs = curve.measure_at(s)?;
    let ft = curve.measure_at(t)?;
    let (union, sub) = crate::pipeline::orient(&g, &fs, &ft, UnionMethod::Auto)?;
    let order = curve.weights.order();
    let extra = sub.edges().iter().filter(|&&(a, b)| og.edge_id(a, b).is_none()).count();
    let incomparable = union.pairs.iter().filter(|&&(x, y)| !order.leq(x, y)).count();
    Ok(extra + incomparable)
}

/// Tree flux of `-∂f` on the BFS spanning forest: divergence residual and
/// smallest flux value.
pub fn tree_flux_check(curve: &GeodesicCurve, t: f64) -> Result<(f64, f64)> {
    let og = curve.oriented();
    let forest = og.bfs_forest();
    let rate = curve.density_rate_at(t);
    let flux = tree_flux(og, &forest, &rate)?;
    let mut full = vec![0.0; og.edges().len()];
    for (&e, &v) in forest.iter().zip(&flux) {
        full[e] = v;
    }
    let div = vertex_divergence(og, &full);
    let residual = div.iter().zip(&rate).map(|(d, r)| (d + r).abs()).fold(0.0, f64::max);
    let min = flux.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((residual, min))
}

/// Runs the criticality test, shrinking the perturbation by 10 until it is
/// admissible for all step sizes.
pub fn criticality_with_retry(
    curve: &GeodesicCurve,
    side: ActionSide,
    u: Perturbation,
    etas: &[f64],
    points: usize,
) -> Result<CriticalityReport> {
    let mut u = u;
    let mut last = None;
    for _ in 0..6 {
        match curve.criticality(side, &u, etas, points) {
            Ok(r) => return Ok(r),
            Err(e @ Error::PerturbationInfeasible { .. }) => {
                last = Some(e);
                u = u.scaled(0.1);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

/// Runs every check on `curve`.
pub fn verify(curve: &GeodesicCurve, opts: &VerifyOptions) -> VerificationReport {
    let tol = &opts.tolerances;
    let mut rep = VerificationReport::default();
    let og = curve.oriented();
    let graph = og.graph();
    let grid = uniform_grid(opts.grid_points.max(2));
    let interior: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0 && t < 1.0).collect();
    let grid_note = format!("{}-point grid", grid.len());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // normalisation and nonnegativity
    let mut norm: f64 = 0.0;
    let mut neg: f64 = 0.0;
    for &t in &grid {
        let f = curve.density_at(t);
        norm = norm.max((f.iter().sum::<f64>() - 1.0).abs());
        neg = neg.min(f.iter().copied().fold(0.0, f64::min));
    }
    rep.push("normalization", norm, tol.normalization, Relation::AtMost, &grid_note);
    rep.push("nonnegativity", neg, tol.normalization, Relation::AtLeastNegTol, &grid_note);

    let f_start = curve.density_at(0.0);
    let f_end = curve.density_at(1.0);
    let boundary = (0..graph.vertex_count())
        .map(|v| (f_start[v] - curve.f0.get(v)).abs().max((f_end[v] - curve.f1.get(v)).abs()))
        .fold(0.0, f64::max);
    rep.push("boundary", boundary, tol.boundary, Relation::AtMost, "t = 0 and t = 1");

    let min_flux = interior
        .iter()
        .flat_map(|&t| curve.flux_at(t))
        .fold(f64::INFINITY, f64::min);
    let min_flux = if og.edges().is_empty() { f64::INFINITY } else { min_flux };
    rep.push("flux_positivity", min_flux, 0.0, Relation::Above, "interior grid points");

    rep.push(
        "continuity_vertex",
        continuity_vertex_residual(curve),
        tol.continuity,
        Relation::AtMost,
        "coefficients",
    );
    rep.push(
        "continuity_edge",
        continuity_edge_residual(curve),
        tol.continuity,
        Relation::AtMost,
        "coefficients",
    );
    rep.push(
        "benamou_brenier",
        benamou_brenier_residual(curve),
        tol.benamou_brenier,
        Relation::AtMost,
        format!("{} triples, coefficients", og.triples().len()),
    );
    rep.push("edge_sum", edge_sum_residual(curve, &grid), tol.edge_sum, Relation::AtMost, &grid_note);

    match w1_geodesic_residuals(curve, &opts.time_pairs) {
        Ok(r) => rep.push(
            "w1_geodesic",
            r.into_iter().fold(0.0, f64::max),
            tol.w1_geodesic,
            Relation::AtMost,
            format!("{} (s, t) pairs", opts.time_pairs.len()),
        ),
        Err(e) => rep.fail("w1_geodesic", &e),
    }

    let degree = curve.f.iter().map(Polynomial::degree).max().unwrap_or(0);
    rep.push(
        "degree_bound",
        degree as f64,
        og.depth() as f64,
        Relation::AtMost,
        "largest density degree against the longest oriented path",
    );

    match product_form_residual(curve) {
        Ok(r) => rep.push("product_form", r, tol.product_form, Relation::AtMost, "face pairs"),
        Err(e) => rep.fail("product_form", &e),
    }
    rep.push(
        "coupling_marginals",
        coupling_marginal_error(curve),
        tol.marginal,
        Relation::AtMost,
        "L-infinity",
    );
    let cost: f64 = curve
        .coupling
        .entries
        .iter()
        .map(|&(x, y, m)| m * curve.weights.oriented_distance(x, y).unwrap_or(u32::MAX) as f64)
        .sum();
    match transport::w1(graph, &curve.f0, &curve.f1) {
        Ok((w1, _)) => rep.push(
            "coupling_optimality",
            (cost - w1).abs(),
            tol.optimality,
            Relation::AtMost,
            "cost against min-cost flow",
        ),
        Err(e) => rep.fail("coupling_optimality", &e),
    }

    let mut mixture: f64 = 0.0;
    let mut mixture_err = None;
    for &t in &grid {
        match curve.binomial_mixture(t) {
            Ok(m) => {
                let f = curve.density_at(t);
                mixture = m.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(mixture, f64::max);
            }
            Err(e) => mixture_err = Some(e),
        }
    }
    match mixture_err {
        None => rep.push("binomial_mixture", mixture, tol.mixture, Relation::AtMost, &grid_note),
        Some(e) => rep.fail("binomial_mixture", &e),
    }

    match kernel_residuals(&curve.weights, &mut rng, 5) {
        Ok(k) => {
            rep.push("kernel_row_sums", k.row_sum, tol.kernel, Relation::AtMost, "non-extremal rows");
            rep.push("kernel_adjoint", k.adjoint, tol.kernel, Relation::AtMost, "5 random pairs");
            rep.push("kernel_iterated", k.iterated, tol.kernel, Relation::AtMost, "comparable pairs");
            rep.push(
                "kernel_nilpotent",
                k.nilpotency_index as f64,
                (k.depth + 1) as f64,
                Relation::AtMost,
                "index against longest path + 1",
            );
        }
        Err(e) => rep.fail("kernel", &e),
    }
    rep.push("factor_ode", factor_ode_residual(curve), tol.factor_ode, Relation::AtMost, "coefficients");

    match velocity_ode_residual(curve, &interior) {
        Ok(r) => rep.push("velocity_ode", r, tol.velocity_ode, Relation::AtMost, "interior grid points"),
        Err(e) => rep.fail("velocity_ode", &e),
    }

    let fine = uniform_grid(21);
    let (paths, truncated) = extremal_paths(og, opts.path_limit);
    let note = format!(
        "{} source-to-sink paths{}, 21-point grid",
        paths.len(),
        if truncated { " (truncated)" } else { "" }
    );
    match c_gamma_spread(curve, &paths, &fine) {
        Ok(r) => rep.push("c_gamma_constancy", r, tol.c_gamma_constancy, Relation::AtMost, note),
        Err(e) => rep.fail("c_gamma_constancy", &e),
    }
    let fine_interior: Vec<f64> = fine[1..fine.len() - 1].to_vec();
    match semi_extremal_checks(curve, &fine_interior) {
        Ok((q, fit)) => {
            rep.push("product_quotient", q, tol.product_quotient, Relation::AtMost, "one pair per active vertex");
            rep.push("c_gamma_degree_fit", fit, tol.c_gamma_fit, Relation::AtMost, "one pair per active vertex");
        }
        Err(e) => rep.fail("semi_extremal", &e),
    }

    if let Some(o) = dirac_source(&curve.f0) {
        if has_counting_weights(&curve.weights) {
            match contraction_residual(curve, o, &grid) {
                Ok(r) => rep.push("contraction", r, tol.contraction, Relation::AtMost, &grid_note),
                Err(e) => rep.fail("contraction", &e),
            }
        }
    }

    let mut violations = 0;
    let mut stability_err = None;
    for &(s, t) in &opts.time_pairs {
        match stability_violations(curve, s, t) {
            Ok(v) => violations += v,
            Err(e) => stability_err = Some(e),
        }
    }
    match stability_err {
        None => rep.push(
            "orientation_stability",
            violations as f64,
            0.0,
            Relation::AtMost,
            format!("{} (s, t) pairs", opts.time_pairs.len()),
        ),
        Some(e) => rep.fail("orientation_stability", &e),
    }

    let mut tree_div: f64 = 0.0;
    let mut tree_min = f64::INFINITY;
    let mut tree_err = None;
    for &t in &interior {
        match tree_flux_check(curve, t) {
            Ok((r, m)) => {
                tree_div = tree_div.max(r);
                tree_min = tree_min.min(m);
            }
            Err(e) => tree_err = Some(e),
        }
    }
    match tree_err {
        None => {
            rep.push("tree_flux_divergence", tree_div, tol.tree_flux, Relation::AtMost, "BFS forest");
            rep.info("tree_flux_min", tree_min, "BFS forest; single trees may carry negative flux");
        }
        Some(e) => rep.fail("tree_flux", &e),
    }

    if let Some(order) = path_order(graph) {
        rep.push(
            "path_benamou_brenier",
            path_benamou_brenier_residual(curve, &order),
            tol.benamou_brenier,
            Relation::AtMost,
            "positional form",
        );
        let m = entropy_min_second_difference(curve, 101);
        if stochastically_ordered(curve, &order) {
            rep.push("entropy_convexity", m, tol.entropy_convexity, Relation::AtLeastNegTol, "101-point grid");
        } else {
            rep.info("entropy_min_second_difference", m, "101-point grid");
        }
    } else {
        rep.info(
            "entropy_min_second_difference",
            entropy_min_second_difference(curve, 101),
            "101-point grid",
        );
    }

    if opts.perturbations > 0 {
        let etas = [1e-2, 1e-3, 1e-4];
        for (side, label) in [(ActionSide::Plus, "criticality_plus"), (ActionSide::Minus, "criticality_minus")] {
            let mut worst: f64 = 0.0;
            let mut err = None;
            for _ in 0..opts.perturbations {
                let u = Perturbation::random(og.edges().len(), &mut rng);
                match criticality_with_retry(curve, side, u, &etas, opts.quadrature_points) {
                    Ok(r) => worst = worst.max(r.relative),
                    Err(e) => err = Some(e),
                }
            }
            match err {
                None => rep.push(
                    label,
                    worst,
                    tol.criticality,
                    Relation::AtMost,
                    format!("{} perturbations, eta in 1e-2..1e-4", opts.perturbations),
                ),
                Some(e) => rep.fail(label, &e),
            }
        }
    }

    let passed = rep.failures().next().is_none();
    rep.passed = passed;
    rep
}

/// The vertex carrying all the mass, if the measure is a Dirac.
pub fn dirac_source(f: &Measure) -> Option<VertexId> {
    match f.support().as_slice() {
        [v] => Some(*v),
        _ => None,
    }
}

/// On a path, whether `f0` is stochastically dominated by `f1` in one of
/// the two directions along `order`.
pub fn stochastically_ordered(curve: &GeodesicCurve, order: &[VertexId]) -> bool {
    let dominated = |seq: &mut dyn Iterator<Item = VertexId>| {
        let (mut c0, mut c1) = (0.0, 0.0);
        for v in seq {
            c0 += curve.f0.get(v);
            c1 += curve.f1.get(v);
            if c1 > c0 + 1e-12 {
                return false;
            }
        }
        true
    };
    dominated(&mut order.iter().copied()) || dominated(&mut order.iter().rev().copied())
}
