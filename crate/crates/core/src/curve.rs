//! Polynomial representation of the interpolating curve: densities on
//! vertices, fluxes on oriented edges and second-order fluxes on oriented
//! triples, together with velocities, path functionals, entropy and the
//! action functionals.
//!
//! The polynomials `f`, `g`, `h` are stored in powers of `t` and used for
//! every coefficient identity. Pointwise values are computed from the
//! factors instead: `P` has nonnegative coefficients in `t` and `Q` has
//! nonnegative coefficients in `1 - t`, so `m P(t) Q(1 - t)` evaluates
//! without cancellation near either endpoint.

use std::sync::Arc;

use rand::Rng;

use crate::bernstein::Bernstein;
use crate::error::{Error, Result};
use crate::graph::{Measure, VertexId};
use crate::orientation::{vertex_divergence, OrientedGraph};
use crate::poly::Polynomial;
use crate::scaling::{factorial, CostKernel, ScalingMethod, ScalingResult};
use crate::weights::WeightSystem;

/// Densities at or below this value count as zero when dividing.
pub const ZERO_DENSITY: f64 = 1e-300;

/// The factor polynomials `P` and `Q`, one per vertex (zero off the active set).
#[derive(Debug, Clone)]
pub struct Factors {
    /// `P` in powers of `t`.
    pub p: Vec<Polynomial>,
    /// `Q` in powers of `1 - t`.
    pub q_dual: Vec<Polynomial>,
    /// `Q` in powers of `t`.
    pub q: Vec<Polynomial>,
    p_rate: Vec<Polynomial>,
    q_dual_rate: Vec<Polynomial>,
}

impl Factors {
    pub fn new(p: Vec<Polynomial>, q_dual: Vec<Polynomial>) -> Self {
        let q = q_dual.iter().map(Polynomial::reflect).collect();
        let p_rate = p.iter().map(Polynomial::derivative).collect();
        let q_dual_rate = q_dual.iter().map(Polynomial::derivative).collect();
        Factors {
            p,
            q_dual,
            q,
            p_rate,
            q_dual_rate,
        }
    }

    pub fn p_at(&self, x: VertexId, t: f64) -> f64 {
        self.p[x].eval(t)
    }

    pub fn q_at(&self, x: VertexId, t: f64) -> f64 {
        self.q_dual[x].eval(1.0 - t)
    }

    pub fn p_rate_at(&self, x: VertexId, t: f64) -> f64 {
        self.p_rate[x].eval(t)
    }

    pub fn q_rate_at(&self, x: VertexId, t: f64) -> f64 {
        -self.q_dual_rate[x].eval(1.0 - t)
    }

    /// Order of vanishing and leading coefficient of `P(x) Q(y)` at the
    /// endpoint `t = 0` (in powers of `t`) or `t = 1` (in powers of `1 - t`).
    /// The zero coefficients of `P` and of `Q` in its own variable are exact.
    fn endpoint_term(&self, x: VertexId, y: VertexId, at_one: bool) -> (usize, f64) {
        if at_one {
            let k = self.q_dual[y].root_order_at_zero(0.0);
            (k, self.p_at(x, 1.0) * self.q_dual[y].coeff(k))
        } else {
            let k = self.p[x].root_order_at_zero(0.0);
            (k, self.p[x].coeff(k) * self.q_at(y, 0.0))
        }
    }
}

/// `P(z) = Σ_k (K^k a)(z) t^k / k!` and `Q(z) = Σ_k (K*^k b)(z) (1-t)^k / k!`.
pub fn build_factors(w: &WeightSystem, a: &[f64], b: &[f64]) -> Factors {
    let og = w.oriented();
    let n = og.vertex_count();
    let kernel = w.kernels();
    let depth = og.depth();
    let mut p_coeffs = vec![vec![0.0; depth + 1]; n];
    let mut q_coeffs = vec![vec![0.0; depth + 1]; n];
    let mut pa = a.to_vec();
    let mut qb = b.to_vec();
    for k in 0..=depth {
        if k > 0 {
            pa = kernel.apply_k(&pa).into_iter().map(|v| v / k as f64).collect();
            qb = kernel.apply_k_star(&qb).into_iter().map(|v| v / k as f64).collect();
        }
        for v in 0..n {
            p_coeffs[v][k] = pa[v];
            q_coeffs[v][k] = qb[v];
        }
    }
    Factors::new(
        p_coeffs.into_iter().map(Polynomial::new).collect(),
        q_coeffs.into_iter().map(Polynomial::new).collect(),
    )
}

/// Densities, fluxes and triple fluxes in the Bernstein basis.
#[derive(Debug, Clone)]
pub struct BernsteinCurve {
    pub f: Vec<Bernstein>,
    pub g: Vec<Bernstein>,
    pub h: Vec<Bernstein>,
}

/// Summary of the coupling that produced a curve.
#[derive(Debug, Clone)]
pub struct CouplingInfo {
    /// `(x, y, mass)` of the product-form coupling.
    pub entries: Vec<(VertexId, VertexId, f64)>,
    pub iterations: usize,
    pub marginal_error: f64,
    pub method: ScalingMethod,
}

/// The interpolating curve `t -> (f_t, g_t, h_t)` stored as polynomials.
#[derive(Debug, Clone)]
pub struct GeodesicCurve {
    pub weights: Arc<WeightSystem>,
    pub f0: Measure,
    pub f1: Measure,
    pub w1: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub factors: Factors,
    /// Density per vertex (zero off the active set).
    pub f: Vec<Polynomial>,
    /// Flux per oriented edge, by edge id.
    pub g: Vec<Polynomial>,
    /// Second-order flux per oriented triple, by triple id.
    pub h: Vec<Polynomial>,
    /// `m(x0, x1, x2)` per oriented triple.
    pub triple_weights: Vec<f64>,
    pub coupling: CouplingInfo,
}

/// Velocity fields at one time.
#[derive(Debug, Clone)]
pub struct Velocities {
    /// `g / f(tail)` per edge.
    pub v_plus: Vec<f64>,
    /// `g / f(head)` per edge.
    pub v_minus: Vec<f64>,
    /// Sum of `v_plus` over outgoing edges, per vertex.
    pub big_v_plus: Vec<f64>,
    /// Sum of `v_minus` over incoming edges, per vertex.
    pub big_v_minus: Vec<f64>,
}

/// Which of the two mirrored action functionals to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionSide {
    /// `Σ g log(g / f(tail))`.
    Plus,
    /// `Σ g log(g / f(head))`.
    Minus,
}

/// Outcome of a perturbation test of an action functional.
#[derive(Debug, Clone)]
pub struct CriticalityReport {
    pub etas: Vec<f64>,
    pub differences: Vec<f64>,
    /// Fitted coefficient of `η` in `ΔI(η) ≈ αη + βη²`.
    pub linear: f64,
    pub quadratic: f64,
    /// Magnitude of the individual first-order terms, before cancellation.
    pub scale: f64,
    /// `|linear| / scale`.
    pub relative: f64,
}

/// Edge perturbation `u_e = t (1 - t) r_e(t) f(tail) f(head)`.
///
/// It vanishes at both endpoints, and the density factors keep
/// `f + η∇u` and `g - η∂u` admissible for small `η` even where the curve
/// itself vanishes.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub r: Vec<Polynomial>,
}

impl Perturbation {
    pub fn zero(edges: usize) -> Self {
        Perturbation {
            r: vec![Polynomial::new(Vec::new()); edges],
        }
    }

    /// `r_e` of degree two with coefficients uniform in `[-1, 1]`.
    pub fn random<R: Rng>(edges: usize, rng: &mut R) -> Self {
        Perturbation {
            r: (0..edges)
                .map(|_| Polynomial::new((0..3).map(|_| rng.gen_range(-1.0..=1.0)).collect()))
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Perturbation {
            r: self.r.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// `u` and `∂u` on every edge, given the density and its rate at `t`.
    pub fn eval(&self, og: &OrientedGraph, t: f64, f: &[f64], df: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let bump = t * (1.0 - t);
        let bump_rate = 1.0 - 2.0 * t;
        let mut u = Vec::with_capacity(self.r.len());
        let mut du = Vec::with_capacity(self.r.len());
        for (e, &(x0, x1)) in og.edges().iter().enumerate() {
            let r = self.r[e].eval(t);
            let dr = self.r[e].derivative().eval(t);
            let ff = f[x0] * f[x1];
            let dff = df[x0] * f[x1] + f[x0] * df[x1];
            u.push(bump * r * ff);
            du.push(bump_rate * r * ff + bump * dr * ff + bump * r * dff);
        }
        (u, du)
    }
}

impl GeodesicCurve {
    /// Assembles `f = m P Q`, `g = m P(tail) Q(head)` and
    /// `h = m(x0, x1, x2) P(x0) Q(x2)` from a scaling result.
    pub fn build(
        weights: Arc<WeightSystem>,
        ck: &CostKernel,
        sr: &ScalingResult,
        f0: Measure,
        f1: Measure,
        w1: f64,
    ) -> Self {
        let factors = build_factors(&weights, &sr.a, &sr.b);
        let coupling = CouplingInfo {
            entries: sr.entries(ck),
            iterations: sr.iterations,
            marginal_error: sr.marginal_error,
            method: sr.method,
        };
        GeodesicCurve::from_factors(weights, factors, sr.a.clone(), sr.b.clone(), f0, f1, w1, coupling)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_factors(
        weights: Arc<WeightSystem>,
        factors: Factors,
        a: Vec<f64>,
        b: Vec<f64>,
        f0: Measure,
        f1: Measure,
        w1: f64,
        coupling: CouplingInfo,
    ) -> Self {
        let og = weights.oriented();
        let n = og.vertex_count();
        let (p, q) = (&factors.p, &factors.q);
        let f: Vec<Polynomial> = (0..n)
            .map(|v| {
                if og.is_active(v) {
                    (&p[v] * &q[v]).scale(weights.vertex_weight(v))
                } else {
                    Polynomial::new(Vec::new())
                }
            })
            .collect();
        let g: Vec<Polynomial> = og
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(x0, x1))| (&p[x0] * &q[x1]).scale(weights.edge_weight(e)))
            .collect();
        let triple_weights: Vec<f64> = og
            .triples()
            .iter()
            .map(|t| weights.edge_weight(t.first) * weights.edge_weight(t.second) / weights.vertex_weight(t.x1))
            .collect();
        let h: Vec<Polynomial> = og
            .triples()
            .iter()
            .zip(&triple_weights)
            .map(|(t, &m)| (&p[t.x0] * &q[t.x2]).scale(m))
            .collect();
        GeodesicCurve {
            weights,
            f0,
            f1,
            w1,
            a,
            b,
            factors,
            f,
            g,
            h,
            triple_weights,
            coupling,
        }
    }

    pub fn oriented(&self) -> &OrientedGraph {
        self.weights.oriented()
    }

    /// `f`, `g`, `h` rebuilt from the factors in the Bernstein basis of
    /// degree twice the depth, where every coefficient is a sum of
    /// nonnegative terms.
    pub fn bernstein(&self) -> BernsteinCurve {
        let og = self.oriented();
        let w = &self.weights;
        let depth = og.depth();
        let n = og.vertex_count();
        let zero = Bernstein::new(vec![0.0; 2 * depth + 1]);
        let p: Vec<Bernstein> = self.factors.p.iter().map(|p| Bernstein::from_power(p, depth)).collect();
        let q: Vec<Bernstein> = self
            .factors
            .q_dual
            .iter()
            .map(|q| Bernstein::from_reflected_power(q, depth))
            .collect();
        let f = (0..n)
            .map(|v| {
                if og.is_active(v) {
                    (&p[v] * &q[v]).scale(w.vertex_weight(v))
                } else {
                    zero.clone()
                }
            })
            .collect();
        let g = og
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(x0, x1))| (&p[x0] * &q[x1]).scale(w.edge_weight(e)))
            .collect();
        let h = og
            .triples()
            .iter()
            .zip(&self.triple_weights)
            .map(|(t, &m)| (&p[t.x0] * &q[t.x2]).scale(m))
            .collect();
        BernsteinCurve { f, g, h }
    }

    pub fn density_at(&self, t: f64) -> Vec<f64> {
        let og = self.oriented();
        let fac = &self.factors;
        (0..og.vertex_count())
            .map(|v| {
                if og.is_active(v) {
                    self.weights.vertex_weight(v) * fac.p_at(v, t) * fac.q_at(v, t)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `∂f` at `t`.
    pub fn density_rate_at(&self, t: f64) -> Vec<f64> {
        let og = self.oriented();
        let fac = &self.factors;
        (0..og.vertex_count())
            .map(|v| {
                if og.is_active(v) {
                    self.weights.vertex_weight(v)
                        * (fac.p_rate_at(v, t) * fac.q_at(v, t) + fac.p_at(v, t) * fac.q_rate_at(v, t))
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn flux_at(&self, t: f64) -> Vec<f64> {
        let fac = &self.factors;
        self.oriented()
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(x0, x1))| self.weights.edge_weight(e) * fac.p_at(x0, t) * fac.q_at(x1, t))
            .collect()
    }

    /// `∂g` at `t`.
    pub fn flux_rate_at(&self, t: f64) -> Vec<f64> {
        let fac = &self.factors;
        self.oriented()
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(x0, x1))| {
                self.weights.edge_weight(e)
                    * (fac.p_rate_at(x0, t) * fac.q_at(x1, t) + fac.p_at(x0, t) * fac.q_rate_at(x1, t))
            })
            .collect()
    }

    pub fn triple_flux_at(&self, t: f64) -> Vec<f64> {
        let fac = &self.factors;
        self.oriented()
            .triples()
            .iter()
            .zip(&self.triple_weights)
            .map(|(tr, &m)| m * fac.p_at(tr.x0, t) * fac.q_at(tr.x2, t))
            .collect()
    }

    /// Density at `t` as a validated measure (negligible negative rounding
    /// is clipped to zero).
    pub fn measure_at(&self, t: f64) -> Result<Measure> {
        let og = self.oriented();
        let mut v = self.density_at(t);
        for x in &mut v {
            if *x < 0.0 && *x > -1e-12 {
                *x = 0.0;
            }
        }
        Measure::new(og.graph(), v)
    }

    /// Density by the binomial-mixture formula, independently of `P` and `Q`:
    /// every face pair `(x, y)` spreads `π(x, y)` over the vertices `z`
    /// between them with weight
    /// `m(x, z) m(z, y) / (m(z) m(x, y)) · C(d, d(x, z)) t^{d(x,z)} (1-t)^{d(z,y)}`.
    pub fn binomial_mixture(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidTime(t));
        }
        let w = &self.weights;
        let og = w.oriented();
        let mut out = vec![0.0; og.vertex_count()];
        for &(x, y, mass) in &self.coupling.entries {
            let d = w.oriented_distance(x, y).ok_or_else(|| {
                Error::NotComparable(og.graph().name(x).into(), og.graph().name(y).into())
            })?;
            let mxy = w.pair_weight(x, y)?;
            for &z in og.active() {
                let (Some(d1), true) = (w.oriented_distance(x, z), w.order().leq(z, y)) else {
                    continue;
                };
                let d2 = d - d1;
                let mxz = w.pair_weight(x, z)?;
                let mzy = w.pair_weight_backward(z, y)?;
                let ratio = mxz * mzy / (w.vertex_weight(z) * mxy);
                let binom = factorial(d) / (factorial(d1) * factorial(d2));
                out[z] += mass * ratio * binom * t.powi(d1 as i32) * (1.0 - t).powi(d2 as i32);
            }
        }
        Ok(out)
    }

    /// Velocity fields at `t ∈ (0, 1)`.
    pub fn velocities(&self, t: f64) -> Result<Velocities> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidTime(t));
        }
        let og = self.oriented();
        let f = self.density_at(t);
        let g = self.flux_at(t);
        let n = og.vertex_count();
        let mut v_plus = Vec::with_capacity(g.len());
        let mut v_minus = Vec::with_capacity(g.len());
        let mut big_v_plus = vec![0.0; n];
        let mut big_v_minus = vec![0.0; n];
        for (e, &(x0, x1)) in og.edges().iter().enumerate() {
            for v in [x0, x1] {
                if f[v] <= ZERO_DENSITY {
                    return Err(self.zero_density(v, t));
                }
            }
            let vp = g[e] / f[x0];
            let vm = g[e] / f[x1];
            v_plus.push(vp);
            v_minus.push(vm);
            big_v_plus[x0] += vp;
            big_v_minus[x1] += vm;
        }
        Ok(Velocities {
            v_plus,
            v_minus,
            big_v_plus,
            big_v_minus,
        })
    }

    fn zero_density(&self, v: VertexId, t: f64) -> Error {
        Error::ZeroDensity {
            vertex: self.oriented().graph().name(v).to_string(),
            t,
        }
    }

    /// `C_γ(t)`: the density for a single vertex, the flux for a single edge,
    /// and otherwise the product of edge fluxes over the product of interior
    /// densities. At `t = 0` and `t = 1` the value is the polynomial limit.
    pub fn c_gamma(&self, path: &[VertexId], t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidTime(t));
        }
        let og = self.oriented();
        if !og.is_oriented_path(path) {
            return Err(Error::NotOrientedPath);
        }
        let fac = &self.factors;
        let w = &self.weights;
        if path.len() == 1 {
            let x = path[0];
            return Ok(w.vertex_weight(x) * fac.p_at(x, t) * fac.q_at(x, t));
        }
        let edges: Vec<usize> = path.windows(2).map(|p| og.edge_id(p[0], p[1]).unwrap()).collect();
        let interior = &path[1..path.len() - 1];
        if t > 0.0 && t < 1.0 {
            let mut value = 1.0;
            for (&e, pair) in edges.iter().zip(path.windows(2)) {
                value *= w.edge_weight(e) * fac.p_at(pair[0], t) * fac.q_at(pair[1], t);
            }
            for &x in interior {
                let fx = w.vertex_weight(x) * fac.p_at(x, t) * fac.q_at(x, t);
                if fx <= ZERO_DENSITY {
                    return Err(self.zero_density(x, t));
                }
                value /= fx;
            }
            return Ok(value);
        }
        let at_one = t == 1.0;
        let (mut num_order, mut num) = (0, 1.0);
        for (&e, pair) in edges.iter().zip(path.windows(2)) {
            let (k, c) = fac.endpoint_term(pair[0], pair[1], at_one);
            num_order += k;
            num *= w.edge_weight(e) * c;
        }
        let (mut den_order, mut den) = (0, 1.0);
        for &x in interior {
            let (k, c) = fac.endpoint_term(x, x, at_one);
            den_order += k;
            den *= w.vertex_weight(x) * c;
        }
        Ok(match num_order.cmp(&den_order) {
            std::cmp::Ordering::Greater => 0.0,
            std::cmp::Ordering::Equal => num / den,
            std::cmp::Ordering::Less => f64::INFINITY,
        })
    }

    /// `H(t) = Σ f log f` over vertices with positive mass.
    pub fn entropy(&self, t: f64) -> f64 {
        self.density_at(t)
            .into_iter()
            .filter(|&v| v > 0.0)
            .map(|v| v * v.ln())
            .sum()
    }

    pub fn entropy_profile(&self, grid: &[f64]) -> Vec<(f64, f64)> {
        grid.iter().map(|&t| (t, self.entropy(t))).collect()
    }

    /// Trapezoidal approximation of the action functional on a uniform grid
    /// with `points` nodes.
    pub fn action(&self, side: ActionSide, points: usize) -> f64 {
        let grid = uniform_grid(points);
        let values: Vec<f64> = grid
            .iter()
            .map(|&t| action_integrand(self.oriented(), side, &self.density_at(t), &self.flux_at(t)))
            .collect();
        trapezoid(&grid, &values)
    }

    /// Perturbs the curve by `f + η ∇u`, `g - η ∂u` and fits
    /// `ΔI(η) = αη + βη²`.
    pub fn criticality(
        &self,
        side: ActionSide,
        u: &Perturbation,
        etas: &[f64],
        points: usize,
    ) -> Result<CriticalityReport> {
        let og = self.oriented();
        assert_eq!(u.r.len(), og.edges().len());
        let grid = uniform_grid(points);
        let mut base = Vec::with_capacity(grid.len());
        let mut scale_terms = Vec::with_capacity(grid.len());
        let mut samples = Vec::with_capacity(grid.len());
        for &t in &grid {
            let f = self.density_at(t);
            let g = self.flux_at(t);
            let df = self.density_rate_at(t);
            let (uv, du) = u.eval(og, t, &f, &df);
            let div = vertex_divergence(og, &uv);
            base.push(action_integrand(og, side, &f, &g));
            let mut s = 0.0;
            for (e, &(x0, x1)) in og.edges().iter().enumerate() {
                let anchor = match side {
                    ActionSide::Plus => x0,
                    ActionSide::Minus => x1,
                };
                if g[e] > 0.0 && f[anchor] > ZERO_DENSITY {
                    let v = g[e] / f[anchor];
                    s += du[e].abs() * (1.0 + v.ln()).abs() + div[anchor].abs() * v;
                }
            }
            scale_terms.push(s);
            samples.push((t, f, g, du, div));
        }
        let scale = trapezoid(&grid, &scale_terms);
        let mut differences = Vec::with_capacity(etas.len());
        for &eta in etas {
            let mut diff = Vec::with_capacity(grid.len());
            for (i, (t, f, g, du, div)) in samples.iter().enumerate() {
                let fp: Vec<f64> = f.iter().zip(div).map(|(a, b)| a + eta * b).collect();
                let gp: Vec<f64> = g.iter().zip(du).map(|(a, b)| a - eta * b).collect();
                let interior = *t > 0.0 && *t < 1.0;
                if og.active().iter().any(|&v| fp[v] < 0.0)
                    || gp.iter().any(|&x| x < 0.0 || (interior && x <= 0.0))
                {
                    return Err(Error::PerturbationInfeasible { eta, t: *t });
                }
                diff.push(action_integrand(og, side, &fp, &gp) - base[i]);
            }
            differences.push(trapezoid(&grid, &diff));
        }
        let (linear, quadratic) = fit_linear_quadratic(etas, &differences);
        let relative = if scale > 0.0 { linear.abs() / scale } else { linear.abs() };
        Ok(CriticalityReport {
            etas: etas.to_vec(),
            differences,
            linear,
            quadratic,
            scale,
            relative,
        })
    }
}

fn action_integrand(og: &OrientedGraph, side: ActionSide, f: &[f64], g: &[f64]) -> f64 {
    og.edges()
        .iter()
        .enumerate()
        .map(|(e, &(x0, x1))| {
            let anchor = match side {
                ActionSide::Plus => x0,
                ActionSide::Minus => x1,
            };
            if g[e] > 0.0 && f[anchor] > ZERO_DENSITY {
                g[e] * (g[e] / f[anchor]).ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// `n` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Least-squares fit of `y ≈ α x + β x²`.
pub fn fit_linear_quadratic(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        // columns scaled by the largest η for conditioning
        let (c1, c2) = (xi, xi * xi);
        s11 += c1 * c1;
        s12 += c1 * c2;
        s22 += c2 * c2;
        r1 += c1 * yi;
        r2 += c2 * yi;
    }
    let det = s11 * s22 - s12 * s12;
    if det == 0.0 {
        return (if s11 > 0.0 { r1 / s11 } else { 0.0 }, 0.0);
    }
    ((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det)
}

/// Chebyshev nodes of the first kind mapped to `(0, 1)`.
pub fn chebyshev_nodes(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * count) as f64;
            0.5 - 0.5 * theta.cos()
        })
        .collect()
}

/// Evaluates at `t` the polynomial interpolating `(xs, ys)` (barycentric form).
pub fn interpolate(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = xs.len();
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&k| k != j)
                .map(|k| xs[j] - xs[k])
                .product::<f64>()
        })
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        let diff = t - xs[j];
        if diff == 0.0 {
            return ys[j];
        }
        let c = weights[j] / diff;
        num += c * ys[j];
        den += c;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let grid = uniform_grid(11);
        let v: Vec<f64> = grid.iter().map(|t| 3.0 * t + 1.0).collect();
        assert!((trapezoid(&grid, &v) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn quadratic_fit_recovers_coefficients() {
        let x = [1e-2, 1e-3, 1e-4];
        let y: Vec<f64> = x.iter().map(|e| 0.3 * e + 2.0 * e * e).collect();
        let (a, b) = fit_linear_quadratic(&x, &y);
        assert!((a - 0.3).abs() < 1e-12);
        assert!((b - 2.0).abs() < 1e-9);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let xs = chebyshev_nodes(4);
        let p = Polynomial::new(vec![1.0, -2.0, 0.5, 3.0]);
        let ys: Vec<f64> = xs.iter().map(|&t| p.eval(t)).collect();
        for t in [0.0, 0.3, 1.0] {
            assert!((interpolate(&xs, &ys, t) - p.eval(t)).abs() < 1e-12);
        }
    }
}
