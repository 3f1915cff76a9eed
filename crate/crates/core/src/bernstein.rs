//! Polynomials on `[0, 1]` in the Bernstein basis
//! `B_{i,n}(t) = C(n, i) t^i (1 - t)^(n - i)`.
//!
//! Polynomials with nonnegative coefficients in powers of `t` or of `1 - t`
//! convert to this basis by sums of nonnegative terms, and products of
//! nonnegative Bernstein polynomials stay nonnegative, so the densities and
//! fluxes of a curve are represented here to full relative precision. The
//! coefficient magnitudes also bound the function: `|p(t)| <= max |β_i|`.

use std::ops::{Add, Mul, Sub};

use num_traits::Zero;

use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq)]
pub struct Bernstein {
    coeffs: Vec<f64>,
}

/// `C(n, k)` for `k = 0..=n`.
fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

impl Bernstein {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a Bernstein polynomial has at least one coefficient");
        Bernstein { coeffs }
    }

    /// Converts `Σ p_k t^k` to degree `n >= deg p`:
    /// `β_i = Σ_{k <= i} C(i, k) / C(n, k) p_k`.
    pub fn from_power(p: &Polynomial, n: usize) -> Self {
        assert!(p.degree() <= n);
        let bn = binomial_row(n);
        let coeffs = (0..=n)
            .map(|i| {
                let bi = binomial_row(i);
                (0..=i).map(|k| bi[k] / bn[k] * p.coeff(k)).sum()
            })
            .collect();
        Bernstein { coeffs }
    }

    /// Converts `Σ q_k (1 - t)^k` to degree `n >= deg q`:
    /// `β_i = Σ_{k <= n - i} C(n - i, k) / C(n, k) q_k`.
    pub fn from_reflected_power(q: &Polynomial, n: usize) -> Self {
        let mut b = Bernstein::from_power(q, n);
        b.coeffs.reverse();
        b
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Bernstein {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// The same polynomial written with degree `n >= self.degree()`.
    pub fn elevate(&self, n: usize) -> Self {
        assert!(n >= self.degree());
        let mut c = self.coeffs.clone();
        for m in self.degree()..n {
            let next = (0..=m + 1)
                .map(|i| {
                    let w = i as f64 / (m + 1) as f64;
                    let left = if i > 0 { w * c[i - 1] } else { 0.0 };
                    let right = if i <= m { (1.0 - w) * c[i] } else { 0.0 };
                    left + right
                })
                .collect();
            c = next;
        }
        Bernstein { coeffs: c }
    }

    /// Derivative, of degree `n - 1`: `n (β_{i+1} - β_i)`.
    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Bernstein { coeffs: vec![0.0] };
        }
        Bernstein {
            coeffs: self.coeffs.windows(2).map(|w| n as f64 * (w[1] - w[0])).collect(),
        }
    }

    /// De Casteljau evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut c = self.coeffs.clone();
        for r in (1..c.len()).rev() {
            for i in 0..r {
                c[i] = (1.0 - t) * c[i] + t * c[i + 1];
            }
        }
        c[0]
    }

    /// Power-basis form; ill-conditioned for large degrees, meant for tests.
    pub fn to_power(&self) -> Polynomial {
        let n = self.degree();
        let bn = binomial_row(n);
        let mut out = Polynomial::zero();
        for (i, &b) in self.coeffs.iter().enumerate() {
            let basis = &Polynomial::monomial(bn[i], i) * &Polynomial::one_minus_t_pow(1.0, n - i);
            out = &out + &basis.scale(b);
        }
        out
    }

    fn combine(&self, rhs: &Bernstein, sign: f64) -> Bernstein {
        let n = self.degree().max(rhs.degree());
        let (a, b) = (self.elevate(n), rhs.elevate(n));
        Bernstein {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + sign * y).collect(),
        }
    }
}

impl Zero for Bernstein {
    fn zero() -> Self {
        Bernstein { coeffs: vec![0.0] }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

impl Add for Bernstein {
    type Output = Bernstein;
    fn add(self, rhs: Bernstein) -> Bernstein {
        self.combine(&rhs, 1.0)
    }
}

impl Sub for Bernstein {
    type Output = Bernstein;
    fn sub(self, rhs: Bernstein) -> Bernstein {
        self.combine(&rhs, -1.0)
    }
}

impl Add<&Bernstein> for &Bernstein {
    type Output = Bernstein;
    fn add(self, rhs: &Bernstein) -> Bernstein {
        self.combine(rhs, 1.0)
    }
}

impl Sub<&Bernstein> for &Bernstein {
    type Output = Bernstein;
    fn sub(self, rhs: &Bernstein) -> Bernstein {
        self.combine(rhs, -1.0)
    }
}

impl Mul<&Bernstein> for &Bernstein {
    type Output = Bernstein;

    /// `γ_l = Σ_{i+j=l} C(m, i) C(n, j) / C(m+n, l) α_i β_j`.
    fn mul(self, rhs: &Bernstein) -> Bernstein {
        let (m, n) = (self.degree(), rhs.degree());
        let (bm, bn, bmn) = (binomial_row(m), binomial_row(n), binomial_row(m + n));
        let mut out = vec![0.0; m + n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += bm[i] * bn[j] / bmn[i + j] * a * b;
            }
        }
        Bernstein { coeffs: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }

    #[test]
    fn conversions_agree_with_power_form() {
        let p = Polynomial::new(vec![0.5, -1.0, 2.0]);
        let q = Polynomial::new(vec![1.0, 3.0]);
        let bp = Bernstein::from_power(&p, 4);
        let bq = Bernstein::from_reflected_power(&q, 3);
        for t in [0.0, 0.2, 0.7, 1.0] {
            close(bp.eval(t), p.eval(t));
            close(bq.eval(t), q.eval(1.0 - t));
            close(bp.elevate(7).eval(t), p.eval(t));
            close((&bp * &bq).eval(t), p.eval(t) * q.eval(1.0 - t));
            close(bp.derivative().eval(t), p.derivative().eval(t));
            close((&bp - &bq).eval(t), p.eval(t) - q.eval(1.0 - t));
        }
        let back = bp.to_power();
        for k in 0..=4 {
            close(back.coeff(k), p.coeff(k));
        }
    }

    #[test]
    fn binomial_density() {
        // t (1 - t) in degree 2 is B_{1,2} / 2
        let b = Bernstein::from_power(&Polynomial::new(vec![0.0, 1.0, -1.0]), 2);
        assert_eq!(b.coeffs(), &[0.0, 0.5, 0.0]);
        assert_eq!(Bernstein::from_reflected_power(&Polynomial::monomial(1.0, 2), 2).coeffs(), &[1.0, 0.0, 0.0]);
    }
}
