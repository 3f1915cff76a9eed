//! Dense real polynomials in one variable, coefficients in ascending order.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming exact trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `c * t^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Polynomial::new(v)
    }

    /// `c * (1 - t)^k`, expanded in powers of `t`.
    pub fn one_minus_t_pow(c: f64, k: usize) -> Self {
        let mut v = vec![0.0; k + 1];
        let mut binom = 1.0;
        for (j, slot) in v.iter_mut().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *slot = c * sign * binom;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        Polynomial::new(v)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the stored coefficient vector; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Largest power whose coefficient exceeds `tol` in magnitude.
    pub fn effective_degree(&self, tol: f64) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.abs() > tol)
            .unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `p(1 - t)` expressed in powers of `t`.
    pub fn reflect(&self) -> Self {
        let mut out = Polynomial::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                out = &out + &Polynomial::one_minus_t_pow(c, k);
            }
        }
        out
    }

    /// Maximum coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Order of the zero at `t = 0` (index of the first nonzero coefficient).
    pub fn root_order_at_zero(&self, tol: f64) -> usize {
        self.coeffs
            .iter()
            .position(|c| c.abs() > tol)
            .unwrap_or(self.coeffs.len())
    }

    /// Drops the first `k` coefficients, i.e. divides by `t^k` assuming they vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        Polynomial::new(self.coeffs.iter().skip(k).copied().collect())
    }
}

impl Zero for Polynomial {
    fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = Polynomial::new(vec![1.0, 2.0]);
        let q = Polynomial::new(vec![0.0, -1.0, 3.0]);
        assert_eq!((&p * &q).coeffs(), &[0.0, -1.0, 1.0, 6.0]);
        assert_eq!((&p + &q).coeffs(), &[1.0, 1.0, 3.0]);
        assert_eq!((&p - &p).coeffs(), &[] as &[f64]);
        assert_eq!(q.derivative().coeffs(), &[-1.0, 6.0]);
        assert_eq!(q.eval(2.0), 10.0);
    }

    #[test]
    fn reflection() {
        let p = Polynomial::one_minus_t_pow(2.0, 3);
        assert_eq!(p.coeffs(), &[2.0, -6.0, 6.0, -2.0]);
        assert_eq!(p.reflect().coeffs(), &[0.0, 0.0, 0.0, 2.0]);
        let q = Polynomial::new(vec![0.3, -1.2, 0.7]);
        for t in [0.0, 0.25, 0.9] {
            assert!((q.reflect().eval(t) - q.eval(1.0 - t)).abs() < 1e-15);
        }
    }

    #[test]
    fn trimming_and_degree() {
        let p = Polynomial::new(vec![1.0, 0.0, 1e-20, 0.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.effective_degree(1e-15), 0);
        assert_eq!(Polynomial::new(vec![0.0, 0.0, 5.0]).root_order_at_zero(0.0), 2);
    }
}
