//! Closed-form interpolations used as independent references: binomial
//! thinning on a path and contraction of a measure onto a vertex.

use num_integer::binomial;

use crate::error::{Error, Result};
use crate::graph::{Graph, GeodesicIter, Measure, VertexId};

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

fn binomial_pmf(n: usize, k: usize, t: f64) -> f64 {
    binomial(n as u64, k as u64) as f64 * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32)
}

/// Binomial thinning of a distribution on `{0, ..., n}`:
/// `T_t f(k) = Σ_l C(l, k) t^k (1 - t)^(l - k) f(l)`.
pub fn thinning(f: &[f64], t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let mut out = vec![0.0; f.len()];
    for (l, &fl) in f.iter().enumerate() {
        if fl == 0.0 {
            continue;
        }
        for (k, slot) in out.iter_mut().enumerate().take(l + 1) {
            *slot += binomial_pmf(l, k, t) * fl;
        }
    }
    Ok(out)
}

/// Contraction of `f1` onto `o`: each target `z` spreads `f1(z)` uniformly
/// over the geodesics from `o` to `z`, and along each geodesic of length `L`
/// puts `Bin(L, t)` mass on its vertices.
pub fn contraction(g: &Graph, o: VertexId, f1: &Measure, t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let mut out = vec![0.0; g.vertex_count()];
    for z in f1.support() {
        let paths: Vec<Vec<VertexId>> = GeodesicIter::new(g, o, z).collect();
        let share = f1.get(z) / paths.len() as f64;
        for path in &paths {
            let len = path.len() - 1;
            for (k, &v) in path.iter().enumerate() {
                out[v] += share * binomial_pmf(len, k, t);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_of_dirac_is_binomial() {
        let f = thinning(&[0.0, 0.0, 1.0], 0.3).unwrap();
        let want = [0.49, 0.42, 0.09];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(thinning(&[0.2, 0.3, 0.5], 1.0).unwrap(), vec![0.2, 0.3, 0.5]);
        assert_eq!(thinning(&[0.2, 0.3, 0.5], 0.0).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn diamond_contraction() {
        let g = Graph::new(
            &["o", "a", "b", "z"],
            &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")],
        )
        .unwrap();
        let f = contraction(&g, 0, &Measure::dirac(&g, 3), 0.5).unwrap();
        assert_eq!(f, vec![0.25; 4]);
        let f = contraction(&g, 0, &Measure::dirac(&g, 0), 0.7).unwrap();
        assert_eq!(f, vec![1.0, 0.0, 0.0, 0.0]);
    }
}
