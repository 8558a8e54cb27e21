use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    /// Fisher z statistic (signed).
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
    /// The correlation submatrix was singular and a pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

/// Pearson correlation matrix over all graph nodes (features then label).
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    n: usize,
    corr: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn from_dataset(data: &Dataset) -> Self {
        let p = data.d() + 1;
        let cols: Vec<Vec<f64>> = (0..p).map(|k| data.node_column(k)).collect();
        Self::from_columns(&cols)
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let p = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        let centered: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| {
                let m = c.iter().sum::<f64>() / n.max(1) as f64;
                c.iter().map(|v| v - m).collect()
            })
            .collect();
        let norms: Vec<f64> = centered
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mut corr = DMatrix::identity(p, p);
        for a in 0..p {
            for b in a + 1..p {
                // Constant columns are treated as uncorrelated with everything.
                let r = if norms[a] < 1e-12 || norms[b] < 1e-12 {
                    0.0
                } else {
                    let dot: f64 = centered[a]
                        .iter()
                        .zip(&centered[b])
                        .map(|(x, y)| x * y)
                        .sum();
                    (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
                };
                corr[(a, b)] = r;
                corr[(b, a)] = r;
            }
        }
        Self { n, corr }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        self.corr.nrows()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.corr[(a, b)]
    }

    /// Partial correlation of `i` and `j` given `cond`; second value flags a
    /// pseudo-inverse fallback.
    pub fn partial_correlation(&self, i: usize, j: usize, cond: &[usize]) -> (f64, bool) {
        if cond.is_empty() {
            return (self.corr[(i, j)], false);
        }
        let idx: Vec<usize> = [i, j].iter().chain(cond).copied().collect();
        let k = idx.len();
        let sub = DMatrix::from_fn(k, k, |a, b| self.corr[(idx[a], idx[b])]);
        let (prec, pinv) = match sub.clone().cholesky() {
            Some(ch) => {
                let inv = ch.inverse();
                // Near-singular systems still invert; treat them as singular.
                let min_diag = (0..k).map(|a| ch.l()[(a, a)]).fold(f64::INFINITY, f64::min);
                if min_diag < 1e-7 {
                    (pseudo_inverse(sub), true)
                } else {
                    (inv, false)
                }
            }
            None => (pseudo_inverse(sub), true),
        };
        let denom = (prec[(0, 0)] * prec[(1, 1)]).sqrt();
        let r = if denom > 0.0 && denom.is_finite() {
            (-prec[(0, 1)] / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        (r, pinv)
    }

    pub fn ci_test(&self, i: usize, j: usize, cond: &[usize], alpha: f64) -> Result<CiResult> {
        if i == j || cond.contains(&i) || cond.contains(&j) {
            return Err(Error::InvalidConfig(
                "CI test needs distinct variables outside the conditioning set".into(),
            ));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha {alpha} outside (0, 1)"
            )));
        }
        if self.n < cond.len() + 4 {
            return Err(Error::TooFewSamples(format!(
                "Fisher z with |cond| = {} needs n >= {}, got {}",
                cond.len(),
                cond.len() + 4,
                self.n
            )));
        }
        let (r, pseudo_inverse) = self.partial_correlation(i, j, cond);
        let scale = ((self.n - cond.len() - 3) as f64).sqrt();
        let (statistic, p_value) = if r.abs() >= 1.0 - 1e-15 {
            (f64::INFINITY.copysign(r), 0.0)
        } else {
            let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln() * scale;
            (z, erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
        };
        Ok(CiResult {
            statistic,
            p_value,
            independent: p_value > alpha,
            pseudo_inverse,
        })
    }
}

fn pseudo_inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    let k = m.nrows();
    m.pseudo_inverse(1e-10)
        .unwrap_or_else(|_| DMatrix::identity(k, k))
}

/// Fisher-z test of `i ⟂ j | cond` on node indices (label = `data.d()`).
pub fn fisher_z_ci_test(
    data: &Dataset,
    i: usize,
    j: usize,
    cond: &[usize],
    alpha: f64,
) -> Result<CiResult> {
    let p = data.d() + 1;
    if i >= p || j >= p || cond.iter().any(|&c| c >= p) {
        return Err(Error::InvalidConfig("node index out of range".into()));
    }
    CorrelationMatrix::from_dataset(data).ci_test(i, j, cond, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_copy_is_dependent() {
        let x: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let c = CorrelationMatrix::from_columns(&[x.clone(), x]);
        let r = c.ci_test(0, 1, &[], 0.05).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(!r.independent);
    }

    #[test]
    fn rejects_tiny_samples() {
        let c = CorrelationMatrix::from_columns(&[
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 1.0, 4.0, 3.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ]);
        assert!(c.ci_test(0, 1, &[], 0.05).is_ok());
        assert!(matches!(
            c.ci_test(0, 1, &[2], 0.05),
            Err(Error::TooFewSamples(_))
        ));
    }

    #[test]
    fn singular_conditioning_set_uses_pseudo_inverse() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos()).collect();
        let c = a.clone();
        let cm = CorrelationMatrix::from_columns(&[a, b, c.clone(), c]);
        let r = cm.ci_test(0, 1, &[2, 3], 0.05).unwrap();
        assert!(r.pseudo_inverse);
        assert!((0.0..=1.0).contains(&r.p_value));
    }
}
