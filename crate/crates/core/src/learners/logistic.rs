//! Penalized logistic regression on standardized features.
//!
//! Objective: `(1/n) sum logloss + R(w) / (C n)` with `R = |w|^2 / 2` (l2),
//! `|w|_1` (l1) or `r |w|_1 + (1 - r) |w|^2 / 2` (elastic net). With
//! `fit_intercept` a constant column equal to `intercept_scaling` is appended
//! and its weight is penalized like any other.

use nalgebra::{DMatrix, DVector};

use super::{sigmoid, LrParams, Penalty, Solver, TrainFlags};

pub(super) struct LinearFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub flags: TrainFlags,
}

struct Problem<'a> {
    x: &'a [f64],
    p: usize,
    y: &'a [u8],
    /// Value of the appended intercept column, if any.
    icol: Option<f64>,
    l1: f64,
    l2: f64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.p + self.icol.is_some() as usize
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn margin(&self, i: usize, w: &[f64]) -> f64 {
        let row = &self.x[i * self.p..(i + 1) * self.p];
        let mut m: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
        if let Some(c) = self.icol {
            m += c * w[self.p];
        }
        m
    }

    fn feature(&self, i: usize, j: usize) -> f64 {
        if j < self.p {
            self.x[i * self.p + j]
        } else {
            self.icol.unwrap_or(0.0)
        }
    }

    /// Smooth part: mean logloss plus the l2 term.
    fn smooth(&self, w: &[f64]) -> f64 {
        let n = self.n() as f64;
        let mut s = 0.0;
        for i in 0..self.n() {
            let m = self.margin(i, w);
            let softplus = if m > 0.0 {
                m + (-m).exp().ln_1p()
            } else {
                m.exp().ln_1p()
            };
            s += softplus - self.y[i] as f64 * m;
        }
        s / n + 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let n = self.n() as f64;
        let mut g = vec![0.0; k];
        for i in 0..self.n() {
            let r = sigmoid(self.margin(i, w)) - self.y[i] as f64;
            for (j, gj) in g.iter_mut().enumerate() {
                *gj += r * self.feature(i, j);
            }
        }
        for j in 0..k {
            g[j] = g[j] / n + self.l2 * w[j];
        }
        g
    }

    fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        let k = self.dim();
        let n = self.n() as f64;
        let mut h = DMatrix::zeros(k, k);
        let mut row = vec![0.0; k];
        for i in 0..self.n() {
            let s = sigmoid(self.margin(i, w));
            let wt = s * (1.0 - s);
            for (j, r) in row.iter_mut().enumerate() {
                *r = self.feature(i, j);
            }
            for a in 0..k {
                let ra = wt * row[a];
                for b in a..k {
                    h[(a, b)] += ra * row[b];
                }
            }
        }
        for a in 0..k {
            for b in a..k {
                let v = h[(a, b)] / n;
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
            h[(a, a)] += self.l2 + 1e-10;
        }
        h
    }

    fn objective(&self, w: &[f64]) -> f64 {
        self.smooth(w) + self.l1 * w.iter().map(|v| v.abs()).sum::<f64>()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn newton(pb: &Problem, params: &LrParams) -> (Vec<f64>, TrainFlags) {
    let k = pb.dim();
    let mut w = vec![0.0; k];
    let mut f = pb.smooth(&w);
    for it in 0..params.max_iter {
        let g = pb.gradient(&w);
        if max_abs(&g) <= params.tol {
            return (
                w,
                TrainFlags {
                    converged: true,
                    iterations: it,
                },
            );
        }
        let h = pb.hessian(&w);
        let gv = DVector::from_column_slice(&g);
        let step = match h.cholesky() {
            Some(ch) => ch.solve(&gv),
            None => gv.clone(),
        };
        let slope = -gv.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = w.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let fc = pb.smooth(&cand);
            if fc <= f + 1e-4 * t * slope {
                w = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No descent along the Newton direction within float precision.
            let converged = max_abs(&pb.gradient(&w)) <= params.tol;
            return (
                w,
                TrainFlags {
                    converged,
                    iterations: it + 1,
                },
            );
        }
    }
    let converged = max_abs(&pb.gradient(&w)) <= params.tol;
    (
        w,
        TrainFlags {
            converged,
            iterations: params.max_iter,
        },
    )
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Proximal gradient with a fixed step `1 / L`.
fn proximal_gradient(pb: &Problem, params: &LrParams) -> (Vec<f64>, TrainFlags) {
    let k = pb.dim();
    let n = pb.n() as f64;
    // Lipschitz bound of the smooth gradient: 0.25 * mean |x_i|^2 + l2.
    let mut sq = 0.0;
    for i in 0..pb.n() {
        for j in 0..k {
            sq += pb.feature(i, j).powi(2);
        }
    }
    let lip = 0.25 * sq / n + pb.l2;
    let t = 1.0 / lip.max(1e-12);
    let mut w = vec![0.0; k];
    let mut best = (pb.objective(&w), w.clone());
    for it in 0..params.max_iter {
        let g = pb.gradient(&w);
        let next: Vec<f64> = w
            .iter()
            .zip(&g)
            .map(|(wj, gj)| soft_threshold(wj - t * gj, t * pb.l1))
            .collect();
        let mapping = w
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / t));
        w = next;
        let obj = pb.objective(&w);
        if obj < best.0 {
            best = (obj, w.clone());
        }
        if mapping <= params.tol {
            return (
                best.1,
                TrainFlags {
                    converged: true,
                    iterations: it + 1,
                },
            );
        }
    }
    (
        best.1,
        TrainFlags {
            converged: false,
            iterations: params.max_iter,
        },
    )
}

pub(super) fn fit(x: &[f64], p: usize, y: &[u8], params: &LrParams) -> LinearFit {
    let n = y.len() as f64;
    let lambda = 1.0 / (params.c * n);
    let (l1, l2) = match params.penalty {
        Penalty::None => (0.0, 0.0),
        Penalty::L2 => (0.0, lambda),
        Penalty::L1 => (lambda, 0.0),
        Penalty::Elasticnet => (lambda * params.l1_ratio, lambda * (1.0 - params.l1_ratio)),
    };
    let pb = Problem {
        x,
        p,
        y,
        icol: params.fit_intercept.then_some(params.intercept_scaling),
        l1,
        l2,
    };
    let (w, flags) = if l1 == 0.0 && params.solver == Solver::Newton {
        newton(&pb, params)
    } else {
        proximal_gradient(&pb, params)
    };
    let intercept = pb.icol.map_or(0.0, |c| c * w[p]);
    LinearFit {
        weights: w[..p].to_vec(),
        intercept,
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<f64>, Vec<u8>) {
        // one feature, overlapping classes
        let x: Vec<f64> = (0..40).map(|i| (i as f64 - 20.0) / 10.0).collect();
        let y = x
            .iter()
            .enumerate()
            .map(|(i, v)| ((*v > 0.0) ^ (i % 5 == 0)) as u8)
            .collect();
        (x, y)
    }

    #[test]
    fn newton_and_gradient_agree() {
        let (x, y) = toy();
        let newton = fit(&x, 1, &y, &LrParams::default());
        let grad = fit(
            &x,
            1,
            &y,
            &LrParams {
                solver: Solver::Gradient,
                max_iter: 500,
                tol: 1e-6,
                ..LrParams::default()
            },
        );
        assert!(newton.flags.converged);
        assert!((newton.weights[0] - grad.weights[0]).abs() < 1e-2);
        assert!((newton.intercept - grad.intercept).abs() < 1e-2);
    }

    #[test]
    fn gradient_at_newton_optimum_is_small() {
        let (x, y) = toy();
        let params = LrParams::default();
        let f = fit(&x, 1, &y, &params);
        let pb = Problem {
            x: &x,
            p: 1,
            y: &y,
            icol: Some(1.0),
            l1: 0.0,
            l2: 1.0 / 40.0,
        };
        let g = pb.gradient(&[f.weights[0], f.intercept]);
        assert!(max_abs(&g) <= params.tol * 10.0);
    }

    #[test]
    fn strong_l1_zeroes_weights() {
        let (x, y) = toy();
        let f = fit(
            &x,
            1,
            &y,
            &LrParams {
                penalty: Penalty::L1,
                c: 1e-4,
                ..LrParams::default()
            },
        );
        assert_eq!(f.weights[0], 0.0);
    }
}
