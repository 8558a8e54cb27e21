//! Linear SVM by full-batch subgradient descent on
//! `(1/n) sum hinge + lambda |w|^2 / 2`, `lambda = 1 / (C n)`, with the
//! intercept unpenalized. Scores come from a logistic fit on the margin.

use super::logistic;
use super::{LrParams, Penalty, Solver, SvmParams, TrainFlags};

pub(super) struct SvmFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub platt: (f64, f64),
    pub flags: TrainFlags,
}

fn objective(x: &[f64], p: usize, ys: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let n = ys.len() as f64;
    let hinge: f64 = x
        .chunks(p)
        .zip(ys)
        .map(|(row, &y)| {
            let m: f64 = row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
            (1.0 - y * m).max(0.0)
        })
        .sum();
    hinge / n + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Iterations without meaningful improvement before stopping.
const PATIENCE: usize = 10;

pub(super) fn fit(x: &[f64], p: usize, y: &[u8], params: &SvmParams) -> SvmFit {
    let n = y.len();
    let nf = n as f64;
    let lambda = 1.0 / (params.c * nf);
    let ys: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut best = (objective(x, p, &ys, &w, b, lambda), w.clone(), b);
    let mut stale = 0;
    let mut flags = TrainFlags {
        converged: false,
        iterations: params.max_iter,
    };
    let mut gw = vec![0.0; p];
    for it in 1..=params.max_iter {
        gw.iter_mut().zip(&w).for_each(|(g, wj)| *g = lambda * wj);
        let mut gb = 0.0;
        for (row, &yi) in x.chunks(p).zip(&ys) {
            let m: f64 = row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b;
            if yi * m < 1.0 {
                for (g, a) in gw.iter_mut().zip(row) {
                    *g -= yi * a / nf;
                }
                gb -= yi / nf;
            }
        }
        let eta = 1.0 / (it as f64).sqrt();
        w.iter_mut().zip(&gw).for_each(|(wj, g)| *wj -= eta * g);
        b -= eta * gb;
        let obj = objective(x, p, &ys, &w, b, lambda);
        if obj < best.0 - params.tol * best.0.abs().max(1.0) {
            stale = 0;
        } else {
            stale += 1;
        }
        if obj < best.0 {
            best = (obj, w.clone(), b);
        }
        if stale >= PATIENCE {
            flags = TrainFlags {
                converged: true,
                iterations: it,
            };
            break;
        }
    }
    let (_, w, b) = best;
    let margins: Vec<f64> = x
        .chunks(p)
        .map(|row| row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b)
        .collect();
    let link = logistic::fit(
        &margins,
        1,
        y,
        &LrParams {
            penalty: Penalty::L2,
            c: 1.0,
            tol: 1e-6,
            fit_intercept: true,
            intercept_scaling: 1.0,
            max_iter: 100,
            l1_ratio: 0.0,
            solver: Solver::Newton,
        },
    );
    SvmFit {
        weights: w,
        intercept: b,
        platt: (link.weights[0], link.intercept),
        flags,
    }
}
