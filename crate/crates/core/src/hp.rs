//! Hyperparameter exploration driven by EOD, surrogate Shapley importance,
//! and the top-4 rank comparison between two importance vectors.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSplit;
use crate::error::{Error, Result};
use crate::fairness::{bias_fn, PERF_TOLERANCE};
use crate::learners::{
    Criterion, DtParams, HpConfig, LearnerKind, LrParams, ParamConfig, Penalty, PerfMetrics,
    Solver, SvmParams, C_RANGE, DEPTH_RANGE, INTERCEPT_SCALING_RANGE, MAX_ITER_RANGE,
    MIN_LEAF_RANGE, TOL_RANGE,
};
use crate::rng::{derive_path, rng_from};

/// Default evaluation budget.
pub const DEFAULT_BUDGET: usize = 500;
/// Mutants evaluated per generation.
const GENERATION: usize = 10;
/// Standard deviation of the log-multiplier applied to numeric values.
const MUTATION_SD: f64 = 0.5;
const SURROGATE_RIDGE: f64 = 1e-3;
/// Surrogates explaining less EOD variance than this are flagged.
pub const MIN_SURROGATE_R2: f64 = 0.1;
/// Lower clamp for `l1_ratio` so multiplicative mutation cannot get stuck at 0.
const L1_RATIO_RANGE: (f64, f64) = (0.01, 1.0);

/// Hyperparameter names per learner, in encoding order.
pub fn hp_names(kind: LearnerKind) -> &'static [&'static str] {
    match kind {
        LearnerKind::LogisticRegression => &[
            "penalty",
            "C",
            "tol",
            "fit_intercept",
            "intercept_scaling",
            "max_iter",
            "l1_ratio",
            "solver",
        ],
        LearnerKind::DecisionTree => &["max_depth", "min_samples_leaf", "criterion"],
        LearnerKind::LinearSvm => &["C", "max_iter", "tol"],
    }
}

const PENALTIES: [Penalty; 4] = [Penalty::None, Penalty::L2, Penalty::L1, Penalty::Elasticnet];

fn penalty_index(p: Penalty) -> usize {
    PENALTIES.iter().position(|&q| q == p).unwrap_or(0)
}

fn scale_f(v: f64, rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    let z: f64 = Normal::new(0.0, MUTATION_SD).expect("valid sd").sample(rng);
    (v * z.exp()).clamp(lo, hi)
}

fn scale_u(v: usize, rng: &mut impl Rng, (lo, hi): (usize, usize)) -> usize {
    let z: f64 = Normal::new(0.0, MUTATION_SD).expect("valid sd").sample(rng);
    ((v as f64 * z.exp()).round() as usize).clamp(lo, hi)
}

/// Changes one field of `cfg`, chosen with `field`. Numeric mutations can
/// land on the old value (rounding, clamping); the caller retries.
fn mutate_field(cfg: &HpConfig, field: usize, rng: &mut impl Rng) -> HpConfig {
    let mut out = *cfg;
    match &mut out {
        HpConfig::LogisticRegression(p) => match field {
            0 => {
                let others: Vec<Penalty> = PENALTIES
                    .iter()
                    .copied()
                    .filter(|&q| q != p.penalty)
                    .collect();
                p.penalty = *others.choose(rng).expect("non-empty");
            }
            1 => p.c = scale_f(p.c, rng, C_RANGE),
            2 => p.tol = scale_f(p.tol, rng, TOL_RANGE),
            3 => p.fit_intercept = !p.fit_intercept,
            4 => p.intercept_scaling = scale_f(p.intercept_scaling, rng, INTERCEPT_SCALING_RANGE),
            5 => p.max_iter = scale_u(p.max_iter, rng, MAX_ITER_RANGE),
            6 => p.l1_ratio = scale_f(p.l1_ratio.max(L1_RATIO_RANGE.0), rng, L1_RATIO_RANGE),
            _ => {
                p.solver = match p.solver {
                    Solver::Gradient => Solver::Newton,
                    Solver::Newton => Solver::Gradient,
                }
            }
        },
        HpConfig::DecisionTree(p) => match field {
            0 => p.max_depth = scale_u(p.max_depth, rng, DEPTH_RANGE),
            1 => p.min_samples_leaf = scale_u(p.min_samples_leaf, rng, MIN_LEAF_RANGE),
            _ => {
                p.criterion = match p.criterion {
                    Criterion::Gini => Criterion::Entropy,
                    Criterion::Entropy => Criterion::Gini,
                }
            }
        },
        HpConfig::LinearSvm(p) => match field {
            0 => p.c = scale_f(p.c, rng, C_RANGE),
            1 => p.max_iter = scale_u(p.max_iter, rng, MAX_ITER_RANGE),
            _ => p.tol = scale_f(p.tol, rng, TOL_RANGE),
        },
    }
    out
}

/// Changes exactly one hyperparameter: categorical values are resampled
/// among the other values, numeric ones multiplied by `exp(N(0, 0.5))` and
/// clamped to their range.
pub fn mutate(cfg: &HpConfig, seed: u64) -> HpConfig {
    let mut rng = rng_from(seed);
    let n = hp_names(cfg.kind()).len();
    let field = rng.random_range(0..n);
    for _ in 0..64 {
        let out = mutate_field(cfg, field, &mut rng);
        if out != *cfg {
            return out;
        }
    }
    // Pinned at a bound by repeated clamping: step one unit inward.
    let mut out = *cfg;
    match &mut out {
        HpConfig::LogisticRegression(p) => match field {
            1 => {
                p.c = if p.c >= C_RANGE.1 {
                    p.c / 2.0
                } else {
                    p.c * 2.0
                }
            }
            2 => {
                p.tol = if p.tol >= TOL_RANGE.1 {
                    p.tol / 2.0
                } else {
                    p.tol * 2.0
                }
            }
            4 => {
                p.intercept_scaling = if p.intercept_scaling >= INTERCEPT_SCALING_RANGE.1 {
                    p.intercept_scaling / 2.0
                } else {
                    p.intercept_scaling * 2.0
                }
            }
            5 => {
                p.max_iter = if p.max_iter >= MAX_ITER_RANGE.1 {
                    p.max_iter - 1
                } else {
                    p.max_iter + 1
                }
            }
            6 => {
                p.l1_ratio = if p.l1_ratio >= 1.0 {
                    0.5
                } else {
                    (p.l1_ratio * 2.0).min(1.0)
                }
            }
            _ => {}
        },
        HpConfig::DecisionTree(p) => match field {
            0 => {
                p.max_depth = if p.max_depth >= DEPTH_RANGE.1 {
                    p.max_depth - 1
                } else {
                    p.max_depth + 1
                }
            }
            1 => {
                p.min_samples_leaf = if p.min_samples_leaf >= MIN_LEAF_RANGE.1 {
                    p.min_samples_leaf - 1
                } else {
                    p.min_samples_leaf + 1
                }
            }
            _ => {}
        },
        HpConfig::LinearSvm(p) => match field {
            0 => {
                p.c = if p.c >= C_RANGE.1 {
                    p.c / 2.0
                } else {
                    p.c * 2.0
                }
            }
            1 => {
                p.max_iter = if p.max_iter >= MAX_ITER_RANGE.1 {
                    p.max_iter - 1
                } else {
                    p.max_iter + 1
                }
            }
            _ => {
                p.tol = if p.tol >= TOL_RANGE.1 {
                    p.tol / 2.0
                } else {
                    p.tol * 2.0
                }
            }
        },
    }
    out
}

fn log_uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn log_uniform_u(rng: &mut impl Rng, (lo, hi): (usize, usize)) -> usize {
    (log_uniform(rng, (lo as f64, hi as f64)).round() as usize).clamp(lo, hi)
}

/// Uniform categorical values, log-uniform numeric values.
pub fn random_config(kind: LearnerKind, seed: u64) -> HpConfig {
    let mut rng = rng_from(seed);
    match kind {
        LearnerKind::LogisticRegression => HpConfig::LogisticRegression(LrParams {
            penalty: PENALTIES[rng.random_range(0..PENALTIES.len())],
            c: log_uniform(&mut rng, C_RANGE),
            tol: log_uniform(&mut rng, TOL_RANGE),
            fit_intercept: rng.random_bool(0.5),
            intercept_scaling: log_uniform(&mut rng, INTERCEPT_SCALING_RANGE),
            max_iter: log_uniform_u(&mut rng, MAX_ITER_RANGE),
            l1_ratio: rng.random_range(L1_RATIO_RANGE.0..=L1_RATIO_RANGE.1),
            solver: if rng.random_bool(0.5) {
                Solver::Newton
            } else {
                Solver::Gradient
            },
        }),
        LearnerKind::DecisionTree => HpConfig::DecisionTree(DtParams {
            max_depth: rng.random_range(DEPTH_RANGE.0..=DEPTH_RANGE.1),
            min_samples_leaf: log_uniform_u(&mut rng, MIN_LEAF_RANGE),
            criterion: if rng.random_bool(0.5) {
                Criterion::Gini
            } else {
                Criterion::Entropy
            },
        }),
        LearnerKind::LinearSvm => HpConfig::LinearSvm(SvmParams {
            c: log_uniform(&mut rng, C_RANGE),
            max_iter: log_uniform_u(&mut rng, MAX_ITER_RANGE),
            tol: log_uniform(&mut rng, TOL_RANGE),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpSample {
    pub config: HpConfig,
    pub eod: f64,
    pub perf: PerfMetrics,
    /// Lowered the best EOD within the performance tolerance.
    pub admitted: bool,
}

/// Evaluates `budget` configurations. The default configuration comes first;
/// every later one mutates a random parent. A mutant is admitted when it
/// lowers the best EOD seen so far while keeping accuracy and F1 within the
/// tolerance of the default; the mutants admitted in a generation become the
/// parents of the next one (parents carry over when none is admitted).
/// Configurations whose
/// evaluation fails are skipped and do not count toward the budget.
pub fn evolve_with<F>(kind: LearnerKind, budget: usize, seed: u64, eval: F) -> Result<Vec<HpSample>>
where
    F: Fn(&HpConfig) -> Result<(f64, PerfMetrics)> + Sync,
{
    if budget < 10 {
        return Err(Error::InvalidConfig(format!("budget {budget} below 10")));
    }
    let default = HpConfig::default_for(kind);
    let (eod0, perf0) = eval(&default)?;
    let mut samples = vec![HpSample {
        config: default,
        eod: eod0,
        perf: perf0,
        admitted: true,
    }];
    // Parents of the next generation: the mutants admitted most recently.
    let mut frontier = vec![default];
    let mut best = eod0;
    let mut gen = 0u64;
    let max_attempts = 4 * budget;
    let mut attempts = 1;
    while samples.len() < budget && attempts < max_attempts {
        let want = GENERATION.min(budget - samples.len());
        let mut rng = rng_from(derive_path(seed, &[gen, 0]));
        let children: Vec<HpConfig> = (0..want)
            .map(|i| {
                let parent = frontier[rng.random_range(0..frontier.len())];
                mutate(&parent, derive_path(seed, &[gen, 1, i as u64]))
            })
            .collect();
        let results: Vec<Result<(f64, PerfMetrics)>> = children.par_iter().map(&eval).collect();
        let mut admitted_now = Vec::new();
        for (cfg, r) in children.into_iter().zip(results) {
            attempts += 1;
            let Ok((eod, perf)) = r else { continue };
            let admitted = eod < best && perf.within_tolerance_of(&perf0, PERF_TOLERANCE);
            if admitted {
                best = eod;
                admitted_now.push(cfg);
            }
            samples.push(HpSample {
                config: cfg,
                eod,
                perf,
                admitted,
            });
        }
        if !admitted_now.is_empty() {
            frontier = admitted_now;
        }
        gen += 1;
    }
    Ok(samples)
}

/// [`evolve_with`] scored by the bias function on `split`.
pub fn evolve(
    split: &DataSplit,
    kind: LearnerKind,
    budget: usize,
    seed: u64,
) -> Result<Vec<HpSample>> {
    let features = split.train.schema().feature_names();
    evolve_with(kind, budget, seed, |hp| {
        let cfg = ParamConfig {
            hp: *hp,
            features: features.clone(),
        };
        let b = bias_fn(split, &cfg, seed)?;
        Ok((b.eod(), b.perf))
    })
}

/// Numeric encoding of each hyperparameter: one-hot for the penalty, 0/1 for
/// binary choices, log10 for scale-like values, raw `l1_ratio` and depth.
pub fn encode(cfg: &HpConfig) -> Vec<Vec<f64>> {
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    match cfg {
        HpConfig::LogisticRegression(p) => {
            let mut onehot = vec![0.0; PENALTIES.len()];
            onehot[penalty_index(p.penalty)] = 1.0;
            vec![
                onehot,
                vec![p.c.log10()],
                vec![p.tol.log10()],
                vec![b(p.fit_intercept)],
                vec![p.intercept_scaling.log10()],
                vec![(p.max_iter as f64).log10()],
                vec![p.l1_ratio],
                vec![b(p.solver == Solver::Newton)],
            ]
        }
        HpConfig::DecisionTree(p) => vec![
            vec![p.max_depth as f64],
            vec![(p.min_samples_leaf as f64).log10()],
            vec![b(p.criterion == Criterion::Entropy)],
        ],
        HpConfig::LinearSvm(p) => vec![
            vec![p.c.log10()],
            vec![(p.max_iter as f64).log10()],
            vec![p.tol.log10()],
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceVector {
    pub names: Vec<String>,
    /// Mean absolute Shapley value per hyperparameter.
    pub importance: Vec<f64>,
    /// Names by importance, descending; ties by name.
    pub ranking: Vec<String>,
    pub surrogate_r2: f64,
    pub low_r2: bool,
}

impl ImportanceVector {
    pub fn new(names: Vec<String>, importance: Vec<f64>, surrogate_r2: f64) -> Self {
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| {
            importance[b]
                .abs()
                .total_cmp(&importance[a].abs())
                .then_with(|| names[a].cmp(&names[b]))
        });
        Self {
            ranking: order.iter().map(|&i| names[i].clone()).collect(),
            names,
            importance,
            surrogate_r2,
            low_r2: surrogate_r2 < MIN_SURROGATE_R2,
        }
    }

    /// A vector whose ranking is `ranked`, best first.
    pub fn from_ranking<S: AsRef<str>>(ranked: &[S]) -> Self {
        let n = ranked.len();
        let names = ranked.iter().map(|s| s.as_ref().to_string()).collect();
        let importance = (0..n).map(|i| (n - i) as f64).collect();
        Self::new(names, importance, 1.0)
    }

    pub fn top(&self, k: usize) -> &[String] {
        &self.ranking[..k.min(self.ranking.len())]
    }
}

/// Ridge fit on centered columns; the intercept is not penalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub r2: f64,
}

impl Surrogate {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>()
    }
}

pub fn fit_surrogate(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Surrogate {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mean_x: Vec<f64> = (0..p)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let xc = DMatrix::from_fn(n, p, |i, j| x[i][j] - mean_x[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - mean_y));
    let a = xc.transpose() * &xc + DMatrix::identity(p, p) * lambda;
    let rhs = xc.transpose() * yc;
    let w = a
        .cholesky()
        .map(|c| c.solve(&rhs))
        .unwrap_or_else(|| DVector::zeros(p));
    let weights: Vec<f64> = w.iter().copied().collect();
    let intercept = mean_y - mean_x.iter().zip(&weights).map(|(m, w)| m * w).sum::<f64>();
    let mut s = Surrogate {
        weights,
        intercept,
        r2: 1.0,
    };
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if ss_tot > 1e-20 * n as f64 {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(r, v)| (v - s.predict(r)).powi(2))
            .sum();
        s.r2 = 1.0 - ss_res / ss_tot;
    }
    s
}

/// Exact Shapley values of every sample under a linear surrogate, one
/// player per column group. The value of a coalition is the surrogate
/// averaged over the sample set with absent groups taken from each
/// background sample; for a linear surrogate that average is the prediction
/// with absent groups at their column means.
pub fn shapley_values(groups: &[Vec<Vec<f64>>], s: &Surrogate) -> Vec<Vec<f64>> {
    let n_players = groups.first().map_or(0, Vec::len);
    let n = groups.len();
    // contribution of each player per sample, and its background mean
    let contrib: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let mut col = 0;
            g.iter()
                .map(|vals| {
                    let c: f64 = vals.iter().zip(&s.weights[col..]).map(|(v, w)| v * w).sum();
                    col += vals.len();
                    c
                })
                .collect()
        })
        .collect();
    let mean: Vec<f64> = (0..n_players)
        .map(|j| contrib.iter().map(|c| c[j]).sum::<f64>() / n as f64)
        .collect();
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let nf = fact(n_players);
    let weight: Vec<f64> = (0..n_players)
        .map(|k| fact(k) * fact(n_players.saturating_sub(k + 1)) / nf)
        .collect();
    contrib
        .par_iter()
        .map(|c| {
            let value = |mask: usize| -> f64 {
                s.intercept
                    + (0..n_players)
                        .map(|j| if mask >> j & 1 == 1 { c[j] } else { mean[j] })
                        .sum::<f64>()
            };
            (0..n_players)
                .map(|j| {
                    let bit = 1usize << j;
                    (0..1usize << n_players)
                        .filter(|m| m & bit == 0)
                        .map(|m| weight[m.count_ones() as usize] * (value(m | bit) - value(m)))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Mean absolute Shapley value per hyperparameter, from a ridge surrogate
/// fit to the samples' EOD.
pub fn shapley_importance(samples: &[HpSample]) -> Result<ImportanceVector> {
    if samples.len() < 50 {
        return Err(Error::TooFewSamples(format!(
            "{} hyperparameter samples, need 50",
            samples.len()
        )));
    }
    let kind = samples[0].config.kind();
    if samples.iter().any(|s| s.config.kind() != kind) {
        return Err(Error::InvalidConfig("samples mix learner kinds".into()));
    }
    let groups: Vec<Vec<Vec<f64>>> = samples.iter().map(|s| encode(&s.config)).collect();
    let eod: Vec<f64> = samples.iter().map(|s| s.eod).collect();
    let names = hp_names(kind).iter().map(|s| s.to_string()).collect();
    Ok(importance_from_groups(names, &groups, &eod))
}

/// Importance for arbitrary column groups.
pub fn importance_from_groups(
    names: Vec<String>,
    groups: &[Vec<Vec<f64>>],
    y: &[f64],
) -> ImportanceVector {
    let flat: Vec<Vec<f64>> = groups.iter().map(|g| g.concat()).collect();
    let s = fit_surrogate(&flat, y, SURROGATE_RIDGE);
    let phi = shapley_values(groups, &s);
    let n = phi.len() as f64;
    let importance = (0..names.len())
        .map(|j| phi.iter().map(|p| p[j].abs()).sum::<f64>() / n)
        .collect();
    ImportanceVector::new(names, importance, s.r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Top4Check {
    /// At least two of one top-4 are missing from the other.
    pub membership_changed: bool,
    /// Two members shared by both top-4 lists appear in opposite order.
    pub order_changed: bool,
    pub violated: bool,
}

pub fn top4_rank_check(a: &ImportanceVector, b: &ImportanceVector) -> Top4Check {
    let (ta, tb) = (a.top(4), b.top(4));
    let missing_ab = ta.iter().filter(|x| !tb.contains(x)).count();
    let missing_ba = tb.iter().filter(|x| !ta.contains(x)).count();
    let membership_changed = missing_ab >= 2 || missing_ba >= 2;
    let shared: Vec<&String> = ta.iter().filter(|x| tb.contains(x)).collect();
    let pos = |t: &[String], x: &String| t.iter().position(|y| y == x).expect("shared");
    let mut order_changed = false;
    for i in 0..shared.len() {
        for j in i + 1..shared.len() {
            let da = pos(ta, shared[i]) < pos(ta, shared[j]);
            let db = pos(tb, shared[i]) < pos(tb, shared[j]);
            order_changed |= da != db;
        }
    }
    Top4Check {
        membership_changed,
        order_changed,
        violated: membership_changed || order_changed,
    }
}

pub fn top4_rank_violation(a: &ImportanceVector, b: &ImportanceVector) -> bool {
    top4_rank_check(a, b).violated
}

fn config_fields(cfg: &HpConfig) -> Vec<String> {
    let f = |v: f64| format!("{v}");
    match cfg {
        HpConfig::LogisticRegression(p) => vec![
            format!("{:?}", p.penalty).to_lowercase(),
            f(p.c),
            f(p.tol),
            p.fit_intercept.to_string(),
            f(p.intercept_scaling),
            p.max_iter.to_string(),
            f(p.l1_ratio),
            format!("{:?}", p.solver).to_lowercase(),
        ],
        HpConfig::DecisionTree(p) => vec![
            p.max_depth.to_string(),
            p.min_samples_leaf.to_string(),
            format!("{:?}", p.criterion).to_lowercase(),
        ],
        HpConfig::LinearSvm(p) => vec![f(p.c), p.max_iter.to_string(), f(p.tol)],
    }
}

/// One row per sample: hyperparameter columns, EOD, performance, admission.
pub fn write_samples_csv<W: Write>(w: W, samples: &[HpSample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if let Some(first) = samples.first() {
        let mut header: Vec<&str> = hp_names(first.config.kind()).to_vec();
        header.extend(["eod", "accuracy", "precision", "recall", "f1", "admitted"]);
        out.write_record(&header)?;
    }
    for s in samples {
        let mut row = config_fields(&s.config);
        row.extend([
            s.eod.to_string(),
            s.perf.accuracy.to_string(),
            s.perf.precision.to_string(),
            s.perf.recall.to_string(),
            s.perf.f1.to_string(),
            s.admitted.to_string(),
        ]);
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<hp samples>", e))?;
    Ok(())
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[HpSample]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_samples_csv(f, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lr(c: f64) -> HpConfig {
        HpConfig::LogisticRegression(LrParams {
            c,
            ..LrParams::default()
        })
    }

    fn differing_fields(a: &HpConfig, b: &HpConfig) -> usize {
        config_fields(a)
            .iter()
            .zip(config_fields(b))
            .filter(|(x, y)| **x != *y)
            .count()
    }

    #[test]
    fn mutation_changes_one_field() {
        for kind in [
            LearnerKind::LogisticRegression,
            LearnerKind::DecisionTree,
            LearnerKind::LinearSvm,
        ] {
            let mut cfg = HpConfig::default_for(kind);
            for s in 0..300 {
                let m = mutate(&cfg, s);
                assert_eq!(differing_fields(&cfg, &m), 1, "{cfg:?} -> {m:?}");
                m.validate().unwrap();
                assert_eq!(m, mutate(&cfg, s));
                cfg = m;
            }
        }
    }

    #[test]
    fn pinned_values_still_move() {
        let cfg = lr(C_RANGE.1);
        for s in 0..50 {
            let m = mutate(&cfg, s);
            assert_ne!(m, cfg);
            m.validate().unwrap();
        }
    }

    #[test]
    fn evolve_budget_and_frontier() {
        let eval = |hp: &HpConfig| {
            let HpConfig::LogisticRegression(p) = hp else {
                unreachable!()
            };
            let perf = PerfMetrics::from_predictions(&[1, 0], &[1, 0]);
            Ok(((p.c.log10() - 2.0).abs() / 8.0, perf))
        };
        let a = evolve_with(LearnerKind::LogisticRegression, 60, 3, eval).unwrap();
        assert_eq!(a.len(), 60);
        let b = evolve_with(LearnerKind::LogisticRegression, 60, 3, eval).unwrap();
        assert_eq!(a, b);
        let mut best = f64::INFINITY;
        for s in a.iter().filter(|s| s.admitted) {
            assert!(s.eod < best);
            best = s.eod;
        }
        assert!(evolve_with(LearnerKind::LogisticRegression, 9, 3, eval).is_err());
    }

    #[test]
    fn constant_target_gives_zero_importance() {
        let samples: Vec<HpSample> = (0..60)
            .map(|i| HpSample {
                config: random_config(LearnerKind::LogisticRegression, i),
                eod: 0.3,
                perf: PerfMetrics::from_predictions(&[1], &[1]),
                admitted: false,
            })
            .collect();
        let imp = shapley_importance(&samples).unwrap();
        assert!(imp.importance.iter().all(|&v| v.abs() < 1e-12));
        assert!(!imp.low_r2);
    }

    #[test]
    fn efficiency_holds() {
        let groups: Vec<Vec<Vec<f64>>> = (0..40)
            .map(|i| {
                let t = i as f64;
                vec![vec![t.sin(), t.cos()], vec![(t * 0.3).sin()], vec![t % 3.0]]
            })
            .collect();
        let y: Vec<f64> = groups
            .iter()
            .map(|g| 0.5 * g[0][0] - g[0][1] + 2.0 * g[1][0] + 0.1 * g[2][0])
            .collect();
        let flat: Vec<Vec<f64>> = groups.iter().map(|g| g.concat()).collect();
        let s = fit_surrogate(&flat, &y, SURROGATE_RIDGE);
        let preds: Vec<f64> = flat.iter().map(|r| s.predict(r)).collect();
        let grand = preds.iter().sum::<f64>() / preds.len() as f64;
        for (phi, p) in shapley_values(&groups, &s).iter().zip(&preds) {
            assert!((phi.iter().sum::<f64>() - (p - grand)).abs() < 1e-6);
        }
    }

    #[test]
    fn duplicated_columns_share_importance() {
        let groups: Vec<Vec<Vec<f64>>> = (0..60)
            .map(|i| {
                let t = (i as f64 * 0.7).sin();
                vec![vec![t], vec![t], vec![(i as f64 * 1.3).cos()]]
            })
            .collect();
        let y: Vec<f64> = groups.iter().map(|g| g[0][0] + 0.2 * g[2][0]).collect();
        let imp = importance_from_groups(vec!["a".into(), "b".into(), "c".into()], &groups, &y);
        assert!((imp.importance[0] - imp.importance[1]).abs() < 1e-9);
    }

    #[test]
    fn top4_rules() {
        let a = ImportanceVector::from_ranking(&["w", "x", "y", "z", "q"]);
        assert!(!top4_rank_violation(&a, &a));
        let b = ImportanceVector::from_ranking(&["w", "x", "q", "r", "y"]);
        let c = top4_rank_check(&a, &b);
        assert!(c.membership_changed && !c.order_changed);
        let d = ImportanceVector::from_ranking(&["x", "w", "y", "z"]);
        let c = top4_rank_check(&a, &d);
        assert!(!c.membership_changed && c.order_changed);
        let e = ImportanceVector::from_ranking(&["w", "x", "y", "q"]);
        assert!(!top4_rank_violation(&a, &e));
    }
}
