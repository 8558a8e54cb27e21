//! Logistic regression, CART decision trees and linear SVMs with an explicit
//! hyperparameter space.

mod logistic;
mod metrics;
mod svm;
mod tree;

use serde::{Deserialize, Serialize};

pub use metrics::{Confusion, PerfMetrics};
pub use tree::{Criterion, TreeNode};

use crate::data::{Dataset, Schema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    LogisticRegression,
    DecisionTree,
    LinearSvm,
}

impl LearnerKind {
    pub fn short_name(self) -> &'static str {
        match self {
            LearnerKind::LogisticRegression => "lr",
            LearnerKind::DecisionTree => "dt",
            LearnerKind::LinearSvm => "svm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "logistic_regression" => Some(LearnerKind::LogisticRegression),
            "dt" | "decision_tree" => Some(LearnerKind::DecisionTree),
            "svm" | "linear_svm" => Some(LearnerKind::LinearSvm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    None,
    L2,
    L1,
    Elasticnet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Gradient,
    Newton,
}

pub const C_RANGE: (f64, f64) = (1e-4, 1e4);
pub const TOL_RANGE: (f64, f64) = (1e-6, 1e-1);
pub const MAX_ITER_RANGE: (usize, usize) = (50, 500);
pub const INTERCEPT_SCALING_RANGE: (f64, f64) = (0.1, 10.0);
pub const DEPTH_RANGE: (usize, usize) = (1, 20);
pub const MIN_LEAF_RANGE: (usize, usize) = (1, 100);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub penalty: Penalty,
    #[serde(rename = "C")]
    pub c: f64,
    pub tol: f64,
    pub fit_intercept: bool,
    pub intercept_scaling: f64,
    pub max_iter: usize,
    /// Used only by the elastic-net penalty.
    pub l1_ratio: f64,
    pub solver: Solver,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            penalty: Penalty::L2,
            c: 1.0,
            tol: 1e-4,
            fit_intercept: true,
            intercept_scaling: 1.0,
            max_iter: 100,
            l1_ratio: 0.5,
            solver: Solver::Newton,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub criterion: Criterion,
}

impl Default for DtParams {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_samples_leaf: 1,
            criterion: Criterion::Gini,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 200,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HpConfig {
    LogisticRegression(LrParams),
    DecisionTree(DtParams),
    LinearSvm(SvmParams),
}

fn in_range<T: PartialOrd + std::fmt::Debug>(name: &str, v: T, (lo, hi): (T, T)) -> Result<()> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameters(format!(
            "{name} = {v:?} outside [{lo:?}, {hi:?}]"
        )))
    }
}

impl HpConfig {
    pub fn default_for(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::LogisticRegression => HpConfig::LogisticRegression(LrParams::default()),
            LearnerKind::DecisionTree => HpConfig::DecisionTree(DtParams::default()),
            LearnerKind::LinearSvm => HpConfig::LinearSvm(SvmParams::default()),
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            HpConfig::LogisticRegression(_) => LearnerKind::LogisticRegression,
            HpConfig::DecisionTree(_) => LearnerKind::DecisionTree,
            HpConfig::LinearSvm(_) => LearnerKind::LinearSvm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HpConfig::LogisticRegression(p) => {
                in_range("C", p.c, C_RANGE)?;
                in_range("tol", p.tol, TOL_RANGE)?;
                in_range(
                    "intercept_scaling",
                    p.intercept_scaling,
                    INTERCEPT_SCALING_RANGE,
                )?;
                in_range("max_iter", p.max_iter, MAX_ITER_RANGE)?;
                in_range("l1_ratio", p.l1_ratio, (0.0, 1.0))
            }
            HpConfig::DecisionTree(p) => {
                in_range("max_depth", p.max_depth, DEPTH_RANGE)?;
                in_range("min_samples_leaf", p.min_samples_leaf, MIN_LEAF_RANGE)
            }
            HpConfig::LinearSvm(p) => {
                in_range("C", p.c, C_RANGE)?;
                in_range("tol", p.tol, TOL_RANGE)?;
                in_range("max_iter", p.max_iter, MAX_ITER_RANGE)
            }
        }
    }
}

/// Hyperparameters plus the feature subset the model is trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamConfig {
    pub hp: HpConfig,
    pub features: Vec<String>,
}

impl ParamConfig {
    /// Default hyperparameters on every feature.
    pub fn default_for(kind: LearnerKind, schema: &Schema) -> Self {
        Self {
            hp: HpConfig::default_for(kind),
            features: schema.feature_names(),
        }
    }

    pub fn with_features(&self, features: Vec<String>) -> Self {
        Self {
            hp: self.hp,
            features,
        }
    }
}

/// Column-wise standardization fitted on the training rows; constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl ColumnScaler {
    fn fit(x: &[f64], p: usize) -> Self {
        let n = (x.len() / p.max(1)).max(1) as f64;
        let mut mean = vec![0.0; p];
        for row in x.chunks(p.max(1)) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for row in x.chunks(p.max(1)) {
            for j in 0..p {
                var[j] += (row[j] - mean[j]).powi(2);
            }
        }
        let sd = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s < 1e-12 {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        Self { mean, sd }
    }

    fn apply(&self, x: &mut [f64]) {
        let p = self.mean.len();
        for row in x.chunks_mut(p.max(1)) {
            for j in 0..p {
                row[j] = if self.sd[j] == 0.0 {
                    0.0
                } else {
                    (row[j] - self.mean[j]) / self.sd[j]
                };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "link", rename_all = "snake_case")]
pub enum ScoreLink {
    Logistic,
    /// `sigmoid(a * margin + b)`.
    Platt {
        a: f64,
        b: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Linear {
        scaler: ColumnScaler,
        /// Weights on standardized features.
        weights: Vec<f64>,
        intercept: f64,
        link: ScoreLink,
    },
    Tree {
        nodes: Vec<TreeNode>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainFlags {
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: LearnerKind,
    pub features: Vec<String>,
    pub params: ModelParams,
    pub threshold: f64,
    pub flags: TrainFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<u8>,
    pub scores: Vec<f64>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn feature_indices(schema: &Schema, features: &[String]) -> Result<Vec<usize>> {
    features
        .iter()
        .map(|f| {
            schema
                .feature_index(f)
                .ok_or_else(|| Error::FeatureMismatch(format!("feature `{f}` not in dataset")))
        })
        .collect()
}

/// Row-major matrix of the selected columns.
fn gather(data: &Dataset, idx: &[usize]) -> Vec<f64> {
    let mut x = Vec::with_capacity(data.n() * idx.len());
    for row in data.rows() {
        x.extend(idx.iter().map(|&j| row[j]));
    }
    x
}

/// Trains `cfg` on `data`. All three trainers are deterministic; `seed` is
/// accepted so randomized trainers can share the signature.
pub fn train(cfg: &ParamConfig, data: &Dataset, _seed: u64) -> Result<TrainedModel> {
    cfg.hp.validate()?;
    if cfg.features.is_empty() {
        return Err(Error::InvalidHyperparameters("empty feature subset".into()));
    }
    if !data.has_both_labels() {
        return Err(Error::SingleClass);
    }
    let idx = feature_indices(data.schema(), &cfg.features)?;
    let p = idx.len();
    let mut x = gather(data, &idx);
    let y = data.labels();
    let (params, flags) = match cfg.hp {
        HpConfig::LogisticRegression(lr) => {
            let scaler = ColumnScaler::fit(&x, p);
            scaler.apply(&mut x);
            let fit = logistic::fit(&x, p, y, &lr);
            (
                ModelParams::Linear {
                    scaler,
                    weights: fit.weights,
                    intercept: fit.intercept,
                    link: ScoreLink::Logistic,
                },
                fit.flags,
            )
        }
        HpConfig::LinearSvm(sp) => {
            let scaler = ColumnScaler::fit(&x, p);
            scaler.apply(&mut x);
            let fit = svm::fit(&x, p, y, &sp);
            (
                ModelParams::Linear {
                    scaler,
                    weights: fit.weights,
                    intercept: fit.intercept,
                    link: ScoreLink::Platt {
                        a: fit.platt.0,
                        b: fit.platt.1,
                    },
                },
                fit.flags,
            )
        }
        HpConfig::DecisionTree(dp) => {
            let nodes = tree::fit(&x, p, y, &dp);
            (
                ModelParams::Tree { nodes },
                TrainFlags {
                    converged: true,
                    iterations: 0,
                },
            )
        }
    };
    Ok(TrainedModel {
        kind: cfg.hp.kind(),
        features: cfg.features.clone(),
        params,
        threshold: 0.5,
        flags,
    })
}

impl TrainedModel {
    pub fn score_row(&self, x: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Linear {
                scaler,
                weights,
                intercept,
                link,
            } => {
                let mut m = *intercept;
                for j in 0..weights.len() {
                    if scaler.sd[j] != 0.0 {
                        m += weights[j] * (x[j] - scaler.mean[j]) / scaler.sd[j];
                    }
                }
                match link {
                    ScoreLink::Logistic => sigmoid(m),
                    ScoreLink::Platt { a, b } => sigmoid(a * m + b),
                }
            }
            ModelParams::Tree { nodes } => tree::score(nodes, x),
        }
    }

    /// Scores in [0, 1] for every row of `data`.
    pub fn scores(&self, data: &Dataset) -> Result<Vec<f64>> {
        let idx = feature_indices(data.schema(), &self.features)?;
        let mut buf = vec![0.0; idx.len()];
        Ok(data
            .rows()
            .map(|row| {
                for (b, &j) in buf.iter_mut().zip(&idx) {
                    *b = row[j];
                }
                self.score_row(&buf)
            })
            .collect())
    }

    /// Label 1 iff score >= threshold.
    pub fn predict(&self, data: &Dataset) -> Result<Predictions> {
        let scores = self.scores(data)?;
        let labels = scores
            .iter()
            .map(|&s| (s >= self.threshold) as u8)
            .collect();
        Ok(Predictions { labels, scores })
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<PerfMetrics> {
        if test.is_empty() {
            return Err(Error::TooFewSamples("empty test set".into()));
        }
        let pred = self.predict(test)?;
        Ok(PerfMetrics::from_predictions(test.labels(), &pred.labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureKind, FeatureSpec};
    use crate::rng::rng_from;
    use rand::Rng;
    use std::sync::Arc;

    fn schema(names: &[&str]) -> Arc<Schema> {
        let mut f: Vec<FeatureSpec> = names
            .iter()
            .map(|n| FeatureSpec::new(*n, FeatureKind::Continuous))
            .collect();
        f.push(FeatureSpec::new("s", FeatureKind::Boolean));
        Arc::new(Schema::new(f, "s", "y").unwrap())
    }

    fn separable() -> Dataset {
        let mut rng = rng_from(1);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let a: f64 = rng.random_range(-3.0..3.0);
            let b: f64 = rng.random_range(-3.0..3.0);
            if (a + b).abs() < 0.3 {
                continue;
            }
            rows.push(vec![a, b, (i % 2) as f64]);
            labels.push((a + b > 0.0) as u8);
        }
        Dataset::new(schema(&["a", "b"]), rows, labels).unwrap()
    }

    fn cfg(hp: HpConfig) -> ParamConfig {
        ParamConfig {
            hp,
            features: vec!["a".into(), "b".into()],
        }
    }

    #[test]
    fn every_learner_fits_separable_data() {
        let d = separable();
        for kind in [
            LearnerKind::LogisticRegression,
            LearnerKind::DecisionTree,
            LearnerKind::LinearSvm,
        ] {
            let m = train(&cfg(HpConfig::default_for(kind)), &d, 0).unwrap();
            let perf = m.evaluate(&d).unwrap();
            let floor = if kind == LearnerKind::LogisticRegression {
                1.0
            } else {
                0.97
            };
            assert!(perf.accuracy >= floor, "{kind:?}: {perf:?}");
            let s = m.scores(&d).unwrap();
            assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn intercept_only_matches_base_rate() {
        let n = 1000;
        let rows = (0..n).map(|i| vec![1.0, (i % 2) as f64]).collect();
        let labels = (0..n).map(|i| (i % 10 < 7) as u8).collect();
        let d = Dataset::new(schema(&["c"]), rows, labels).unwrap();
        let m = train(
            &ParamConfig {
                hp: HpConfig::default_for(LearnerKind::LogisticRegression),
                features: vec!["c".into()],
            },
            &d,
            0,
        )
        .unwrap();
        let s = m.scores(&d).unwrap();
        assert!((s[0] - 0.7).abs() < 0.01, "{}", s[0]);
    }

    #[test]
    fn stump_cannot_fit_xor() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            rows.push(vec![a, b, (i % 3 == 0) as u8 as f64]);
            labels.push(((a + b) as u8) % 2);
        }
        let d = Dataset::new(schema(&["a", "b"]), rows, labels).unwrap();
        let hp = HpConfig::DecisionTree(DtParams {
            max_depth: 1,
            ..DtParams::default()
        });
        let m = train(&cfg(hp), &d, 0).unwrap();
        assert!((m.evaluate(&d).unwrap().accuracy - 0.5).abs() < 1e-12);
        let deep = train(
            &cfg(HpConfig::default_for(LearnerKind::DecisionTree)),
            &d,
            0,
        )
        .unwrap();
        assert_eq!(deep.evaluate(&d).unwrap().accuracy, 1.0);
    }

    #[test]
    fn single_class_and_unknown_feature_are_errors() {
        let d = separable();
        let ones = d.select_rows(
            &(0..d.n())
                .filter(|&i| d.labels()[i] == 1)
                .collect::<Vec<_>>(),
        );
        let c = cfg(HpConfig::default_for(LearnerKind::LogisticRegression));
        assert!(matches!(train(&c, &ones, 0), Err(Error::SingleClass)));
        let bad = c.with_features(vec!["nope".into()]);
        assert!(matches!(train(&bad, &d, 0), Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn threshold_tie_goes_to_favorable() {
        let d = separable();
        let mut m = train(
            &cfg(HpConfig::default_for(LearnerKind::LogisticRegression)),
            &d,
            0,
        )
        .unwrap();
        let s = m.scores(&d).unwrap();
        m.threshold = s[0];
        assert_eq!(m.predict(&d).unwrap().labels[0], 1);
    }

    #[test]
    fn out_of_range_hyperparameters_rejected() {
        let hp = HpConfig::LogisticRegression(LrParams {
            c: 0.0,
            ..LrParams::default()
        });
        assert!(matches!(
            train(&cfg(hp), &separable(), 0),
            Err(Error::InvalidHyperparameters(_))
        ));
    }
}
