//! Equal opportunity difference and the bias function used by every audit.
//!
//! The privileged group is `sensitive = 1`.

use serde::{Deserialize, Serialize};

use crate::data::{DataSplit, Dataset};
use crate::error::{Error, Result};
use crate::learners::{train, HpConfig, ParamConfig, PerfMetrics, TrainedModel};

/// Accuracy/F1 loss tolerated against the full-feature default model.
pub const PERF_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TprDenominator {
    /// `|{sensitive = b, y = 1}|`, the usual true positive rate.
    #[default]
    Positives,
    /// `|{sensitive = b}|`, every member of the group.
    GroupSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub tpr_priv: f64,
    pub tpr_unpriv: f64,
    pub eod: f64,
}

/// TPR of group `b` from parallel label/prediction/group vectors.
pub fn group_tpr_from(
    labels: &[u8],
    preds: &[u8],
    groups: &[u8],
    b: u8,
    denom: TprDenominator,
) -> Result<f64> {
    let mut hits = 0usize;
    let mut positives = 0usize;
    let mut members = 0usize;
    for ((&y, &p), &g) in labels.iter().zip(preds).zip(groups) {
        if g != b {
            continue;
        }
        members += 1;
        if y == 1 {
            positives += 1;
            if p == 1 {
                hits += 1;
            }
        }
    }
    if positives == 0 {
        return Err(Error::NoPositivesInGroup { group: b });
    }
    let d = match denom {
        TprDenominator::Positives => positives,
        TprDenominator::GroupSize => members,
    };
    Ok(hits as f64 / d as f64)
}

pub fn group_rates_from(
    labels: &[u8],
    preds: &[u8],
    groups: &[u8],
    denom: TprDenominator,
) -> Result<GroupRates> {
    let tpr_priv = group_tpr_from(labels, preds, groups, 1, denom)?;
    let tpr_unpriv = group_tpr_from(labels, preds, groups, 0, denom)?;
    Ok(GroupRates {
        tpr_priv,
        tpr_unpriv,
        eod: (tpr_priv - tpr_unpriv).abs(),
    })
}

pub fn group_tpr(m: &TrainedModel, test: &Dataset, b: u8) -> Result<f64> {
    let pred = m.predict(test)?;
    group_tpr_from(
        test.labels(),
        &pred.labels,
        &test.groups(),
        b,
        TprDenominator::Positives,
    )
}

pub fn eod(m: &TrainedModel, test: &Dataset) -> Result<GroupRates> {
    eod_with(m, test, TprDenominator::Positives)
}

pub fn eod_with(m: &TrainedModel, test: &Dataset, denom: TprDenominator) -> Result<GroupRates> {
    let pred = m.predict(test)?;
    group_rates_from(test.labels(), &pred.labels, &test.groups(), denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEval {
    pub rates: GroupRates,
    pub perf: PerfMetrics,
    /// Accuracy and F1 within [`PERF_TOLERANCE`] of the baseline model.
    pub acceptable: bool,
}

impl BiasEval {
    pub fn eod(&self) -> f64 {
        self.rates.eod
    }
}

/// Test-set performance of the default configuration on every feature.
pub fn baseline_perf(
    train_set: &Dataset,
    test: &Dataset,
    cfg: &ParamConfig,
    seed: u64,
) -> Result<PerfMetrics> {
    let base = ParamConfig {
        hp: HpConfig::default_for(cfg.hp.kind()),
        features: train_set.schema().feature_names(),
    };
    train(&base, train_set, seed)?.evaluate(test)
}

/// Trains `cfg` on `train_set` and measures EOD and performance on `test`.
/// Without a `baseline`, the full-feature default model is trained to get one.
pub fn bias_eval(
    train_set: &Dataset,
    test: &Dataset,
    cfg: &ParamConfig,
    seed: u64,
    baseline: Option<&PerfMetrics>,
) -> Result<BiasEval> {
    let model = train(cfg, train_set, seed)?;
    let pred = model.predict(test)?;
    let rates = group_rates_from(
        test.labels(),
        &pred.labels,
        &test.groups(),
        TprDenominator::Positives,
    )?;
    let perf = PerfMetrics::from_predictions(test.labels(), &pred.labels);
    let base = match baseline {
        Some(b) => *b,
        None => baseline_perf(train_set, test, cfg, seed)?,
    };
    Ok(BiasEval {
        rates,
        perf,
        acceptable: perf.within_tolerance_of(&base, PERF_TOLERANCE),
    })
}

/// EOD and performance of `cfg` trained on the split's training part and
/// evaluated on its test part.
pub fn bias_fn(split: &DataSplit, cfg: &ParamConfig, seed: u64) -> Result<BiasEval> {
    bias_eval(&split.train, &split.test, cfg, seed, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_rates() {
        // group 1: two positives, one caught; group 0: one positive, caught
        let labels = [1, 1, 0, 1, 0];
        let preds = [1, 0, 1, 1, 0];
        let groups = [1, 1, 1, 0, 0];
        let r = group_rates_from(&labels, &preds, &groups, TprDenominator::Positives).unwrap();
        assert_eq!(r.tpr_priv, 0.5);
        assert_eq!(r.tpr_unpriv, 1.0);
        assert_eq!(r.eod, 0.5);
        let lit = group_rates_from(&labels, &preds, &groups, TprDenominator::GroupSize).unwrap();
        assert!((lit.tpr_priv - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(lit.tpr_unpriv, 0.5);
    }

    #[test]
    fn swapping_groups_keeps_eod() {
        let labels = [1, 1, 0, 1, 1];
        let preds = [1, 0, 1, 1, 1];
        let groups = [1, 1, 1, 0, 0];
        let flipped: Vec<u8> = groups.iter().map(|g| 1 - g).collect();
        let a = group_rates_from(&labels, &preds, &groups, TprDenominator::Positives).unwrap();
        let b = group_rates_from(&labels, &preds, &flipped, TprDenominator::Positives).unwrap();
        assert_eq!(a.eod, b.eod);
    }

    #[test]
    fn missing_positives_is_an_error() {
        let r = group_rates_from(&[1, 0], &[1, 0], &[1, 0], TprDenominator::Positives);
        assert!(matches!(r, Err(Error::NoPositivesInGroup { group: 0 })));
    }
}
