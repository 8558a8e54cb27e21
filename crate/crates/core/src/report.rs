//! Repeated audits, Scott-Knott ranking and report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{load_csv, split, write_csv, Dataset, Schema, SplitSpec};
use crate::discovery::{
    cpdag_to_dot, dag_to_dot, discover, enumerate_dags_with_cap, Cpdag, DiscoveryAlgorithm,
};
use crate::error::{Error, Result};
use crate::hp::{
    evolve, shapley_importance, top4_rank_check, write_samples, ImportanceVector, Top4Check,
};
use crate::interventions::Intervention;
use crate::learners::LearnerKind;
use crate::rng::{derive_path, derive_seed};
use crate::scm::{fit_scm, sample};
use crate::search::{
    prepare, search_with_cpdag, CandidateSeeds, PairSummary, PropEval, PropertySpec,
    RobustnessVerdict, SearchFlag, SearchOptions, SideEval, VerdictMode, VerdictStatus,
    WitnessKind, MIN_ACCEPT_RATE,
};
use crate::validator::filter_samples;

pub const DEFAULT_REPEATS: usize = 30;
pub const DEFAULT_SK_ALPHA: f64 = 0.05;

/// Rank per group label; 1 is the group with the smallest mean.
pub type RankedGroups = BTreeMap<String, usize>;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Classic Scott-Knott clustering of group means.
///
/// Groups are sorted by mean (then name). A cut is accepted when
/// `pi / (2 (pi - 2)) * B0 / s0^2` exceeds the chi-square quantile with
/// `k / (pi - 2)` degrees of freedom, where `B0` is the largest
/// between-cut sum of squares of the `k` means and `s0^2` pools their spread
/// with the within-group error of a mean. Both halves are then split
/// recursively.
pub fn scott_knott(groups: &[(String, Vec<f64>)], alpha: f64) -> Result<RankedGroups> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    if let Some((name, _)) = groups.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::TooFewSamples(format!(
            "group `{name}` needs 2 measurements"
        )));
    }
    let mut order: Vec<(String, f64)> = groups.iter().map(|(n, v)| (n.clone(), mean(v))).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    // pooled within-group variance and its degrees of freedom
    let total: usize = groups.iter().map(|(_, v)| v.len()).sum();
    let df = (total - groups.len()) as f64;
    let ss_within: f64 = groups
        .iter()
        .map(|(_, v)| {
            let m = mean(v);
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let mse = if df > 0.0 { ss_within / df } else { 0.0 };
    let harmonic_n = groups.len() as f64
        / groups
            .iter()
            .map(|(_, v)| 1.0 / v.len() as f64)
            .sum::<f64>();
    let se2 = mse / harmonic_n;

    let means: Vec<f64> = order.iter().map(|o| o.1).collect();
    let mut clusters = Vec::new();
    split_range(&means, 0, means.len(), se2, df, alpha, &mut clusters)?;
    let mut ranks = RankedGroups::new();
    for (rank, &(lo, hi)) in clusters.iter().enumerate() {
        for item in &order[lo..hi] {
            ranks.insert(item.0.clone(), rank + 1);
        }
    }
    Ok(ranks)
}

fn split_range(
    means: &[f64],
    lo: usize,
    hi: usize,
    se2: f64,
    df: f64,
    alpha: f64,
    out: &mut Vec<(usize, usize)>,
) -> Result<()> {
    let k = hi - lo;
    if k < 2 {
        out.push((lo, hi));
        return Ok(());
    }
    let part = &means[lo..hi];
    let grand = mean(part);
    let mut best = (0.0, lo);
    for cut in 1..k {
        let (a, b) = part.split_at(cut);
        let b0 =
            a.len() as f64 * (mean(a) - grand).powi(2) + b.len() as f64 * (mean(b) - grand).powi(2);
        if b0 > best.0 {
            best = (b0, lo + cut);
        }
    }
    let (b0, cut) = best;
    let spread: f64 = part.iter().map(|m| (m - grand).powi(2)).sum();
    let s0 = (spread + df * se2) / (k as f64 + df);
    let pi = std::f64::consts::PI;
    let significant = if b0 <= 0.0 {
        false
    } else if s0 <= 0.0 {
        true
    } else {
        let lambda = pi / (2.0 * (pi - 2.0)) * b0 / s0;
        let chi = ChiSquared::new(k as f64 / (pi - 2.0))
            .map_err(|e| Error::InvalidConfig(format!("chi-square: {e}")))?;
        lambda > chi.inverse_cdf(1.0 - alpha)
    };
    if significant {
        split_range(means, lo, cut, se2, df, alpha, out)?;
        split_range(means, cut, hi, se2, df, alpha, out)?;
    } else {
        out.push((lo, hi));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub schema: PathBuf,
    pub algorithm: DiscoveryAlgorithm,
    pub interventions: Vec<Intervention>,
    pub learner: LearnerKind,
    pub search: SearchOptions,
    pub repeats: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for p in [&self.data, &self.schema] {
            if !p.is_file() {
                return Err(Error::InvalidConfig(format!(
                    "{} does not exist",
                    p.display()
                )));
            }
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be >= 1".into()));
        }
        if self.interventions.is_empty() {
            return Err(Error::InvalidConfig("no intervention given".into()));
        }
        for iv in &self.interventions {
            iv.validate()?;
        }
        self.search.validate()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessFiles {
    pub dataset_a: String,
    pub dataset_b: String,
    pub dag_a: String,
    pub dag_b: String,
    pub scm_a: String,
    pub scm_b: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSide {
    pub dag_index: usize,
    pub draw: usize,
    pub shifted: bool,
    pub seeds: CandidateSeeds,
    pub eval: SideEval,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRecord {
    pub kind: WitnessKind,
    pub edge_diff: usize,
    pub eod_diff: f64,
    pub side_a: WitnessSide,
    pub side_b: WitnessSide,
    pub files: WitnessFiles,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub seed: u64,
    pub status: VerdictStatus,
    pub prop_truth: Option<(bool, bool)>,
    pub prop_on_input: Option<PropEval>,
    pub max_observed_eod_diff: f64,
    pub best_pair: Option<PairSummary>,
    pub iterations: usize,
    pub candidates_evaluated: usize,
    pub usable_dags: Vec<usize>,
    pub flags: Vec<SearchFlag>,
    pub witness: Option<WitnessRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterventionRecord {
    pub intervention: String,
    pub violations: usize,
    pub repeats: Vec<RepeatRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScottKnottRecord {
    pub variant: &'static str,
    pub alpha: f64,
    pub measure: &'static str,
    pub ranks: Option<RankedGroups>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub data: String,
    pub schema: String,
    pub algorithm: DiscoveryAlgorithm,
    pub interventions: Vec<String>,
    pub learner: String,
    pub mode: VerdictMode,
    pub epsilon: f64,
    pub n_posterior_models: usize,
    pub timeout_secs: f64,
    pub seed: u64,
    pub shift_epsilon: Option<f64>,
    pub repeats: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ConfigEcho,
    pub cpdag: Cpdag,
    pub n_dags: usize,
    pub interventions: Vec<InterventionRecord>,
    pub scott_knott: ScottKnottRecord,
    pub violation_found: bool,
}

impl AuditReport {
    pub fn exit_code(&self) -> i32 {
        if self.violation_found {
            2
        } else {
            0
        }
    }
}

fn to_dir(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_witness(v: &RobustnessVerdict, root: &Path, rel: &Path) -> Result<Option<WitnessRecord>> {
    let Some(w) = &v.witness else { return Ok(None) };
    let dir = root.join(rel);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = |f: &str| to_dir(&rel.join(f));
    write_csv(dir.join("dataset_a.csv"), &w.dataset_a)?;
    write_csv(dir.join("dataset_b.csv"), &w.dataset_b)?;
    write_text(&dir.join("dag_a.dot"), &dag_to_dot(&w.dag_a))?;
    write_text(&dir.join("dag_b.dot"), &dag_to_dot(&w.dag_b))?;
    write_text(
        &dir.join("scm_a.json"),
        &serde_json::to_string_pretty(&w.scm_a)?,
    )?;
    write_text(
        &dir.join("scm_b.json"),
        &serde_json::to_string_pretty(&w.scm_b)?,
    )?;
    let side = |s: &crate::search::PairSide| WitnessSide {
        dag_index: s.dag_index,
        draw: s.draw,
        shifted: s.shifted,
        seeds: s.seeds,
        eval: s.eval.clone(),
    };
    Ok(Some(WitnessRecord {
        kind: w.kind,
        edge_diff: w.edge_diff,
        eod_diff: w.eod_diff,
        side_a: side(&w.side_a),
        side_b: side(&w.side_b),
        files: WitnessFiles {
            dataset_a: name("dataset_a.csv"),
            dataset_b: name("dataset_b.csv"),
            dag_a: name("dag_a.dot"),
            dag_b: name("dag_b.dot"),
            scm_a: name("scm_a.json"),
            scm_b: name("scm_b.json"),
        },
    }))
}

/// Runs every intervention `repeats` times with seeds derived from the base
/// seed and writes `report.json`, `summary.txt`, the CPDAG and any witness
/// files under the output directory.
pub fn run_audit(cfg: &RunConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let schema = Schema::from_json_file(&cfg.schema)?;
    let data = load_csv(&cfg.data, &schema)?;
    run_audit_on(cfg, &data)
}

pub fn run_audit_on(cfg: &RunConfig, data: &Dataset) -> Result<AuditReport> {
    let cpdag = discover(data, cfg.algorithm, cfg.search.alpha)?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_text(&out.join("cpdag.dot"), &cpdag_to_dot(&cpdag))?;

    let mut records = Vec::new();
    let mut n_dags = 0;
    for iv in &cfg.interventions {
        let prop = PropertySpec::new(*iv, cfg.learner, data.schema());
        let verdicts: Vec<(usize, u64, Result<RobustnessVerdict>)> = (0..cfg.repeats)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(cfg.search.seed, r as u64);
                let opts = SearchOptions {
                    seed,
                    ..cfg.search.clone()
                };
                (r, seed, search_with_cpdag(data, &prop, &cpdag, &opts))
            })
            .collect();
        let mut repeats = Vec::new();
        for (r, seed, v) in verdicts {
            let v = v?;
            n_dags = v.n_dags;
            let rel = PathBuf::from("witness")
                .join(iv.to_string().replace(':', "_"))
                .join(format!("r{r:03}"));
            let witness = write_witness(&v, out, &rel)?;
            repeats.push(RepeatRecord {
                repeat: r,
                seed,
                status: v.status,
                prop_truth: v.prop_truth,
                prop_on_input: v.prop_on_input,
                max_observed_eod_diff: v.max_observed_eod_diff,
                best_pair: v.best_pair,
                iterations: v.iterations,
                candidates_evaluated: v.candidates_evaluated,
                usable_dags: v.usable_dags.clone(),
                flags: v.flags.clone(),
                witness,
            });
        }
        records.push(InterventionRecord {
            intervention: iv.to_string(),
            violations: repeats
                .iter()
                .filter(|r| r.status == VerdictStatus::Violation)
                .count(),
            repeats,
        });
    }

    let groups: Vec<(String, Vec<f64>)> = records
        .iter()
        .map(|r| {
            let v = r.repeats.iter().map(|x| x.max_observed_eod_diff).collect();
            (r.intervention.clone(), v)
        })
        .collect();
    // Ranking needs two measurements per group.
    let ranks = if cfg.repeats >= 2 {
        Some(scott_knott(&groups, DEFAULT_SK_ALPHA)?)
    } else {
        None
    };
    let report = AuditReport {
        tool: "fairprobe",
        version: env!("CARGO_PKG_VERSION"),
        config: ConfigEcho {
            data: to_dir(&cfg.data),
            schema: to_dir(&cfg.schema),
            algorithm: cfg.algorithm,
            interventions: cfg.interventions.iter().map(|i| i.to_string()).collect(),
            learner: cfg.learner.short_name().to_string(),
            mode: cfg.search.mode,
            epsilon: cfg.search.epsilon,
            n_posterior_models: cfg.search.n_posterior_models,
            timeout_secs: cfg.search.timeout.as_secs_f64(),
            seed: cfg.search.seed,
            shift_epsilon: cfg.search.shift.map(|s| s.epsilon),
            repeats: cfg.repeats,
        },
        cpdag,
        n_dags,
        violation_found: records.iter().any(|r| r.violations > 0),
        interventions: records,
        scott_knott: ScottKnottRecord {
            variant: "classic",
            alpha: DEFAULT_SK_ALPHA,
            measure: "max_observed_eod_diff",
            ranks,
        },
    };
    write_text(
        &out.join("report.json"),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    write_text(&out.join("summary.txt"), &summary_text(&report))?;
    Ok(report)
}

fn truth(t: Option<(bool, bool)>) -> String {
    t.map_or("-".into(), |(a, b)| format!("({a}, {b})"))
}

/// Aligned plain-text table of the report.
pub fn summary_text(r: &AuditReport) -> String {
    let mut rows = vec![[
        "intervention".to_string(),
        "repeat".into(),
        "status".into(),
        "truth".into(),
        "max_eod_diff".into(),
        "iterations".into(),
        "rank".into(),
    ]];
    for iv in &r.interventions {
        let rank = r
            .scott_knott
            .ranks
            .as_ref()
            .and_then(|m| m.get(&iv.intervention))
            .map_or("-".into(), |k| k.to_string());
        for rep in &iv.repeats {
            let status = serde_json::to_value(rep.status)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            rows.push([
                iv.intervention.clone(),
                rep.repeat.to_string(),
                status,
                truth(rep.prop_truth),
                format!("{:.4}", rep.max_observed_eod_diff),
                rep.iterations.to_string(),
                rank.clone(),
            ]);
        }
    }
    let widths: Vec<usize> = (0..7)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "learner {}  algorithm {}  dags {}  mode {:?}  epsilon {}",
        r.config.learner,
        r.config.algorithm.name(),
        r.n_dags,
        r.config.mode,
        r.config.epsilon
    );
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    let _ = writeln!(
        out,
        "verdict: {}",
        if r.violation_found {
            "violation found"
        } else {
            "robust within budget"
        }
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpAuditConfig {
    pub data: PathBuf,
    pub schema: PathBuf,
    pub algorithm: DiscoveryAlgorithm,
    pub learner: LearnerKind,
    pub budget: usize,
    pub seed: u64,
    /// Neighbor datasets compared with the input, at most one per DAG.
    pub neighbors: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct HpNeighborRecord {
    pub dag_index: usize,
    pub accept_rate: f64,
    pub rows: usize,
    pub importance: ImportanceVector,
    pub top4: Top4Check,
    pub samples_file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HpAuditReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub learner: String,
    pub algorithm: DiscoveryAlgorithm,
    pub budget: usize,
    pub seed: u64,
    pub n_dags: usize,
    pub input_importance: ImportanceVector,
    pub input_samples_file: String,
    pub neighbors: Vec<HpNeighborRecord>,
    pub violation_found: bool,
}

impl HpAuditReport {
    pub fn exit_code(&self) -> i32 {
        if self.violation_found {
            2
        } else {
            0
        }
    }
}

/// Hyperparameter importance on the input and on datasets generated from
/// each member of its equivalence class, with the top-4 comparison of every
/// neighbor against the input.
pub fn run_hp_audit(cfg: &HpAuditConfig) -> Result<HpAuditReport> {
    if cfg.budget < 50 {
        return Err(Error::InvalidConfig(format!(
            "budget {} below 50",
            cfg.budget
        )));
    }
    let schema = Schema::from_json_file(&cfg.schema)?;
    let data = load_csv(&cfg.data, &schema)?;
    let opts = SearchOptions {
        seed: cfg.seed,
        ..SearchOptions::default()
    };
    let prep = prepare(&data, &opts)?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let base_samples = evolve(&prep.split, cfg.learner, cfg.budget, cfg.seed)?;
    write_samples(out.join("hp_input.csv"), &base_samples)?;
    let input_importance = shapley_importance(&base_samples)?;

    let cpdag = discover(&data, cfg.algorithm, opts.alpha)?;
    let dags = enumerate_dags_with_cap(&cpdag, opts.extension_cap)?;
    let mut neighbors = Vec::new();
    for (i, dag) in dags.iter().enumerate() {
        if neighbors.len() >= cfg.neighbors {
            break;
        }
        let fit = fit_scm(dag, &data)?;
        let raw = sample(
            &fit.model,
            prep.n_generated,
            derive_path(cfg.seed, &[0x4E, i as u64]),
        )?
        .data;
        let kept = filter_samples(&prep.criterion, &raw)?;
        let rate = kept.n() as f64 / raw.n().max(1) as f64;
        if rate < MIN_ACCEPT_RATE {
            continue;
        }
        let Ok(s) = split(
            &kept,
            &SplitSpec::with_seed(derive_path(cfg.seed, &[0x4F, i as u64])),
        ) else {
            continue;
        };
        let Ok(samples) = evolve(&s, cfg.learner, cfg.budget, cfg.seed) else {
            continue;
        };
        let file = format!("hp_neighbor_{i:03}.csv");
        write_samples(out.join(&file), &samples)?;
        let importance = shapley_importance(&samples)?;
        neighbors.push(HpNeighborRecord {
            dag_index: i,
            accept_rate: rate,
            rows: kept.n(),
            top4: top4_rank_check(&input_importance, &importance),
            importance,
            samples_file: file,
        });
    }
    let report = HpAuditReport {
        tool: "fairprobe",
        version: env!("CARGO_PKG_VERSION"),
        learner: cfg.learner.short_name().to_string(),
        algorithm: cfg.algorithm,
        budget: cfg.budget,
        seed: cfg.seed,
        n_dags: dags.len(),
        input_importance,
        input_samples_file: "hp_input.csv".into(),
        violation_found: neighbors.iter().any(|n| n.top4.violated),
        neighbors,
    };
    write_text(
        &out.join("hp_report.json"),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spread(m: f64, sd: f64, n: usize) -> Vec<f64> {
        // deterministic values with the requested mean and population sd
        (0..n)
            .map(|i| m + if i % 2 == 0 { sd } else { -sd })
            .collect()
    }

    #[test]
    fn identical_groups_share_a_rank() {
        let g = vec![
            ("a".to_string(), spread(1.0, 0.5, 30)),
            ("b".to_string(), spread(1.0, 0.5, 30)),
        ];
        let r = scott_knott(&g, 0.05).unwrap();
        assert_eq!(r["a"], 1);
        assert_eq!(r["b"], 1);
    }

    #[test]
    fn separated_means_split() {
        let g = vec![
            ("hi".to_string(), spread(10.0, 0.1, 30)),
            ("lo".to_string(), spread(0.0, 0.1, 30)),
        ];
        let r = scott_knott(&g, 0.05).unwrap();
        assert_eq!(r["lo"], 1);
        assert_eq!(r["hi"], 2);
    }

    #[test]
    fn hand_computed_statistic() {
        // k = 2, means 0 and 10: B0 = 50; se2 = 0.01 / 30; df = 58
        let se2 = 0.01f64 / 30.0;
        let s0 = (50.0 + 58.0 * se2) / 60.0;
        let pi = std::f64::consts::PI;
        let lambda = pi / (2.0 * (pi - 2.0)) * 50.0 / s0;
        let crit = ChiSquared::new(2.0 / (pi - 2.0)).unwrap().inverse_cdf(0.95);
        assert!(lambda > 80.0 && crit < 6.0);
    }

    #[test]
    fn single_group_and_bad_input() {
        let r = scott_knott(&[("x".to_string(), vec![1.0, 2.0])], 0.05).unwrap();
        assert_eq!(r["x"], 1);
        assert!(scott_knott(&[("x".to_string(), vec![1.0])], 0.05).is_err());
    }
}
