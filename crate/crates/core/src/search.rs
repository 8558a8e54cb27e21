//! Fairness properties and the neighbor-dataset search.
//!
//! A property compares a learner configuration with and without an
//! intervention on one dataset. The search builds one SCM per member of the
//! discovered equivalence class, generates in-distribution datasets from
//! posterior draws of each SCM, and looks for two neighbors on which the
//! property evaluates differently (or whose intervention effects differ by
//! more than epsilon). Without a violation, it keeps drawing around the pair
//! with the largest observed difference until the draw budget or the
//! timeout runs out.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split, DataSplit, Dataset, SplitSpec};
use crate::discovery::{
    discover, edge_diff, enumerate_dags_with_cap, Cpdag, Dag, DiscoveryAlgorithm, DEFAULT_ALPHA,
    DEFAULT_EXTENSION_CAP,
};
use crate::error::{Error, Result};
use crate::fairness::{group_rates_from, BiasEval, TprDenominator};
use crate::interventions::{treated_eval, Intervention};
use crate::learners::{train, LearnerKind, ParamConfig, PerfMetrics};
use crate::rng::derive_path;
use crate::scm::{
    apply_label_shift, baseline_weights, draw_models, fit_scm, sample, BaselineMode, ScmFit,
    ScmFlag, ScmModel, ShiftSpec,
};
use crate::validator::{
    accept_rate, calibrate_threshold, filter_samples, fit_clusters, uniform_probe,
    validator_quality, AcceptanceCriterion, ValidatorQuality, DEFAULT_K,
};

/// Generated datasets are never larger than this.
pub const MAX_GENERATED_ROWS: usize = 20_000;
/// A DAG (or a single draw) whose samples are accepted less often than this
/// is not used.
pub const MIN_ACCEPT_RATE: f64 = 0.1;
/// Filtered datasets smaller than this are not evaluated.
const MIN_FILTERED_ROWS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `bias(treated) < bias(base)`.
    BiasDecreases,
    /// `bias(treated) <= bias(base)`.
    BiasNotIncreased,
}

impl Claim {
    /// Dropping the sensitive feature and post-processing are expected to
    /// lower bias; feature selection only not to raise it.
    pub fn default_for(iv: &Intervention) -> Self {
        match iv {
            Intervention::DropSens
            | Intervention::ThresholdOptimizer
            | Intervention::CalibratedEqOdds { .. } => Claim::BiasDecreases,
            _ => Claim::BiasNotIncreased,
        }
    }

    pub fn holds(self, eod_base: f64, eod_treated: f64) -> bool {
        match self {
            Claim::BiasDecreases => eod_base > eod_treated,
            Claim::BiasNotIncreased => eod_base >= eod_treated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub intervention: Intervention,
    pub learner: LearnerKind,
    /// The untreated configuration; the treated one applies `intervention` to it.
    pub base_config: ParamConfig,
    pub claim: Claim,
}

impl PropertySpec {
    /// Default hyperparameters on every feature, default claim.
    pub fn new(
        intervention: Intervention,
        learner: LearnerKind,
        schema: &crate::data::Schema,
    ) -> Self {
        Self {
            intervention,
            learner,
            base_config: ParamConfig::default_for(learner, schema),
            claim: Claim::default_for(&intervention),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropEval {
    pub holds: bool,
    pub eod_base: f64,
    pub eod_treated: f64,
    /// The treated model is within the accuracy/F1 tolerance of the base model.
    pub perf_ok: bool,
    pub perf_base: PerfMetrics,
    pub perf_treated: PerfMetrics,
}

impl PropEval {
    /// EOD reduction achieved by the intervention.
    pub fn effect(&self) -> f64 {
        self.eod_base - self.eod_treated
    }
}

/// Trains the base and treated configurations on `train_set` and compares
/// their test EOD.
pub fn eval_property(
    prop: &PropertySpec,
    train_set: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<PropEval> {
    let model = train(&prop.base_config, train_set, seed)?;
    let pred = model.predict(test)?;
    let rates = group_rates_from(
        test.labels(),
        &pred.labels,
        &test.groups(),
        TprDenominator::Positives,
    )?;
    let base = BiasEval {
        rates,
        perf: PerfMetrics::from_predictions(test.labels(), &pred.labels),
        acceptable: true,
    };
    let treated = treated_eval(
        &prop.intervention,
        train_set,
        test,
        &prop.base_config,
        seed,
        &base.perf,
    )?;
    Ok(PropEval {
        holds: prop.claim.holds(base.eod(), treated.eod()),
        eod_base: base.eod(),
        eod_treated: treated.eod(),
        perf_ok: treated.acceptable,
        perf_base: base.perf,
        perf_treated: treated.perf,
    })
}

pub fn eval_property_split(prop: &PropertySpec, s: &DataSplit, seed: u64) -> Result<PropEval> {
    eval_property(prop, &s.train, &s.test, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMode {
    /// The property holds on one neighbor and fails on the other.
    Flip,
    /// The intervention's EOD effects on the two neighbors differ by more than epsilon.
    Diff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub epsilon: f64,
    /// Posterior draws allowed per DAG.
    pub n_posterior_models: usize,
    /// Draws per DAG in the first round.
    pub round1_draws: usize,
    /// Fresh draws around each promoted model per later round.
    pub draws_per_round: usize,
    pub timeout: Duration,
    pub seed: u64,
    pub shift: Option<ShiftSpec>,
    pub mode: VerdictMode,
    pub alpha: f64,
    pub k_clusters: usize,
    pub split: SplitSpec,
    pub max_rows: usize,
    pub extension_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            n_posterior_models: 1000,
            round1_draws: 10,
            draws_per_round: 10,
            timeout: Duration::from_secs(600),
            seed: 0,
            shift: None,
            mode: VerdictMode::Flip,
            alpha: DEFAULT_ALPHA,
            k_clusters: DEFAULT_K,
            split: SplitSpec::default(),
            max_rows: MAX_GENERATED_ROWS,
            extension_cap: DEFAULT_EXTENSION_CAP,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.n_posterior_models == 0 || self.round1_draws == 0 || self.draws_per_round == 0 {
            return Err(Error::InvalidConfig("draw counts must be >= 1".into()));
        }
        if self.k_clusters == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if let Some(s) = self.shift {
            if !(0.0..=1.0).contains(&s.epsilon) {
                return Err(Error::InvalidShift(s.epsilon));
            }
        }
        self.split.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchFlag {
    /// The class has one usable member; neighbors are posterior draws of it.
    WeightsOnlyNeighborhood,
    /// Fewer training rows than requested clusters.
    ClustersReduced {
        k: usize,
    },
    UnusableDags {
        count: usize,
    },
    Scm {
        dag: usize,
        scm_flag: ScmFlag,
    },
}

/// Validator and generation size shared by the search and the accept-rate table.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub split: DataSplit,
    pub criterion: AcceptanceCriterion,
    pub n_generated: usize,
    pub flags: Vec<SearchFlag>,
}

pub fn prepare(input: &Dataset, opts: &SearchOptions) -> Result<Prepared> {
    opts.validate()?;
    let s = split(input, &opts.split)?;
    let mut flags = Vec::new();
    let k = opts.k_clusters.min(s.train.n());
    if k < opts.k_clusters {
        flags.push(SearchFlag::ClustersReduced { k });
    }
    let clusters = fit_clusters(&s.train, k, derive_path(opts.seed, &[0xC1]))?;
    let criterion = calibrate_threshold(clusters, &s.validation)?;
    Ok(Prepared {
        split: s,
        criterion,
        n_generated: input.n().min(opts.max_rows),
        flags,
    })
}

const SAMPLE: u64 = 1;
const SPLIT: u64 = 2;
const TRAIN: u64 = 3;
const DRAW: u64 = 4;
const USABLE: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSeeds {
    pub sample: u64,
    pub split: u64,
    pub train: u64,
}

impl CandidateSeeds {
    fn new(seed: u64, dag: usize, draw: usize) -> Self {
        let d = dag as u64;
        let w = draw as u64;
        Self {
            sample: derive_path(seed, &[SAMPLE, d, w]),
            split: derive_path(seed, &[SPLIT, d, w]),
            train: derive_path(seed, &[TRAIN, d, w]),
        }
    }
}

/// A generated, filtered dataset and the property evaluated on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideEval {
    pub accept_rate: f64,
    pub rows: usize,
    pub prop: PropEval,
}

/// Samples `model`, keeps accepted rows and evaluates the property.
/// `None` when the draw is unusable (low acceptance, degenerate data,
/// or a metric that cannot be computed).
pub fn generate_and_eval(
    model: &ScmModel,
    prop: &PropertySpec,
    crit: &AcceptanceCriterion,
    n: usize,
    seeds: &CandidateSeeds,
) -> Option<(Dataset, SideEval)> {
    let raw = sample(model, n, seeds.sample).ok()?.data;
    let kept = filter_samples(crit, &raw).ok()?;
    let rate = kept.n() as f64 / n as f64;
    if rate < MIN_ACCEPT_RATE || kept.n() < MIN_FILTERED_ROWS {
        return None;
    }
    let eval = replay(prop, &kept, seeds).ok()?;
    let rows = kept.n();
    Some((
        kept,
        SideEval {
            accept_rate: rate,
            rows,
            prop: eval,
        },
    ))
}

/// Re-evaluates the property on a stored witness dataset.
pub fn replay(prop: &PropertySpec, data: &Dataset, seeds: &CandidateSeeds) -> Result<PropEval> {
    let s = split(data, &SplitSpec::with_seed(seeds.split))?;
    eval_property_split(prop, &s, seeds.train)
}

struct Candidate {
    dag: usize,
    draw: usize,
    model: ScmModel,
    seeds: CandidateSeeds,
    plain: Option<SideEval>,
    shifted: Option<SideEval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    CrossDag,
    WeightsOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSide {
    pub dag_index: usize,
    pub draw: usize,
    pub shifted: bool,
    pub seeds: CandidateSeeds,
    pub eval: SideEval,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeighborPair {
    pub kind: WitnessKind,
    pub dag_a: Dag,
    pub dag_b: Dag,
    pub scm_a: ScmModel,
    pub scm_b: ScmModel,
    #[serde(skip)]
    pub dataset_a: Dataset,
    #[serde(skip)]
    pub dataset_b: Dataset,
    pub edge_diff: usize,
    pub side_a: PairSide,
    pub side_b: PairSide,
    pub eod_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Violation,
    RobustWithinBudget,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSummary {
    pub dag_a: usize,
    pub draw_a: usize,
    pub dag_b: usize,
    pub draw_b: usize,
    pub eod_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessVerdict {
    pub status: VerdictStatus,
    pub mode: VerdictMode,
    pub epsilon: f64,
    /// Present iff the status is a violation.
    pub witness: Option<NeighborPair>,
    /// Truth values on the witness sides, ordered so the holding side is first.
    pub prop_truth: Option<(bool, bool)>,
    /// The property on the input data itself.
    pub prop_on_input: Option<PropEval>,
    pub max_observed_eod_diff: f64,
    /// Largest-difference pair seen, violation or not.
    pub best_pair: Option<PairSummary>,
    /// Running maximum after each round.
    pub diff_history: Vec<f64>,
    pub iterations: usize,
    pub candidates_evaluated: usize,
    pub n_dags: usize,
    pub usable_dags: Vec<usize>,
    pub dags: Vec<Dag>,
    pub cpdag: Cpdag,
    pub flags: Vec<SearchFlag>,
}

struct PairScore {
    a: usize,
    b: usize,
    diff: f64,
    violation: bool,
}

struct Search<'a> {
    prop: &'a PropertySpec,
    opts: &'a SearchOptions,
    prep: &'a Prepared,
    fits: Vec<ScmFit>,
    shifted_models: bool,
    weights_only: bool,
    candidates: Vec<Candidate>,
    draws_used: Vec<usize>,
}

impl Search<'_> {
    fn side_b<'c>(&self, c: &'c Candidate) -> Option<&'c SideEval> {
        if self.shifted_models {
            c.shifted.as_ref()
        } else {
            c.plain.as_ref()
        }
    }

    fn score(&self, a: usize, b: usize) -> Option<PairScore> {
        let sa = self.candidates[a].plain.as_ref()?;
        let sb = self.side_b(&self.candidates[b])?;
        let diff = (sa.prop.effect() - sb.prop.effect()).abs();
        let gate = sa.prop.perf_ok && sb.prop.perf_ok;
        let violation = gate
            && match self.opts.mode {
                VerdictMode::Flip => sa.prop.holds != sb.prop.holds,
                VerdictMode::Diff => diff > self.opts.epsilon,
            };
        Some(PairScore {
            a,
            b,
            diff,
            violation,
        })
    }

    fn allowed(&self, a: usize, b: usize) -> bool {
        let (ca, cb) = (&self.candidates[a], &self.candidates[b]);
        if self.weights_only {
            ca.dag == cb.dag && (a != b || self.shifted_models)
        } else {
            ca.dag != cb.dag
        }
    }

    /// Pairs touching at least one index in `fresh`, restricted to `pool`.
    fn pairs(&self, pool: &[usize], fresh: &[usize]) -> Vec<(usize, usize)> {
        let is_fresh = |i: usize| fresh.contains(&i);
        let mut out = Vec::new();
        for &a in pool {
            for &b in pool {
                if !(is_fresh(a) || is_fresh(b)) || !self.allowed(a, b) {
                    continue;
                }
                if !self.shifted_models && a >= b {
                    continue;
                }
                out.push((a, b));
            }
        }
        out
    }

    /// Draws `count` models for `dag` (around `center` if given) and evaluates them.
    fn add_draws(&mut self, jobs: &[(usize, Option<usize>, usize)], round: usize) -> Vec<usize> {
        let mut new: Vec<Candidate> = Vec::new();
        for (j, &(dag, center, count)) in jobs.iter().enumerate() {
            let left = self.opts.n_posterior_models - self.draws_used[dag];
            let count = count.min(left);
            if count == 0 {
                continue;
            }
            let fit = &self.fits[dag];
            let posterior = match center {
                Some(c) => fit.posterior.recentered(&self.candidates[c].model),
                None => fit.posterior.clone(),
            };
            let draw_seed =
                derive_path(self.opts.seed, &[DRAW, dag as u64, round as u64, j as u64]);
            let Ok(draws) = draw_models(&fit.model, &posterior, count, draw_seed) else {
                continue;
            };
            for model in draws.models {
                let draw = self.draws_used[dag];
                self.draws_used[dag] += 1;
                new.push(Candidate {
                    dag,
                    draw,
                    seeds: CandidateSeeds::new(self.opts.seed, dag, draw),
                    model,
                    plain: None,
                    shifted: None,
                });
            }
        }
        let (prop, crit, n) = (self.prop, &self.prep.criterion, self.prep.n_generated);
        let shift = self.opts.shift;
        new.par_iter_mut().for_each(|c| {
            c.plain = generate_and_eval(&c.model, prop, crit, n, &c.seeds).map(|x| x.1);
            if let Some(s) = shift {
                if c.plain.is_some() {
                    if let Ok(m) = apply_label_shift(&c.model, s) {
                        c.shifted = generate_and_eval(&m, prop, crit, n, &c.seeds).map(|x| x.1);
                    }
                }
            }
        });
        let start = self.candidates.len();
        self.candidates.extend(new);
        (start..self.candidates.len()).collect()
    }

    fn witness(&self, p: &PairScore, dags: &[Dag]) -> Result<NeighborPair> {
        let (ca, cb) = (&self.candidates[p.a], &self.candidates[p.b]);
        let scm_a = ca.model.clone();
        let scm_b = match self.opts.shift {
            Some(s) => apply_label_shift(&cb.model, s)?,
            None => cb.model.clone(),
        };
        let n = self.prep.n_generated;
        let crit = &self.prep.criterion;
        let regen = |m: &ScmModel, c: &Candidate| {
            generate_and_eval(m, self.prop, crit, n, &c.seeds)
                .ok_or_else(|| Error::InvalidModel("witness could not be regenerated".into()))
        };
        let (dataset_a, eval_a) = regen(&scm_a, ca)?;
        let (dataset_b, eval_b) = regen(&scm_b, cb)?;
        Ok(NeighborPair {
            kind: if self.weights_only {
                WitnessKind::WeightsOnly
            } else {
                WitnessKind::CrossDag
            },
            dag_a: dags[ca.dag].clone(),
            dag_b: dags[cb.dag].clone(),
            scm_a,
            scm_b,
            dataset_a,
            dataset_b,
            edge_diff: edge_diff(&dags[ca.dag], &dags[cb.dag])?,
            side_a: PairSide {
                dag_index: ca.dag,
                draw: ca.draw,
                shifted: false,
                seeds: ca.seeds,
                eval: eval_a,
            },
            side_b: PairSide {
                dag_index: cb.dag,
                draw: cb.draw,
                shifted: self.shifted_models,
                seeds: cb.seeds,
                eval: eval_b,
            },
            eod_diff: p.diff,
        })
    }
}

fn summary(s: &Search, p: &PairScore) -> PairSummary {
    let (a, b) = (&s.candidates[p.a], &s.candidates[p.b]);
    PairSummary {
        dag_a: a.dag,
        draw_a: a.draw,
        dag_b: b.dag,
        draw_b: b.draw,
        eod_diff: p.diff,
    }
}

/// Discovers the equivalence class of `input` and searches it.
pub fn search(
    input: &Dataset,
    prop: &PropertySpec,
    algorithm: DiscoveryAlgorithm,
    opts: &SearchOptions,
) -> Result<RobustnessVerdict> {
    let cpdag = discover(input, algorithm, opts.alpha)?;
    search_with_cpdag(input, prop, &cpdag, opts)
}

/// Searches the equivalence class of a given CPDAG.
pub fn search_with_cpdag(
    input: &Dataset,
    prop: &PropertySpec,
    cpdag: &Cpdag,
    opts: &SearchOptions,
) -> Result<RobustnessVerdict> {
    let started = Instant::now();
    let prep = prepare(input, opts)?;
    let dags = enumerate_dags_with_cap(cpdag, opts.extension_cap)?;
    let fits: Vec<ScmFit> = dags
        .par_iter()
        .map(|d| fit_scm(d, input))
        .collect::<Result<_>>()?;
    let mut flags = prep.flags.clone();
    for (i, f) in fits.iter().enumerate() {
        flags.extend(f.flags.iter().cloned().map(|flag| SearchFlag::Scm {
            dag: i,
            scm_flag: flag,
        }));
    }

    let rates: Vec<f64> = fits
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            sample(
                &f.model,
                prep.n_generated,
                derive_path(opts.seed, &[USABLE, i as u64]),
            )
            .and_then(|s| accept_rate(&prep.criterion, &s.data))
            .unwrap_or(0.0)
        })
        .collect();
    let usable: Vec<usize> = (0..dags.len())
        .filter(|&i| rates[i] >= MIN_ACCEPT_RATE)
        .collect();
    if usable.is_empty() {
        let best_rate = rates.iter().copied().fold(0.0, f64::max);
        return Err(Error::UngeneratableDistribution { best_rate });
    }
    if usable.len() < dags.len() {
        flags.push(SearchFlag::UnusableDags {
            count: dags.len() - usable.len(),
        });
    }
    let weights_only = usable.len() == 1;
    if weights_only {
        flags.push(SearchFlag::WeightsOnlyNeighborhood);
    }

    let prop_on_input = eval_property_split(
        prop,
        &prep.split,
        derive_path(opts.seed, &[TRAIN, u64::MAX]),
    )
    .ok();

    let mut s = Search {
        prop,
        opts,
        prep: &prep,
        fits,
        shifted_models: opts.shift.is_some(),
        weights_only,
        candidates: Vec::new(),
        draws_used: vec![0; dags.len()],
    };

    let mut best: Option<PairScore> = None;
    let mut history = Vec::new();
    let mut round = 0;
    let mut status = VerdictStatus::RobustWithinBudget;
    let mut found: Option<PairScore> = None;
    let mut focus: Vec<usize> = usable.clone();
    let mut jobs: Vec<(usize, Option<usize>, usize)> = usable
        .iter()
        .map(|&d| (d, None, opts.round1_draws))
        .collect();

    loop {
        if started.elapsed() >= opts.timeout {
            status = VerdictStatus::Timeout;
            break;
        }
        let fresh = s.add_draws(&jobs, round);
        round += 1;
        if fresh.is_empty() {
            break;
        }
        let pool: Vec<usize> = (0..s.candidates.len())
            .filter(|&i| focus.contains(&s.candidates[i].dag))
            .collect();
        let mut round_violation: Option<PairScore> = None;
        for (a, b) in s.pairs(&pool, &fresh) {
            let Some(ps) = s.score(a, b) else { continue };
            if ps.violation && round_violation.as_ref().is_none_or(|v| ps.diff > v.diff) {
                round_violation = Some(PairScore { ..ps });
                continue;
            }
            if best.as_ref().is_none_or(|bp| ps.diff > bp.diff) {
                best = Some(ps);
            }
        }
        if let Some(v) = round_violation {
            if best.as_ref().is_none_or(|bp| v.diff > bp.diff) {
                best = Some(PairScore { ..v });
            }
            history.push(best.as_ref().map_or(0.0, |b| b.diff));
            found = Some(v);
            status = VerdictStatus::Violation;
            break;
        }
        history.push(best.as_ref().map_or(0.0, |b| b.diff));
        let Some(bp) = best.as_ref() else { break };
        let (da, db) = (s.candidates[bp.a].dag, s.candidates[bp.b].dag);
        focus = if da == db { vec![da] } else { vec![da, db] };
        jobs = vec![
            (da, Some(bp.a), opts.draws_per_round),
            (db, Some(bp.b), opts.draws_per_round),
        ];
    }

    let (witness, prop_truth) = match &found {
        Some(v) => {
            let mut w = s.witness(v, &dags)?;
            if !w.side_a.eval.prop.holds && w.side_b.eval.prop.holds {
                std::mem::swap(&mut w.dag_a, &mut w.dag_b);
                std::mem::swap(&mut w.scm_a, &mut w.scm_b);
                std::mem::swap(&mut w.dataset_a, &mut w.dataset_b);
                std::mem::swap(&mut w.side_a, &mut w.side_b);
            }
            let truth = (w.side_a.eval.prop.holds, w.side_b.eval.prop.holds);
            (Some(w), Some(truth))
        }
        None => (None, None),
    };
    Ok(RobustnessVerdict {
        status,
        mode: opts.mode,
        epsilon: opts.epsilon,
        witness,
        prop_truth,
        prop_on_input,
        max_observed_eod_diff: best.as_ref().map_or(0.0, |b| b.diff),
        best_pair: best.as_ref().map(|b| summary(&s, b)),
        diff_history: history,
        iterations: round,
        candidates_evaluated: s.candidates.len(),
        n_dags: dags.len(),
        usable_dags: usable,
        dags,
        cpdag: cpdag.clone(),
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptRateRow {
    pub algorithm: String,
    pub n_dags: usize,
    pub avg: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Mean nearest-centroid distance of the generated rows.
    pub dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptRateReport {
    pub rows: Vec<AcceptRateRow>,
    pub validator: ValidatorQuality,
    pub threshold: f64,
    pub n_generated: usize,
}

fn summarize(name: &str, per_dag: &[(f64, f64)]) -> AcceptRateRow {
    let n = per_dag.len().max(1) as f64;
    let rates: Vec<f64> = per_dag.iter().map(|r| r.0).collect();
    let avg = rates.iter().sum::<f64>() / n;
    let std = (rates.iter().map(|r| (r - avg).powi(2)).sum::<f64>() / n).sqrt();
    AcceptRateRow {
        algorithm: name.to_string(),
        n_dags: per_dag.len(),
        avg,
        std,
        min: rates.iter().copied().fold(f64::INFINITY, f64::min),
        max: rates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        dist: per_dag.iter().map(|r| r.1).sum::<f64>() / n,
    }
}

fn rate_and_dist(model: &ScmModel, prep: &Prepared, seed: u64) -> Result<(f64, f64)> {
    let data = sample(model, prep.n_generated, seed)?.data;
    let dist = prep.criterion.clusters.nearest_distances(&data)?;
    let rate = dist
        .iter()
        .filter(|&&d| d <= prep.criterion.threshold)
        .count() as f64
        / dist.len() as f64;
    Ok((rate, dist.iter().sum::<f64>() / dist.len() as f64))
}

/// Success rates of generated data per discovery algorithm, plus the RND and
/// EQ weight baselines on the first algorithm's DAGs.
pub fn accept_rate_report(
    input: &Dataset,
    algorithms: &[DiscoveryAlgorithm],
    opts: &SearchOptions,
) -> Result<AcceptRateReport> {
    let prep = prepare(input, opts)?;
    let mut rows = Vec::new();
    let mut baseline_fits: Option<Vec<ScmFit>> = None;
    for (a, &alg) in algorithms.iter().enumerate() {
        let cpdag = discover(input, alg, opts.alpha)?;
        let dags = enumerate_dags_with_cap(&cpdag, opts.extension_cap)?;
        let fits: Vec<ScmFit> = dags
            .par_iter()
            .map(|d| fit_scm(d, input))
            .collect::<Result<_>>()?;
        let per_dag: Vec<(f64, f64)> = fits
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                rate_and_dist(
                    &f.model,
                    &prep,
                    derive_path(opts.seed, &[USABLE, a as u64, i as u64]),
                )
            })
            .collect::<Result<_>>()?;
        rows.push(summarize(alg.name(), &per_dag));
        if baseline_fits.is_none() {
            baseline_fits = Some(fits);
        }
    }
    if let Some(fits) = baseline_fits {
        for (m, mode) in [BaselineMode::Rnd, BaselineMode::Eq]
            .into_iter()
            .enumerate()
        {
            let per_dag: Vec<(f64, f64)> = fits
                .par_iter()
                .enumerate()
                .map(|(i, f)| {
                    let path = [0xBA5E, m as u64, i as u64];
                    let model = baseline_weights(&f.model, mode, derive_path(opts.seed, &path));
                    rate_and_dist(
                        &model,
                        &prep,
                        derive_path(opts.seed, &[USABLE, 0xBA5E, m as u64, i as u64]),
                    )
                })
                .collect::<Result<_>>()?;
            rows.push(summarize(mode.name(), &per_dag));
        }
    }
    let probe = uniform_probe(
        &prep.split.train,
        prep.n_generated.max(1000),
        derive_path(opts.seed, &[0x9B]),
    )?;
    let validator = validator_quality(&prep.criterion, &prep.split.test, &probe)?;
    Ok(AcceptRateReport {
        rows,
        validator,
        threshold: prep.criterion.threshold,
        n_generated: prep.n_generated,
    })
}
