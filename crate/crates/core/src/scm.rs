//! Generalized-linear structural causal models over a DAG.
//!
//! Each node is fitted on its DAG parents with a family chosen by its kind:
//! Gaussian (identity link) for continuous features, Poisson (log link) for
//! counts and Bernoulli (logit link) for booleans and the label. Weight
//! uncertainty is a Laplace approximation: the penalized MLE plus the inverse
//! observed Fisher information.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind, Schema};
use crate::discovery::Dag;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

/// L2 penalty on every GLM coefficient, intercept included.
pub const RIDGE: f64 = 1e-4;
/// Poisson rates above this are clamped while sampling.
pub const MAX_POISSON_RATE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeModel {
    pub node: String,
    pub kind: FeatureKind,
    pub parents: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Present iff `kind` is continuous.
    pub noise_sd: Option<f64>,
}

impl NodeModel {
    fn linear(&self, parent_values: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(parent_values)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawScm {
    schema: Schema,
    dag: Dag,
    nodes: Vec<NodeModel>,
    #[serde(default)]
    label_shift: f64,
}

/// One node model per graph node, indexed like the DAG's nodes (features in
/// schema order, then the label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScm", into = "RawScm")]
pub struct ScmModel {
    schema: Arc<Schema>,
    dag: Dag,
    nodes: Vec<NodeModel>,
    /// Upper bound of the uniform term added to the label probability.
    label_shift: f64,
    parent_idx: Vec<Vec<usize>>,
}

impl TryFrom<RawScm> for ScmModel {
    type Error = Error;
    fn try_from(raw: RawScm) -> Result<Self> {
        let m = ScmModel::new(Arc::new(raw.schema), raw.dag, raw.nodes)?;
        if !(0.0..=1.0).contains(&raw.label_shift) {
            return Err(Error::InvalidShift(raw.label_shift));
        }
        Ok(ScmModel {
            label_shift: raw.label_shift,
            ..m
        })
    }
}

impl From<ScmModel> for RawScm {
    fn from(m: ScmModel) -> Self {
        RawScm {
            schema: (*m.schema).clone(),
            dag: m.dag,
            nodes: m.nodes,
            label_shift: m.label_shift,
        }
    }
}

fn check_dag_matches(schema: &Schema, dag: &Dag) -> Result<()> {
    if dag.nodes() != schema.node_names().as_slice() {
        return Err(Error::InvalidModel(
            "DAG nodes must be the schema features followed by the label".into(),
        ));
    }
    Ok(())
}

impl ScmModel {
    pub fn new(schema: Arc<Schema>, dag: Dag, nodes: Vec<NodeModel>) -> Result<Self> {
        check_dag_matches(&schema, &dag)?;
        let kinds = schema.node_kinds();
        if nodes.len() != dag.n_nodes() {
            return Err(Error::InvalidModel(
                "one node model per DAG node required".into(),
            ));
        }
        let mut parent_idx = Vec::with_capacity(nodes.len());
        for (v, nm) in nodes.iter().enumerate() {
            if nm.node != dag.nodes()[v] {
                return Err(Error::InvalidModel(format!(
                    "node model {v} is `{}`, expected `{}`",
                    nm.node,
                    dag.nodes()[v]
                )));
            }
            if nm.kind != kinds[v] {
                return Err(Error::InvalidModel(format!(
                    "kind mismatch at `{}`",
                    nm.node
                )));
            }
            let pa = dag.parents(v);
            let names: Vec<&String> = pa.iter().map(|&p| &dag.nodes()[p]).collect();
            if nm.parents.iter().collect::<Vec<_>>() != names {
                return Err(Error::InvalidModel(format!(
                    "parents of `{}` differ from the DAG",
                    nm.node
                )));
            }
            if nm.weights.len() != nm.parents.len() {
                return Err(Error::InvalidModel(format!(
                    "`{}` has {} weights for {} parents",
                    nm.node,
                    nm.weights.len(),
                    nm.parents.len()
                )));
            }
            let continuous = nm.kind == FeatureKind::Continuous;
            match nm.noise_sd {
                Some(sd) if continuous && sd >= 0.0 && sd.is_finite() => {}
                None if !continuous => {}
                _ => {
                    return Err(Error::InvalidModel(format!(
                        "`{}`: noise_sd must be present (and >= 0) exactly for continuous nodes",
                        nm.node
                    )))
                }
            }
            parent_idx.push(pa);
        }
        Ok(Self {
            schema,
            dag,
            nodes,
            label_shift: 0.0,
            parent_idx,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn nodes(&self) -> &[NodeModel] {
        &self.nodes
    }

    pub fn label_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn label_shift(&self) -> f64 {
        self.label_shift
    }

    /// Bias followed by weights, per node.
    pub fn coefficients(&self) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .map(|n| {
                std::iter::once(n.bias)
                    .chain(n.weights.iter().copied())
                    .collect()
            })
            .collect()
    }

    fn with_coefficients(&self, coefs: &[Vec<f64>]) -> ScmModel {
        let mut out = self.clone();
        for (nm, c) in out.nodes.iter_mut().zip(coefs) {
            nm.bias = c[0];
            nm.weights.copy_from_slice(&c[1..]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePosterior {
    pub node: String,
    /// Bias followed by weights.
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPosterior {
    pub nodes: Vec<NodePosterior>,
}

impl WeightPosterior {
    /// Same covariances, centered on `model`'s coefficients.
    pub fn recentered(&self, model: &ScmModel) -> WeightPosterior {
        let mut out = self.clone();
        for (np, c) in out.nodes.iter_mut().zip(model.coefficients()) {
            np.mean = c;
        }
        out
    }

    pub fn standard_errors(&self) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .map(|np| {
                (0..np.mean.len())
                    .map(|i| np.cov[i][i].max(0.0).sqrt())
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum ScmFlag {
    /// Complete separation in a Bernoulli node; the ridge keeps it finite.
    Separation {
        node: String,
    },
    ZeroVarianceParent {
        node: String,
        parent: String,
    },
    NonConvergence {
        node: String,
    },
    CovarianceClipped {
        node: String,
    },
    PoissonRateClamped {
        node: String,
    },
}

#[derive(Debug, Clone)]
pub struct ScmFit {
    pub model: ScmModel,
    pub posterior: WeightPosterior,
    pub flags: Vec<ScmFlag>,
}

struct GlmFit {
    beta: DVector<f64>,
    cov: DMatrix<f64>,
    noise_sd: Option<f64>,
    converged: bool,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn invert_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let k = m.nrows();
    let inv = match m.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => m
            .clone()
            .pseudo_inverse(1e-12)
            .unwrap_or_else(|_| DMatrix::zeros(k, k)),
    };
    (&inv + inv.transpose()) * 0.5
}

fn fit_gaussian(x: &DMatrix<f64>, y: &DVector<f64>) -> GlmFit {
    let n = x.nrows() as f64;
    let k = x.ncols();
    let gram = x.transpose() * x + DMatrix::identity(k, k) * RIDGE;
    let xty = x.transpose() * y;
    let gram_inv = invert_spd(&gram);
    let beta = &gram_inv * xty;
    let resid = y - x * &beta;
    let sigma2 = resid.norm_squared() / n;
    GlmFit {
        cov: gram_inv * sigma2,
        beta,
        noise_sd: Some(sigma2.sqrt()),
        converged: true,
    }
}

#[derive(Clone, Copy)]
enum Family {
    Poisson,
    Bernoulli,
}

impl Family {
    fn mean(self, eta: f64) -> f64 {
        match self {
            Family::Poisson => eta.min(700.0).exp(),
            Family::Bernoulli => sigmoid(eta),
        }
    }

    fn loglik(self, eta: f64, y: f64) -> f64 {
        match self {
            Family::Poisson => y * eta - eta.min(700.0).exp(),
            Family::Bernoulli => {
                // y*eta - ln(1 + e^eta), stable for large |eta|
                let softplus = if eta > 0.0 {
                    eta + (-eta).exp().ln_1p()
                } else {
                    eta.exp().ln_1p()
                };
                y * eta - softplus
            }
        }
    }

    fn variance(self, mu: f64) -> f64 {
        match self {
            Family::Poisson => mu,
            Family::Bernoulli => mu * (1.0 - mu),
        }
    }
}

fn penalized_loglik(
    family: Family,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
) -> f64 {
    let eta = x * beta;
    let ll: f64 = eta
        .iter()
        .zip(y.iter())
        .map(|(&e, &yi)| family.loglik(e, yi))
        .sum();
    ll - 0.5 * RIDGE * beta.norm_squared()
}

/// Damped Newton ascent on the ridge-penalized log-likelihood.
fn fit_glm(family: Family, x: &DMatrix<f64>, y: &DVector<f64>) -> GlmFit {
    let k = x.ncols();
    let n = x.nrows() as f64;
    let ybar = (y.sum() / n).max(1e-8);
    let mut beta = DVector::zeros(k);
    beta[0] = match family {
        Family::Poisson => ybar.ln(),
        Family::Bernoulli => {
            let p = ybar.clamp(1e-6, 1.0 - 1e-6);
            (p / (1.0 - p)).ln()
        }
    };
    let mut current = penalized_loglik(family, x, y, &beta);
    let mut converged = false;
    let mut hessian = DMatrix::identity(k, k);
    for _ in 0..200 {
        let eta = x * &beta;
        let mu = eta.map(|e| family.mean(e));
        let w = mu.map(|m| family.variance(m));
        let grad = x.transpose() * (y - &mu) - &beta * RIDGE;
        let mut xw = x.clone();
        for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        hessian = x.transpose() * xw + DMatrix::identity(k, k) * RIDGE;
        let step = match hessian.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => &grad * 1e-3,
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..50 {
            let cand = &beta + &step * t;
            let val = penalized_loglik(family, x, y, &cand);
            if val >= current - 1e-12 {
                beta = cand;
                improved = val > current;
                current = val;
                break;
            }
            t *= 0.5;
        }
        if step.amax() * t < 1e-10 || !improved {
            converged = grad.amax() < 1e-6 * n.max(1.0) || step.amax() * t < 1e-10;
            break;
        }
    }
    let eta = x * &beta;
    let mut xw = x.clone();
    for (mut row, e) in xw.row_iter_mut().zip(eta.iter()) {
        row *= family.variance(family.mean(*e));
    }
    let info = x.transpose() * xw + DMatrix::identity(k, k) * RIDGE;
    if info.iter().all(|v| v.is_finite()) {
        hessian = info;
    }
    GlmFit {
        cov: invert_spd(&hessian),
        beta,
        noise_sd: None,
        converged,
    }
}

fn column_variance(col: &[f64]) -> f64 {
    let n = col.len().max(1) as f64;
    let m = col.iter().sum::<f64>() / n;
    col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
}

/// Fits one GLM per node on its DAG parents.
pub fn fit_scm(dag: &Dag, train: &Dataset) -> Result<ScmFit> {
    if train.is_empty() {
        return Err(Error::TooFewSamples(
            "cannot fit an SCM on an empty dataset".into(),
        ));
    }
    let schema = train.schema_arc().clone();
    check_dag_matches(&schema, dag)?;
    let kinds = schema.node_kinds();
    let p = dag.n_nodes();
    let n = train.n();
    let columns: Vec<Vec<f64>> = (0..p).map(|k| train.node_column(k)).collect();

    let mut nodes = Vec::with_capacity(p);
    let mut posts = Vec::with_capacity(p);
    let mut flags = Vec::new();
    for v in 0..p {
        let name = dag.nodes()[v].clone();
        let parents = dag.parents(v);
        let mut active = Vec::new();
        for &pa in &parents {
            if column_variance(&columns[pa]) < 1e-12 {
                flags.push(ScmFlag::ZeroVarianceParent {
                    node: name.clone(),
                    parent: dag.nodes()[pa].clone(),
                });
            } else {
                active.push(pa);
            }
        }
        let x = DMatrix::from_fn(n, active.len() + 1, |i, c| {
            if c == 0 {
                1.0
            } else {
                columns[active[c - 1]][i]
            }
        });
        let y = DVector::from_column_slice(&columns[v]);
        let fit = match kinds[v] {
            FeatureKind::Continuous => fit_gaussian(&x, &y),
            FeatureKind::Count => fit_glm(Family::Poisson, &x, &y),
            FeatureKind::Boolean => fit_glm(Family::Bernoulli, &x, &y),
        };
        if !fit.converged {
            flags.push(ScmFlag::NonConvergence { node: name.clone() });
        }
        if kinds[v] == FeatureKind::Boolean && !active.is_empty() {
            let eta = &x * &fit.beta;
            let separated = y.iter().any(|&yi| yi == 1.0)
                && y.iter().any(|&yi| yi == 0.0)
                && eta
                    .iter()
                    .zip(y.iter())
                    .all(|(&e, &yi)| (2.0 * yi - 1.0) * e > 0.0);
            if separated {
                flags.push(ScmFlag::Separation { node: name.clone() });
            }
        }

        // Scatter active coefficients back to the full parent list.
        let full = parents.len() + 1;
        let pos: Vec<usize> = std::iter::once(0)
            .chain(
                active
                    .iter()
                    .map(|a| 1 + parents.iter().position(|p| p == a).unwrap()),
            )
            .collect();
        let mut mean = vec![0.0; full];
        let mut cov = vec![vec![0.0; full]; full];
        for (a, &pa) in pos.iter().enumerate() {
            mean[pa] = fit.beta[a];
            for (b, &pb) in pos.iter().enumerate() {
                cov[pa][pb] = fit.cov[(a, b)];
            }
        }
        nodes.push(NodeModel {
            node: name.clone(),
            kind: kinds[v],
            parents: parents.iter().map(|&p| dag.nodes()[p].clone()).collect(),
            weights: mean[1..].to_vec(),
            bias: mean[0],
            noise_sd: fit.noise_sd,
        });
        posts.push(NodePosterior {
            node: name,
            mean,
            cov,
        });
    }
    let model = ScmModel::new(schema, dag.clone(), nodes)?;
    Ok(ScmFit {
        model,
        posterior: WeightPosterior { nodes: posts },
        flags,
    })
}

#[derive(Debug, Clone)]
pub struct Draws {
    pub models: Vec<ScmModel>,
    pub flags: Vec<ScmFlag>,
}

/// `n` models whose coefficients are drawn from the Gaussian posterior;
/// model `i` uses RNG stream `derive_seed(seed, i)`.
pub fn draw_models(scm: &ScmModel, post: &WeightPosterior, n: usize, seed: u64) -> Result<Draws> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "need at least one posterior draw".into(),
        ));
    }
    if post.nodes.len() != scm.nodes.len() {
        return Err(Error::InvalidModel(
            "posterior does not match the model".into(),
        ));
    }
    let mut flags = Vec::new();
    let mut factors = Vec::with_capacity(post.nodes.len());
    for (np, nm) in post.nodes.iter().zip(&scm.nodes) {
        let k = np.mean.len();
        if k != nm.weights.len() + 1 || np.cov.len() != k {
            return Err(Error::InvalidModel(format!(
                "posterior shape mismatch at `{}`",
                nm.node
            )));
        }
        let cov = DMatrix::from_fn(k, k, |a, b| 0.5 * (np.cov[a][b] + np.cov[b][a]));
        let eig = SymmetricEigen::new(cov);
        let scale = eig.eigenvalues.amax().max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < -1e-8 * scale) {
            flags.push(ScmFlag::CovarianceClipped {
                node: nm.node.clone(),
            });
        }
        let sqrt_l = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let mut f = eig.eigenvectors.clone();
        for (mut col, s) in f.column_iter_mut().zip(sqrt_l.iter()) {
            col *= *s;
        }
        factors.push((DVector::from_column_slice(&np.mean), f));
    }
    let models = (0..n)
        .map(|i| {
            let mut rng = rng_from(derive_seed(seed, i as u64));
            let coefs: Vec<Vec<f64>> = factors
                .iter()
                .map(|(mean, f)| {
                    let z =
                        DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                    (mean + f * z).iter().copied().collect()
                })
                .collect();
            scm.with_coefficients(&coefs)
        })
        .collect();
    Ok(Draws { models, flags })
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub data: Dataset,
    pub flags: Vec<ScmFlag>,
}

/// Ancestral sampling; node `k` draws from RNG stream `derive_seed(seed, k)`,
/// so changing one node's mechanism leaves the other nodes' noise intact.
pub fn sample(scm: &ScmModel, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be >= 1".into()));
    }
    let p = scm.nodes.len();
    let label = scm.label_index();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut flags = Vec::new();
    let mut pa_vals = Vec::new();
    for &v in scm.dag.topo_order() {
        let nm = &scm.nodes[v];
        let pa = &scm.parent_idx[v];
        let mut rng = rng_from(derive_seed(seed, v as u64));
        let mut col = Vec::with_capacity(n);
        let mut clamped = false;
        for i in 0..n {
            pa_vals.clear();
            pa_vals.extend(pa.iter().map(|&q| cols[q][i]));
            let eta = nm.linear(&pa_vals);
            let value = match nm.kind {
                FeatureKind::Continuous => {
                    let z: f64 = rng.sample(StandardNormal);
                    eta + nm.noise_sd.unwrap_or(0.0) * z
                }
                FeatureKind::Count => {
                    let mut rate = eta.min(700.0).exp();
                    if rate.is_nan() || rate > MAX_POISSON_RATE {
                        rate = MAX_POISSON_RATE;
                        clamped = true;
                    }
                    if rate < 1e-12 {
                        0.0
                    } else {
                        Poisson::new(rate)
                            .map(|d| d.sample(&mut rng))
                            .unwrap_or(0.0)
                    }
                }
                FeatureKind::Boolean => {
                    let mut prob = sigmoid(eta);
                    if v == label {
                        let u: f64 = rng.random();
                        prob = (prob + u * scm.label_shift).clamp(0.0, 1.0);
                    }
                    let u: f64 = rng.random();
                    if u < prob {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            col.push(value);
        }
        if clamped {
            flags.push(ScmFlag::PoissonRateClamped {
                node: nm.node.clone(),
            });
        }
        cols[v] = col;
    }
    let data = Dataset::from_node_columns(scm.schema.clone(), &cols)?;
    Ok(Sample { data, flags })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub epsilon: f64,
}

/// Prior-probability shift: the label is sampled with probability
/// `clamp(sigmoid(x) + U[0, epsilon], 0, 1)`.
pub fn apply_label_shift(scm: &ScmModel, shift: ShiftSpec) -> Result<ScmModel> {
    if !(0.0..=1.0).contains(&shift.epsilon) {
        return Err(Error::InvalidShift(shift.epsilon));
    }
    if scm.nodes[scm.label_index()].kind != FeatureKind::Boolean {
        return Err(Error::InvalidModel("label node must be Bernoulli".into()));
    }
    let mut out = scm.clone();
    out.label_shift = shift.epsilon;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BaselineMode {
    /// Every weight an independent standard-normal draw.
    Rnd,
    /// One standard-normal draw shared by all weights.
    Eq,
}

impl BaselineMode {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMode::Rnd => "RND",
            BaselineMode::Eq => "EQ",
        }
    }
}

/// Replaces the edge weights; biases and noise scales are kept.
pub fn baseline_weights(scm: &ScmModel, mode: BaselineMode, seed: u64) -> ScmModel {
    let mut rng = rng_from(seed);
    let shared: f64 = rng.sample(StandardNormal);
    let mut out = scm.clone();
    for nm in &mut out.nodes {
        for w in &mut nm.weights {
            *w = match mode {
                BaselineMode::Rnd => rng.sample(StandardNormal),
                BaselineMode::Eq => shared,
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSpec;

    fn schema2() -> Arc<Schema> {
        Arc::new(
            Schema::new(
                vec![
                    FeatureSpec::new("x", FeatureKind::Continuous),
                    FeatureSpec::new("s", FeatureKind::Boolean),
                ],
                "s",
                "y",
            )
            .unwrap(),
        )
    }

    fn names() -> Vec<String> {
        vec!["x".into(), "s".into(), "y".into()]
    }

    #[test]
    fn constant_gaussian_node() {
        let n = 100;
        let rows = (0..n).map(|i| vec![5.0, (i % 2) as f64]).collect();
        let labels = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        let d = Dataset::new(schema2(), rows, labels).unwrap();
        let dag = Dag::new(names(), []).unwrap();
        let fit = fit_scm(&dag, &d).unwrap();
        let x = &fit.model.nodes()[0];
        assert!((x.bias - 5.0).abs() < 1e-5);
        assert!(x.noise_sd.unwrap() < 1e-5);
    }

    #[test]
    fn zero_variance_parent_is_flagged() {
        let n = 60;
        let rows = (0..n).map(|i| vec![3.0, (i % 2) as f64]).collect();
        let labels = (0..n).map(|i| (i % 2) as u8).collect();
        let d = Dataset::new(schema2(), rows, labels).unwrap();
        let dag = Dag::new(names(), [(0, 2)]).unwrap();
        let fit = fit_scm(&dag, &d).unwrap();
        assert_eq!(fit.model.nodes()[2].weights, vec![0.0]);
        assert!(fit
            .flags
            .iter()
            .any(|f| matches!(f, ScmFlag::ZeroVarianceParent { .. })));
    }

    #[test]
    fn separation_is_flagged_and_finite() {
        let n = 40;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i % 2) as f64]).collect();
        let labels = (0..n).map(|i| (i >= 20) as u8).collect();
        let d = Dataset::new(schema2(), rows, labels).unwrap();
        let dag = Dag::new(names(), [(0, 2)]).unwrap();
        let fit = fit_scm(&dag, &d).unwrap();
        assert!(fit
            .flags
            .iter()
            .any(|f| matches!(f, ScmFlag::Separation { .. })));
        assert!(fit.model.nodes()[2].weights[0].is_finite());
    }

    #[test]
    fn dag_must_match_schema() {
        let d = Dataset::new(schema2(), vec![vec![1.0, 0.0]], vec![1]).unwrap();
        let wrong = Dag::new(vec!["a".into(), "b".into(), "c".into()], []).unwrap();
        assert!(fit_scm(&wrong, &d).is_err());
    }

    #[test]
    fn eq_baseline_shares_one_weight() {
        let n = 200;
        let rows = (0..n)
            .map(|i| vec![(i as f64).sin(), (i % 2) as f64])
            .collect();
        let labels = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        let d = Dataset::new(schema2(), rows, labels).unwrap();
        let dag = Dag::new(names(), [(1, 0), (0, 2), (1, 2)]).unwrap();
        let fit = fit_scm(&dag, &d).unwrap();
        let eq = baseline_weights(&fit.model, BaselineMode::Eq, 3);
        let ws: Vec<f64> = eq.nodes().iter().flat_map(|n| n.weights.clone()).collect();
        assert_eq!(ws.len(), 3);
        assert!(ws.iter().all(|w| *w == ws[0]));
        assert_eq!(
            baseline_weights(&fit.model, BaselineMode::Rnd, 9),
            baseline_weights(&fit.model, BaselineMode::Rnd, 9)
        );
        let shifted = apply_label_shift(&fit.model, ShiftSpec { epsilon: 0.1 }).unwrap();
        assert_eq!(shifted.label_shift(), 0.1);
        assert_eq!(fit.model.label_shift(), 0.0);
        assert!(apply_label_shift(&fit.model, ShiftSpec { epsilon: 1.5 }).is_err());
    }

    #[test]
    fn model_json_roundtrip() {
        let n = 100;
        let rows = (0..n)
            .map(|i| vec![(i as f64).cos(), (i % 2) as f64])
            .collect();
        let labels = (0..n).map(|i| (i % 4 == 0) as u8).collect();
        let d = Dataset::new(schema2(), rows, labels).unwrap();
        let dag = Dag::new(names(), [(1, 0), (0, 2)]).unwrap();
        let fit = fit_scm(&dag, &d).unwrap();
        let json = serde_json::to_string(&fit.model).unwrap();
        let back: ScmModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fit.model);
    }
}
