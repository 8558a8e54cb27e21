//! In-distribution check: k-means over standardized training features and a
//! nearest-centroid distance threshold calibrated on validation rows.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind, ScalerParams};
use crate::error::{Error, Result};
use crate::rng::rng_from;

pub const DEFAULT_K: usize = 100;
const MAX_ITER: usize = 100;
const MOVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Row-major, `k x d`, in standardized space.
    pub centroids: Vec<Vec<f64>>,
    pub scaler: ScalerParams,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.scaler.mean.len()
    }

    fn nearest_sq(&self, z: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (c, cen) in self.centroids.iter().enumerate() {
            let d = sq_dist(z, cen);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }

    /// Euclidean distance from a raw feature row to its nearest centroid.
    pub fn nearest_distance(&self, raw_row: &[f64]) -> f64 {
        let mut z = vec![0.0; raw_row.len()];
        self.scaler.transform_row_into(raw_row, &mut z);
        self.nearest_sq(&z).1.sqrt()
    }

    pub fn nearest_distances(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.schema().feature_names() != self.scaler.schema.feature_names() {
            return Err(Error::InvalidSchema(
                "dataset features differ from the clustered data".into(),
            ));
        }
        Ok(data
            .values()
            .par_chunks(self.dim().max(1))
            .take(data.n())
            .map(|row| self.nearest_distance(row))
            .collect())
    }
}

/// Lloyd's algorithm with k-means++ seeding on standardized features.
pub fn fit_clusters(train: &Dataset, k: usize, seed: u64) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    if train.n() < k {
        return Err(Error::TooFewSamples(format!(
            "k-means with k = {k} needs at least {k} rows, got {}",
            train.n()
        )));
    }
    let scaler = ScalerParams::fit(train);
    let dim = train.d();
    let z = scaler.transform_values(train);
    let points: Vec<&[f64]> = z.chunks(dim).collect();
    let n = points.len();
    let mut rng = rng_from(seed);

    let mut centroids: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // Fewer distinct points than k: duplicate centroids are harmless.
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        };
        let c = points[next].to_vec();
        for (w, p) in d2.iter_mut().zip(&points) {
            *w = w.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }

    let mut model = ClusterModel { centroids, scaler };
    for _ in 0..MAX_ITER {
        let assign: Vec<usize> = points.par_iter().map(|p| model.nearest_sq(p).0).collect();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        let mut moved: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            moved = moved.max(sq_dist(&new, &model.centroids[c]).sqrt());
            model.centroids[c] = new;
        }
        if moved < MOVE_TOL {
            break;
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCriterion {
    pub clusters: ClusterModel,
    pub threshold: f64,
}

/// Threshold = mean nearest-centroid distance over the validation rows.
pub fn calibrate_threshold(
    clusters: ClusterModel,
    validation: &Dataset,
) -> Result<AcceptanceCriterion> {
    if validation.is_empty() {
        return Err(Error::TooFewSamples("empty validation set".into()));
    }
    let dist = clusters.nearest_distances(validation)?;
    let threshold = dist.iter().sum::<f64>() / dist.len() as f64;
    Ok(AcceptanceCriterion {
        clusters,
        threshold,
    })
}

impl AcceptanceCriterion {
    pub fn accepts(&self, raw_row: &[f64]) -> bool {
        self.clusters.nearest_distance(raw_row) <= self.threshold
    }

    pub fn accepted_mask(&self, samples: &Dataset) -> Result<Vec<bool>> {
        Ok(self
            .clusters
            .nearest_distances(samples)?
            .into_iter()
            .map(|d| d <= self.threshold)
            .collect())
    }

    pub fn to_json_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Fraction of rows within the threshold; 0 for an empty dataset.
pub fn accept_rate(crit: &AcceptanceCriterion, samples: &Dataset) -> Result<f64> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mask = crit.accepted_mask(samples)?;
    Ok(mask.iter().filter(|&&a| a).count() as f64 / mask.len() as f64)
}

/// Accepted rows in their original order.
pub fn filter_samples(crit: &AcceptanceCriterion, samples: &Dataset) -> Result<Dataset> {
    let mask = crit.accepted_mask(samples)?;
    let keep: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| i)
        .collect();
    Ok(samples.select_rows(&keep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatorQuality {
    /// Accept rate on held-out real rows.
    pub tpr: f64,
    /// Accept rate on the uniform random probe.
    pub fnr: f64,
}

pub fn validator_quality(
    crit: &AcceptanceCriterion,
    held_out: &Dataset,
    random_probe: &Dataset,
) -> Result<ValidatorQuality> {
    if held_out.is_empty() || random_probe.is_empty() {
        return Err(Error::TooFewSamples(
            "validator quality needs nonempty inputs".into(),
        ));
    }
    Ok(ValidatorQuality {
        tpr: accept_rate(crit, held_out)?,
        fnr: accept_rate(crit, random_probe)?,
    })
}

/// Uniform rows over `[min - 2 sd, max + 2 sd]` of each reference column.
/// Boolean columns (and the label) are uniform over {0, 1}; count columns are
/// rounded and floored at zero.
pub fn uniform_probe(reference: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if reference.is_empty() {
        return Err(Error::TooFewSamples("empty reference for the probe".into()));
    }
    let schema = reference.schema_arc().clone();
    let ranges: Vec<(f64, f64)> = (0..reference.d())
        .map(|j| {
            let col = reference.column(j);
            let m = col.len() as f64;
            let mean = col.iter().sum::<f64>() / m;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo - 2.0 * sd, hi + 2.0 * sd)
        })
        .collect();
    let mut rng = rng_from(seed);
    let mut values = Vec::with_capacity(n * reference.d());
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        for (f, &(lo, hi)) in schema.features().iter().zip(&ranges) {
            let u: f64 = rng.random();
            let v = lo + u * (hi - lo);
            values.push(match f.kind {
                FeatureKind::Continuous => v,
                FeatureKind::Count => v.round().max(0.0),
                FeatureKind::Boolean => (u < 0.5) as u8 as f64,
            });
        }
        labels.push(rng.random_bool(0.5) as u8);
    }
    Dataset::from_flat(Arc::clone(&schema), values, labels)
}
