//! Generators and helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use fairprobe::data::{write_csv, Dataset, FeatureKind, FeatureSpec, Schema};
use fairprobe::rng::rng_from;
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn schema(features: &[(&str, FeatureKind)], sensitive: &str, label: &str) -> Arc<Schema> {
    let f = features
        .iter()
        .map(|(n, k)| FeatureSpec::new(*n, *k))
        .collect();
    Arc::new(Schema::new(f, sensitive, label).unwrap())
}

/// Triangle class `{S, M, Y}`: `M = 2 S + N(0, 1)`,
/// `Y ~ Bernoulli(sigmoid(-0.5 + 0.5 S + M))`.
pub fn planted(n: usize, seed: u64) -> Dataset {
    let sch = schema(
        &[("S", FeatureKind::Boolean), ("M", FeatureKind::Continuous)],
        "S",
        "Y",
    );
    let mut rng = rng_from(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let s = if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 };
        let m = 2.0 * s + noise.sample(&mut rng);
        let y = rng.random::<f64>() < sigmoid(-0.5 + 0.5 * s + m);
        rows.push(vec![s, m]);
        labels.push(y as u8);
    }
    Dataset::new(sch, rows, labels).unwrap()
}

/// `S` independent of everything; `Y ~ Bernoulli(sigmoid(-2 + 3 B1 + 3 B2))`.
pub fn null_fixture(n: usize, seed: u64) -> Dataset {
    let sch = schema(
        &[
            ("S", FeatureKind::Boolean),
            ("B1", FeatureKind::Boolean),
            ("B2", FeatureKind::Boolean),
        ],
        "S",
        "Y",
    );
    let mut rng = rng_from(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let s = rng.random_bool(0.5) as u8 as f64;
        let b1 = rng.random_bool(0.5) as u8 as f64;
        let b2 = rng.random_bool(0.5) as u8 as f64;
        let y = rng.random::<f64>() < sigmoid(-2.0 + 3.0 * b1 + 3.0 * b2);
        rows.push(vec![s, b1, b2]);
        labels.push(y as u8);
    }
    Dataset::new(sch, rows, labels).unwrap()
}

/// Several continuous features with linear dependencies, a boolean
/// sensitive feature and a logistic label. Used for accept-rate checks.
pub fn multi_feature(n: usize, seed: u64) -> Dataset {
    let sch = schema(
        &[
            ("S", FeatureKind::Boolean),
            ("A", FeatureKind::Continuous),
            ("B", FeatureKind::Continuous),
            ("C", FeatureKind::Continuous),
            ("D", FeatureKind::Continuous),
        ],
        "S",
        "Y",
    );
    let mut rng = rng_from(seed);
    let e = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let s = rng.random_bool(0.4) as u8 as f64;
        let a = 1.5 * s + e.sample(&mut rng);
        let b = 0.8 * a + 0.5 * e.sample(&mut rng);
        let c = -1.2 * s + 0.5 * e.sample(&mut rng) + 3.0;
        let d = 0.6 * b - 0.7 * c + 0.5 * e.sample(&mut rng);
        let y = rng.random::<f64>() < sigmoid(0.3 + a - 0.5 * d);
        rows.push(vec![s, a, b, c, d]);
        labels.push(y as u8);
    }
    Dataset::new(sch, rows, labels).unwrap()
}

pub fn write_schema(path: &Path, s: &Schema) {
    std::fs::write(path, serde_json::to_string_pretty(s).unwrap()).unwrap();
}

/// Writes `data.csv` and `schema.json` into `dir`.
pub fn write_fixture(dir: &Path, d: &Dataset) -> (PathBuf, PathBuf) {
    let data = dir.join("data.csv");
    let sch = dir.join("schema.json");
    write_csv(&data, d).unwrap();
    write_schema(&sch, d.schema());
    (data, sch)
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairprobe"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
