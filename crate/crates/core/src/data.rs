//! Tabular datasets with a typed schema, a boolean sensitive feature and a
//! boolean label (favorable outcome = 1).

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Count,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawSchema {
    features: Vec<FeatureSpec>,
    sensitive: String,
    label: String,
}

/// Ordered feature list plus the sensitive and label designations.
///
/// The label is kept out of `features`; when a schema file lists the label
/// among its features it is stripped on load. Graph nodes are the features in
/// schema order followed by the label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct Schema {
    features: Vec<FeatureSpec>,
    sensitive: String,
    label: String,
}

impl TryFrom<RawSchema> for Schema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        let mut features = raw.features;
        if let Some(pos) = features.iter().position(|f| f.name == raw.label) {
            if features[pos].kind != FeatureKind::Boolean {
                return Err(Error::InvalidSchema(format!(
                    "label `{}` must be boolean",
                    raw.label
                )));
            }
            features.remove(pos);
        }
        Schema::new(features, raw.sensitive, raw.label)
    }
}

impl Schema {
    pub fn new(
        features: Vec<FeatureSpec>,
        sensitive: impl Into<String>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let sensitive = sensitive.into();
        let label = label.into();
        if features.is_empty() {
            return Err(Error::InvalidSchema("no features".into()));
        }
        let mut seen = HashSet::new();
        for f in &features {
            if f.name.is_empty() {
                return Err(Error::InvalidSchema("empty feature name".into()));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate feature `{}`",
                    f.name
                )));
            }
        }
        if sensitive == label {
            return Err(Error::InvalidSchema(
                "sensitive feature and label must differ".into(),
            ));
        }
        if seen.contains(label.as_str()) {
            return Err(Error::InvalidSchema(format!(
                "label `{label}` listed as a feature"
            )));
        }
        match features.iter().find(|f| f.name == sensitive) {
            None => {
                return Err(Error::InvalidSchema(format!(
                    "sensitive feature `{sensitive}` not in features"
                )))
            }
            Some(f) if f.kind != FeatureKind::Boolean => {
                return Err(Error::InvalidSchema(format!(
                    "sensitive feature `{sensitive}` must be boolean"
                )))
            }
            _ => {}
        }
        Ok(Self {
            features,
            sensitive,
            label,
        })
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn sensitive(&self) -> &str {
        &self.sensitive
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn sensitive_index(&self) -> usize {
        self.feature_index(&self.sensitive)
            .expect("validated at construction")
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Features followed by the label.
    pub fn node_names(&self) -> Vec<String> {
        let mut names = self.feature_names();
        names.push(self.label.clone());
        names
    }

    pub fn node_kinds(&self) -> Vec<FeatureKind> {
        let mut kinds: Vec<_> = self.features.iter().map(|f| f.kind).collect();
        kinds.push(FeatureKind::Boolean);
        kinds
    }

    /// Same names with every non-boolean feature relabelled continuous.
    pub fn with_continuous_numeric(&self) -> Schema {
        let mut s = self.clone();
        for f in &mut s.features {
            if f.kind == FeatureKind::Count {
                f.kind = FeatureKind::Continuous;
            }
        }
        s
    }
}

fn check_value(kind: FeatureKind, v: f64, row: usize, column: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            value: v.to_string(),
        });
    }
    match kind {
        FeatureKind::Continuous => Ok(()),
        FeatureKind::Count if v >= 0.0 && v.fract() == 0.0 => Ok(()),
        FeatureKind::Count => Err(Error::InvalidCount {
            row,
            column: column.to_string(),
            value: v,
        }),
        FeatureKind::Boolean if v == 0.0 || v == 1.0 => Ok(()),
        FeatureKind::Boolean => Err(Error::InvalidBoolean {
            row,
            column: column.to_string(),
            value: v,
        }),
    }
}

/// Row-major feature matrix plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<Schema>,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(schema: Arc<Schema>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let d = schema.n_features();
        if rows.len() != labels.len() {
            return Err(Error::InvalidSchema(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidSchema(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(schema, values, labels)
    }

    pub fn from_flat(schema: Arc<Schema>, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let d = schema.n_features();
        if values.len() != labels.len() * d {
            return Err(Error::InvalidSchema(
                "value count does not match n x d".into(),
            ));
        }
        for (i, row) in values.chunks(d.max(1)).enumerate() {
            for (f, v) in schema.features().iter().zip(row) {
                check_value(f.kind, *v, i, &f.name)?;
            }
        }
        for (i, &y) in labels.iter().enumerate() {
            if y > 1 {
                return Err(Error::InvalidBoolean {
                    row: i,
                    column: schema.label().to_string(),
                    value: y as f64,
                });
            }
        }
        Ok(Self {
            schema,
            values,
            labels,
        })
    }

    /// Builds a dataset from per-node columns (features in schema order, then label).
    pub fn from_node_columns(schema: Arc<Schema>, columns: &[Vec<f64>]) -> Result<Self> {
        let d = schema.n_features();
        if columns.len() != d + 1 {
            return Err(Error::InvalidSchema(format!(
                "expected {} node columns, got {}",
                d + 1,
                columns.len()
            )));
        }
        let n = columns[d].len();
        let mut values = Vec::with_capacity(n * d);
        for i in 0..n {
            for col in &columns[..d] {
                values.push(col[i]);
            }
        }
        let mut labels = Vec::with_capacity(n);
        for (i, &y) in columns[d].iter().enumerate() {
            if y != 0.0 && y != 1.0 {
                return Err(Error::InvalidBoolean {
                    row: i,
                    column: schema.label().to_string(),
                    value: y,
                });
            }
            labels.push(y as u8);
        }
        Self::from_flat(schema, values, labels)
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        Self {
            schema,
            values: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.schema.n_features()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.d().max(1)).take(self.n())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Feature column `k`, or the label column when `k == d`.
    pub fn node_column(&self, k: usize) -> Vec<f64> {
        if k == self.d() {
            self.labels.iter().map(|&y| y as f64).collect()
        } else {
            self.column(k)
        }
    }

    pub fn groups(&self) -> Vec<u8> {
        let s = self.schema.sensitive_index();
        self.rows().map(|r| r[s] as u8).collect()
    }

    pub fn has_both_labels(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }

    pub fn has_both_groups(&self) -> bool {
        let g = self.groups();
        g.contains(&0) && g.contains(&1)
    }

    /// A dataset missing a label class or a sensitive group.
    pub fn is_degenerate(&self) -> bool {
        !(self.has_both_labels() && self.has_both_groups())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let d = self.d();
        let mut values = Vec::with_capacity(idx.len() * d);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            schema: self.schema.clone(),
            values,
            labels,
        }
    }

    /// Same values under a schema with identical names; kinds are re-checked.
    pub fn with_schema(&self, schema: Arc<Schema>) -> Result<Dataset> {
        if schema.node_names() != self.schema.node_names() {
            return Err(Error::InvalidSchema("schema names differ".into()));
        }
        Dataset::from_flat(schema, self.values.clone(), self.labels.clone())
    }

    pub fn positive_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.labels.iter().map(|&y| y as f64).sum::<f64>() / self.n() as f64
    }
}

pub fn read_csv<R: Read>(reader: R, schema: Arc<Schema>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let feature_cols = schema
        .features()
        .iter()
        .map(|f| find(&f.name))
        .collect::<Result<Vec<_>>>()?;
    let label_col = find(schema.label())?;

    let d = schema.n_features();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            if raw.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    column: name.to_string(),
                });
            }
            raw.parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        for (f, &col) in schema.features().iter().zip(&feature_cols) {
            let v = parse(col, &f.name)?;
            check_value(f.kind, v, row, &f.name)?;
            values.push(v);
        }
        let y = parse(label_col, schema.label())?;
        check_value(FeatureKind::Boolean, y, row, schema.label())?;
        labels.push(y as u8);
    }
    debug_assert_eq!(values.len(), labels.len() * d);
    Dataset::from_flat(schema, values, labels)
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), Arc::new(schema.clone()))
}

pub fn write_csv_to<W: Write>(writer: W, d: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(d.schema().node_names())?;
    let mut record = Vec::with_capacity(d.d() + 1);
    for (row, &y) in d.rows().zip(d.labels()) {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(y.to_string());
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, d: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(std::io::BufWriter::new(file), d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            fractions: [0.6, 0.2, 0.2],
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
            return Err(Error::InvalidSplit(format!(
                "fractions {:?} must lie in (0, 1)",
                self.fractions
            )));
        }
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(format!(
                "fractions sum to {sum}, not 1"
            )));
        }
        Ok(())
    }
}

/// Train/validation/test partition of a dataset.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    /// Row indices of each part in the source dataset, ascending.
    pub indices: [Vec<usize>; 3],
    /// Some part lacks a label class or a sensitive group.
    pub degenerate: bool,
}

pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<DataSplit> {
    spec.validate()?;
    let n = d.n();
    if n < 10 {
        return Err(Error::TooFewSamples(format!(
            "split needs n >= 10, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(spec.seed));

    let n_train = ((n as f64 * spec.fractions[0]).round() as usize).clamp(1, n - 2);
    let n_val = ((n as f64 * spec.fractions[1]).round() as usize).clamp(1, n - n_train - 1);

    let mut parts = [
        order[..n_train].to_vec(),
        order[n_train..n_train + n_val].to_vec(),
        order[n_train + n_val..].to_vec(),
    ];
    for p in &mut parts {
        p.sort_unstable();
    }
    let train = d.select_rows(&parts[0]);
    let validation = d.select_rows(&parts[1]);
    let test = d.select_rows(&parts[2]);
    let degenerate = [&train, &validation, &test]
        .iter()
        .any(|p| p.is_degenerate());
    Ok(DataSplit {
        train,
        validation,
        test,
        indices: parts,
        degenerate,
    })
}

/// Per-column affine transform fitted by [`standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub schema: Schema,
    pub mean: Vec<f64>,
    /// Population standard deviation; 0 for constant columns.
    pub sd: Vec<f64>,
    /// Boolean columns are passed through unchanged.
    pub scaled: Vec<bool>,
}

impl ScalerParams {
    pub fn fit(d: &Dataset) -> Self {
        let dim = d.d();
        let n = d.n().max(1) as f64;
        let scaled: Vec<bool> = d
            .schema()
            .features()
            .iter()
            .map(|f| f.kind != FeatureKind::Boolean)
            .collect();
        let mut mean = vec![0.0; dim];
        for row in d.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in d.rows() {
            for j in 0..dim {
                let c = row[j] - mean[j];
                var[j] += c * c;
            }
        }
        let mut sd: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
        for j in 0..dim {
            if !scaled[j] {
                mean[j] = 0.0;
                sd[j] = 1.0;
            } else if sd[j] < 1e-12 {
                sd[j] = 0.0;
            }
        }
        Self {
            schema: d.schema().clone(),
            mean,
            sd,
            scaled,
        }
    }

    pub fn transform_value(&self, j: usize, v: f64) -> f64 {
        if !self.scaled[j] {
            v
        } else if self.sd[j] == 0.0 {
            0.0
        } else {
            (v - self.mean[j]) / self.sd[j]
        }
    }

    pub fn transform_row_into(&self, row: &[f64], out: &mut [f64]) {
        for j in 0..row.len() {
            out[j] = self.transform_value(j, row[j]);
        }
    }

    /// Standardized feature matrix (row-major, label excluded).
    pub fn transform_values(&self, d: &Dataset) -> Vec<f64> {
        let mut out = vec![0.0; d.values().len()];
        let dim = d.d();
        for (i, row) in d.rows().enumerate() {
            self.transform_row_into(row, &mut out[i * dim..(i + 1) * dim]);
        }
        out
    }

    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        if d.schema().node_names() != self.schema.node_names() {
            return Err(Error::InvalidSchema(
                "scaler fitted on a different schema".into(),
            ));
        }
        let schema = Arc::new(self.schema.with_continuous_numeric());
        Dataset::from_flat(schema, self.transform_values(d), d.labels().to_vec())
    }

    /// Maps standardized values back to the original scale.
    pub fn inverse(&self, d: &Dataset) -> Result<Dataset> {
        let dim = d.d();
        let mut values = d.values().to_vec();
        for row in values.chunks_mut(dim.max(1)) {
            for j in 0..dim {
                if self.scaled[j] {
                    row[j] = row[j] * self.sd[j] + self.mean[j];
                }
            }
        }
        // Count columns come back as integers up to rounding error.
        for row in values.chunks_mut(dim.max(1)) {
            for (j, f) in self.schema.features().iter().enumerate() {
                if f.kind == FeatureKind::Count && self.sd[j] > 0.0 {
                    let r = row[j].round();
                    if (row[j] - r).abs() < 1e-6 {
                        row[j] = r;
                    }
                }
            }
        }
        Dataset::from_flat(Arc::new(self.schema.clone()), values, d.labels().to_vec())
    }
}

/// Standardizes continuous and count columns to mean 0, sd 1.
pub fn standardize(d: &Dataset) -> (Dataset, ScalerParams) {
    let params = ScalerParams::fit(d);
    let out = params
        .transform(d)
        .expect("scaler fitted on the same schema");
    (out, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(
                vec![
                    FeatureSpec::new("age", FeatureKind::Count),
                    FeatureSpec::new("hours", FeatureKind::Continuous),
                    FeatureSpec::new("sex", FeatureKind::Boolean),
                ],
                "sex",
                "income",
            )
            .unwrap(),
        )
    }

    #[test]
    fn parses_small_csv() {
        let csv = "age,hours,sex,income\n30,40.5,1,1\n22,20,0,0\n51,35.25,1,0\n";
        let d = read_csv(csv.as_bytes(), schema()).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.row(0), &[30.0, 40.5, 1.0]);
        assert_eq!(d.labels(), &[1, 0, 0]);
    }

    #[test]
    fn column_order_may_differ_from_schema() {
        let csv = "income,sex,hours,age\n1,1,40,30\n";
        let d = read_csv(csv.as_bytes(), schema()).unwrap();
        assert_eq!(d.row(0), &[30.0, 40.0, 1.0]);
    }

    #[test]
    fn rejects_bad_cells() {
        let bad_bool = "age,hours,sex,income\n30,40,2,1\n";
        assert!(matches!(
            read_csv(bad_bool.as_bytes(), schema()),
            Err(Error::InvalidBoolean { .. })
        ));
        let neg_count = "age,hours,sex,income\n-3,40,1,1\n";
        assert!(matches!(
            read_csv(neg_count.as_bytes(), schema()),
            Err(Error::InvalidCount { .. })
        ));
        let missing_col = "age,hours,income\n3,40,1\n";
        assert!(matches!(
            read_csv(missing_col.as_bytes(), schema()),
            Err(Error::MissingColumn(c)) if c == "sex"
        ));
        let junk = "age,hours,sex,income\n3,abc,1,1\n";
        assert!(matches!(
            read_csv(junk.as_bytes(), schema()),
            Err(Error::Parse { .. })
        ));
        let empty = "age,hours,sex,income\n3,,1,1\n";
        assert!(matches!(
            read_csv(empty.as_bytes(), schema()),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn schema_validation() {
        let f = || {
            vec![
                FeatureSpec::new("a", FeatureKind::Continuous),
                FeatureSpec::new("s", FeatureKind::Boolean),
            ]
        };
        assert!(Schema::new(f(), "s", "y").is_ok());
        assert!(Schema::new(f(), "a", "y").is_err());
        assert!(Schema::new(f(), "s", "s").is_err());
        assert!(Schema::new(f(), "missing", "y").is_err());
        let mut dup = f();
        dup.push(FeatureSpec::new("a", FeatureKind::Boolean));
        assert!(Schema::new(dup, "s", "y").is_err());
    }

    #[test]
    fn schema_json_strips_label_from_features() {
        let json = r#"{"features":[{"name":"a","kind":"count"},{"name":"s","kind":"boolean"},
            {"name":"y","kind":"boolean"}],"sensitive":"s","label":"y"}"#;
        let s: Schema = serde_json::from_str(json).unwrap();
        assert_eq!(s.feature_names(), vec!["a", "s"]);
        assert_eq!(s.node_names(), vec!["a", "s", "y"]);
    }

    fn sized(n: usize, all_positive: bool) -> Dataset {
        let rows = (0..n)
            .map(|i| vec![i as f64, i as f64 * 0.5, (i % 2) as f64])
            .collect();
        let labels = (0..n)
            .map(|i| if all_positive { 1 } else { (i % 3 == 0) as u8 })
            .collect();
        Dataset::new(schema(), rows, labels).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = sized(100, false);
        let spec = SplitSpec {
            fractions: [0.6, 0.2, 0.2],
            seed: 7,
        };
        let a = split(&d, &spec).unwrap();
        assert_eq!((a.train.n(), a.validation.n(), a.test.n()), (60, 20, 20));
        let b = split(&d, &spec).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.train, b.train);
        let mut all: Vec<usize> = a.indices.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn split_flags_degenerate_parts() {
        let d = sized(10, true);
        let s = split(&d, &SplitSpec::default()).unwrap();
        assert!(s.degenerate);
        assert!(split(&sized(9, false), &SplitSpec::default()).is_err());
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let d = sized(20, false);
        let bad = SplitSpec {
            fractions: [0.5, 0.3, 0.3],
            seed: 0,
        };
        assert!(matches!(split(&d, &bad), Err(Error::InvalidSplit(_))));
    }

    #[test]
    fn standardize_basic() {
        let s = Arc::new(
            Schema::new(
                vec![
                    FeatureSpec::new("x", FeatureKind::Continuous),
                    FeatureSpec::new("c", FeatureKind::Count),
                    FeatureSpec::new("s", FeatureKind::Boolean),
                ],
                "s",
                "y",
            )
            .unwrap(),
        );
        let d = Dataset::new(
            s,
            vec![
                vec![1.0, 5.0, 0.0],
                vec![2.0, 5.0, 1.0],
                vec![3.0, 5.0, 1.0],
            ],
            vec![0, 1, 0],
        )
        .unwrap();
        let (z, params) = standardize(&d);
        let x = z.column(0);
        let mean: f64 = x.iter().sum::<f64>() / 3.0;
        let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
        assert_eq!(z.column(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(params.sd[1], 0.0);
        assert_eq!(z.column(2), d.column(2));
        assert_eq!(params.transform(&d).unwrap(), z);
        assert_eq!(params.inverse(&z).unwrap(), d);
    }
}
