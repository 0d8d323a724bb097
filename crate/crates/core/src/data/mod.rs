//! Tabular datasets: CSV ingestion with a JSON schema, encoding and
//! imputation, stratified folds and F1 metrics.

mod folds;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use folds::{stratified_kfold, stratified_split, FoldPlan};
pub use metrics::{f1_score, F1Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numerical,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ColumnType,
    #[serde(default = "default_true")]
    pub missing_allowed: bool,
}

fn default_true() -> bool {
    true
}

/// Column types and label column of a CSV file.
///
/// Feature columns missing from `columns` are read as numerical. When
/// `classes` is given, labels outside it are rejected and class indices
/// follow its order; otherwise classes are the sorted distinct labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub label: String,
    #[serde(default)]
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub classes: Option<Vec<String>>,
}

impl Schema {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// An encoded feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Feature {
    /// Min-max scaled to `[0, 1]` from the raw range `[min, max]`.
    Numerical { name: String, min: f64, max: f64 },
    /// Label-encoded: value `k` stands for `categories[k]`.
    Categorical { name: String, categories: Vec<String> },
}

impl Feature {
    pub fn name(&self) -> &str {
        match self {
            Feature::Numerical { name, .. } | Feature::Categorical { name, .. } => name,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, Feature::Categorical { .. })
    }

    pub fn encode(&self, token: &str) -> Option<f64> {
        match self {
            Feature::Categorical { categories, .. } => {
                categories.iter().position(|c| c == token).map(|k| k as f64)
            }
            Feature::Numerical { min, max, .. } => {
                let x: f64 = token.trim().parse().ok()?;
                Some(scale(x, *min, *max))
            }
        }
    }

    pub fn decode(&self, value: f64) -> Option<String> {
        match self {
            Feature::Categorical { categories, .. } => {
                categories.get(value as usize).cloned()
            }
            Feature::Numerical { min, max, .. } => Some((min + value * (max - min)).to_string()),
        }
    }
}

fn scale(x: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (x - min) / (max - min)
    } else {
        0.0
    }
}

/// Encoded samples with class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Feature>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

fn is_missing(token: &str) -> bool {
    matches!(token.trim(), "" | "?" | "NA" | "NaN" | "nan")
}

impl Dataset {
    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?, schema)
    }

    pub fn from_csv_str(text: &str, schema: &Schema) -> Result<Self> {
        Self::from_reader(text.as_bytes(), schema)
    }

    pub fn from_reader(reader: impl Read, schema: &Schema) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        let Some(label_col) = header.iter().position(|h| *h == schema.label) else {
            return invalid(format!("label column '{}' not found in header", schema.label));
        };
        if let Some(c) = schema.columns.iter().find(|c| !header.contains(&c.name)) {
            return invalid(format!("schema column '{}' not found in header", c.name));
        }
        let feature_cols: Vec<usize> = (0..header.len()).filter(|&i| i != label_col).collect();
        let specs: Vec<ColumnSpec> = feature_cols
            .iter()
            .map(|&i| {
                schema.column(&header[i]).cloned().unwrap_or(ColumnSpec {
                    name: header[i].clone(),
                    kind: ColumnType::Numerical,
                    missing_allowed: true,
                })
            })
            .collect();

        let mut raw: Vec<Vec<Option<String>>> = Vec::new();
        let mut raw_labels = Vec::new();
        for (r, record) in csv.records().enumerate() {
            let line = r + 2;
            let record = record.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let label = record.get(label_col).unwrap_or("").to_string();
            if is_missing(&label) {
                return Err(Error::Parse {
                    line,
                    message: "missing class label".into(),
                });
            }
            let mut row = Vec::with_capacity(feature_cols.len());
            for (spec, &i) in specs.iter().zip(&feature_cols) {
                let token = record.get(i).unwrap_or("");
                if is_missing(token) {
                    if !spec.missing_allowed {
                        return Err(Error::Parse {
                            line,
                            message: format!("missing value in column '{}'", spec.name),
                        });
                    }
                    row.push(None);
                } else {
                    if spec.kind == ColumnType::Numerical && token.parse::<f64>().map_or(true, |x| !x.is_finite()) {
                        return Err(Error::Parse {
                            line,
                            message: format!("'{token}' in column '{}' is not a number", spec.name),
                        });
                    }
                    row.push(Some(token.to_string()));
                }
            }
            raw.push(row);
            raw_labels.push((line, label));
        }
        if raw.is_empty() {
            return invalid("dataset has no rows");
        }

        let class_names = match &schema.classes {
            Some(c) => c.clone(),
            None => raw_labels
                .iter()
                .map(|(_, l)| l.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        let labels = raw_labels
            .iter()
            .map(|(line, l)| {
                class_names.iter().position(|c| c == l).ok_or_else(|| Error::Parse {
                    line: *line,
                    message: format!("unknown class label '{l}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rows = vec![Vec::with_capacity(specs.len()); raw.len()];
        let mut features = Vec::with_capacity(specs.len());
        for (j, spec) in specs.iter().enumerate() {
            let column: Vec<Option<&str>> = raw.iter().map(|r| r[j].as_deref()).collect();
            let (feature, values) = encode_column(spec, &column)?;
            features.push(feature);
            for (row, v) in rows.iter_mut().zip(values) {
                row.push(v);
            }
        }
        Dataset::new(features, rows, labels, class_names)
    }

    pub fn new(
        features: Vec<Feature>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let m = class_names.len();
        if m < 2 {
            return invalid(format!("need at least two classes, found {m}"));
        }
        if rows.len() != labels.len() {
            return invalid("rows and labels differ in length");
        }
        if let Some(r) = rows.iter().position(|r| r.len() != features.len()) {
            return invalid(format!("row {r} does not match the schema width"));
        }
        let ds = Dataset {
            features,
            rows,
            labels,
            class_names,
        };
        if let Some(c) = ds.class_counts().iter().position(|&k| k == 0) {
            return invalid(format!("class '{}' has no examples", ds.class_names[c]));
        }
        Ok(ds)
    }

    pub fn m(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, sharing this dataset's schema and class set.
    ///
    /// Classes may be absent from the subset.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// True when `other` has the same features and classes.
    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.features == other.features && self.class_names == other.class_names
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        (values[k / 2 - 1] + values[k / 2]) / 2.0
    }
}

/// Encodes one raw column, imputing missing cells (median for numbers,
/// most frequent category otherwise, earliest category on ties).
fn encode_column(spec: &ColumnSpec, column: &[Option<&str>]) -> Result<(Feature, Vec<f64>)> {
    match spec.kind {
        ColumnType::Numerical => {
            let parsed: Vec<Option<f64>> = column
                .iter()
                .map(|t| t.map(|s| s.parse::<f64>().expect("validated while reading")))
                .collect();
            let mut present: Vec<f64> = parsed.iter().flatten().copied().collect();
            if present.is_empty() {
                return invalid(format!("column '{}' has no values", spec.name));
            }
            let fill = median(&mut present);
            let min = present[0];
            let max = present[present.len() - 1];
            let values = parsed
                .iter()
                .map(|v| scale(v.unwrap_or(fill), min, max))
                .collect();
            Ok((
                Feature::Numerical {
                    name: spec.name.clone(),
                    min,
                    max,
                },
                values,
            ))
        }
        ColumnType::Categorical => {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for t in column.iter().flatten() {
                *counts.entry(t).or_default() += 1;
            }
            if counts.is_empty() {
                return invalid(format!("column '{}' has no values", spec.name));
            }
            let categories: Vec<String> = counts.keys().map(|s| s.to_string()).collect();
            let mode = counts
                .iter()
                .enumerate()
                .fold((0, 0), |best, (k, (_, &c))| if c > best.1 { (k, c) } else { best })
                .0;
            let values = column
                .iter()
                .map(|t| match t {
                    Some(s) => categories.iter().position(|c| c == s).expect("seen") as f64,
                    None => mode as f64,
                })
                .collect();
            Ok((
                Feature::Categorical {
                    name: spec.name.clone(),
                    categories,
                },
                values,
            ))
        }
    }
}

/// Names of the datasets shipped with the crate.
pub const BUNDLED: [&str; 3] = ["iris", "wine", "balance-scale"];

/// Loads a dataset shipped with the crate.
pub fn bundled(name: &str) -> Result<Dataset> {
    let (csv, schema) = match name {
        "iris" => (
            include_str!("../../fixtures/iris.csv"),
            include_str!("../../fixtures/iris.schema.json"),
        ),
        "wine" => (
            include_str!("../../fixtures/wine.csv"),
            include_str!("../../fixtures/wine.schema.json"),
        ),
        "balance-scale" => (
            include_str!("../../fixtures/balance-scale.csv"),
            include_str!("../../fixtures/balance-scale.schema.json"),
        ),
        other => {
            return invalid(format!(
                "no bundled dataset '{other}' (available: {})",
                BUNDLED.join(", ")
            ))
        }
    };
    Dataset::from_csv_str(csv, &Schema::from_json(schema)?)
}
