//! Tabular datasets: schema, CSV loading, standardization, the black-box
//! classifier and kernel-density scores.
//!
//! Every instance keeps two views of its features: `raw` exactly as loaded
//! and `features`, the working space used for neighbor search. The working
//! space equals `raw` until [`Dataset::standardize`] rewrites the flagged
//! columns to `(x - mean) / std`, with the population (1/n) convention.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{io_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Label,
    Id,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutability {
    #[default]
    Free,
    Immutable,
    MonotoneUp,
    MonotoneDown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    #[serde(skip)]
    pub name: String,
    pub role: ColumnRole,
    #[serde(default)]
    pub mutability: Mutability,
    #[serde(default)]
    pub standardize: bool,
}

#[derive(Deserialize)]
struct SchemaFile {
    columns: BTreeMap<String, ColumnSpec>,
}

/// Per-column roles and constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSchema {
    columns: Vec<ColumnSpec>,
}

impl FeatureSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate column `{}`", c.name)));
            }
            if c.standardize && c.role != ColumnRole::Feature {
                return Err(Error::InvalidSchema(format!("column `{}`: only features can be standardized", c.name)));
            }
        }
        if columns.iter().filter(|c| c.role == ColumnRole::Id).count() > 1 {
            return Err(Error::InvalidSchema("at most one id column is allowed".into()));
        }
        if !columns.iter().any(|c| c.role == ColumnRole::Feature) {
            return Err(Error::InvalidSchema("at least one feature column is required".into()));
        }
        Ok(FeatureSchema { columns })
    }

    /// Parses `[columns.<name>]` sections with keys `role`, `mutability`
    /// and `standardize`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SchemaFile = toml::from_str(text)?;
        let columns = file
            .columns
            .into_iter()
            .map(|(name, mut spec)| {
                spec.name = name;
                spec
            })
            .collect();
        FeatureSchema::new(columns)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        FeatureSchema::from_toml_str(&text)
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Schema with one free feature column per name.
    pub fn all_features<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        FeatureSchema::new(
            names
                .iter()
                .map(|n| ColumnSpec {
                    name: n.as_ref().to_string(),
                    role: ColumnRole::Feature,
                    mutability: Mutability::Free,
                    standardize: false,
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    /// Feature values as loaded.
    pub raw: Vec<f64>,
    /// Working-space feature values.
    pub features: Vec<f64>,
    /// Label column values as strings, in `Dataset::label_names` order.
    pub labels: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    /// Index into the feature vector.
    pub index: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Standardization {
    pub columns: Vec<ColumnStats>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    feature_names: Vec<String>,
    label_names: Vec<String>,
    rows: Vec<Instance>,
    standardization: Option<Standardization>,
}

impl Dataset {
    /// Builds a dataset from already-parsed rows. Feature and label columns
    /// must all be declared in `schema`.
    pub fn from_rows(
        schema: FeatureSchema,
        feature_names: Vec<String>,
        label_names: Vec<String>,
        rows: Vec<Instance>,
    ) -> Result<Self> {
        for name in &feature_names {
            match schema.column(name) {
                Some(c) if c.role == ColumnRole::Feature => {}
                _ => return Err(Error::SchemaMismatch(format!("`{name}` is not a declared feature column"))),
            }
        }
        for name in &label_names {
            match schema.column(name) {
                Some(c) if c.role == ColumnRole::Label => {}
                _ => return Err(Error::SchemaMismatch(format!("`{name}` is not a declared label column"))),
            }
        }
        if feature_names.is_empty() {
            return Err(Error::SchemaMismatch("no feature columns".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.raw.len() != feature_names.len()
                || r.features.len() != feature_names.len()
                || r.labels.len() != label_names.len()
            {
                return Err(Error::SchemaMismatch(format!("row {} has the wrong arity", i + 1)));
            }
            if r.features.iter().chain(&r.raw).any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i + 1,
                    column: "<features>".into(),
                    message: "non-finite value".into(),
                });
            }
        }
        Ok(Dataset {
            schema,
            feature_names,
            label_names,
            rows,
            standardization: None,
        })
    }

    /// Unlabeled dataset of free features named `x0, x1, ...`; ids are row
    /// indices.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
        let names: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        let schema = FeatureSchema::all_features(&names)?;
        let rows = points
            .into_iter()
            .enumerate()
            .map(|(i, p)| Instance {
                id: i.to_string(),
                raw: p.clone(),
                features: p,
                labels: Vec::new(),
            })
            .collect();
        Dataset::from_rows(schema, names, Vec::new(), rows)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn rows(&self) -> &[Instance] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|n| n == name)
    }

    pub fn row_by_id(&self, id: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.id == id)
    }

    pub fn mutability(&self, feature: usize) -> Mutability {
        self.schema
            .column(&self.feature_names[feature])
            .map(|c| c.mutability)
            .unwrap_or_default()
    }

    /// The rows at `indices`, in that order. Standardization statistics are
    /// carried over unchanged.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let rows = indices
            .iter()
            .map(|&i| {
                self.rows
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::OutOfRange(format!("row index {i} >= {}", self.rows.len())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            rows,
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            rows: Vec::new(),
            standardization: self.standardization.clone(),
        }
    }

    /// Rewrites every column flagged `standardize` to zero mean and unit
    /// population standard deviation, computed from the raw values.
    pub fn standardize(&self) -> Result<Dataset> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = self.rows.len() as f64;
        let mut stats = Vec::new();
        for (index, name) in self.feature_names.iter().enumerate() {
            let flagged = self.schema.column(name).is_some_and(|c| c.standardize);
            if !flagged {
                continue;
            }
            let mean = self.rows.iter().map(|r| r.raw[index]).sum::<f64>() / n;
            let var = self.rows.iter().map(|r| (r.raw[index] - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            if !(std > 0.0 && std.is_finite()) {
                return Err(Error::ZeroVariance(name.clone()));
            }
            stats.push(ColumnStats { index, mean, std });
        }
        let mut out = self.clone();
        for row in &mut out.rows {
            row.features = row.raw.clone();
            for s in &stats {
                row.features[s.index] = (row.raw[s.index] - s.mean) / s.std;
            }
        }
        out.standardization = Some(Standardization { columns: stats });
        Ok(out)
    }

    /// Maps a working-space feature vector back to raw units.
    pub fn inverse_map(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: features.len(),
            });
        }
        let mut out = features.to_vec();
        if let Some(st) = &self.standardization {
            for s in &st.columns {
                out[s.index] = features[s.index] * s.std + s.mean;
            }
        }
        Ok(out)
    }
}

/// Loads an RFC-4180 CSV with a header row. Columns not named in the schema
/// are ignored; every declared column must be present.
pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    load_csv_reader(file, schema)
}

pub fn load_csv_reader<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyDataset);
    }
    let position = |name: &str| headers.iter().position(|h| h.trim() == name);
    for c in schema.columns() {
        if position(&c.name).is_none() {
            return Err(Error::SchemaMismatch(format!("missing column `{}`", c.name)));
        }
    }
    // Header order decides feature and label order.
    let mut feature_cols = Vec::new();
    let mut label_cols = Vec::new();
    let mut id_col = None;
    for (i, h) in headers.iter().enumerate() {
        match schema.column(h.trim()).map(|c| c.role) {
            Some(ColumnRole::Feature) => feature_cols.push((i, h.trim().to_string())),
            Some(ColumnRole::Label) => label_cols.push((i, h.trim().to_string())),
            Some(ColumnRole::Id) => id_col = Some(i),
            None => {}
        }
    }
    let mut rows = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = r + 1;
        let mut raw = Vec::with_capacity(feature_cols.len());
        for (i, name) in &feature_cols {
            let cell = record.get(*i).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_no,
                column: name.clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row_no,
                    column: name.clone(),
                    message: "non-finite value".into(),
                });
            }
            raw.push(v);
        }
        let labels = label_cols
            .iter()
            .map(|(i, _)| record.get(*i).unwrap_or("").trim().to_string())
            .collect();
        let id = match id_col {
            Some(i) => record.get(i).unwrap_or("").trim().to_string(),
            None => r.to_string(),
        };
        rows.push(Instance {
            id,
            features: raw.clone(),
            raw,
            labels,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut ids = std::collections::HashSet::new();
    for r in &rows {
        if !ids.insert(r.id.as_str()) {
            return Err(Error::SchemaMismatch(format!("duplicate id `{}`", r.id)));
        }
    }
    Dataset::from_rows(
        schema.clone(),
        feature_cols.into_iter().map(|(_, n)| n).collect(),
        label_cols.into_iter().map(|(_, n)| n).collect(),
        rows,
    )
}

/// A label value given either as a string or a number in config files.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelValue(pub String);

impl LabelValue {
    pub fn matches(&self, value: &str) -> bool {
        if self.0 == value {
            return true;
        }
        match (self.0.parse::<f64>(), value.parse::<f64>()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

impl Serialize for LabelValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabelValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Float(f64),
            Str(String),
        }
        Ok(LabelValue(match Repr::deserialize(deserializer)? {
            Repr::Int(i) => i.to_string(),
            Repr::Float(f) => f.to_string(),
            Repr::Str(s) => s,
        }))
    }
}

/// The deterministic black-box model `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    /// Positive iff the label column equals `positive`.
    LabelColumn { column: String, positive: LabelValue },
    /// Positive iff `w . x + bias >= threshold` on working-space features.
    Linear {
        weights: Vec<f64>,
        bias: f64,
        threshold: f64,
    },
}

impl Classifier {
    pub fn classify(&self, data: &Dataset, x: &Instance) -> Result<bool> {
        match self {
            Classifier::LabelColumn { column, positive } => {
                let i = data
                    .label_index(column)
                    .ok_or_else(|| Error::SchemaMismatch(format!("unknown label column `{column}`")))?;
                Ok(positive.matches(&x.labels[i]))
            }
            Classifier::Linear {
                weights,
                bias,
                threshold,
            } => {
                if weights.len() != x.features.len() {
                    return Err(Error::DimensionMismatch {
                        expected: weights.len(),
                        actual: x.features.len(),
                    });
                }
                let score: f64 = weights.iter().zip(&x.features).map(|(w, v)| w * v).sum::<f64>() + bias;
                Ok(score >= *threshold)
            }
        }
    }

    pub fn classify_all(&self, data: &Dataset) -> Result<Vec<bool>> {
        data.rows().iter().map(|r| self.classify(data, r)).collect()
    }
}

/// Kernel bandwidth selection.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum BandwidthRule {
    /// `h_j = sigma_j * n^(-1/(d+4))` per dimension.
    #[default]
    Scott,
    /// The same bandwidth in every dimension.
    Fixed(f64),
}

impl Serialize for BandwidthRule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BandwidthRule::Scott => serializer.serialize_str("scott"),
            BandwidthRule::Fixed(h) => serializer.serialize_f64(*h),
        }
    }
}

impl<'de> Deserialize<'de> for BandwidthRule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Name(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(h) => Ok(BandwidthRule::Fixed(h)),
            Repr::Name(s) if s == "scott" => Ok(BandwidthRule::Scott),
            Repr::Name(s) => Err(serde::de::Error::custom(format!("unknown bandwidth rule `{s}`"))),
        }
    }
}

fn bandwidths(data: &Dataset, rule: BandwidthRule) -> Result<Vec<f64>> {
    let d = data.dim();
    let n = data.len() as f64;
    let h: Vec<f64> = match rule {
        BandwidthRule::Fixed(h) => vec![h; d],
        BandwidthRule::Scott => {
            let factor = n.powf(-1.0 / (d as f64 + 4.0));
            (0..d)
                .map(|j| {
                    let mean = data.rows.iter().map(|r| r.features[j]).sum::<f64>() / n;
                    let var = data.rows.iter().map(|r| (r.features[j] - mean).powi(2)).sum::<f64>() / n;
                    var.sqrt() * factor
                })
                .collect()
        }
    };
    if let Some((j, bad)) = h.iter().enumerate().find(|(_, h)| !(h.is_finite() && **h > 0.0)) {
        return Err(Error::DegenerateBandwidth(format!(
            "dimension `{}` has bandwidth {bad}",
            data.feature_names[j]
        )));
    }
    Ok(h)
}

/// Leave-one-out Gaussian KDE negative log-likelihood per row, in nats.
pub fn kde_nll(data: &Dataset, rule: BandwidthRule) -> Result<Vec<f64>> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let h = bandwidths(data, rule)?;
    let d = h.len() as f64;
    let log_norm = ((n - 1) as f64).ln() + h.iter().map(|v| v.ln()).sum::<f64>() + 0.5 * d * (2.0 * std::f64::consts::PI).ln();
    let rows = &data.rows;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &rows[i].features;
            let exps: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    -0.5 * xi
                        .iter()
                        .zip(&rows[j].features)
                        .zip(&h)
                        .map(|((a, b), h)| ((a - b) / h).powi(2))
                        .sum::<f64>()
                })
                .collect();
            let m = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + exps.iter().map(|e| (e - m).exp()).sum::<f64>().ln();
            log_norm - lse
        })
        .collect())
}

/// [`kde_nll`] min-max normalized to `[0, 100]`. A dataset whose scores are
/// all equal maps to all zeros.
pub fn kde_nll_scores(data: &Dataset, rule: BandwidthRule) -> Result<Vec<f64>> {
    let nll = kde_nll(data, rule)?;
    let lo = nll.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span <= 0.0 {
        return Ok(vec![0.0; nll.len()]);
    }
    Ok(nll.iter().map(|v| (v - lo) / span * 100.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = r#"
        [columns.age]
        role = "feature"
        mutability = "monotone_up"
        standardize = true

        [columns.education_num]
        role = "feature"
        standardize = true

        [columns.hours]
        role = "feature"

        [columns.income]
        role = "label"
    "#;

    const CSV: &str = "age,education_num,hours,income\n30,9,40,<=50K\n45,13,50,>50K\n38,10,45,<=50K\n";

    fn schema() -> FeatureSchema {
        FeatureSchema::from_toml_str(SCHEMA).unwrap()
    }

    #[test]
    fn loads_rows_in_file_order() {
        let d = load_csv_reader(CSV.as_bytes(), &schema()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.feature_names(), ["age", "education_num", "hours"]);
        assert_eq!(d.rows()[1].raw, vec![45.0, 13.0, 50.0]);
        assert_eq!(d.rows()[2].labels, vec!["<=50K".to_string()]);
        assert_eq!(d.rows()[0].id, "0");
        assert_eq!(d.mutability(0), Mutability::MonotoneUp);
    }

    #[test]
    fn missing_column_is_a_schema_mismatch() {
        let csv = "education_num,hours,income\n9,40,<=50K\n";
        let err = load_csv_reader(csv.as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(ref m) if m.contains("age")), "{err}");
    }

    #[test]
    fn non_numeric_value_names_the_row() {
        let csv = "age,education_num,hours,income\n30,9,40,<=50K\nabc,13,50,>50K\n";
        match load_csv_reader(csv.as_bytes(), &schema()).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "age");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(matches!(load_csv_reader("".as_bytes(), &schema()), Err(Error::EmptyDataset)));
        let header_only = "age,education_num,hours,income\n";
        assert!(matches!(load_csv_reader(header_only.as_bytes(), &schema()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn schema_requires_a_feature() {
        let text = "[columns.y]\nrole = \"label\"\n";
        assert!(FeatureSchema::from_toml_str(text).is_err());
        let two_ids = "[columns.a]\nrole = \"id\"\n[columns.b]\nrole = \"id\"\n[columns.c]\nrole = \"feature\"\n";
        assert!(FeatureSchema::from_toml_str(two_ids).is_err());
    }

    fn one_column(values: &[f64], standardize: bool) -> Dataset {
        let schema = FeatureSchema::new(vec![ColumnSpec {
            name: "x".into(),
            role: ColumnRole::Feature,
            mutability: Mutability::Free,
            standardize,
        }])
        .unwrap();
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Instance {
                id: i.to_string(),
                raw: vec![v],
                features: vec![v],
                labels: vec![],
            })
            .collect();
        Dataset::from_rows(schema, vec!["x".into()], vec![], rows).unwrap()
    }

    #[test]
    fn standardize_uses_population_std() {
        let d = one_column(&[0.0, 2.0], true).standardize().unwrap();
        let vals: Vec<f64> = d.rows().iter().map(|r| r.features[0]).collect();
        assert_eq!(vals, vec![-1.0, 1.0]);
        let st = d.standardization().unwrap().columns[0];
        assert_eq!((st.mean, st.std), (1.0, 1.0));
    }

    #[test]
    fn restandardizing_keeps_unit_stats() {
        let d = one_column(&[3.0, 7.5, -2.0, 11.0, 4.25], true);
        let once = d.standardize().unwrap();
        let twice = once.standardize().unwrap();
        let vals: Vec<f64> = twice.rows().iter().map(|r| r.features[0]).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-12);
        assert!((std - 1.0).abs() < 1e-12);
        assert_eq!(once.rows(), twice.rows());
    }

    #[test]
    fn constant_flagged_column_fails() {
        let err = one_column(&[5.0, 5.0, 5.0], true).standardize().unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(_)));
        // Not flagged: fine.
        assert!(one_column(&[5.0, 5.0], false).standardize().is_ok());
    }

    #[test]
    fn standardize_round_trips_through_inverse_map() {
        let d = load_csv_reader(CSV.as_bytes(), &schema()).unwrap().standardize().unwrap();
        for r in d.rows() {
            let back = d.inverse_map(&r.features).unwrap();
            for (a, b) in back.iter().zip(&r.raw) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        // hours is not flagged
        assert_eq!(d.rows()[0].features[2], 40.0);
    }

    #[test]
    fn classifiers() {
        let d = load_csv_reader(CSV.as_bytes(), &schema()).unwrap();
        let h = Classifier::LabelColumn {
            column: "income".into(),
            positive: LabelValue(">50K".into()),
        };
        assert!(!h.classify(&d, &d.rows()[0]).unwrap());
        assert!(h.classify(&d, &d.rows()[1]).unwrap());
        assert_eq!(h.classify(&d, &d.rows()[1]).unwrap(), h.classify(&d, &d.rows()[1]).unwrap());

        let pts = Dataset::from_points(vec![vec![1.0, 9.0]]).unwrap();
        let lin = Classifier::Linear {
            weights: vec![1.0, 0.0],
            bias: 0.0,
            threshold: 0.5,
        };
        assert!(lin.classify(&pts, &pts.rows()[0]).unwrap());
        let bad = Classifier::Linear {
            weights: vec![1.0],
            bias: 0.0,
            threshold: 0.5,
        };
        assert!(matches!(bad.classify(&pts, &pts.rows()[0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn numeric_label_values_compare_numerically() {
        assert!(LabelValue("8".into()).matches("8.0"));
        assert!(!LabelValue("8".into()).matches("3"));
    }

    /// 10-point synthetic set: a tight cluster of 8 around the origin and two
    /// scattered outliers.
    fn ten_points() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.0, 0.1],
            vec![-0.1, 0.0],
            vec![0.0, -0.1],
            vec![0.1, 0.1],
            vec![-0.1, -0.1],
            vec![0.05, -0.05],
            vec![3.0, 3.0],
            vec![-2.5, 4.0],
        ]
    }

    /// Direct leave-one-out density sum with a fixed isotropic bandwidth.
    fn brute_force_density(points: &[Vec<f64>], h: f64) -> Vec<f64> {
        let d = points[0].len() as i32;
        let norm = (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) * h.powi(d) * (points.len() - 1) as f64;
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut s = 0.0;
                for (j, q) in points.iter().enumerate() {
                    if i != j {
                        let r2: f64 = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum();
                        s += (-0.5 * r2 / (h * h)).exp();
                    }
                }
                s / norm
            })
            .collect()
    }

    #[test]
    fn kde_matches_brute_force_density() {
        let pts = ten_points();
        let d = Dataset::from_points(pts.clone()).unwrap();
        let nll = kde_nll(&d, BandwidthRule::Fixed(0.8)).unwrap();
        let dens = brute_force_density(&pts, 0.8);
        for (a, b) in nll.iter().zip(&dens) {
            assert!((a + b.ln()).abs() < 1e-9, "{a} vs {}", -b.ln());
        }
        // Cluster mode scores lower than both outliers, under Scott too.
        let scott = kde_nll_scores(&d, BandwidthRule::Scott).unwrap();
        assert!(scott[0] < scott[8] && scott[0] < scott[9]);
        let order_dens: Vec<usize> = order_by(&dens.iter().map(|v| -v).collect::<Vec<_>>());
        assert_eq!(order_by(&nll), order_dens);
    }

    fn order_by(v: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        idx
    }

    #[test]
    fn kde_scores_are_min_max_normalized() {
        let d = Dataset::from_points(ten_points()).unwrap();
        let s = kde_nll_scores(&d, BandwidthRule::Scott).unwrap();
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 100.0);
    }

    #[test]
    fn identical_points_score_equally() {
        let d = Dataset::from_points(vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let s = kde_nll(&d, BandwidthRule::Fixed(0.5)).unwrap();
        assert!((s[0] - s[1]).abs() < 1e-9);
        // Zero spread makes Scott's rule degenerate.
        assert!(matches!(kde_nll(&d, BandwidthRule::Scott), Err(Error::DegenerateBandwidth(_))));
    }

    #[test]
    fn kde_needs_two_rows() {
        let d = Dataset::from_points(vec![vec![1.0]]).unwrap();
        assert!(matches!(kde_nll(&d, BandwidthRule::Scott), Err(Error::TooFewRows(1))));
    }

    #[test]
    fn kde_ordering_is_translation_invariant() {
        let pts = ten_points();
        let shifted: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v + 17.25).collect()).collect();
        let a = kde_nll(&Dataset::from_points(pts).unwrap(), BandwidthRule::Scott).unwrap();
        let b = kde_nll(&Dataset::from_points(shifted).unwrap(), BandwidthRule::Scott).unwrap();
        assert_eq!(order_by(&a), order_by(&b));
    }
}
