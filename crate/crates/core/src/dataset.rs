//! Labeled data, class priors, stratified splitting and CSV I/O.
//!
//! Class ids are zero-based inside the library (`0..num_classes`). Files
//! carry the original label strings; [`LabeledDataset::class_names`] keeps
//! the first-appearance mapping so reports can translate back.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NpmcError, Result};

/// Dense feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    class_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let (n, p) = features.dim();
        if n == 0 || p == 0 {
            return Err(NpmcError::Empty(format!(
                "dataset needs at least one row and one feature, got {n}x{p}"
            )));
        }
        if labels.len() != n {
            return Err(NpmcError::InvalidArgument(format!(
                "{} labels for {n} feature rows",
                labels.len()
            )));
        }
        if num_classes == 0 {
            return Err(NpmcError::InvalidArgument("num_classes must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(NpmcError::InvalidArgument(format!(
                "label {bad} outside 0..{num_classes}"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(NpmcError::InvalidArgument("features must be finite".into()));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            class_names: None,
        })
    }

    /// Attach original label names (index = class id).
    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_classes {
            return Err(NpmcError::InvalidArgument(format!(
                "{} class names for {} classes",
                names.len(),
                self.num_classes
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Row indices grouped by class.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_classes];
        for (i, &y) in self.labels.iter().enumerate() {
            groups[y].push(i);
        }
        groups
    }

    /// Fails with the first class that has fewer than `required` rows.
    pub fn require_class_counts(&self, required: usize) -> Result<()> {
        for (class, &count) in self.class_counts().iter().enumerate() {
            if count == 0 && required > 0 {
                return Err(NpmcError::EmptyClass { class });
            }
            if count < required {
                return Err(NpmcError::TooFewInClass {
                    class,
                    count,
                    required,
                });
            }
        }
        Ok(())
    }

    /// New dataset made of the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = Self::new(features, labels, self.num_classes)?;
        out.class_names = self.class_names.clone();
        Ok(out)
    }

    /// Row-wise concatenation; both sides must agree on shape and classes.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.num_features() != self.num_features() {
            return Err(NpmcError::DimensionMismatch {
                expected: self.num_features(),
                got: other.num_features(),
            });
        }
        if other.num_classes != self.num_classes {
            return Err(NpmcError::InvalidArgument(format!(
                "cannot concatenate datasets with {} and {} classes",
                self.num_classes, other.num_classes
            )));
        }
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .expect("column counts checked above");
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut out = Self::new(features, labels, self.num_classes)?;
        out.class_names = self.class_names.clone();
        Ok(out)
    }

    /// Display name of a class: the original label if known, else the 1-based id.
    pub fn class_name(&self, class: usize) -> String {
        class_display_name(self.class_names.as_deref(), class)
    }
}

pub(crate) fn class_display_name(names: Option<&[String]>, class: usize) -> String {
    match names {
        Some(names) => names[class].clone(),
        None => (class + 1).to_string(),
    }
}

/// Class marginal probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PriorVector(Vec<f64>);

impl PriorVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(NpmcError::Empty("prior vector".into()));
        }
        if let Some(class) = values.iter().position(|&v| !(v > 0.0 && v <= 1.0)) {
            return Err(NpmcError::InvalidArgument(format!(
                "prior of class {class} is {}, must lie in (0, 1]",
                values[class]
            )));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(NpmcError::InvalidArgument(format!(
                "priors sum to {total}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for PriorVector {
    type Output = f64;

    fn index(&self, class: usize) -> &f64 {
        &self.0[class]
    }
}

impl TryFrom<Vec<f64>> for PriorVector {
    type Error = NpmcError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<PriorVector> for Vec<f64> {
    fn from(p: PriorVector) -> Self {
        p.0
    }
}

/// Sample proportions `n_k / n`.
pub fn class_priors(ds: &LabeledDataset) -> Result<PriorVector> {
    ds.require_class_counts(1)?;
    let n = ds.len() as f64;
    PriorVector::new(ds.class_counts().into_iter().map(|c| c as f64 / n).collect())
}

/// Index form of [`stratified_split`]: per class, `ceil(fraction * n_k)`
/// rows drawn without replacement go to the first part. Both parts are
/// returned in ascending index order.
pub fn stratified_split_indices<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(NpmcError::InvalidArgument(format!(
            "split fraction {fraction} must lie in (0, 1)"
        )));
    }
    ds.require_class_counts(2)?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for mut group in ds.class_indices() {
        let take = first_part_size(group.len(), fraction);
        group.shuffle(rng);
        first.extend_from_slice(&group[..take]);
        second.extend_from_slice(&group[take..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Size of the first part for a class with `count` rows. Capped at
/// `count - 1` so the second part is never empty.
pub fn first_part_size(count: usize, fraction: f64) -> usize {
    // Guard against 0.5 * 10 = 5.000000000000001 style rounding.
    let raw = fraction * count as f64;
    let take = (raw - 1e-9).ceil().max(1.0) as usize;
    take.min(count.saturating_sub(1))
}

/// Per-class random split into two disjoint datasets.
pub fn stratified_split<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    fraction: f64,
    rng: &mut R,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (first, second) = stratified_split_indices(ds, fraction, rng)?;
    Ok((ds.subset(&first)?, ds.subset(&second)?))
}

/// Read a comma-separated file with a header row. Every column except
/// `label_column` must parse as a finite real. Labels map to class ids in
/// order of first appearance.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| NpmcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label_column)
}

pub fn read_csv<R: std::io::Read>(reader: R, label_column: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(NpmcError::Empty("CSV has no header".into()));
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| NpmcError::MissingLabelColumn(label_column.to_string()))?;
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    if feature_cols.is_empty() {
        return Err(NpmcError::Empty("CSV has no feature columns".into()));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        // Row numbers are 1-based data rows (header excluded).
        let row = row + 1;
        for (col, name) in &feature_cols {
            values.push(parse_cell(&record, *col, row, name)?);
        }
        let label = record.get(label_idx).unwrap_or("").trim().to_string();
        let next = ids.len();
        let id = *ids.entry(label.clone()).or_insert_with(|| {
            names.push(label);
            next
        });
        labels.push(id);
    }
    if labels.is_empty() {
        return Err(NpmcError::Empty("CSV has no data rows".into()));
    }
    let features = Array2::from_shape_vec((labels.len(), feature_cols.len()), values)
        .expect("row-major buffer matches shape");
    let k = names.len();
    LabeledDataset::new(features, labels, k)?.with_class_names(names)
}

fn parse_cell(record: &csv::StringRecord, col: usize, row: usize, name: &str) -> Result<f64> {
    let cell = record.get(col).unwrap_or("").trim();
    cell.parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| NpmcError::NonNumeric {
            row,
            column: name.to_string(),
            value: cell.to_string(),
        })
}

/// Read an unlabeled feature matrix. Every column except `skip_column` (if
/// present in the header) is a feature.
pub fn load_features_csv(path: impl AsRef<Path>, skip_column: Option<&str>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| NpmcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_features_csv(file, skip_column)
}

pub fn read_features_csv<R: std::io::Read>(reader: R, skip_column: Option<&str>) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(_, h)| Some(h) != skip_column)
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    if feature_cols.is_empty() {
        return Err(NpmcError::Empty("CSV has no feature columns".into()));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (col, name) in &feature_cols {
            values.push(parse_cell(&record, *col, row + 1, name)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(NpmcError::Empty("CSV has no data rows".into()));
    }
    Ok(Array2::from_shape_vec((rows, feature_cols.len()), values).expect("row-major buffer matches shape"))
}

/// Write the dataset in the same dialect [`load_csv`] reads. Feature columns
/// are named `x1..xp` and the label column carries the class names.
pub fn write_csv(ds: &LabeledDataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| NpmcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(ds, file, label_column)
}

pub fn write_csv_to<W: std::io::Write>(ds: &LabeledDataset, writer: W, label_column: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=ds.num_features()).map(|j| format!("x{j}")).collect();
    header.push(label_column.to_string());
    wtr.write_record(&header)?;
    for (i, &y) in ds.labels().iter().enumerate() {
        // `{}` on f64 prints the shortest string that parses back to the same bits.
        let mut record: Vec<String> = ds.row(i).iter().map(|v| format!("{v}")).collect();
        record.push(ds.class_name(y));
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|source| NpmcError::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}
