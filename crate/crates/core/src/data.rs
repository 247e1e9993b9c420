//! Vertically partitioned datasets: synthetic generation, CSV ingestion,
//! train/test splitting and balanced attack probe sampling.
//!
//! Instances are assumed to be aligned across the two parties already; row `i`
//! of the active block and row `i` of the passive block describe the same
//! instance `instance_ids[i]`.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, stream};

pub const ID_COLUMN: &str = "instance_id";
pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalDataset {
    active_features: Array2<f64>,
    passive_features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    instance_ids: Vec<u64>,
    active_columns: Vec<String>,
    passive_columns: Vec<String>,
}

impl VerticalDataset {
    /// Builds a dataset, checking row counts, label range, class coverage and
    /// id uniqueness.
    pub fn new(
        active_features: Array2<f64>,
        passive_features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        instance_ids: Vec<u64>,
    ) -> Result<Self> {
        let active_columns = (0..active_features.ncols()).map(|j| format!("a{j}")).collect();
        let passive_columns = (0..passive_features.ncols()).map(|j| format!("p{j}")).collect();
        Self::with_columns(
            active_features,
            passive_features,
            labels,
            num_classes,
            instance_ids,
            active_columns,
            passive_columns,
        )
    }

    pub fn with_columns(
        active_features: Array2<f64>,
        passive_features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        instance_ids: Vec<u64>,
        active_columns: Vec<String>,
        passive_columns: Vec<String>,
    ) -> Result<Self> {
        let ds = Self::unchecked(
            active_features,
            passive_features,
            labels,
            num_classes,
            instance_ids,
            active_columns,
            passive_columns,
        )?;
        let counts = ds.class_counts();
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Dataset(format!("class {missing} has no instances")));
        }
        Ok(ds)
    }

    /// Like `with_columns` but tolerates classes with no instances, which
    /// happens legitimately for small splits of a valid dataset.
    fn unchecked(
        active_features: Array2<f64>,
        passive_features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        instance_ids: Vec<u64>,
        active_columns: Vec<String>,
        passive_columns: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if active_features.nrows() != n || passive_features.nrows() != n || instance_ids.len() != n {
            return Err(Error::Dataset(format!(
                "row counts differ: active {}, passive {}, labels {}, ids {}",
                active_features.nrows(),
                passive_features.nrows(),
                n,
                instance_ids.len()
            )));
        }
        if active_columns.len() != active_features.ncols()
            || passive_columns.len() != passive_features.ncols()
        {
            return Err(Error::Dataset("column names do not match feature counts".into()));
        }
        if num_classes < 2 {
            return Err(Error::Dataset(format!("need at least 2 classes, got {num_classes}")));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::Dataset(format!("label {bad} outside [0, {num_classes})")));
        }
        let mut seen = HashSet::with_capacity(n);
        if let Some(dup) = instance_ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::Dataset(format!("duplicate instance id {dup}")));
        }
        Ok(Self {
            active_features,
            passive_features,
            labels,
            num_classes,
            instance_ids,
            active_columns,
            passive_columns,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn active_features(&self) -> &Array2<f64> {
        &self.active_features
    }

    pub fn passive_features(&self) -> &Array2<f64> {
        &self.passive_features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn instance_ids(&self) -> &[u64] {
        &self.instance_ids
    }

    pub fn active_columns(&self) -> &[String] {
        &self.active_columns
    }

    pub fn passive_columns(&self) -> &[String] {
        &self.passive_columns
    }

    pub fn num_active(&self) -> usize {
        self.active_features.ncols()
    }

    pub fn num_passive(&self) -> usize {
        self.passive_features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows selected by position, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            active_features: self.active_features.select(Axis(0), rows),
            passive_features: self.passive_features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            num_classes: self.num_classes,
            instance_ids: rows.iter().map(|&r| self.instance_ids[r]).collect(),
            active_columns: self.active_columns.clone(),
            passive_columns: self.passive_columns.clone(),
        }
    }

    /// Active and passive blocks side by side, active columns first.
    pub fn concatenated_features(&self) -> Array2<f64> {
        ndarray::concatenate(
            Axis(1),
            &[self.active_features.view(), self.passive_features.view()],
        )
        .expect("row counts are equal by construction")
    }
}

/// Parameters of the hypercube-vertex Gaussian blob generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_samples: usize,
    pub num_active: usize,
    pub num_passive: usize,
    pub num_classes: usize,
    /// Standard deviation of the isotropic Gaussian noise around each center.
    pub noise: f64,
    /// Distance between adjacent hypercube vertices.
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub const DEFAULT_SEPARATION: f64 = 2.0;
    /// Noise level at which an undefended model leaks roughly 85% of probe
    /// labels to the clustering attack.
    pub const DEFAULT_NOISE: f64 = 2.0;

    pub fn new(
        num_samples: usize,
        num_active: usize,
        num_passive: usize,
        num_classes: usize,
        noise: f64,
        seed: u64,
    ) -> Self {
        Self {
            num_samples,
            num_active,
            num_passive,
            num_classes,
            noise,
            separation: Self::DEFAULT_SEPARATION,
            seed,
        }
    }

    /// 2,000 rows, 5 active and 5 passive features, 2 classes.
    pub fn synthetic1(noise: f64, seed: u64) -> Self {
        Self::new(2000, 5, 5, 2, noise, seed)
    }

    /// 10,000 rows, 5 active and 5 passive features, 10 classes.
    pub fn synthetic2(noise: f64, seed: u64) -> Self {
        Self::new(10_000, 5, 5, 10, noise, seed)
    }
}

pub fn gen_synthetic(
    num_samples: usize,
    num_active: usize,
    num_passive: usize,
    num_classes: usize,
    noise: f64,
    seed: u64,
) -> Result<VerticalDataset> {
    generate(&SyntheticSpec::new(
        num_samples,
        num_active,
        num_passive,
        num_classes,
        noise,
        seed,
    ))
}

/// Class centers sit on distinct, randomly chosen vertices of a hypercube
/// spanning all features; each sample is its class center plus N(0, noise²)
/// per coordinate.
pub fn generate(spec: &SyntheticSpec) -> Result<VerticalDataset> {
    let SyntheticSpec {
        num_samples,
        num_active,
        num_passive,
        num_classes,
        noise,
        separation,
        seed,
    } = *spec;
    if num_classes < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes, got {num_classes}"
        )));
    }
    if num_samples < num_classes {
        return Err(Error::InvalidArgument(format!(
            "{num_samples} samples cannot cover {num_classes} classes"
        )));
    }
    if num_active == 0 || num_passive == 0 {
        return Err(Error::InvalidArgument(
            "both parties need at least one synthetic feature".into(),
        ));
    }
    if !(noise >= 0.0 && noise.is_finite()) || !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise must be non-negative and separation positive, got {noise} and {separation}"
        )));
    }
    let dims = num_active + num_passive;
    if dims < 64 && (1u64 << dims) < num_classes as u64 {
        return Err(Error::InvalidArgument(format!(
            "a {dims}-dimensional hypercube has fewer than {num_classes} vertices"
        )));
    }

    let mut rng = seed::rng(seed, &[stream::DATA]);
    let half = separation / 2.0;
    let mut centers: Vec<Vec<bool>> = Vec::with_capacity(num_classes);
    while centers.len() < num_classes {
        let vertex: Vec<bool> = (0..dims).map(|_| rng.gen::<bool>()).collect();
        if !centers.contains(&vertex) {
            centers.push(vertex);
        }
    }

    let mut labels: Vec<usize> = (0..num_samples).map(|i| i % num_classes).collect();
    labels.shuffle(&mut rng);

    let normal = Normal::new(0.0, noise).expect("noise validated above");
    let mut features = Array2::<f64>::zeros((num_samples, dims));
    for (mut row, &y) in features.outer_iter_mut().zip(&labels) {
        for (x, &bit) in row.iter_mut().zip(&centers[y]) {
            let center = if bit { half } else { -half };
            *x = center + if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        }
    }

    let active = features.slice(ndarray::s![.., ..num_active]).to_owned();
    let passive = features.slice(ndarray::s![.., num_active..]).to_owned();
    VerticalDataset::new(
        active,
        passive,
        labels,
        num_classes,
        (0..num_samples as u64).collect(),
    )
}

/// Column roles for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    pub passive_columns: Vec<String>,
    /// Column holding integer instance ids; row numbers are used when absent.
    #[serde(default)]
    pub id_column: Option<String>,
}

pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    passive_columns: &[String],
) -> Result<VerticalDataset> {
    load_csv_with(
        path,
        &CsvSchema {
            label_column: label_column.to_string(),
            passive_columns: passive_columns.to_vec(),
            id_column: None,
        },
    )
    .map(|(ds, _)| ds)
}

/// Loads a CSV with a header row. Columns that are neither the label, the id
/// nor listed as passive become active-party features. Labels are re-encoded
/// to `0..C` in ascending order of their original values; the original values
/// are returned alongside.
pub fn load_csv_with(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
) -> Result<(VerticalDataset, Vec<String>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let label_idx = find(&schema.label_column)?;
    let id_idx = schema.id_column.as_deref().map(find).transpose()?;
    let mut passive_idx = Vec::with_capacity(schema.passive_columns.len());
    for name in &schema.passive_columns {
        if *name == schema.label_column {
            return Err(Error::InvalidArgument(format!(
                "label column `{name}` cannot also be a passive feature"
            )));
        }
        passive_idx.push(find(name)?);
    }
    let active_idx: Vec<usize> = (0..headers.len())
        .filter(|&j| j != label_idx && Some(j) != id_idx && !passive_idx.contains(&j))
        .collect();

    let mut raw_labels = Vec::new();
    let mut ids = Vec::new();
    let mut active_vals = Vec::new();
    let mut passive_vals = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        let cell = |j: usize| -> Result<f64> {
            let text = record.get(j).unwrap_or("").trim();
            text.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("non-numeric value `{text}` in column `{}`", headers[j]),
            })
        };
        for &j in &active_idx {
            active_vals.push(cell(j)?);
        }
        for &j in &passive_idx {
            passive_vals.push(cell(j)?);
        }
        raw_labels.push(record.get(label_idx).unwrap_or("").trim().to_string());
        ids.push(match id_idx {
            Some(j) => {
                let text = record.get(j).unwrap_or("").trim();
                text.parse::<u64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid instance id `{text}`"),
                })?
            }
            None => row_no as u64,
        });
    }
    let n = raw_labels.len();
    if n == 0 {
        return Err(Error::Dataset(format!("{} has no data rows", path.display())));
    }

    let (labels, classes) = encode_labels(&raw_labels);
    if classes.len() < 2 {
        return Err(Error::Dataset(format!(
            "label column `{}` has a single class",
            schema.label_column
        )));
    }
    let to_matrix = |vals: Vec<f64>, cols: usize| {
        Array2::from_shape_vec((n, cols), vals).expect("row-major fill matches shape")
    };
    let ds = VerticalDataset::with_columns(
        to_matrix(active_vals, active_idx.len()),
        to_matrix(passive_vals, passive_idx.len()),
        labels,
        classes.len(),
        ids,
        active_idx.iter().map(|&j| headers[j].clone()).collect(),
        passive_idx.iter().map(|&j| headers[j].clone()).collect(),
    )?;
    Ok((ds, classes))
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: err.to_string(),
    }
}

/// Maps raw label strings to `0..C`. Numeric labels are ordered numerically,
/// anything else lexicographically.
fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut distinct: Vec<String> = raw.iter().cloned().collect::<HashSet<_>>().into_iter().collect();
    let numeric: Option<Vec<f64>> = distinct.iter().map(|s| s.parse::<f64>().ok()).collect();
    match numeric {
        Some(_) => distinct.sort_by(|a, b| {
            a.parse::<f64>()
                .unwrap()
                .total_cmp(&b.parse::<f64>().unwrap())
        }),
        None => distinct.sort(),
    }
    let index: BTreeMap<&str, usize> = distinct
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let labels = raw.iter().map(|s| index[s.as_str()]).collect();
    (labels, distinct)
}

/// Sidecar describing a dataset written by [`save_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub id_column: String,
    pub label_column: String,
    pub active_columns: Vec<String>,
    pub passive_columns: Vec<String>,
    pub num_classes: usize,
    pub num_rows: usize,
    pub seed: Option<u64>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
}

/// `data.csv` -> `data.manifest.json`
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

/// Writes the dataset as CSV (id, active columns, passive columns, label) plus
/// a JSON manifest next to it.
pub fn save_dataset(
    ds: &VerticalDataset,
    csv_path: impl AsRef<Path>,
    synthetic: Option<&SyntheticSpec>,
) -> Result<DatasetManifest> {
    let csv_path = csv_path.as_ref();
    let mut writer = csv::Writer::from_path(csv_path).map_err(|e| csv_error(csv_path, e))?;
    let mut header = vec![ID_COLUMN.to_string()];
    header.extend(ds.active_columns.iter().cloned());
    header.extend(ds.passive_columns.iter().cloned());
    header.push(LABEL_COLUMN.to_string());
    writer.write_record(&header)?;
    for i in 0..ds.len() {
        let mut row = Vec::with_capacity(header.len());
        row.push(ds.instance_ids[i].to_string());
        row.extend(ds.active_features.row(i).iter().map(|v| format_real(*v)));
        row.extend(ds.passive_features.row(i).iter().map(|v| format_real(*v)));
        row.push(ds.labels[i].to_string());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(csv_path, e))?;

    let manifest = DatasetManifest {
        id_column: ID_COLUMN.into(),
        label_column: LABEL_COLUMN.into(),
        active_columns: ds.active_columns.clone(),
        passive_columns: ds.passive_columns.clone(),
        num_classes: ds.num_classes,
        num_rows: ds.len(),
        seed: synthetic.map(|s| s.seed),
        synthetic: synthetic.copied(),
    };
    let mpath = manifest_path(csv_path);
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&mpath, json + "\n").map_err(|e| Error::io(&mpath, e))?;
    Ok(manifest)
}

/// Reads a dataset written by [`save_dataset`], using its manifest for column
/// roles.
pub fn load_dataset(csv_path: impl AsRef<Path>) -> Result<VerticalDataset> {
    let csv_path = csv_path.as_ref();
    let mpath = manifest_path(csv_path);
    let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: mpath.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let (ds, _) = load_csv_with(
        csv_path,
        &CsvSchema {
            label_column: manifest.label_column.clone(),
            passive_columns: manifest.passive_columns.clone(),
            id_column: Some(manifest.id_column.clone()),
        },
    )?;
    if ds.num_classes != manifest.num_classes {
        return Err(Error::Dataset(format!(
            "manifest declares {} classes but {} found",
            manifest.num_classes, ds.num_classes
        )));
    }
    Ok(ds)
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_real(v: f64) -> String {
    format!("{v:?}")
}

/// Shuffled, disjoint train/test partition. The training share is
/// `round(n * train_fraction)` rows.
pub fn split_train_test(
    ds: &VerticalDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(VerticalDataset, VerticalDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = ds.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} of {n} rows leaves an empty split"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, &[stream::SPLIT]));
    let (train, test) = order.split_at(n_train);
    Ok((ds.select_rows(train), ds.select_rows(test)))
}

/// Labeled instances the attacker is evaluated on, balanced across classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackProbeSet {
    pub ids: Vec<u64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl AttackProbeSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

pub fn sample_balanced_probe(
    train: &VerticalDataset,
    per_class: usize,
    seed: u64,
) -> Result<AttackProbeSet> {
    if per_class == 0 {
        return Err(Error::InvalidArgument("per_class must be positive".into()));
    }
    let mut rng = seed::rng(seed, &[stream::PROBE]);
    let mut ids = Vec::with_capacity(per_class * train.num_classes);
    let mut labels = Vec::with_capacity(per_class * train.num_classes);
    for class in 0..train.num_classes {
        let mut members: Vec<u64> = train
            .labels
            .iter()
            .zip(&train.instance_ids)
            .filter(|(&y, _)| y == class)
            .map(|(_, &id)| id)
            .collect();
        if members.len() < per_class {
            return Err(Error::ClassTooSmall {
                class,
                available: members.len(),
                requested: per_class,
            });
        }
        members.shuffle(&mut rng);
        ids.extend_from_slice(&members[..per_class]);
        labels.extend(std::iter::repeat(class).take(per_class));
    }
    Ok(AttackProbeSet {
        ids,
        labels,
        num_classes: train.num_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn synthetic_shapes() {
        let ds = gen_synthetic(2000, 5, 5, 2, 1.0, 7).unwrap();
        assert_eq!(ds.len(), 2000);
        assert_eq!((ds.num_active(), ds.num_passive()), (5, 5));
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.class_counts(), vec![1000, 1000]);

        let ds = gen_synthetic(10_000, 5, 5, 10, 1.0, 7).unwrap();
        assert_eq!(ds.len(), 10_000);
        assert_eq!(ds.num_classes(), 10);
        assert!(ds.class_counts().iter().all(|&c| c == 1000));
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = gen_synthetic(300, 3, 4, 3, 0.5, 11).unwrap();
        let b = gen_synthetic(300, 3, 4, 3, 0.5, 11).unwrap();
        let c = gen_synthetic(300, 3, 4, 3, 0.5, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_noise_puts_samples_on_centers() {
        let ds = gen_synthetic(200, 2, 2, 4, 0.0, 3).unwrap();
        let x = ds.concatenated_features();
        let mut center_of: Vec<Option<Vec<f64>>> = vec![None; 4];
        for (row, &y) in x.outer_iter().zip(ds.labels()) {
            assert!(row.iter().all(|v| v.abs() == 1.0));
            match &center_of[y] {
                Some(c) => assert_eq!(c, &row.to_vec()),
                None => center_of[y] = Some(row.to_vec()),
            }
        }
        let centers: HashSet<Vec<u64>> = center_of
            .into_iter()
            .map(|c| c.unwrap().iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(centers.len(), 4);
    }

    #[test]
    fn too_few_samples_is_rejected() {
        let err = gen_synthetic(3, 2, 2, 5, 1.0, 0).unwrap_err();
        assert!(err.to_string().contains("cannot cover"));
    }

    #[test]
    fn split_sizes_and_partition() {
        let ds = gen_synthetic(3000, 2, 2, 2, 1.0, 5).unwrap();
        let (train, test) = split_train_test(&ds, 2.0 / 3.0, 9).unwrap();
        assert_eq!((train.len(), test.len()), (2000, 1000));
        let mut all: Vec<u64> = train.instance_ids().iter().chain(test.instance_ids()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..3000).collect::<Vec<_>>());

        let (train2, _) = split_train_test(&ds, 2.0 / 3.0, 9).unwrap();
        assert_eq!(train, train2);
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let ds = gen_synthetic(10, 1, 1, 2, 1.0, 5).unwrap();
        assert!(split_train_test(&ds, 0.0, 1).is_err());
        assert!(split_train_test(&ds, 1.0, 1).is_err());
        assert!(split_train_test(&ds, 0.01, 1).is_err());
        assert!(split_train_test(&ds, 0.99, 1).is_err());
    }

    #[test]
    fn probe_is_balanced() {
        let ds = gen_synthetic(1000, 2, 2, 2, 1.0, 5).unwrap();
        let probe = sample_balanced_probe(&ds, 100, 1).unwrap();
        assert_eq!(probe.len(), 200);
        assert_eq!(probe.labels.iter().filter(|&&y| y == 0).count(), 100);
        let ids: HashSet<u64> = ds.instance_ids().iter().copied().collect();
        assert!(probe.ids.iter().all(|id| ids.contains(id)));

        let ds10 = gen_synthetic(1000, 3, 3, 10, 1.0, 5).unwrap();
        assert_eq!(sample_balanced_probe(&ds10, 50, 1).unwrap().len(), 500);
    }

    #[test]
    fn probe_rejects_small_class() {
        let ds = gen_synthetic(100, 2, 2, 2, 1.0, 5).unwrap();
        match sample_balanced_probe(&ds, 51, 1) {
            Err(Error::ClassTooSmall { available, requested, .. }) => {
                assert_eq!((available, requested), (50, 51));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_column_roles_and_relabeling() {
        let f = write_csv("x1,x2,x3,y\n1,2,3,7\n4,5,6,3\n7,8,9,7\n");
        let ds = load_csv(f.path(), "y", &["x2".into(), "x3".into()]).unwrap();
        assert_eq!(ds.num_active(), 1);
        assert_eq!(ds.num_passive(), 2);
        assert_eq!(ds.labels(), &[1, 0, 1]);
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.passive_features()[[1, 1]], 6.0);
    }

    #[test]
    fn csv_allows_label_only_active_party() {
        let f = write_csv("x1,x2,y\n1,2,0\n4,5,1\n");
        let ds = load_csv(f.path(), "y", &["x1".into(), "x2".into()]).unwrap();
        assert_eq!(ds.num_active(), 0);
        assert_eq!(ds.num_passive(), 2);
    }

    #[test]
    fn csv_errors() {
        let f = write_csv("x1,y\n1,0\n2,1\n");
        assert!(load_csv(f.path(), "nope", &[]).unwrap_err().to_string().contains("missing column"));
        assert!(load_csv(f.path(), "y", &["zz".into()]).is_err());

        let f = write_csv("x1,y\n1,0\nabc,1\n");
        let err = load_csv(f.path(), "y", &[]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let f = write_csv("x1,y\n1,0\n2,0\n");
        assert!(load_csv(f.path(), "y", &[]).unwrap_err().to_string().contains("single class"));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::new(50, 2, 3, 3, 0.7, 4);
        let ds = generate(&spec).unwrap();
        let (train, _) = split_train_test(&ds, 0.8, 2).unwrap();
        let path = dir.path().join("train.csv");
        save_dataset(&train, &path, Some(&spec)).unwrap();
        assert!(manifest_path(&path).exists());
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, train);
    }
}
