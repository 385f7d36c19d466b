//! Dataset ingestion (dense CSV and sparse `label idx:value` text), saving,
//! seeded train/test splits and the synthetic generators.
//!
//! Every random draw uses `ChaCha8Rng::seed_from_u64(seed)` with the stream
//! id from [`stream`] selecting an independent sequence, so each quantity
//! depends only on the seed and its own stream.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ModelVector;

/// Stream ids of the per-use random sequences.
pub mod stream {
    /// Latent factor `A` (d × latent_dim).
    pub const A: u64 = 1;
    /// Latent coefficients `B` of the training samples.
    pub const B: u64 = 2;
    /// Positions of the nonzeros of `θ₀`.
    pub const SUPPORT: u64 = 3;
    /// Magnitudes of the nonzeros of `θ₀`.
    pub const AMPLITUDE: u64 = 4;
    /// Signs of the nonzeros of `θ₀`.
    pub const SIGN: u64 = 5;
    /// Label noise of the training samples.
    pub const NOISE: u64 = 6;
    /// Permutation for train/test splits.
    pub const SPLIT: u64 = 7;
    /// Feature matrix of the training samples when no latent dimension is set.
    pub const X: u64 = 8;
    /// Small random solver initialization.
    pub const INIT: u64 = 9;
    /// Latent coefficients of the test samples.
    pub const B_TEST: u64 = 10;
    /// Feature matrix of the test samples when no latent dimension is set.
    pub const X_TEST: u64 = 11;
    /// Label noise of the test samples.
    pub const NOISE_TEST: u64 = 12;
}

fn rng_for(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// How label cells are mapped onto `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LabelMap {
    /// Numeric `0` / `1`.
    #[default]
    ZeroOne,
    /// Numeric `-1` / `+1`.
    PlusMinusOne,
    /// Two literal strings, negative class first.
    Strings { negative: String, positive: String },
    /// No label column (CSV) or label token (sparse); labels are set to `0`.
    Absent,
}

impl LabelMap {
    fn map(&self, cell: &str) -> Option<f64> {
        let cell = cell.trim();
        match self {
            LabelMap::ZeroOne => match cell.parse::<f64>().ok()? {
                v if v == 0.0 => Some(0.0),
                v if v == 1.0 => Some(1.0),
                _ => None,
            },
            LabelMap::PlusMinusOne => match cell.parse::<f64>().ok()? {
                v if v == -1.0 => Some(0.0),
                v if v == 1.0 => Some(1.0),
                _ => None,
            },
            LabelMap::Strings { negative, positive } => {
                if cell == negative {
                    Some(0.0)
                } else if cell == positive {
                    Some(1.0)
                } else {
                    None
                }
            }
            LabelMap::Absent => Some(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Header {
    /// A header is assumed when the first record has a non-numeric feature cell.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvOptions {
    /// Zero-based label column; `None` means the last column.
    pub label_column: Option<usize>,
    pub labels: LabelMap,
    pub header: Header,
    pub add_intercept: bool,
}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Reads a comma-separated file. Empty feature cells become `0`.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<f64> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| parse_err(path, line, 0, e.to_string()))?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let n_cols = record.len();
        let label_col = match opts.labels {
            LabelMap::Absent => usize::MAX,
            _ => opts.label_column.unwrap_or(n_cols.saturating_sub(1)),
        };
        if label_col != usize::MAX && label_col >= n_cols {
            return Err(parse_err(
                path,
                line,
                label_col + 1,
                format!("label column {label_col} out of range for {n_cols} columns"),
            ));
        }
        if i == 0 {
            let is_header = match opts.header {
                Header::Present => true,
                Header::Absent => false,
                Header::Auto => record
                    .iter()
                    .enumerate()
                    .any(|(j, c)| j != label_col && !c.is_empty() && c.parse::<f64>().is_err()),
            };
            if is_header {
                continue;
            }
        }
        match width {
            None => width = Some(n_cols),
            Some(w) if w != n_cols => {
                return Err(parse_err(
                    path,
                    line,
                    n_cols,
                    format!("expected {w} columns, found {n_cols}"),
                ))
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            if j == label_col {
                let y = opts.labels.map(cell).ok_or_else(|| {
                    parse_err(path, line, j + 1, format!("label {cell:?} is not binary under {:?}", opts.labels))
                })?;
                labels.push(y);
            } else if cell.is_empty() {
                rows.push(0.0);
            } else {
                let v = cell
                    .parse::<f64>()
                    .map_err(|e| parse_err(path, line, j + 1, format!("{cell:?}: {e}")))?;
                rows.push(v);
            }
        }
    }
    let Some(w) = width else {
        return Err(Error::InvalidData(format!("{}: no data rows", path.display())));
    };
    if opts.labels == LabelMap::Absent {
        labels = vec![0.0; rows.len() / w];
    }
    let n_features = rows.len() / labels.len().max(1);
    let features = Array2::from_shape_vec((labels.len(), n_features), rows)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    finish(Dataset::new(features, Array1::from(labels))?, opts.add_intercept)
}

fn finish(data: Dataset, add_intercept: bool) -> Result<Dataset> {
    Ok(if add_intercept {
        data.with_intercept()
    } else {
        data
    })
}

/// Reads the sparse `label idx:value ...` format with 1-based indices.
///
/// The dimension is the largest index seen unless `dim` is given. Labels go
/// through `labels` as in [`load_csv`]; blank lines and `#` comments are
/// skipped.
pub fn load_sparse_classification_format(
    path: impl AsRef<Path>,
    labels: &LabelMap,
    dim: Option<usize>,
    add_intercept: bool,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut max_index = 0usize;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let y = if *labels == LabelMap::Absent {
            0.0
        } else {
            let label = tokens.next().expect("non-empty line has a token");
            labels.map(label).ok_or_else(|| {
                parse_err(path, line_no, 1, format!("label {label:?} is not binary under {labels:?}"))
            })?
        };
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (t, token) in tokens.enumerate() {
            let column = t + 2;
            let (idx, val) = token
                .split_once(':')
                .ok_or_else(|| parse_err(path, line_no, column, format!("{token:?} is not idx:value")))?;
            let idx: usize = idx
                .parse()
                .map_err(|e| parse_err(path, line_no, column, format!("index {idx:?}: {e}")))?;
            if idx == 0 {
                return Err(parse_err(path, line_no, column, "indices are 1-based"));
            }
            let val: f64 = val
                .parse()
                .map_err(|e| parse_err(path, line_no, column, format!("value {val:?}: {e}")))?;
            if row.iter().any(|&(j, _)| j == idx) {
                return Err(parse_err(path, line_no, column, format!("duplicate index {idx}")));
            }
            max_index = max_index.max(idx);
            row.push((idx, val));
        }
        entries.push(row);
        ys.push(y);
    }
    let d = match dim {
        Some(d) if d < max_index => {
            return Err(Error::InvalidData(format!(
                "{}: index {max_index} exceeds the declared dimension {d}",
                path.display()
            )))
        }
        Some(d) => d,
        None => max_index,
    };
    let mut features = Array2::zeros((ys.len(), d));
    for (r, row) in entries.iter().enumerate() {
        for &(j, v) in row {
            features[[r, j - 1]] = v;
        }
    }
    finish(Dataset::new(features, Array1::from(ys))?, add_intercept)
}

/// Writes features then the `0`/`1` label per row, with a `x1,...,xd,label`
/// header. Values use the shortest representation that parses back to the
/// same `f64`. The intercept column, if any, is not written.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(data, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<W: Write>(data: &Dataset, out: &mut W) -> std::io::Result<()> {
    let x = data.raw_feature_columns();
    let header: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{},label", header.join(","))?;
    for (row, y) in x.outer_iter().zip(data.labels()) {
        for v in row {
            write!(out, "{v},")?;
        }
        writeln!(out, "{}", *y as u8)?;
    }
    Ok(())
}

/// Column means subtracted, intercept column exempt.
pub fn center(data: &Dataset) -> Dataset {
    data.centered()
}

fn test_count(n: usize, fraction: f64) -> usize {
    // guards 0.8 * 4601 style products landing just below an integer
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Seeded shuffle, then the first `⌊fraction·N⌋` permuted samples become the
/// test set. The training set is centered and the test set is centered with
/// the training center. Input must not be centered yet.
pub fn train_test_split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.n_samples(), test_fraction, seed)?;
    let train = data.select(&train);
    let test = data.select(&test);
    centered_pair(&train, &test)
}

/// Training set centered on its own mean; the other set shifted by the
/// same center.
pub fn centered_pair(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    if train.is_centered() || test.is_centered() {
        return Err(Error::InvalidData(
            "split expects uncentered input".to_string(),
        ));
    }
    let train_c = train.centered();
    let test_c = test.centered_with(train_c.center_vector())?;
    Ok((train_c, test_c))
}

/// Index sets `(train, test)` of a seeded split without centering.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = test_count(n, test_fraction);
    if n_test == 0 || n_test >= n {
        return Err(Error::InvalidData(format!(
            "splitting {n} samples at fraction {test_fraction} leaves a side empty"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_for(seed, stream::SPLIT));
    let test = perm[..n_test].to_vec();
    let train = perm[n_test..].to_vec();
    Ok((train, test))
}

/// Law of the nonzero entries of `θ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Amplitude {
    /// Magnitudes uniform on `[lo, hi]` with independent fair-coin signs.
    UniformRange(f64, f64),
    StandardNormal,
}

/// Synthetic sparse-model experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub d: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Number of nonzeros of `θ₀`.
    pub k: usize,
    /// Inner dimension of `X = AB/‖AB‖`; `None` draws `X` iid normal.
    pub latent_dim: Option<usize>,
    pub amplitude: Amplitude,
    /// Standard deviation `ε` of the label noise.
    pub noise_sigma: f64,
    /// Whether noisy generation also perturbs the test labels.
    pub noisy_test: bool,
    pub seed: u64,
}

impl SynthSpec {
    /// Subspace data: `d = 50`, `N = 1000`, 8 nonzeros with magnitudes in
    /// `[5, 15]`, latent dimension 45.
    pub fn subspace(seed: u64) -> Self {
        SynthSpec {
            d: 50,
            n_train: 1000,
            n_test: 1000,
            k: 8,
            latent_dim: Some(45),
            amplitude: Amplitude::UniformRange(5.0, 15.0),
            noise_sigma: 0.0,
            noisy_test: true,
            seed,
        }
    }

    /// Gaussian data: `d = 50`, 200 training and 1000 test points, 5
    /// standard-normal nonzeros.
    pub fn gaussian(seed: u64) -> Self {
        SynthSpec {
            d: 50,
            n_train: 200,
            n_test: 1000,
            k: 5,
            latent_dim: None,
            amplitude: Amplitude::StandardNormal,
            noise_sigma: 0.0,
            noisy_test: true,
            seed,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidConfig(
                "d, n_train and n_test must be positive".to_string(),
            ));
        }
        if self.k > self.d {
            return Err(Error::InvalidConfig(format!(
                "sparsity k = {} exceeds dimension d = {}",
                self.k, self.d
            )));
        }
        if let Some(r) = self.latent_dim {
            if r == 0 || r > self.d {
                return Err(Error::InvalidConfig(format!(
                    "latent dimension {r} must lie in 1..={}",
                    self.d
                )));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise sigma must be finite and nonnegative, got {}",
                self.noise_sigma
            )));
        }
        if let Amplitude::UniformRange(lo, hi) = self.amplitude {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "amplitude range [{lo}, {hi}] is invalid"
                )));
            }
        }
        Ok(())
    }
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// `θ₀` with `k` nonzeros at uniformly drawn positions.
pub fn sparse_truth(spec: &SynthSpec) -> ModelVector {
    let mut theta = Array1::zeros(spec.d);
    let support = index::sample(&mut rng_for(spec.seed, stream::SUPPORT), spec.d, spec.k).into_vec();
    let mut amp = rng_for(spec.seed, stream::AMPLITUDE);
    let mut sign = rng_for(spec.seed, stream::SIGN);
    for j in support {
        theta[j] = match spec.amplitude {
            Amplitude::UniformRange(lo, hi) => {
                let m = amp.random_range(lo..=hi);
                if sign.random_bool(0.5) {
                    m
                } else {
                    -m
                }
            }
            Amplitude::StandardNormal => amp.sample(StandardNormal),
        };
    }
    theta
}

/// Train and test feature matrices, rows are samples.
fn features(spec: &SynthSpec) -> (Array2<f64>, Array2<f64>) {
    match spec.latent_dim {
        Some(r) => {
            let a = normal_matrix(spec.d, r, &mut rng_for(spec.seed, stream::A));
            let b = normal_matrix(r, spec.n_train, &mut rng_for(spec.seed, stream::B));
            let b_test = normal_matrix(r, spec.n_test, &mut rng_for(spec.seed, stream::B_TEST));
            let x = a.dot(&b).reversed_axes();
            let x_test = a.dot(&b_test).reversed_axes();
            let norm = linalg::spectral_norm(x.view(), 1e-14);
            (x / norm, x_test / norm)
        }
        None => (
            normal_matrix(spec.n_train, spec.d, &mut rng_for(spec.seed, stream::X)),
            normal_matrix(spec.n_test, spec.d, &mut rng_for(spec.seed, stream::X_TEST)),
        ),
    }
}

fn labels(x: &Array2<f64>, theta0: &ModelVector, sigma: f64, noise_stream: Option<(u64, u64)>) -> Array1<f64> {
    let margins = x.dot(theta0);
    let mut rng = noise_stream.map(|(seed, s)| rng_for(seed, s));
    margins
        .iter()
        .map(|&m| {
            let n = match rng.as_mut() {
                Some(r) if sigma > 0.0 => sigma * r.sample::<f64, _>(StandardNormal),
                _ => 0.0,
            };
            f64::from(u8::from(m + n >= 0.0))
        })
        .collect()
}

fn generate(spec: &SynthSpec, sigma: f64) -> Result<(Dataset, Dataset, ModelVector)> {
    spec.validate()?;
    let theta0 = sparse_truth(spec);
    let (x, x_test) = features(spec);
    let y = labels(&x, &theta0, sigma, Some((spec.seed, stream::NOISE)));
    let test_sigma = if spec.noisy_test { sigma } else { 0.0 };
    let y_test = labels(&x_test, &theta0, test_sigma, Some((spec.seed, stream::NOISE_TEST)));
    Ok((Dataset::new(x, y)?, Dataset::new(x_test, y_test)?, theta0))
}

/// Noise-free labels `1(θ₀ᵀx ≥ 0)`; the training set is separable by `θ₀`.
pub fn gen_separable(spec: &SynthSpec) -> Result<(Dataset, Dataset, ModelVector)> {
    generate(spec, 0.0)
}

/// Labels `1(θ₀ᵀx + n ≥ 0)` with `n ~ N(0, ε²)` per sample. Test labels are
/// noisy too unless `spec.noisy_test` is false.
pub fn gen_noisy(spec: &SynthSpec) -> Result<(Dataset, Dataset, ModelVector)> {
    generate(spec, spec.noise_sigma)
}

/// Fraction of samples whose label disagrees with `1(θ₀ᵀx ≥ 0)`.
pub fn label_flip_rate(data: &Dataset, theta0: &ModelVector) -> f64 {
    let clean = labels(&data.features().to_owned(), theta0, 0.0, None);
    let flips = clean.iter().zip(data.labels()).filter(|(a, b)| a != b).count();
    flips as f64 / data.n_samples() as f64
}

/// Writes `θ₀` one entry per line under a `theta0` header.
pub fn save_vector(theta: &ModelVector, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("theta0\n");
    for v in theta {
        text.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<ModelVector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(
            line.parse::<f64>()
                .map_err(|e| parse_err(path, i + 1, 1, e.to_string()))?,
        );
    }
    Ok(Array1::from(out))
}

/// Per-column sums, used to check centering.
pub fn column_sums(data: &Dataset) -> Array1<f64> {
    data.features().sum_axis(Axis(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_three_rows() {
        let f = temp_file("1,2,0\n3,4,1\n5,6,1\n");
        let d = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(d.n_samples(), 3);
        assert_eq!(d.features(), array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert_eq!(d.labels(), array![0.0, 1.0, 1.0]);
    }

    #[test]
    fn csv_header_missing_cells_and_label_column() {
        let f = temp_file("y,a,b\n1,,2\n0,3,\n");
        let opts = CsvOptions {
            label_column: Some(0),
            ..Default::default()
        };
        let d = load_csv(f.path(), &opts).unwrap();
        assert_eq!(d.features(), array![[0.0, 2.0], [3.0, 0.0]]);
        assert_eq!(d.labels(), array![1.0, 0.0]);
    }

    #[test]
    fn csv_label_maps() {
        let f = temp_file("1,-1\n2,1\n");
        let opts = CsvOptions {
            labels: LabelMap::PlusMinusOne,
            ..Default::default()
        };
        assert_eq!(load_csv(f.path(), &opts).unwrap().labels(), array![0.0, 1.0]);
        assert!(load_csv(f.path(), &CsvOptions::default()).is_err());

        let f = temp_file("1,ham\n2,spam\n");
        let opts = CsvOptions {
            labels: LabelMap::Strings {
                negative: "ham".into(),
                positive: "spam".into(),
            },
            header: Header::Absent,
            ..Default::default()
        };
        assert_eq!(load_csv(f.path(), &opts).unwrap().labels(), array![0.0, 1.0]);
    }

    #[test]
    fn csv_errors_carry_position() {
        let f = temp_file("1,2,0\n3,x,1\n");
        match load_csv(f.path(), &CsvOptions::default()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let f = temp_file("1,2,0\n3,4,2\n");
        assert!(matches!(
            load_csv(f.path(), &CsvOptions::default()),
            Err(Error::Parse { line: 2, column: 3, .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let x = array![[0.1, 1.0 / 3.0], [-2.5e-300, 1e300], [std::f64::consts::PI, -0.0]];
        let d = Dataset::new(x, array![1.0, 0.0, 1.0]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_csv(&d, f.path()).unwrap();
        let back = load_csv(f.path(), &CsvOptions::default()).unwrap();
        for (a, b) in d.features().iter().zip(back.features()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(d.labels(), back.labels());
    }

    #[test]
    fn unlabeled_inputs() {
        let f = temp_file("1,2\n3,4\n");
        let opts = CsvOptions {
            labels: LabelMap::Absent,
            ..Default::default()
        };
        let d = load_csv(f.path(), &opts).unwrap();
        assert_eq!(d.features(), array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(d.labels(), array![0.0, 0.0]);
        let f = temp_file("2:1.5\n1:1\n");
        let d = load_sparse_classification_format(f.path(), &LabelMap::Absent, None, false).unwrap();
        assert_eq!(d.features(), array![[0.0, 1.5], [1.0, 0.0]]);
    }

    #[test]
    fn sparse_format() {
        let f = temp_file("1 3:0.5\n0\n");
        let d = load_sparse_classification_format(f.path(), &LabelMap::ZeroOne, None, false).unwrap();
        assert_eq!(d.features(), array![[0.0, 0.0, 0.5], [0.0, 0.0, 0.0]]);
        assert_eq!(d.labels(), array![1.0, 0.0]);

        let f = temp_file("0 1:2 1:3\n");
        assert!(matches!(
            load_sparse_classification_format(f.path(), &LabelMap::ZeroOne, None, false),
            Err(Error::Parse { line: 1, .. })
        ));
        let f = temp_file("+1 2:1\n-1 1:1\n");
        let d = load_sparse_classification_format(f.path(), &LabelMap::PlusMinusOne, Some(4), true).unwrap();
        assert_eq!(d.n_features(), 5);
        assert_eq!(d.labels(), array![1.0, 0.0]);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let x = Array2::from_shape_fn((10, 2), |(i, j)| (i * 2 + j) as f64);
        let y = Array1::from_shape_fn(10, |i| (i % 2) as f64);
        let d = Dataset::new(x, y).unwrap();
        let (tr, te) = train_test_split(&d, 0.2, 3).unwrap();
        assert_eq!((tr.n_samples(), te.n_samples()), (8, 2));
        let (tr2, te2) = train_test_split(&d, 0.2, 3).unwrap();
        assert_eq!(tr.features(), tr2.features());
        assert_eq!(te.features(), te2.features());
        assert_eq!(te.center_vector(), tr.center_vector());
        assert!(column_sums(&tr).iter().all(|v| v.abs() < 1e-9));
        assert!(train_test_split(&d, 0.01, 3).is_err());
        assert!(train_test_split(&d, 1.0, 3).is_err());
    }

    #[test]
    fn spambase_sized_split() {
        assert_eq!(test_count(4601, 0.8), 3680);
    }

    #[test]
    fn subspace_generator() {
        let spec = SynthSpec::subspace(11);
        let (train, test, theta0) = gen_separable(&spec).unwrap();
        assert_eq!(train.n_samples(), 1000);
        assert_eq!(test.n_features(), 50);
        assert_eq!(theta0.iter().filter(|v| **v != 0.0).count(), 8);
        assert!(theta0.iter().all(|v| *v == 0.0 || (5.0..=15.0).contains(&v.abs())));
        assert!((train.operator_norm() - 1.0).abs() < 1e-9);
        assert_eq!(linalg::numerical_rank(train.features()), 45);
        let margins = train.features().dot(&theta0);
        for (m, y) in margins.iter().zip(train.labels()) {
            assert_eq!(*y, f64::from(u8::from(*m >= 0.0)));
        }
    }

    #[test]
    fn noisy_generator_degenerates_and_is_deterministic() {
        let spec = SynthSpec::gaussian(5);
        let (a, _, t) = gen_separable(&spec).unwrap();
        let (b, _, u) = gen_noisy(&spec.clone().with_noise(0.0)).unwrap();
        assert_eq!(a.features(), b.features());
        assert_eq!(a.labels(), b.labels());
        assert_eq!(t, u);
        let noisy = spec.clone().with_noise(0.5);
        let (c, _, _) = gen_noisy(&noisy).unwrap();
        let (e, _, _) = gen_noisy(&noisy).unwrap();
        assert_eq!(c.labels(), e.labels());
    }

    #[test]
    fn clean_test_labels_on_request() {
        let mut spec = SynthSpec::gaussian(2).with_noise(1.0);
        spec.noisy_test = false;
        let (_, test, theta0) = gen_noisy(&spec).unwrap();
        assert_eq!(label_flip_rate(&test, &theta0), 0.0);
    }

    #[test]
    fn invalid_specs() {
        let mut s = SynthSpec::gaussian(0);
        s.k = 51;
        assert!(s.validate().is_err());
        let mut s = SynthSpec::subspace(0);
        s.latent_dim = Some(60);
        assert!(s.validate().is_err());
        assert!(SynthSpec::gaussian(0).with_noise(-1.0).validate().is_err());
    }

    #[test]
    fn vector_round_trip() {
        let v = array![1.5, -0.0, 1.0 / 7.0];
        let f = tempfile::NamedTempFile::new().unwrap();
        save_vector(&v, f.path()).unwrap();
        assert_eq!(load_vector(f.path()).unwrap(), v);
    }
}
