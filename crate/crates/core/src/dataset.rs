use std::sync::OnceLock;

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance used for the cached operator norm.
const NORM_TOL: f64 = 1e-12;

/// A binary classification corpus stored row-per-sample.
///
/// Labels are `0.0` or `1.0`. When the dataset was built with an intercept,
/// the constant-one feature is the last column and is left untouched by
/// centering.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array1<f64>,
    centered: bool,
    center: Array1<f64>,
    intercept: bool,
    norm: OnceLock<f64>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidData(format!(
                "need at least one sample and one feature, got {n}x{d}"
            )));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        if let Some(i) = labels.iter().position(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidData(format!(
                "label {} of sample {i} is not 0 or 1",
                labels[i]
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature value in sample {}",
                i / d
            )));
        }
        Ok(Dataset {
            features,
            labels,
            centered: false,
            center: Array1::zeros(d),
            intercept: false,
            norm: OnceLock::new(),
        })
    }

    /// Appends a constant-one feature. Appending twice is a no-op.
    pub fn with_intercept(self) -> Self {
        if self.intercept {
            return self;
        }
        let n = self.n_samples();
        let features = concatenate![Axis(1), self.features, Array2::ones((n, 1))];
        let mut center = self.center.to_vec();
        center.push(0.0);
        Dataset {
            features,
            labels: self.labels,
            centered: self.centered,
            center: Array1::from(center),
            intercept: true,
            norm: OnceLock::new(),
        }
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> ArrayView1<'_, f64> {
        self.labels.view()
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Total mean subtracted so far (zeros when not centered).
    pub fn center_vector(&self) -> ArrayView1<'_, f64> {
        self.center.view()
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// Subtracts column means, skipping the intercept column.
    ///
    /// Repeated calls accumulate the subtracted means into the stored center,
    /// so `center_vector` always maps raw inputs onto this dataset's frame.
    pub fn centered(&self) -> Dataset {
        let mut means = self
            .features
            .mean_axis(Axis(0))
            .expect("dataset has at least one sample");
        if self.intercept {
            let last = means.len() - 1;
            means[last] = 0.0;
        }
        let mut out = self.shifted(&means);
        out.centered = true;
        out
    }

    /// Subtracts a given center (typically the training center) from the
    /// raw features of this dataset, which must not already be centered.
    pub fn centered_with(&self, center: ArrayView1<f64>) -> Result<Dataset> {
        if center.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: center.len(),
            });
        }
        if self.centered {
            return Err(Error::InvalidData(
                "dataset is already centered".to_string(),
            ));
        }
        let mut shift = center.to_owned();
        if self.intercept {
            let last = shift.len() - 1;
            shift[last] = 0.0;
        }
        let mut out = self.shifted(&shift);
        out.centered = true;
        Ok(out)
    }

    fn shifted(&self, shift: &Array1<f64>) -> Dataset {
        let features = &self.features - &shift.view().insert_axis(Axis(0));
        Dataset {
            features,
            labels: self.labels.clone(),
            centered: self.centered,
            center: &self.center + shift,
            intercept: self.intercept,
            norm: OnceLock::new(),
        }
    }

    /// Samples at the given row indices, in that order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), rows),
            labels: self.labels.select(Axis(0), rows),
            centered: self.centered,
            center: self.center.clone(),
            intercept: self.intercept,
            norm: OnceLock::new(),
        }
    }

    /// Operator norm `‖X‖` (largest singular value), computed once.
    pub fn operator_norm(&self) -> f64 {
        *self
            .norm
            .get_or_init(|| linalg::spectral_norm(self.features.view(), NORM_TOL))
    }

    /// Raw features with the intercept column dropped, for saving.
    pub(crate) fn raw_feature_columns(&self) -> ArrayView2<'_, f64> {
        if self.intercept {
            self.features.slice(s![.., ..self.n_features() - 1])
        } else {
            self.features.view()
        }
    }

    /// Largest absolute column sum, `max_j |Σ_i x_ij|`.
    pub fn max_abs_column_sum(&self) -> f64 {
        self.features
            .sum_axis(Axis(0))
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}
