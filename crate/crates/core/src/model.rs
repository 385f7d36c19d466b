//! Logistic model: probabilities, empirical loss, its gradient and the
//! Lipschitz bound of that gradient.

use ndarray::{Array1, ArrayView1, Axis};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Model parameter `θ`, one weight per feature.
pub type ModelVector = Array1<f64>;

/// `1 / (1 + exp(-t))` without overflow for large `|t|`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(t))`, stable in both tails.
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn check_dim(theta: ArrayView1<f64>, data: &Dataset) -> Result<()> {
    if theta.len() != data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: data.n_features(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// Negative log-likelihood `Σ_i log(1 + exp(-s_i θᵀx_i))` with
/// `s_i = ±1` for labels 1 and 0.
pub fn loss(theta: ArrayView1<f64>, data: &Dataset) -> Result<f64> {
    check_dim(theta, data)?;
    let z = data.features().dot(&theta);
    Ok(loss_from_margins(z.view(), data.labels()))
}

fn loss_from_margins(z: ArrayView1<f64>, labels: ArrayView1<f64>) -> f64 {
    z.iter()
        .zip(labels)
        .map(|(&zi, &yi)| if yi == 1.0 { softplus(-zi) } else { softplus(zi) })
        .sum()
}

/// `∇l(θ) = Σ_i (σ(θᵀx_i) - y_i) x_i`, accumulated in sample order.
pub fn loss_gradient(theta: ArrayView1<f64>, data: &Dataset) -> Result<Array1<f64>> {
    Ok(loss_and_gradient(theta, data)?.1)
}

/// Loss and gradient sharing one pass over `Xθ`.
pub fn loss_and_gradient(theta: ArrayView1<f64>, data: &Dataset) -> Result<(f64, Array1<f64>)> {
    check_dim(theta, data)?;
    let x = data.features();
    let y = data.labels();
    let z = x.dot(&theta);
    let value = loss_from_margins(z.view(), y);
    let mut grad = Array1::zeros(data.n_features());
    for ((row, &zi), &yi) in x.outer_iter().zip(&z).zip(&y) {
        grad.scaled_add(sigmoid(zi) - yi, &row);
    }
    Ok((value, grad))
}

/// Gradient computed over `parts` contiguous blocks of samples in parallel.
///
/// Each block sums its samples in index order and block results are combined
/// in block order, so the result does not depend on thread scheduling.
pub fn loss_gradient_partitioned(
    theta: ArrayView1<f64>,
    data: &Dataset,
    parts: usize,
) -> Result<Array1<f64>> {
    check_dim(theta, data)?;
    let n = data.n_samples();
    let chunk = n.div_ceil(parts.max(1)).max(1);
    let x = data.features();
    let y = data.labels();
    let partials: Vec<Array1<f64>> = (0..n)
        .step_by(chunk)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + chunk).min(n);
            let mut g = Array1::zeros(data.n_features());
            for i in start..end {
                let row = x.index_axis(Axis(0), i);
                let zi = row.dot(&theta);
                g.scaled_add(sigmoid(zi) - y[i], &row);
            }
            g
        })
        .collect();
    Ok(partials
        .into_iter()
        .fold(Array1::zeros(data.n_features()), |acc, g| acc + g))
}

/// `‖X‖` by power iteration to relative tolerance `tol`.
pub fn spectral_norm(data: &Dataset, tol: f64) -> f64 {
    crate::linalg::spectral_norm(data.features(), tol)
}

/// `‖X‖² / 4`, a Lipschitz constant of `∇l`.
pub fn lipschitz_bound(data: &Dataset) -> f64 {
    let norm = data.operator_norm();
    0.25 * norm * norm
}

/// A class prediction and the probability of label 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    pub prob: f64,
}

/// Decision rule `1(xᵀθ ≥ 0)`; ties go to label 1.
///
/// `x` must already be in the model's feature frame (centered with the
/// training center, intercept appended) when the model was trained that way.
pub fn predict(theta: ArrayView1<f64>, x: ArrayView1<f64>) -> Result<Prediction> {
    if theta.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: x.len(),
        });
    }
    let z = x.dot(&theta);
    Ok(Prediction {
        label: u8::from(z >= 0.0),
        prob: sigmoid(z),
    })
}

/// Fraction of samples whose predicted label differs from the stored one.
pub fn error_rate(theta: ArrayView1<f64>, data: &Dataset) -> Result<f64> {
    check_dim(theta, data)?;
    let z = data.features().dot(&theta);
    let wrong = z
        .iter()
        .zip(data.labels())
        .filter(|(&zi, &yi)| f64::from(u8::from(zi >= 0.0)) != yi)
        .count();
    Ok(wrong as f64 / data.n_samples() as f64)
}
