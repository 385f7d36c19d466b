//! Small dense linear-algebra helpers: operator norm by power iteration and
//! numerical rank from singular values.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POWER_SEED: u64 = 0x0005_eed0_f1a7;
const POWER_MAX_ITERS: usize = 100_000;

/// Largest singular value of `x` by power iteration on the smaller Gram
/// matrix (`xᵀx` or `x xᵀ`), stopping once the Rayleigh quotient changes by
/// at most `tol` relative. The start vector comes from a fixed seed, so the
/// result is deterministic. A zero matrix yields `0`.
pub fn spectral_norm(x: ArrayView2<f64>, tol: f64) -> f64 {
    let (n, d) = x.dim();
    if n == 0 || d == 0 || x.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let gram: Array2<f64> = if d <= n { x.t().dot(&x) } else { x.dot(&x.t()) };
    let m = gram.nrows();

    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Array1<f64> = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
    let norm = v.dot(&v).sqrt();
    v /= norm;

    let mut lambda = v.dot(&gram.dot(&v));
    for _ in 0..POWER_MAX_ITERS {
        let w = gram.dot(&v);
        let wn = w.dot(&w).sqrt();
        if wn == 0.0 {
            break;
        }
        v = w / wn;
        let next = v.dot(&gram.dot(&v));
        let done = (next - lambda).abs() <= tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// Singular values of `x` in nonincreasing order.
pub fn singular_values(x: ArrayView2<f64>) -> Vec<f64> {
    let (n, d) = x.dim();
    let m = DMatrix::from_fn(n, d, |i, j| x[[i, j]]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values above `σ_max · max(n, d) · ε`.
pub fn numerical_rank(x: ArrayView2<f64>) -> usize {
    let (n, d) = x.dim();
    let sv = singular_values(x);
    let Some(&top) = sv.first() else {
        return 0;
    };
    let cutoff = top * n.max(d) as f64 * f64::EPSILON;
    sv.iter().filter(|&&s| s > cutoff).count()
}
