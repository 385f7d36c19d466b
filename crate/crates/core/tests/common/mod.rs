//! Shared instance generators and independent oracles for integration tests.
#![allow(dead_code)]

use firmlogit::data::{gen_noisy, Amplitude, SynthSpec};
use firmlogit::{Dataset, PenaltySpec, SolverConfig};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// MCP written out from its definition.
pub fn mcp_value(t: f64, zeta: f64) -> f64 {
    let a = t.abs();
    if zeta > 0.0 && a >= 0.5 / zeta {
        0.25 / zeta
    } else {
        a - zeta * a * a
    }
}

/// Minimizer of `w F(x) + (x - v)²/2` over the grid
/// `[−10|v|−1, 10|v|+1]` with the given spacing.
pub fn grid_prox(v: f64, w: f64, zeta: f64, spacing: f64) -> f64 {
    let lo = -10.0 * v.abs() - 1.0;
    let steps = ((20.0 * v.abs() + 2.0) / spacing).ceil() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let x = lo + i as f64 * spacing;
        let value = w * mcp_value(x, zeta) + 0.5 * (x - v) * (x - v);
        if value < best.0 {
            best = (value, x);
        }
    }
    best.1
}

/// `Σ log(1 + e^{z_i}) − y_i z_i` computed independently of the crate.
pub fn loss_oracle(theta: ArrayView1<f64>, data: &Dataset) -> f64 {
    data.features()
        .outer_iter()
        .zip(data.labels())
        .map(|(x, &y)| {
            let z = x.dot(&theta);
            z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z
        })
        .sum()
}

/// Central differences of [`loss_oracle`].
pub fn fd_gradient(theta: ArrayView1<f64>, data: &Dataset, h: f64) -> Array1<f64> {
    (0..theta.len())
        .map(|j| {
            let mut plus = theta.to_owned();
            let mut minus = theta.to_owned();
            plus[j] += h;
            minus[j] -= h;
            (loss_oracle(plus.view(), data) - loss_oracle(minus.view(), data)) / (2.0 * h)
        })
        .collect()
}

/// Standard-normal features times `scale`, labels drawn from a logistic
/// model with a random standard-normal weight vector.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Dataset {
    let x = Array2::from_shape_simple_fn((n, d), || scale * rng.sample::<f64, _>(StandardNormal));
    let w: Array1<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let y = x
        .dot(&w)
        .mapv(|z| f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-z).exp()))));
    Dataset::new(x, y).unwrap()
}

pub struct Instance {
    pub data: Dataset,
    pub spec: PenaltySpec,
}

/// Noisy Gaussian problems with `N ≫ d`, so the unpenalized likelihood has
/// a finite maximizer and every MCP plateau solution is bounded.
pub fn descent_suite(count: usize, seed: u64) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count as u64)
        .map(|i| {
            let d = r.random_range(2..=6);
            let n = r.random_range(100..=200);
            let k = r.random_range(1..=d.min(3));
            let beta = r.random_range(0.1..2.0);
            let zeta = r.random_range(0.01..0.5);
            let spec = SynthSpec {
                d,
                n_train: n,
                n_test: 1,
                k,
                latent_dim: None,
                amplitude: Amplitude::StandardNormal,
                noise_sigma: 1.0,
                noisy_test: true,
                seed: 100 + i,
            };
            Instance {
                data: gen_noisy(&spec).unwrap().0,
                spec: PenaltySpec::mcp(zeta, beta).unwrap(),
            }
        })
        .collect()
}

/// Extra stopping requirement on the step norm used by the convergence suite.
pub const SUITE_STEP_TOL: f64 = 1e-11;

/// Constant and backtracking configurations, both with traces.
pub fn suite_configs(inst: &Instance) -> [(&'static str, SolverConfig); 2] {
    let tune = |c: SolverConfig| c.step_tol(Some(SUITE_STEP_TOL)).record_trace(true);
    [
        ("constant", tune(SolverConfig::default_constant(&inst.spec, &inst.data))),
        ("backtracking", tune(SolverConfig::default_backtracking(&inst.spec))),
    ]
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Minimizes `l(X_S u) + β sᵀu` by damped Newton. `None` when the iterates
/// diverge or the Hessian is singular.
fn signed_newton(x: &DMatrix<f64>, y: &DVector<f64>, signs: &DVector<f64>, beta: f64) -> Option<DVector<f64>> {
    let f = |u: &DVector<f64>| -> f64 {
        let z = x * u;
        z.iter()
            .zip(y.iter())
            .map(|(&zi, &yi)| zi.max(0.0) + (-zi.abs()).exp().ln_1p() - yi * zi)
            .sum::<f64>()
            + beta * signs.dot(u)
    };
    let mut u = DVector::zeros(x.ncols());
    for _ in 0..200 {
        let z = x * &u;
        let p = z.map(sigmoid);
        let grad = x.transpose() * (&p - y) + signs * beta;
        let weights = p.map(|pi| pi * (1.0 - pi));
        let hess = x.transpose() * DMatrix::from_diagonal(&weights) * x;
        let chol = hess.cholesky()?;
        let dir = chol.solve(&(-&grad));
        let decrement = -grad.dot(&dir);
        if decrement < 1e-26 {
            return Some(u);
        }
        let base = f(&u);
        let mut t = 1.0;
        while f(&(&u + &dir * t)) > base - 0.25 * t * decrement {
            t *= 0.5;
            if t < 1e-12 {
                return Some(u);
            }
        }
        u += dir * t;
        if u.norm() > 1e6 {
            return None;
        }
    }
    Some(u)
}

/// Global minimum of `l(θ) + β‖θ‖₁` by exhaustive search over supports and
/// sign patterns; practical for `d ≤ 6`.
pub fn l1_oracle(data: &Dataset, beta: f64) -> (f64, Array1<f64>) {
    let d = data.n_features();
    let y = DVector::from_iterator(data.n_samples(), data.labels().iter().copied());
    let objective = |theta: &Array1<f64>| loss_oracle(theta.view(), data) + beta * theta.mapv(f64::abs).sum();
    let zero = Array1::zeros(d);
    let mut best = (objective(&zero), zero);
    for code in 1..3usize.pow(d as u32) {
        let mut digits = code;
        let mut support = Vec::new();
        let mut signs = Vec::new();
        for j in 0..d {
            match digits % 3 {
                1 => {
                    support.push(j);
                    signs.push(1.0);
                }
                2 => {
                    support.push(j);
                    signs.push(-1.0);
                }
                _ => {}
            }
            digits /= 3;
        }
        let xs = DMatrix::from_fn(data.n_samples(), support.len(), |i, c| data.features()[[i, support[c]]]);
        let s = DVector::from_vec(signs);
        let Some(u) = signed_newton(&xs, &y, &s, beta) else {
            continue;
        };
        if u.iter().zip(s.iter()).any(|(&ui, &si)| ui * si <= 0.0) {
            continue;
        }
        let mut theta = Array1::zeros(d);
        for (c, &j) in support.iter().enumerate() {
            theta[j] = u[c];
        }
        let value = objective(&theta);
        if value < best.0 {
            best = (value, theta);
        }
    }
    best
}

/// Centered noisy Gaussian data for the ℓ1 comparison.
pub fn small_convex_instance(seed: u64) -> Dataset {
    let mut r = rng(seed);
    random_dataset(&mut r, 20, 5, 1.0).centered()
}
