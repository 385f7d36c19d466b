//! Proximal gradient descent for `l(θ) + β J(θ)`.
//!
//! Each iteration takes a gradient step on the logistic loss followed by the
//! penalty prox, `θ_{k+1} = prox_{α_k β J}(θ_k − α_k ∇l(θ_k))`. For the MCP
//! penalty the prox is firm shrinkage, so this is the iterative
//! firm-shrinkage algorithm; with `ζ = 0` it is plain ISTA for ℓ1.
//!
//! Two stepsize rules keep the objective monotone:
//!
//! * a constant `α` with `1/α > max(2βζ, ‖X‖²/8 + βζ)`, see
//!   [`max_constant_stepsize`];
//! * backtracking `α_k = η^{n_k} α_{k−1}` starting from `α_0` with
//!   `βζα_0 < 1/2`, accepting the first candidate that satisfies the
//!   quadratic upper-bound test, see [`backtrack_stepsize`].
//!
//! Iteration stops when the objective changes by at most `eps_tol` (and,
//! if `step_tol` is set, the step norm is at most `step_tol`) or after
//! `max_iters` steps. The Nesterov-accelerated variant ([`accelerated_fit`])
//! extrapolates between prox outputs and is not guaranteed to be monotone.

use std::io::{BufRead, Write};

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{loss, loss_and_gradient, loss_gradient, ModelVector};
use crate::penalty::{PenaltySpec, WeaklyConvex};

/// Reductions allowed in one backtracking search before giving up. Hitting
/// this means something is wrong with the inputs, not with the method.
pub const MAX_BACKTRACKS: usize = 100;

/// Fraction of the admissible constant stepsize used by default.
pub const DEFAULT_STEP_FRACTION: f64 = 0.99;
pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_EPS_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// `‖θ‖₂` above which a run is flagged as escaping along a separating
/// direction.
pub const SEPARABLE_ESCAPE_NORM: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeRule {
    Constant(f64),
    Backtracking { alpha0: f64, eta: f64 },
}

impl std::fmt::Display for StepsizeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepsizeRule::Constant(a) => write!(f, "constant({a})"),
            StepsizeRule::Backtracking { alpha0, eta } => {
                write!(f, "backtracking(alpha0={alpha0}, eta={eta})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub stepsize: StepsizeRule,
    pub accelerate: bool,
    pub eps_tol: f64,
    /// Optional extra stopping condition on `‖θ_k − θ_{k−1}‖₂`.
    pub step_tol: Option<f64>,
    pub max_iters: usize,
    pub record_trace: bool,
}

impl SolverConfig {
    /// Constant stepsize at 99% of the admissible bound.
    pub fn default_constant(spec: &PenaltySpec, data: &Dataset) -> Self {
        Self::with_rule(StepsizeRule::Constant(
            DEFAULT_STEP_FRACTION * max_constant_stepsize(spec, data),
        ))
    }

    /// Backtracking with `η = 0.5` and `α_0 = 0.49/(βζ)`, or `α_0 = 1` when
    /// `ζ = 0`.
    pub fn default_backtracking(spec: &PenaltySpec) -> Self {
        let bz = spec.beta * spec.zeta;
        let alpha0 = if bz > 0.0 { 0.49 / bz } else { 1.0 };
        Self::with_rule(StepsizeRule::Backtracking {
            alpha0,
            eta: DEFAULT_ETA,
        })
    }

    pub fn with_rule(stepsize: StepsizeRule) -> Self {
        SolverConfig {
            stepsize,
            accelerate: false,
            eps_tol: DEFAULT_EPS_TOL,
            step_tol: None,
            max_iters: DEFAULT_MAX_ITERS,
            record_trace: true,
        }
    }

    pub fn accelerated(mut self, on: bool) -> Self {
        self.accelerate = on;
        self
    }

    pub fn eps_tol(mut self, eps_tol: f64) -> Self {
        self.eps_tol = eps_tol;
        self
    }

    pub fn step_tol(mut self, step_tol: Option<f64>) -> Self {
        self.step_tol = step_tol;
        self
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    fn should_stop(&self, change: f64, step_norm: f64) -> bool {
        change <= self.eps_tol && self.step_tol.is_none_or(|st| step_norm <= st)
    }

    /// Checks the stepsize preconditions for this problem.
    pub fn validate(&self, spec: &PenaltySpec, data: &Dataset) -> Result<()> {
        if !(self.eps_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eps_tol must be positive, got {}",
                self.eps_tol
            )));
        }
        if let Some(st) = self.step_tol {
            if !(st >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "step_tol must be nonnegative, got {st}"
                )));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        match self.stepsize {
            StepsizeRule::Constant(alpha) => {
                let bound = max_constant_stepsize(spec, data);
                if !(alpha > 0.0 && alpha < bound) {
                    return Err(Error::StepsizeTooLarge { alpha, bound });
                }
            }
            StepsizeRule::Backtracking { alpha0, eta } => {
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "eta must lie in (0, 1), got {eta}"
                    )));
                }
                if !(alpha0 > 0.0 && alpha0.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "alpha0 must be positive and finite, got {alpha0}"
                    )));
                }
                let product = spec.beta * spec.zeta * alpha0;
                if product >= 0.5 {
                    return Err(Error::InvalidConfig(format!(
                        "backtracking needs beta*zeta*alpha0 < 1/2, got {product}; \
                         alpha0 must be below {}",
                        0.5 / (spec.beta * spec.zeta)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    /// `‖θ_k − θ_{k−1}‖₂` (zero on the initial row).
    pub step_norm: f64,
    /// Criticality residual at `θ_k`, see [`criticality_residual`].
    pub residual: f64,
    pub stepsize: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta: ModelVector,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub step_norm: f64,
    pub residual: f64,
    pub stepsize: f64,
    /// Empty unless the config asked for it.
    pub trace: Vec<TraceRecord>,
}

impl FitResult {
    /// The final iterate is large enough that the data are probably
    /// separable and the objective is only approached at infinity.
    pub fn possible_separable_escape(&self) -> bool {
        self.theta.dot(&self.theta).sqrt() > SEPARABLE_ESCAPE_NORM
    }
}

/// Starting point for the iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zero,
    /// Uniform in `[−0.01, 0.01]` from the given seed.
    SmallRandom(u64),
}

pub fn initial_point(init: Init, dim: usize) -> ModelVector {
    match init {
        Init::Zero => Array1::zeros(dim),
        Init::SmallRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(crate::data::stream::INIT);
            (0..dim).map(|_| rng.random_range(-0.01..=0.01)).collect()
        }
    }
}

/// `1 / max(2βζ, ‖X‖²/8 + βζ)`: every constant stepsize strictly below this
/// keeps the objective monotone.
pub fn max_constant_stepsize(spec: &PenaltySpec, data: &Dataset) -> f64 {
    max_constant_stepsize_for_norm(spec.beta, spec.zeta, data.operator_norm())
}

/// [`max_constant_stepsize`] with `‖X‖` given directly.
pub fn max_constant_stepsize_for_norm(beta: f64, zeta: f64, norm: f64) -> f64 {
    let bz = beta * zeta;
    1.0 / (2.0 * bz).max(0.125 * norm * norm + bz)
}

/// `l(θ) + β J(θ)`.
pub fn objective(theta: ArrayView1<f64>, spec: &PenaltySpec, data: &Dataset) -> Result<f64> {
    Ok(loss(theta, data)? + spec.beta * spec.total(theta))
}

/// `prox_{αβJ}(θ − α∇l(θ))`.
pub fn prox_grad_step(
    theta: ArrayView1<f64>,
    alpha: f64,
    spec: &PenaltySpec,
    data: &Dataset,
) -> Result<ModelVector> {
    let grad = loss_gradient(theta, data)?;
    step_from_gradient(theta, grad.view(), alpha, spec)
}

fn step_from_gradient(
    theta: ArrayView1<f64>,
    grad: ArrayView1<f64>,
    alpha: f64,
    spec: &PenaltySpec,
) -> Result<ModelVector> {
    let mut v = theta.to_owned();
    v.scaled_add(-alpha, &grad);
    spec.prox_vec(v.view(), alpha * spec.beta)
}

/// Outcome of one backtracking search.
#[derive(Debug, Clone)]
pub struct BacktrackStep {
    pub alpha: f64,
    pub theta: ModelVector,
    pub loss: f64,
    /// Number of reductions `n_k`.
    pub reductions: usize,
}

/// Finds the smallest `n ≥ 0` such that `α = η^n α_prev` and
/// `θ = prox_{αβJ}(θ_prev − α∇l(θ_prev))` satisfy
/// `l(θ) ≤ l(θ_prev) + ⟨θ − θ_prev, ∇l(θ_prev)⟩ + ‖θ − θ_prev‖²/(2α)`.
///
/// The prox is recomputed for every candidate `α`. Loss values carry a
/// rounding slack of a few ulps of `l(θ_prev)` so that noise near a fixed
/// point does not shrink the step forever.
pub fn backtrack_stepsize(
    theta_prev: ArrayView1<f64>,
    alpha_prev: f64,
    eta: f64,
    spec: &PenaltySpec,
    data: &Dataset,
) -> Result<BacktrackStep> {
    let (loss_prev, grad_prev) = loss_and_gradient(theta_prev, data)?;
    backtrack_from(theta_prev, loss_prev, grad_prev.view(), alpha_prev, eta, spec, data)
}

fn backtrack_from(
    theta_prev: ArrayView1<f64>,
    loss_prev: f64,
    grad_prev: ArrayView1<f64>,
    alpha_prev: f64,
    eta: f64,
    spec: &PenaltySpec,
    data: &Dataset,
) -> Result<BacktrackStep> {
    let slack = 8.0 * f64::EPSILON * (1.0 + loss_prev.abs());
    let mut alpha = alpha_prev;
    for reductions in 0..=MAX_BACKTRACKS {
        let theta = step_from_gradient(theta_prev, grad_prev, alpha, spec)?;
        let diff = &theta - &theta_prev;
        let candidate_loss = loss(theta.view(), data)?;
        let bound = loss_prev + diff.dot(&grad_prev) + diff.dot(&diff) / (2.0 * alpha);
        if candidate_loss <= bound + slack {
            return Ok(BacktrackStep {
                alpha,
                theta,
                loss: candidate_loss,
                reductions,
            });
        }
        alpha *= eta;
    }
    Err(Error::BacktrackingExhausted(MAX_BACKTRACKS))
}

/// `min_{g ∈ ∂G(θ)} ‖βg − 2βζθ + ∇l(θ)‖₂`.
///
/// `∂G(θ_i) − 2ζθ_i` is the interval `[F'_-(θ_i), F'_+(θ_i)]`, so the
/// minimizing `g` is found by clamping `−∇l(θ)_i / β` into it.
pub fn criticality_residual(
    theta: ArrayView1<f64>,
    spec: &PenaltySpec,
    data: &Dataset,
) -> Result<f64> {
    let grad = loss_gradient(theta, data)?;
    Ok(residual_from_gradient(theta, grad.view(), spec))
}

pub(crate) fn residual_from_gradient(
    theta: ArrayView1<f64>,
    grad: ArrayView1<f64>,
    spec: &PenaltySpec,
) -> f64 {
    theta
        .iter()
        .zip(grad)
        .map(|(&t, &g)| {
            let (lo, hi) = spec.derivatives(t);
            let target = -g;
            let dist = (spec.beta * lo - target).max(target - spec.beta * hi).max(0.0);
            dist * dist
        })
        .sum::<f64>()
        .sqrt()
}

fn check_start(theta0: ArrayView1<f64>, data: &Dataset) -> Result<()> {
    if theta0.len() != data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: data.n_features(),
            found: theta0.len(),
        });
    }
    if theta0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("initial point has non-finite entries".into()));
    }
    Ok(())
}

fn initial_alpha(rule: StepsizeRule) -> f64 {
    match rule {
        StepsizeRule::Constant(a) => a,
        StepsizeRule::Backtracking { alpha0, .. } => alpha0,
    }
}

fn distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Runs proximal gradient descent from `theta0`.
///
/// Dispatches to [`accelerated_fit`] when the config asks for acceleration.
pub fn fit(
    data: &Dataset,
    spec: &PenaltySpec,
    config: &SolverConfig,
    theta0: ArrayView1<f64>,
) -> Result<FitResult> {
    if config.accelerate {
        return accelerated_fit(data, spec, config, theta0);
    }
    config.validate(spec, data)?;
    check_start(theta0, data)?;

    let mut theta = theta0.to_owned();
    let (mut cur_loss, mut grad) = loss_and_gradient(theta.view(), data)?;
    let mut obj = cur_loss + spec.beta * spec.total(theta.view());
    if !obj.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let mut alpha = initial_alpha(config.stepsize);
    let mut residual = residual_from_gradient(theta.view(), grad.view(), spec);
    let mut step_norm = 0.0;
    let mut trace = Vec::new();
    if config.record_trace {
        trace.push(TraceRecord {
            iter: 0,
            objective: obj,
            step_norm,
            residual,
            stepsize: alpha,
        });
    }

    let mut iterations = 0;
    let mut converged = false;
    for k in 1..=config.max_iters {
        let next = match config.stepsize {
            StepsizeRule::Constant(a) => step_from_gradient(theta.view(), grad.view(), a, spec)?,
            StepsizeRule::Backtracking { eta, .. } => {
                let step =
                    backtrack_from(theta.view(), cur_loss, grad.view(), alpha, eta, spec, data)?;
                alpha = step.alpha;
                step.theta
            }
        };
        let (next_loss, next_grad) = loss_and_gradient(next.view(), data)?;
        let next_obj = next_loss + spec.beta * spec.total(next.view());
        if !next_obj.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        step_norm = distance(next.view(), theta.view());
        residual = residual_from_gradient(next.view(), next_grad.view(), spec);
        let change = (next_obj - obj).abs();

        theta = next;
        grad = next_grad;
        cur_loss = next_loss;
        obj = next_obj;
        iterations = k;
        if config.record_trace {
            trace.push(TraceRecord {
                iter: k,
                objective: obj,
                step_norm,
                residual,
                stepsize: alpha,
            });
        }
        if config.should_stop(change, step_norm) {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        theta,
        iterations,
        converged,
        objective: obj,
        step_norm,
        residual,
        stepsize: alpha,
        trace,
    })
}

/// Momentum sequence `t_1 = 1`, `t_{k+1} = (1 + √(1 + 4t_k²)) / 2`.
pub fn next_momentum(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Nesterov-accelerated proximal gradient (accelerated IFSA).
///
/// With `θ̂_0 = θ_1 = theta0` and `t_1 = 1`, each iteration computes
/// `θ̂_k` as a prox-gradient step at the extrapolated point `θ_k`, then
/// `θ_{k+1} = θ̂_k + ((t_k − 1)/t_{k+1})(θ̂_k − θ̂_{k−1})`. There is no
/// restart. The objective-change stopping test is applied to the `θ̂`
/// sequence, which is also what the trace and the result report.
pub fn accelerated_fit(
    data: &Dataset,
    spec: &PenaltySpec,
    config: &SolverConfig,
    theta0: ArrayView1<f64>,
) -> Result<FitResult> {
    config.validate(spec, data)?;
    check_start(theta0, data)?;

    let mut hat_prev = theta0.to_owned();
    let mut point = theta0.to_owned();
    let mut t = 1.0;
    let (l0, g0) = loss_and_gradient(hat_prev.view(), data)?;
    let mut obj = l0 + spec.beta * spec.total(hat_prev.view());
    if !obj.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let mut alpha = initial_alpha(config.stepsize);
    let mut residual = residual_from_gradient(hat_prev.view(), g0.view(), spec);
    let mut step_norm = 0.0;
    let mut trace = Vec::new();
    if config.record_trace {
        trace.push(TraceRecord {
            iter: 0,
            objective: obj,
            step_norm,
            residual,
            stepsize: alpha,
        });
    }

    let mut iterations = 0;
    let mut converged = false;
    for k in 1..=config.max_iters {
        let (point_loss, point_grad) = loss_and_gradient(point.view(), data)?;
        let hat = match config.stepsize {
            StepsizeRule::Constant(a) => {
                step_from_gradient(point.view(), point_grad.view(), a, spec)?
            }
            StepsizeRule::Backtracking { eta, .. } => {
                let step = backtrack_from(
                    point.view(),
                    point_loss,
                    point_grad.view(),
                    alpha,
                    eta,
                    spec,
                    data,
                )?;
                alpha = step.alpha;
                step.theta
            }
        };
        let t_next = next_momentum(t);
        let momentum = (t - 1.0) / t_next;
        point = &hat + &((&hat - &hat_prev) * momentum);
        t = t_next;

        let (hat_loss, hat_grad) = loss_and_gradient(hat.view(), data)?;
        let hat_obj = hat_loss + spec.beta * spec.total(hat.view());
        if !hat_obj.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        step_norm = distance(hat.view(), hat_prev.view());
        residual = residual_from_gradient(hat.view(), hat_grad.view(), spec);
        let change = (hat_obj - obj).abs();
        obj = hat_obj;
        hat_prev = hat;
        iterations = k;
        if config.record_trace {
            trace.push(TraceRecord {
                iter: k,
                objective: obj,
                step_norm,
                residual,
                stepsize: alpha,
            });
        }
        if config.should_stop(change, step_norm) {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        theta: hat_prev,
        iterations,
        converged,
        objective: obj,
        step_norm,
        residual,
        stepsize: alpha,
        trace,
    })
}

pub const TRACE_HEADER: &str = "iter,objective,step_norm,residual,stepsize";

/// Writes the trace as CSV with full-precision floats.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iter, r.objective, r.step_norm, r.residual, r.stepsize
        )?;
    }
    Ok(())
}

/// Parses CSV written by [`write_trace_csv`].
pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let bad = |line: usize, message: String| Error::Parse {
        path: "<trace>".into(),
        line,
        column: 0,
        message,
    };
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<trace>", e))?;
        if idx == 0 {
            if line.trim() != TRACE_HEADER {
                return Err(bad(1, format!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(idx + 1, format!("expected 5 fields, got {}", fields.len())));
        }
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| bad(idx + 1, format!("{s:?}: {e}")))
        };
        records.push(TraceRecord {
            iter: fields[0]
                .parse()
                .map_err(|e| bad(idx + 1, format!("{:?}: {e}", fields[0])))?,
            objective: float(fields[1])?,
            step_norm: float(fields[2])?,
            residual: float(fields[3])?,
            stepsize: float(fields[4])?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn centered_pair() -> Dataset {
        Dataset::new(array![[2.0, -1.0], [-2.0, 1.0]], array![1.0, 0.0]).unwrap()
    }

    fn small_problem() -> Dataset {
        let x = array![
            [0.3, -1.2, 0.5],
            [1.1, 0.4, -0.7],
            [-0.8, 0.9, 0.2],
            [0.5, -0.3, -1.5],
            [-1.4, -0.6, 0.8],
            [0.2, 1.3, 0.1]
        ];
        Dataset::new(x, array![1.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn stepsize_bound_examples() {
        let a = max_constant_stepsize_for_norm(1.2, 0.1, 1.0);
        assert!((a - 1.0 / 0.245).abs() < 1e-12);
        assert!(a > 4.08 && a < 4.09);
        assert!((max_constant_stepsize_for_norm(1.0, 0.0, 2.0) - 2.0).abs() < 1e-15);
        assert!((max_constant_stepsize_for_norm(1e-12, 0.1, 1.0) - 8.0).abs() < 1e-9);
        // 2βζ dominates for large βζ
        assert!((max_constant_stepsize_for_norm(10.0, 1.0, 1.0) - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 1.2).unwrap();
        let bound = max_constant_stepsize(&spec, &data);
        let err = SolverConfig::with_rule(StepsizeRule::Constant(bound * 1.01))
            .validate(&spec, &data)
            .unwrap_err();
        assert!(matches!(err, Error::StepsizeTooLarge { .. }));
        assert!(err.to_string().contains(&format!("{bound}")));
        assert!(SolverConfig::default_constant(&spec, &data)
            .validate(&spec, &data)
            .is_ok());
        assert!(SolverConfig::default_backtracking(&spec)
            .validate(&spec, &data)
            .is_ok());
        let bad_eta = SolverConfig::with_rule(StepsizeRule::Backtracking { alpha0: 1.0, eta: 1.0 });
        assert!(bad_eta.validate(&spec, &data).is_err());
        let bad_alpha0 = SolverConfig::with_rule(StepsizeRule::Backtracking {
            alpha0: 0.5 / (1.2 * 0.1),
            eta: 0.5,
        });
        assert!(bad_alpha0.validate(&spec, &data).is_err());
        assert!(SolverConfig::default_constant(&spec, &data)
            .eps_tol(0.0)
            .validate(&spec, &data)
            .is_err());
        assert!(SolverConfig::default_constant(&spec, &data)
            .max_iters(0)
            .validate(&spec, &data)
            .is_err());
    }

    #[test]
    fn zero_is_fixed_above_threshold() {
        // threshold = ‖(2, -1)‖_∞ = 2
        let data = centered_pair();
        let spec = PenaltySpec::mcp(0.1, 2.5).unwrap();
        let alpha = 0.9 * max_constant_stepsize(&spec, &data);
        let next = prox_grad_step(Array1::zeros(2).view(), alpha, &spec, &data).unwrap();
        assert_eq!(next, Array1::<f64>::zeros(2));

        let cfg = SolverConfig::default_constant(&spec, &data);
        let res = fit(&data, &spec, &cfg, Array1::zeros(2).view()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.theta, Array1::<f64>::zeros(2));
        assert_eq!(res.residual, 0.0);
        assert_eq!(criticality_residual(res.theta.view(), &spec, &data).unwrap(), 0.0);
    }

    #[test]
    fn plateau_entry_with_zero_gradient_is_fixed() {
        // the second feature is identically zero, so ∇l(θ)_2 = 0 for every θ
        let x = array![[1.0, 0.0], [-1.0, 0.0], [0.5, 0.0]];
        let data = Dataset::new(x, array![1.0, 0.0, 0.0]).unwrap();
        let spec = PenaltySpec::mcp(0.1, 0.5).unwrap();
        let theta = array![0.0, 7.0];
        assert_eq!(loss_gradient(theta.view(), &data).unwrap()[1], 0.0);
        let alpha = 0.5 * max_constant_stepsize(&spec, &data);
        let next = prox_grad_step(theta.view(), alpha, &spec, &data).unwrap();
        assert_eq!(next[1], 7.0);
    }

    #[test]
    fn prox_step_matches_grid_search() {
        let x = array![[0.9, -0.4], [-0.3, 1.1], [0.5, 0.6], [-1.2, 0.2]];
        let data = Dataset::new(x, array![1.0, 0.0, 1.0, 0.0]).unwrap();
        let spec = PenaltySpec::mcp(0.3, 0.4).unwrap();
        let theta = array![0.7, -0.2];
        let alpha = 0.9 * max_constant_stepsize(&spec, &data);
        let step = prox_grad_step(theta.view(), alpha, &spec, &data).unwrap();

        let g = loss_gradient(theta.view(), &data).unwrap();
        let v = &theta - &(&g * alpha);
        let obj = |u: [f64; 2]| {
            alpha * spec.beta * (spec.value(u[0]) + spec.value(u[1]))
                + 0.5 * ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2))
        };
        let h = 1e-3;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in -3000..=3000 {
            for j in -3000..=3000 {
                let u = [i as f64 * h, j as f64 * h];
                let o = obj(u);
                if o < best.0 {
                    best = (o, u);
                }
            }
        }
        assert!((step[0] - best.1[0]).abs() <= h && (step[1] - best.1[1]).abs() <= h);
        assert!(obj([step[0], step[1]]) <= best.0 + 1e-12);
    }

    #[test]
    fn backtracking_accepts_admissible_step_unchanged() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let alpha = 1.0 / crate::model::lipschitz_bound(&data);
        let theta = array![0.2, -0.1, 0.4];
        let step = backtrack_stepsize(theta.view(), alpha, 0.5, &spec, &data).unwrap();
        assert_eq!(step.reductions, 0);
        assert_eq!(step.alpha, alpha);
    }

    #[test]
    fn backtracking_from_oversized_step() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let big = 10.0 * max_constant_stepsize(&spec, &data);
        let step = backtrack_stepsize(array![0.2, -0.1, 0.4].view(), big, 0.5, &spec, &data).unwrap();
        assert!(step.reductions > 0);
        let lip = crate::model::lipschitz_bound(&data);
        // accepted no later than the first candidate at or below 1/L
        assert!(step.alpha > 0.5 / lip || step.reductions == 0);
        assert!(step.alpha <= big);
    }

    #[test]
    fn backtracking_trace_is_nonincreasing() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.2, 0.3).unwrap();
        let cfg = SolverConfig::default_backtracking(&spec);
        let res = fit(&data, &spec, &cfg, Array1::zeros(3).view()).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1].stepsize <= w[0].stepsize);
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
    }

    #[test]
    fn momentum_sequence_prefix() {
        let t2 = next_momentum(1.0);
        assert!((t2 - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let t3 = next_momentum(t2);
        assert!((t3 - 2.193_527_085_331_054).abs() < 1e-12);
        assert_eq!((1.0 - 1.0) / t2, 0.0);
    }

    #[test]
    fn first_accelerated_iterate_matches_plain() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let cfg = SolverConfig::default_constant(&spec, &data).max_iters(1);
        let theta0 = array![0.1, 0.0, -0.1];
        let plain = fit(&data, &spec, &cfg, theta0.view()).unwrap();
        let acc = accelerated_fit(&data, &spec, &cfg, theta0.view()).unwrap();
        assert_eq!(plain.theta, acc.theta);
    }

    #[test]
    fn accelerated_converges_on_small_problem() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let cfg = SolverConfig::default_constant(&spec, &data).accelerated(true);
        let res = fit(&data, &spec, &cfg, Array1::zeros(3).view()).unwrap();
        assert!(res.converged);
        assert!(res.residual < 1e-3);
    }

    #[test]
    fn rejects_mismatched_start() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let cfg = SolverConfig::default_constant(&spec, &data);
        assert!(matches!(
            fit(&data, &spec, &cfg, Array1::zeros(2).view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn small_random_init_is_bounded_and_seeded() {
        let a = initial_point(Init::SmallRandom(3), 50);
        assert!(a.iter().all(|v| v.abs() <= 0.01));
        assert_eq!(a, initial_point(Init::SmallRandom(3), 50));
        assert_ne!(a, initial_point(Init::SmallRandom(4), 50));
        assert_eq!(initial_point(Init::Zero, 3), Array1::<f64>::zeros(3));
    }

    #[test]
    fn trace_csv_round_trip() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.1, 0.3).unwrap();
        let cfg = SolverConfig::default_constant(&spec, &data).max_iters(20);
        let res = fit(&data, &spec, &cfg, Array1::zeros(3).view()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &res.trace).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(TRACE_HEADER));
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back, res.trace);
    }

    #[test]
    fn objective_is_nonnegative() {
        let data = small_problem();
        let spec = PenaltySpec::mcp(0.5, 2.0).unwrap();
        let theta = Array2::<f64>::zeros((1, 3)).row(0).to_owned();
        assert!(objective(theta.view(), &spec, &data).unwrap() > 0.0);
    }
}
