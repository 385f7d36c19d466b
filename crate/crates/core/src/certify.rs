//! Checkable optimality theory for `l(θ) + β J(θ)`.
//!
//! * [`is_problem_nonconvex`]: a rank-deficient data matrix makes the
//!   problem nonconvex for every `ζ > 0`.
//! * [`check_critical_point`], [`check_sufficient_local_opt`] and
//!   [`check_necessary_local_opt`]: coordinatewise first- and second-order
//!   tests for a general weakly convex penalty.
//! * [`check_mcp_local_opt`]: the exact characterization available for MCP
//!   once `βζ > ‖X‖²/8`, packaged into a [`CertificateReport`].
//! * [`beta_threshold`]: on centered data, `β` above
//!   `‖Σ_{y=1} x‖_∞ / F'_+(0)` makes `θ = 0` a local minimum and `β` below
//!   it makes `0` not even critical.
//!
//! All coordinate tests use the identity `∂G(θ_i) − 2ζθ_i = [F'_-(θ_i),
//! F'_+(θ_i)]`, so criticality reads `−∇l(θ)_i ∈ β [F'_-(θ_i), F'_+(θ_i)]`.

use std::fmt;
use std::io::Write;

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::loss_gradient;
use crate::penalty::{PenaltyKind, PenaltySpec, WeaklyConvex};
use crate::solver::{objective, SEPARABLE_ESCAPE_NORM};

/// The problem is nonconvex for any `ζ > 0` when `rank(X) < d`.
pub fn is_problem_nonconvex(data: &Dataset) -> bool {
    data.n_samples() < data.n_features()
        || linalg::numerical_rank(data.features()) < data.n_features()
}

/// `‖Σ_{y=1} x‖_∞ / F'_+(0)` on centered data.
pub fn beta_threshold(data: &Dataset, penalty: &impl WeaklyConvex) -> Result<f64> {
    if !data.is_centered() {
        return Err(Error::Uncentered);
    }
    let mut positive_sum = Array1::<f64>::zeros(data.n_features());
    for (row, &y) in data.features().outer_iter().zip(data.labels()) {
        if y == 1.0 {
            positive_sum += &row;
        }
    }
    let inf_norm = positive_sum.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let slope = penalty.derivatives(0.0).1;
    Ok(inf_norm / slope)
}

/// Where `β` sits relative to the zero-solution threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRegime {
    /// `β` below the threshold: `0` is not a critical point.
    ZeroNotLocalMin,
    /// `β` above the threshold: `0` is a local minimum.
    ZeroLocalMin,
    /// `β` equals the threshold up to rounding; no conclusion.
    Indeterminate,
}

impl ThresholdRegime {
    pub fn classify(beta: f64, threshold: f64) -> Self {
        let gap = beta - threshold;
        if gap.abs() <= 1e-12 * threshold.abs().max(beta.abs()) {
            ThresholdRegime::Indeterminate
        } else if gap > 0.0 {
            ThresholdRegime::ZeroLocalMin
        } else {
            ThresholdRegime::ZeroNotLocalMin
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdRegime::ZeroNotLocalMin => "zero-not-local-min",
            ThresholdRegime::ZeroLocalMin => "zero-local-min",
            ThresholdRegime::Indeterminate => "indeterminate",
        }
    }
}

fn check_dims(theta: ArrayView1<f64>, data: &Dataset) -> Result<()> {
    if theta.len() != data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: data.n_features(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// Per-coordinate inputs to the local tests, in gradient units.
struct Coord {
    /// `−∇l(θ)_i`
    target: f64,
    /// `β F'_-(θ_i)`, `β F'_+(θ_i)`
    lo: f64,
    hi: f64,
    kink: bool,
    h2: (f64, f64),
}

fn coords(theta: ArrayView1<f64>, grad: &Array1<f64>, spec: &PenaltySpec) -> Vec<Coord> {
    theta.iter().zip(grad).map(|(&t, &g)| {
        let (l, r) = spec.derivatives(t);
        Coord {
            target: -g,
            lo: spec.beta * l,
            hi: spec.beta * r,
            kink: l < r,
            h2: spec.h_second_derivatives(t),
        }
    })
    .collect()
}

/// `2ζθ_i − ∇l(θ)_i/β ∈ [H'_-(θ_i), H'_+(θ_i)]` for every `i`, with the
/// interval widened by `tol` on each side.
pub fn check_critical_point(
    theta: ArrayView1<f64>,
    spec: &PenaltySpec,
    data: &Dataset,
    tol: f64,
) -> Result<bool> {
    check_dims(theta, data)?;
    let grad = loss_gradient(theta, data)?;
    let slack = tol * spec.beta;
    Ok(coords(theta, &grad, spec).iter().all(|c| c.target >= c.lo - slack && c.target <= c.hi + slack))
}

/// Sufficient condition for a local minimum.
///
/// At a kink the inclusion must hold strictly (shrunk by `tol`); elsewhere
/// it must hold as an equality within `tol` and both one-sided `H''` must be
/// at least `2ζ`. `tol` is in the same rescaled units as
/// [`check_critical_point`].
pub fn check_sufficient_local_opt(
    theta: ArrayView1<f64>,
    spec: &PenaltySpec,
    data: &Dataset,
    tol: f64,
) -> Result<bool> {
    check_dims(theta, data)?;
    let grad = loss_gradient(theta, data)?;
    let slack = tol * spec.beta;
    let curvature = 2.0 * spec.zeta;
    Ok(coords(theta, &grad, spec).iter().all(|c| {
        if c.kink {
            c.target > c.lo + slack && c.target < c.hi - slack
        } else {
            (c.target - c.lo).abs() <= slack && c.h2.0 >= curvature && c.h2.1 >= curvature
        }
    }))
}

/// Necessary condition for a local minimum; `false` certifies that `θ` is
/// not one.
///
/// At a kink the inclusion must hold (widened by `tol`); elsewhere the
/// equality must hold within `tol` and both one-sided `H''` must be at least
/// `2ζ − ‖X‖²/(4β)`.
pub fn check_necessary_local_opt(
    theta: ArrayView1<f64>,
    spec: &PenaltySpec,
    data: &Dataset,
    tol: f64,
) -> Result<bool> {
    check_dims(theta, data)?;
    let grad = loss_gradient(theta, data)?;
    let slack = tol * spec.beta;
    let norm = data.operator_norm();
    let curvature = 2.0 * spec.zeta - 0.25 * norm * norm / spec.beta;
    Ok(coords(theta, &grad, spec).iter().all(|c| {
        if c.kink {
            c.target >= c.lo - slack && c.target <= c.hi + slack
        } else {
            (c.target - c.lo).abs() <= slack && c.h2.0 >= curvature && c.h2.1 >= curvature
        }
    }))
}

/// Classification of one coordinate under the MCP characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateCase {
    /// `θ_j = 0` and `|∇l_j| < β − margin`.
    ZeroStrict,
    /// `θ_j = 0` and `|∇l_j|` within `margin` of `β`.
    ZeroBoundary,
    /// `|θ_j| > 1/(2ζ)` and `|∇l_j| ≤ grad_tol`.
    ActiveAboveKink,
    /// `0 < |θ_j| ≤ 1/(2ζ)`.
    InnerRegion,
    GradientNonzero,
}

impl CoordinateCase {
    pub fn passes(&self) -> bool {
        matches!(self, CoordinateCase::ZeroStrict | CoordinateCase::ActiveAboveKink)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CoordinateCase::ZeroStrict => "ZeroStrict",
            CoordinateCase::ZeroBoundary => "ZeroBoundary",
            CoordinateCase::ActiveAboveKink => "ActiveAboveKink",
            CoordinateCase::InnerRegion => "InnerRegion",
            CoordinateCase::GradientNonzero => "GradientNonzero",
        }
    }
}

impl fmt::Display for CoordinateCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateVerdict {
    pub index: usize,
    pub case: CoordinateCase,
    pub abs_grad: f64,
    pub abs_theta: f64,
}

/// Slack used to certify strict inequalities in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Gradient magnitude accepted as zero on active coordinates.
    pub grad_tol: f64,
    /// Distance below `β` required of `|∇l_j|` on zero coordinates.
    pub margin: f64,
}

impl Tolerances {
    /// `grad_tol = 1e-6 (1 + ‖X‖)`, `margin = 1e-9 β`.
    pub fn defaults(beta: f64, data: &Dataset) -> Self {
        Tolerances {
            grad_tol: 1e-6 * (1.0 + data.operator_norm()),
            margin: 1e-9 * beta,
        }
    }

    pub fn exact() -> Self {
        Tolerances {
            grad_tol: 0.0,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub beta: f64,
    pub zeta: f64,
    pub operator_norm: f64,
    pub per_coordinate: Vec<CoordinateVerdict>,
    pub is_critical_point: bool,
    pub satisfies_sufficient: bool,
    pub satisfies_necessary: bool,
    /// `βζ > ‖X‖²/8` and the penalty is MCP.
    pub mcp_iff_applicable: bool,
    /// Present exactly when `mcp_iff_applicable`.
    pub mcp_iff_verdict: Option<bool>,
    /// Only available on centered data.
    pub beta_threshold: Option<f64>,
    pub threshold_regime: Option<ThresholdRegime>,
    pub problem_nonconvex: bool,
    /// `‖θ‖ > 1e3`: likely separable data, no finite certificate exists.
    pub possible_separable_escape: bool,
}

/// Coordinatewise MCP classification plus the general checks, the zero
/// threshold (centered data only) and the rank-based nonconvexity flag.
pub fn check_mcp_local_opt(
    theta: ArrayView1<f64>,
    spec: &PenaltySpec,
    data: &Dataset,
    tols: Tolerances,
) -> Result<CertificateReport> {
    check_dims(theta, data)?;
    let grad = loss_gradient(theta, data)?;
    let beta = spec.beta;
    let norm = data.operator_norm();
    let kink = if spec.zeta > 0.0 {
        0.5 / spec.zeta
    } else {
        f64::INFINITY
    };

    let per_coordinate: Vec<CoordinateVerdict> = theta
        .iter()
        .zip(&grad)
        .enumerate()
        .map(|(index, (&t, &g))| {
            let abs_grad = g.abs();
            let abs_theta = t.abs();
            let case = if t == 0.0 {
                if abs_grad < beta - tols.margin {
                    CoordinateCase::ZeroStrict
                } else if abs_grad <= beta + tols.margin {
                    CoordinateCase::ZeroBoundary
                } else {
                    CoordinateCase::GradientNonzero
                }
            } else if abs_theta > kink {
                if abs_grad <= tols.grad_tol {
                    CoordinateCase::ActiveAboveKink
                } else {
                    CoordinateCase::GradientNonzero
                }
            } else {
                CoordinateCase::InnerRegion
            };
            CoordinateVerdict {
                index,
                case,
                abs_grad,
                abs_theta,
            }
        })
        .collect();

    let mcp_iff_applicable =
        spec.kind == PenaltyKind::Mcp && beta * spec.zeta > 0.125 * norm * norm;
    let mcp_iff_verdict =
        mcp_iff_applicable.then(|| per_coordinate.iter().all(|c| c.case.passes()));

    let rescaled = tols.grad_tol / beta;
    let satisfies_sufficient = check_sufficient_local_opt(theta, spec, data, rescaled)?;
    let satisfies_necessary = check_necessary_local_opt(theta, spec, data, rescaled)?;
    let is_critical_point = check_critical_point(theta, spec, data, rescaled)?;

    let beta_threshold = if data.is_centered() {
        Some(beta_threshold(data, spec)?)
    } else {
        None
    };
    let threshold_regime = beta_threshold.map(|thr| ThresholdRegime::classify(beta, thr));

    Ok(CertificateReport {
        beta,
        zeta: spec.zeta,
        operator_norm: norm,
        per_coordinate,
        is_critical_point,
        satisfies_sufficient,
        satisfies_necessary,
        mcp_iff_applicable,
        mcp_iff_verdict,
        beta_threshold,
        threshold_regime,
        problem_nonconvex: is_problem_nonconvex(data),
        possible_separable_escape: theta.dot(&theta).sqrt() > SEPARABLE_ESCAPE_NORM,
    })
}

/// Largest objective decrease found over `draws` random perturbations of
/// Euclidean norm at most `radius` (zero if none decreases it).
pub fn perturbation_probe(
    theta: ArrayView1<f64>,
    spec: &PenaltySpec,
    data: &Dataset,
    radius: f64,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    let base = objective(theta, spec, data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let dir: Array1<f64> = (0..theta.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let n = dir.dot(&dir).sqrt();
        if n == 0.0 {
            continue;
        }
        let scale = radius * rng.random_range(0.0..=1.0) / n;
        let candidate = &theta + &(dir * scale);
        let value = objective(candidate.view(), spec, data)?;
        worst = worst.max(base - value);
    }
    Ok(worst)
}

impl CertificateReport {
    /// Structured text: `key = value` header lines, then one CSV record per
    /// coordinate.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let opt_bool = |v: Option<bool>| match v {
            Some(b) => b.to_string(),
            None => "n/a".to_string(),
        };
        writeln!(out, "format_version = 1")?;
        writeln!(out, "beta = {}", self.beta)?;
        writeln!(out, "zeta = {}", self.zeta)?;
        writeln!(out, "operator_norm = {}", self.operator_norm)?;
        writeln!(out, "problem_nonconvex = {}", self.problem_nonconvex)?;
        match self.beta_threshold {
            Some(t) => writeln!(out, "beta_threshold = {t}")?,
            None => writeln!(out, "beta_threshold = n/a")?,
        }
        writeln!(
            out,
            "threshold_regime = {}",
            self.threshold_regime.map_or("n/a", |r| r.as_str())
        )?;
        writeln!(out, "is_critical_point = {}", self.is_critical_point)?;
        writeln!(out, "satisfies_sufficient = {}", self.satisfies_sufficient)?;
        writeln!(out, "satisfies_necessary = {}", self.satisfies_necessary)?;
        writeln!(out, "mcp_iff_applicable = {}", self.mcp_iff_applicable)?;
        writeln!(out, "mcp_iff_verdict = {}", opt_bool(self.mcp_iff_verdict))?;
        writeln!(
            out,
            "possible_separable_escape = {}",
            self.possible_separable_escape
        )?;
        writeln!(out, "index,case,abs_grad,abs_theta")?;
        for c in &self.per_coordinate {
            writeln!(out, "{},{},{},{}", c.index, c.case, c.abs_grad, c.abs_theta)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn pair() -> Dataset {
        Dataset::new(array![[2.0, -1.0], [-2.0, 1.0]], array![1.0, 0.0])
            .unwrap()
            .centered()
    }

    #[test]
    fn threshold_of_centered_pair() {
        let d = pair();
        let spec = PenaltySpec::mcp(0.1, 1.0).unwrap();
        assert_eq!(beta_threshold(&d, &spec).unwrap(), 2.0);
    }

    #[test]
    fn threshold_needs_centered_data() {
        let d = Dataset::new(array![[2.0, -1.0], [-2.0, 1.0]], array![1.0, 0.0]).unwrap();
        let spec = PenaltySpec::mcp(0.1, 1.0).unwrap();
        assert!(matches!(beta_threshold(&d, &spec), Err(Error::Uncentered)));
    }

    #[test]
    fn threshold_without_positive_labels_is_zero() {
        let d = Dataset::new(array![[2.0, -1.0], [-2.0, 1.0]], array![0.0, 0.0])
            .unwrap()
            .centered();
        let spec = PenaltySpec::mcp(0.1, 1.0).unwrap();
        assert_eq!(beta_threshold(&d, &spec).unwrap(), 0.0);
    }

    #[test]
    fn threshold_scales_with_features() {
        let x = array![[1.0, 0.5, -2.0], [-0.5, 1.5, 0.25], [0.75, -1.0, 1.0], [-1.25, -1.0, 0.75]];
        let y = array![1.0, 0.0, 1.0, 0.0];
        let spec = PenaltySpec::mcp(0.1, 1.0).unwrap();
        let d = Dataset::new(x.clone(), y.clone()).unwrap().centered();
        let d3 = Dataset::new(x * 3.0, y).unwrap().centered();
        let t = beta_threshold(&d, &spec).unwrap();
        assert!((beta_threshold(&d3, &spec).unwrap() - 3.0 * t).abs() < 1e-12);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(ThresholdRegime::classify(2.0, 2.0), ThresholdRegime::Indeterminate);
        assert_eq!(ThresholdRegime::classify(2.1, 2.0), ThresholdRegime::ZeroLocalMin);
        assert_eq!(ThresholdRegime::classify(1.9, 2.0), ThresholdRegime::ZeroNotLocalMin);
    }

    #[test]
    fn zero_is_critical_only_above_threshold() {
        let d = pair();
        let zero = Array1::zeros(2);
        let above = PenaltySpec::mcp(0.1, 2.5).unwrap();
        let below = PenaltySpec::mcp(0.1, 1.5).unwrap();
        assert!(check_critical_point(zero.view(), &above, &d, 0.0).unwrap());
        assert!(!check_critical_point(zero.view(), &below, &d, 0.0).unwrap());
        assert!(check_sufficient_local_opt(zero.view(), &above, &d, 0.0).unwrap());
    }

    #[test]
    fn nonconvexity_from_rank() {
        let wide = Dataset::new(Array2::ones((5, 10)), Array1::zeros(5)).unwrap();
        assert!(is_problem_nonconvex(&wide));
        let eye = Dataset::new(Array2::eye(3), array![1.0, 0.0, 1.0]).unwrap();
        assert!(!is_problem_nonconvex(&eye));
        let dup = Dataset::new(array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]], array![1.0, 0.0, 1.0]).unwrap();
        assert!(is_problem_nonconvex(&dup));
    }

    /// Data whose second feature is all zeros, so `∇l(θ)_2 = 0` everywhere.
    fn with_dead_feature() -> Dataset {
        let x = array![[0.3, 0.0], [-0.2, 0.0], [0.1, 0.0], [-0.2, 0.0]];
        Dataset::new(x, array![1.0, 0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn inner_region_entry_is_rejected() {
        let d = with_dead_feature();
        // ‖X‖² is tiny, so βζ > ‖X‖²/8 holds comfortably
        let spec = PenaltySpec::mcp(0.5, 1.0).unwrap();
        let theta = array![0.0, 0.25 / 0.5];
        let rep = check_mcp_local_opt(theta.view(), &spec, &d, Tolerances::defaults(1.0, &d)).unwrap();
        assert!(rep.mcp_iff_applicable);
        assert_eq!(rep.per_coordinate[1].case, CoordinateCase::InnerRegion);
        assert_eq!(rep.mcp_iff_verdict, Some(false));
        assert!(!rep.satisfies_sufficient);
    }

    #[test]
    fn active_entry_with_zero_gradient_passes() {
        let d = with_dead_feature();
        let spec = PenaltySpec::mcp(0.5, 1.0).unwrap();
        let theta = array![0.0, 3.0];
        let rep = check_mcp_local_opt(theta.view(), &spec, &d, Tolerances::defaults(1.0, &d)).unwrap();
        assert_eq!(rep.per_coordinate[1].case, CoordinateCase::ActiveAboveKink);
        assert_eq!(rep.per_coordinate[0].case, CoordinateCase::ZeroStrict);
        assert_eq!(rep.mcp_iff_verdict, Some(true));
        assert!(rep.satisfies_sufficient && rep.satisfies_necessary && rep.is_critical_point);
    }

    #[test]
    fn active_entry_with_gradient_fails() {
        let x = array![[0.3, 0.5], [-0.2, -0.1], [0.1, 0.2], [-0.2, 0.4]];
        let d = Dataset::new(x, array![1.0, 0.0, 1.0, 0.0]).unwrap();
        let spec = PenaltySpec::mcp(0.5, 1.0).unwrap();
        let theta = array![0.0, 3.0];
        let rep = check_mcp_local_opt(theta.view(), &spec, &d, Tolerances::defaults(1.0, &d)).unwrap();
        assert_eq!(rep.per_coordinate[1].case, CoordinateCase::GradientNonzero);
        assert_eq!(rep.mcp_iff_verdict, Some(false));
    }

    #[test]
    fn verdict_absent_when_not_applicable() {
        let d = pair();
        let spec = PenaltySpec::mcp(0.01, 2.5).unwrap();
        let rep = check_mcp_local_opt(Array1::zeros(2).view(), &spec, &d, Tolerances::exact()).unwrap();
        assert!(!rep.mcp_iff_applicable);
        assert_eq!(rep.mcp_iff_verdict, None);
        assert_eq!(rep.beta_threshold, Some(2.0));
        assert_eq!(rep.threshold_regime, Some(ThresholdRegime::ZeroLocalMin));
    }

    #[test]
    fn zero_boundary_case() {
        let d = pair();
        let spec = PenaltySpec::mcp(2.0, 2.0).unwrap();
        let rep = check_mcp_local_opt(Array1::zeros(2).view(), &spec, &d, Tolerances::exact()).unwrap();
        assert_eq!(rep.per_coordinate[0].case, CoordinateCase::ZeroBoundary);
        assert_eq!(rep.threshold_regime, Some(ThresholdRegime::Indeterminate));
    }

    #[test]
    fn report_text_layout() {
        let d = pair();
        let spec = PenaltySpec::mcp(0.1, 2.5).unwrap();
        let rep = check_mcp_local_opt(Array1::zeros(2).view(), &spec, &d, Tolerances::exact()).unwrap();
        let mut buf = Vec::new();
        rep.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("beta_threshold = 2\n"));
        assert!(text.contains("index,case,abs_grad,abs_theta\n0,ZeroStrict,"));
        assert_eq!(text.lines().count(), 14 + 2);
    }

    #[test]
    fn probe_finds_no_descent_at_local_min() {
        let d = pair();
        let spec = PenaltySpec::mcp(0.1, 2.5).unwrap();
        let worst = perturbation_probe(Array1::zeros(2).view(), &spec, &d, 1e-4, 200, 7).unwrap();
        assert!(worst <= 1e-12);
        let below = PenaltySpec::mcp(0.1, 1.5).unwrap();
        let worst = perturbation_probe(Array1::zeros(2).view(), &below, &d, 1e-2, 200, 7).unwrap();
        assert!(worst > 0.0);
    }
}
