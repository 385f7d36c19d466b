//! Weakly convex sparsity-inducing penalties.
//!
//! A penalty here is a separable sum `J(x) = Σ F(x_i)` where `F` is even,
//! vanishes at zero, is nondecreasing on `[0, ∞)`, has `F(t)/t`
//! nonincreasing, and becomes convex after adding `ζ t²`. The scalar
//! `ζ` is the nonconvexity parameter and `H(t) = F(t) + ζ t²` is the convex
//! part used by the optimality checks.
//!
//! The only instance shipped is the minimax concave penalty ([`Mcp`]),
//! whose proximal map is the firm-shrinkage operator.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

/// A weakly convex, separable, sparsity-inducing penalty.
///
/// Solver and certification code only go through this trait, so another
/// penalty with a closed-form prox can be added without touching them.
pub trait WeaklyConvex {
    /// Nonconvexity parameter `ζ`.
    fn zeta(&self) -> f64;

    /// Scalar penalty `F(t)`.
    fn value(&self, t: f64) -> f64;

    /// One-sided derivatives `(F'_-(t), F'_+(t))`.
    fn derivatives(&self, t: f64) -> (f64, f64);

    /// One-sided second derivatives `(H''_-(t), H''_+(t))` of
    /// `H(t) = F(t) + ζ t²`. Only meaningful where `H` is differentiable.
    fn h_second_derivatives(&self, t: f64) -> (f64, f64);

    /// Minimizer of `w F(x) + (x - v)² / 2`, assuming `w ζ < 1/2`.
    fn prox_unchecked(&self, v: f64, w: f64) -> f64;

    /// One-sided derivatives of `H`.
    fn h_derivatives(&self, t: f64) -> (f64, f64) {
        let (left, right) = self.derivatives(t);
        let shift = 2.0 * self.zeta() * t;
        (left + shift, right + shift)
    }

    /// `F` has a kink at `t` (its one-sided derivatives differ).
    fn is_kink(&self, t: f64) -> bool {
        let (left, right) = self.derivatives(t);
        left < right
    }

    /// Fails unless `w ζ < 1/2`, the condition under which the prox
    /// objective is strongly convex and its minimizer unique.
    fn check_prox_weight(&self, w: f64) -> Result<()> {
        let product = w * self.zeta();
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "prox weight must be positive and finite, got {w}"
            )));
        }
        if product >= 0.5 {
            return Err(Error::ProxNotStronglyConvex {
                weight: w,
                zeta: self.zeta(),
                product,
            });
        }
        Ok(())
    }

    /// `argmin_x w F(x) + (x - v)² / 2`.
    fn prox(&self, v: f64, w: f64) -> Result<f64> {
        self.check_prox_weight(w)?;
        Ok(self.prox_unchecked(v, w))
    }

    /// `J(θ) = Σ F(θ_i)`.
    fn total(&self, theta: ArrayView1<f64>) -> f64 {
        theta.iter().map(|&t| self.value(t)).sum()
    }

    /// Elementwise prox, i.e. `argmin_x w J(x) + ‖x - v‖² / 2`.
    fn prox_vec(&self, v: ArrayView1<f64>, w: f64) -> Result<Array1<f64>> {
        self.check_prox_weight(w)?;
        Ok(v.mapv(|vi| self.prox_unchecked(vi, w)))
    }
}

/// Minimax concave penalty
///
/// `F(t) = |t| - ζ t²` for `|t| ≤ 1/(2ζ)` and `1/(4ζ)` beyond. With `ζ = 0`
/// the plateau moves to infinity and `F` is the absolute value, so the same
/// code path yields the ℓ1 penalty and soft thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcp {
    zeta: f64,
}

impl Mcp {
    pub fn new(zeta: f64) -> Result<Self> {
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidPenalty(format!(
                "zeta must be finite and nonnegative, got {zeta}"
            )));
        }
        Ok(Mcp { zeta })
    }

    /// Start of the plateau, `1/(2ζ)` (infinite when `ζ = 0`).
    pub fn kink(&self) -> f64 {
        if self.zeta == 0.0 {
            f64::INFINITY
        } else {
            0.5 / self.zeta
        }
    }
}

impl WeaklyConvex for Mcp {
    fn zeta(&self) -> f64 {
        self.zeta
    }

    fn value(&self, t: f64) -> f64 {
        let a = t.abs();
        if self.zeta == 0.0 {
            a
        } else if a <= self.kink() {
            a - self.zeta * a * a
        } else {
            0.25 / self.zeta
        }
    }

    fn derivatives(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (-1.0, 1.0);
        }
        let a = t.abs();
        let slope = if a >= self.kink() {
            0.0
        } else {
            1.0 - 2.0 * self.zeta * a
        };
        let d = slope.copysign(t);
        (d, d)
    }

    fn h_second_derivatives(&self, t: f64) -> (f64, f64) {
        // H is |t| on the inner band and 1/(4ζ) + ζt² beyond it.
        let outer = 2.0 * self.zeta;
        let kink = self.kink();
        let a = t.abs();
        if a < kink {
            (0.0, 0.0)
        } else if a > kink {
            (outer, outer)
        } else if t > 0.0 {
            (0.0, outer)
        } else {
            (outer, 0.0)
        }
    }

    fn prox_unchecked(&self, v: f64, w: f64) -> f64 {
        let a = v.abs();
        let shrunk = if a <= w {
            0.0
        } else if a <= self.kink() {
            (a - w) / (1.0 - 2.0 * w * self.zeta)
        } else {
            a
        };
        if shrunk == 0.0 {
            0.0
        } else {
            shrunk.copysign(v)
        }
    }
}

/// Supported penalty families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    Mcp,
}

/// Penalty family together with its nonconvexity parameter `ζ` and the
/// regularization weight `β` of the objective `l(θ) + β J(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub zeta: f64,
    pub beta: f64,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, zeta: f64, beta: f64) -> Result<Self> {
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidPenalty(format!(
                "zeta must be finite and nonnegative, got {zeta}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidPenalty(format!(
                "beta must be finite and positive, got {beta}"
            )));
        }
        Ok(PenaltySpec { kind, zeta, beta })
    }

    pub fn mcp(zeta: f64, beta: f64) -> Result<Self> {
        Self::new(PenaltyKind::Mcp, zeta, beta)
    }

    /// Same penalty with a different regularization weight.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.kind, self.zeta, beta)
    }

    fn instance(&self) -> Mcp {
        match self.kind {
            PenaltyKind::Mcp => Mcp { zeta: self.zeta },
        }
    }
}

impl WeaklyConvex for PenaltySpec {
    fn zeta(&self) -> f64 {
        self.zeta
    }

    fn value(&self, t: f64) -> f64 {
        self.instance().value(t)
    }

    fn derivatives(&self, t: f64) -> (f64, f64) {
        self.instance().derivatives(t)
    }

    fn h_second_derivatives(&self, t: f64) -> (f64, f64) {
        self.instance().h_second_derivatives(t)
    }

    fn prox_unchecked(&self, v: f64, w: f64) -> f64 {
        self.instance().prox_unchecked(v, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn mcp(zeta: f64) -> Mcp {
        Mcp::new(zeta).unwrap()
    }

    /// Piecewise formula tabulated directly: |t| - ζt² clipped at the plateau.
    fn tabulated(t: f64, zeta: f64) -> f64 {
        let raw = t.abs() - zeta * t * t;
        if t.abs() > 0.5 / zeta {
            0.25 / zeta
        } else {
            raw
        }
    }

    /// Grid minimization of w F(x) + (x - v)² / 2 over [lo, hi].
    fn grid_prox(p: &impl WeaklyConvex, v: f64, w: f64, lo: f64, hi: f64, h: f64) -> f64 {
        let n = ((hi - lo) / h).round() as usize;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let x = lo + k as f64 * h;
            let obj = w * p.value(x) + 0.5 * (x - v) * (x - v);
            if obj < best.0 {
                best = (obj, x);
            }
        }
        best.1
    }

    #[test]
    fn scalar_values() {
        let p = mcp(0.1);
        assert_eq!(p.value(0.0), 0.0);
        assert!((p.value(1.0) - 0.9).abs() < 1e-15);
        assert!((p.value(10.0) - 2.5).abs() < 1e-15);
        for k in -200..=200 {
            let t = k as f64 * 0.1;
            assert!((p.value(t) - tabulated(t, 0.1)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn vector_totals() {
        let p = mcp(0.1);
        assert_eq!(p.total(Array1::zeros(4).view()), 0.0);
        assert!((p.total(array![1.0, -1.0].view()) - 1.8).abs() < 1e-14);
        assert!((p.total(array![10.0, 10.0, 10.0].view()) - 7.5).abs() < 1e-14);
    }

    #[test]
    fn zero_zeta_is_absolute_value() {
        let p = mcp(0.0);
        assert_eq!(p.value(-3.5), 3.5);
        assert_eq!(p.kink(), f64::INFINITY);
        assert_eq!(p.derivatives(1e6), (1.0, 1.0));
    }

    #[test]
    fn prox_examples() {
        let p = mcp(0.1);
        assert_eq!(p.prox(0.5, 1.0).unwrap(), 0.0);
        assert!((p.prox(3.0, 1.0).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(p.prox(6.0, 1.0).unwrap(), 6.0);
        assert_eq!(mcp(0.0).prox(-3.0, 1.0).unwrap(), -2.0);
        // boundary |v| = w
        assert_eq!(p.prox(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(p.prox(-1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn prox_examples_match_grid_oracle() {
        let p = mcp(0.1);
        let g = grid_prox(&p, 3.0, 1.0, -10.0, 10.0, 1e-4);
        assert!((g - 2.5).abs() < 1e-4);
        let g = grid_prox(&mcp(0.0), -3.0, 1.0, -10.0, 10.0, 1e-4);
        assert!((g + 2.0).abs() < 1e-4);
    }

    #[test]
    fn prox_vector_examples() {
        let p = mcp(0.1);
        let out = p.prox_vec(array![0.5, 3.0, 6.0].view(), 1.0).unwrap();
        assert_eq!(out[0], 0.0);
        assert!((out[1] - 2.5).abs() < 1e-15);
        assert_eq!(out[2], 6.0);
        let out = p.prox_vec(array![-3.0, 3.0].view(), 1.0).unwrap();
        assert_eq!(out[0], -out[1]);
        assert!((out[1] - 2.5).abs() < 1e-15);
        assert_eq!(
            p.prox_vec(Array1::zeros(3).view(), 1.0).unwrap(),
            Array1::<f64>::zeros(3)
        );
    }

    #[test]
    fn prox_rejects_weak_convexity_violation() {
        let p = mcp(0.1);
        assert!(matches!(
            p.prox(1.0, 5.0),
            Err(Error::ProxNotStronglyConvex { .. })
        ));
        assert!(p.prox(1.0, 4.999).is_ok());
        assert!(p.prox_vec(array![1.0].view(), 6.0).is_err());
        assert!(p.prox(1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let p = mcp(0.1);
        assert_eq!(p.derivatives(0.0), (-1.0, 1.0));
        let (l, r) = p.derivatives(1.0);
        assert!((l - 0.8).abs() < 1e-15 && (r - 0.8).abs() < 1e-15);
        assert_eq!(p.derivatives(10.0), (0.0, 0.0));
        assert_eq!(p.derivatives(-1.0).0, -p.derivatives(1.0).0);

        // central differences away from the kinks
        let h = 1e-6;
        for &t in &[0.3, 1.0, 2.0, -4.0, 4.9, 7.0] {
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((fd - p.derivatives(t).1).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn h_second_derivatives_by_region() {
        let p = mcp(0.1);
        assert_eq!(p.h_second_derivatives(1.0), (0.0, 0.0));
        assert_eq!(p.h_second_derivatives(6.0), (0.2, 0.2));
        assert_eq!(p.h_second_derivatives(5.0), (0.0, 0.2));
        assert_eq!(p.h_second_derivatives(-5.0), (0.2, 0.0));
        let (l, r) = p.h_derivatives(0.0);
        assert_eq!((l, r), (-1.0, 1.0));
        // H' = 2ζt above the kink
        assert_eq!(p.h_derivatives(7.0), (2.0 * 0.1 * 7.0, 2.0 * 0.1 * 7.0));
        assert!(p.is_kink(0.0));
        assert!(!p.is_kink(5.0));
    }

    #[test]
    fn spec_validation() {
        assert!(PenaltySpec::mcp(-0.1, 1.0).is_err());
        assert!(PenaltySpec::mcp(0.1, 0.0).is_err());
        assert!(PenaltySpec::mcp(f64::NAN, 1.0).is_err());
        let s = PenaltySpec::mcp(0.1, 1.2).unwrap();
        assert_eq!(s.value(10.0), 2.5);
        assert_eq!(s.with_beta(2.0).unwrap().beta, 2.0);
    }
}
