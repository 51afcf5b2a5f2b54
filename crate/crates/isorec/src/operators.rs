//! Operator classification and closed-form evaluation of the kernel family.
//!
//! For `P(D) = D^2 + p D + q` the associated kernel `g` solves
//! `g'' - p g' + q g = 0`, `g(0) = 0`, `g'(0) = 1`; the sign flip on the
//! first-order term appears because `g` enters the solution representation
//! `f(t) = \int_t^a g(tau - t) phi(tau) dtau` through `tau - t`. The
//! antiderivative `G` (with `G(0) = 0`), the monotonicity threshold `delta`,
//! and the extremal values `G(a)` and `G(a) - 2 G(t0)` drive every recovery
//! bound in this crate.

use serde::{Deserialize, Serialize};

use crate::error::{IsorecError, Result};
use crate::scalar::Real;
use crate::special::{bisect, exp_dd2, m_k, phi1, s2, sinc};

/// Coefficients of `P(D) = D^2 + p D + q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OperatorSpec<R: Real> {
    pub p: R,
    pub q: R,
}

impl<R: Real> OperatorSpec<R> {
    pub fn new(p: R, q: R) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(IsorecError::InvalidCoefficients(format!(
                "coefficients must be finite, got p = {p}, q = {q}"
            )));
        }
        Ok(OperatorSpec { p, q })
    }

    /// Default discriminant tolerance, scaled to the terms of `p^2 - 4q`.
    pub fn default_tol(&self) -> R {
        R::of(1e-12) * R::one().max(self.p * self.p).max(self.q.abs())
    }

    /// Classify by the sign of the discriminant `p^2 - 4q` with the default
    /// tolerance.
    pub fn classify(&self) -> Result<OperatorClass<R>> {
        self.classify_with(self.default_tol())
    }

    /// Classify with an explicit tolerance on `|p^2 - 4q|`.
    pub fn classify_with(&self, tol: R) -> Result<OperatorClass<R>> {
        if !self.p.is_finite() || !self.q.is_finite() {
            return Err(IsorecError::InvalidCoefficients(format!(
                "coefficients must be finite, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if !(tol >= R::zero()) || !tol.is_finite() {
            return Err(IsorecError::Parameter(format!(
                "classification tolerance must be finite and nonnegative, got {tol}"
            )));
        }
        let two = R::of(2.0);
        let disc = self.p * self.p - R::of(4.0) * self.q;
        Ok(if disc.abs() <= tol {
            OperatorClass::DoubleRoot {
                alpha: -self.p / two,
            }
        } else if disc > tol {
            let root = disc.sqrt();
            OperatorClass::DistinctReal {
                alpha: (-self.p - root) / two,
                beta: (-self.p + root) / two,
            }
        } else {
            OperatorClass::ComplexPair {
                alpha: self.p / two,
                beta: (-disc).sqrt() / two,
            }
        })
    }
}

/// Root type of the characteristic polynomial of `P`.
///
/// The stored parameters recover the coefficients: `DoubleRoot` gives
/// `(p, q) = (-2 alpha, alpha^2)`, `DistinctReal` gives
/// `(-(alpha + beta), alpha beta)`, `ComplexPair` gives
/// `(2 alpha, alpha^2 + beta^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "")]
pub enum OperatorClass<R: Real> {
    /// `p^2 = 4q` up to tolerance.
    DoubleRoot { alpha: R },
    /// `p^2 > 4q`; invariant `alpha < beta`.
    DistinctReal { alpha: R, beta: R },
    /// `p^2 < 4q`; invariant `beta > 0`.
    ComplexPair { alpha: R, beta: R },
}

impl<R: Real> OperatorClass<R> {
    /// Coefficients `(p, q)` recovered from the stored parametrization.
    pub fn to_spec(self) -> OperatorSpec<R> {
        let two = R::of(2.0);
        match self {
            OperatorClass::DoubleRoot { alpha } => OperatorSpec {
                p: -two * alpha,
                q: alpha * alpha,
            },
            OperatorClass::DistinctReal { alpha, beta } => OperatorSpec {
                p: -(alpha + beta),
                q: alpha * beta,
            },
            OperatorClass::ComplexPair { alpha, beta } => OperatorSpec {
                p: two * alpha,
                q: alpha * alpha + beta * beta,
            },
        }
    }

    fn check_t(t: R) -> Result<()> {
        if !(t >= R::zero()) {
            return Err(IsorecError::Domain(format!(
                "kernel argument must be nonnegative, got t = {t}"
            )));
        }
        Ok(())
    }

    pub(crate) fn check_interval(self, a: R) -> Result<()> {
        if !(a > R::zero()) {
            return Err(IsorecError::OutOfRange(format!(
                "interval length must be positive, got a = {a}"
            )));
        }
        let delta = self.delta();
        if !(a < delta) {
            return Err(IsorecError::OutOfRange(format!(
                "a = {a} is not below the monotonicity threshold delta = {delta}"
            )));
        }
        Ok(())
    }

    /// Kernel value `g(t)`; `g(0) = 0`, `g'(0) = 1`.
    pub fn g(self, t: R) -> Result<R> {
        Self::check_t(t)?;
        Ok(self.g_raw(t))
    }

    /// Kernel derivative `g'(t)`.
    pub fn g_prime(self, t: R) -> Result<R> {
        Self::check_t(t)?;
        Ok(self.g_prime_raw(t))
    }

    /// Antiderivative `G(t)` of `g` with `G(0) = 0`.
    pub fn g_integral(self, t: R) -> Result<R> {
        Self::check_t(t)?;
        Ok(self.g_integral_raw(t))
    }

    pub(crate) fn g_raw(self, t: R) -> R {
        match self {
            OperatorClass::DoubleRoot { alpha } => t * (-alpha * t).exp(),
            OperatorClass::DistinctReal { alpha, beta } => {
                (-alpha * t).exp() * t * phi1((beta - alpha) * t)
            }
            OperatorClass::ComplexPair { alpha, beta } => {
                (alpha * t).exp() * t * sinc(beta * t)
            }
        }
    }

    pub(crate) fn g_prime_raw(self, t: R) -> R {
        match self {
            OperatorClass::DoubleRoot { alpha } => (R::one() - alpha * t) * (-alpha * t).exp(),
            OperatorClass::DistinctReal { alpha, beta } => {
                (-alpha * t).exp() * (R::one() - beta * t * phi1((beta - alpha) * t))
            }
            OperatorClass::ComplexPair { alpha, beta } => {
                let y = beta * t;
                (alpha * t).exp() * (y.cos() + alpha * t * sinc(y))
            }
        }
    }

    pub(crate) fn g_integral_raw(self, t: R) -> R {
        let t2 = t * t;
        match self {
            OperatorClass::DoubleRoot { alpha } => t2 * s2(alpha * t),
            OperatorClass::DistinctReal { alpha, beta } => {
                let x = alpha * t;
                let y = beta * t;
                if x.abs().max(y.abs()) <= R::of(0.9) {
                    // power-sum series in the scaled kernel roots -x, -y
                    t2 * exp_dd2(-(x + y), x * y)
                } else {
                    let w = y - x;
                    if w.abs() <= R::of(0.05) {
                        // Taylor in the root gap: sum_k (-w)^{k-1} m_k(x)/k!
                        let mut sum = R::zero();
                        let mut pw = R::one();
                        let mut fact = R::one();
                        for k in 1..=12 {
                            fact = fact * R::of_usize(k);
                            let term = pw * m_k(k, x) / fact;
                            let next = sum + term;
                            if next == sum {
                                break;
                            }
                            sum = next;
                            pw = pw * -w;
                        }
                        t2 * sum
                    } else {
                        t2 * (phi1(x) - phi1(y)) / w
                    }
                }
            }
            OperatorClass::ComplexPair { alpha, beta } => {
                let x = alpha * t;
                let y = beta * t;
                let m2 = x * x + y * y;
                if m2 <= R::of(0.81) {
                    t2 * exp_dd2(x + x, m2)
                } else {
                    t2 * (x.exp() * (x * sinc(y) - y.cos()) + R::one()) / m2
                }
            }
        }
    }

    /// Largest `delta` such that `g` is strictly increasing on `[0, delta)`;
    /// `+infinity` when `g` never turns.
    ///
    /// This is the exact first zero of `g'`, case by case. `DoubleRoot`:
    /// `(1 - alpha t) = 0` at `1/alpha` for `alpha > 0`, never otherwise.
    /// `DistinctReal`: `beta e^{-beta t} = alpha e^{-alpha t}` has a
    /// positive solution `ln(beta/alpha)/(beta - alpha)` only when both
    /// roots are positive; with `alpha <= 0 < beta` both kernel modes are
    /// nondecreasing and `g'` stays positive (so e.g. the symmetric pair
    /// `-beta, beta` gives a `cosh` derivative and an unbounded range,
    /// which the closed-form recovery values for that family rely on).
    /// `ComplexPair`: `cos(beta t) + (alpha/beta) sin(beta t) = 0` first
    /// holds at `atan(beta/|alpha|)/beta` for `alpha < 0`, at `pi/(2 beta)`
    /// for `alpha = 0`, and at `(pi - atan(beta/alpha))/beta` for
    /// `alpha > 0`.
    pub fn delta(self) -> R {
        match self {
            OperatorClass::DoubleRoot { alpha } => {
                if alpha <= R::zero() {
                    R::infinity()
                } else {
                    alpha.recip()
                }
            }
            OperatorClass::DistinctReal { alpha, beta } => {
                if alpha <= R::zero() || beta <= R::zero() {
                    R::infinity()
                } else {
                    // ln(beta/alpha)/(beta-alpha), stable as beta -> alpha
                    ((beta - alpha) / alpha).ln_1p() / (beta - alpha)
                }
            }
            OperatorClass::ComplexPair { alpha, beta } => {
                let pi = R::of(std::f64::consts::PI);
                if alpha < R::zero() {
                    (beta / -alpha).atan() / beta
                } else if alpha == R::zero() {
                    pi / (R::of(2.0) * beta)
                } else {
                    (pi - (beta / alpha).atan()) / beta
                }
            }
        }
    }

    /// Unique `t0 in (0, a)` with `g(t0) = g(a)/2`.
    ///
    /// Bisection on the strictly increasing `g` followed by two Newton
    /// polishing steps; the residual is a few ulps of `g(a)`.
    pub fn t_zero(self, a: R) -> Result<R> {
        self.check_interval(a)?;
        let target = self.g_raw(a) * R::of(0.5);
        let width = a * R::of(1e-14).max(R::epsilon() * R::of(4.0));
        let mut t0 = bisect(R::zero(), a, width, |t| self.g_raw(t) - target);
        for _ in 0..2 {
            let deriv = self.g_prime_raw(t0);
            if deriv > R::zero() {
                let cand = t0 - (self.g_raw(t0) - target) / deriv;
                if cand > R::zero() && cand < a {
                    t0 = cand;
                }
            }
        }
        Ok(t0)
    }

    /// First extremal value: `G(a)`, the largest `|h(0)|` over unit-control
    /// functions with `h(a) = h'(a) = 0`.
    pub fn ext1(self, a: R) -> Result<R> {
        self.check_interval(a)?;
        Ok(self.g_integral_raw(a))
    }

    /// Second extremal value: `G(a) - 2 G(t0)`, the same supremum with the
    /// additional constraint `h'(0) = 0`; strictly increasing in `a`.
    pub fn ext2(self, a: R) -> Result<R> {
        Ok(ExtremalProfile::new(self, a)?.ext2)
    }

    /// Extremal function value `h_tilde(t)` for interval length `a`.
    pub fn h_tilde(self, a: R, t: R) -> Result<R> {
        Self::check_t(t)?;
        Ok(ExtremalProfile::new(self, a)?.h_tilde(t))
    }
}

/// Cached extremal data for a fixed operator and interval length `a`.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(bound = "")]
pub struct ExtremalProfile<R: Real> {
    pub operator: OperatorClass<R>,
    pub a: R,
    pub delta: R,
    pub t0: R,
    pub ext1: R,
    pub ext2: R,
}

impl<R: Real> ExtremalProfile<R> {
    pub fn new(operator: OperatorClass<R>, a: R) -> Result<Self> {
        let t0 = operator.t_zero(a)?;
        let ext1 = operator.g_integral_raw(a);
        let ext2 = ext1 - R::of(2.0) * operator.g_integral_raw(t0);
        debug_assert!(t0 > R::zero() && t0 < a);
        debug_assert!(ext2 > R::zero() && ext2 < ext1);
        Ok(ExtremalProfile {
            operator,
            a,
            delta: operator.delta(),
            t0,
            ext1,
            ext2,
        })
    }

    /// Piecewise extremal function: `G(a-t) - 2 G(t0-t)` on `[0, t0]`,
    /// `G(a-t)` on `(t0, a]`, `0` beyond `a`. Continuously differentiable,
    /// with `h_tilde(0) = ext2`, `h_tilde(a) = h_tilde'(a) = h_tilde'(0) = 0`.
    pub fn h_tilde(&self, t: R) -> R {
        debug_assert!(t >= R::zero());
        if t >= self.a {
            R::zero()
        } else if t <= self.t0 {
            self.operator.g_integral_raw(self.a - t)
                - R::of(2.0) * self.operator.g_integral_raw(self.t0 - t)
        } else {
            self.operator.g_integral_raw(self.a - t)
        }
    }

    /// Derivative of [`Self::h_tilde`]; the two branches agree at `t0`.
    pub fn h_tilde_prime(&self, t: R) -> R {
        debug_assert!(t >= R::zero());
        if t >= self.a {
            R::zero()
        } else if t <= self.t0 {
            -self.operator.g_raw(self.a - t) + R::of(2.0) * self.operator.g_raw(self.t0 - t)
        } else {
            -self.operator.g_raw(self.a - t)
        }
    }

    /// Second derivative of [`Self::h_tilde`] away from `t0` and `a`, where
    /// the profile is only C^1; at those two points the `t <= t0` / `t <= a`
    /// branch value is returned.
    pub fn h_tilde_second(&self, t: R) -> R {
        debug_assert!(t >= R::zero());
        if t >= self.a {
            R::zero()
        } else if t <= self.t0 {
            self.operator.g_prime_raw(self.a - t)
                - R::of(2.0) * self.operator.g_prime_raw(self.t0 - t)
        } else {
            self.operator.g_prime_raw(self.a - t)
        }
    }

    /// Coefficient of the best L1 approximation of `g` from `span{g'}` on
    /// `[0, a]`: the error `g - c g'` must change sign exactly at `t0`,
    /// forcing `c0 = g(t0)/g'(t0)`.
    pub fn c0(&self) -> R {
        self.operator.g_raw(self.t0) / self.operator.g_prime_raw(self.t0)
    }
}
