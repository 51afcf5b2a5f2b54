//! Internal numeric primitives.
//!
//! Every closed-form kernel in [`crate::operators`] is a combination of the
//! entire functions below. Each one has a removable singularity at the
//! origin, so each carries a series branch chosen by a scale-free threshold;
//! the thresholds are generous enough that both branches agree to machine
//! precision on the crossover.

use crate::scalar::Real;

/// `phi1(w) = (1 - e^{-w}) / w`, extended by `phi1(0) = 1`.
pub fn phi1<R: Real>(w: R) -> R {
    if w.abs() <= R::of(0.5) {
        // sum_{k>=0} (-w)^k / (k+1)!
        let mut term = R::one();
        let mut sum = R::one();
        let mut k = 1usize;
        loop {
            term = term * -w / R::of_usize(k + 1);
            let next = sum + term;
            if next == sum || k > 40 {
                return next;
            }
            sum = next;
            k += 1;
        }
    } else {
        (-w).exp_m1().neg() / w
    }
}

/// `sinc(y) = sin(y) / y`, extended by `sinc(0) = 1`.
pub fn sinc<R: Real>(y: R) -> R {
    if y.abs() <= R::of(1e-2) {
        let y2 = y * y;
        // 1 - y^2/6 + y^4/120; the next term is below f64 resolution here.
        R::one() - y2 / R::of(6.0) + y2 * y2 / R::of(120.0)
    } else {
        y.sin() / y
    }
}

/// `s2(x) = (1 - (1+x) e^{-x}) / x^2`, extended by `s2(0) = 1/2`.
///
/// This is the second-order remainder of the exponential: `t^2 s2(a t)` is
/// the double integral of `e^{-a s}` over the simplex `0 <= s <= u <= t`.
pub fn s2<R: Real>(x: R) -> R {
    if x.abs() <= R::of(0.9) {
        // sum_{k>=0} (-1)^k (k+1) x^k / (k+2)!
        let mut sum = R::zero();
        let mut pow = R::one(); // (-x)^k
        let mut fact = R::of(2.0); // (k+2)!
        for k in 0..40 {
            let term = pow * R::of_usize(k + 1) / fact;
            let next = sum + term;
            if next == sum {
                return next;
            }
            sum = next;
            pow = pow * -x;
            fact = fact * R::of_usize(k + 3);
        }
        sum
    } else {
        (R::one() - (R::one() + x) * (-x).exp()) / (x * x)
    }
}

/// Moment integral `m_k(k, x) = ∫_0^1 u^k e^{-x u} du`.
///
/// Series in `x` for `|x| <= 1`, upward recurrence from `m_0 = phi1(x)`
/// otherwise. The recurrence loses at most a couple of ulps for the small
/// `k` (`k <= 6`) this crate needs.
pub fn m_k<R: Real>(k: usize, x: R) -> R {
    if x.abs() <= R::one() {
        // sum_{j>=0} (-x)^j / (j! (k+j+1))
        let mut sum = R::zero();
        let mut term = R::one(); // (-x)^j / j!
        for j in 0..40 {
            let contrib = term / R::of_usize(k + j + 1);
            let next = sum + contrib;
            if next == sum {
                return next;
            }
            sum = next;
            term = term * -x / R::of_usize(j + 1);
        }
        sum
    } else {
        let emx = (-x).exp();
        let mut m = phi1(x);
        for j in 1..=k {
            m = (R::of_usize(j) * m - emx) / x;
        }
        m
    }
}

/// Second divided difference of `exp` at `{0, u, v}` where `u, v` are the
/// (possibly complex-conjugate) roots of `z^2 - s z + p = 0`, evaluated
/// through the real power sums: `h_k = s h_{k-1} - p h_{k-2}` with
/// `h_0 = 1`, `h_1 = s`, and the result is `sum_k h_k / (k+2)!`.
///
/// Accurate to machine precision whenever both root moduli are at most
/// about one; callers switch to closed forms beyond that.
pub fn exp_dd2<R: Real>(s: R, p: R) -> R {
    let mut h_prev = R::one(); // h_0
    let mut h_cur = s; // h_1
    let mut fact = R::of(2.0); // (k+2)!
    let mut sum = h_prev / fact;
    let mut stall = 0u8;
    for k in 1..45 {
        fact = fact * R::of_usize(k + 2);
        let next = sum + h_cur / fact;
        // a single negligible term is not convergence: for s = 0 the odd
        // power sums vanish identically while even ones keep contributing
        stall = if next == sum { stall + 1 } else { 0 };
        sum = next;
        if stall >= 2 {
            break;
        }
        let h_next = s * h_cur - p * h_prev;
        h_prev = h_cur;
        h_cur = h_next;
    }
    sum
}

/// Compensated (Neumaier) accumulator for long sums of mixed-sign terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<R: Real> {
    sum: R,
    comp: R,
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: R::zero(),
            comp: R::zero(),
        }
    }

    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> R {
        self.sum + self.comp
    }
}

/// Bisection for a root of `f` in `[lo, hi]`; requires a sign change (a zero
/// endpoint counts). Narrows to width `tol_x` and returns the midpoint.
pub fn bisect<R: Real>(mut lo: R, mut hi: R, tol_x: R, f: impl Fn(R) -> R) -> R {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= R::zero(), "bisect requires a bracket");
    let two = R::of(2.0);
    for _ in 0..300 {
        if hi - lo <= tol_x {
            break;
        }
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let fm = f(mid);
        if flo * fm <= R::zero() {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    (lo + hi) / two
}
