//! Named self-check suite shared by the CLI `verify` subcommand and the
//! test suite: closed forms against the independent quadrature oracle,
//! L1-duality agreement, solution-representation agreement, class
//! membership of the extremal and fooling functions.

use serde::Serialize;

use crate::covering::build_xi_star;
use crate::error::Result;
use crate::geometry::ConvexBody;
use crate::operators::{ExtremalProfile, OperatorClass};
use crate::oracle::{
    class_membership_check, integrate, l1_best_approx, sign_pattern_check, solve_bvp,
    ControlFunction, QuadratureSpec,
};
use crate::recovery::{exact_error, upper_bound_variant, verify_fooling_class, FoolingFunction};
use crate::scalar::Real;

/// Nine operators spanning the three root types, including a near-degenerate
/// real pair (`beta - alpha = 1e-6`) and zero-root cases. Every threshold
/// `delta` exceeds 0.5, so the shared probe lengths {0.1, 0.5,
/// 0.9 min(delta, 2)} stay in range for all of them.
pub fn representative_operators<R: Real>() -> Vec<OperatorClass<R>> {
    vec![
        OperatorClass::DoubleRoot { alpha: R::zero() },
        OperatorClass::DoubleRoot { alpha: R::of(1.5) },
        OperatorClass::DoubleRoot { alpha: R::of(-2.0) },
        OperatorClass::DistinctReal {
            alpha: R::one(),
            beta: R::of(1.0 + 1e-6),
        },
        OperatorClass::DistinctReal {
            alpha: R::zero(),
            beta: R::one(),
        },
        OperatorClass::DistinctReal {
            alpha: R::of(-1.0),
            beta: R::one(),
        },
        OperatorClass::ComplexPair {
            alpha: R::zero(),
            beta: R::one(),
        },
        OperatorClass::ComplexPair {
            alpha: R::of(1.2),
            beta: R::of(0.8),
        },
        OperatorClass::ComplexPair {
            alpha: R::of(-0.9),
            beta: R::of(1.1),
        },
    ]
}

/// Probe interval lengths for one operator: short, medium, and near the
/// monotonicity threshold.
pub fn probe_lengths<R: Real>(op: OperatorClass<R>) -> [R; 3] {
    [
        R::of(0.1),
        R::of(0.5),
        R::of(0.9) * op.delta().min(R::of(2.0)),
    ]
}

/// Outcome of one named check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        CheckResult {
            name: name.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Boolean check rendered as residual 0 (pass) or 1 against tolerance 0.
    pub fn flag(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        CheckResult::new(name, if ok { 0.0 } else { 1.0 }, 0.0, detail)
    }
}

/// Knobs of the named check suite.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    /// Halve the certified upper bound the way the literal two-sided recipe
    /// suggests. The halved bound drops below the matching fooling lower
    /// bound, so the sandwich checks fail; kept for demonstration.
    pub inject_half_factor: bool,
    /// Seed for the randomized membership checks.
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            inject_half_factor: false,
            seed: 0x5eed,
        }
    }
}

pub fn suite_passed(rows: &[CheckResult]) -> bool {
    rows.iter().all(|r| r.passed)
}

fn label<R: Real>(op: OperatorClass<R>) -> String {
    match op {
        OperatorClass::DoubleRoot { alpha } => format!("double_root({alpha})"),
        OperatorClass::DistinctReal { alpha, beta } => format!("distinct_real({alpha},{beta})"),
        OperatorClass::ComplexPair { alpha, beta } => format!("complex_pair({alpha},{beta})"),
    }
}

/// The three drift-free families used by the fooling and certificate checks.
fn drift_free_trio<R: Real>() -> [OperatorClass<R>; 3] {
    [
        OperatorClass::DoubleRoot { alpha: R::zero() },
        OperatorClass::DistinctReal {
            alpha: -R::one(),
            beta: R::one(),
        },
        OperatorClass::ComplexPair {
            alpha: R::zero(),
            beta: R::one(),
        },
    ]
}

/// Run every named check once and collect the outcomes.
///
/// The suite cross-validates the closed forms against the brute-force
/// oracle (kernel antiderivative vs quadrature, L1 duality vs `ext2`,
/// terminal-value representation vs the extremal profile), then checks
/// class membership of the univariate profile and the multivariate fooling
/// functions, and finally certifies a two-sided error sandwich on
/// constructed nodes. Internal failures (quadrature breakdown, invalid
/// configurations) surface as errors; check failures are reported in the
/// rows.
pub fn run_suite<R: Real>(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let quad = QuadratureSpec::default();
    let mut rows = Vec::new();

    // closed-form antiderivative vs adaptive quadrature of the kernel
    for op in representative_operators::<R>() {
        let mut worst = 0.0f64;
        let mut at = 0.0f64;
        for a in probe_lengths(op) {
            let closed = op.g_integral(a)?;
            let brute = integrate(|tau| op.g(tau).unwrap_or(R::nan()), R::zero(), a, &quad)?;
            let resid = ((closed - brute).abs() / R::one().max(closed.abs())).as_f64();
            if resid > worst {
                worst = resid;
                at = a.as_f64();
            }
        }
        rows.push(CheckResult::new(
            format!("kernel_integral[{}]", label(op)),
            worst,
            1e-10,
            format!("largest relative gap at a = {at}"),
        ));
    }

    // L1 duality: the best-approximation minimum reproduces ext2, and the
    // optimal error changes sign exactly at t0
    for op in representative_operators::<R>() {
        let mut worst = 0.0f64;
        let mut at = 0.0f64;
        let mut signs_ok = true;
        for a in probe_lengths(op) {
            let (c0, value) = l1_best_approx(op, a, &quad)?;
            let resid = (value - op.ext2(a)?).abs().as_f64();
            if resid > worst {
                worst = resid;
                at = a.as_f64();
            }
            signs_ok = signs_ok && sign_pattern_check(op, a, c0)?;
        }
        rows.push(CheckResult::new(
            format!("l1_duality[{}]", label(op)),
            worst,
            1e-6,
            format!("largest |minimum - ext2| at a = {at}"),
        ));
        rows.push(CheckResult::flag(
            format!("sign_pattern[{}]", label(op)),
            signs_ok,
            "g - c0 g' negative before t0, positive after",
        ));
    }

    // terminal-value representation with the switching control vs the
    // closed-form profile
    for op in representative_operators::<R>() {
        let probes = probe_lengths(op);
        let mut worst = 0.0f64;
        let mut at = 0.0f64;
        for a in [probes[1], probes[2]] {
            let prof = ExtremalProfile::new(op, a)?;
            let phi = ControlFunction::sign_switch(prof.t0);
            for j in 0..=6usize {
                // the j = 6 endpoint can land one ulp above a
                let t = (a * R::of_usize(j) / R::of(6.0)).min(a);
                let represented = solve_bvp(op, a, &phi, t, &quad)?;
                let closed = prof.h_tilde(t);
                let resid = ((represented - closed).abs() / R::one().max(closed.abs())).as_f64();
                if resid > worst {
                    worst = resid;
                    at = a.as_f64();
                }
            }
        }
        rows.push(CheckResult::new(
            format!("solution_representation[{}]", label(op)),
            worst,
            1e-8,
            format!("largest relative gap at a = {at}"),
        ));
    }

    // univariate membership of the extremal profile on a sampled grid
    for op in representative_operators::<R>() {
        let a = probe_lengths(op)[1];
        let prof = ExtremalProfile::new(op, a)?;
        let step = a / R::of(400.0);
        let samples: Vec<R> = (0..=400).map(|i| prof.h_tilde(step * R::of_usize(i))).collect();
        let (resid, _ok) = class_membership_check(op, &samples, step)?;
        let tol = 1.0 + 1e-6 + 10.0 * (step * step).as_f64();
        rows.push(CheckResult::new(
            format!("profile_membership[{}]", label(op)),
            resid.as_f64(),
            tol,
            format!("|P(d/dt) h| sampled at step a/400, a = {a}"),
        ));
    }

    // multivariate fooling membership, normalized by the provable class
    // constant 1 + max(q, 0) ext2(a): for oscillatory operators the raw
    // residual genuinely exceeds 1, and the certified lower bound concedes
    // exactly this factor
    for op in drift_free_trio::<R>() {
        let a = R::of(0.8) * op.delta().min(R::of(1.5));
        let q = op.to_spec().q;
        let bound = R::one() + q.max(R::zero()) * op.ext2(a)?;
        for d in [2usize, 3] {
            let f = FoolingFunction::new(op, vec![R::zero(); d], a)?;
            let step = a / R::of(400.0);
            let (resid, _raw_ok) = verify_fooling_class(&f, 200, 10, step, cfg.seed)?;
            let tol = 1.0 + 1e-3 + 10.0 * (step * step).as_f64();
            rows.push(CheckResult::new(
                format!("fooling_membership[{} d={d}]", label(op)),
                (resid / bound).as_f64(),
                tol,
                format!("raw residual {}, class constant {}", resid.as_f64(), bound.as_f64()),
            ));
        }
    }

    // two-sided certificate on constructed near-optimal nodes
    let body = ConvexBody::Box {
        lo: vec![R::zero(), R::zero()],
        hi: vec![R::one(), R::one()],
    };
    let resolution = R::of(0.004);
    let gen = build_xi_star(&body, 60, R::of(0.55), cfg.seed, resolution)?;
    for op in drift_free_trio::<R>() {
        let report = exact_error(op, &body, &gen.nodes, resolution)?;
        let lower = report
            .lower
            .expect("drift-free certificates carry a lower bound");
        let upper = if cfg.inject_half_factor {
            upper_bound_variant(op, &body, &gen.nodes, resolution, true)?.upper
        } else {
            report.upper
        };
        rows.push(CheckResult::new(
            format!("sandwich[{}]", label(op)),
            ((lower - upper) / upper.max(R::of(1e-300))).as_f64(),
            0.0,
            format!(
                "lower {} vs upper {}{}",
                lower.as_f64(),
                upper.as_f64(),
                if cfg.inject_half_factor {
                    " (half factor injected)"
                } else {
                    ""
                }
            ),
        ));
        rows.push(CheckResult::flag(
            format!("exactness[{}]", label(op)),
            report.exact && report.boundary_condition_ok,
            format!(
                "enclosure [{}, {}], boundary condition {}",
                lower.as_f64(),
                report.upper.as_f64(),
                report.boundary_condition_ok
            ),
        ));
    }

    Ok(rows)
}
