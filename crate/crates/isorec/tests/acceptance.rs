//! Acceptance gate. One test per criterion; each prints a single
//! `criterion NN PASS|FAIL <name>: <detail>` line before asserting, with
//! every tolerance pinned inline.
//!
//! Node-set criteria share one construction per budget (theta = 0.68,
//! seed = 0, resolution = 0.05 * asymptotic covering radius).

use std::sync::OnceLock;
use std::time::Instant;

use isorec::covering::{build_xi_star, en_asymptotic};
use isorec::operators::ExtremalProfile;
use isorec::oracle::{integrate, l1_best_approx, sign_pattern_check, QuadratureSpec};
use isorec::recovery::{exact_error, upper_bound, verify_fooling_class, FoolingFunction};
use isorec::verify::{probe_lengths, representative_operators};
use isorec::{ConvexBody, NodeGenReport, OperatorClass, OperatorSpec};

fn square() -> ConvexBody {
    ConvexBody::Box {
        lo: vec![0.0, 0.0],
        hi: vec![1.0, 1.0],
    }
}

fn classify(p: f64, q: f64) -> OperatorClass {
    OperatorSpec::new(p, q).unwrap().classify().unwrap()
}

/// The drift-free operators used by the node-set criteria.
fn trio() -> [(OperatorClass, &'static str); 3] {
    [
        (classify(0.0, 0.0), "D^2"),
        (classify(0.0, -1.0), "D^2-1"),
        (classify(0.0, 1.0), "D^2+1"),
    ]
}

fn resolution_for(n: usize) -> f64 {
    0.05 * en_asymptotic(&square(), n).unwrap()
}

fn xi_star(n: usize) -> &'static NodeGenReport {
    static XI64: OnceLock<NodeGenReport> = OnceLock::new();
    static XI256: OnceLock<NodeGenReport> = OnceLock::new();
    static XI1024: OnceLock<NodeGenReport> = OnceLock::new();
    let slot = match n {
        64 => &XI64,
        256 => &XI256,
        1024 => &XI1024,
        _ => unreachable!("unexpected budget {n}"),
    };
    slot.get_or_init(|| build_xi_star(&square(), n, 0.68, 0, resolution_for(n)).unwrap())
}

fn conclude(number: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {number:02} {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} {name}: {detail}");
}

#[test]
fn criterion_01_kernel_antiderivative_vs_quadrature() {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for op in representative_operators::<f64>() {
        let lim = op.delta().min(10.0);
        for j in 1..=1000 {
            let t = lim * (j as f64 - 0.5) / 1000.0;
            let direct = op.g_integral(t).unwrap();
            let by_quad = integrate(|tau| op.g(tau).unwrap(), 0.0, t, &quad).unwrap();
            worst = worst.max((direct - by_quad).abs() / 1.0f64.max(direct.abs()));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-10 && elapsed < 10.0;
    conclude(
        1,
        "kernel_antiderivative_vs_quadrature",
        pass,
        &format!("9 operators x 1000 points, worst residual {worst:.3e} (tol 1e-10), {elapsed:.1}s (limit 10s)"),
    );
}

#[test]
fn criterion_02_l1_duality_equals_ext2() {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let mut patterns_ok = true;
    for op in representative_operators::<f64>() {
        for a in probe_lengths(op) {
            let (c0, value) = l1_best_approx(op, a, &quad).unwrap();
            worst = worst.max((value - op.ext2(a).unwrap()).abs());
            patterns_ok &= sign_pattern_check(op, a, c0).unwrap();
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-6 && patterns_ok && elapsed < 30.0;
    conclude(
        2,
        "l1_duality_equals_ext2",
        pass,
        &format!("27 intervals, worst |l1 - ext2| {worst:.3e} (tol 1e-6), sign patterns {patterns_ok}, {elapsed:.1}s (limit 30s)"),
    );
}

#[test]
fn criterion_03_quadratic_operator_constants() {
    let op = classify(0.0, 0.0);
    let mut worst_ext = 0.0f64;
    let mut worst_t0 = 0.0f64;
    for a in [0.1, 0.5, 1.0, 2.0, 3.7] {
        let profile = ExtremalProfile::new(op, a).unwrap();
        worst_ext = worst_ext.max((profile.ext1 - a * a / 2.0).abs());
        worst_ext = worst_ext.max((profile.ext2 - a * a / 4.0).abs());
        worst_t0 = worst_t0.max((profile.t0 - a / 2.0).abs());
    }
    let pass = worst_ext <= 1e-12 && worst_t0 <= 1e-14;
    conclude(
        3,
        "quadratic_operator_constants",
        pass,
        &format!("worst |ext - a^2/2, a^2/4| {worst_ext:.3e} (tol 1e-12), worst |t0 - a/2| {worst_t0:.3e} (tol 1e-14)"),
    );
}

#[test]
fn criterion_04_hyperbolic_closed_form() {
    let mut worst = 0.0f64;
    for beta in [0.5, 1.0, 2.0] {
        let op = classify(0.0, -beta * beta);
        for a in [0.3, 1.0] {
            let c = (beta * a).cosh();
            let closed = (1.0 + c - (c * c + 3.0).sqrt()) / (beta * beta);
            worst = worst.max((op.ext2(a).unwrap() - closed).abs());
        }
    }
    let pass = worst <= 1e-10;
    conclude(
        4,
        "hyperbolic_closed_form",
        pass,
        &format!("beta in {{0.5,1,2}}, a in {{0.3,1}}, worst deviation {worst:.3e} (tol 1e-10)"),
    );
}

#[test]
fn criterion_05_small_interval_universality() {
    let a = 1e-3;
    let mut worst = 0.0f64;
    for op in representative_operators::<f64>() {
        let ratio = op.ext2(a).unwrap() / (a * a / 4.0);
        worst = worst.max((ratio - 1.0).abs());
    }
    let pass = worst <= 0.01;
    conclude(
        5,
        "small_interval_universality",
        pass,
        &format!("a = 1e-3, worst |ext2/(a^2/4) - 1| {worst:.3e} (tol 0.01)"),
    );
}

#[test]
fn criterion_06_fooling_function_membership() {
    let start = Instant::now();
    let mut pass = true;
    let mut rows = Vec::new();
    for (op, label) in trio() {
        let a = 0.8 * op.delta().min(1.5);
        let q = op.to_spec().q;
        let peak = op.ext2(a).unwrap();
        for d in [2usize, 3] {
            let f = FoolingFunction::new(op, vec![0.0; d], a).unwrap();
            let (residual, _) = verify_fooling_class(&f, 200, 10, a / 400.0, 0x5eed).unwrap();
            let row_ok = residual <= 1.0 + 1e-3 && (q * peak).abs() <= 1.0;
            pass &= row_ok;
            rows.push(format!(
                "{label} d={d} residual {residual:.6} ({})",
                if row_ok { "ok" } else { "exceeds 1+1e-3" }
            ));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    conclude(
        6,
        "fooling_function_membership",
        pass,
        &format!("step a/400, 2000 samples: {}; {elapsed:.1}s (limit 60s)", rows.join("; ")),
    );
}

#[test]
fn criterion_07_two_sided_sandwich() {
    let body = square();
    let mut pass = true;
    let mut rows = Vec::new();
    for n in [64usize, 256] {
        let xi = xi_star(n);
        for (op, label) in trio() {
            let report = exact_error(op, &body, &xi.nodes, resolution_for(n)).unwrap();
            let lower = report.lower.unwrap();
            let width_ok = report.upper - lower <= 0.02 * report.upper;
            let row_ok = lower <= report.upper && report.boundary_condition_ok && width_ok;
            pass &= row_ok;
            rows.push(format!(
                "{label} n={n} [{lower:.6e}, {:.6e}] width {:.2}% ({})",
                report.upper,
                100.0 * (report.upper - lower) / report.upper,
                if row_ok { "ok" } else { "violated" }
            ));
        }
    }
    conclude(
        7,
        "two_sided_sandwich",
        pass,
        &format!("boundary condition certified, width within 2%: {}", rows.join("; ")),
    );
}

#[test]
fn criterion_08_node_quality_windows() {
    let mut pass = true;
    let mut rows = Vec::new();
    let mut prev_share = f64::INFINITY;
    for n in [64usize, 256, 1024] {
        let xi = xi_star(n);
        let target = (1.0 / (std::f64::consts::PI * n as f64)).sqrt();
        let low_ok = xi.e_omega.value >= 0.98 * target;
        let high_ok = xi.e_omega.value + xi.e_omega.gap <= 1.5 * target;
        let share = xi.k_n as f64 / n as f64;
        let share_ok = share < prev_share;
        prev_share = share;
        pass &= low_ok && high_ok && share_ok;
        rows.push(format!(
            "n={n} e {:.6} in [{:.6}, {:.6}] k/n {:.3} ({})",
            xi.e_omega.value,
            0.98 * target,
            1.5 * target,
            share,
            if low_ok && high_ok && share_ok { "ok" } else { "violated" }
        ));
    }
    conclude(8, "node_quality_windows", pass, &rows.join("; "));
}

#[test]
fn criterion_09_asymptotic_constant_window() {
    let start = Instant::now();
    let body = square();
    let n = 1024usize;
    let xi = xi_star(n);
    let center = 1.0 / (2.0 * 27.0f64.sqrt());
    let mut pass = true;
    let mut rows = Vec::new();
    for (op, label) in trio() {
        let report = upper_bound(op, &body, &xi.nodes, resolution_for(n)).unwrap();
        let scaled = report.upper * n as f64;
        let row_ok = scaled >= 0.8 * center && scaled <= 1.25 * center;
        pass &= row_ok;
        rows.push(format!(
            "{label} upper*n {scaled:.6} ({})",
            if row_ok { "ok" } else { "outside window" }
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    conclude(
        9,
        "asymptotic_constant_window",
        pass,
        &format!(
            "window [{:.6}, {:.6}]: {}; {elapsed:.1}s (limit 300s)",
            0.8 * center,
            1.25 * center,
            rows.join("; ")
        ),
    );
}
