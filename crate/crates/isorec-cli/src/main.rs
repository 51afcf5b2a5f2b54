//! Command-line front end: kernel tables, extremal values, the named
//! self-check suite, node construction, certified error reports, and
//! convergence studies, emitted as JSON/CSV/SVG artifacts.
//!
//! Every run with the same flags and seed produces byte-identical files.
//! Errors exit with a documented code and a JSON object on stderr:
//! 2 invalid configuration, 3 out of range, 4 oracle failure, 5 budget
//! exhausted, 6 I/O; `verify` exits 1 when a check fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use isorec::covering::{build_xi_star, en_asymptotic};
use isorec::error::{IsorecError, Result};
use isorec::recovery::{
    convergence_study, exact_error, is_drift_free, rn_asymptotic, upper_bound,
    upper_bound_variant, verify_fooling_class,
};
use isorec::verify::{run_suite, CheckResult, SuiteConfig};
use isorec::{
    ConvexBody, ErrorReport, ExtremalProfile, FoolingFunction, OperatorClass, OperatorSpec,
    Scalar, StudyRow,
};

use isorec::covering::DensityStatus;

mod files;
mod svg;

#[derive(Parser)]
#[command(
    name = "isorec",
    about = "Worst-case optimal-recovery errors for isotropic classes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the kernel g, its derivative, and its antiderivative G
    Kernel(KernelArgs),
    /// Threshold delta, switch point t0, and extremal values for one length
    Extremal(ExtremalArgs),
    /// Run the named self-check suite (oracle agreement, membership, sandwich)
    Verify(VerifyArgs),
    /// Construct near-optimal nodes with certified covering radii
    Nodes(NodesArgs),
    /// Certified error report for an operator over a node CSV
    Error(ErrorArgs),
    /// Convergence study over a list of node budgets
    Study(StudyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (default: $ISOREC_OUT, else ./isorec-out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file supplying defaults for omitted flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    /// Tabulation endpoint (default 1)
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid cells; the table has steps+1 rows (default 200)
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated subset of json,csv,svg (default json,csv)
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ExtremalArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    /// Interval length; must stay below the threshold delta
    #[arg(long)]
    a: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Halve the certified upper bound (demonstrates the sandwich violation)
    #[arg(long)]
    inject_half_factor: bool,
    /// Run only the fooling membership check for --p/--q
    #[arg(long)]
    fooling: bool,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct NodesArgs {
    /// Body JSON: inline (starts with '{') or a file path
    #[arg(long)]
    body: Option<String>,
    /// Node budget
    #[arg(long)]
    n: Option<usize>,
    /// Boundary tightening factor in (0, 1/sqrt(2)) (default 0.5)
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Certification resolution (default: 5% of the asymptotic radius)
    #[arg(long)]
    resolution: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ErrorArgs {
    /// Body JSON: inline (starts with '{') or a file path
    #[arg(long)]
    body: Option<String>,
    /// Node CSV with an x1,...,xd header
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    /// Certification resolution (default: 5% of the asymptotic radius)
    #[arg(long)]
    resolution: Option<f64>,
    /// Halve the certified upper bound (comparison variant, upper-only)
    #[arg(long)]
    inject_half_factor: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct StudyArgs {
    /// Body JSON: inline (starts with '{') or a file path
    #[arg(long)]
    body: Option<String>,
    /// Comma-separated node budgets, e.g. 64,256,1024
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Certification resolution (default: 5% of the asymptotic radius at
    /// the largest budget)
    #[arg(long)]
    resolution: Option<f64>,
    /// Comma-separated subset of json,csv,svg (default all three)
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Optional defaults read from `--config`; flags always win.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    p: Option<f64>,
    q: Option<f64>,
    a: Option<f64>,
    t_max: Option<f64>,
    steps: Option<usize>,
    body: Option<String>,
    nodes: Option<PathBuf>,
    n: Option<usize>,
    n_list: Option<Vec<usize>>,
    theta: Option<f64>,
    seed: Option<u64>,
    resolution: Option<f64>,
    formats: Option<Vec<String>>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| IsorecError::Parameter(format!("config JSON: {e}")))
        }
    }
}

fn pick<T>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

fn pick_req<T>(flag: Option<T>, cfg: Option<T>, name: &str) -> Result<T> {
    flag.or(cfg)
        .ok_or_else(|| IsorecError::Parameter(format!("missing {name} (flag or config file)")))
}

#[derive(Clone, Copy)]
struct Formats {
    json: bool,
    csv: bool,
    svg: bool,
}

fn parse_formats(
    flag: Option<Vec<String>>,
    cfg: Option<Vec<String>>,
    default: Formats,
) -> Result<Formats> {
    let Some(list) = flag.or(cfg) else {
        return Ok(default);
    };
    let mut f = Formats {
        json: false,
        csv: false,
        svg: false,
    };
    for item in &list {
        match item.as_str() {
            "json" => f.json = true,
            "csv" => f.csv = true,
            "svg" => f.svg = true,
            other => {
                return Err(IsorecError::Parameter(format!(
                    "unknown format {other:?} (expected json, csv, svg)"
                )))
            }
        }
    }
    if list.is_empty() {
        return Err(IsorecError::Parameter("empty format list".into()));
    }
    Ok(f)
}

fn classify(p: f64, q: f64) -> Result<OperatorClass> {
    OperatorSpec::new(p, q)?.classify()
}

/// Default certification resolution: 5% of the asymptotic covering radius,
/// so the certificate gap stays far below the quantity it brackets.
fn auto_resolution(body: &ConvexBody, n: usize) -> Result<f64> {
    Ok(0.05 * en_asymptotic(body, n)?)
}

#[derive(Serialize)]
struct KernelRow {
    t: f64,
    g: f64,
    g_prime: f64,
    #[serde(rename = "G")]
    g_int: f64,
}

#[derive(Serialize)]
struct KernelArtifact {
    p: f64,
    q: f64,
    operator: OperatorClass,
    t_max: f64,
    steps: usize,
    rows: Vec<KernelRow>,
}

fn cmd_kernel(args: KernelArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.common.config)?;
    let p = pick_req(args.p, cfg.p, "--p")?;
    let q = pick_req(args.q, cfg.q, "--q")?;
    let op = classify(p, q)?;
    let t_max = pick(args.t_max, cfg.t_max, 1.0);
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(IsorecError::Parameter(format!(
            "--t-max must be positive and finite, got {t_max}"
        )));
    }
    let steps = pick(args.steps, cfg.steps, 200);
    if steps == 0 {
        return Err(IsorecError::Parameter("--steps must be positive".into()));
    }
    let formats = parse_formats(
        args.formats,
        cfg.formats,
        Formats {
            json: true,
            csv: true,
            svg: false,
        },
    )?;

    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = (t_max * i as f64 / steps as f64).min(t_max);
        rows.push(KernelRow {
            t,
            g: op.g(t)?,
            g_prime: op.g_prime(t)?,
            g_int: op.g_integral(t)?,
        });
    }

    let dir = files::out_dir(args.common.out);
    if formats.csv {
        let mut csv = String::from("t,g,g_prime,G\n");
        for r in &rows {
            csv.push_str(&format!("{},{},{},{}\n", r.t, r.g, r.g_prime, r.g_int));
        }
        files::write_artifact(&dir, "kernel.csv", &csv)?;
    }
    if formats.svg {
        let plot = svg::line_plot(
            &format!("kernel for p = {p}, q = {q}"),
            "t",
            "value",
            false,
            &[
                svg::Series {
                    label: "g",
                    points: rows.iter().map(|r| (r.t, r.g)).collect(),
                    color: "#1f77b4",
                    dashed: false,
                },
                svg::Series {
                    label: "G",
                    points: rows.iter().map(|r| (r.t, r.g_int)).collect(),
                    color: "#d62728",
                    dashed: true,
                },
            ],
            None,
        );
        files::write_artifact(&dir, "kernel.svg", &plot)?;
    }
    if formats.json {
        let artifact = KernelArtifact {
            p,
            q,
            operator: op,
            t_max,
            steps,
            rows,
        };
        files::write_artifact(&dir, "kernel.json", &files::to_json(&artifact)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ExtremalArtifact {
    p: f64,
    q: f64,
    operator: OperatorClass,
    a: f64,
    /// Infinite thresholds serialize as JSON null.
    delta: f64,
    t0: f64,
    ext1: f64,
    ext2: f64,
}

fn cmd_extremal(args: ExtremalArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.common.config)?;
    let p = pick_req(args.p, cfg.p, "--p")?;
    let q = pick_req(args.q, cfg.q, "--q")?;
    let a = pick_req(args.a, cfg.a, "--a")?;
    let op = classify(p, q)?;
    let prof = ExtremalProfile::new(op, a)?;
    let artifact = ExtremalArtifact {
        p,
        q,
        operator: op,
        a,
        delta: prof.delta,
        t0: prof.t0,
        ext1: prof.ext1,
        ext2: prof.ext2,
    };
    let json = files::to_json(&artifact)?;
    print!("{json}");
    let dir = files::out_dir(args.common.out);
    files::write_artifact(&dir, "extremal.json", &json)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SkippedCheck {
    name: String,
    reason: String,
}

#[derive(Serialize)]
struct VerifyArtifact {
    passed: bool,
    checks: Vec<CheckResult>,
    skipped: Vec<SkippedCheck>,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.common.config)?;
    let seed = pick(args.seed, cfg.seed, 0);
    let mut checks = Vec::new();
    let mut skipped = Vec::new();

    if args.fooling {
        let p = pick_req(args.p, cfg.p, "--p")?;
        let q = pick_req(args.q, cfg.q, "--q")?;
        let op = classify(p, q)?;
        if !is_drift_free(op) {
            skipped.push(SkippedCheck {
                name: format!("fooling_membership[p={p},q={q}]"),
                reason: format!(
                    "radial fooling functions exist only for p = 0, got p = {p}"
                ),
            });
        } else {
            let a = 0.8 * op.delta().min(1.5);
            let f = FoolingFunction::new(op, vec![0.0, 0.0], a)?;
            let step = a / 400.0;
            let (resid, _ok) = verify_fooling_class(&f, 200, 10, step, seed)?;
            checks.push(CheckResult::new(
                format!("fooling_membership[p={p},q={q}]"),
                resid,
                1.0 + 1e-3 + 10.0 * step * step,
                format!("raw residual over 2000 samples at step a/400, a = {a}"),
            ));
        }
    } else {
        checks = run_suite::<Scalar>(&SuiteConfig {
            inject_half_factor: args.inject_half_factor,
            seed,
        })?;
    }

    let passed = checks.iter().all(|c| c.passed);
    let artifact = VerifyArtifact {
        passed,
        checks,
        skipped,
    };
    let dir = files::out_dir(args.common.out);
    files::write_artifact(&dir, "verify.json", &files::to_json(&artifact)?)?;

    for row in &artifact.checks {
        if !row.passed {
            println!(
                "FAIL {}: residual {} > tolerance {} ({})",
                row.name, row.residual, row.tolerance, row.detail
            );
        }
    }
    for s in &artifact.skipped {
        println!("SKIP {}: {}", s.name, s.reason);
    }
    println!(
        "{} checks, {} skipped: {}",
        artifact.checks.len(),
        artifact.skipped.len(),
        if passed { "all passed" } else { "FAILED" }
    );
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_nodes(args: NodesArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.common.config)?;
    let body = files::load_body(&pick_req(args.body, cfg.body, "--body")?)?;
    let n = pick_req(args.n, cfg.n, "--n")?;
    let theta = pick(args.theta, cfg.theta, 0.5);
    let seed = pick(args.seed, cfg.seed, 0);
    let resolution = match args.resolution.or(cfg.resolution) {
        Some(r) => r,
        None => auto_resolution(&body, n)?,
    };
    let report = build_xi_star(&body, n, theta, seed, resolution)?;

    let dir = files::out_dir(args.common.out);
    files::write_artifact(&dir, "nodes.csv", &files::nodes_to_csv(&report.nodes))?;
    files::write_artifact(&dir, "nodes.json", &files::to_json(&report)?)?;
    println!(
        "n = {}, boundary nodes = {}, e_omega = {} (gap {}), e_boundary = {} (gap {}), boundary condition {}",
        report.nodes.len(),
        report.k_n,
        report.e_omega.value,
        report.e_omega.gap,
        report.e_boundary.value,
        report.e_boundary.gap,
        if report.boundary_condition_ok() { "ok" } else { "NOT met" }
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ErrorArtifact {
    p: f64,
    q: f64,
    operator: OperatorClass,
    n_nodes: usize,
    resolution: f64,
    half_factor_injected: bool,
    report: ErrorReport,
}

fn cmd_error(args: ErrorArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.common.config)?;
    let body = files::load_body(&pick_req(args.body, cfg.body, "--body")?)?;
    let nodes_path = pick_req(args.nodes, cfg.nodes, "--nodes")?;
    let xi = files::load_nodes(&nodes_path)?;
    let p = pick_req(args.p, cfg.p, "--p")?;
    let q = pick_req(args.q, cfg.q, "--q")?;
    let op = classify(p, q)?;
    let resolution = match args.resolution.or(cfg.resolution) {
        Some(r) => r,
        None => auto_resolution(&body, xi.len())?,
    };

    let report = if args.inject_half_factor {
        upper_bound_variant(op, &body, &xi, resolution, true)?
    } else if is_drift_free(op) {
        exact_error(op, &body, &xi, resolution)?
    } else {
        upper_bound(op, &body, &xi, resolution)?
    };

    println!(
        "upper = {}, lower = {}, exact = {}, boundary condition {}",
        report.upper,
        report
            .lower
            .map_or_else(|| "n/a".to_string(), |l| l.to_string()),
        report.exact,
        if report.boundary_condition_ok {
            "ok"
        } else {
            "NOT met"
        }
    );
    let artifact = ErrorArtifact {
        p,
        q,
        operator: op,
        n_nodes: xi.len(),
        resolution,
        half_factor_injected: args.inject_half_factor,
        report,
    };
    let dir = files::out_dir(args.common.out);
    files::write_artifact(&dir, "error.json", &files::to_json(&artifact)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct StudyArtifact {
    p: f64,
    q: f64,
    operator: OperatorClass,
    theta: f64,
    seed: u64,
    resolution: f64,
    /// Limit of the normalized column as n grows.
    asymptotic_constant: f64,
    dens_status: DensityStatus,
    rows: Vec<StudyRow>,
}

fn cmd_study(args: StudyArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.common.config)?;
    let body = files::load_body(&pick_req(args.body, cfg.body, "--body")?)?;
    let n_list = pick_req(args.n_list, cfg.n_list, "--n-list")?;
    let p = pick_req(args.p, cfg.p, "--p")?;
    let q = pick_req(args.q, cfg.q, "--q")?;
    let op = classify(p, q)?;
    let theta = pick(args.theta, cfg.theta, 0.5);
    let seed = pick(args.seed, cfg.seed, 0);
    let max_n = *n_list.iter().max().ok_or_else(|| {
        IsorecError::Parameter("convergence studies need at least one node budget".into())
    })?;
    let resolution = match args.resolution.or(cfg.resolution) {
        Some(r) => r,
        None => auto_resolution(&body, max_n)?,
    };
    let formats = parse_formats(
        args.formats,
        cfg.formats,
        Formats {
            json: true,
            csv: true,
            svg: true,
        },
    )?;

    let rows = convergence_study(op, &body, &n_list, theta, seed, resolution)?;
    let asym = rn_asymptotic(&body, max_n)?;
    let constant = asym.value * (max_n as f64).powf(2.0 / body.dim() as f64);

    let dir = files::out_dir(args.common.out);
    if formats.csv {
        let mut csv = String::from("n,e_omega,lower,upper,exact,normalized\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.e_omega,
                r.lower.map_or_else(String::new, |l| l.to_string()),
                r.upper,
                r.exact,
                r.normalized
            ));
        }
        files::write_artifact(&dir, "study.csv", &csv)?;
    }
    if formats.svg {
        let plot = svg::line_plot(
            &format!("normalized worst-case error, p = {p}, q = {q}"),
            "n",
            "upper bound x n^(2/d)",
            true,
            &[svg::Series {
                label: "certified upper bound",
                points: rows.iter().map(|r| (r.n as f64, r.normalized)).collect(),
                color: "#1f77b4",
                dashed: false,
            }],
            Some((constant, "asymptotic constant")),
        );
        files::write_artifact(&dir, "study.svg", &plot)?;
    }
    if formats.json {
        let artifact = StudyArtifact {
            p,
            q,
            operator: op,
            theta,
            seed,
            resolution,
            asymptotic_constant: constant,
            dens_status: asym.dens_status,
            rows,
        };
        files::write_artifact(&dir, "study.json", &files::to_json(&artifact)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Kernel(args) => cmd_kernel(args),
        Command::Extremal(args) => cmd_extremal(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Nodes(args) => cmd_nodes(args),
        Command::Error(args) => cmd_error(args),
        Command::Study(args) => cmd_study(args),
    }
}

fn exit_code_for(err: &IsorecError) -> u8 {
    match err.kind() {
        "out_of_range" => 3,
        "oracle_failure" => 4,
        "budget" => 5,
        "io" => 6,
        // invalid_coefficients, parameter, domain, n_too_small
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            let obj = serde_json::json!({ "error": err.kind(), "message": err.to_string() });
            eprintln!("{obj}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
