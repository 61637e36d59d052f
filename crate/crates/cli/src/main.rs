use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use orbitsym::baselines::{best_equivariant_baseline, euler_solution, BaselineKind};
use orbitsym::classification::{
    axes_for_code, catalog_group, classify_table, enumerate_candidates, survivors_for_pair,
};
use orbitsym::minimizer::{sweep_omega, SweepPoint};
use orbitsym::symmetry::DEFAULT_CAP;
use orbitsym::variations::{euler_sine_vector, lagrange_instability_test, sine_variation_test, VariationReport};
use orbitsym::{
    minimize, Error, GroupSpec, MinimizeOptions, MinimizeResult, ProblemSetup, RotatingFrame, SigmaPair, SymmetryGroup,
    Vec3,
};
use serde::Serialize;

const WORKERS_ENV: &str = "ORBITSYM_WORKERS";

/// Relabelling factor between the period-2pi speeds used internally and the
/// period-12pi speeds of the published action-level figure.
const FIGURE_OMEGA_FACTOR: f64 = 6.0;

#[derive(Parser)]
#[command(name = "orbitsym", about = "Symmetric periodic orbits of the three-body problem in rotating frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced table of trivial-core symmetry groups.
    Classify(ClassifyArgs),
    /// Minimize the action over loops equivariant under a group.
    Minimize(MinimizeArgs),
    /// Minimize along a grid of angular speeds.
    Sweep(SweepArgs),
    /// Vertical second variation at a rotating Lagrange or Euler solution.
    SecondVariation(VariationArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Restrict to one index action pair, e.g. "(1,2),(1,2)".
    #[arg(long)]
    sigma_pair: Option<String>,
    /// Print the rotation axes of a sign code, e.g. 001.
    #[arg(long)]
    show_axes: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GroupArgs {
    /// Catalog name, e.g. L6-+.
    #[arg(long, conflicts_with = "group_file", required_unless_present = "group_file")]
    group: Option<String>,
    /// Group description in JSON.
    #[arg(long)]
    group_file: Option<PathBuf>,
    /// "equal" or a comma list.
    #[arg(long)]
    masses: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Frame axis "x,y,z"; defaults to e3 when it is a rotation axis.
    #[arg(long)]
    axis: Option<String>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long = "order", short = 'N', default_value_t = 32)]
    order: usize,
    #[arg(long = "grid", short = 'M', default_value_t = 256)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    #[arg(long)]
    allow_uncoercive: bool,
}

#[derive(Args)]
struct MinimizeArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File stem of the outputs.
    #[arg(long, default_value = "orbit")]
    prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum OmegaConvention {
    /// Period 2pi, as computed.
    Period,
    /// Speeds relabelled to the figure's period-12pi units.
    Figure,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// "start:stop:count", endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    omega_grid: String,
    #[arg(long, value_enum, default_value_t = OmegaConvention::Period)]
    omega_convention: OmegaConvention,
    /// JSONL destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Lagrange,
    Euler,
}

#[derive(Args)]
struct VariationArgs {
    #[arg(long, value_enum)]
    baseline: BaselineArg,
    #[arg(long)]
    masses: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    k: i64,
    #[arg(long, allow_hyphen_values = true)]
    omega: f64,
    /// Sine amplitudes "v1,v2,v3" for the Euler test.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let res = match cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Minimize(a) => cmd_minimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::SecondVariation(a) => cmd_second_variation(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}

fn exit_code_of(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::ReductionMismatch { .. }) => 2,
        Some(Error::AllStartsCollided(_)) => 3,
        Some(Error::NotARotationAxis(_)) => 4,
        Some(Error::BoundToCollisions) => 5,
        Some(Error::FullyUncoercive) => 8,
        _ => 1,
    }
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',').map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}"))).collect()
}

fn parse_masses(s: Option<&str>, n: usize) -> anyhow::Result<Option<Vec<f64>>> {
    match s {
        None => Ok(None),
        Some("equal") => Ok(Some(vec![1.0; n])),
        Some(list) => {
            let m = parse_list(list)?;
            if m.len() != n {
                bail!("expected {n} masses, got {}", m.len());
            }
            Ok(Some(m))
        }
    }
}

fn axis_label(a: &[f64; 3]) -> String {
    match a.iter().position(|c| (c.abs() - 1.0).abs() < 1e-12) {
        Some(i) if a.iter().filter(|c| c.abs() > 1e-12).count() == 1 => format!("e{}", i + 1),
        _ => format!("{},{},{}", a[0], a[1], a[2]),
    }
}

fn cmd_classify(a: ClassifyArgs) -> anyhow::Result<u8> {
    if let Some(code) = &a.show_axes {
        let pair = match &a.sigma_pair {
            Some(p) => SigmaPair::parse(p)?,
            None => SigmaPair::CycleTransposition,
        };
        let axes = axes_for_code(code, pair)?;
        let labels: Vec<String> = axes.iter().map(axis_label).collect();
        let record = serde_json::json!({ "code": code, "sigma_pair": pair.to_string(), "axes": labels });
        write_out(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&record)?))?;
        return Ok(0);
    }
    if let Some(p) = &a.sigma_pair {
        let entries = survivors_for_pair(SigmaPair::parse(p)?);
        write_out(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&entries)?))?;
        return Ok(0);
    }
    let (table, check) = classify_table(&enumerate_candidates());
    write_out(a.output.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&table)?))?;
    match check {
        Ok(()) => Ok(0),
        Err(e) => {
            eprintln!("error: {e}");
            Ok(2)
        }
    }
}

struct Problem {
    label: String,
    group: SymmetryGroup,
    masses: Vec<f64>,
    alpha: f64,
    axis: Vec3,
}

fn load_problem(a: &GroupArgs) -> anyhow::Result<Problem> {
    let (label, group, file_masses) = match (&a.group, &a.group_file) {
        (Some(name), None) => (name.clone(), catalog_group(name)?, None),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec: GroupSpec = serde_json::from_str(&text).context("parsing group file")?;
            let group = spec.build(DEFAULT_CAP)?;
            (path.display().to_string(), group, spec.masses)
        }
        _ => bail!("give exactly one of --group and --group-file"),
    };
    let masses = parse_masses(a.masses.as_deref(), group.n())?.or(file_masses).unwrap_or_else(|| vec![1.0; group.n()]);
    let group = group.with_masses(&masses)?;
    let axis = match &a.axis {
        Some(s) => {
            let v = parse_list(s)?;
            if v.len() != 3 {
                bail!("axis needs three components");
            }
            Vec3::new(v[0], v[1], v[2]).normalize()
        }
        None => {
            let axes = group.rotation_axes();
            if axes.is_empty() || axes.iter().any(|v| (v - Vec3::z()).norm() < 1e-9) {
                Vec3::z()
            } else {
                axes[0]
            }
        }
    };
    let masses = group.masses_or_equal();
    Ok(Problem { label, group, masses, alpha: a.alpha, axis })
}

fn options(s: &SolverArgs) -> MinimizeOptions {
    MinimizeOptions {
        order: s.order,
        grid: s.grid,
        max_iters: s.max_iters,
        grad_tol: s.grad_tol,
        starts: s.starts,
        seed: s.seed,
        allow_uncoercive: s.allow_uncoercive,
        ..MinimizeOptions::default()
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Serialize)]
struct MinimizeReport<'a> {
    group: &'a str,
    masses: &'a [f64],
    alpha: f64,
    omega: f64,
    axis: [f64; 3],
    order: usize,
    seed: u64,
    result: &'a MinimizeResult,
    timestamp: u64,
}

fn cmd_minimize(a: MinimizeArgs) -> anyhow::Result<u8> {
    let p = load_problem(&a.group)?;
    let setup = ProblemSetup::new(&p.masses, p.alpha, RotatingFrame::about(&p.axis, a.omega))?;
    let opts = options(&a.solver);
    let r = minimize(&setup, &p.group, &opts)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let report = MinimizeReport {
        group: &p.label,
        masses: &p.masses,
        alpha: p.alpha,
        omega: a.omega,
        axis: [p.axis.x, p.axis.y, p.axis.z],
        order: opts.order,
        seed: opts.seed,
        result: &r,
        timestamp: timestamp(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    fs::write(a.out_dir.join(format!("{}.json", a.prefix)), format!("{json}\n"))?;
    fs::write(a.out_dir.join(format!("{}_rotating.csv", a.prefix)), r.loop_.to_csv(r.grid, None))?;
    fs::write(
        a.out_dir.join(format!("{}_inertial.csv", a.prefix)),
        r.loop_.to_csv(r.grid, Some(&setup.frame.omega_vec)),
    )?;
    println!("{json}");
    if !r.converged {
        eprintln!("not converged: gradient norm {:e} after {} iterations", r.grad_norm, r.iterations);
        return Ok(7);
    }
    Ok(0)
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("omega grid must be start:stop:count");
    }
    let (a, b): (f64, f64) = (parts[0].parse()?, parts[1].parse()?);
    let n: usize = parts[2].parse()?;
    Ok(match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}

fn baseline_level(group: &SymmetryGroup, kind: BaselineKind, alpha: f64, omega: f64) -> Option<f64> {
    best_equivariant_baseline(group, kind, alpha, omega, 12).ok().map(|b| b.baseline.action)
}

fn sweep_record(p: &SweepPoint, shown: f64) -> serde_json::Value {
    match &p.result {
        Ok(r) => serde_json::json!({
            "record": "point",
            "omega": shown,
            "action": r.action,
            "grad_norm": r.grad_norm,
            "planarity_ratio": r.diagnostics.planarity_ratio,
            "J_norm": r.diagnostics.j_norm(),
            "min_distance": r.min_distance,
            "converged": r.converged,
        }),
        Err(e) => serde_json::json!({ "record": "point", "omega": shown, "error": e, "converged": false }),
    }
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<u8> {
    let omegas = parse_grid(&a.omega_grid)?;
    if omegas.is_empty() {
        bail!("empty omega grid");
    }
    let p = load_problem(&a.group)?;
    let opts = options(&a.solver);
    let shown = |w: f64| match a.omega_convention {
        OmegaConvention::Period => w,
        OmegaConvention::Figure => w * FIGURE_OMEGA_FACTOR,
    };
    let points = sweep_omega(&p.masses, p.alpha, &p.axis, &p.group, &omegas, &opts);
    let mut out = String::new();
    let mut failed = 0;
    for pt in &points {
        if !pt.result.as_ref().is_ok_and(|r| r.converged) {
            failed += 1;
        }
        out.push_str(&sweep_record(pt, shown(pt.omega)).to_string());
        out.push('\n');
    }
    for &w in &omegas {
        let rec = serde_json::json!({
            "record": "baseline",
            "omega": shown(w),
            "lagrange": baseline_level(&p.group, BaselineKind::Lagrange, p.alpha, w),
            "euler": baseline_level(&p.group, BaselineKind::Euler, p.alpha, w),
        });
        out.push_str(&rec.to_string());
        out.push('\n');
    }
    write_out(a.output.as_deref(), &out)?;
    if failed > 0 {
        eprintln!("{failed} of {} points failed or did not converge", points.len());
        return Ok(6);
    }
    Ok(0)
}

#[derive(Serialize)]
struct VariationOutput {
    baseline: &'static str,
    masses: Vec<f64>,
    alpha: f64,
    k: i64,
    omega: f64,
    #[serde(flatten)]
    report: VariationReport,
}

fn cmd_second_variation(a: VariationArgs) -> anyhow::Result<u8> {
    let masses = parse_masses(a.masses.as_deref(), 3)?.unwrap_or_else(|| vec![1.0; 3]);
    let (name, report) = match a.baseline {
        BaselineArg::Lagrange => ("lagrange", lagrange_instability_test(&masses, a.alpha, a.k, a.omega)?),
        BaselineArg::Euler => {
            let b = euler_solution(&masses, a.alpha, a.k, a.omega)?;
            let v = match &a.v {
                Some(s) => parse_list(s)?,
                None => euler_sine_vector(&masses)?.to_vec(),
            };
            ("euler", sine_variation_test(&b, &v)?)
        }
    };
    let total: f64 = masses.iter().sum();
    let out = VariationOutput {
        baseline: name,
        masses: masses.iter().map(|m| m / total).collect(),
        alpha: a.alpha,
        k: a.k,
        omega: a.omega,
        report,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}
