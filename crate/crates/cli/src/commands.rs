use std::fs;
use std::path::{Path, PathBuf};

use cklh::contraction;
use cklh::hamilton::CoefficientSpec;
use cklh::integrator::{fmt17, integrate, IntegrateError, Trajectory, TrajectoryIoError};
use cklh::space::{KappaPair, ParallelPoint};
use cklh::superposition::Branch;
use cklh::tables;
use cklh::verify::{
    self, draw_flow, integrate_three, random_sinusoids, random_triangle, reconstruct, suite_rng, SuiteError,
    Tolerances, VerifyOptions, VerifyReport,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical abort: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn trajectory_io(path: &Path, e: TrajectoryIoError) -> CliError {
    match e {
        TrajectoryIoError::Io(source) => CliError::Io {
            context: path.display().to_string(),
            source,
        },
        other => CliError::Usage(format!("{}: {other}", path.display())),
    }
}

fn integrate_error(context: String, e: IntegrateError) -> CliError {
    match e {
        IntegrateError::Singularity { .. } => CliError::Numerical(format!("{context}: {e}")),
        _ => CliError::Usage(format!("{context}: {e}")),
    }
}

fn suite_error(e: SuiteError) -> CliError {
    match e {
        SuiteError::Integrate(e) => integrate_error("verification flow".into(), e),
        other => CliError::Numerical(other.to_string()),
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub tolerances: Tolerances,
}

impl Context {
    fn prepare_out(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(io(self.out.display().to_string()))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        let path = self.path(name);
        fs::write(&path, text).map_err(io(path.display().to_string()))
    }

    fn csv_writer(&self, name: &str) -> Result<csv::Writer<fs::File>, CliError> {
        let path = self.path(name);
        let f = fs::File::create(&path).map_err(io(path.display().to_string()))?;
        Ok(csv::Writer::from_writer(f))
    }
}

fn csv_error(name: &str, e: csv::Error) -> CliError {
    CliError::Io {
        context: name.to_string(),
        source: e.into(),
    }
}

fn write_records<I, R>(ctx: &Context, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = ctx.csv_writer(name)?;
    w.write_record(header).map_err(|e| csv_error(name, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_error(name, e))?;
    }
    w.flush().map_err(io(name))
}

#[derive(Serialize)]
struct TrajectorySummary {
    file: String,
    initial: ParallelPoint,
    endpoint: ParallelPoint,
    samples: usize,
}

#[derive(Serialize)]
struct IntegrateReport {
    command: &'static str,
    seed: u64,
    kappa: KappaPair,
    t0: f64,
    t1: f64,
    step: f64,
    trajectories: Vec<TrajectorySummary>,
}

pub fn integrate_cmd(ctx: &Context) -> Result<bool, CliError> {
    let cfg = &ctx.config;
    let kp = cfg.kappa_pair()?;
    let c = cfg
        .coefficients
        .clone()
        .ok_or_else(|| CliError::Usage("integrate needs `[coefficients]`".into()))?;
    let initial = cfg.initial.clone().unwrap_or_default();
    if initial.is_empty() {
        return Err(CliError::Usage("integrate needs at least one initial point".into()));
    }
    let w = &cfg.time;
    let mut runs = Vec::new();
    for (i, &p) in initial.iter().enumerate() {
        let t = integrate(kp, &c, p, w.t0, w.t1, w.step)
            .map_err(|e| integrate_error(format!("solution {i} from ({}, {})", p.x, p.y), e))?;
        runs.push(t);
    }
    ctx.prepare_out()?;
    let mut summaries = Vec::new();
    for (i, t) in runs.iter().enumerate() {
        let stem = format!("trajectory_{i}");
        t.save(&ctx.out, &stem).map_err(|e| trajectory_io(&ctx.path(&stem), e))?;
        let end = t.endpoint();
        println!("trajectory_{i}: {} samples, endpoint ({}, {})", t.len(), fmt17(end.x), fmt17(end.y));
        summaries.push(TrajectorySummary {
            file: format!("{stem}.csv"),
            initial: initial[i],
            endpoint: end,
            samples: t.len(),
        });
    }
    ctx.write_json(
        "integrate_report.json",
        &IntegrateReport {
            command: "integrate",
            seed: ctx.seed,
            kappa: kp,
            t0: w.t0,
            t1: w.t1,
            step: w.step,
            trajectories: summaries,
        },
    )?;
    Ok(true)
}

pub fn verify_options(ctx: &Context) -> VerifyOptions {
    VerifyOptions {
        seed: ctx.seed,
        spaces: ctx.config.spaces(),
        tolerances: ctx.tolerances.clone(),
        sampling: ctx.config.sampling.clone(),
        ..VerifyOptions::default()
    }
}

/// Runs the suites with explicit options and writes the report.
pub fn verify_with(ctx: &Context, opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let report = verify::run_all(opts).map_err(suite_error)?;
    ctx.prepare_out()?;
    for s in &report.suites {
        println!(
            "[{}] {:<22} {:<25} {:.3e} (tol {:.1e})",
            if s.passed { "PASS" } else { "FAIL" },
            s.suite,
            s.space.unwrap_or("-"),
            s.max_residual,
            s.tolerance
        );
    }
    write_records(
        ctx,
        "verify.csv",
        &["suite", "space", "max_residual", "tolerance", "samples", "passed", "note"],
        report.suites.iter().map(|s| {
            [
                s.suite.to_string(),
                s.space.unwrap_or("").to_string(),
                fmt17(s.max_residual),
                fmt17(s.tolerance),
                s.samples.to_string(),
                s.passed.to_string(),
                s.note.clone().unwrap_or_default(),
            ]
        }),
    )?;
    ctx.write_json("verify_report.json", &report)?;
    Ok(report)
}

pub fn verify_cmd(ctx: &Context) -> Result<bool, CliError> {
    Ok(verify_with(ctx, &verify_options(ctx))?.passed)
}

#[derive(Serialize)]
struct SuperposeReport {
    command: &'static str,
    seed: u64,
    kappa: KappaPair,
    initial: [ParallelPoint; 3],
    coefficients: CoefficientSpec,
    s1: f64,
    s2: f64,
    area: f64,
    degenerate: bool,
    samples: usize,
    max_error: f64,
    max_chart_literal_error: f64,
    branch_flips: usize,
    tolerance: f64,
    passed: bool,
}

fn distinct(pts: &[ParallelPoint; 3]) -> bool {
    pts[0] != pts[1] && pts[0] != pts[2] && pts[1] != pts[2]
}

pub fn superpose_cmd(ctx: &Context) -> Result<bool, CliError> {
    let cfg = &ctx.config;
    let kp = cfg.kappa_pair()?;
    let w = &cfg.time;
    let window = [w.t0, w.t1];
    let mut rng = suite_rng(ctx.seed, verify::SUPERPOSITION_STREAM, kp.canonical());
    let given = match &cfg.initial {
        None => None,
        Some(v) => Some(<[ParallelPoint; 3]>::try_from(v.as_slice()).map_err(|_| {
            CliError::Usage(format!("superpose needs exactly three initial points, got {}", v.len()))
        })?),
    };
    if given.as_ref().is_some_and(|p| !distinct(p)) {
        return Err(CliError::Usage("superpose needs three distinct initial points".into()));
    }
    let runs = match (given, &cfg.coefficients) {
        (None, None) => {
            let (mut runs, _) = draw_flow(kp, &mut rng, window, &[w.step]).map_err(suite_error)?;
            runs.pop().expect("one step")
        }
        (pts, c) => {
            let pts = pts.unwrap_or_else(|| random_triangle(kp, &mut rng));
            let c = c.clone().unwrap_or_else(|| random_sinusoids(&mut rng));
            integrate_three(kp, &c, pts, window, w.step).map_err(|e| integrate_error("superpose".into(), e))?
        }
    };
    let rec = reconstruct(kp, [&runs[0], &runs[1], &runs[2]], cfg.output.samples)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    ctx.prepare_out()?;
    if cfg.output.trajectories {
        for (i, t) in runs.iter().enumerate() {
            let stem = format!("solution_{}", i + 1);
            t.save(&ctx.out, &stem).map_err(|e| trajectory_io(&ctx.path(&stem), e))?;
        }
    }
    let branch = |b: Branch| if b == Branch::Plus { "+" } else { "-" }.to_string();
    write_records(
        ctx,
        "reconstruction.csv",
        &["t", "x", "y", "error_plus", "error_minus", "branch", "chart_literal_error"],
        rec.samples.iter().map(|s| {
            [
                fmt17(s.t),
                fmt17(s.x),
                fmt17(s.y),
                fmt17(s.error_plus),
                fmt17(s.error_minus),
                branch(s.best),
                fmt17(s.literal_error),
            ]
        }),
    )?;
    let tol = ctx.tolerances.superposition;
    let passed = rec.max_error <= tol;
    let initial = [0, 1, 2].map(|i| runs[i].points[0]);
    ctx.write_json(
        "superpose_report.json",
        &SuperposeReport {
            command: "superpose",
            seed: ctx.seed,
            kappa: kp,
            initial,
            coefficients: runs[0].coeffs.clone(),
            s1: rec.s1,
            s2: rec.s2,
            area: rec.area,
            degenerate: rec.degenerate,
            samples: rec.samples.len(),
            max_error: rec.max_error,
            max_chart_literal_error: rec.max_literal_error,
            branch_flips: rec.branch_flips,
            tolerance: tol,
            passed,
        },
    )?;
    if rec.degenerate {
        println!("degenerate triangle at t0: area {:.3e}", rec.area);
    }
    println!(
        "[{}] superposition {kp}: max error {:.3e} (tol {tol:.1e}), branch flips {}",
        if passed { "PASS" } else { "FAIL" },
        rec.max_error,
        rec.branch_flips
    );
    Ok(passed)
}

#[derive(Serialize)]
struct TablesReport {
    command: &'static str,
    seed: u64,
    tolerance: f64,
    spaces: Vec<tables::TableSummary>,
    passed: bool,
}

pub fn tables_cmd(ctx: &Context) -> Result<bool, CliError> {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for s in ctx.config.spaces() {
        let r = tables::table_rows(s).map_err(|e| CliError::Numerical(e.to_string()))?;
        summaries.push(tables::summarize(s, &r));
        rows.extend(r);
    }
    ctx.prepare_out()?;
    let path = ctx.path("tables.csv");
    let f = fs::File::create(&path).map_err(io(path.display().to_string()))?;
    tables::write_rows(f, &rows).map_err(|e| csv_error("tables.csv", e))?;
    let tol = ctx.tolerances.tables;
    for s in &summaries {
        println!(
            "[{}] {:<25} {:>5} rows  max discrepancy {:.3e}  ({})",
            if s.max_discrepancy <= tol { "PASS" } else { "FAIL" },
            s.space,
            s.rows,
            s.max_discrepancy,
            s.worst_quantity
        );
    }
    let passed = summaries.iter().all(|s| s.max_discrepancy <= tol);
    ctx.write_json(
        "tables_report.json",
        &TablesReport {
            command: "tables",
            seed: ctx.seed,
            tolerance: tol,
            spaces: summaries,
            passed,
        },
    )?;
    Ok(passed)
}

#[derive(Serialize)]
struct ContractReport {
    command: &'static str,
    seed: u64,
    deltas: Vec<f64>,
    rows: usize,
    max_difference: f64,
    worst_quantity: String,
    tolerance: f64,
    passed: bool,
}

pub fn contract_cmd(ctx: &Context) -> Result<bool, CliError> {
    let deltas = &ctx.config.contract.deltas;
    if deltas.is_empty() || deltas.iter().any(|d| !d.is_finite() || *d == 0.0) {
        return Err(CliError::Usage("contract.deltas must be finite and nonzero".into()));
    }
    let rows = contraction::sweep(deltas).map_err(|e| CliError::Numerical(e.to_string()))?;
    ctx.prepare_out()?;
    write_records(
        ctx,
        "contraction.csv",
        &["quantity", "varied", "kappa1", "kappa2", "delta", "at_limit", "at_delta", "difference"],
        rows.iter().map(|r| {
            [
                r.quantity.clone(),
                match r.varied {
                    contraction::Varied::Kappa1 => "kappa1",
                    contraction::Varied::Kappa2 => "kappa2",
                }
                .to_string(),
                fmt17(r.limit.kappa1),
                fmt17(r.limit.kappa2),
                fmt17(r.delta),
                fmt17(r.at_limit),
                fmt17(r.at_delta),
                fmt17(r.difference()),
            ]
        }),
    )?;
    let worst = rows.iter().max_by(|a, b| a.difference().total_cmp(&b.difference()));
    let max = contraction::max_difference(&rows);
    let tol = ctx.tolerances.contraction;
    let passed = max <= tol;
    let worst_quantity = worst.map_or_else(String::new, |r| format!("{} ({:?} -> 0 at {})", r.quantity, r.varied, r.limit));
    println!(
        "[{}] contraction: {} rows, max difference {max:.3e} (tol {tol:.1e}) at {worst_quantity}",
        if passed { "PASS" } else { "FAIL" },
        rows.len()
    );
    ctx.write_json(
        "contract_report.json",
        &ContractReport {
            command: "contract",
            seed: ctx.seed,
            deltas: deltas.clone(),
            rows: rows.len(),
            max_difference: max,
            worst_quantity,
            tolerance: tol,
            passed,
        },
    )?;
    Ok(passed)
}

/// Loads a trajectory written by `integrate`.
pub fn load_trajectory(dir: &Path, stem: &str) -> Result<Trajectory, CliError> {
    Trajectory::load(dir, stem).map_err(|e| trajectory_io(&dir.join(stem), e))
}
