//! `ngs` command-line front end.
//!
//! Exit codes: 0 success or converged, 1 partial or not converged, 2 zero
//! plateau without minimizer, 3 vanishing suspected, 64 usage or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    empirical_bounds, gnuplot_script, potential_free_scan, quadratic_form_infimum, scan_with_results, subadditivity_check,
    threshold_a0, ScanMode,
};
use crate::discretization::{GridSpec, RadialGrid};
use crate::domain::{classify_v, sha256_hex, Model, Potential};
use crate::error::Error;
use crate::solver::{minimize, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

pub const DEFAULT_RADIUS: f64 = 20.0;
pub const DEFAULT_NODES: usize = 2000;
pub const GRID_ENV: &str = "NGS_DEFAULT_GRID";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "ngs", version, about = "Normalized ground states of radial NLS problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize J on the mass sphere and write the ground state.
    Solve(SolveArgs),
    /// Scan a ↦ C_a and check monotonicity and sub-additivity.
    Scan(ScanArgs),
    /// Locate the sign change a_0 of C_a inside a bracket.
    Threshold(ThresholdArgs),
    /// Smallest eigenvalue of −Δ + V on the grid.
    Spectrum(CommonArgs),
    /// Report the hypotheses satisfied by the model.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "grid-R", value_parser = positive_f64)]
    pub grid_r: Option<f64>,
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,
    #[arg(long, value_parser = positive_f64)]
    pub dt: Option<f64>,
    /// Projected-gradient tolerance.
    #[arg(long, value_parser = positive_f64)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, default_value = "ngs-out")]
    pub out: PathBuf,
    /// Check an existing output directory instead of computing.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = positive_f64)]
    pub mass: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "a-min", value_parser = positive_f64)]
    pub a_min: f64,
    #[arg(long = "a-max", value_parser = positive_f64)]
    pub a_max: f64,
    #[arg(long, default_value_t = 12)]
    pub steps: usize,
    /// Independent points on all cores (disables warm starts).
    #[arg(long)]
    pub parallel: bool,
    /// Skip the potential-free curve E_a.
    #[arg(long = "no-free")]
    pub no_free: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "a-lo", value_parser = positive_f64)]
    pub a_lo: f64,
    #[arg(long = "a-hi", value_parser = positive_f64)]
    pub a_hi: f64,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Full argument vector, replayable by `--verify`.
    pub command: Vec<String>,
    pub model_path: String,
    /// Hash of the canonical model spec.
    pub model_fingerprint: String,
    /// Hash of the model file bytes.
    pub model_file_sha256: String,
    pub grid: GridSpec,
    pub config: SolverConfig,
    pub version: String,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

/// Failure that maps to an exit code with a message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json { .. }
            | Error::InvalidModel(_)
            | Error::InvalidGrid(_)
            | Error::OutOfRange(_)
            | Error::Csv(_)
            | Error::Io(_) => EXIT_USAGE,
            _ => EXIT_PARTIAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let argv: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    match dispatch(&cli, &argv) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("ngs: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, argv: &[String]) -> CliResult<i32> {
    let common = match &cli.command {
        Command::Solve(a) => &a.common,
        Command::Scan(a) => &a.common,
        Command::Threshold(a) => &a.common,
        Command::Spectrum(a) | Command::Validate(a) => a,
    };
    let ctx = Context::load(common)?;
    if common.verify {
        return verify(cli, &ctx);
    }
    std::fs::create_dir_all(&common.out).map_err(|e| usage(format!("cannot create {}: {e}", common.out.display())))?;
    let started = Instant::now();
    let (code, outputs) = match &cli.command {
        Command::Solve(a) => cmd_solve(&ctx, a)?,
        Command::Scan(a) => cmd_scan(&ctx, a)?,
        Command::Threshold(a) => cmd_threshold(&ctx, a)?,
        Command::Spectrum(_) => cmd_spectrum(&ctx)?,
        Command::Validate(_) => cmd_validate(&ctx)?,
    };
    write_manifest(&ctx, argv, &outputs, started.elapsed().as_secs_f64())?;
    Ok(code)
}

/// Grid used when neither `--grid-R` nor `--grid-n` is given:
/// `NGS_DEFAULT_GRID="R,n"` or `(20, 2000)`.
pub fn default_grid() -> CliResult<(f64, usize)> {
    match std::env::var(GRID_ENV) {
        Ok(v) => {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            let bad = || usage(format!("{GRID_ENV} must be \"R,n\", got {v:?}"));
            if parts.len() != 2 {
                return Err(bad());
            }
            let r = positive_f64(parts[0]).map_err(|_| bad())?;
            let n = parts[1].parse::<usize>().map_err(|_| bad())?;
            Ok((r, n))
        }
        Err(_) => Ok((DEFAULT_RADIUS, DEFAULT_NODES)),
    }
}

struct Context {
    model: Model,
    model_path: PathBuf,
    model_bytes: Vec<u8>,
    grid: Arc<RadialGrid>,
    config: SolverConfig,
    out: PathBuf,
}

impl Context {
    fn load(common: &CommonArgs) -> CliResult<Self> {
        let model_bytes = std::fs::read(&common.model)
            .map_err(|e| usage(format!("cannot read model {}: {e}", common.model.display())))?;
        let text = String::from_utf8(model_bytes.clone()).map_err(|_| usage("model file is not UTF-8"))?;
        let model = Model::from_json_str(&text, common.model.parent()).map_err(|e| match e {
            Error::Json { line, column, message } => usage(format!(
                "malformed model {} at line {line}, column {column}: {message}",
                common.model.display()
            )),
            e => Failure::from(e),
        })?;
        let (r_default, n_default) = default_grid()?;
        let grid = RadialGrid::new(
            model.dim,
            common.grid_r.unwrap_or(r_default),
            common.grid_n.unwrap_or(n_default),
        )?;
        let mut config = SolverConfig::default();
        if let Some(dt) = common.dt {
            config.dt = dt;
        }
        if let Some(t) = common.tol {
            config.tol_grad = t;
        }
        if let Some(s) = common.seed {
            config.seed = s;
        }
        if let Some(s) = common.starts {
            config.starts = s;
        }
        config.validate()?;
        Ok(Self {
            model,
            model_path: common.model.clone(),
            model_bytes,
            grid: Arc::new(grid),
            config,
            out: common.out.clone(),
        })
    }

    fn write(&self, name: &str, contents: &str, outputs: &mut Vec<String>) -> CliResult<()> {
        std::fs::write(self.out.join(name), contents)
            .map_err(|e| Failure::from(Error::Io(e)))?;
        outputs.push(name.to_string());
        Ok(())
    }
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn cmd_solve(ctx: &Context, args: &SolveArgs) -> CliResult<(i32, Vec<String>)> {
    let r = minimize(args.mass, &ctx.model, &ctx.grid, &ctx.config)?;
    let mut outputs = Vec::new();
    let doc = json!({
        "model_fingerprint": ctx.model.fingerprint(),
        "grid": ctx.grid.spec(),
        "result": r.summary(),
    });
    ctx.write("result.json", &pretty(&doc), &mut outputs)?;
    ctx.write("profile.csv", &r.u.to_csv_string(), &mut outputs)?;
    ctx.write("profile.json", &pretty(&ctx.grid.spec()), &mut outputs)?;
    ctx.write("trace.csv", &r.trace_csv(), &mut outputs)?;
    println!(
        "a = {}  C_a = {:.10}  lambda = {:.10}  outcome = {}  residual = {:.2e}  iterations = {}",
        r.a,
        r.c_a_estimate,
        r.lambda,
        serde_json::to_value(r.outcome).unwrap().as_str().unwrap_or("?"),
        r.residual,
        r.iterations
    );
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok((r.outcome.exit_code(), outputs))
}

fn scan_masses(args: &ScanArgs) -> CliResult<Vec<f64>> {
    if !(args.a_min < args.a_max) {
        return Err(usage("--a-min must be smaller than --a-max"));
    }
    if args.steps < 3 {
        return Err(usage("--steps must be at least 3"));
    }
    let k = (args.steps - 1) as f64;
    Ok((0..args.steps)
        .map(|i| args.a_min + (args.a_max - args.a_min) * i as f64 / k)
        .collect())
}

fn scan_mode(args: &ScanArgs) -> ScanMode {
    if args.parallel {
        ScanMode::Parallel
    } else {
        ScanMode::WarmStart
    }
}

fn cmd_scan(ctx: &Context, args: &ScanArgs) -> CliResult<(i32, Vec<String>)> {
    let masses = scan_masses(args)?;
    let mode = scan_mode(args);
    let (curve, results) = scan_with_results(&masses, &ctx.model, &ctx.grid, &ctx.config, mode)?;
    let sub = subadditivity_check(&curve);
    let mut outputs = Vec::new();
    ctx.write("curve.csv", &curve.to_csv(), &mut outputs)?;
    ctx.write("subadditivity.csv", &sub.to_csv(), &mut outputs)?;
    let with_free = !args.no_free && ctx.model.potential != Potential::Zero;
    let free = if with_free {
        let f = potential_free_scan(&masses, &ctx.model, &ctx.grid, &ctx.config, mode)?;
        ctx.write("free_curve.csv", &f.to_csv(), &mut outputs)?;
        Some(f)
    } else {
        None
    };
    let title = format!("C_a for {}", ctx.model_path.display());
    let script = gnuplot_script("curve.csv", free.as_ref().map(|_| "free_curve.csv"), &title);
    ctx.write("curve.gp", &script, &mut outputs)?;

    let finite = !ctx.model.potential.is_coercive();
    let monotone = finite.then(|| curve.is_nonincreasing(1e-8));
    let below_free = free.as_ref().map(|f| {
        curve
            .points
            .iter()
            .zip(&f.points)
            .filter(|(_, e)| e.converged)
            .all(|(c, e)| c.C_a < e.C_a)
    });
    let summary = json!({
        "curve": curve,
        "monotone_nonincreasing": monotone,
        "max_increase": curve.max_increase(),
        "subadditive": sub.holds(),
        "strict_pairs": sub.strict_pairs(),
        "pairs": sub.pairs.len(),
        "non_strict": sub.non_strict,
        "below_free_curve": below_free,
        "failed_masses": curve.failed,
        "empirical_bounds": empirical_bounds(&results, &ctx.model)?,
    });
    ctx.write("scan.json", &pretty(&summary), &mut outputs)?;
    let show = |b: Option<bool>| b.map_or("n/a".to_string(), |b| b.to_string());
    println!(
        "points = {}  monotone = {}  subadditive = {}  strict pairs = {}/{}  below E_a = {}",
        curve.points.len(),
        show(monotone),
        sub.holds(),
        sub.strict_pairs(),
        sub.pairs.len(),
        show(below_free)
    );
    if curve.is_partial() {
        let list: Vec<String> = curve.failed.iter().map(|a| a.to_string()).collect();
        eprintln!("partial curve; failed masses: {}", list.join(", "));
        return Ok((EXIT_PARTIAL, outputs));
    }
    Ok((EXIT_OK, outputs))
}

fn cmd_threshold(ctx: &Context, args: &ThresholdArgs) -> CliResult<(i32, Vec<String>)> {
    let report = threshold_a0(&ctx.model, &ctx.grid, &ctx.config, args.a_lo, args.a_hi)?;
    let mut outputs = Vec::new();
    ctx.write("threshold.json", &pretty(&report), &mut outputs)?;
    if report.below_bracket {
        println!("a0 <= {} (C_a already negative at a_lo)", report.upper);
    } else {
        println!("a0 = {:.6} in [{:.6}, {:.6}]", report.a0, report.lower, report.upper);
    }
    Ok((EXIT_OK, outputs))
}

fn cmd_spectrum(ctx: &Context) -> CliResult<(i32, Vec<String>)> {
    let s = quadratic_form_infimum(&ctx.model, &ctx.grid)?;
    let mut outputs = Vec::new();
    ctx.write("spectrum.json", &pretty(&s.summary(&ctx.model)), &mut outputs)?;
    ctx.write("eigenvector.csv", &s.eigenvector.to_csv_string(), &mut outputs)?;
    println!("eigenvalue = {:.10}", s.eigenvalue);
    if let Some(c) = &s.caveat {
        eprintln!("note: {c}");
    }
    Ok((EXIT_OK, outputs))
}

fn cmd_validate(ctx: &Context) -> CliResult<(i32, Vec<String>)> {
    let g = ctx.model.classify_g()?;
    let v = classify_v(&ctx.model.potential, &ctx.grid)?;
    let doc = json!({
        "N": ctx.model.dim,
        "model_fingerprint": ctx.model.fingerprint(),
        "g": g,
        "v": v,
    });
    let text = pretty(&doc);
    let mut outputs = Vec::new();
    ctx.write("validate.json", &text, &mut outputs)?;
    print!("{text}");
    Ok((EXIT_OK, outputs))
}

fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

fn write_manifest(ctx: &Context, argv: &[String], outputs: &[String], seconds: f64) -> CliResult<()> {
    let mut files = Vec::new();
    for name in outputs {
        files.push(OutputFile {
            path: name.clone(),
            sha256: file_sha256(&ctx.out.join(name))?,
        });
    }
    let manifest = RunManifest {
        command: argv.to_vec(),
        model_path: ctx.model_path.display().to_string(),
        model_fingerprint: ctx.model.fingerprint(),
        model_file_sha256: sha256_hex(&ctx.model_bytes),
        grid: ctx.grid.spec(),
        config: ctx.config,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        wall_clock_seconds: seconds,
        outputs: files,
    };
    std::fs::write(ctx.out.join(MANIFEST), pretty(&manifest)).map_err(|e| Failure::from(Error::Io(e)))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> CliResult<RunManifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed {}: {e}", path.display())))
}

/// Replays output hashes and, for scans, recomputes three curve points.
fn verify(cli: &Cli, ctx: &Context) -> CliResult<i32> {
    let manifest = read_manifest(&ctx.out)?;
    let mut ok = true;
    if manifest.model_fingerprint != ctx.model.fingerprint() {
        println!("model fingerprint differs from the manifest");
        ok = false;
    }
    for f in &manifest.outputs {
        let actual = file_sha256(&ctx.out.join(&f.path))?;
        let good = actual == f.sha256;
        println!("{} {}", if good { "ok     " } else { "CHANGED" }, f.path);
        ok &= good;
    }
    if let Command::Scan(_) = &cli.command {
        ok &= spot_check(ctx, &manifest)?;
    }
    println!("verify: {}", if ok { "ok" } else { "FAILED" });
    Ok(if ok { EXIT_OK } else { EXIT_PARTIAL })
}

fn spot_check(ctx: &Context, manifest: &RunManifest) -> CliResult<bool> {
    let grid = Arc::new(RadialGrid::from_spec(manifest.grid)?);
    let mut reader = csv::Reader::from_path(ctx.out.join("curve.csv")).map_err(|e| Failure::from(Error::from(e)))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Failure::from(Error::from(e)))?;
        let num = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok());
        match (num(0), num(1), rec.get(3)) {
            (Some(a), Some(c), Some(conv)) => rows.push((a, c, conv == "true")),
            _ => return Err(usage("curve.csv has a malformed row")),
        }
    }
    if rows.is_empty() {
        return Err(usage("curve.csv is empty"));
    }
    let picks = [0, rows.len() / 2, rows.len() - 1];
    let mut ok = true;
    for &i in picks.iter() {
        let (a, c, _) = rows[i];
        let r = minimize(a, &ctx.model, &grid, &manifest.config)?;
        let tol = 1e-6 * c.abs().max(1.0);
        let good = (r.c_a_estimate - c).abs() <= tol;
        println!(
            "{} spot check a = {a}: recorded {c:.10e}, recomputed {:.10e}",
            if good { "ok     " } else { "MISMATCH" },
            r.c_a_estimate
        );
        ok &= good;
    }
    Ok(ok)
}
