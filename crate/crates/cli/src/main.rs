mod manifest;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use volwave::batch::{run_batch, significant_fraction, write_batch_csv};
use volwave::dynamics::{
    check_eigenvalue_identity, check_energy_hypothesis, compute_profile, write_profile_csv, ProfileExport,
};
use volwave::fitting::{fit, run_ladder, FitFamily, FitOptions, FitResult, LadderReport};
use volwave::marketdata::{build_distribution, ingest_trades, write_trades, VolumeAtPrice};
use volwave::models::{kummer_sqrt_eigenvalue, BesselParams, KummerParams, ModelSpec};
use volwave::oracle::{bessel_ode_residual, eigenvalue_search, kummer_ode_residual, standard_grid, ResidualReport};
use volwave::report::{write_plot_csv, Versioned};
use volwave::synth::{generate, generate_two_equilibrium, generate_uniform, SynthConfig};

use manifest::RunManifest;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit code 2.
    Input(String),
    /// Fit, model or oracle failure; exit code 3.
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn compute_err(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Parser)]
#[command(name = "volwave", version, about = "Fit Bessel and Kummer eigenfunction models to volume-at-price distributions")]
struct Cli {
    /// Where to write the run manifest (default: next to the first output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one trade file (model ladder by default).
    Fit(FitArgs),
    /// Run the ladder over many trade files.
    Batch(BatchArgs),
    /// Generate a synthetic trade file.
    Synth(SynthArgs),
    /// Check closed-form eigenfunctions against their ODEs.
    Oracle(OracleArgs),
    /// Liquidity, energy and force profile from a Bessel fit.
    Dynamics(DynamicsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    Bessel,
    Superposition,
    Kummer,
}

#[derive(Args, Serialize)]
struct FitFlags {
    /// Price-grid step.
    #[arg(long, default_value_t = 0.01)]
    tick: f64,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Fit a single family instead of running the ladder.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Kummer polynomial order, for `--family kummer` and the ladder's last step.
    #[arg(long, default_value_t = 1)]
    kummer_order: u32,
}

impl FitFlags {
    fn options(&self) -> FitOptions {
        FitOptions { confidence: self.confidence, kummer_order: self.kummer_order, ..FitOptions::default() }
    }
}

#[derive(Args, Serialize)]
struct FitArgs {
    /// Trade CSV (`timestamp,price,volume`).
    input: PathBuf,
    #[command(flatten)]
    flags: FitFlags,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot-data CSV path (empirical vs fitted probability per level).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BatchArgs {
    /// Trade files, directories (every `*.csv` inside) or glob patterns.
    #[arg(required = true)]
    inputs: Vec<String>,
    #[command(flatten)]
    flags: FitFlags,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Batch CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "bessel")]
    family: FamilyArg,
    /// Bessel eigenvalue ω.
    #[arg(long, default_value_t = 5.0)]
    omega: f64,
    /// Equilibrium price.
    #[arg(long, default_value_t = 10.0)]
    p0: f64,
    /// Kummer order m.
    #[arg(long, default_value_t = 1)]
    kummer_order: u32,
    /// Kummer eigenvalue A (restoring-force magnitude).
    #[arg(long)]
    a: Option<f64>,
    /// Kummer transaction energy E; sets √A = E/(1 + 2m) when `--a` is absent.
    #[arg(long = "energy", visible_alias = "E")]
    energy: Option<f64>,
    /// Second equilibrium price; the session jumps there (see `--mix`).
    #[arg(long)]
    second_center: Option<f64>,
    /// Share of the session spent at the first center.
    #[arg(long, default_value_t = 0.5)]
    mix: f64,
    /// Equal expected volume on every level instead of a model shape.
    #[arg(long)]
    uniform: bool,
    /// Lowest price level (default: p0 − 0.30).
    #[arg(long)]
    lo: Option<f64>,
    /// Highest price level (default: p0 + 0.30).
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    tick: f64,
    #[arg(long, default_value_t = 1_000_000)]
    volume: u64,
    #[arg(long, default_value_t = 2000)]
    trades: u64,
    /// Multiplicative noise level σ.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 14_400.0)]
    session_seconds: f64,
    /// Trade CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OracleMode {
    Bessel,
    Kummer,
    Eigen,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[arg(long, value_enum)]
    mode: OracleMode,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Kummer order.
    #[arg(long, default_value_t = 0)]
    m: u32,
    /// Transaction energy E.
    #[arg(long = "energy", visible_alias = "E", default_value_t = 1.0)]
    energy: f64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DynamicsArgs {
    /// JSON report written by `volwave fit`.
    #[arg(long = "in")]
    fit: PathBuf,
    /// The trade CSV the fit was made from.
    #[arg(long)]
    trades: PathBuf,
    /// Profile CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the profile as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Body of the `fit` JSON report.
#[derive(Debug, Serialize, Deserialize)]
struct FitReport {
    input: String,
    tick: f64,
    n_levels: usize,
    total_volume: u64,
    session_span: f64,
    /// Present when the ladder ran.
    ladder: Option<LadderReport>,
    /// Selected fit: the ladder's choice (or its last attempt), or the
    /// single requested family.
    result: Option<FitResult>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(input_err)?;
    writeln!(w).and_then(|_| w.flush()).map_err(input_err)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn load(path: &Path, tick: f64) -> Result<VolumeAtPrice, CliError> {
    let file = File::open(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let trades = ingest_trades(BufReader::new(file)).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    build_distribution(&trades, tick).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn fit_family(dist: &VolumeAtPrice, family: FamilyArg, options: &FitOptions) -> Result<FitResult, CliError> {
    match family {
        FamilyArg::Bessel => fit(dist, FitFamily::Bessel, None, options).map_err(compute_err),
        FamilyArg::Kummer => {
            fit(dist, FitFamily::Kummer { order: options.kummer_order }, None, options).map_err(compute_err)
        }
        FamilyArg::Superposition => {
            let shared = fit(dist, FitFamily::SuperpositionShared, None, options).map_err(compute_err)?;
            if shared.significant {
                return Ok(shared);
            }
            fit(dist, FitFamily::SuperpositionDistinct, None, options).map_err(compute_err)
        }
    }
}

fn summarize(result: &FitResult) -> String {
    let centers: Vec<String> = result.spec.centers().iter().map(|c| format!("{c:.6}")).collect();
    let rate = match result.spec {
        ModelSpec::BesselSingle(b) => format!("omega {:.6}", b.omega),
        ModelSpec::BesselSuperposition(s) => format!("omega {:.6}/{:.6}", s.omega1, s.omega2),
        ModelSpec::Kummer(k) => format!("m {} sqrt(A) {:.6}", k.m, k.sqrt_a()),
    };
    format!(
        "family {}  {rate}  p0 {}  R2 {:.4} vs crit {:.4}  verdict {}",
        result.family.label(),
        centers.join("/"),
        result.r_squared,
        result.r_squared_crit,
        if result.significant { "significant" } else { "not significant" }
    )
}

fn cmd_fit(args: &FitArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    manifest.input(&args.input);
    let dist = load(&args.input, args.flags.tick)?;
    let options = args.flags.options();
    let (ladder, result) = match args.flags.family {
        None => {
            let report = run_ladder(&dist, &options);
            let result = report.chosen_result().or_else(|| report.last_result()).cloned();
            if result.is_none() {
                let why = report.attempts.iter().filter_map(|a| a.error.clone()).collect::<Vec<_>>().join("; ");
                return Err(CliError::Compute(format!("no family could be fitted: {why}")));
            }
            (Some(report), result)
        }
        Some(family) => (None, Some(fit_family(&dist, family, &options)?)),
    };
    let result = result.expect("checked above");
    println!("{}", summarize(&result));
    let spec = result.spec;
    let report = FitReport {
        input: args.input.display().to_string(),
        tick: args.flags.tick,
        n_levels: dist.len(),
        total_volume: dist.total_volume,
        session_span: dist.session_span,
        ladder,
        result: Some(result),
    };
    if let Some(out) = &args.out {
        write_json(out, &Versioned::new("fit", report))?;
        manifest.output(out);
    }
    if let Some(plot) = &args.plot {
        write_plot_csv(create(plot)?, &dist, &spec).map_err(input_err)?;
        manifest.output(plot);
    }
    Ok(())
}

fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for pat in patterns {
        let path = Path::new(pat);
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| input_err(format!("{pat}: {e}")))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            out.extend(found);
        } else if pat.contains(['*', '?', '[']) {
            let mut found: Vec<PathBuf> = glob::glob(pat)
                .map_err(|e| input_err(format!("{pat}: {e}")))?
                .filter_map(Result::ok)
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.to_path_buf());
        }
    }
    if out.is_empty() {
        return Err(CliError::Input("no input files found".into()));
    }
    Ok(out)
}

fn cmd_batch(args: &BatchArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let paths = expand_inputs(&args.inputs)?;
    for p in &paths {
        manifest.input(p);
    }
    let options = args.flags.options();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool.build().map_err(compute_err)?;
    let rows = pool.install(|| run_batch(&paths, args.flags.tick, &options));
    match &args.out {
        Some(out) => {
            write_batch_csv(create(out)?, &rows).map_err(input_err)?;
            manifest.output(out);
        }
        None => write_batch_csv(std::io::stdout().lock(), &rows).map_err(input_err)?,
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    eprintln!(
        "{} samples, {} failed, significant fraction {:.4}",
        rows.len(),
        failed,
        significant_fraction(&rows)
    );
    if failed == rows.len() {
        return Err(CliError::Compute("every sample failed".into()));
    }
    Ok(())
}

fn snap(price: f64, tick: f64) -> f64 {
    ((price / tick).round() * tick * 1e8).round() / 1e8
}

fn cmd_synth(args: &SynthArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let spec = match args.family {
        FamilyArg::Bessel | FamilyArg::Superposition => {
            ModelSpec::BesselSingle(BesselParams { c: 1.0, omega: args.omega, p0: args.p0 })
        }
        FamilyArg::Kummer => {
            let a = match (args.a, args.energy) {
                (Some(a), _) => a,
                (None, Some(e)) => kummer_sqrt_eigenvalue(args.kummer_order, e).powi(2),
                (None, None) => return Err(CliError::Input("--family kummer needs --a or --energy".into())),
            };
            ModelSpec::Kummer(KummerParams { c: 1.0, m: args.kummer_order, a, p0: args.p0 })
        }
    };
    let config = SynthConfig {
        spec,
        tick: args.tick,
        price_range: [
            args.lo.unwrap_or_else(|| snap(args.p0 - 0.30, args.tick)),
            args.hi.unwrap_or_else(|| snap(args.p0 + 0.30, args.tick)),
        ],
        total_volume: args.volume,
        trades: args.trades,
        noise: args.noise,
        seed: args.seed,
        session_seconds: args.session_seconds,
        start_ms: 0,
    };
    let trades = if args.uniform {
        generate_uniform(&config)
    } else if let Some(second) = args.second_center {
        generate_two_equilibrium(&config, second, args.mix)
    } else if matches!(args.family, FamilyArg::Superposition) {
        return Err(CliError::Input("--family superposition needs --second-center".into()));
    } else {
        generate(&config)
    }
    .map_err(|e| CliError::Input(e.to_string()))?;
    match &args.out {
        Some(out) => {
            write_trades(create(out)?, &trades).map_err(input_err)?;
            manifest.output(out);
        }
        None => write_trades(std::io::stdout().lock(), &trades).map_err(input_err)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    mode: OracleMode,
    max_abs_residual: Option<f64>,
    /// Max residual at `h` over max residual at `h/2`.
    halving_ratio: Option<f64>,
    eigenvalue: Option<f64>,
    closed_form_eigenvalue: Option<f64>,
    relative_error: Option<f64>,
    report: Option<ResidualReport>,
}

fn cmd_oracle(args: &OracleArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let grid = standard_grid();
    let residual = |h: f64| match args.mode {
        OracleMode::Bessel => bessel_ode_residual(args.omega, &grid, h),
        _ => kummer_ode_residual(args.m, args.energy, &grid, h),
    };
    let output = match args.mode {
        OracleMode::Bessel | OracleMode::Kummer => {
            let full = residual(args.h).map_err(compute_err)?;
            let half = residual(args.h / 2.0).map_err(compute_err)?;
            let ratio = full.max_abs_residual / half.max_abs_residual;
            println!("{}: max residual {:.3e} at h={} (halving ratio {ratio:.3})", full.equation, full.max_abs_residual, args.h);
            OracleOutput {
                mode: args.mode,
                max_abs_residual: Some(full.max_abs_residual),
                halving_ratio: Some(ratio),
                eigenvalue: None,
                closed_form_eigenvalue: None,
                relative_error: None,
                report: Some(full),
            }
        }
        OracleMode::Eigen => {
            let a = eigenvalue_search(args.m, args.energy).map_err(compute_err)?;
            let exact = kummer_sqrt_eigenvalue(args.m, args.energy).powi(2);
            let rel = (a - exact).abs() / exact;
            println!("m={} E={}: A={a:.12} closed form {exact:.12} rel err {rel:.2e}", args.m, args.energy);
            OracleOutput {
                mode: args.mode,
                max_abs_residual: None,
                halving_ratio: None,
                eigenvalue: Some(a),
                closed_form_eigenvalue: Some(exact),
                relative_error: Some(rel),
                report: None,
            }
        }
    };
    if let Some(out) = &args.out {
        write_json(out, &Versioned::new("oracle", output))?;
        manifest.output(out);
    }
    Ok(())
}

fn cmd_dynamics(args: &DynamicsArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    manifest.input(&args.fit);
    manifest.input(&args.trades);
    let text = std::fs::read_to_string(&args.fit).map_err(|e| input_err(format!("{}: {e}", args.fit.display())))?;
    let report: Versioned<FitReport> =
        serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", args.fit.display())))?;
    let report = report.body;
    let dist = load(&args.trades, report.tick)?;
    // the ladder's first step is the single-Bessel fit the dynamics need
    let bessel = match &report.result {
        Some(r) if matches!(r.spec, ModelSpec::BesselSingle(_)) => Some(r),
        _ => report.ladder.as_ref().and_then(|l| l.attempts.first()).and_then(|a| a.result.as_ref()),
    };
    let Some(fitted) = bessel.filter(|r| matches!(r.spec, ModelSpec::BesselSingle(_))) else {
        return Err(CliError::Compute("the fit report holds no single-Bessel fit".into()));
    };
    if fitted.n_levels != dist.len() {
        return Err(CliError::Input("trade file does not match the fit report".into()));
    }
    let profile = compute_profile(&dist, fitted).map_err(compute_err)?;
    let energy = check_energy_hypothesis(&profile, &dist).map_err(compute_err)?;
    let identity = check_eigenvalue_identity(&dist, profile.omega);
    eprintln!(
        "omega {:.6}  A {:.6e}  max |(v/V)v_tt - omega^2| {:.3e}  dispersion {:.3}  max energy residual {:.3e}",
        profile.omega,
        profile.a,
        identity.max_deviation,
        identity.dispersion,
        energy.iter().map(|x| x.abs()).fold(0.0, f64::max)
    );
    match &args.out {
        Some(out) => {
            write_profile_csv(create(out)?, &profile).map_err(compute_err)?;
            manifest.output(out);
        }
        None => write_profile_csv(std::io::stdout().lock(), &profile).map_err(compute_err)?,
    }
    if let Some(path) = &args.json {
        write_json(path, &ProfileExport::new(profile))?;
        manifest.output(path);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, config) = match &cli.command {
        Command::Fit(a) => ("fit", json!(a)),
        Command::Batch(a) => ("batch", json!(a)),
        Command::Synth(a) => ("synth", json!(a)),
        Command::Oracle(a) => ("oracle", json!(a)),
        Command::Dynamics(a) => ("dynamics", json!(a)),
    };
    let mut manifest = RunManifest::new(name, config);
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, &mut manifest)?,
        Command::Batch(a) => cmd_batch(a, &mut manifest)?,
        Command::Synth(a) => cmd_synth(a, &mut manifest)?,
        Command::Oracle(a) => cmd_oracle(a, &mut manifest)?,
        Command::Dynamics(a) => cmd_dynamics(a, &mut manifest)?,
    }
    manifest.finish(cli.manifest.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
