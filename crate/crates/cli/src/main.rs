//! `ultrapar`: batch front end for the solvers and the verification suite.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 numerical
//! abort (non-finite values), 3 a verification check failed.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ultrapar::io::{
    load_config, read_trajectory, write_reports, write_trajectory, IoError, LoadedConfig,
    CONFIG_COPY,
};
use ultrapar::problem::{DataNorms, RunMode};
use ultrapar::scheme::SchemeError;
use ultrapar::solver::{effective_spec, predicted_bound, solve, SolverError};
use ultrapar::verify::{
    check_bln, check_entropy_residual, check_epsilon_cauchy, check_gamma_limit, check_jump,
    check_max_principle, check_stability, kruzhkov_bank, validate_genuine_nonlinearity,
    StabilityOptions, VerificationReport, VerifyError,
};

#[derive(Parser)]
#[command(
    name = "ultrapar",
    version,
    about = "Ultra-parabolic solvers and estimate checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and store the trajectory.
    Run {
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Output directory (defaults to `[output] dir` of the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence sweep in `gamma` (towards the impulsive problem) or in
    /// `epsilon` (vanishing viscosity).
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads shared by the runs of the sweep.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run the checks that apply to a stored trajectory.
    Verify {
        config: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        /// Second trajectory for the stability check.
        #[arg(long)]
        traj2: Option<PathBuf>,
        /// Report CSV (defaults to `[output] report`, then `<traj>/report.csv`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Measure `mu(delta)` for the flux `a`.
    ValidateFlux {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05, 0.02, 0.01])]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        dirs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Regularized,
    Entropy,
    Impulsive,
}

impl From<Mode> for RunMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Regularized => RunMode::Regularized,
            Mode::Entropy => RunMode::Entropy,
            Mode::Impulsive => RunMode::Impulsive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Gamma,
    Epsilon,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::Scheme(SchemeError::NaNDetected { .. })
            | SolverError::CflViolation { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Solver(s) => s.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn output_dir(out: Option<PathBuf>, cfg: &LoadedConfig) -> Result<PathBuf, Failure> {
    out.or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| Failure::input("no output directory: pass --out or set [output] dir"))
}

fn run(config: &Path, mode: Mode, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let out = output_dir(out, &cfg)?;
    let mode = RunMode::from(mode);
    let spec = effective_spec(&cfg.spec, mode, cfg.spec.epsilon, cfg.spec.gamma);
    let traj = solve(&spec, &cfg.grid, mode, &cfg.options, None)?;
    write_trajectory(&out, &traj)?;
    fs::copy(config, out.join(CONFIG_COPY))?;

    let g = traj.info.grid;
    println!(
        "{} run, {}x{} cells, {} steps of dt = {:.4e}",
        mode.name(),
        g.nx,
        g.ns,
        g.nt,
        g.dt
    );
    println!(
        "{:>8} {:>10} {:>12} {:>12}",
        "step", "t", "sup|u|", "energy"
    );
    for s in &traj.snapshots {
        println!(
            "{:>8} {:>10.5} {:>12.5e} {:>12.5e}",
            s.step,
            s.t,
            s.field.sup_norm(),
            s.energy(traj.info.epsilon)
        );
    }
    println!("trajectory written to {}", out.display());
    Ok(())
}

fn emit(reports: &[VerificationReport], path: &Path) -> Result<bool, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_reports(fs::File::create(path)?, reports)?;
    for r in reports {
        println!(
            "{} {:<22} measured {:.4e}  bound {:.4e}  margin {:+.4e}",
            if r.pass { "pass" } else { "FAIL" },
            r.check,
            r.measured,
            r.bound,
            r.margin()
        );
    }
    println!("report written to {}", path.display());
    Ok(reports.iter().all(|r| r.pass))
}

fn checks_failed() -> Failure {
    Failure {
        code: 3,
        message: "one or more checks failed".into(),
    }
}

fn sweep(
    config: &Path,
    param: Param,
    values: &[f64],
    out: Option<PathBuf>,
    jobs: usize,
) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let out = output_dir(out, &cfg)?;
    fs::create_dir_all(&out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::input(e.to_string()))?;

    let (name, rows, reports) = match param {
        Param::Gamma => {
            let r =
                pool.install(|| check_gamma_limit(&cfg.spec, &cfg.grid, values, &cfg.options))?;
            let rows: Vec<(f64, f64)> = r.gammas.iter().copied().zip(r.errors).collect();
            ("gamma", rows, r.reports)
        }
        Param::Epsilon => {
            let r = pool.install(|| {
                check_epsilon_cauchy(&cfg.spec, &cfg.grid, cfg.spec.gamma, values, &cfg.options)
            })?;
            let rows: Vec<(f64, f64)> = r.epsilons.iter().copied().zip(r.distances).collect();
            ("epsilon", rows, vec![r.report])
        }
    };

    let mut w = csv::Writer::from_path(out.join("sweep.csv")).map_err(IoError::from)?;
    w.write_record([name, "error"]).map_err(IoError::from)?;
    for (p, e) in &rows {
        w.write_record([format!("{p:e}"), format!("{e:e}")])
            .map_err(IoError::from)?;
        println!("{name} = {p:<10} error {e:.4e}");
    }
    w.flush()?;
    if emit(&reports, &out.join("report.csv"))? {
        Ok(())
    } else {
        Err(checks_failed())
    }
}

fn verify(
    config: &Path,
    traj_dir: &Path,
    traj2_dir: Option<&Path>,
    report: Option<PathBuf>,
) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let traj = read_trajectory(traj_dir)?;
    let mode = traj.info.mode;
    let spec = effective_spec(&cfg.spec, mode, traj.info.epsilon, traj.info.gamma);

    let mut reports = vec![check_max_principle(&traj, &spec)];
    if traj.tau_minus.is_some() && mode == RunMode::Impulsive {
        reports.extend(check_jump(&traj, &spec)?);
    }
    if mode != RunMode::Regularized {
        let bank = kruzhkov_bank(&traj, &spec);
        reports.push(check_entropy_residual(&traj, &spec, &bank, &cfg.options));
        reports.push(check_bln(&traj, &spec, &bank));
    }
    if let Some(dir) = traj2_dir {
        let traj2 = read_trajectory(dir)?;
        let copy = dir.join(CONFIG_COPY);
        let base2 = if copy.exists() {
            load_config(&copy)?.spec
        } else {
            cfg.spec.clone()
        };
        let spec2 = effective_spec(
            &base2,
            traj2.info.mode,
            traj2.info.epsilon,
            traj2.info.gamma,
        );
        reports.push(check_stability(
            &traj,
            &traj2,
            &spec,
            &spec2,
            &StabilityOptions::default(),
        )?);
    }

    let path = report
        .or_else(|| cfg.output.report.clone())
        .unwrap_or_else(|| traj_dir.join("report.csv"));
    if emit(&reports, &path)? {
        Ok(())
    } else {
        Err(checks_failed())
    }
}

fn validate_flux(config: &Path, deltas: &[f64], dirs: usize) -> Result<(), Failure> {
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Failure::input("deltas must be positive"));
    }
    let cfg = load_config(config)?;
    let spec = &cfg.spec;
    let mode = if spec.beta.is_some() && spec.gamma == 0.0 {
        RunMode::Impulsive
    } else {
        RunMode::Entropy
    };
    let bound = predicted_bound(spec, mode, &DataNorms::estimate(spec));
    // zero data: probe the unit range instead of a degenerate interval
    let lambda_max = if bound > 0.0 { bound } else { 1.0 };
    let profile = validate_genuine_nonlinearity(&spec.flux_a, lambda_max, dirs, deltas);

    println!("a = {}, |lambda| <= {lambda_max:.4e}", profile.flux);
    println!("{:>10} {:>12} {:>12}", "delta", "mu(delta)", "mu/delta");
    for (d, m) in profile.deltas.iter().zip(&profile.mu) {
        println!("{d:>10.4e} {m:>12.4e} {:>12.4e}", m / d);
    }
    let (t, x) = profile.worst_direction;
    println!("worst direction (tau, xi) = ({t:.4}, {x:.4})");
    let r = profile.report();
    println!(
        "{} mu(delta_min) {:.4e} against {:.4e}",
        if r.pass { "pass" } else { "FAIL" },
        r.measured,
        r.bound
    );
    if r.pass {
        Ok(())
    } else {
        Err(checks_failed())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, mode, out } => run(&config, mode, out),
        Command::Sweep {
            config,
            param,
            values,
            out,
            jobs,
        } => sweep(&config, param, &values, out, jobs),
        Command::Verify {
            config,
            traj,
            traj2,
            report,
        } => verify(&config, &traj, traj2.as_deref(), report),
        Command::ValidateFlux {
            config,
            deltas,
            dirs,
        } => validate_flux(&config, &deltas, dirs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
