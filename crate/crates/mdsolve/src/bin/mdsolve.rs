//! Command-line front end for single runs, convergence studies,
//! solver-iteration studies and the invariant self-test.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on solver
//! failures.

use clap::{Args, Parser, Subcommand};
use mdsolve::config::{parse_mode, parse_preconditioner, ConfigError, RunConfig};
use mdsolve::harness::{
    self, convergence_study, iteration_study, run, write_convergence_csv, write_iterations_csv,
    write_run_csv, HarnessError,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mdsolve", about = "Implicit two-derivative DG solver for 2D conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Override time.dt
    #[arg(long)]
    dt: Option<f64>,
    /// Override time.q (4, 6 or 8)
    #[arg(long)]
    q: Option<usize>,
    /// Override time.kmax
    #[arg(long)]
    kmax: Option<usize>,
    /// Override solver.preconditioner (none | bj_ext | bj_ext_h)
    #[arg(long)]
    precond: Option<String>,
    /// Override solver.mode (extended | schur)
    #[arg(long)]
    mode: Option<String>,
    /// Override solver.threads
    #[arg(long)]
    threads: Option<usize>,
    /// Override output.dir
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-march a single configuration and print a summary
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep time.dt_list and tabulate errors and observed orders
    Convergence {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep (dt, preconditioner, mode) and record solver iterations
    Iterations {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the built-in invariant checks
    Selftest {
        /// Number of worker threads
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn apply_overrides(cfg: &mut RunConfig, ov: &Overrides) -> Result<(), ConfigError> {
    if let Some(dt) = ov.dt {
        cfg.dt = dt;
    }
    if let Some(q) = ov.q {
        cfg.q = q;
    }
    if let Some(kmax) = ov.kmax {
        cfg.kmax = kmax;
    }
    if let Some(p) = &ov.precond {
        cfg.solver.preconditioner = parse_preconditioner("precond", p)?;
    }
    if let Some(m) = &ov.mode {
        cfg.solver.mode = parse_mode("mode", m)?;
    }
    if let Some(t) = ov.threads {
        cfg.threads = t;
    }
    if let Some(out) = &ov.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()
}

fn load_config(path: &Path, ov: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::from_file(path)?;
    apply_overrides(&mut cfg, ov)?;
    Ok(cfg)
}

fn init_threads(n: usize) {
    // ignore the error when a pool already exists (e.g. repeated calls)
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf, std::io::Error> {
    let dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn exit_for(err: &HarnessError) -> ExitCode {
    if err.is_solver_failure() {
        ExitCode::from(3)
    } else {
        ExitCode::from(2)
    }
}

fn cmd_run(config: &Path, ov: &Overrides) -> ExitCode {
    let cfg = match load_config(config, ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    init_threads(cfg.threads);
    match run(&cfg) {
        Ok((_, summary)) => {
            println!(
                "run {}: {} steps of dt={} to t={}",
                summary.config_hash, summary.steps, summary.dt, summary.t_end
            );
            if let (Some(per_var), Some(sum)) = (&summary.err_per_var, summary.err_sum) {
                for (v, e) in per_var.iter().enumerate() {
                    println!("  L2 error var {v}: {e:.6e}");
                }
                println!("  L2 error sum:   {sum:.6e}");
            }
            println!(
                "  newton total: {}   gmres total: {}   wallclock: {:.3}s",
                summary.newton_total, summary.gmres_total, summary.wallclock_s
            );
            match ensure_out_dir(&cfg).and_then(|d| write_run_csv(&d.join("run.csv"), &summary)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("output error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_convergence(config: &Path, ov: &Overrides) -> ExitCode {
    let cfg = match load_config(config, ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    init_threads(cfg.threads);
    match convergence_study(&cfg) {
        Ok(study) => {
            println!("convergence study {} ({} rows)", study.config_hash, study.rows.len());
            println!("{:>10} {:>14} {:>8} {:>8} {:>8}", "dt", "err_sum", "eoc", "newton", "gmres");
            for r in &study.rows {
                let eoc = r.eoc_sum.map(|e| format!("{e:.2}")).unwrap_or_default();
                println!(
                    "{:>10} {:>14.6e} {:>8} {:>8} {:>8}",
                    r.dt, r.err_sum, eoc, r.newton_total, r.gmres_total
                );
            }
            match ensure_out_dir(&cfg)
                .and_then(|d| write_convergence_csv(&d.join("convergence.csv"), &study))
            {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("output error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("study failed: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_iterations(config: &Path, ov: &Overrides) -> ExitCode {
    let cfg = match load_config(config, ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    init_threads(cfg.threads);
    match iteration_study(&cfg) {
        Ok(study) => {
            println!("iteration study {} ({} rows)", study.config_hash, study.rows.len());
            println!(
                "{:>10} {:>10} {:>10} {:>12} {:>12}",
                "dt", "precond", "mode", "gmres/dt", "newton/dt"
            );
            for r in &study.rows {
                let gm = r
                    .gmres_per_dt
                    .map(|v| format!("{v:.1}"))
                    .unwrap_or_else(|| "-".to_string());
                let nw = r
                    .newton_per_dt
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "-".to_string());
                println!(
                    "{:>10} {:>10?} {:>10?} {:>12} {:>12}{}",
                    r.dt,
                    r.preconditioner,
                    r.mode,
                    gm,
                    nw,
                    if r.converged { "" } else { "   (no convergence)" }
                );
            }
            match ensure_out_dir(&cfg)
                .and_then(|d| write_iterations_csv(&d.join("iterations.csv"), &study))
            {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("output error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("study failed: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_selftest(threads: Option<usize>) -> ExitCode {
    init_threads(threads.unwrap_or(1));
    let mut failed = 0;
    for (name, outcome) in harness::selftest() {
        match outcome {
            Ok(()) => println!("PASS  {name}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config, overrides } => cmd_run(config, overrides),
        Command::Convergence { config, overrides } => cmd_convergence(config, overrides),
        Command::Iterations { config, overrides } => cmd_iterations(config, overrides),
        Command::Selftest { threads } => cmd_selftest(*threads),
    }
}
