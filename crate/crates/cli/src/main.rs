//! `clipsgd` command-line interface.
//!
//! Exit codes: 0 success, 1 I/O or run failure, 2 invalid input,
//! 3 failed verification check.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use clipsgd::harness::montecarlo::run_trial;
use clipsgd::harness::output::{trajectory_csv, write_text};
use clipsgd::harness::{estimate_smoothness_from_config, montecarlo_to_dir, run_suite, Experiment, ExperimentConfig, Suite};
use clipsgd::{criterion, theorem_params, Error};

#[derive(Parser)]
#[command(
    name = "clipsgd",
    version,
    about = "Clipped SGD under heavy-tailed noise: parameters, runs and Monte Carlo sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the step size, clipping level and regime prescribed by the theory.
    Params {
        #[arg(long = "L0")]
        l0: f64,
        #[arg(long = "L1")]
        l1: f64,
        #[arg(long = "R0")]
        r0: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "K")]
        k: u64,
        #[arg(long)]
        delta: f64,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run one trial and write its trajectory CSV.
    Run {
        config: PathBuf,
        #[arg(long)]
        trial: u64,
        /// Horizon; defaults to the first entry of k_values.
        #[arg(long)]
        k: Option<u64>,
        /// Output directory; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (K, trial) job and write criteria CSVs and reports.
    Montecarlo {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        save_trajectories: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in verification battery.
    Verify {
        /// clip-lemma, props, bernstein, audit or moments.
        #[arg(long)]
        suite: String,
    },
    /// Fit empirical (L0, L1) constants from sampled pairs.
    EstimateSmoothness { config: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Diverged { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn json_string<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })
}

fn load(path: &Path) -> Result<Experiment, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(Experiment::resolve(ExperimentConfig::from_json(&text)?)?)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Params {
            l0,
            l1,
            r0,
            sigma,
            alpha,
            k,
            delta,
            json,
        } => {
            let p = theorem_params(l0, l1, r0, sigma, alpha, k, delta)?;
            if json {
                println!("{}", json_string(&p)?);
            } else {
                println!("lambda={}", p.lambda);
                println!("gamma={}", p.gamma);
                println!("regime={}", p.regime);
                let status = if p.k_lower_bound_satisfied { "satisfied" } else { "unsatisfied" };
                println!("k_lower_bound_regime2={} ({status})", p.k_lower_bound_regime2);
            }
        }
        Command::Run { config, trial, k, out } => {
            let exp = load(&config)?;
            if trial >= exp.config.trials as u64 {
                eprintln!("note: trial {trial} is beyond the configured trial count {}", exp.config.trials);
            }
            let run = match k {
                Some(k) => exp.run_for(k)?,
                None => &exp.runs[0],
            };
            let t = run_trial(&exp, run, trial)?;
            let dir = out.unwrap_or_else(|| exp.config.output_dir.clone());
            let path = dir.join("trajectories").join(format!("trial_{trial}.csv"));
            write_text(&path, &trajectory_csv(&t))?;
            let c = criterion(&exp.problem, &t, run.regime)?;
            println!("criterion={c}");
            match t.divergence {
                Some(step) => println!("diverged=true step={step}"),
                None => println!("diverged=false"),
            }
            println!("wrote {}", path.display());
        }
        Command::Montecarlo {
            config,
            workers,
            save_trajectories,
            out,
        } => {
            let exp = load(&config)?;
            let dir = out.unwrap_or_else(|| exp.config.output_dir.clone());
            let (report, audit) = montecarlo_to_dir(&exp, &dir, workers, save_trajectories).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
            for q in &report.quantiles {
                println!(
                    "K={} quantile={} explicit_bound={} theory_bound={}",
                    q.k, q.quantile, q.explicit_bound, q.theory_bound
                );
            }
            if let (Some(s), Some(se)) = (report.slope, report.slope_stderr) {
                println!("slope={s} stderr={se}");
            }
            println!("audit_violations={}", audit.violations);
            println!("wrote {}", dir.display());
        }
        Command::Verify { suite } => {
            let suite = Suite::parse(&suite)?;
            let report = run_suite(suite)?;
            println!("{}", json_string(&report)?);
            if !report.passed {
                return Err(Failure {
                    code: 3,
                    message: format!("failed checks: {}", report.failed.join(", ")),
                });
            }
        }
        Command::EstimateSmoothness { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Failure {
                code: 1,
                message: format!("{}: {e}", config.display()),
            })?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let est = estimate_smoothness_from_config(&cfg)?;
            println!("{}", json_string(&est)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
