use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dadmms::harness::{
    compare_algorithms, expand_algorithms, run_experiment, theory_report, ExperimentConfig, Overrides, Setup,
    WORKERS_ENV,
};
use dadmms::metrics::{SeriesKey, METRIC_ACC_MEAN, METRIC_W2};
use dadmms::problems::{centralized_minimizer, Problem};
use dadmms::samplers::SamplerSpec;
use dadmms::theory::{kkt_residuals, lemma1_equivalence};
use dadmms::{selftest, Error};

#[derive(Parser)]
#[command(name = "dadmms", version, about = "Distributed ADMM sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Root seed for trials
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent trials
    #[arg(long)]
    trials: Option<usize>,
    /// Iterations per chain
    #[arg(long)]
    iters: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trials: self.trials,
            iters: self.iters,
            out: self.out.clone(),
            workers: self.workers,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm over all trials and write its convergence series
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every configured algorithm on one dataset and merge the series
    Compare {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print contraction constants and the sufficient condition
    Theory {
        config: PathBuf,
        /// Emit JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Numerical checks of the analysis
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Run the randomized invariant suites
    Selftest,
}

#[derive(Subcommand)]
enum Verify {
    /// Compare the sampler with its stacked (Z, beta) form under shared noise
    Lemma1 {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &PathBuf, common: &Common) -> dadmms::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(&common.overrides());
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(name: &str, series: &dadmms::metrics::ConvergenceSeries) {
    let (metric, label) = if series.records.iter().any(|r| r.metric == METRIC_W2) {
        (METRIC_W2, "W2 (avg iterate)")
    } else {
        (METRIC_ACC_MEAN, "accuracy (avg iterate)")
    };
    let s = series.series(metric, SeriesKey::Average);
    if let (Some(first), Some(last)) = (s.first(), s.last()) {
        println!("{name:<8} {label}: {:.6} at k={} -> {:.6} at k={}", first.1, first.0, last.1, last.0);
    }
}

fn run(cli: Cli) -> dadmms::Result<bool> {
    match cli.command {
        Command::Run { config, common } => {
            let cfg = load(&config, &common)?;
            let (manifest, outcome) = run_experiment(&cfg)?;
            summarize(&manifest.algorithms[0], &outcome.series);
            for f in &manifest.failed_trials {
                eprintln!("trial {} (seed {}) failed: {}", f.trial, f.seed, f.error);
            }
            for p in &manifest.outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Compare { config, common } => {
            let cfg = load(&config, &common)?;
            let (manifest, merged) = compare_algorithms(&expand_algorithms(&cfg)?)?;
            for (name, s) in &merged.entries {
                summarize(name, s);
            }
            for p in &manifest.outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Theory { config, json } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = theory_report(&cfg)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?
                );
            } else {
                print!("{}", report.to_table());
            }
        }
        Command::Verify {
            what: Verify::Lemma1 { config, common },
        } => {
            let cfg = load(&config, &common)?;
            let rho = cfg
                .samplers()
                .iter()
                .find_map(|s| match s {
                    SamplerSpec::Dadmms { rho } | SamplerSpec::Admm { rho } => Some(*rho),
                    _ => None,
                })
                .unwrap_or(5.0);
            let iters = common.iters.or(cfg.run.iters).unwrap_or(50);
            let setup = Setup::new(&cfg)?;
            let r = lemma1_equivalence(&setup.potentials, &setup.topology, rho, iters, cfg.run.seed, true)?;
            println!("iterations                 {}", r.iterations);
            println!("max primal deviation       {:.3e}", r.max_deviation);
            println!("max |p - M_beta|           {:.3e}", r.max_dual_mismatch);
            println!("max beta projection resid  {:.3e}", r.max_beta_projection_residual);
            if matches!(setup.problem, Problem::LinReg(_)) && setup.topology.is_connected() && !setup.topology.edges().is_empty() {
                let x_star = centralized_minimizer(&setup.potentials)?;
                let k = kkt_residuals(&setup.potentials, &setup.topology, &x_star)?;
                println!(
                    "KKT residuals              {:.3e} {:.3e} {:.3e}",
                    k.stationarity, k.consensus, k.auxiliary
                );
            }
            let ok = r.max_deviation <= 1e-6 && r.max_dual_mismatch <= 1e-9 && r.max_beta_projection_residual <= 1e-9;
            println!("{}", if ok { "PASS" } else { "FAIL" });
            return Ok(ok);
        }
        Command::Selftest => {
            let report = selftest::run_all();
            println!("{report}");
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
