//! Experiment configs, seeded multi-trial runs and result files.
//!
//! # Config schema
//!
//! ```toml
//! [problem]
//! kind = "linreg"          # "linreg" | "logreg"
//! d = 2                    # default 2 (linreg) / 3 (logreg)
//! xi = 4.0                 # observation noise std, required for linreg
//! lambda = 10.0            # prior variance, default 10
//! n_per_agent = 50         # default 50
//! data_seed = 7            # default 0
//!
//! [topology]
//! kind = "ring_cyclic"     # "fully_connected" | "ring_cyclic" | "no_edge" | "custom"
//! n_agents = 5
//! # edges = [[0, 1], [1, 2]]   # custom only
//!
//! [algorithm]              # or one or more [[algorithms]] tables
//! name = "dadmms"          # dadmms {rho} | admm {rho} | dsgld {eta}
//! rho = 5.0                # dsghmc {eta, gamma} | dula {alpha0, zeta0, offset, chi1, chi2}
//!
//! [run]
//! trials = 100             # default 100, at least 2
//! iters = 100              # default 100 (linreg) / 200 (logreg)
//! seed = 0                 # root seed for trials, default 0
//! stride = 1               # record every `stride` rounds
//! workers = 4              # default: $DADMMS_WORKERS, else all cores
//! out = "results"          # output directory; omit to skip writing
//! raw_dump = false         # also write every iterate
//!
//! [theory]                 # optional overrides for the `theory` report
//! m_f = 2.0
//! tau_f = 1.2
//! kappa = 3.0
//! rho = 2.0
//! ```
//!
//! Output files (under `out`): `series.csv` (or `compare.csv`),
//! `manifest.toml`, and `raw.csv` when `raw_dump` is set.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{extend_matrices, spectral_constants, Topology, TopologyKind};
use crate::metrics::{accuracy_series, wasserstein_series, ConvergenceSeries, GaussianSummary};
use crate::problems::{
    generate_linreg, generate_logreg, strong_convexity_constants, AgentPotential, Problem,
};
use crate::rng::derive_seed;
use crate::samplers::{run_chain, History, ProblemKind, SamplerSpec};
use crate::theory::{
    delta_max, sufficient_condition, tau_f_threshold, TheoryConstants,
};
use crate::{Error, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "DADMMS_WORKERS";

pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_n_per_agent")]
    pub n_per_agent: usize,
    #[serde(default)]
    pub data_seed: u64,
}

fn default_lambda() -> f64 {
    10.0
}

fn default_n_per_agent() -> usize {
    50
}

impl ProblemConfig {
    pub fn dim(&self) -> usize {
        self.d.unwrap_or(match self.kind {
            ProblemKind::Linreg => 2,
            ProblemKind::Logreg => 3,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    pub n_agents: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

impl TopologyConfig {
    pub fn build(&self) -> Result<Topology> {
        match (self.kind, &self.edges) {
            (TopologyKind::Custom, Some(edges)) => Topology::custom(self.n_agents, edges),
            (TopologyKind::Custom, None) => Err(Error::Config(
                "missing field `edges` in [topology] for a custom graph".into(),
            )),
            (_, Some(_)) => Err(Error::Config("`edges` is only allowed for custom topologies".into())),
            (kind, None) => Topology::build(kind, self.n_agents),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub raw_dump: bool,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_stride() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            iters: None,
            seed: 0,
            stride: 1,
            workers: None,
            out: None,
            raw_dump: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub topology: TopologyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<SamplerSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algorithms: Vec<SamplerSpec>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryConfig>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub iters: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(t) = o.trials {
            self.run.trials = t;
        }
        if let Some(i) = o.iters {
            self.run.iters = Some(i);
        }
        if let Some(out) = &o.out {
            self.run.out = Some(out.clone());
        }
        if let Some(w) = o.workers {
            self.run.workers = Some(w);
        }
    }

    /// Every listed sampler, `[algorithm]` first.
    pub fn samplers(&self) -> Vec<SamplerSpec> {
        self.algorithm.iter().chain(&self.algorithms).copied().collect()
    }

    pub fn n_iters(&self) -> usize {
        self.run.iters.unwrap_or(match self.problem.kind {
            ProblemKind::Linreg => 100,
            ProblemKind::Logreg => 200,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.kind == ProblemKind::Linreg && self.problem.xi.is_none() {
            return Err(Error::Config("missing field `xi` in [problem] for linreg".into()));
        }
        if self.problem.kind == ProblemKind::Logreg && self.problem.xi.is_some() {
            return Err(Error::Config("`xi` is only meaningful for linreg".into()));
        }
        if self.run.trials < 2 {
            return Err(Error::Config(format!(
                "`trials` must be at least 2 for ensemble metrics, got {}",
                self.run.trials
            )));
        }
        if self.run.stride == 0 {
            return Err(Error::Config("`stride` must be positive".into()));
        }
        if self.run.workers == Some(0) {
            return Err(Error::Config("`workers` must be positive".into()));
        }
        for s in self.samplers() {
            s.validate()?;
        }
        self.topology.build()?;
        Ok(())
    }

    /// Per-trial chain seed, independent of execution order.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.run.seed, "trial", trial as u64)
    }
}

/// Worker count: explicit value, else `$DADMMS_WORKERS`, else all cores.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub algorithms: Vec<String>,
    pub wall_clock_seconds: f64,
    pub workers: usize,
    pub trial_seeds: Vec<u64>,
    pub failed_trials: Vec<TrialFailure>,
    pub outputs: Vec<PathBuf>,
    pub config: ExperimentConfig,
}

/// Result of running one sampler over all trials.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: ConvergenceSeries,
    pub histories: Vec<History>,
    pub failed_trials: Vec<TrialFailure>,
}

/// Everything a run needs that does not depend on the sampler.
pub struct Setup {
    pub problem: Problem,
    pub topology: Topology,
    pub potentials: Vec<AgentPotential>,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let topology = config.topology.build()?;
        let mut pc = config.problem.clone();
        pc.d = Some(pc.dim());
        let problem = match pc.kind {
            ProblemKind::Linreg => Problem::LinReg(generate_linreg(
                pc.dim(),
                pc.xi.ok_or_else(|| Error::Config("missing field `xi` in [problem] for linreg".into()))?,
                pc.lambda,
                topology.n_agents(),
                pc.n_per_agent,
                pc.data_seed,
            )?),
            ProblemKind::Logreg => Problem::LogReg(generate_logreg(
                pc.dim(),
                pc.lambda,
                topology.n_agents(),
                pc.n_per_agent,
                pc.data_seed,
            )?),
        };
        let potentials = problem.potentials()?;
        Ok(Self {
            problem,
            topology,
            potentials,
        })
    }
}

/// Runs `spec` for every trial on a fixed dataset and computes the
/// per-iteration metrics (W₂ to the exact posterior for linreg, accuracy for
/// logreg). A trial whose solver fails is dropped and reported.
pub fn run_sampler(config: &ExperimentConfig, setup: &Setup, spec: &SamplerSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let workers = resolve_workers(config.run.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let n_iters = config.n_iters();
    let results: Vec<std::result::Result<History, TrialFailure>> = pool.install(|| {
        (0..config.run.trials)
            .into_par_iter()
            .map(|t| {
                let seed = config.trial_seed(t);
                run_chain(spec, &setup.potentials, &setup.topology, n_iters, seed, config.run.stride).map_err(
                    |e| TrialFailure {
                        trial: t,
                        seed,
                        error: e.to_string(),
                    },
                )
            })
            .collect()
    });
    let mut histories = Vec::with_capacity(results.len());
    let mut failed_trials = Vec::new();
    for r in results {
        match r {
            Ok(h) => histories.push(h),
            Err(f) => failed_trials.push(f),
        }
    }
    if histories.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "only {} trial(s) succeeded; first failure: {}",
            histories.len(),
            failed_trials.first().map_or("none", |f| f.error.as_str())
        )));
    }
    let series = match &setup.problem {
        Problem::LinReg(p) => wasserstein_series(&histories, &GaussianSummary::from(p.true_posterior()?))?,
        Problem::LogReg(p) => accuracy_series(&histories, p)?,
    };
    Ok(RunOutcome {
        series,
        histories,
        failed_trials,
    })
}

fn write_series(path: &Path, series: &ConvergenceSeries) -> Result<()> {
    series.write_csv(BufWriter::new(fs::File::create(path)?))
}

/// Writes `trial,iteration,agent,component,value` for every recorded iterate.
pub fn write_raw_dump<W: Write>(mut w: W, histories: &[History]) -> Result<()> {
    writeln!(w, "trial,iteration,agent,component,value")?;
    for (t, h) in histories.iter().enumerate() {
        for (r, &k) in h.iterations.iter().enumerate() {
            for (i, x) in h.x[r].iter().enumerate() {
                for (c, v) in x.iter().enumerate() {
                    writeln!(w, "{t},{k},{i},{c},{v}")?;
                }
            }
        }
    }
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    let path = dir.join("manifest.toml");
    manifest.outputs.push(path.clone());
    let text = toml::to_string(manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, text)?;
    Ok(())
}

fn single_sampler(config: &ExperimentConfig) -> Result<SamplerSpec> {
    match config.samplers().as_slice() {
        [s] => Ok(*s),
        [] => Err(Error::Config("missing table `[algorithm]`".into())),
        _ => Err(Error::Config(
            "several algorithms configured; use `compare` instead of `run`".into(),
        )),
    }
}

/// Runs the config's single algorithm and writes `series.csv`,
/// `manifest.toml` (and `raw.csv`) under `run.out` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RunManifest, RunOutcome)> {
    config.validate()?;
    let spec = single_sampler(config)?;
    let start = Instant::now();
    let setup = Setup::new(config)?;
    let outcome = run_sampler(config, &setup, &spec)?;
    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        algorithms: vec![spec.algorithm().name().to_string()],
        wall_clock_seconds: 0.0,
        workers: resolve_workers(config.run.workers),
        trial_seeds: (0..config.run.trials).map(|t| config.trial_seed(t)).collect(),
        failed_trials: outcome.failed_trials.clone(),
        outputs: Vec::new(),
        config: config.clone(),
    };
    if let Some(dir) = &config.run.out {
        fs::create_dir_all(dir)?;
        let path = dir.join("series.csv");
        write_series(&path, &outcome.series)?;
        manifest.outputs.push(path);
        if config.run.raw_dump {
            let path = dir.join("raw.csv");
            write_raw_dump(BufWriter::new(fs::File::create(&path)?), &outcome.histories)?;
            manifest.outputs.push(path);
        }
        manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
        write_manifest(dir, &mut manifest)?;
    } else {
        manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    }
    Ok((manifest, outcome))
}

/// Series of several algorithms on one dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergedSeries {
    pub entries: Vec<(String, ConvergenceSeries)>,
}

pub const MERGED_CSV_HEADER: &str = "algorithm,iteration,metric_name,agent_or_avg,value";

impl MergedSeries {
    pub fn get(&self, algorithm: &str) -> Option<&ConvergenceSeries> {
        self.entries.iter().find(|(a, _)| a == algorithm).map(|(_, s)| s)
    }

    pub fn n_rows(&self) -> usize {
        self.entries.iter().map(|(_, s)| s.records.len()).sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MERGED_CSV_HEADER}")?;
        for (alg, s) in &self.entries {
            for r in &s.records {
                writeln!(w, "{alg},{},{},{},{}", r.iteration, r.metric, r.key, r.value)?;
            }
        }
        Ok(())
    }
}

/// Runs every config on one shared dataset. All configs must agree on
/// `[problem]` and `[topology]`.
pub fn compare_algorithms(configs: &[ExperimentConfig]) -> Result<(RunManifest, MergedSeries)> {
    let first = configs
        .first()
        .ok_or_else(|| Error::Config("nothing to compare".into()))?;
    for c in configs {
        if c.problem != first.problem || c.topology != first.topology {
            return Err(Error::Config(
                "compared configs must share [problem] and [topology]".into(),
            ));
        }
        c.validate()?;
    }
    let start = Instant::now();
    let setup = Setup::new(first)?;
    let mut merged = MergedSeries::default();
    let mut failed = Vec::new();
    let mut names = Vec::new();
    for c in configs {
        let spec = single_sampler(c)?;
        let out = run_sampler(c, &setup, &spec)?;
        failed.extend(out.failed_trials);
        names.push(spec.algorithm().name().to_string());
        merged.entries.push((spec.algorithm().name().to_string(), out.series));
    }
    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        algorithms: names,
        wall_clock_seconds: 0.0,
        workers: resolve_workers(first.run.workers),
        trial_seeds: (0..first.run.trials).map(|t| first.trial_seed(t)).collect(),
        failed_trials: failed,
        outputs: Vec::new(),
        config: first.clone(),
    };
    if let Some(dir) = &first.run.out {
        fs::create_dir_all(dir)?;
        let path = dir.join("compare.csv");
        merged.write_csv(BufWriter::new(fs::File::create(&path)?))?;
        manifest.outputs.push(path);
        manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
        write_manifest(dir, &mut manifest)?;
    } else {
        manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    }
    Ok((manifest, merged))
}

/// Splits a multi-algorithm config into one config per algorithm.
pub fn expand_algorithms(config: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
    let specs = config.samplers();
    if specs.is_empty() {
        return Err(Error::Config("missing table `[algorithm]` or `[[algorithms]]`".into()));
    }
    Ok(specs
        .into_iter()
        .map(|s| ExperimentConfig {
            algorithm: Some(s),
            algorithms: Vec::new(),
            ..config.clone()
        })
        .collect())
}

/// Theory summary for a config's problem and topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub topology: String,
    pub n_agents: usize,
    pub tau_g: f64,
    pub tau_f: f64,
    pub m_f: f64,
    pub big_m_f: f64,
    pub kappa: f64,
    pub rho: f64,
    pub delta: f64,
    pub delta_max: f64,
    pub a: f64,
    pub condition_holds: bool,
    pub margin: f64,
    /// Largest `τ_f` satisfying the sufficient condition at this `m_f`.
    pub tau_f_threshold: Option<f64>,
}

/// Evaluates the contraction constants. `m_f` and `τ_f` come from the
/// dataset unless `[theory]` overrides them; κ and ρ default to their optimal
/// values.
pub fn theory_report(config: &ExperimentConfig) -> Result<TheoryReport> {
    let topo = config.topology.build()?;
    let spectra = spectral_constants(&extend_matrices(&topo, config.problem.dim()))?;
    let ov = config.theory.clone().unwrap_or_default();
    let (m_f, tau_f) = match (ov.m_f, ov.tau_f) {
        (Some(m), Some(t)) => (m, t),
        _ => {
            let setup = Setup::new(config)?;
            let cc = strong_convexity_constants(&setup.potentials);
            (ov.m_f.unwrap_or(cc.m_f), ov.tau_f.unwrap_or(cc.tau_f))
        }
    };
    if !(m_f > 0.0 && tau_f >= 1.0) {
        return Err(Error::Config(format!("need m_f > 0 and tau_f >= 1, got {m_f}, {tau_f}")));
    }
    let big_m_f = tau_f * m_f;
    let optimal = TheoryConstants::optimal(spectra, m_f, big_m_f)?;
    let kappa = ov.kappa.unwrap_or(optimal.kappa);
    let rho = match ov.rho {
        Some(r) => r,
        None => crate::theory::optimal_rho(kappa, &spectra, big_m_f)?,
    };
    let c = TheoryConstants::new(kappa, rho, spectra, m_f, big_m_f)?;
    let cond = sufficient_condition(m_f, tau_f, spectra.tau_g);
    Ok(TheoryReport {
        topology: topo.kind().to_string(),
        n_agents: topo.n_agents(),
        tau_g: spectra.tau_g,
        tau_f,
        m_f,
        big_m_f,
        kappa,
        rho,
        delta: c.delta,
        delta_max: delta_max(tau_f, spectra.tau_g),
        a: c.a,
        condition_holds: cond.holds,
        margin: cond.margin,
        tau_f_threshold: tau_f_threshold(m_f, spectra.tau_g),
    })
}

impl TheoryReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let mut row = |k: &str, v: String| {
            let _ = writeln!(s, "{k:<22}{v}");
        };
        row("topology", format!("{} (N = {})", self.topology, self.n_agents));
        row("tau_G", format!("{:.4}", self.tau_g));
        row("tau_f", format!("{:.4}", self.tau_f));
        row("m_f", format!("{:.4}", self.m_f));
        row("M_f", format!("{:.4}", self.big_m_f));
        row("kappa", format!("{:.4}", self.kappa));
        row("rho", format!("{:.4}", self.rho));
        row("delta", format!("{:.6}", self.delta));
        row("delta_max", format!("{:.6}", self.delta_max));
        row("a", format!("{:.6}", self.a));
        row(
            "sufficient condition",
            format!(
                "{} (margin {:+.6})",
                if self.condition_holds { "holds" } else { "fails" },
                self.margin
            ),
        );
        row(
            "tau_f threshold",
            match self.tau_f_threshold {
                Some(t) => format!("tau_f < {t:.4}"),
                None => "none (unsatisfiable at this m_f)".into(),
            },
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[problem]
kind = "linreg"
xi = 4.0
[topology]
kind = "ring_cyclic"
n_agents = 5
[algorithm]
name = "dadmms"
rho = 5.0
[run]
trials = 4
iters = 3
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.problem.dim(), 2);
        assert_eq!(c.problem.n_per_agent, 50);
        assert_eq!(c.problem.lambda, 10.0);
        assert_eq!(c.run.stride, 1);
        assert_eq!(c.samplers(), vec![SamplerSpec::Dadmms { rho: 5.0 }]);
    }

    #[test]
    fn missing_hyperparameter_is_named() {
        let bad = BASE.replace("rho = 5.0", "");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("rho"), "{err}");
    }

    #[test]
    fn missing_xi_is_named() {
        let bad = BASE.replace("xi = 4.0", "");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("xi"), "{err}");
    }

    #[test]
    fn single_trial_rejected() {
        let bad = BASE.replace("trials = 4", "trials = 1");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn worker_count_is_irrelevant() {
        let mut c = ExperimentConfig::from_toml_str(BASE).unwrap();
        c.run.workers = Some(1);
        let (_, a) = run_experiment(&c).unwrap();
        c.run.workers = Some(3);
        let (_, b) = run_experiment(&c).unwrap();
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn expand_and_merge_counts() {
        let mut c = ExperimentConfig::from_toml_str(BASE).unwrap();
        c.algorithms = vec![SamplerSpec::Dsgld { eta: 0.009 }];
        let parts = expand_algorithms(&c).unwrap();
        assert_eq!(parts.len(), 2);
        let (_, merged) = compare_algorithms(&parts).unwrap();
        let single: usize = parts
            .iter()
            .map(|p| run_experiment(p).unwrap().1.series.records.len())
            .sum();
        assert_eq!(merged.n_rows(), single);
    }
}
