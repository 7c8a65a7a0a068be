//! Synchronous-round samplers.
//!
//! Each `*_step` maps the round-`k` state to the round-`k+1` state. Agents
//! read only round-`k` values of their neighbours, except in the ADMM dual
//! phase, which by construction uses the freshly communicated round-`k+1`
//! primals. The `*_in_order` variants process agents in a caller-chosen
//! order; because every phase writes into a fresh buffer the result does not
//! depend on it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{mixing_matrix, Topology, TopologyKind};
use crate::newton::{self, Objective};
use crate::problems::LocalPotential;
use crate::rng::{self, standard_normal_vector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dadmms,
    Admm,
    Dsgld,
    Dsghmc,
    Dula,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Dadmms,
        Algorithm::Admm,
        Algorithm::Dsgld,
        Algorithm::Dsghmc,
        Algorithm::Dula,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dadmms => "dadmms",
            Algorithm::Admm => "admm",
            Algorithm::Dsgld => "dsgld",
            Algorithm::Dsghmc => "dsghmc",
            Algorithm::Dula => "dula",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "dadmms" => Ok(Algorithm::Dadmms),
            "admm" | "cadmm" => Ok(Algorithm::Admm),
            "dsgld" => Ok(Algorithm::Dsgld),
            "dsghmc" => Ok(Algorithm::Dsghmc),
            "dula" => Ok(Algorithm::Dula),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// D-ULA step-size schedules `α⁽ᵏ⁾ = α₀/(offset+k)^χ₂` and `ζ⁽ᵏ⁾ = ζ₀/(offset+k)^χ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DulaSchedule {
    pub alpha0: f64,
    pub zeta0: f64,
    pub offset: f64,
    pub chi1: f64,
    pub chi2: f64,
}

impl DulaSchedule {
    pub fn alpha(&self, k: usize) -> f64 {
        self.alpha0 / (self.offset + k as f64).powf(self.chi2)
    }

    pub fn zeta(&self, k: usize) -> f64 {
        self.zeta0 / (self.offset + k as f64).powf(self.chi1)
    }
}

/// A fully specified sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SamplerSpec {
    Dadmms { rho: f64 },
    Admm { rho: f64 },
    Dsgld { eta: f64 },
    Dsghmc { eta: f64, gamma: f64 },
    Dula(DulaSchedule),
}

impl SamplerSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            SamplerSpec::Dadmms { .. } => Algorithm::Dadmms,
            SamplerSpec::Admm { .. } => Algorithm::Admm,
            SamplerSpec::Dsgld { .. } => Algorithm::Dsgld,
            SamplerSpec::Dsghmc { .. } => Algorithm::Dsghmc,
            SamplerSpec::Dula(_) => Algorithm::Dula,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive, got {v}")))
            }
        };
        match *self {
            SamplerSpec::Dadmms { rho } | SamplerSpec::Admm { rho } => positive("rho", rho),
            SamplerSpec::Dsgld { eta } => positive("eta", eta),
            SamplerSpec::Dsghmc { eta, gamma } => {
                positive("eta", eta)?;
                positive("gamma", gamma)
            }
            SamplerSpec::Dula(s) => {
                positive("alpha0", s.alpha0)?;
                positive("zeta0", s.zeta0)?;
                positive("offset", s.offset)?;
                if s.chi1 < 0.0 || s.chi2 < 0.0 {
                    return Err(Error::Config("`chi1`/`chi2` must be non-negative".into()));
                }
                Ok(())
            }
        }
    }
}

/// Which regression family a default applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Linreg,
    Logreg,
}

/// Hyperparameters used in the reference experiments.
///
/// D-ULA exponents are only published for some fully connected sizes; other
/// fully connected sizes are rejected.
pub fn reference_defaults(
    algorithm: Algorithm,
    problem: ProblemKind,
    topology: TopologyKind,
    n_agents: usize,
) -> Result<SamplerSpec> {
    Ok(match algorithm {
        Algorithm::Dadmms => SamplerSpec::Dadmms { rho: 5.0 },
        Algorithm::Admm => SamplerSpec::Admm { rho: 5.0 },
        Algorithm::Dsgld => SamplerSpec::Dsgld {
            eta: match problem {
                ProblemKind::Linreg => 0.009,
                ProblemKind::Logreg => 0.0003,
            },
        },
        Algorithm::Dsghmc => match problem {
            ProblemKind::Linreg => SamplerSpec::Dsghmc { eta: 0.1, gamma: 7.0 },
            ProblemKind::Logreg => SamplerSpec::Dsghmc { eta: 0.02, gamma: 30.0 },
        },
        Algorithm::Dula => {
            let (chi1, chi2) = match (topology, n_agents, problem) {
                (TopologyKind::FullyConnected, 5 | 20, _) => (0.55, 0.05),
                (TopologyKind::FullyConnected, 50, ProblemKind::Logreg) => (0.9, 0.9),
                (TopologyKind::FullyConnected, n, _) => {
                    return Err(Error::Config(format!(
                        "no reference D-ULA exponents for a fully connected graph of {n} agents"
                    )))
                }
                _ => (0.05, 0.05),
            };
            SamplerSpec::Dula(DulaSchedule {
                alpha0: 0.00082,
                zeta0: 0.48,
                offset: 230.0,
                chi1,
                chi2,
            })
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: Vec<DVector<f64>>,
    pub p: Vec<DVector<f64>>,
    pub k: usize,
    pub rho: f64,
    /// `false` turns D-ADMMS into plain consensus ADMM.
    pub noise_on: bool,
}

impl AdmmState {
    /// Duals start at zero.
    pub fn new(x0: Vec<DVector<f64>>, rho: f64, noise_on: bool) -> Self {
        let p = x0.iter().map(|x| DVector::zeros(x.len())).collect();
        Self {
            x: x0,
            p,
            k: 0,
            rho,
            noise_on,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangevinState {
    pub x: Vec<DVector<f64>>,
    /// Momentum, used by D-SGHMC only.
    pub v: Vec<DVector<f64>>,
    pub k: usize,
}

impl LangevinState {
    pub fn new(x0: Vec<DVector<f64>>) -> Self {
        let v = x0.iter().map(|x| DVector::zeros(x.len())).collect();
        Self { x: x0, v, k: 0 }
    }
}

/// Per-agent Gaussian noise for one round, drawn in agent order `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub w: Vec<DVector<f64>>,
}

impl NoiseDraw {
    pub fn standard<R: Rng + ?Sized>(rng: &mut R, n_agents: usize, d: usize) -> Self {
        Self::scaled(rng, n_agents, d, 1.0)
    }

    /// `N(0, scale²·I)` per agent.
    pub fn scaled<R: Rng + ?Sized>(rng: &mut R, n_agents: usize, d: usize, scale: f64) -> Self {
        Self {
            w: (0..n_agents)
                .map(|_| standard_normal_vector(rng, d) * scale)
                .collect(),
        }
    }

    pub fn zeros(n_agents: usize, d: usize) -> Self {
        Self {
            w: vec![DVector::zeros(d); n_agents],
        }
    }
}

fn natural_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Runs `update` for every agent in `order`, storing results by agent index.
fn phase<T>(n: usize, order: &[usize], mut update: impl FnMut(usize) -> Result<T>) -> Result<Vec<T>> {
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    if order.len() != n {
        return Err(Error::InvalidArgument("update order must list every agent once".into()));
    }
    for &i in order {
        if i >= n || slots[i].is_some() {
            return Err(Error::InvalidArgument("update order must be a permutation".into()));
        }
        slots[i] = Some(update(i)?);
    }
    Ok(slots.into_iter().map(|s| s.expect("filled")).collect())
}

fn check_shapes<P>(x: &[DVector<f64>], topo: &Topology, potentials: &[P]) -> Result<()> {
    if x.len() != topo.n_agents() || potentials.len() != topo.n_agents() {
        return Err(Error::InvalidArgument(format!(
            "{} iterates and {} potentials for {} agents",
            x.len(),
            potentials.len(),
            topo.n_agents()
        )));
    }
    Ok(())
}

/// `Σ_{j∈N_i} (x_i + x_j) / (2N_i)`.
fn neighbour_midpoint(x: &[DVector<f64>], topo: &Topology, i: usize) -> DVector<f64> {
    let ni = topo.degree(i) as f64;
    let mut c = DVector::zeros(x[i].len());
    for &j in topo.neighbors(i) {
        c += (&x[i] + &x[j]) / (2.0 * ni);
    }
    c
}

fn dual_phase(
    x_next: &[DVector<f64>],
    p: &[DVector<f64>],
    topo: &Topology,
    rho: f64,
    order: &[usize],
) -> Result<Vec<DVector<f64>>> {
    phase(topo.n_agents(), order, |i| {
        let mut pi = p[i].clone();
        for &j in topo.neighbors(i) {
            pi += (&x_next[i] - &x_next[j]) * rho;
        }
        Ok(pi)
    })
}

/// One D-ADMMS round in proximal form:
///
/// ```text
/// x_i ← prox_{γ_i f_i}( Σ_j (x_i+x_j)/(2N_i) − (√2/(2ρ)) w_i − p_i/(2ρN_i) ),  γ_i = 1/(2ρN_i)
/// p_i ← p_i + ρ Σ_j (x_i⁺ − x_j⁺)
/// ```
///
/// An isolated agent minimizes `f_i(x) + p_iᵀx`.
pub fn dadmms_step<P: LocalPotential>(
    state: &AdmmState,
    topo: &Topology,
    potentials: &[P],
    noise: &NoiseDraw,
) -> Result<AdmmState> {
    dadmms_step_in_order(state, topo, potentials, noise, &natural_order(topo.n_agents()))
}

pub fn dadmms_step_in_order<P: LocalPotential>(
    state: &AdmmState,
    topo: &Topology,
    potentials: &[P],
    noise: &NoiseDraw,
    order: &[usize],
) -> Result<AdmmState> {
    check_shapes(&state.x, topo, potentials)?;
    let rho = state.rho;
    let noise_scale = std::f64::consts::SQRT_2 / (2.0 * rho);
    let x_next = phase(topo.n_agents(), order, |i| {
        let ni = topo.degree(i);
        if ni == 0 {
            return potentials[i].argmin_tilted(&state.p[i]);
        }
        let ni = ni as f64;
        let mut v = neighbour_midpoint(&state.x, topo, i);
        if state.noise_on {
            v -= &noise.w[i] * noise_scale;
        }
        v -= &state.p[i] / (2.0 * rho * ni);
        potentials[i].prox(1.0 / (2.0 * rho * ni), &v)
    })?;
    let p_next = dual_phase(&x_next, &state.p, topo, rho, order)?;
    Ok(AdmmState {
        x: x_next,
        p: p_next,
        k: state.k + 1,
        rho,
        noise_on: state.noise_on,
    })
}

/// `f(x) + pᵀx + ρ Σ_j ‖x − (x_i+x_j)/2 + s·w‖²`, minimized directly.
struct AgentArgmin<'a, P> {
    f: &'a P,
    p: &'a DVector<f64>,
    rho: f64,
    targets: Vec<DVector<f64>>,
}

impl<P: LocalPotential> Objective for AgentArgmin<'_, P> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.f.value(x)
            + self.p.dot(x)
            + self.rho * self.targets.iter().map(|t| (x - t).norm_squared()).sum::<f64>()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = self.f.grad(x) + self.p;
        for t in &self.targets {
            g += (x - t) * (2.0 * self.rho);
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.f.hess(x);
        let shift = 2.0 * self.rho * self.targets.len() as f64;
        for i in 0..h.nrows() {
            h[(i, i)] += shift;
        }
        h
    }
}

/// D-ADMMS round computed from the augmented-Lagrangian argmin directly
/// rather than through the proximal rewrite. Used to cross-check
/// [`dadmms_step`].
pub fn dadmms_step_argmin<P: LocalPotential>(
    state: &AdmmState,
    topo: &Topology,
    potentials: &[P],
    noise: &NoiseDraw,
) -> Result<AdmmState> {
    check_shapes(&state.x, topo, potentials)?;
    let rho = state.rho;
    let order = natural_order(topo.n_agents());
    let x_next = phase(topo.n_agents(), &order, |i| {
        let shift = if state.noise_on {
            &noise.w[i] * (std::f64::consts::SQRT_2 / (2.0 * rho))
        } else {
            DVector::zeros(state.x[i].len())
        };
        let targets = topo
            .neighbors(i)
            .iter()
            .map(|&j| (&state.x[i] + &state.x[j]) / 2.0 - &shift)
            .collect();
        let obj = AgentArgmin {
            f: &potentials[i],
            p: &state.p[i],
            rho,
            targets,
        };
        newton::minimize(&obj, state.x[i].clone())
    })?;
    let p_next = dual_phase(&x_next, &state.p, topo, rho, &order)?;
    Ok(AdmmState {
        x: x_next,
        p: p_next,
        k: state.k + 1,
        rho,
        noise_on: state.noise_on,
    })
}

/// Consensus ADMM (no noise):
///
/// ```text
/// x_i ← argmin f_i(x) + p_iᵀx + ρ Σ_j ‖x − (x_i+x_j)/2‖²
/// p_i ← p_i + ρ Σ_j (x_i⁺ − x_j⁺)
/// ```
pub fn cadmm_step<P: LocalPotential>(state: &AdmmState, topo: &Topology, potentials: &[P]) -> Result<AdmmState> {
    check_shapes(&state.x, topo, potentials)?;
    let rho = state.rho;
    let order = natural_order(topo.n_agents());
    let x_next = phase(topo.n_agents(), &order, |i| {
        let ni = topo.degree(i);
        if ni == 0 {
            return potentials[i].argmin_tilted(&state.p[i]);
        }
        let ni = ni as f64;
        let v = neighbour_midpoint(&state.x, topo, i) - &state.p[i] / (2.0 * rho * ni);
        potentials[i].prox(1.0 / (2.0 * rho * ni), &v)
    })?;
    let p_next = dual_phase(&x_next, &state.p, topo, rho, &order)?;
    Ok(AdmmState {
        x: x_next,
        p: p_next,
        k: state.k + 1,
        rho,
        noise_on: false,
    })
}

fn mix(s: &DMatrix<f64>, x: &[DVector<f64>], i: usize) -> DVector<f64> {
    let mut out = DVector::zeros(x[i].len());
    for (j, xj) in x.iter().enumerate() {
        let w = s[(i, j)];
        if w != 0.0 {
            out += xj * w;
        }
    }
    out
}

/// D-SGLD: `x_i ← Σ_j S_ij x_j − η∇f_i(x_i) + √(2η) w_i`.
pub fn dsgld_step<P: LocalPotential>(
    state: &LangevinState,
    mixing: &DMatrix<f64>,
    potentials: &[P],
    noise: &NoiseDraw,
    eta: f64,
) -> Result<LangevinState> {
    dsgld_step_in_order(state, mixing, potentials, noise, eta, &natural_order(state.x.len()))
}

pub fn dsgld_step_in_order<P: LocalPotential>(
    state: &LangevinState,
    mixing: &DMatrix<f64>,
    potentials: &[P],
    noise: &NoiseDraw,
    eta: f64,
    order: &[usize],
) -> Result<LangevinState> {
    let n = state.x.len();
    let scale = (2.0 * eta).sqrt();
    let x = phase(n, order, |i| {
        Ok(mix(mixing, &state.x, i) - potentials[i].grad(&state.x[i]) * eta + &noise.w[i] * scale)
    })?;
    Ok(LangevinState {
        x,
        v: state.v.clone(),
        k: state.k + 1,
    })
}

/// D-SGHMC:
///
/// ```text
/// v_i ← v_i − η(γ v_i + ∇f_i(x_i)) + √(2γη) w_i
/// x_i ← Σ_j S_ij x_j + η v_i⁺
/// ```
pub fn dsghmc_step<P: LocalPotential>(
    state: &LangevinState,
    mixing: &DMatrix<f64>,
    potentials: &[P],
    noise: &NoiseDraw,
    eta: f64,
    friction: f64,
) -> Result<LangevinState> {
    dsghmc_step_in_order(state, mixing, potentials, noise, eta, friction, &natural_order(state.x.len()))
}

pub fn dsghmc_step_in_order<P: LocalPotential>(
    state: &LangevinState,
    mixing: &DMatrix<f64>,
    potentials: &[P],
    noise: &NoiseDraw,
    eta: f64,
    friction: f64,
    order: &[usize],
) -> Result<LangevinState> {
    let n = state.x.len();
    let scale = (2.0 * friction * eta).sqrt();
    let pairs = phase(n, order, |i| {
        let v = &state.v[i] - (&state.v[i] * friction + potentials[i].grad(&state.x[i])) * eta
            + &noise.w[i] * scale;
        let x = mix(mixing, &state.x, i) + &v * eta;
        Ok((x, v))
    })?;
    let (x, v) = pairs.into_iter().unzip();
    Ok(LangevinState { x, v, k: state.k + 1 })
}

/// D-ULA with `w_i ~ N(0, N·I)` supplied by the caller:
///
/// ```text
/// x_i ← x_i − ζ⁽ᵏ⁾ Σ_j (x_i − x_j) − α⁽ᵏ⁾ N ∇f_i(x_i) + √(2α⁽ᵏ⁾) w_i
/// ```
pub fn dula_step<P: LocalPotential>(
    state: &LangevinState,
    topo: &Topology,
    potentials: &[P],
    noise: &NoiseDraw,
    schedule: &DulaSchedule,
) -> Result<LangevinState> {
    dula_step_in_order(state, topo, potentials, noise, schedule, &natural_order(topo.n_agents()))
}

pub fn dula_step_in_order<P: LocalPotential>(
    state: &LangevinState,
    topo: &Topology,
    potentials: &[P],
    noise: &NoiseDraw,
    schedule: &DulaSchedule,
    order: &[usize],
) -> Result<LangevinState> {
    check_shapes(&state.x, topo, potentials)?;
    let n = topo.n_agents();
    let alpha = schedule.alpha(state.k);
    let zeta = schedule.zeta(state.k);
    let x = phase(n, order, |i| {
        let mut disagreement = DVector::zeros(state.x[i].len());
        for &j in topo.neighbors(i) {
            disagreement += &state.x[i] - &state.x[j];
        }
        Ok(&state.x[i] - disagreement * zeta - potentials[i].grad(&state.x[i]) * (alpha * n as f64)
            + &noise.w[i] * (2.0 * alpha).sqrt())
    })?;
    Ok(LangevinState {
        x,
        v: state.v.clone(),
        k: state.k + 1,
    })
}

/// Agent iterates recorded every `stride` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub stride: usize,
    pub iterations: Vec<usize>,
    /// `x[r][i]` is agent `i`'s iterate at round `iterations[r]`.
    pub x: Vec<Vec<DVector<f64>>>,
}

impl History {
    pub fn n_agents(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn last(&self) -> &[DVector<f64>] {
        self.x.last().map_or(&[], Vec::as_slice)
    }
}

/// Initial iterates `x_i⁽⁰⁾ ~ N(0, I)` for one trial, shared by every algorithm.
pub fn initial_iterates(trial_seed: u64, n_agents: usize, d: usize) -> Vec<DVector<f64>> {
    let mut rng = rng::stream(trial_seed, "init", 0);
    (0..n_agents).map(|_| standard_normal_vector(&mut rng, d)).collect()
}

/// Runs one chain for `n_iters` rounds. Deterministic in `(spec, trial_seed)`.
pub fn run_chain<P: LocalPotential>(
    spec: &SamplerSpec,
    potentials: &[P],
    topo: &Topology,
    n_iters: usize,
    trial_seed: u64,
    stride: usize,
) -> Result<History> {
    spec.validate()?;
    let d = potentials
        .first()
        .map(P::dim)
        .ok_or_else(|| Error::InvalidArgument("no potentials".into()))?;
    let n = topo.n_agents();
    let stride = stride.max(1);
    let x0 = initial_iterates(trial_seed, n, d);
    let mut noise_rng = rng::stream(trial_seed, spec.algorithm().name(), 1);
    let mut hist = History {
        stride,
        iterations: vec![0],
        x: vec![x0.clone()],
    };
    let record = |k: usize, x: &[DVector<f64>], hist: &mut History| {
        if k % stride == 0 {
            hist.iterations.push(k);
            hist.x.push(x.to_vec());
        }
    };
    match *spec {
        SamplerSpec::Dadmms { rho } => {
            let mut st = AdmmState::new(x0, rho, true);
            for _ in 0..n_iters {
                let w = NoiseDraw::standard(&mut noise_rng, n, d);
                st = dadmms_step(&st, topo, potentials, &w)?;
                record(st.k, &st.x, &mut hist);
            }
        }
        SamplerSpec::Admm { rho } => {
            let mut st = AdmmState::new(x0, rho, false);
            for _ in 0..n_iters {
                st = cadmm_step(&st, topo, potentials)?;
                record(st.k, &st.x, &mut hist);
            }
        }
        SamplerSpec::Dsgld { eta } => {
            let s = mixing_matrix(topo);
            let mut st = LangevinState::new(x0);
            for _ in 0..n_iters {
                let w = NoiseDraw::standard(&mut noise_rng, n, d);
                st = dsgld_step(&st, &s, potentials, &w, eta)?;
                record(st.k, &st.x, &mut hist);
            }
        }
        SamplerSpec::Dsghmc { eta, gamma } => {
            let s = mixing_matrix(topo);
            let mut st = LangevinState::new(x0);
            for _ in 0..n_iters {
                let w = NoiseDraw::standard(&mut noise_rng, n, d);
                st = dsghmc_step(&st, &s, potentials, &w, eta, gamma)?;
                record(st.k, &st.x, &mut hist);
            }
        }
        SamplerSpec::Dula(schedule) => {
            let mut st = LangevinState::new(x0);
            let scale = (n as f64).sqrt();
            for _ in 0..n_iters {
                let w = NoiseDraw::scaled(&mut noise_rng, n, d, scale);
                st = dula_step(&st, topo, potentials, &w, &schedule)?;
                record(st.k, &st.x, &mut hist);
            }
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticPotential;
    use nalgebra::dvector;

    #[test]
    fn isolated_agent_lands_on_minimizer() {
        let topo = Topology::build(TopologyKind::NoEdge, 1).unwrap();
        let pots = [QuadraticPotential::isotropic(2)];
        let st = AdmmState::new(vec![dvector![3.0, -1.0]], 5.0, true);
        let noise = NoiseDraw {
            w: vec![dvector![10.0, -7.0]],
        };
        let next = dadmms_step(&st, &topo, &pots, &noise).unwrap();
        assert_eq!(next.x[0], dvector![0.0, 0.0]);
    }

    #[test]
    fn dsgld_without_gradient_or_noise_is_averaging() {
        let topo = Topology::build(TopologyKind::RingCyclic, 4).unwrap();
        let s = mixing_matrix(&topo);
        let zero = QuadraticPotential::new(DMatrix::zeros(1, 1), DVector::zeros(1), 0.0);
        let pots = vec![zero; 4];
        let st = LangevinState::new((0..4).map(|i| dvector![i as f64]).collect());
        let next = dsgld_step(&st, &s, &pots, &NoiseDraw::zeros(4, 1), 0.1).unwrap();
        for i in 0..4 {
            let expected = mix(&s, &st.x, i);
            assert_eq!(next.x[i], expected);
        }
        let mean: f64 = next.x.iter().map(|v| v[0]).sum::<f64>() / 4.0;
        assert!((mean - 1.5).abs() < 1e-12);
    }

    #[test]
    fn dsghmc_frictionless_keeps_momentum() {
        let topo = Topology::build(TopologyKind::RingCyclic, 3).unwrap();
        let s = mixing_matrix(&topo);
        let zero = QuadraticPotential::new(DMatrix::zeros(1, 1), DVector::zeros(1), 0.0);
        let pots = vec![zero; 3];
        let mut st = LangevinState::new(vec![dvector![0.0], dvector![1.0], dvector![2.0]]);
        st.v = vec![dvector![0.5]; 3];
        let next = dsghmc_step(&st, &s, &pots, &NoiseDraw::zeros(3, 1), 0.1, 0.0).unwrap();
        assert_eq!(next.v, st.v);
        for i in 0..3 {
            assert!((next.x[i][0] - (mix(&s, &st.x, i)[0] + 0.05)).abs() < 1e-15);
        }
    }

    #[test]
    fn dula_no_edge_is_scaled_gradient_descent() {
        let topo = Topology::build(TopologyKind::NoEdge, 3).unwrap();
        let pots = vec![QuadraticPotential::isotropic(2); 3];
        let sched = reference_defaults(Algorithm::Dula, ProblemKind::Linreg, TopologyKind::NoEdge, 3).unwrap();
        let SamplerSpec::Dula(sched) = sched else { panic!() };
        let st = LangevinState::new(vec![dvector![1.0, 2.0]; 3]);
        let next = dula_step(&st, &topo, &pots, &NoiseDraw::zeros(3, 2), &sched).unwrap();
        let alpha = 0.00082 / 230f64.powf(0.05);
        for x in &next.x {
            assert!((x - dvector![1.0, 2.0] * (1.0 - 3.0 * alpha)).norm() < 1e-15);
        }
    }

    #[test]
    fn dula_schedules_decrease() {
        let s = DulaSchedule {
            alpha0: 0.00082,
            zeta0: 0.48,
            offset: 230.0,
            chi1: 0.55,
            chi2: 0.05,
        };
        assert!((s.alpha(0) - 0.00082 / 230f64.powf(0.05)).abs() < 1e-18);
        assert!((s.zeta(3) - 0.48 / 233f64.powf(0.55)).abs() < 1e-15);
        assert!((1..100).all(|k| s.alpha(k) < s.alpha(k - 1) && s.zeta(k) < s.zeta(k - 1)));
    }

    #[test]
    fn reference_hyperparameters() {
        use Algorithm::*;
        let lin = |a| reference_defaults(a, ProblemKind::Linreg, TopologyKind::RingCyclic, 5).unwrap();
        assert_eq!(lin(Dsgld), SamplerSpec::Dsgld { eta: 0.009 });
        assert_eq!(lin(Dsghmc), SamplerSpec::Dsghmc { eta: 0.1, gamma: 7.0 });
        assert_eq!(lin(Dadmms), SamplerSpec::Dadmms { rho: 5.0 });
        let log = |a| reference_defaults(a, ProblemKind::Logreg, TopologyKind::RingCyclic, 5).unwrap();
        assert_eq!(log(Dsghmc), SamplerSpec::Dsghmc { eta: 0.02, gamma: 30.0 });
        assert_eq!(log(Dsgld), SamplerSpec::Dsgld { eta: 0.0003 });
        let SamplerSpec::Dula(s) =
            reference_defaults(Dula, ProblemKind::Linreg, TopologyKind::FullyConnected, 20).unwrap()
        else {
            panic!()
        };
        assert_eq!((s.chi1, s.chi2), (0.55, 0.05));
        let SamplerSpec::Dula(s) =
            reference_defaults(Dula, ProblemKind::Logreg, TopologyKind::FullyConnected, 50).unwrap()
        else {
            panic!()
        };
        assert_eq!((s.chi1, s.chi2), (0.9, 0.9));
        assert!(reference_defaults(Dula, ProblemKind::Linreg, TopologyKind::FullyConnected, 100).is_err());
    }

    #[test]
    fn bad_order_rejected() {
        let topo = Topology::build(TopologyKind::RingCyclic, 3).unwrap();
        let pots = vec![QuadraticPotential::isotropic(1); 3];
        let st = AdmmState::new(vec![dvector![0.0]; 3], 1.0, true);
        let w = NoiseDraw::zeros(3, 1);
        assert!(dadmms_step_in_order(&st, &topo, &pots, &w, &[0, 0, 1]).is_err());
        assert!(dadmms_step_in_order(&st, &topo, &pots, &w, &[0, 1]).is_err());
    }
}
