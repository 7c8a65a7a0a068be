//! Synthetic Bayesian regression problems and the per-agent potentials.
//!
//! The global target is `exp(-Σ_i f_i(x))`. Each agent's potential carries
//! its share `1/N` of the Gaussian prior `N(0, λI)`.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::newton::{self, Objective};
use crate::rng::{self, standard_normal_vector};
use crate::{Error, Result};

/// One agent's potential: value, gradient, Hessian and proximal oracle.
pub trait LocalPotential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn grad(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hess(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Global strong-convexity constant `m_{f_i}` (or a valid lower bound).
    fn strong_convexity(&self) -> f64;
    /// Global gradient-Lipschitz constant `M_{f_i}` (or a valid upper bound).
    fn smoothness(&self) -> f64;

    /// `argmin_x { f(x) + ‖x − v‖² / (2γ) }`.
    ///
    /// The default runs damped Newton warm-started at `v`.
    fn prox(&self, gamma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {gamma}")));
        }
        let obj = Tilted {
            f: self,
            tilt: None,
            anchor: Some((gamma, v)),
        };
        newton::minimize(&obj, v.clone())
    }

    /// `argmin_x { f(x) + pᵀx }`.
    fn argmin_tilted(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let obj = Tilted {
            f: self,
            tilt: Some(p),
            anchor: None,
        };
        newton::minimize(&obj, DVector::zeros(self.dim()))
    }
}

/// `f(x) + tiltᵀx + ‖x − v‖²/(2γ)` with either extra term optional.
struct Tilted<'a, F: ?Sized> {
    f: &'a F,
    tilt: Option<&'a DVector<f64>>,
    anchor: Option<(f64, &'a DVector<f64>)>,
}

impl<F: LocalPotential + ?Sized> Objective for Tilted<'_, F> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut v = self.f.value(x);
        if let Some(p) = self.tilt {
            v += p.dot(x);
        }
        if let Some((g, a)) = self.anchor {
            v += (x - a).norm_squared() / (2.0 * g);
        }
        v
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut gr = self.f.grad(x);
        if let Some(p) = self.tilt {
            gr += p;
        }
        if let Some((g, a)) = self.anchor {
            gr += (x - a) / g;
        }
        gr
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.f.hess(x);
        if let Some((g, _)) = self.anchor {
            for i in 0..h.nrows() {
                h[(i, i)] += 1.0 / g;
            }
        }
        h
    }
}

/// `f(x) = ½ xᵀHx − bᵀx + c` with `H` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPotential {
    pub h: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticPotential {
    pub fn new(h: DMatrix<f64>, b: DVector<f64>, c: f64) -> Self {
        assert_eq!(h.nrows(), h.ncols());
        assert_eq!(h.nrows(), b.len());
        Self { h, b, c }
    }

    /// `½‖x‖²`.
    pub fn isotropic(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d), DVector::zeros(d), 0.0)
    }

    fn solve_shifted(&self, shift: f64, rhs: DVector<f64>) -> Result<DVector<f64>> {
        let mut m = self.h.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        let ch = m.cholesky().ok_or(Error::NotPsd {
            min_eigenvalue: f64::NAN,
        })?;
        Ok(ch.solve(&rhs))
    }

    fn eigen_range(&self) -> (f64, f64) {
        let ev = self.h.clone().symmetric_eigenvalues();
        (ev.min(), ev.max())
    }
}

impl LocalPotential for QuadraticPotential {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) - self.b.dot(x) + self.c
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h * x - &self.b
    }

    fn hess(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.h.clone()
    }

    fn strong_convexity(&self) -> f64 {
        self.eigen_range().0
    }

    fn smoothness(&self) -> f64 {
        self.eigen_range().1
    }

    /// `(H + I/γ)⁻¹ (b + v/γ)`.
    fn prox(&self, gamma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {gamma}")));
        }
        self.solve_shifted(1.0 / gamma, &self.b + v / gamma)
    }

    fn argmin_tilted(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.solve_shifted(0.0, &self.b - p)
    }
}

/// Numerically stable `log(1 + eᵗ)`.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `f(x) = Σ_l log(1 + exp(ψ_l xᵀz_l)) + ‖x‖²·ridge/2` with `ψ_l = −1` for
/// label-1 points and `+1` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticPotential {
    /// One data point per row.
    pub z: DMatrix<f64>,
    pub psi: Vec<f64>,
    /// `1/(λN)`.
    pub ridge: f64,
}

impl LogisticPotential {
    pub fn new(z: DMatrix<f64>, labels: &[bool], ridge: f64) -> Self {
        assert_eq!(z.nrows(), labels.len());
        let psi = labels.iter().map(|&l| if l { -1.0 } else { 1.0 }).collect();
        Self { z, psi, ridge }
    }

    fn margins(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.z * x
    }
}

impl LocalPotential for LogisticPotential {
    fn dim(&self) -> usize {
        self.z.ncols()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let t = self.margins(x);
        let data: f64 = t.iter().zip(&self.psi).map(|(&t, &s)| softplus(s * t)).sum();
        data + 0.5 * self.ridge * x.norm_squared()
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let t = self.margins(x);
        let w = DVector::from_iterator(
            t.len(),
            t.iter().zip(&self.psi).map(|(&t, &s)| s * sigmoid(s * t)),
        );
        self.z.tr_mul(&w) + x * self.ridge
    }

    fn hess(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let t = self.margins(x);
        let d = self.dim();
        let mut h = DMatrix::from_diagonal_element(d, d, self.ridge);
        for (l, &tl) in t.iter().enumerate() {
            let s = sigmoid(tl);
            let w = s * (1.0 - s);
            let row = self.z.row(l);
            for a in 0..d {
                for b in 0..d {
                    h[(a, b)] += w * row[a] * row[b];
                }
            }
        }
        h
    }

    fn strong_convexity(&self) -> f64 {
        self.ridge
    }

    fn smoothness(&self) -> f64 {
        if self.z.nrows() == 0 {
            return self.ridge;
        }
        let gram = self.z.tr_mul(&self.z);
        0.25 * gram.symmetric_eigenvalues().max() + self.ridge
    }
}

/// One agent's data: points as rows of `z`, responses or 0/1 labels in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentData {
    pub z: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl AgentData {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinRegProblem {
    pub d: usize,
    pub xi: f64,
    pub lambda_prior: f64,
    pub agents: Vec<AgentData>,
    pub x_true: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegProblem {
    pub d: usize,
    pub lambda_prior: f64,
    /// Within each agent, label-1 points come first.
    pub agents: Vec<AgentData>,
    /// Number of label-1 points per agent.
    pub n_positive: Vec<usize>,
    pub x_true: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPosterior {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

fn check_sizes(d: usize, n_agents: usize) -> Result<()> {
    if d == 0 || n_agents == 0 {
        return Err(Error::InvalidArgument(
            "dimension and agent count must be positive".into(),
        ));
    }
    Ok(())
}

/// `z ~ N(0, I)`, `y = x_trueᵀz + δ`, `δ ~ N(0, ξ²)`, with one `x_true ~ N(0, λI)`
/// shared by every agent.
pub fn generate_linreg(
    d: usize,
    xi: f64,
    lambda_prior: f64,
    n_agents: usize,
    n_per_agent: usize,
    seed: u64,
) -> Result<LinRegProblem> {
    check_sizes(d, n_agents)?;
    if xi < 0.0 || !(lambda_prior > 0.0) {
        return Err(Error::InvalidArgument("need xi >= 0 and lambda > 0".into()));
    }
    let mut rng = rng::stream(seed, "linreg-data", 0);
    let x_true = standard_normal_vector(&mut rng, d) * lambda_prior.sqrt();
    let agents = (0..n_agents)
        .map(|_| {
            let mut z = DMatrix::zeros(n_per_agent, d);
            let mut y = DVector::zeros(n_per_agent);
            for l in 0..n_per_agent {
                let zl = standard_normal_vector(&mut rng, d);
                let noise: f64 = rng.sample(rand_distr::StandardNormal);
                y[l] = x_true.dot(&zl) + xi * noise;
                z.set_row(l, &zl.transpose());
            }
            AgentData { z, y }
        })
        .collect();
    Ok(LinRegProblem {
        d,
        xi,
        lambda_prior,
        agents,
        x_true,
    })
}

impl LinRegProblem {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// `H_i = ZᵢᵀZᵢ/ξ² + I/(λN)`, `b_i = Zᵢᵀyᵢ/ξ²`, `c_i = ‖yᵢ‖²/(2ξ²)`.
    pub fn potentials(&self) -> Result<Vec<QuadraticPotential>> {
        if !(self.xi > 0.0) {
            return Err(Error::InvalidArgument(
                "noise-free data has no likelihood potential (xi must be > 0)".into(),
            ));
        }
        let n = self.n_agents() as f64;
        let s2 = self.xi * self.xi;
        Ok(self
            .agents
            .iter()
            .map(|a| {
                let mut h = a.z.tr_mul(&a.z) / s2;
                for i in 0..self.d {
                    h[(i, i)] += 1.0 / (self.lambda_prior * n);
                }
                let b = a.z.tr_mul(&a.y) / s2;
                let c = a.y.norm_squared() / (2.0 * s2);
                QuadraticPotential::new(h, b, c)
            })
            .collect())
    }

    /// Conjugate posterior of the pooled data:
    /// precision `I/λ + Σ zzᵀ/ξ²`, mean `Σ⁻¹ · Σ zy/ξ²`.
    pub fn true_posterior(&self) -> Result<GaussianPosterior> {
        if !(self.xi > 0.0) {
            return Err(Error::InvalidArgument("xi must be > 0".into()));
        }
        let s2 = self.xi * self.xi;
        let mut precision = DMatrix::from_diagonal_element(self.d, self.d, 1.0 / self.lambda_prior);
        let mut rhs = DVector::zeros(self.d);
        for a in &self.agents {
            precision += a.z.tr_mul(&a.z) / s2;
            rhs += a.z.tr_mul(&a.y) / s2;
        }
        let ch = precision.cholesky().ok_or(Error::NotPsd {
            min_eigenvalue: f64::NAN,
        })?;
        let covariance = ch.inverse();
        let covariance = (&covariance + covariance.transpose()) * 0.5;
        let mean = &covariance * rhs;
        Ok(GaussianPosterior { mean, covariance })
    }
}

/// Draws `x_true ~ N(0, λI)`, then data via [`generate_logreg_with_truth`]'s rule.
pub fn generate_logreg(
    d: usize,
    lambda_prior: f64,
    n_agents: usize,
    n_per_agent: usize,
    seed: u64,
) -> Result<LogRegProblem> {
    check_sizes(d, n_agents)?;
    if !(lambda_prior > 0.0) {
        return Err(Error::InvalidArgument("lambda must be > 0".into()));
    }
    let mut rng = rng::stream(seed, "logreg-data", 0);
    let x_true = standard_normal_vector(&mut rng, d) * lambda_prior.sqrt();
    Ok(logreg_from_rng(x_true, lambda_prior, n_agents, n_per_agent, &mut rng))
}

/// `z ~ N(0, 20I)`, `p ~ U(0, 1)`, label 1 iff `p ≤ σ(x_trueᵀz)`.
pub fn generate_logreg_with_truth(
    x_true: DVector<f64>,
    lambda_prior: f64,
    n_agents: usize,
    n_per_agent: usize,
    seed: u64,
) -> Result<LogRegProblem> {
    check_sizes(x_true.len(), n_agents)?;
    let mut rng = rng::stream(seed, "logreg-data-fixed-truth", 0);
    Ok(logreg_from_rng(x_true, lambda_prior, n_agents, n_per_agent, &mut rng))
}

fn logreg_from_rng<R: Rng>(
    x_true: DVector<f64>,
    lambda_prior: f64,
    n_agents: usize,
    n_per_agent: usize,
    rng: &mut R,
) -> LogRegProblem {
    let d = x_true.len();
    let scale = 20f64.sqrt();
    let mut agents = Vec::with_capacity(n_agents);
    let mut n_positive = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for _ in 0..n_per_agent {
            let z = standard_normal_vector(rng, d) * scale;
            let p: f64 = rng.random();
            if p <= sigmoid(x_true.dot(&z)) {
                pos.push(z);
            } else {
                neg.push(z);
            }
        }
        let n_pos = pos.len();
        let mut z = DMatrix::zeros(n_per_agent, d);
        let mut y = DVector::zeros(n_per_agent);
        for (l, zl) in pos.iter().chain(neg.iter()).enumerate() {
            z.set_row(l, &zl.transpose());
            y[l] = if l < n_pos { 1.0 } else { 0.0 };
        }
        agents.push(AgentData { z, y });
        n_positive.push(n_pos);
    }
    LogRegProblem {
        d,
        lambda_prior,
        agents,
        n_positive,
        x_true,
    }
}

impl LogRegProblem {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn potentials(&self) -> Vec<LogisticPotential> {
        let ridge = 1.0 / (self.lambda_prior * self.n_agents() as f64);
        self.agents
            .iter()
            .map(|a| {
                let labels: Vec<bool> = a.y.iter().map(|&v| v > 0.5).collect();
                LogisticPotential::new(a.z.clone(), &labels, ridge)
            })
            .collect()
    }

    /// All agents' points stacked, with labels.
    pub fn pooled(&self) -> (DMatrix<f64>, Vec<bool>) {
        let total: usize = self.agents.iter().map(AgentData::len).sum();
        let mut z = DMatrix::zeros(total, self.d);
        let mut labels = Vec::with_capacity(total);
        let mut r = 0;
        for a in &self.agents {
            for l in 0..a.len() {
                z.set_row(r, &a.z.row(l));
                labels.push(a.y[l] > 0.5);
                r += 1;
            }
        }
        (z, labels)
    }
}

/// Fraction of points whose predicted label matches. A point is assigned
/// label 1 when `σ(xᵀz) ≥ ½`, i.e. `xᵀz ≥ 0`.
pub fn predict_accuracy(x: &DVector<f64>, z: &DMatrix<f64>, labels: &[bool]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let margins = z * x;
    let hits = margins
        .iter()
        .zip(labels)
        .filter(|(&t, &l)| (sigmoid(t) >= 0.5) == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Either regression problem, for config-driven code.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    LinReg(LinRegProblem),
    LogReg(LogRegProblem),
}

/// Potential of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentPotential {
    Quadratic(QuadraticPotential),
    Logistic(LogisticPotential),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            AgentPotential::Quadratic($p) => $e,
            AgentPotential::Logistic($p) => $e,
        }
    };
}

impl LocalPotential for AgentPotential {
    fn dim(&self) -> usize {
        delegate!(self, p => p.dim())
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        delegate!(self, p => p.value(x))
    }
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        delegate!(self, p => p.grad(x))
    }
    fn hess(&self, x: &DVector<f64>) -> DMatrix<f64> {
        delegate!(self, p => p.hess(x))
    }
    fn strong_convexity(&self) -> f64 {
        delegate!(self, p => p.strong_convexity())
    }
    fn smoothness(&self) -> f64 {
        delegate!(self, p => p.smoothness())
    }
    fn prox(&self, gamma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        delegate!(self, p => p.prox(gamma, v))
    }
    fn argmin_tilted(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        delegate!(self, p => p.argmin_tilted(q))
    }
}

impl Problem {
    pub fn d(&self) -> usize {
        match self {
            Problem::LinReg(p) => p.d,
            Problem::LogReg(p) => p.d,
        }
    }

    pub fn n_agents(&self) -> usize {
        match self {
            Problem::LinReg(p) => p.n_agents(),
            Problem::LogReg(p) => p.n_agents(),
        }
    }

    pub fn agents(&self) -> &[AgentData] {
        match self {
            Problem::LinReg(p) => &p.agents,
            Problem::LogReg(p) => &p.agents,
        }
    }

    pub fn potentials(&self) -> Result<Vec<AgentPotential>> {
        Ok(match self {
            Problem::LinReg(p) => p.potentials()?.into_iter().map(AgentPotential::Quadratic).collect(),
            Problem::LogReg(p) => p.potentials().into_iter().map(AgentPotential::Logistic).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionConstants {
    /// `min_i m_{f_i}`.
    pub m_f: f64,
    /// `max_i M_{f_i}`.
    pub big_m_f: f64,
    pub tau_f: f64,
}

pub fn strong_convexity_constants<P: LocalPotential>(potentials: &[P]) -> ConditionConstants {
    let m_f = potentials.iter().map(P::strong_convexity).fold(f64::INFINITY, f64::min);
    let big_m_f = potentials.iter().map(P::smoothness).fold(0.0, f64::max);
    ConditionConstants {
        m_f,
        big_m_f,
        tau_f: big_m_f / m_f,
    }
}

struct SumObjective<'a, P>(&'a [P]);

impl<P: LocalPotential> Objective for SumObjective<'_, P> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0.iter().map(|p| p.value(x)).sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.iter().fold(DVector::zeros(x.len()), |acc, p| acc + p.grad(x))
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0
            .iter()
            .fold(DMatrix::zeros(x.len(), x.len()), |acc, p| acc + p.hess(x))
    }
}

/// Minimizer of `Σ_i f_i` (the MAP estimate).
pub fn centralized_minimizer<P: LocalPotential>(potentials: &[P]) -> Result<DVector<f64>> {
    let d = potentials
        .first()
        .map(P::dim)
        .ok_or_else(|| Error::InvalidArgument("no potentials".into()))?;
    newton::minimize(&SumObjective(potentials), DVector::zeros(d))
}

/// Writes one CSV record per point: `agent,z0,…,z{d-1},y`.
pub fn write_dataset<W: Write>(mut w: W, agents: &[AgentData]) -> Result<()> {
    let d = agents.first().map_or(0, |a| a.z.ncols());
    let mut header = vec!["agent".to_string()];
    header.extend((0..d).map(|c| format!("z{c}")));
    header.push("y".into());
    writeln!(w, "{}", header.join(","))?;
    for (i, a) in agents.iter().enumerate() {
        for l in 0..a.len() {
            let mut fields = vec![i.to_string()];
            fields.extend(a.z.row(l).iter().map(|v| v.to_string()));
            fields.push(a.y[l].to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
    }
    Ok(())
}

/// Inverse of [`write_dataset`]. Agents are numbered densely from 0.
pub fn read_dataset<R: BufRead>(r: R) -> Result<Vec<AgentData>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
    let cols = header.split(',').count();
    if cols < 3 {
        return Err(Error::Parse(format!("header has {cols} columns")));
    }
    let d = cols - 2;
    let mut rows: Vec<Vec<(Vec<f64>, f64)>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::Parse(format!("line {}: expected {cols} fields", lineno + 2)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        let agent: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        let z = fields[1..=d].iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        let y = parse(fields[cols - 1])?;
        if rows.len() <= agent {
            rows.resize_with(agent + 1, Vec::new);
        }
        rows[agent].push((z, y));
    }
    Ok(rows
        .into_iter()
        .map(|pts| AgentData {
            z: DMatrix::from_fn(pts.len(), d, |r, c| pts[r].0[c]),
            y: DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1)),
        })
        .collect())
}
