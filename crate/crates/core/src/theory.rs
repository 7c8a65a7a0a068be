//! Convergence-theory quantities for the noisy consensus-ADMM sampler.
//!
//! For `κ > 1` and penalty `ρ > 0`,
//!
//! ```text
//! δ = min{ (κ−1)σ²_min(M₋) / (κσ²_max(M₊)),
//!          m_f / ( (ρ/4)σ²_max(M₊) + κM_f² / (ρσ²_min(M₋)) ) }
//! a = (2m_f+1) / (2m_f(1+δ))      b = 1 / (2(1+δ))
//! c = 2√2δ / ((1+δ)σ²_min(M₋))    d = ρσ²_max(M₋) / 2
//! e = 2δ / ((1+δ)ρσ²_min(M₋))
//! ```
//!
//! The Wasserstein bound contracts when `a < 1`, i.e. when `2m_f·δ > 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::graph::{extend_matrices, ExtendedMatrices, SpectralConstants, Topology};
use crate::metrics::{wasserstein2_gaussian, GaussianSummary};
use crate::newton::{self, Objective};
use crate::problems::LocalPotential;
use crate::rng::{self, standard_normal_vector};
use crate::samplers::{dadmms_step, initial_iterates, AdmmState, NoiseDraw};
use crate::{Error, Result};

fn require_kappa(kappa: f64) -> Result<()> {
    if kappa > 1.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("kappa must exceed 1, got {kappa}")))
    }
}

/// The two arguments of the `min` defining δ.
pub fn delta_terms(kappa: f64, rho: f64, spectra: &SpectralConstants, m_f: f64, big_m_f: f64) -> (f64, f64) {
    let s_min2 = spectra.sigma_min_m_minus.powi(2);
    let s_plus2 = spectra.sigma_max_m_plus.powi(2);
    let first = (kappa - 1.0) * s_min2 / (kappa * s_plus2);
    let second = m_f / (rho / 4.0 * s_plus2 + kappa * big_m_f * big_m_f / (rho * s_min2));
    (first, second)
}

pub fn delta_of(kappa: f64, rho: f64, spectra: &SpectralConstants, m_f: f64, big_m_f: f64) -> Result<f64> {
    require_kappa(kappa)?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let (a, b) = delta_terms(kappa, rho, spectra, m_f, big_m_f);
    Ok(a.min(b))
}

/// Penalty maximizing the second argument of δ for a given κ:
/// `ρ(κ) = 2√κ M_f / (σ_min(M₋) σ_max(M₊))`.
pub fn optimal_rho(kappa: f64, spectra: &SpectralConstants, big_m_f: f64) -> Result<f64> {
    require_kappa(kappa)?;
    Ok(2.0 * kappa.sqrt() * big_m_f / (spectra.sigma_min_m_minus * spectra.sigma_max_m_plus))
}

/// The two branches of `δ_max(κ) = max_ρ δ(κ, ρ)`:
/// `(κ−1)/(κτ_G²)` and `m_f σ_min(M₋) / (√κ M_f σ_max(M₊))`.
pub fn delta_max_branches(kappa: f64, spectra: &SpectralConstants, m_f: f64, big_m_f: f64) -> (f64, f64) {
    let s_min = spectra.sigma_min_m_minus;
    let s_plus = spectra.sigma_max_m_plus;
    (
        (kappa - 1.0) * s_min * s_min / (kappa * s_plus * s_plus),
        m_f * s_min / (kappa.sqrt() * big_m_f * s_plus),
    )
}

/// κ equalizing the two branches of `δ_max(κ)`:
/// `1 + ½√(4τ_G²/τ_f² + τ_G⁴/τ_f⁴) + τ_G²/(2τ_f²)`.
pub fn optimal_kappa(tau_f: f64, tau_g: f64) -> f64 {
    let r2 = (tau_g / tau_f).powi(2);
    1.0 + 0.5 * (4.0 * r2 + r2 * r2).sqrt() + 0.5 * r2
}

/// `δ_max = (1/(2τ_f))√(1/τ_f² + 4/τ_G²) − 1/(2τ_f²)`.
pub fn delta_max(tau_f: f64, tau_g: f64) -> f64 {
    (1.0 / (2.0 * tau_f)) * (1.0 / (tau_f * tau_f) + 4.0 / (tau_g * tau_g)).sqrt() - 1.0 / (2.0 * tau_f * tau_f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientCondition {
    pub holds: bool,
    /// `τ_f⁻¹√(τ_f⁻² + 4τ_G⁻²) − τ_f⁻² − m_f⁻¹`.
    pub margin: f64,
}

pub fn sufficient_condition(m_f: f64, tau_f: f64, tau_g: f64) -> SufficientCondition {
    let inv = 1.0 / tau_f;
    let lhs = inv * (inv * inv + 4.0 / (tau_g * tau_g)).sqrt() - inv * inv;
    let margin = lhs - 1.0 / m_f;
    SufficientCondition {
        holds: margin > 0.0,
        margin,
    }
}

/// The `τ_f` at which the sufficient condition flips, `√(m_f(4m_f/τ_G² − 2))`.
/// `None` when no positive `τ_f` satisfies it.
pub fn tau_f_threshold(m_f: f64, tau_g: f64) -> Option<f64> {
    let q = m_f * 4.0 / (tau_g * tau_g) - 2.0;
    (q > 0.0).then(|| (m_f * q).sqrt())
}

/// `‖x+y‖² + (κ−1)‖x‖² − (1 − 1/κ)‖y‖²`, non-negative for every `κ > 1`.
pub fn young_gap(x: &DVector<f64>, y: &DVector<f64>, kappa: f64) -> f64 {
    (x + y).norm_squared() + (kappa - 1.0) * x.norm_squared() - (1.0 - 1.0 / kappa) * y.norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub kappa: f64,
    pub rho: f64,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d_const: f64,
    pub e: f64,
    pub m_f: f64,
    pub big_m_f: f64,
    pub tau_f: f64,
    pub tau_g: f64,
    pub spectra: SpectralConstants,
}

impl TheoryConstants {
    pub fn new(kappa: f64, rho: f64, spectra: SpectralConstants, m_f: f64, big_m_f: f64) -> Result<Self> {
        let delta = delta_of(kappa, rho, &spectra, m_f, big_m_f)?;
        let s_min2 = spectra.sigma_min_m_minus.powi(2);
        Ok(Self {
            kappa,
            rho,
            delta,
            a: (2.0 * m_f + 1.0) / (2.0 * m_f * (1.0 + delta)),
            b: 1.0 / (2.0 * (1.0 + delta)),
            c: 2.0 * std::f64::consts::SQRT_2 * delta / ((1.0 + delta) * s_min2),
            d_const: rho * spectra.sigma_max_m_minus.powi(2) / 2.0,
            e: 2.0 * delta / ((1.0 + delta) * rho * s_min2),
            m_f,
            big_m_f,
            tau_f: big_m_f / m_f,
            tau_g: spectra.tau_g,
            spectra,
        })
    }

    /// Constants at `κ*` and `ρ*(κ*)`, where δ attains `δ_max`.
    pub fn optimal(spectra: SpectralConstants, m_f: f64, big_m_f: f64) -> Result<Self> {
        let kappa = optimal_kappa(big_m_f / m_f, spectra.tau_g);
        let rho = optimal_rho(kappa, &spectra, big_m_f)?;
        Self::new(kappa, rho, spectra, m_f, big_m_f)
    }

    /// Coefficient of `‖Dw‖` in `y`.
    fn y_coefficient(&self) -> f64 {
        let sm = self.m_f.sqrt();
        let wbar = 1.0 / (std::f64::consts::SQRT_2 * self.m_f) + std::f64::consts::SQRT_2;
        2.0 * self.b / sm * wbar
            + self.c * self.spectra.sigma_max_m_minus * self.rho.sqrt()
            + self.c * self.d_const / sm
    }

    /// Coefficient of `‖Dw‖²` in `r`.
    fn r_coefficient(&self) -> f64 {
        let m = self.m_f;
        let wbar = 1.0 / (std::f64::consts::SQRT_2 * m) + std::f64::consts::SQRT_2;
        std::f64::consts::SQRT_2 * self.b / m * wbar + self.b * wbar * wbar + self.b / (2.0 * m * m)
            + std::f64::consts::SQRT_2 * self.c * self.d_const / m
            - self.e
    }

    /// `y` for one noise draw, given `‖Dw‖`.
    pub fn y_of(&self, dw_norm: f64) -> f64 {
        self.y_coefficient() * dw_norm
    }

    /// `r` for one noise draw, given `‖Dw‖`.
    pub fn r_of(&self, dw_norm: f64) -> f64 {
        self.r_coefficient() * dw_norm * dw_norm
    }
}

/// `E‖Dw‖² = d · Σ_i N_i²` for `w ~ N(0, I_{Nd})`.
pub fn expected_dw_norm_sq(topo: &Topology, d: usize) -> f64 {
    d as f64 * (0..topo.n_agents()).map(|i| (topo.degree(i) as f64).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub n_iters: usize,
    /// Initial `W_G(μ_{U⁽⁰⁾}, μ_{U*})`.
    pub w0: f64,
    pub mc_samples: usize,
    pub seed: u64,
    /// `W(μ_{X* − Dw/(√2 m_f)}, μ*)`, if it can be evaluated.
    pub tail: Option<f64>,
    /// Force every noise term to zero.
    pub noiseless: bool,
    /// Use `√(E‖Dw‖²)` in place of the Monte Carlo `E‖Dw‖` for `Y`.
    pub jensen: bool,
}

impl BoundOptions {
    pub fn new(n_iters: usize, w0: f64) -> Self {
        Self {
            n_iters,
            w0,
            mc_samples: 100_000,
            seed: 0,
            tail: None,
            noiseless: false,
            jensen: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTrajectory {
    /// `iterations[j] = j + 1`; `bound[j]` bounds `W(μ_{X^{(j+1)}}, μ*)` and
    /// uses `(√a)^j`.
    pub iterations: Vec<usize>,
    pub bound: Vec<f64>,
    /// `E(y)` (Monte Carlo or Jensen, per options).
    pub y: f64,
    /// `|E(r)|`.
    pub r: f64,
    pub y_monte_carlo: f64,
    pub y_jensen: f64,
    pub expected_dw_norm: f64,
    pub expected_dw_norm_sq: f64,
    pub tail: Option<f64>,
    /// Limit of the bound as `k → ∞`.
    pub floor: f64,
}

/// Evaluates the Wasserstein upper bound
///
/// ```text
/// W(μ_{X^{(k+1)}}, μ*) ≤ (√a)^k W_G/√m_f + Y/(√(a m_f)(1−√a)) + √R/(√m_f(1−√a))
///                       + √(E‖Dw‖²)/(√2 m_f) + W(μ_{X*−Dw/(√2m_f)}, μ*)
/// ```
///
/// with `Y = E(y)` and `R = |E(r)|` estimated over `w ~ N(0, I_{Nd})`.
/// A missing tail term is counted as zero.
pub fn bound_trajectory(
    constants: &TheoryConstants,
    topo: &Topology,
    d: usize,
    opts: &BoundOptions,
) -> Result<BoundTrajectory> {
    if constants.a >= 1.0 {
        return Err(Error::NotContractive { a: constants.a });
    }
    if opts.mc_samples < 10_000 && !opts.noiseless {
        return Err(Error::InvalidArgument(format!(
            "need at least 1e4 Monte Carlo samples, got {}",
            opts.mc_samples
        )));
    }
    let n = topo.n_agents();
    let degrees: Vec<f64> = (0..n).map(|i| topo.degree(i) as f64).collect();
    let (mean_dw, mean_y, mean_r) = if opts.noiseless {
        (0.0, 0.0, 0.0)
    } else {
        let mut rng = rng::stream(opts.seed, "bound-monte-carlo", 0);
        let (mut s_dw, mut s_y, mut s_r) = (0.0, 0.0, 0.0);
        for _ in 0..opts.mc_samples {
            let w = standard_normal_vector(&mut rng, n * d);
            let dw = (0..n * d)
                .map(|q| (degrees[q / d] * w[q]).powi(2))
                .sum::<f64>()
                .sqrt();
            s_dw += dw;
            s_y += constants.y_of(dw);
            s_r += constants.r_of(dw);
        }
        let m = opts.mc_samples as f64;
        (s_dw / m, s_y / m, s_r / m)
    };
    let dw_sq = if opts.noiseless { 0.0 } else { expected_dw_norm_sq(topo, d) };
    let y_jensen = constants.y_of(dw_sq.sqrt());
    let y = if opts.jensen { y_jensen } else { mean_y };
    let r = mean_r.abs();
    let sa = constants.a.sqrt();
    let sm = constants.m_f.sqrt();
    let tail = if opts.noiseless { Some(0.0) } else { opts.tail };
    let floor = y / (sa * sm * (1.0 - sa))
        + r.sqrt() / (sm * (1.0 - sa))
        + dw_sq.sqrt() / (std::f64::consts::SQRT_2 * constants.m_f)
        + tail.unwrap_or(0.0);
    let mut iterations = Vec::with_capacity(opts.n_iters);
    let mut bound = Vec::with_capacity(opts.n_iters);
    let mut geo = opts.w0 / sm;
    for k in 0..opts.n_iters {
        iterations.push(k + 1);
        bound.push(geo + floor);
        geo *= sa;
    }
    Ok(BoundTrajectory {
        iterations,
        bound,
        y,
        r,
        y_monte_carlo: mean_y,
        y_jensen,
        expected_dw_norm: mean_dw,
        expected_dw_norm_sq: dw_sq,
        tail,
        floor,
    })
}

/// `W(μ_{X* − Dw/(√2 m_f)}, μ*)` for a Gaussian target: the left measure is
/// `N(X*, blockdiag(N_i² I / (2m_f²)))` and `μ*` is the product of `N`
/// copies of `target`, so the squared distance is a sum over agents.
pub fn gaussian_tail_term(topo: &Topology, m_f: f64, x_star: &DVector<f64>, target: &GaussianSummary) -> Result<f64> {
    let d = target.dim();
    let mut total = 0.0;
    for i in 0..topo.n_agents() {
        let var = (topo.degree(i) as f64).powi(2) / (2.0 * m_f * m_f);
        let left = GaussianSummary {
            mean: x_star.clone(),
            covariance: DMatrix::from_diagonal_element(d, d, var),
        };
        total += wasserstein2_gaussian(&left, target)?.powi(2);
    }
    Ok(total.sqrt())
}

fn stack(x: &[DVector<f64>]) -> DVector<f64> {
    let d = x.first().map_or(0, DVector::len);
    DVector::from_iterator(x.len() * d, x.iter().flat_map(|v| v.iter().copied()))
}

/// `W_G(μ_{U⁽⁰⁾}, μ_{U*})` with point-mass targets: the root mean over the
/// ensemble of `ρ‖½M₊ᵀX⁽⁰⁾ − Z*‖² + ‖β⁽⁰⁾ − β*‖²/ρ`, with `β⁽⁰⁾ = 0`.
pub fn initial_wg_distance(
    x0_ensemble: &[Vec<DVector<f64>>],
    mats: &ExtendedMatrices,
    rho: f64,
    z_star: &DVector<f64>,
    beta_star: &DVector<f64>,
) -> f64 {
    let m = x0_ensemble.len() as f64;
    let z_term: f64 = x0_ensemble
        .iter()
        .map(|x0| (mats.m_plus.tr_mul(&stack(x0)) * 0.5 - z_star).norm_squared())
        .sum::<f64>()
        / m;
    (rho * z_term + beta_star.norm_squared() / rho).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktResiduals {
    /// `‖∇f(X*) + M₋β*‖`.
    pub stationarity: f64,
    /// `‖M₋ᵀX*‖`.
    pub consensus: f64,
    /// `‖½M₊ᵀX* − Z*‖`.
    pub auxiliary: f64,
    pub beta_star: DVector<f64>,
    pub z_star: DVector<f64>,
}

/// KKT residuals at the consensus point `X* = 1 ⊗ x_star`, with `β*` the
/// least-squares multiplier in the column space of `M₋ᵀ`.
pub fn kkt_residuals<P: LocalPotential>(potentials: &[P], topo: &Topology, x_star: &DVector<f64>) -> Result<KktResiduals> {
    if !topo.is_connected() || topo.edges().is_empty() {
        return Err(Error::Disconnected { lambda2: 0.0 });
    }
    let d = x_star.len();
    let mats = extend_matrices(topo, d);
    let xs = stack(&vec![x_star.clone(); topo.n_agents()]);
    let grad = stack(&potentials.iter().map(|p| p.grad(x_star)).collect::<Vec<_>>());
    let pinv = mats
        .m_minus
        .clone()
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let beta_star = -(pinv * &grad);
    let z_star = mats.m_plus.tr_mul(&xs) * 0.5;
    Ok(KktResiduals {
        stationarity: (&grad + &mats.m_minus * &beta_star).norm(),
        consensus: mats.m_minus.tr_mul(&xs).norm(),
        auxiliary: (mats.m_plus.tr_mul(&xs) * 0.5 - &z_star).norm(),
        beta_star,
        z_star,
    })
}

/// `Σ_i f_i(X_i) + ½XᵀKX − rᵀX` over the stacked iterate.
struct StackedObjective<'a, P> {
    potentials: &'a [P],
    d: usize,
    k: &'a DMatrix<f64>,
    r: DVector<f64>,
}

impl<P: LocalPotential> StackedObjective<'_, P> {
    fn block(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        x.rows(i * self.d, self.d).into_owned()
    }
}

impl<P: LocalPotential> Objective for StackedObjective<'_, P> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let f: f64 = (0..self.potentials.len())
            .map(|i| self.potentials[i].value(&self.block(x, i)))
            .sum();
        f + 0.5 * x.dot(&(self.k * x)) - self.r.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = self.k * x - &self.r;
        for (i, p) in self.potentials.iter().enumerate() {
            let gi = p.grad(&self.block(x, i));
            let mut rows = g.rows_mut(i * self.d, self.d);
            rows += gi;
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.k.clone();
        for (i, p) in self.potentials.iter().enumerate() {
            let hi = p.hess(&self.block(x, i));
            let mut view = h.view_mut((i * self.d, i * self.d), (self.d, self.d));
            view += hi;
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    /// `max_k ‖X_alg⁽ᵏ⁾ − X_stacked⁽ᵏ⁾‖∞`.
    pub max_deviation: f64,
    /// `max_k ‖p⁽ᵏ⁾ − M₋β⁽ᵏ⁾‖∞`.
    pub max_dual_mismatch: f64,
    /// `max_k ‖β⁽ᵏ⁾ − Π β⁽ᵏ⁾‖∞` with `Π` the projector onto range(M₋ᵀ).
    pub max_beta_projection_residual: f64,
    pub iterations: usize,
}

/// Runs the per-agent sampler and the stacked `(Z, β)` iteration
///
/// ```text
/// ∇f(X⁺) + M₋β⁺ + √2 D w = ρM₊(Z − Z⁺)
/// β⁺ = β + (ρ/2) M₋ᵀX⁺
/// Z⁺ = ½ M₊ᵀX⁺
/// ```
///
/// side by side on the same initial point and noise, and reports how far
/// they drift apart.
pub fn lemma1_equivalence<P: LocalPotential>(
    potentials: &[P],
    topo: &Topology,
    rho: f64,
    n_iters: usize,
    seed: u64,
    noise_on: bool,
) -> Result<Lemma1Report> {
    let n = topo.n_agents();
    let d = potentials
        .first()
        .map(P::dim)
        .ok_or_else(|| Error::InvalidArgument("no potentials".into()))?;
    let mats = extend_matrices(topo, d);
    let x0 = initial_iterates(seed, n, d);
    let mut noise_rng = rng::stream(seed, "lemma1-noise", 0);

    let k_mat = (&mats.m_minus * mats.m_minus.transpose() + &mats.m_plus * mats.m_plus.transpose()) * (rho / 2.0);
    let n_arcs_d = mats.m_minus.ncols();
    let projector = if n_arcs_d > 0 {
        let gram = &mats.m_minus * mats.m_minus.transpose();
        let gp = gram
            .pseudo_inverse(1e-10)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Some(mats.m_minus.transpose() * gp * &mats.m_minus)
    } else {
        None
    };

    let mut alg = AdmmState::new(x0.clone(), rho, noise_on);
    let mut x = stack(&x0);
    let mut z = mats.m_plus.tr_mul(&x) * 0.5;
    let mut beta = DVector::zeros(n_arcs_d);

    let mut report = Lemma1Report {
        max_deviation: 0.0,
        max_dual_mismatch: 0.0,
        max_beta_projection_residual: 0.0,
        iterations: n_iters,
    };
    for _ in 0..n_iters {
        let noise = if noise_on {
            NoiseDraw::standard(&mut noise_rng, n, d)
        } else {
            NoiseDraw::zeros(n, d)
        };
        alg = dadmms_step(&alg, topo, potentials, &noise)?;

        let w = stack(&noise.w);
        let r = &mats.m_plus * &z * rho - &mats.m_minus * &beta - &mats.deg * &w * std::f64::consts::SQRT_2;
        let obj = StackedObjective {
            potentials,
            d,
            k: &k_mat,
            r,
        };
        x = newton::minimize(&obj, x)?;
        beta += mats.m_minus.tr_mul(&x) * (rho / 2.0);
        z = mats.m_plus.tr_mul(&x) * 0.5;

        let dev = (stack(&alg.x) - &x).amax();
        let dual = (stack(&alg.p) - &mats.m_minus * &beta).amax();
        let proj = projector
            .as_ref()
            .map_or(0.0, |p| (&beta - p * &beta).amax());
        report.max_deviation = report.max_deviation.max(dev);
        report.max_dual_mismatch = report.max_dual_mismatch.max(dual);
        report.max_beta_projection_residual = report.max_beta_projection_residual.max(proj);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{spectral_constants, TopologyKind};

    fn unit_spectra() -> SpectralConstants {
        SpectralConstants {
            sigma_max_m_plus: 1.0,
            sigma_min_m_minus: 1.0,
            sigma_max_m_minus: 1.0,
            tau_g: 1.0,
        }
    }

    #[test]
    fn kappa_must_exceed_one() {
        assert!(delta_of(1.0, 1.0, &unit_spectra(), 1.0, 1.0).is_err());
        assert!(delta_of(0.5, 1.0, &unit_spectra(), 1.0, 1.0).is_err());
        assert!(optimal_rho(1.0, &unit_spectra(), 1.0).is_err());
    }

    #[test]
    fn optimal_rho_plug_in() {
        assert!((optimal_rho(4.0, &unit_spectra(), 1.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn optimal_kappa_golden_ratio_case() {
        let k = optimal_kappa(2.0, 2.0);
        assert!((k - (1.0 + 0.5 * 5f64.sqrt() + 0.5)).abs() < 1e-14);
        assert!((delta_max(1.0, 1.0) - (0.5 * 5f64.sqrt() - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn first_branch_limit() {
        let s = spectral_constants(&extend_matrices(&Topology::build(TopologyKind::RingCyclic, 5).unwrap(), 1)).unwrap();
        let (first, _) = delta_terms(1e12, 1.0, &s, 1.0, 1.0);
        assert!((first - s.tau_g.powi(-2)).abs() < 1e-10);
    }

    #[test]
    fn large_m_f_satisfies_condition() {
        assert!(sufficient_condition(1e12, 1.1, 1.5).holds);
        assert!(!sufficient_condition(0.1, 1.1, 1.5).holds);
    }

    #[test]
    fn dw_trace_identity_ring5() {
        let t = Topology::build(TopologyKind::RingCyclic, 5).unwrap();
        assert_eq!(expected_dw_norm_sq(&t, 2), 40.0);
    }

    #[test]
    fn non_contractive_rejected() {
        let s = unit_spectra();
        let c = TheoryConstants::new(2.0, 1.0, s, 0.1, 1.0).unwrap();
        assert!(c.a >= 1.0);
        assert!(matches!(
            bound_trajectory(&c, &Topology::build(TopologyKind::RingCyclic, 3).unwrap(), 1, &BoundOptions::new(5, 1.0)),
            Err(Error::NotContractive { .. })
        ));
    }
}
