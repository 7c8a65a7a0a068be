//! Randomized invariant checks across graph, problems, samplers, metrics and
//! theory. Each check draws from its own seeded stream, so a report is
//! reproducible.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::graph::{
    extend_matrices, mixing_matrix, spectral_constants, spectral_constants_svd, Topology, TopologyKind,
};
use crate::metrics::{wasserstein2_gaussian, GaussianSummary};
use crate::problems::{generate_linreg, generate_logreg, AgentPotential, LocalPotential, Problem};
use crate::rng::{self, standard_normal_vector, StreamRng};
use crate::samplers::{dadmms_step, run_chain, AdmmState, NoiseDraw, SamplerSpec};
use crate::theory::{
    bound_trajectory, delta_max, delta_of, young_gap, optimal_kappa, optimal_rho, sufficient_condition,
    BoundOptions, TheoryConstants,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}::{} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.detail
            )?;
        }
        let n_fail = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), n_fail)
    }
}

const SEED: u64 = 0x5e1f_7e57;

fn stream(tag: &str) -> StreamRng {
    rng::stream(SEED, tag, 0)
}

/// Connected graph on `n` nodes: a ring plus random chords.
fn random_connected(rng: &mut StreamRng, n: usize) -> Result<Topology> {
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if n > 2 {
        edges.push((0, n - 1));
    }
    for i in 0..n {
        for j in i + 2..n {
            if (i, j) != (0, n - 1) && rng.random::<f64>() < 0.2 {
                edges.push((i, j));
            }
        }
    }
    Topology::custom(n, &edges)
}

fn check(suite: &'static str, name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        suite,
        name,
        passed,
        detail,
    }
}

fn graph_suite(out: &mut Vec<Check>) -> Result<()> {
    let mut rng = stream("graph");
    let (mut worst_tau, mut worst_ds, mut worst_deg, mut min_eig) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let d = rng.random_range(1..=3);
        let topo = random_connected(&mut rng, n)?;
        let mats = extend_matrices(&topo, d);
        let a = spectral_constants(&mats)?;
        let b = spectral_constants_svd(&mats)?;
        worst_tau = worst_tau.max((a.tau_g - b.tau_g).abs() / a.tau_g);

        let s = mixing_matrix(&topo);
        let ones = DVector::from_element(n, 1.0);
        let row = (&s * &ones - &ones).amax();
        let col = (s.transpose() * &ones - &ones).amax();
        let sym = (&s - s.transpose()).amax();
        let neg = s.iter().fold(0.0_f64, |m, &v| m.max(-v));
        let mut sparsity = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j && !topo.neighbors(i).contains(&j) {
                    sparsity = sparsity.max(s[(i, j)].abs());
                }
            }
        }
        worst_ds = worst_ds.max(row).max(col).max(sym).max(neg).max(sparsity);

        let dd = (&mats.l_plus + &mats.l_minus) * 0.5 - &mats.deg;
        worst_deg = worst_deg.max(dd.amax());
        for l in [&mats.l_plus, &mats.l_minus] {
            min_eig = min_eig.min(l.clone().symmetric_eigenvalues().min());
        }
    }
    out.push(check(
        "graph",
        "tau_g_eigen_vs_svd",
        worst_tau < 1e-9,
        format!("max rel diff {worst_tau:.1e}"),
    ));
    out.push(check(
        "graph",
        "mixing_doubly_stochastic",
        worst_ds < 1e-12,
        format!("max violation {worst_ds:.1e}"),
    ));
    out.push(check(
        "graph",
        "degree_identity",
        worst_deg == 0.0,
        format!("max |D - (L+ + L-)/2| {worst_deg:.1e}"),
    ));
    out.push(check(
        "graph",
        "laplacians_psd",
        min_eig > -1e-10,
        format!("min eigenvalue {min_eig:.1e}"),
    ));
    let ring = Topology::build(TopologyKind::RingCyclic, 7)?;
    let full = Topology::build(TopologyKind::FullyConnected, 7)?;
    let empty = Topology::build(TopologyKind::NoEdge, 7)?;
    let degrees_ok = (0..7).all(|i| ring.degree(i) == 2 && full.degree(i) == 6 && empty.degree(i) == 0);
    out.push(check("graph", "family_degrees", degrees_ok, "N = 7".into()));
    Ok(())
}

fn test_potentials() -> Result<Vec<AgentPotential>> {
    let lin = Problem::LinReg(generate_linreg(3, 2.0, 10.0, 3, 20, 11)?);
    let log = Problem::LogReg(generate_logreg(3, 10.0, 3, 20, 12)?);
    let mut p = lin.potentials()?;
    p.extend(log.potentials()?);
    Ok(p)
}

fn problems_suite(out: &mut Vec<Check>) -> Result<()> {
    let mut rng = stream("problems");
    let pots = test_potentials()?;
    let (mut fd_grad, mut fd_hess) = (0.0_f64, 0.0_f64);
    let (mut convex_slack, mut lipschitz_slack) = (f64::INFINITY, f64::INFINITY);
    let mut prox_residual = 0.0_f64;
    let h = 1e-5;
    for _ in 0..40 {
        for p in &pots {
            let d = p.dim();
            let x = standard_normal_vector(&mut rng, d) * 0.5;
            let y = standard_normal_vector(&mut rng, d) * 0.5;
            let g = p.grad(&x);
            let hm = p.hess(&x);
            let scale = 1.0 + g.amax();
            let hscale = 1.0 + hm.amax();
            for k in 0..d {
                let mut e = DVector::zeros(d);
                e[k] = h;
                let fd = (p.value(&(&x + &e)) - p.value(&(&x - &e))) / (2.0 * h);
                fd_grad = fd_grad.max((fd - g[k]).abs() / scale);
                let col = (p.grad(&(&x + &e)) - p.grad(&(&x - &e))) / (2.0 * h);
                fd_hess = fd_hess.max((col - hm.column(k)).amax() / hscale);
            }
            let dx = &x - &y;
            let dg = p.grad(&x) - p.grad(&y);
            let n2 = dx.norm_squared();
            convex_slack = convex_slack.min((dg.dot(&dx) - p.strong_convexity() * n2) / n2);
            lipschitz_slack = lipschitz_slack.min((p.smoothness() * dx.norm() - dg.norm()) / dx.norm());

            let gamma = rng.random_range(0.01..2.0);
            let v = standard_normal_vector(&mut rng, d);
            let px = p.prox(gamma, &v)?;
            prox_residual = prox_residual.max((p.grad(&px) - (&v - &px) / gamma).amax());
        }
    }
    out.push(check(
        "problems",
        "gradient_finite_difference",
        fd_grad < 1e-6,
        format!("max rel err {fd_grad:.1e}"),
    ));
    out.push(check(
        "problems",
        "hessian_finite_difference",
        fd_hess < 1e-6,
        format!("max rel err {fd_hess:.1e}"),
    ));
    out.push(check(
        "problems",
        "strong_convexity_sampled",
        convex_slack > -1e-9,
        format!("min slack {convex_slack:.2e}"),
    ));
    out.push(check(
        "problems",
        "gradient_lipschitz_sampled",
        lipschitz_slack > -1e-9,
        format!("min slack {lipschitz_slack:.2e}"),
    ));
    out.push(check(
        "problems",
        "prox_optimality",
        prox_residual < 1e-7,
        format!("max |grad f(p) - (v-p)/gamma| {prox_residual:.1e}"),
    ));
    Ok(())
}

fn samplers_suite(out: &mut Vec<Check>) -> Result<()> {
    let problem = Problem::LinReg(generate_linreg(2, 4.0, 10.0, 5, 50, 3)?);
    let pots = problem.potentials()?;
    let topo = Topology::build(TopologyKind::RingCyclic, 5)?;
    let specs = [
        SamplerSpec::Dadmms { rho: 5.0 },
        SamplerSpec::Dsgld { eta: 0.009 },
        SamplerSpec::Dsghmc { eta: 0.1, gamma: 7.0 },
    ];
    let mut same = true;
    for s in &specs {
        same &= run_chain(s, &pots, &topo, 10, 42, 1)? == run_chain(s, &pots, &topo, 10, 42, 1)?;
    }
    out.push(check("samplers", "determinism", same, "same seed, same history".into()));

    let mut rng = stream("samplers");
    let x0 = (0..5).map(|_| standard_normal_vector(&mut rng, 2)).collect();
    let mut st = AdmmState::new(x0, 5.0, true);
    let mut drift = 0.0_f64;
    for _ in 0..30 {
        st = dadmms_step(&st, &topo, &pots, &NoiseDraw::standard(&mut rng, 5, 2))?;
        let sum = st.p.iter().fold(DVector::zeros(2), |a, p| a + p);
        drift = drift.max(sum.amax());
    }
    out.push(check(
        "samplers",
        "dual_sum_conserved",
        drift < 1e-9,
        format!("max |sum p_i| {drift:.1e}"),
    ));
    Ok(())
}

fn random_gaussian(rng: &mut StreamRng, d: usize) -> GaussianSummary {
    let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    GaussianSummary {
        mean: standard_normal_vector(rng, d),
        covariance: &a * a.transpose() + DMatrix::identity(d, d) * 0.1,
    }
}

fn metrics_suite(out: &mut Vec<Check>) -> Result<()> {
    let mut rng = stream("metrics");
    let (mut self_dist, mut asym, mut tri, mut neg) = (0.0_f64, 0.0_f64, f64::INFINITY, 0.0_f64);
    for _ in 0..200 {
        let d = rng.random_range(1..=4);
        let a = random_gaussian(&mut rng, d);
        let b = random_gaussian(&mut rng, d);
        let c = random_gaussian(&mut rng, d);
        let ab = wasserstein2_gaussian(&a, &b)?;
        let ba = wasserstein2_gaussian(&b, &a)?;
        let bc = wasserstein2_gaussian(&b, &c)?;
        let ac = wasserstein2_gaussian(&a, &c)?;
        self_dist = self_dist.max(wasserstein2_gaussian(&a, &a)?);
        asym = asym.max((ab - ba).abs());
        tri = tri.min(ab + bc - ac);
        neg = neg.max(-ab);
    }
    out.push(check(
        "metrics",
        "identity",
        self_dist < 1e-6,
        format!("max W(a, a) {self_dist:.1e}"),
    ));
    out.push(check("metrics", "symmetry", asym < 1e-9, format!("max |W(a,b) - W(b,a)| {asym:.1e}")));
    out.push(check(
        "metrics",
        "triangle_inequality",
        tri > -1e-9,
        format!("min slack {tri:.2e}"),
    ));
    out.push(check("metrics", "non_negative", neg <= 0.0, String::new()));
    Ok(())
}

fn theory_suite(out: &mut Vec<Check>) -> Result<()> {
    let mut rng = stream("theory");
    let mut young_min = f64::INFINITY;
    for _ in 0..100_000 {
        let d = rng.random_range(1..=4);
        let x = standard_normal_vector(&mut rng, d) * rng.random_range(0.01..10.0);
        let y = standard_normal_vector(&mut rng, d) * rng.random_range(0.01..10.0);
        let kappa = 1.0 + rng.random_range(1e-6..100.0);
        young_min = young_min.min(young_gap(&x, &y, kappa));
    }
    out.push(check(
        "theory",
        "young_inequality",
        young_min >= -1e-12,
        format!("min gap {young_min:.2e} over 1e5 triples"),
    ));

    let ring = spectral_constants(&extend_matrices(&Topology::build(TopologyKind::RingCyclic, 5)?, 1))?;
    let mut agree = true;
    for _ in 0..10_000 {
        let m_f = rng.random_range(0.05..10.0);
        let tau_f = rng.random_range(1.0..5.0);
        let kappa = 1.0 + rng.random_range(0.01..20.0);
        let rho = rng.random_range(0.05..20.0);
        let c = TheoryConstants::new(kappa, rho, ring, m_f, tau_f * m_f)?;
        agree &= (c.a < 1.0) == (2.0 * m_f * c.delta > 1.0);
        let s = sufficient_condition(m_f, tau_f, ring.tau_g);
        agree &= s.holds == (2.0 * m_f * delta_max(tau_f, ring.tau_g) > 1.0);
    }
    out.push(check(
        "theory",
        "contraction_iff_2mdelta",
        agree,
        "1e4 random draws".into(),
    ));

    let mut worst_dm = 0.0_f64;
    let mut above = 0.0_f64;
    for _ in 0..40 {
        let n = rng.random_range(2..=20);
        let topo = random_connected(&mut rng, n)?;
        let s = spectral_constants(&extend_matrices(&topo, 1))?;
        let m_f = rng.random_range(0.1..5.0);
        let tau_f = rng.random_range(1.0..6.0);
        let big = tau_f * m_f;
        let k = optimal_kappa(tau_f, s.tau_g);
        let dm = delta_max(tau_f, s.tau_g);
        let at_opt = delta_of(k, optimal_rho(k, &s, big)?, &s, m_f, big)?;
        worst_dm = worst_dm.max((at_opt - dm).abs() / dm);
        for _ in 0..250 {
            let kappa = 1.0 + 10f64.powf(rng.random_range(-3.0..3.0));
            let rho = 10f64.powf(rng.random_range(-3.0..3.0));
            above = above.max(delta_of(kappa, rho, &s, m_f, big)? - dm);
        }
    }
    out.push(check(
        "theory",
        "delta_max_attained",
        worst_dm < 1e-9,
        format!("max rel diff {worst_dm:.1e}"),
    ));
    out.push(check(
        "theory",
        "delta_max_is_maximum",
        above <= 1e-12,
        format!("max excess {above:.1e} over 1e4 draws"),
    ));

    let topo = Topology::build(TopologyKind::RingCyclic, 5)?;
    let c = TheoryConstants::optimal(ring, 2.5, 2.5)?;
    let mut opts = BoundOptions::new(200, 3.0);
    opts.mc_samples = 10_000;
    let b = bound_trajectory(&c, &topo, 2, &opts)?;
    let monotone = b.bound.windows(2).all(|w| w[1] <= w[0]) && b.bound.iter().all(|&v| v >= b.floor);
    out.push(check("theory", "bound_non_increasing", monotone, format!("floor {:.3}", b.floor)));
    Ok(())
}

/// Runs every suite. An error inside a suite is reported as a failed check.
pub fn run_all() -> Report {
    let suites: [(&'static str, fn(&mut Vec<Check>) -> Result<()>); 5] = [
        ("graph", graph_suite),
        ("problems", problems_suite),
        ("samplers", samplers_suite),
        ("metrics", metrics_suite),
        ("theory", theory_suite),
    ];
    let mut checks = Vec::new();
    for (suite, f) in suites {
        if let Err(e) = f(&mut checks) {
            checks.push(check(suite, "suite_error", false, e.to_string()));
        }
    }
    Report { checks }
}
