//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails or exceeds its time budget.
//!
//! ```text
//! cargo test --release --test acceptance
//! ```

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dadmms::graph::{extend_matrices, spectral_constants, Topology, TopologyKind};
use dadmms::harness::{compare_algorithms, expand_algorithms, ExperimentConfig, ProblemConfig, RunConfig, TopologyConfig};
use dadmms::metrics::{wasserstein2_gaussian, wasserstein_series, GaussianSummary, SeriesKey, METRIC_ACC_MEAN, METRIC_W2};
use dadmms::problems::{
    generate_linreg, generate_logreg, strong_convexity_constants, AgentData, LinRegProblem,
};
use dadmms::samplers::{initial_iterates, reference_defaults, run_chain, Algorithm, AdmmState, ProblemKind, SamplerSpec};
use dadmms::theory::{
    bound_trajectory, gaussian_tail_term, initial_wg_distance, kkt_residuals, lemma1_equivalence, sufficient_condition,
    BoundOptions, TheoryConstants,
};
use dadmms::{selftest, Result};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Criterion); 11] = [
        ("spectral constants", Duration::from_secs(1), spectral),
        ("sufficient-condition thresholds", Duration::from_secs(1), thresholds),
        ("(Z, beta) iteration equivalence", Duration::from_secs(10), lemma1),
        ("no-edge identity", Duration::from_secs(10), no_edge),
        ("optimizer correctness", Duration::from_secs(10), optimizer),
        ("Wasserstein oracle", Duration::from_secs(30), wasserstein),
        ("posterior oracle", Duration::from_secs(10), posterior),
        ("linreg convergence, ring-5", Duration::from_secs(300), linreg_convergence),
        ("logreg accuracy, ring-5", Duration::from_secs(600), logreg_accuracy),
        ("theory-bound containment", Duration::from_secs(300), bound_containment),
        ("property suites", Duration::from_secs(120), property_suites),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (mut passed, detail) = match result {
            Ok(Ok(o)) => (o.passed, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let over = elapsed > *budget;
        passed &= !over;
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {detail} [{:.2} s / budget {} s{}]",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if over { ", over budget" } else { "" },
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn tau_g(kind: TopologyKind, n: usize) -> Result<f64> {
    Ok(spectral_constants(&extend_matrices(&Topology::build(kind, n)?, 1))?.tau_g)
}

fn spectral() -> Result<Outcome> {
    let ring = tau_g(TopologyKind::RingCyclic, 5)?;
    let full = tau_g(TopologyKind::FullyConnected, 5)?;
    let ok = (ring - 1.70).abs() <= 0.01 && (full - 1.26).abs() <= 0.01;
    outcome(ok, format!("tau_G ring5 = {ring:.4} (1.70 ± 0.01), complete5 = {full:.4} (1.26 ± 0.01)"))
}

/// Locates the τ_f at which the condition stops holding by bisection on the
/// predicate itself.
fn flip_point(m_f: f64, tau_g: f64) -> Option<f64> {
    let (mut lo, mut hi) = (1.0, 10.0);
    if !sufficient_condition(m_f, lo, tau_g).holds || sufficient_condition(m_f, hi, tau_g).holds {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sufficient_condition(m_f, mid, tau_g).holds {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn thresholds() -> Result<Outcome> {
    let ring = flip_point(2.0, tau_g(TopologyKind::RingCyclic, 5)?);
    let full = flip_point(2.0, tau_g(TopologyKind::FullyConnected, 5)?);
    match (ring, full) {
        (Some(r), Some(f)) => {
            let ok = (r - 1.23).abs() <= 0.01 && (f - 6f64.sqrt()).abs() <= 0.01;
            outcome(ok, format!("m_f = 2: flip at tau_f = {r:.4} on ring5 (1.23 ± 0.01), {f:.4} on complete5 (2.4495 ± 0.01)"))
        }
        _ => outcome(false, "predicate does not flip on tau_f in [1, 10]"),
    }
}

fn lemma1() -> Result<Outcome> {
    let p = generate_linreg(2, 4.0, 10.0, 5, 50, 1)?;
    let pots = p.potentials()?;
    let topo = Topology::build(TopologyKind::RingCyclic, 5)?;
    let r = lemma1_equivalence(&pots, &topo, 5.0, 50, 7, true)?;
    let ok = r.max_deviation <= 1e-6 && r.max_dual_mismatch <= 1e-9 && r.max_beta_projection_residual <= 1e-9;
    outcome(
        ok,
        format!(
            "max deviation {:.2e} (<= 1e-6), max |p - M_beta| {:.2e} (<= 1e-9), projection residual {:.2e} over {} iterations",
            r.max_deviation, r.max_dual_mismatch, r.max_beta_projection_residual, r.iterations
        ),
    )
}

fn max_history_gap(a: &dadmms::samplers::History, b: &dadmms::samplers::History) -> f64 {
    a.x.iter()
        .zip(&b.x)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).amax()))
        .fold(0.0, f64::max)
}

fn no_edge() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [1, 3, 5] {
        let topo = Topology::build(TopologyKind::NoEdge, n)?;
        let lin = generate_linreg(2, 4.0, 10.0, n, 50, 2)?.potentials()?;
        let log = generate_logreg(3, 10.0, n, 50, 3)?.potentials();
        for seed in 0..5 {
            let a = run_chain(&SamplerSpec::Dadmms { rho: 5.0 }, &lin, &topo, 50, seed, 1)?;
            let b = run_chain(&SamplerSpec::Admm { rho: 5.0 }, &lin, &topo, 50, seed, 1)?;
            worst = worst.max(max_history_gap(&a, &b));
            let a = run_chain(&SamplerSpec::Dadmms { rho: 0.5 }, &log, &topo, 50, seed, 1)?;
            let b = run_chain(&SamplerSpec::Admm { rho: 0.5 }, &log, &topo, 50, seed, 1)?;
            worst = worst.max(max_history_gap(&a, &b));
        }
    }
    outcome(worst <= 1e-8, format!("max trajectory gap {worst:.2e} (<= 1e-8), linreg and logreg, N in {{1, 3, 5}}"))
}

/// `(Σ ZᵀZ/ξ² + I/λ)⁻¹ Σ Zᵀy/ξ²` from the raw data.
fn pooled_solution(p: &LinRegProblem) -> DVector<f64> {
    let s2 = p.xi * p.xi;
    let mut a = DMatrix::identity(p.d, p.d) / p.lambda_prior;
    let mut b = DVector::zeros(p.d);
    for ag in &p.agents {
        a += ag.z.transpose() * &ag.z / s2;
        b += ag.z.transpose() * &ag.y / s2;
    }
    a.lu().solve(&b).expect("pooled system is positive definite")
}

fn optimizer() -> Result<Outcome> {
    let topologies = [
        ("ring5", Topology::build(TopologyKind::RingCyclic, 5)?),
        ("complete5", Topology::build(TopologyKind::FullyConnected, 5)?),
        ("path5", Topology::custom(5, &[(0, 1), (1, 2), (2, 3), (3, 4)])?),
        ("star6", Topology::custom(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)])?),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, topo) in &topologies {
        let n = topo.n_agents();
        let p = generate_linreg(2, 4.0, 10.0, n, 50, 11)?;
        let pots = p.potentials()?;
        let x_star = pooled_solution(&p);
        let mut st = AdmmState::new(initial_iterates(3, n, 2), 5.0, false);
        for _ in 0..2000 {
            st = dadmms::samplers::cadmm_step(&st, topo, &pots)?;
        }
        let err = st.x.iter().map(|x| (x - &x_star).norm()).fold(0.0, f64::max);
        parts.push(format!("{name} {err:.1e}"));
        worst = worst.max(err);
    }
    outcome(worst <= 1e-6, format!("max_i ||x_i - x*|| after 2000 rounds: {} (<= 1e-6)", parts.join(", ")))
}

/// `(∫₀¹ (F⁻¹(u) − G⁻¹(u))² du)^{1/2}` by the midpoint rule.
fn quantile_w2(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let f = Normal::new(m1, s1).expect("valid normal");
    let g = Normal::new(m2, s2).expect("valid normal");
    let n = 100_000;
    let sum: f64 = (0..n)
        .map(|k| {
            let u = (k as f64 + 0.5) / n as f64;
            (f.inverse_cdf(u) - g.inverse_cdf(u)).powi(2)
        })
        .sum();
    (sum / n as f64).sqrt()
}

fn random_gaussian(r: &mut ChaCha20Rng, d: usize) -> GaussianSummary {
    let a = DMatrix::from_fn(d, d, |_, _| r.sample::<f64, _>(StandardNormal));
    GaussianSummary {
        mean: DVector::from_fn(d, |_, _| r.sample(StandardNormal)),
        covariance: &a * a.transpose() + DMatrix::identity(d, d) * 0.1,
    }
}

fn wasserstein() -> Result<Outcome> {
    let mut r = ChaCha20Rng::seed_from_u64(6);
    let (mut quad_err, mut diag_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (m1, m2) = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let (s1, s2) = (r.random_range(0.1..3.0), r.random_range(0.1..3.0));
        let a = GaussianSummary {
            mean: dvector![m1],
            covariance: dmatrix![s1 * s1],
        };
        let b = GaussianSummary {
            mean: dvector![m2],
            covariance: dmatrix![s2 * s2],
        };
        quad_err = quad_err.max((wasserstein2_gaussian(&a, &b)? - quantile_w2(m1, s1, m2, s2)).abs());
    }
    for _ in 0..100 {
        let d = r.random_range(2..=5);
        let ma: DVector<f64> = DVector::from_fn(d, |_, _| r.sample(StandardNormal));
        let mb: DVector<f64> = DVector::from_fn(d, |_, _| r.sample(StandardNormal));
        let sa: DVector<f64> = DVector::from_fn(d, |_, _| r.random_range(0.2..2.0));
        let sb: DVector<f64> = DVector::from_fn(d, |_, _| r.random_range(0.2..2.0));
        let analytic = ((&ma - &mb).norm_squared() + (&sa - &sb).norm_squared()).sqrt();
        let a = GaussianSummary {
            mean: ma,
            covariance: DMatrix::from_diagonal(&sa.map(|s| s * s)),
        };
        let b = GaussianSummary {
            mean: mb,
            covariance: DMatrix::from_diagonal(&sb.map(|s| s * s)),
        };
        diag_err = diag_err.max((wasserstein2_gaussian(&a, &b)? - analytic).abs());
    }
    let mut axiom_violations = 0;
    for _ in 0..100 {
        let d = r.random_range(1..=4);
        let (p, q, s) = (random_gaussian(&mut r, d), random_gaussian(&mut r, d), random_gaussian(&mut r, d));
        let (pq, qp) = (wasserstein2_gaussian(&p, &q)?, wasserstein2_gaussian(&q, &p)?);
        let (ps, sq) = (wasserstein2_gaussian(&p, &s)?, wasserstein2_gaussian(&s, &q)?);
        let pp = wasserstein2_gaussian(&p, &p)?;
        let ok = pq >= 0.0 && pp <= 1e-6 && (pq - qp).abs() <= 1e-8 * (1.0 + pq) && pq <= ps + sq + 1e-8;
        if !ok {
            axiom_violations += 1;
        }
    }
    let ok = quad_err <= 1e-3 && diag_err <= 1e-3 && axiom_violations == 0;
    outcome(
        ok,
        format!(
            "1-D quadrature error {quad_err:.1e}, diagonal analytic error {diag_err:.1e} (<= 1e-3, 100 pairs each), {axiom_violations} metric-axiom violations in 100 triples"
        ),
    )
}

fn grid_moments(energy: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let h = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|k| lo + k as f64 * h).collect();
    let e: Vec<f64> = xs.iter().map(|&x| energy(x)).collect();
    let e0 = e.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.iter().map(|&v| (e0 - v).exp()).collect();
    let z: f64 = w.iter().sum();
    let mean = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / z;
    let var = xs.iter().zip(&w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / z;
    (mean, var)
}

fn posterior() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let toys = [(1, 4.0, 10.0, 5, 50), (2, 1.0, 2.0, 3, 4), (3, 10.0, 0.5, 2, 3), (4, 0.5, 100.0, 1, 10)];
    for (seed, xi, lambda, n_agents, n_per) in toys {
        let p = generate_linreg(1, xi, lambda, n_agents, n_per, seed)?;
        let post = p.true_posterior()?;
        let energy = |x: f64| {
            let lik: f64 = p
                .agents
                .iter()
                .flat_map(|a| a.z.iter().zip(a.y.iter()).map(|(z, y)| (y - x * z).powi(2)).collect::<Vec<_>>())
                .sum();
            lik / (2.0 * xi * xi) + x * x / (2.0 * lambda)
        };
        let sd = post.covariance[(0, 0)].sqrt();
        let c = post.mean[0];
        let (mean, var) = grid_moments(energy, c - 40.0 * sd - 5.0, c + 40.0 * sd + 5.0, 400_000);
        worst = worst.max((mean - post.mean[0]).abs()).max((var - post.covariance[(0, 0)]).abs());
    }
    outcome(worst <= 1e-4, format!("max mean/variance error {worst:.1e} (<= 1e-4) over {} d=1 toys", toys.len()))
}

fn ring5_comparison(kind: ProblemKind, d: usize, xi: Option<f64>, iters: usize) -> Result<dadmms::harness::MergedSeries> {
    let algorithms = Algorithm::ALL
        .iter()
        .map(|&a| reference_defaults(a, kind, TopologyKind::RingCyclic, 5))
        .collect::<Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        problem: ProblemConfig {
            kind,
            d: Some(d),
            xi,
            lambda: 10.0,
            n_per_agent: 50,
            data_seed: 1,
        },
        topology: TopologyConfig {
            kind: TopologyKind::RingCyclic,
            n_agents: 5,
            edges: None,
        },
        algorithm: None,
        algorithms,
        run: RunConfig {
            trials: 100,
            iters: Some(iters),
            ..RunConfig::default()
        },
        theory: None,
    };
    Ok(compare_algorithms(&expand_algorithms(&config)?)?.1)
}

fn linreg_convergence() -> Result<Outcome> {
    let merged = ring5_comparison(ProblemKind::Linreg, 2, Some(4.0), 25)?;
    let w2 = |alg: &str, k: usize, i: usize| {
        merged
            .get(alg)
            .and_then(|s| s.get(k, METRIC_W2, SeriesKey::Agent(i)))
            .unwrap_or(f64::NAN)
    };
    let mut worst_ratio: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for i in 0..5 {
        let init = w2("dadmms", 0, i);
        let best = (1..=25).map(|k| w2("dadmms", k, i)).fold(f64::INFINITY, f64::min);
        worst_ratio = worst_ratio.max(best / init);
        let ours = w2("dadmms", 20, i);
        for base in ["dsgld", "dsghmc", "dula"] {
            margin = margin.min(w2(base, 20, i) - ours);
        }
    }
    let ok = worst_ratio <= 0.5 && margin > 0.0;
    outcome(
        ok,
        format!(
            "D-ADMMS agent W2 falls to {:.1}% of its initial value by iteration 25 (worst agent, need <= 50%); at iteration 20 agent-0 W2 dadmms {:.3}, dsgld {:.3}, dsghmc {:.3}, dula {:.3}; min baseline margin over agents {margin:.3} (> 0)",
            100.0 * worst_ratio,
            w2("dadmms", 20, 0),
            w2("dsgld", 20, 0),
            w2("dsghmc", 20, 0),
            w2("dula", 20, 0),
        ),
    )
}

fn logreg_accuracy() -> Result<Outcome> {
    let merged = ring5_comparison(ProblemKind::Logreg, 3, None, 50)?;
    let acc = |alg: &str| {
        let s = merged.get(alg);
        (0..5)
            .map(|i| s.and_then(|s| s.get(50, METRIC_ACC_MEAN, SeriesKey::Agent(i))).unwrap_or(f64::NAN))
            .sum::<f64>()
            / 5.0
    };
    let ours = acc("dadmms");
    let admm = acc("admm");
    let baselines: Vec<(&str, f64)> = ["dsgld", "dsghmc", "dula"].iter().map(|&b| (b, acc(b))).collect();
    let ok = (ours - admm).abs() <= 0.02 && baselines.iter().all(|&(_, b)| ours > b);
    let listed: Vec<String> = baselines.iter().map(|(b, v)| format!("{b} {v:.4}")).collect();
    outcome(
        ok,
        format!(
            "mean accuracy at iteration 50: dadmms {ours:.4}, admm {admm:.4} (|diff| {:.4} <= 0.02), {}",
            (ours - admm).abs(),
            listed.join(", ")
        ),
    )
}

fn bound_containment() -> Result<Outcome> {
    let (n, d, trials, iters) = (5, 2, 100, 100);
    let (xi, lambda) = (1.0, 10.0);
    let a = (2.5_f64 - 1.0 / (lambda * n as f64)).sqrt();
    let agents = (0..n)
        .map(|i| AgentData {
            z: dmatrix![a, 0.0; 0.0, a],
            y: dvector![1.0 + 0.1 * i as f64, -0.5 + 0.2 * i as f64],
        })
        .collect();
    let problem = LinRegProblem {
        d,
        xi,
        lambda_prior: lambda,
        agents,
        x_true: DVector::zeros(d),
    };
    let pots = problem.potentials()?;
    let topo = Topology::build(TopologyKind::RingCyclic, n)?;
    let mats = extend_matrices(&topo, d);
    let spectra = spectral_constants(&mats)?;
    let cc = strong_convexity_constants(&pots);
    if !sufficient_condition(cc.m_f, cc.tau_f, spectra.tau_g).holds {
        return outcome(false, format!("constructed instance fails the condition (m_f {:.3}, tau_f {:.3})", cc.m_f, cc.tau_f));
    }
    let c = TheoryConstants::optimal(spectra, cc.m_f, cc.big_m_f)?;

    let target = GaussianSummary::from(problem.true_posterior()?);
    let kkt = kkt_residuals(&pots, &topo, &target.mean)?;
    let x0: Vec<_> = (0..trials).map(|t| initial_iterates(t as u64, n, d)).collect();
    let w0 = initial_wg_distance(&x0, &mats, c.rho, &kkt.z_star, &kkt.beta_star);
    let mut opts = BoundOptions::new(iters, w0);
    opts.tail = Some(gaussian_tail_term(&topo, c.m_f, &target.mean, &target)?);
    let bound = bound_trajectory(&c, &topo, d, &opts)?;

    let spec = SamplerSpec::Dadmms { rho: c.rho };
    let histories = (0..trials)
        .map(|t| run_chain(&spec, &pots, &topo, iters, t as u64, 1))
        .collect::<Result<Vec<_>>>()?;
    let series = wasserstein_series(&histories, &target)?;

    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for (j, &k) in bound.iterations.iter().enumerate() {
        let worst = (0..n)
            .filter_map(|i| series.get(k, METRIC_W2, SeriesKey::Agent(i)))
            .fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(worst / bound.bound[j]);
        if worst > bound.bound[j] {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!(
            "tau_f {:.3}, a = {:.4}; {violations} violations over {iters} iterations, max measured/bound {worst_ratio:.2e}",
            c.tau_f, c.a
        ),
    )
}

fn property_suites() -> Result<Outcome> {
    let report = selftest::run_all();
    let failures: Vec<String> = report.failures().map(|c| format!("{}::{}", c.suite, c.name)).collect();
    let detail = if failures.is_empty() {
        format!("{} checks green", report.checks.len())
    } else {
        format!("{} of {} checks failed: {}", failures.len(), report.checks.len(), failures.join(", "))
    };
    outcome(report.all_passed(), detail)
}
