//! Measured W₂ of D-ADMMS against the theoretical upper bound on an instance
//! built to satisfy the sufficient condition: every agent holds the two
//! points `(a, 0)` and `(0, a)`, so each local Hessian is `2.5·I` and τ_f = 1.
//!
//! ```text
//! cargo run --release --example theory_bound
//! ```

use dadmms::graph::{extend_matrices, spectral_constants, Topology, TopologyKind};
use dadmms::metrics::{wasserstein_series, GaussianSummary, SeriesKey, METRIC_W2};
use dadmms::problems::{strong_convexity_constants, AgentData, LinRegProblem};
use dadmms::samplers::{initial_iterates, run_chain, SamplerSpec};
use dadmms::theory::{
    bound_trajectory, gaussian_tail_term, initial_wg_distance, kkt_residuals, BoundOptions, TheoryConstants,
};
use nalgebra::{dmatrix, dvector, DVector};

fn main() -> dadmms::Result<()> {
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
    let c = TheoryConstants::optimal(spectra, cc.m_f, cc.big_m_f)?;
    println!("m_f = {:.3}, tau_f = {:.3}, kappa = {:.4}, rho = {:.4}, a = {:.4}", c.m_f, c.tau_f, c.kappa, c.rho, c.a);

    let target = GaussianSummary::from(problem.true_posterior()?);
    let kkt = kkt_residuals(&pots, &topo, &target.mean)?;
    let x0: Vec<_> = (0..trials).map(|t| initial_iterates(t as u64, n, d)).collect();
    let w0 = initial_wg_distance(&x0, &mats, c.rho, &kkt.z_star, &kkt.beta_star);
    let mut opts = BoundOptions::new(iters, w0);
    opts.tail = Some(gaussian_tail_term(&topo, c.m_f, &target.mean, &target)?);
    let bound = bound_trajectory(&c, &topo, d, &opts)?;
    println!("w0 = {w0:.4}, Y = {:.4}, R = {:.4}, floor = {:.4}", bound.y, bound.r, bound.floor);

    let spec = SamplerSpec::Dadmms { rho: c.rho };
    let histories = (0..trials)
        .map(|t| run_chain(&spec, &pots, &topo, iters, t as u64, 1))
        .collect::<dadmms::Result<Vec<_>>>()?;
    let series = wasserstein_series(&histories, &target)?;

    let mut violations = 0;
    println!("{:>6} {:>12} {:>12}", "iter", "max W2", "bound");
    for (j, &k) in bound.iterations.iter().enumerate() {
        let worst = (0..n)
            .filter_map(|i| series.get(k, METRIC_W2, SeriesKey::Agent(i)))
            .fold(0.0, f64::max);
        if worst > bound.bound[j] {
            violations += 1;
        }
        if k == 1 || k % 10 == 0 {
            println!("{k:>6} {worst:>12.5} {:>12.5}", bound.bound[j]);
        }
    }
    println!("violations: {violations}");
    Ok(())
}
