//! Contraction constants and the sufficient condition across τ_f for the
//! ring and the complete graph on five agents.
//!
//! ```text
//! cargo run --release --example theory_table [m_f]
//! ```

use dadmms::graph::{extend_matrices, spectral_constants, Topology, TopologyKind};
use dadmms::theory::{delta_max, sufficient_condition, tau_f_threshold, TheoryConstants};

fn main() -> dadmms::Result<()> {
    let m_f: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    for kind in [TopologyKind::RingCyclic, TopologyKind::FullyConnected] {
        let spectra = spectral_constants(&extend_matrices(&Topology::build(kind, 5)?, 1))?;
        let threshold = tau_f_threshold(m_f, spectra.tau_g);
        println!(
            "{kind}, N = 5: tau_G = {:.4}, condition holds for tau_f < {}",
            spectra.tau_g,
            threshold.map_or("(never)".to_string(), |t| format!("{t:.4}"))
        );
        println!("{:>6} {:>8} {:>8} {:>10} {:>8} {:>6}", "tau_f", "kappa", "rho", "delta_max", "a", "holds");
        for tau_f in [1.0, 1.1, 1.2, 1.5, 2.0, 2.4, 3.0] {
            let c = TheoryConstants::optimal(spectra, m_f, tau_f * m_f)?;
            println!(
                "{tau_f:>6.2} {:>8.4} {:>8.4} {:>10.5} {:>8.4} {:>6}",
                c.kappa,
                c.rho,
                delta_max(tau_f, spectra.tau_g),
                c.a,
                sufficient_condition(m_f, tau_f, spectra.tau_g).holds
            );
        }
        println!();
    }
    Ok(())
}
