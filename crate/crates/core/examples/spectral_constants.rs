//! Graph condition number τ_G for rings, complete graphs and paths, and the
//! Metropolis mixing matrix of a ring.
//!
//! ```text
//! cargo run --release --example spectral_constants [n_agents]
//! ```

use dadmms::graph::{extend_matrices, mixing_matrix, spectral_constants, Topology, TopologyKind};

fn main() -> dadmms::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    println!("{:<16} {:>6} {:>12} {:>12} {:>8}", "topology", "edges", "σmax(M+)", "σmin(M-)", "τ_G");
    let path: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    let graphs = [
        ("ring_cyclic", Topology::build(TopologyKind::RingCyclic, n)?),
        ("fully_connected", Topology::build(TopologyKind::FullyConnected, n)?),
        ("path", Topology::custom(n, &path)?),
    ];
    for (name, topo) in &graphs {
        let s = spectral_constants(&extend_matrices(topo, 1))?;
        println!(
            "{:<16} {:>6} {:>12.4} {:>12.4} {:>8.4}",
            name,
            topo.edges().len(),
            s.sigma_max_m_plus,
            s.sigma_min_m_minus,
            s.tau_g
        );
    }
    let ring = Topology::build(TopologyKind::RingCyclic, n)?;
    println!("\nMetropolis mixing matrix, ring of {n}:\n{:.3}", mixing_matrix(&ring));
    Ok(())
}
