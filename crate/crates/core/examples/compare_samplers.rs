//! D-ADMMS against the Langevin baselines on Bayesian linear regression over
//! a 5-agent ring: W₂ of the agent-0 ensemble to the exact posterior.
//!
//! ```text
//! cargo run --release --example compare_samplers [trials]
//! ```

use dadmms::graph::TopologyKind;
use dadmms::harness::{compare_algorithms, expand_algorithms, ExperimentConfig, ProblemConfig, RunConfig, TopologyConfig};
use dadmms::metrics::{SeriesKey, METRIC_W2};
use dadmms::samplers::{reference_defaults, Algorithm, ProblemKind};

fn main() -> dadmms::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let algorithms = Algorithm::ALL
        .iter()
        .map(|&a| reference_defaults(a, ProblemKind::Linreg, TopologyKind::RingCyclic, 5))
        .collect::<dadmms::Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        problem: ProblemConfig {
            kind: ProblemKind::Linreg,
            d: Some(2),
            xi: Some(4.0),
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
            trials,
            iters: Some(100),
            ..RunConfig::default()
        },
        theory: None,
    };
    let (_, merged) = compare_algorithms(&expand_algorithms(&config)?)?;

    let checkpoints = [0, 5, 10, 20, 25, 50, 100];
    print!("{:<8}", "iter");
    for (name, _) in &merged.entries {
        print!("{name:>10}");
    }
    println!();
    for k in checkpoints {
        print!("{k:<8}");
        for (_, s) in &merged.entries {
            print!("{:>10.4}", s.get(k, METRIC_W2, SeriesKey::Agent(0)).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
