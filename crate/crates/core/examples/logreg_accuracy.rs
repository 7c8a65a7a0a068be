//! Prediction accuracy of every sampler on Bayesian logistic regression over
//! a 5-agent ring, averaged over trials.
//!
//! ```text
//! cargo run --release --example logreg_accuracy [trials]
//! ```

use dadmms::graph::TopologyKind;
use dadmms::harness::{compare_algorithms, expand_algorithms, ExperimentConfig, ProblemConfig, RunConfig, TopologyConfig};
use dadmms::metrics::{SeriesKey, METRIC_ACC_MEAN, METRIC_ACC_STD};
use dadmms::samplers::{reference_defaults, Algorithm, ProblemKind};

fn main() -> dadmms::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let algorithms = Algorithm::ALL
        .iter()
        .map(|&a| reference_defaults(a, ProblemKind::Logreg, TopologyKind::RingCyclic, 5))
        .collect::<dadmms::Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        problem: ProblemConfig {
            kind: ProblemKind::Logreg,
            d: Some(3),
            xi: None,
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
            iters: Some(200),
            ..RunConfig::default()
        },
        theory: None,
    };
    let (_, merged) = compare_algorithms(&expand_algorithms(&config)?)?;

    println!("mean accuracy of agent 0 (std in parentheses)");
    print!("{:<8}", "iter");
    for (name, _) in &merged.entries {
        print!("{name:>16}");
    }
    println!();
    for k in [0, 10, 25, 50, 100, 200] {
        print!("{k:<8}");
        for (_, s) in &merged.entries {
            let m = s.get(k, METRIC_ACC_MEAN, SeriesKey::Agent(0)).unwrap_or(f64::NAN);
            let sd = s.get(k, METRIC_ACC_STD, SeriesKey::Agent(0)).unwrap_or(f64::NAN);
            print!("{:>16}", format!("{m:.3} ({sd:.3})"));
        }
        println!();
    }
    Ok(())
}
