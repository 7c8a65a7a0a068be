//! Loads a TOML experiment config, runs it and prints the average-iterate W₂
//! series. Without an argument a small inline config is used.
//!
//! ```text
//! cargo run --release --example run_config [config.toml]
//! ```

use dadmms::harness::{run_experiment, ExperimentConfig};
use dadmms::metrics::{SeriesKey, METRIC_W2};

const INLINE: &str = r#"
[problem]
kind = "linreg"
d = 2
xi = 4.0

[topology]
kind = "fully_connected"
n_agents = 5

[algorithm]
name = "dadmms"
rho = 5.0

[run]
trials = 50
iters = 40
seed = 7
"#;

fn main() -> dadmms::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::from_toml_str(INLINE)?,
    };
    let (manifest, outcome) = run_experiment(&config)?;
    println!(
        "{} trials of {} in {:.2} s on {} workers",
        manifest.trial_seeds.len(),
        manifest.algorithms.join(", "),
        manifest.wall_clock_seconds,
        manifest.workers
    );
    for (k, w2) in outcome.series.series(METRIC_W2, SeriesKey::Average) {
        if k % 5 == 0 {
            println!("{k:>4} {w2:.5}");
        }
    }
    Ok(())
}
