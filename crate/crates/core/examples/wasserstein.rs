//! Closed-form W₂ between an empirical ensemble and a Gaussian target as the
//! ensemble grows.
//!
//! ```text
//! cargo run --release --example wasserstein
//! ```

use dadmms::metrics::{empirical_gaussian, wasserstein2_gaussian, GaussianSummary};
use nalgebra::{dmatrix, dvector, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn main() -> dadmms::Result<()> {
    let target = GaussianSummary {
        mean: dvector![1.0, -2.0],
        covariance: dmatrix![2.0, 0.6; 0.6, 1.0],
    };
    let chol = target.covariance.clone().cholesky().expect("positive definite").l();
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    println!("{:>8} {:>10}", "samples", "W2");
    for m in [10, 100, 1_000, 10_000, 100_000] {
        let samples: Vec<DVector<f64>> = (0..m)
            .map(|_| &target.mean + &chol * DVector::from_fn(2, |_, _| rng.sample(StandardNormal)))
            .collect();
        let fit = empirical_gaussian(&samples)?;
        println!("{m:>8} {:>10.5}", wasserstein2_gaussian(&fit, &target)?);
    }
    let shifted = GaussianSummary {
        mean: &target.mean + dvector![3.0, 4.0],
        covariance: target.covariance.clone(),
    };
    println!("\nshift by (3, 4) with equal covariance: W2 = {:.6}", wasserstein2_gaussian(&shifted, &target)?);
    Ok(())
}
