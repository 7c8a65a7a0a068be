//! Gaussian summaries of trial ensembles, the closed-form 2-Wasserstein
//! distance between Gaussians, and accuracy statistics.

use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::problems::{predict_accuracy, GaussianPosterior, LogRegProblem};
use crate::samplers::History;
use crate::{Error, Result};

/// Negative eigenvalues down to this (relative to the spectral scale) are clamped.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl From<GaussianPosterior> for GaussianSummary {
    fn from(p: GaussianPosterior) -> Self {
        Self {
            mean: p.mean,
            covariance: p.covariance,
        }
    }
}

impl GaussianSummary {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposes a symmetric matrix and applies `g` to the clamped
/// eigenvalues. Fails if an eigenvalue is below `-PSD_TOL·max(1, scale)`.
fn psd_spectral_map(m: &DMatrix<f64>, g: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let eig = symmetrize(m).symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let mapped = eig.eigenvalues.map(|l| g(l.max(0.0)));
    let q = &eig.eigenvectors;
    Ok(symmetrize(&(q * DMatrix::from_diagonal(&mapped) * q.transpose())))
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    psd_spectral_map(m, f64::sqrt)
}

/// Sample mean and `1/(M−1)` sample covariance of an ensemble.
pub fn empirical_gaussian(samples: &[DVector<f64>]) -> Result<GaussianSummary> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples for a covariance, got {m}"
        )));
    }
    let d = samples[0].len();
    let mean = samples.iter().fold(DVector::zeros(d), |acc, s| acc + s) / m as f64;
    let mut cov = DMatrix::zeros(d, d);
    for s in samples {
        let c = s - &mean;
        cov += &c * c.transpose();
    }
    cov /= (m - 1) as f64;
    let mut cov = symmetrize(&cov);
    if cov.clone().symmetric_eigenvalues().min() < 0.0 {
        cov = psd_spectral_map(&cov, |l| l)?;
    }
    Ok(GaussianSummary {
        mean,
        covariance: cov,
    })
}

/// Closed-form 2-Wasserstein distance between Gaussians:
///
/// ```text
/// W² = ‖m_a − m_b‖² + tr(Σ_a + Σ_b − 2(Σ_b^{½} Σ_a Σ_b^{½})^{½})
/// ```
///
/// Singular covariances are allowed. The trace term is clamped at zero.
pub fn wasserstein2_gaussian(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let sb = sqrt_psd(&b.covariance)?;
    let cross = sqrt_psd(&(&sb * &a.covariance * &sb))?;
    let trace_term = (a.covariance.trace() + b.covariance.trace() - 2.0 * cross.trace()).max(0.0);
    Ok(((&a.mean - &b.mean).norm_squared() + trace_term).sqrt())
}

/// `Σ_i x_i / N`.
pub fn average_iterate(x: &[DVector<f64>]) -> DVector<f64> {
    assert!(!x.is_empty(), "average of zero agents");
    x.iter().fold(DVector::zeros(x[0].len()), |acc, v| acc + v) / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeriesKey {
    Agent(usize),
    Average,
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKey::Agent(i) => write!(f, "{i}"),
            SeriesKey::Average => f.write_str("avg"),
        }
    }
}

impl std::str::FromStr for SeriesKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "avg" {
            return Ok(SeriesKey::Average);
        }
        s.parse()
            .map(SeriesKey::Agent)
            .map_err(|_| Error::Parse(format!("bad series key `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord {
    pub iteration: usize,
    pub metric: String,
    pub key: SeriesKey,
    pub value: f64,
}

pub const METRIC_W2: &str = "w2";
pub const METRIC_ACC_MEAN: &str = "accuracy_mean";
pub const METRIC_ACC_STD: &str = "accuracy_std";

pub const CSV_HEADER: &str = "iteration,metric_name,agent_or_avg,value";

/// Per-iteration metric table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceSeries {
    pub records: Vec<SeriesRecord>,
}

impl ConvergenceSeries {
    pub fn get(&self, iteration: usize, metric: &str, key: SeriesKey) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.iteration == iteration && r.metric == metric && r.key == key)
            .map(|r| r.value)
    }

    /// `(iteration, value)` pairs of one series, in recorded order.
    pub fn series(&self, metric: &str, key: SeriesKey) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter(|r| r.metric == metric && r.key == key)
            .map(|r| (r.iteration, r.value))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{}", r.iteration, r.metric, r.key, r.value)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
        if header.trim() != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected header `{header}`")));
        }
        let mut records = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("bad record `{line}`")));
            }
            records.push(SeriesRecord {
                iteration: f[0].parse().map_err(|e| Error::Parse(format!("{e}")))?,
                metric: f[1].to_string(),
                key: f[2].parse()?,
                value: f[3].parse().map_err(|e| Error::Parse(format!("{e}")))?,
            });
        }
        Ok(Self { records })
    }
}

fn check_histories(histories: &[History]) -> Result<()> {
    let first = histories
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trials".into()))?;
    if histories.iter().any(|h| h.iterations != first.iterations) {
        return Err(Error::InvalidArgument("trials recorded different iterations".into()));
    }
    Ok(())
}

/// W₂ between each agent's trial ensemble (and the average-iterate ensemble)
/// and `target`, at every recorded iteration.
pub fn wasserstein_series(histories: &[History], target: &GaussianSummary) -> Result<ConvergenceSeries> {
    check_histories(histories)?;
    let h0 = &histories[0];
    let n = h0.n_agents();
    let mut records = Vec::new();
    for (r, &k) in h0.iterations.iter().enumerate() {
        for i in 0..n {
            let ens: Vec<_> = histories.iter().map(|h| h.x[r][i].clone()).collect();
            let g = empirical_gaussian(&ens)?;
            records.push(SeriesRecord {
                iteration: k,
                metric: METRIC_W2.into(),
                key: SeriesKey::Agent(i),
                value: wasserstein2_gaussian(&g, target)?,
            });
        }
        let ens: Vec<_> = histories.iter().map(|h| average_iterate(&h.x[r])).collect();
        let g = empirical_gaussian(&ens)?;
        records.push(SeriesRecord {
            iteration: k,
            metric: METRIC_W2.into(),
            key: SeriesKey::Average,
            value: wasserstein2_gaussian(&g, target)?,
        });
    }
    Ok(ConvergenceSeries { records })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Mean and standard deviation (over trials) of each agent's prediction
/// accuracy on the pooled dataset, plus the same for the average iterate.
pub fn accuracy_series(histories: &[History], problem: &LogRegProblem) -> Result<ConvergenceSeries> {
    check_histories(histories)?;
    let (z, labels) = problem.pooled();
    let h0 = &histories[0];
    let n = h0.n_agents();
    let mut records = Vec::new();
    let mut push = |k: usize, key: SeriesKey, acc: &[f64]| {
        let (mean, std) = mean_std(acc);
        records.push(SeriesRecord {
            iteration: k,
            metric: METRIC_ACC_MEAN.into(),
            key,
            value: mean,
        });
        records.push(SeriesRecord {
            iteration: k,
            metric: METRIC_ACC_STD.into(),
            key,
            value: std,
        });
    };
    for (r, &k) in h0.iterations.iter().enumerate() {
        for i in 0..n {
            let acc = histories
                .iter()
                .map(|h| predict_accuracy(&h.x[r][i], &z, &labels))
                .collect::<Result<Vec<_>>>()?;
            push(k, SeriesKey::Agent(i), &acc);
        }
        let acc = histories
            .iter()
            .map(|h| predict_accuracy(&average_iterate(&h.x[r]), &z, &labels))
            .collect::<Result<Vec<_>>>()?;
        push(k, SeriesKey::Average, &acc);
    }
    Ok(ConvergenceSeries { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn gauss(mean: DVector<f64>, cov: DMatrix<f64>) -> GaussianSummary {
        GaussianSummary { mean, covariance: cov }
    }

    #[test]
    fn degenerate_ensemble() {
        let v = dvector![1.0, -2.0, 3.0];
        let g = empirical_gaussian(&vec![v.clone(); 7]).unwrap();
        assert_eq!(g.mean, v);
        assert_eq!(g.covariance, DMatrix::zeros(3, 3));
    }

    #[test]
    fn two_point_ensemble() {
        let g = empirical_gaussian(&[dvector![1.0, 0.0], dvector![-1.0, 0.0]]).unwrap();
        assert_eq!(g.mean, dvector![0.0, 0.0]);
        assert_eq!(g.covariance, DMatrix::from_diagonal(&dvector![2.0, 0.0]));
        assert!(empirical_gaussian(&[dvector![1.0]]).is_err());
    }

    #[test]
    fn identical_gaussians_have_zero_distance() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let a = gauss(dvector![1.0, 2.0], c);
        assert!(wasserstein2_gaussian(&a, &a).unwrap() < 1e-7);
    }

    #[test]
    fn isotropic_pair_is_mean_distance() {
        let a = gauss(dvector![0.0, 0.0], DMatrix::identity(2, 2));
        let b = gauss(dvector![3.0, 4.0], DMatrix::identity(2, 2));
        assert!((wasserstein2_gaussian(&a, &b).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn singular_covariances_are_fine() {
        let a = gauss(dvector![0.0, 0.0], DMatrix::zeros(2, 2));
        let b = gauss(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![4.0, 0.0]));
        assert!((wasserstein2_gaussian(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        let bad = gauss(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![-1.0, 1.0]));
        assert!(matches!(wasserstein2_gaussian(&a, &bad), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn average_iterate_examples() {
        assert_eq!(average_iterate(&[dvector![1.0, 0.0], dvector![0.0, 1.0]]), dvector![0.5, 0.5]);
        assert_eq!(average_iterate(&vec![dvector![2.0]; 4]), dvector![2.0]);
    }

    #[test]
    fn csv_round_trip_and_header() {
        let s = ConvergenceSeries {
            records: vec![
                SeriesRecord {
                    iteration: 0,
                    metric: METRIC_W2.into(),
                    key: SeriesKey::Agent(3),
                    value: 0.1,
                },
                SeriesRecord {
                    iteration: 5,
                    metric: METRIC_W2.into(),
                    key: SeriesKey::Average,
                    value: 1.0 / 3.0,
                },
            ],
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iteration,metric_name,agent_or_avg,value\n0,w2,3,0.1\n"));
        assert_eq!(ConvergenceSeries::read_csv(buf.as_slice()).unwrap(), s);
    }
}
