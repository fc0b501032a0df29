//! Gaussian-mixture benchmarks with known posteriors.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView1};
use rand::distr::{Distribution, weighted::WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{NpmcError, Result};
use crate::math::softmax_in_place;

/// Classes drawn from `priors`, then `X | Y=k ~ N(means[k], covariance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariance: DMatrix<f64>,
    chol: DMatrix<f64>,
    precision: DMatrix<f64>,
}

impl GaussianMixture {
    pub fn new(priors: Vec<f64>, means: Vec<Vec<f64>>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let k = priors.len();
        if k == 0 || means.len() != k {
            return Err(NpmcError::InvalidArgument("one mean per class required".into()));
        }
        let p = means[0].len();
        if means.iter().any(|m| m.len() != p) || covariance.len() != p || covariance.iter().any(|r| r.len() != p) {
            return Err(NpmcError::InvalidArgument("inconsistent mixture dimensions".into()));
        }
        if (priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 || priors.iter().any(|&v| v <= 0.0) {
            return Err(NpmcError::InvalidArgument("priors must be positive and sum to 1".into()));
        }
        let covariance = DMatrix::from_fn(p, p, |i, j| covariance[i][j]);
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| NpmcError::InvalidArgument("covariance is not positive definite".into()))?;
        let precision = chol.inverse();
        Ok(Self {
            priors,
            means,
            covariance,
            chol: chol.l(),
            precision,
        })
    }

    /// Three classes, identity covariance, `p = 5`.
    pub fn case1() -> Self {
        static CASE: OnceLock<GaussianMixture> = OnceLock::new();
        CASE.get_or_init(|| {
            Self::new(
                vec![0.3, 0.3, 0.4],
                vec![
                    vec![-1.0, 2.0, 1.0, 1.0, 1.0],
                    vec![1.0, 1.0, 0.0, 2.0, 0.0],
                    vec![2.0, -1.0, -1.0, 0.0, 0.0],
                ],
                identity(5),
            )
            .expect("case 1 parameters are valid")
        })
        .clone()
    }

    /// Four classes sharing a covariance with 0.1 off the diagonal, `p = 5`.
    pub fn case2() -> Self {
        static CASE: OnceLock<GaussianMixture> = OnceLock::new();
        CASE.get_or_init(|| {
            let cov = (0..5)
                .map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.1 }).collect())
                .collect();
            Self::new(
                vec![0.1, 0.2, 0.3, 0.4],
                vec![
                    vec![1.0, -2.0, 0.0, -1.0, 1.0],
                    vec![-1.0, 1.0, -2.0, -1.0, 1.0],
                    vec![2.0, 0.0, -1.0, 1.0, -1.0],
                    vec![1.0, 0.0, 1.0, 2.0, -2.0],
                ],
                cov,
            )
            .expect("case 2 parameters are valid")
        })
        .clone()
    }

    /// Same mixture with every mean multiplied by `factor`.
    pub fn with_scaled_means(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.means {
            m.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    pub fn num_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn num_features(&self) -> usize {
        self.means[0].len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Lower Cholesky factor of the covariance.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledDataset> {
        if n == 0 {
            return Err(NpmcError::InvalidArgument("sample size must be positive".into()));
        }
        let classes = WeightedIndex::new(&self.priors).expect("priors validated");
        let p = self.num_features();
        // Labels first, then features.
        let labels: Vec<usize> = (0..n).map(|_| classes.sample(rng)).collect();
        let mut features = Array2::zeros((n, p));
        let mut z = DVector::zeros(p);
        for (i, &y) in labels.iter().enumerate() {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let x = &self.chol * &z;
            for j in 0..p {
                features[[i, j]] = self.means[y][j] + x[j];
            }
        }
        LabeledDataset::new(features, labels, self.num_classes())
    }

    /// Exact `P(Y = k | X = x)` by Bayes' rule, computed in log space.
    pub fn posterior(&self, x: ArrayView1<'_, f64>) -> Vec<f64> {
        let p = self.num_features();
        let mut out: Vec<f64> = self
            .means
            .iter()
            .zip(&self.priors)
            .map(|(m, pi)| {
                let d = DVector::from_iterator(p, x.iter().zip(m).map(|(a, b)| a - b));
                pi.ln() - 0.5 * (d.transpose() * &self.precision * &d)[(0, 0)]
            })
            .collect();
        softmax_in_place(&mut out);
        out
    }
}

fn identity(p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Which built-in benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimulationCase {
    #[serde(rename = "case1")]
    Case1,
    #[serde(rename = "case2")]
    Case2,
}

impl SimulationCase {
    pub fn mixture(self) -> GaussianMixture {
        match self {
            SimulationCase::Case1 => GaussianMixture::case1(),
            SimulationCase::Case2 => GaussianMixture::case2(),
        }
    }
}

pub fn gen_case1<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabeledDataset> {
    GaussianMixture::case1().sample(n, rng)
}

pub fn gen_case2<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabeledDataset> {
    GaussianMixture::case2().sample(n, rng)
}

pub fn analytic_posterior(case: SimulationCase, x: ArrayView1<'_, f64>) -> Vec<f64> {
    case.mixture().posterior(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d1 = gen_case1(50, &mut rng).unwrap();
        assert_eq!((d1.num_features(), d1.num_classes()), (5, 3));
        let d2 = gen_case2(50, &mut rng).unwrap();
        assert_eq!((d2.num_features(), d2.num_classes()), (5, 4));
        assert!(gen_case1(0, &mut rng).is_err());
    }

    #[test]
    fn case1_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ds = gen_case1(10_000, &mut rng).unwrap();
        let mix = GaussianMixture::case1();
        for (k, idx) in ds.class_indices().iter().enumerate() {
            for j in 0..5 {
                let col: Vec<f64> = idx.iter().map(|&i| ds.features()[[i, j]]).collect();
                let (m, sd) = crate::math::mean_sd(&col);
                assert!((m - mix.means()[k][j]).abs() < 0.1, "class {k} feature {j} mean {m}");
                assert!((sd * sd - 1.0).abs() < 0.1, "class {k} feature {j} var {}", sd * sd);
            }
        }
    }

    #[test]
    fn case2_frequencies_and_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ds = gen_case2(20_000, &mut rng).unwrap();
        let n = ds.len() as f64;
        for (c, target) in ds.class_counts().iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((*c as f64 / n - target).abs() < 0.02);
        }
        // Within-class covariance of features 0 and 3, pooled.
        let mix = GaussianMixture::case2();
        let mut acc = 0.0;
        for (i, &y) in ds.labels().iter().enumerate() {
            let a = ds.features()[[i, 0]] - mix.means()[y][0];
            let b = ds.features()[[i, 3]] - mix.means()[y][3];
            acc += a * b;
        }
        assert!((acc / n - 0.1).abs() < 0.05, "cov {}", acc / n);
    }

    #[test]
    fn cholesky_reproduces_covariance() {
        let mix = GaussianMixture::case2();
        let l = mix.cholesky_factor();
        let back = l * l.transpose();
        assert!((back - mix.covariance()).abs().max() < 1e-12);
    }

    #[test]
    fn seeds_control_output() {
        let a = gen_case2(20, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = gen_case2(20, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let c = gen_case2(20, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn posterior_mode_at_own_mean() {
        let mix = GaussianMixture::case1();
        let x = Array1::from(mix.means()[1].clone());
        let p = analytic_posterior(SimulationCase::Case1, x.view());
        assert!(p[1] > p[0] && p[1] > p[2]);
    }

    #[test]
    fn posterior_is_probability_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for case in [SimulationCase::Case1, SimulationCase::Case2] {
            let mix = case.mixture();
            for _ in 0..10_000 {
                let x: Array1<f64> = (0..5).map(|_| rng.random_range(-30.0..30.0)).collect();
                let p = mix.posterior(x.view());
                assert!(p.iter().all(|v| *v >= 0.0 && v.is_finite()));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn posterior_matches_monte_carlo_in_small_balls() {
        // P(Y = k | X in B) from class frequencies inside a ball must match the
        // average of the exact posterior over the same points.
        let mix = GaussianMixture::case1();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let ds = mix.sample(2_000_000, &mut rng).unwrap();
        let probes = [
            vec![0.0, 1.5, 0.5, 1.0, 0.5],
            vec![0.5, 0.5, 0.0, 1.0, 0.3],
            vec![1.5, 0.0, -0.5, 0.5, 0.0],
        ];
        for c in probes {
            let radius = 0.6;
            let mut counts = [0usize; 3];
            let mut avg = [0.0; 3];
            for (i, &y) in ds.labels().iter().enumerate() {
                let d2: f64 = ds.row(i).iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
                if d2 < radius * radius {
                    counts[y] += 1;
                    for (a, p) in avg.iter_mut().zip(mix.posterior(ds.row(i))) {
                        *a += p;
                    }
                }
            }
            let total: usize = counts.iter().sum();
            assert!(total > 1000, "ball too sparse: {total}");
            for k in 0..3 {
                let mc = counts[k] as f64 / total as f64;
                let exact = avg[k] / total as f64;
                assert!((mc - exact).abs() < 0.02, "probe {c:?} class {k}: mc {mc} exact {exact}");
            }
        }
    }
}
