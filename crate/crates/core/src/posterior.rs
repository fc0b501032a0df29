//! Posterior estimators `x -> (P(Y=1|x), ..., P(Y=K|x))`.
//!
//! Every fitted model implements [`Posterior`]. [`PosteriorModel`] wraps
//! the built-in estimators so a fitted classifier can be serialized along
//! with its base model.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{class_priors, LabeledDataset};
use crate::error::{NpmcError, Result};
use crate::math::{log_sum_exp, mean_sd, quantile_sorted, softmax_in_place};

pub trait Posterior {
    fn num_classes(&self) -> usize;

    fn num_features(&self) -> usize;

    fn method_name(&self) -> &'static str;

    /// Write the posterior at `x` into `out` (`out.len() == num_classes()`).
    /// Callers guarantee `x.len() == num_features()`.
    fn predict_proba_into(&self, x: ArrayView1<'_, f64>, out: &mut [f64]);

    fn predict_proba(&self, x: ArrayView1<'_, f64>) -> Result<Vec<f64>> {
        if x.len() != self.num_features() {
            return Err(NpmcError::DimensionMismatch {
                expected: self.num_features(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.num_classes()];
        self.predict_proba_into(x, &mut out);
        Ok(out)
    }
}

/// Posterior rows for every row of `x`.
pub fn predict_proba_batch<M: Posterior + ?Sized>(model: &M, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.ncols() != model.num_features() {
        return Err(NpmcError::DimensionMismatch {
            expected: model.num_features(),
            got: x.ncols(),
        });
    }
    let mut out = Array2::zeros((x.nrows(), model.num_classes()));
    for (row, mut dst) in x.rows().into_iter().zip(out.rows_mut()) {
        model.predict_proba_into(row, dst.as_slice_mut().expect("standard layout"));
    }
    Ok(out)
}

/// Which estimator to fit, with its options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Estimator {
    Logistic(LogisticOptions),
    Lda,
    Knn { k: Option<usize> },
    /// Naive Bayes with Gaussian-kernel class-conditional densities.
    KernelNb,
}

impl Estimator {
    /// Parse the short names used in configs: `logistic`, `lda`, `knn`, `gknb`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "logistic" => Some(Estimator::Logistic(LogisticOptions::default())),
            "lda" => Some(Estimator::Lda),
            "knn" => Some(Estimator::Knn { k: None }),
            "gknb" | "nnb" | "kernel_nb" => Some(Estimator::KernelNb),
            _ => None,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Estimator::Logistic(_) => "logistic",
            Estimator::Lda => "lda",
            Estimator::Knn { .. } => "knn",
            Estimator::KernelNb => "gknb",
        }
    }

    pub fn fit(&self, ds: &LabeledDataset) -> Result<PosteriorModel> {
        Ok(match self {
            Estimator::Logistic(opt) => {
                let fit = fit_multinomial_logistic(ds, opt)?;
                if !fit.converged {
                    log::warn!(
                        "logistic regression stopped after {} iterations with gradient norm {:.3e}",
                        fit.iterations,
                        fit.gradient_norm
                    );
                }
                PosteriorModel::Logistic(fit.model)
            }
            Estimator::Lda => PosteriorModel::Lda(fit_lda(ds)?),
            Estimator::Knn { k } => PosteriorModel::Knn(fit_knn(ds, *k)?),
            Estimator::KernelNb => PosteriorModel::KernelNb(fit_gaussian_kernel_nb(ds)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PosteriorModel {
    Logistic(LogisticModel),
    Lda(LdaModel),
    Knn(KnnModel),
    KernelNb(KernelNbModel),
}

impl Posterior for PosteriorModel {
    fn num_classes(&self) -> usize {
        match self {
            PosteriorModel::Logistic(m) => m.num_classes(),
            PosteriorModel::Lda(m) => m.num_classes(),
            PosteriorModel::Knn(m) => m.num_classes(),
            PosteriorModel::KernelNb(m) => m.num_classes(),
        }
    }

    fn num_features(&self) -> usize {
        match self {
            PosteriorModel::Logistic(m) => m.num_features(),
            PosteriorModel::Lda(m) => m.num_features(),
            PosteriorModel::Knn(m) => m.num_features(),
            PosteriorModel::KernelNb(m) => m.num_features(),
        }
    }

    fn method_name(&self) -> &'static str {
        match self {
            PosteriorModel::Logistic(m) => m.method_name(),
            PosteriorModel::Lda(m) => m.method_name(),
            PosteriorModel::Knn(m) => m.method_name(),
            PosteriorModel::KernelNb(m) => m.method_name(),
        }
    }

    fn predict_proba_into(&self, x: ArrayView1<'_, f64>, out: &mut [f64]) {
        match self {
            PosteriorModel::Logistic(m) => m.predict_proba_into(x, out),
            PosteriorModel::Lda(m) => m.predict_proba_into(x, out),
            PosteriorModel::Knn(m) => m.predict_proba_into(x, out),
            PosteriorModel::KernelNb(m) => m.predict_proba_into(x, out),
        }
    }
}

// ---------------------------------------------------------------------------
// Multinomial logistic regression

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticOptions {
    pub max_iters: usize,
    /// Stop once the gradient's max-norm falls below this.
    pub tolerance: f64,
    pub ridge: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tolerance: 1e-6,
            ridge: 1e-6,
        }
    }
}

/// Softmax regression with the last class as reference. `coefficients` has
/// one row per non-reference class; column 0 is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub coefficients: Array2<f64>,
}

impl Posterior for LogisticModel {
    fn num_classes(&self) -> usize {
        self.coefficients.nrows() + 1
    }

    fn num_features(&self) -> usize {
        self.coefficients.ncols() - 1
    }

    fn method_name(&self) -> &'static str {
        "logistic"
    }

    fn predict_proba_into(&self, x: ArrayView1<'_, f64>, out: &mut [f64]) {
        let last = out.len() - 1;
        for (k, beta) in self.coefficients.rows().into_iter().enumerate() {
            out[k] = beta[0] + beta.slice(ndarray::s![1..]).dot(&x);
        }
        out[last] = 0.0;
        softmax_in_place(out);
    }
}

#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub model: LogisticModel,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Penalized mean log-likelihood after each accepted step, starting at the
    /// initial point.
    pub objective_trace: Vec<f64>,
}

/// Maximum (ridge-penalized) likelihood by full-batch gradient ascent with a
/// backtracking line search. Features are standardized internally and the
/// coefficients mapped back, which leaves the fitted posterior unchanged.
pub fn fit_multinomial_logistic(ds: &LabeledDataset, opt: &LogisticOptions) -> Result<LogisticFit> {
    if !(opt.ridge >= 0.0) || !(opt.tolerance > 0.0) || opt.max_iters == 0 {
        return Err(NpmcError::InvalidArgument(format!("bad logistic options {opt:?}")));
    }
    let k = ds.num_classes();
    if k < 2 {
        return Err(NpmcError::Estimator("logistic regression needs at least two classes".into()));
    }
    let x = ds.features();
    let (n, p) = x.dim();
    let y = ds.labels();

    let mut center = vec![0.0; p];
    let mut scale = vec![1.0; p];
    for j in 0..p {
        let (m, sd) = mean_sd(&x.column(j).to_vec());
        center[j] = m;
        scale[j] = if sd > 0.0 { sd } else { 1.0 };
    }
    // Design matrix with intercept column, standardized.
    let design = Array2::from_shape_fn((n, p + 1), |(i, j)| {
        if j == 0 {
            1.0
        } else {
            (x[[i, j - 1]] - center[j - 1]) / scale[j - 1]
        }
    });

    let m = k - 1;
    let dim = m * (p + 1);
    let objective = |theta: &[f64], grad: Option<&mut [f64]>| -> f64 {
        let mut ll = 0.0;
        let mut scores = vec![0.0; k];
        let mut g_acc = grad.as_ref().map(|_| vec![0.0; dim]);
        for i in 0..n {
            let row = design.row(i);
            for c in 0..m {
                let beta = &theta[c * (p + 1)..(c + 1) * (p + 1)];
                scores[c] = beta.iter().zip(row.iter()).map(|(b, v)| b * v).sum();
            }
            scores[m] = 0.0;
            let lse = log_sum_exp(&scores);
            ll += scores[y[i]] - lse;
            if let Some(g) = g_acc.as_mut() {
                for c in 0..m {
                    let resid = f64::from(u8::from(y[i] == c)) - (scores[c] - lse).exp();
                    let gc = &mut g[c * (p + 1)..(c + 1) * (p + 1)];
                    for (gj, v) in gc.iter_mut().zip(row.iter()) {
                        *gj += resid * v;
                    }
                }
            }
        }
        let nf = n as f64;
        let mut penalty = 0.0;
        for c in 0..m {
            for j in 1..=p {
                penalty += theta[c * (p + 1) + j].powi(2);
            }
        }
        if let (Some(out), Some(acc)) = (grad, g_acc) {
            for c in 0..m {
                for j in 0..=p {
                    let idx = c * (p + 1) + j;
                    let ridge = if j == 0 { 0.0 } else { opt.ridge * theta[idx] };
                    out[idx] = acc[idx] / nf - ridge;
                }
            }
        }
        ll / nf - 0.5 * opt.ridge * penalty
    };

    let mut theta = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut value = objective(&theta, Some(&mut grad));
    let mut trace = vec![value];
    let mut step = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut gnorm = max_abs(&grad);
    let mut trial = vec![0.0; dim];
    let mut trial_grad = vec![0.0; dim];

    while gnorm > opt.tolerance && iterations < opt.max_iters {
        iterations += 1;
        // Barzilai-Borwein guess for the first trial step.
        if let Some((old_theta, old_grad)) = &prev {
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..dim {
                let s = theta[i] - old_theta[i];
                let yv = old_grad[i] - grad[i];
                ss += s * s;
                sy += s * yv;
            }
            if sy > 0.0 && ss > 0.0 {
                step = (ss / sy).clamp(1e-8, 1e8);
            }
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..dim {
                trial[i] = theta[i] + step * grad[i];
            }
            let v = objective(&trial, None);
            if v.is_finite() && v >= value + 1e-4 * step * g2 {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let v = objective(&trial, Some(&mut trial_grad));
        prev = Some((theta.clone(), grad.clone()));
        theta.copy_from_slice(&trial);
        grad.copy_from_slice(&trial_grad);
        value = v;
        trace.push(value);
        gnorm = max_abs(&grad);
        if theta.iter().any(|t| t.abs() > 1e6) {
            return Err(NpmcError::Estimator(
                "coefficients diverged; the classes look perfectly separable, increase the ridge".into(),
            ));
        }
    }

    // Undo the standardization: beta_j = b_j / s_j, intercept -= sum b_j m_j / s_j.
    let mut coefficients = Array2::zeros((m, p + 1));
    for c in 0..m {
        let b = &theta[c * (p + 1)..(c + 1) * (p + 1)];
        let mut intercept = b[0];
        for j in 0..p {
            let beta = b[j + 1] / scale[j];
            coefficients[[c, j + 1]] = beta;
            intercept -= beta * center[j];
        }
        coefficients[[c, 0]] = intercept;
    }
    Ok(LogisticFit {
        model: LogisticModel { coefficients },
        iterations,
        converged: gnorm <= opt.tolerance,
        gradient_norm: gnorm,
        objective_trace: trace,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

// ---------------------------------------------------------------------------
// Linear discriminant analysis

/// Shared-covariance Gaussian classes. Scores are `x . weights[k] + offsets[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub weights: Array2<f64>,
    pub offsets: Array1<f64>,
}

impl Posterior for LdaModel {
    fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    fn num_features(&self) -> usize {
        self.weights.ncols()
    }

    fn method_name(&self) -> &'static str {
        "lda"
    }

    fn predict_proba_into(&self, x: ArrayView1<'_, f64>, out: &mut [f64]) {
        for (k, w) in self.weights.rows().into_iter().enumerate() {
            out[k] = w.dot(&x) + self.offsets[k];
        }
        softmax_in_place(out);
    }
}

pub fn fit_lda(ds: &LabeledDataset) -> Result<LdaModel> {
    let priors = class_priors(ds)?;
    let (n, p) = ds.features().dim();
    let k = ds.num_classes();
    if n <= p {
        return Err(NpmcError::Estimator(format!(
            "LDA needs more observations than features (n = {n}, p = {p})"
        )));
    }
    let counts = ds.class_counts();
    let mut means = vec![vec![0.0; p]; k];
    for (i, &y) in ds.labels().iter().enumerate() {
        for (j, v) in ds.row(i).iter().enumerate() {
            means[y][j] += v;
        }
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= c as f64);
    }
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for (i, &y) in ds.labels().iter().enumerate() {
        let d = DVector::from_iterator(p, ds.row(i).iter().zip(&means[y]).map(|(v, m)| v - m));
        cov.ger(1.0, &d, &d, 1.0);
    }
    let dof = (n as f64 - k as f64).max(1.0);
    cov /= dof;
    let min_eig = cov.clone().symmetric_eigenvalues().min();
    if min_eig < 1e-10 {
        for j in 0..p {
            cov[(j, j)] += 1e-8;
        }
    }
    let chol = cov.cholesky().ok_or_else(|| {
        NpmcError::Estimator("pooled covariance is singular even after regularization".into())
    })?;
    let mut weights = Array2::zeros((k, p));
    let mut offsets = Array1::zeros(k);
    for c in 0..k {
        let mu = DVector::from_column_slice(&means[c]);
        let w = chol.solve(&mu);
        for j in 0..p {
            weights[[c, j]] = w[j];
        }
        offsets[c] = -0.5 * mu.dot(&w) + priors[c].ln();
    }
    Ok(LdaModel { weights, offsets })
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub num_classes: usize,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
}

/// Default neighbour count `floor(sqrt(n / K))`.
pub fn default_knn_k(n: usize, num_classes: usize) -> usize {
    ((n as f64 / num_classes as f64).sqrt()).floor() as usize
}

pub fn fit_knn(ds: &LabeledDataset, k: Option<usize>) -> Result<KnnModel> {
    let n = ds.len();
    let k = match k {
        Some(k) => k,
        None => default_knn_k(n, ds.num_classes()),
    };
    if k == 0 {
        return Err(NpmcError::Estimator(format!(
            "kNN needs k >= 1 (n = {n}, K = {})",
            ds.num_classes()
        )));
    }
    if k > n {
        return Err(NpmcError::Estimator(format!("k = {k} exceeds n = {n}")));
    }
    Ok(KnnModel {
        k,
        num_classes: ds.num_classes(),
        features: ds.features().to_owned(),
        labels: ds.labels().to_vec(),
    })
}

impl KnnModel {
    /// Indices of the `k` nearest training rows, nearest first; equal
    /// distances go to the lower index.
    pub fn neighbors(&self, x: ArrayView1<'_, f64>) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .features
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }
}

impl Posterior for KnnModel {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn num_features(&self) -> usize {
        self.features.ncols()
    }

    fn method_name(&self) -> &'static str {
        "knn"
    }

    fn predict_proba_into(&self, x: ArrayView1<'_, f64>, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in self.neighbors(x) {
            out[self.labels[i]] += 1.0;
        }
        let k = self.k as f64;
        out.iter_mut().for_each(|v| *v /= k);
    }
}

// ---------------------------------------------------------------------------
// Gaussian-kernel naive Bayes

/// One univariate kernel density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDensity {
    pub samples: Vec<f64>,
    pub bandwidth: f64,
}

impl KernelDensity {
    pub fn log_density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let mut max = f64::NEG_INFINITY;
        for &s in &self.samples {
            let z = (x - s) / h;
            max = max.max(-0.5 * z * z);
        }
        let total: f64 = self
            .samples
            .iter()
            .map(|&s| {
                let z = (x - s) / h;
                (-0.5 * z * z - max).exp()
            })
            .sum();
        let norm = (self.samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt()).ln();
        max + total.ln() - norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelNbModel {
    pub log_priors: Vec<f64>,
    /// `densities[k][j]`: class `k`, feature `j`.
    pub densities: Vec<Vec<KernelDensity>>,
}

/// Robust Silverman bandwidth `0.9 min(sd, IQR/1.34) n^(-1/5)`. When the
/// robust spread is zero but `sd` is not, `sd` alone is used. Returns 0 for a
/// constant sample.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (_, sd) = mean_sd(&sorted);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let mut spread = sd.min(iqr / 1.34);
    if spread <= 0.0 {
        spread = sd;
    }
    0.9 * spread * (sorted.len() as f64).powf(-0.2)
}

pub fn fit_gaussian_kernel_nb(ds: &LabeledDataset) -> Result<KernelNbModel> {
    ds.require_class_counts(2)?;
    let priors = class_priors(ds)?;
    let p = ds.num_features();
    let x = ds.features();
    let ranges: Vec<f64> = (0..p)
        .map(|j| {
            let col = x.column(j);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .collect();
    let mut densities = Vec::with_capacity(ds.num_classes());
    for (class, idx) in ds.class_indices().into_iter().enumerate() {
        let mut per_feature = Vec::with_capacity(p);
        for j in 0..p {
            let samples: Vec<f64> = idx.iter().map(|&i| x[[i, j]]).collect();
            let mut bandwidth = silverman_bandwidth(&samples);
            if !(bandwidth > 0.0) {
                bandwidth = 1e-6 * (ranges[j] + 1.0);
                log::warn!(
                    "feature {} is constant within class {}; using bandwidth {bandwidth:e}",
                    j + 1,
                    class + 1
                );
            }
            per_feature.push(KernelDensity { samples, bandwidth });
        }
        densities.push(per_feature);
    }
    Ok(KernelNbModel {
        log_priors: priors.values().iter().map(|p| p.ln()).collect(),
        densities,
    })
}

impl Posterior for KernelNbModel {
    fn num_classes(&self) -> usize {
        self.log_priors.len()
    }

    fn num_features(&self) -> usize {
        self.densities[0].len()
    }

    fn method_name(&self) -> &'static str {
        "gknb"
    }

    fn predict_proba_into(&self, x: ArrayView1<'_, f64>, out: &mut [f64]) {
        for (k, dens) in self.densities.iter().enumerate() {
            out[k] = self.log_priors[k]
                + dens.iter().zip(x.iter()).map(|(d, &v)| d.log_density(v)).sum::<f64>();
        }
        softmax_in_place(out);
    }
}
