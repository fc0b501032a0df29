//! Empirical dual objectives as functions of the dual point.
//!
//! [`CxContext`] averages plug-in posteriors over the training rows and gives
//! a concave, piecewise-linear dual. [`ErContext`] scores the plug-in rule by
//! per-class empirical rates on a held-out half; it is piecewise
//! linear but may jump where a decision flips.

use ndarray::{Array2, ArrayView2};

use crate::cost::Costs;
use crate::dataset::PriorVector;
use crate::error::{NpmcError, Result};
use crate::problem::{LambdaVector, NpProblem};

fn check_posteriors(posteriors: ArrayView2<'_, f64>, k: usize) -> Result<()> {
    if posteriors.ncols() != k {
        return Err(NpmcError::DimensionMismatch {
            expected: k,
            got: posteriors.ncols(),
        });
    }
    for (i, row) in posteriors.rows().into_iter().enumerate() {
        let s: f64 = row.sum();
        if row.iter().any(|&v| !(v >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(NpmcError::InvalidArgument(format!(
                "posterior row {i} is not a probability vector"
            )));
        }
    }
    Ok(())
}

fn check_priors(priors: &PriorVector, k: usize) -> Result<()> {
    if priors.len() != k {
        return Err(NpmcError::InvalidArgument(format!(
            "{} priors for {k} classes",
            priors.len()
        )));
    }
    Ok(())
}

fn weight_total(problem: &NpProblem) -> f64 {
    match problem {
        NpProblem::PerClass { weights, .. } => weights.iter().sum(),
        NpProblem::ConfusionCell { weights, .. } => weights.iter().flatten().sum(),
    }
}

/// Everything the CX dual needs: posteriors at the training rows and the
/// training priors.
#[derive(Debug, Clone)]
pub struct CxContext {
    posteriors: Array2<f64>,
    priors: PriorVector,
    problem: NpProblem,
}

impl CxContext {
    pub fn new(posteriors: Array2<f64>, priors: PriorVector, problem: NpProblem) -> Result<Self> {
        let k = problem.num_classes();
        problem.validate(k)?;
        check_priors(&priors, k)?;
        check_posteriors(posteriors.view(), k)?;
        if posteriors.nrows() == 0 {
            return Err(NpmcError::Empty("CX context has no rows".into()));
        }
        Ok(Self {
            posteriors,
            priors,
            problem,
        })
    }

    pub fn problem(&self) -> &NpProblem {
        &self.problem
    }

    pub fn priors(&self) -> &PriorVector {
        &self.priors
    }

    pub fn posteriors(&self) -> ArrayView2<'_, f64> {
        self.posteriors.view()
    }

    pub fn len(&self) -> usize {
        self.posteriors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.posteriors.nrows() == 0
    }

    /// Plug-in labels of every row at `lambda`.
    pub fn plug_in_labels(&self, lambda: &LambdaVector) -> Result<Vec<usize>> {
        let costs = Costs::compute(lambda, &self.priors, &self.problem)?;
        Ok(self
            .posteriors
            .rows()
            .into_iter()
            .map(|r| costs.classify(r.as_slice().expect("standard layout")))
            .collect())
    }
}

fn cx_value(ctx: &CxContext, lambda: &LambdaVector, costs: &Costs, labels: &[usize]) -> f64 {
    let n = ctx.posteriors.nrows() as f64;
    let mut avg = 0.0;
    for (row, &r) in ctx.posteriors.rows().into_iter().zip(labels) {
        avg += match costs {
            Costs::Vector(c) => c.values()[r] * row[r],
            Costs::Matrix(c) => row
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != r)
                .map(|(k, &p)| c.get(k, r) * p)
                .sum(),
        };
    }
    avg /= n;
    let alphas = ctx.problem.alphas();
    let l = lambda.values();
    match ctx.problem {
        NpProblem::PerClass { .. } => {
            let slack: f64 = l.iter().zip(&alphas).map(|(l, a)| l * (1.0 - a)).sum();
            -avg + weight_total(&ctx.problem) + slack
        }
        NpProblem::ConfusionCell { .. } => {
            let pen: f64 = l.iter().zip(&alphas).map(|(l, a)| l * a).sum();
            avg - pen
        }
    }
}

/// The empirical Lagrangian of the CX estimator at an arbitrary labeling of
/// the context rows.
pub fn f_hat_cx(lambda: &LambdaVector, labeling: &[usize], ctx: &CxContext) -> Result<f64> {
    if labeling.len() != ctx.len() {
        return Err(NpmcError::InvalidArgument(format!(
            "{} labels for {} rows",
            labeling.len(),
            ctx.len()
        )));
    }
    let k = ctx.problem.num_classes();
    if let Some(&bad) = labeling.iter().find(|&&y| y >= k) {
        return Err(NpmcError::InvalidArgument(format!("label {bad} outside 0..{k}")));
    }
    let costs = Costs::compute(lambda, &ctx.priors, &ctx.problem)?;
    Ok(cx_value(ctx, lambda, &costs, labeling))
}

/// CX dual value: the empirical Lagrangian minimized over labelings, which
/// the plug-in rule attains row by row.
pub fn g_hat_cx(lambda: &LambdaVector, ctx: &CxContext) -> Result<f64> {
    let costs = Costs::compute(lambda, &ctx.priors, &ctx.problem)?;
    let labels: Vec<usize> = ctx
        .posteriors
        .rows()
        .into_iter()
        .map(|r| costs.classify(r.as_slice().expect("standard layout")))
        .collect();
    Ok(cx_value(ctx, lambda, &costs, &labels))
}

/// Held-out data for the ER dual: posteriors of the second-half model
/// evaluated at the first-half rows, with their labels.
#[derive(Debug, Clone)]
pub struct ErContext {
    posteriors: Array2<f64>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
    priors: PriorVector,
    problem: NpProblem,
}

impl ErContext {
    pub fn new(
        posteriors: Array2<f64>,
        labels: Vec<usize>,
        priors: PriorVector,
        problem: NpProblem,
    ) -> Result<Self> {
        let k = problem.num_classes();
        problem.validate(k)?;
        check_priors(&priors, k)?;
        check_posteriors(posteriors.view(), k)?;
        if labels.len() != posteriors.nrows() {
            return Err(NpmcError::InvalidArgument(format!(
                "{} labels for {} posterior rows",
                labels.len(),
                posteriors.nrows()
            )));
        }
        let mut class_counts = vec![0; k];
        for &y in &labels {
            if y >= k {
                return Err(NpmcError::InvalidArgument(format!("label {y} outside 0..{k}")));
            }
            class_counts[y] += 1;
        }
        if let Some(class) = class_counts.iter().position(|&c| c == 0) {
            return Err(NpmcError::EmptyClass { class });
        }
        Ok(Self {
            posteriors,
            labels,
            class_counts,
            priors,
            problem,
        })
    }

    pub fn problem(&self) -> &NpProblem {
        &self.problem
    }

    pub fn priors(&self) -> &PriorVector {
        &self.priors
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Confusion rates `rates[k][r]` of the plug-in rule at `lambda`, rows
    /// normalized by the class counts.
    pub fn confusion_rates(&self, lambda: &LambdaVector) -> Result<Vec<Vec<f64>>> {
        let costs = Costs::compute(lambda, &self.priors, &self.problem)?;
        Ok(self.rates_with(&costs))
    }

    fn rates_with(&self, costs: &Costs) -> Vec<Vec<f64>> {
        let k = self.class_counts.len();
        let mut counts = vec![vec![0usize; k]; k];
        for (row, &y) in self.posteriors.rows().into_iter().zip(&self.labels) {
            let r = costs.classify(row.as_slice().expect("standard layout"));
            counts[y][r] += 1;
        }
        counts
            .into_iter()
            .zip(&self.class_counts)
            .map(|(row, &nk)| row.into_iter().map(|c| c as f64 / nk as f64).collect())
            .collect()
    }
}

/// ER dual value at `lambda`.
pub fn g_hat_er(lambda: &LambdaVector, ctx: &ErContext) -> Result<f64> {
    let costs = Costs::compute(lambda, &ctx.priors, &ctx.problem)?;
    let rates = ctx.rates_with(&costs);
    Ok(er_value(lambda, &ctx.problem, &rates))
}

/// The ER Lagrangian for given confusion rates (rows = true class).
pub fn er_value(lambda: &LambdaVector, problem: &NpProblem, rates: &[Vec<f64>]) -> f64 {
    let l = lambda.values();
    match problem {
        NpProblem::PerClass {
            weights,
            constraints,
        } => {
            let mut eff = weights.clone();
            for (c, &lv) in constraints.iter().zip(l) {
                eff[c.class] += lv;
            }
            let acc: f64 = eff.iter().enumerate().map(|(k, w)| w * rates[k][k]).sum();
            let slack: f64 = constraints.iter().zip(l).map(|(c, lv)| lv * (1.0 - c.alpha)).sum();
            -acc + weights.iter().sum::<f64>() + slack
        }
        NpProblem::ConfusionCell {
            weights,
            constraints,
        } => {
            let mut eff = weights.clone();
            for (c, &lv) in constraints.iter().zip(l) {
                eff[c.truth][c.predicted] += lv;
            }
            let mut total = 0.0;
            for (k, row) in eff.iter().enumerate() {
                for (r, w) in row.iter().enumerate() {
                    if k != r {
                        total += w * rates[k][r];
                    }
                }
            }
            let pen: f64 = constraints.iter().zip(l).map(|(c, lv)| lv * c.alpha).sum();
            total - pen
        }
    }
}
