//! Costs induced by a dual point and the cost-sensitive plug-in rules.
//!
//! For per-class problems the cost of class `k` is `w_k / pi_k`, raised to
//! `(w_k + lambda_k) / pi_k` when `k` is constrained, and the optimal rule is
//! `argmax_k c_k P(Y=k|x)`. Confusion-cell problems use a cost per cell
//! `(k, r)` and the rule `argmin_r sum_{k != r} c_kr P(Y=k|x)`.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::dataset::PriorVector;
use crate::error::{NpmcError, Result};
use crate::problem::{LambdaVector, NpProblem};

static DEGENERATE_DECISIONS: AtomicU64 = AtomicU64::new(0);

/// Number of [`cs_classify`] calls where every cost-weighted posterior was
/// zero and the tie rule picked class 0.
pub fn degenerate_decision_count() -> u64 {
    DEGENERATE_DECISIONS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(NpmcError::InvalidArgument(format!(
                "costs must be finite and non-negative: {values:?}"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Row-major `K x K` cell costs, zero on the diagonal. Row = true class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    k: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        let mut values = Vec::with_capacity(k * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(NpmcError::InvalidArgument("cost matrix must be square".into()));
            }
            for (j, c) in row.into_iter().enumerate() {
                if !(c.is_finite() && c >= 0.0) || (i == j && c != 0.0) {
                    return Err(NpmcError::InvalidArgument(format!(
                        "invalid cost {c} at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                values.push(c);
            }
        }
        Ok(Self { k, values })
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    /// Cost of predicting `predicted` when the truth is `truth`.
    #[inline]
    pub fn get(&self, truth: usize, predicted: usize) -> f64 {
        self.values[truth * self.k + predicted]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.k).map(|r| r.to_vec()).collect()
    }
}

fn check_priors(priors: &PriorVector, k: usize) -> Result<()> {
    if priors.len() != k {
        return Err(NpmcError::InvalidArgument(format!(
            "{} priors for {k} classes",
            priors.len()
        )));
    }
    if let Some(class) = priors.values().iter().position(|&p| p <= 0.0) {
        return Err(NpmcError::EmptyClass { class });
    }
    Ok(())
}

fn check_lambda(lambda: &LambdaVector, problem: &NpProblem) -> Result<()> {
    if lambda.len() != problem.num_constraints() {
        return Err(NpmcError::InvalidArgument(format!(
            "{} dual variables for {} constraints",
            lambda.len(),
            problem.num_constraints()
        )));
    }
    Ok(())
}

/// Per-class costs `c_k(lambda, pi)`.
pub fn cost_vector(lambda: &LambdaVector, priors: &PriorVector, problem: &NpProblem) -> Result<CostVector> {
    let NpProblem::PerClass {
        weights,
        constraints,
    } = problem
    else {
        return Err(NpmcError::InvalidProblem("cost_vector needs a per-class problem".into()));
    };
    check_priors(priors, weights.len())?;
    check_lambda(lambda, problem)?;
    let mut raw = weights.clone();
    for (c, &l) in constraints.iter().zip(lambda.values()) {
        raw[c.class] += l;
    }
    CostVector::new(raw.iter().zip(priors.values()).map(|(w, p)| w / p).collect())
}

/// Cell costs `c_kr(lambda, pi)`; rows are normalized by the prior of the true class.
pub fn cost_matrix(lambda: &LambdaVector, priors: &PriorVector, problem: &NpProblem) -> Result<CostMatrix> {
    let NpProblem::ConfusionCell {
        weights,
        constraints,
    } = problem
    else {
        return Err(NpmcError::InvalidProblem(
            "cost_matrix needs a confusion-cell problem".into(),
        ));
    };
    check_priors(priors, weights.len())?;
    check_lambda(lambda, problem)?;
    let mut raw = weights.clone();
    for (c, &l) in constraints.iter().zip(lambda.values()) {
        raw[c.truth][c.predicted] += l;
    }
    for (k, row) in raw.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v /= priors[k];
        }
    }
    CostMatrix::from_rows(raw)
}

/// `argmax_k c_k p_k`, ties to the smallest class.
#[inline]
pub fn cs_classify(costs: &CostVector, posterior: &[f64]) -> usize {
    cs_classify_raw(&costs.0, posterior)
}

#[inline]
pub(crate) fn cs_classify_raw(costs: &[f64], posterior: &[f64]) -> usize {
    debug_assert_eq!(costs.len(), posterior.len());
    let mut best = 0;
    let mut best_score = costs[0] * posterior[0];
    for k in 1..costs.len() {
        let s = costs[k] * posterior[k];
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    if best_score == 0.0 {
        DEGENERATE_DECISIONS.fetch_add(1, Ordering::Relaxed);
    }
    best
}

/// Expected cost of predicting `r`: `sum_{k != r} c_kr p_k`.
#[inline]
pub fn cell_expected_cost(costs: &CostMatrix, posterior: &[f64], r: usize) -> f64 {
    let mut s = 0.0;
    for (k, &p) in posterior.iter().enumerate() {
        if k != r {
            s += costs.get(k, r) * p;
        }
    }
    s
}

/// `argmin_r sum_{k != r} c_kr p_k`, ties to the smallest class.
#[inline]
pub fn gnpmc_cs_classify(costs: &CostMatrix, posterior: &[f64]) -> usize {
    debug_assert_eq!(costs.num_classes(), posterior.len());
    let mut best = 0;
    let mut best_cost = cell_expected_cost(costs, posterior, 0);
    for r in 1..costs.num_classes() {
        let c = cell_expected_cost(costs, posterior, r);
        if c < best_cost {
            best = r;
            best_cost = c;
        }
    }
    best
}

/// Plain Bayes rule: `argmax_k p_k`, ties to the smallest class.
#[inline]
pub fn argmax(posterior: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..posterior.len() {
        if posterior[k] > posterior[best] {
            best = k;
        }
    }
    best
}

/// Costs for either problem mode, for code paths that handle both.
#[derive(Debug, Clone, PartialEq)]
pub enum Costs {
    Vector(CostVector),
    Matrix(CostMatrix),
}

impl Costs {
    pub fn compute(lambda: &LambdaVector, priors: &PriorVector, problem: &NpProblem) -> Result<Self> {
        if problem.is_per_class() {
            cost_vector(lambda, priors, problem).map(Costs::Vector)
        } else {
            cost_matrix(lambda, priors, problem).map(Costs::Matrix)
        }
    }

    #[inline]
    pub fn classify(&self, posterior: &[f64]) -> usize {
        match self {
            Costs::Vector(c) => cs_classify(c, posterior),
            Costs::Matrix(c) => gnpmc_cs_classify(c, posterior),
        }
    }
}
