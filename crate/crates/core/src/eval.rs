//! Empirical error rates, objective values and replication summaries.

use serde::{Deserialize, Serialize};

use crate::error::{NpmcError, Result};
use crate::math::{mean_sd, median};
use crate::problem::NpProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `R_k = 1 - R_kk`.
    pub per_class_error: Vec<f64>,
    /// `R_kr`: share of true class `k` predicted as `r`.
    pub confusion_rates: Vec<Vec<f64>>,
    pub objective: f64,
    /// Achieved rate minus target, one per constraint in problem order.
    pub constraint_slacks: Vec<f64>,
    pub n_test_per_class: Vec<usize>,
}

impl EvalReport {
    /// Rates of the constrained quantities (`R_k` or `R_kr`), in problem order.
    pub fn constrained_rates(&self, problem: &NpProblem) -> Vec<f64> {
        match problem {
            NpProblem::PerClass { constraints, .. } => {
                constraints.iter().map(|c| self.per_class_error[c.class]).collect()
            }
            NpProblem::ConfusionCell { constraints, .. } => constraints
                .iter()
                .map(|c| self.confusion_rates[c.truth][c.predicted])
                .collect(),
        }
    }

    /// Overall share of misclassified points.
    pub fn overall_error(&self) -> f64 {
        let n: usize = self.n_test_per_class.iter().sum();
        let wrong: f64 = self
            .per_class_error
            .iter()
            .zip(&self.n_test_per_class)
            .map(|(e, &c)| e * c as f64)
            .sum();
        wrong / n as f64
    }
}

pub fn evaluate(predictions: &[usize], truth: &[usize], problem: &NpProblem) -> Result<EvalReport> {
    if predictions.len() != truth.len() {
        return Err(NpmcError::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let k = problem.num_classes();
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in predictions.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(NpmcError::InvalidArgument(format!(
                "label outside 0..{k} (prediction {p}, truth {t})"
            )));
        }
        counts[t][p] += 1;
    }
    let n_test_per_class: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    if let Some(class) = n_test_per_class.iter().position(|&c| c == 0) {
        return Err(NpmcError::EmptyClass { class });
    }
    let confusion_rates: Vec<Vec<f64>> = counts
        .iter()
        .zip(&n_test_per_class)
        .map(|(row, &nk)| row.iter().map(|&c| c as f64 / nk as f64).collect())
        .collect();
    // 1 - R_kk, computed from the off-diagonal counts so it is exact.
    let per_class_error: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(t, row)| (n_test_per_class[t] - row[t]) as f64 / n_test_per_class[t] as f64)
        .collect();
    let objective = match problem {
        NpProblem::PerClass { weights, .. } => {
            weights.iter().zip(&per_class_error).map(|(w, e)| w * e).sum()
        }
        NpProblem::ConfusionCell { weights, .. } => {
            let mut j = 0.0;
            for (t, row) in weights.iter().enumerate() {
                for (p, w) in row.iter().enumerate() {
                    if t != p {
                        j += w * confusion_rates[t][p];
                    }
                }
            }
            j
        }
    };
    let mut report = EvalReport {
        per_class_error,
        confusion_rates,
        objective,
        constraint_slacks: Vec::new(),
        n_test_per_class,
    };
    report.constraint_slacks = report
        .constrained_rates(problem)
        .iter()
        .zip(problem.alphas())
        .map(|(r, a)| r - a)
        .collect();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Self {
        let (mean, sd) = mean_sd(values);
        Stat {
            mean,
            median: median(values),
            sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub per_class_error: Vec<Stat>,
    pub confusion_rates: Vec<Vec<Stat>>,
    pub objective: Stat,
    pub constraint_slacks: Vec<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replications: usize,
    pub feasible_count: usize,
    pub infeasible_count: usize,
    /// `None` when every replication was infeasible.
    pub stats: Option<RateSummary>,
}

/// Summarize replications; `None` entries are infeasible runs and only
/// contribute to the count. Standard deviations use the `m - 1` denominator.
pub fn aggregate(reports: &[Option<EvalReport>]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(NpmcError::Empty("no replications to aggregate".into()));
    }
    let feasible: Vec<&EvalReport> = reports.iter().flatten().collect();
    let infeasible_count = reports.len() - feasible.len();
    let stats = match feasible.first() {
        None => None,
        Some(first) => {
            let k = first.per_class_error.len();
            let d = first.constraint_slacks.len();
            if feasible
                .iter()
                .any(|r| r.per_class_error.len() != k || r.constraint_slacks.len() != d || r.confusion_rates.len() != k)
            {
                return Err(NpmcError::InvalidArgument("reports have different shapes".into()));
            }
            let column = |f: &dyn Fn(&EvalReport) -> f64| -> Stat {
                Stat::of(&feasible.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            Some(RateSummary {
                per_class_error: (0..k).map(|c| column(&|r| r.per_class_error[c])).collect(),
                confusion_rates: (0..k)
                    .map(|t| (0..k).map(|p| column(&|r| r.confusion_rates[t][p])).collect())
                    .collect(),
                objective: column(&|r| r.objective),
                constraint_slacks: (0..d).map(|i| column(&|r| r.constraint_slacks[i])).collect(),
            })
        }
    };
    Ok(Summary {
        replications: reports.len(),
        feasible_count: feasible.len(),
        infeasible_count,
        stats,
    })
}
