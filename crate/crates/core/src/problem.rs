//! Problem instances: objective weights, constrained classes or confusion
//! cells, and their target levels.

use serde::{Deserialize, Serialize};

use crate::error::{NpmcError, Result};

/// Upper bound on a per-class error `R_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassConstraint {
    pub class: usize,
    pub alpha: f64,
}

/// Upper bound on a confusion rate `R_kr = P(predict r | Y = k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConstraint {
    pub truth: usize,
    pub predicted: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NpProblem {
    /// Minimize `sum_k w_k R_k` subject to `R_k <= alpha_k` for constrained `k`.
    PerClass {
        weights: Vec<f64>,
        constraints: Vec<ClassConstraint>,
    },
    /// Minimize `sum_{k != r} w_kr R_kr` subject to `R_kr <= alpha_kr` on constrained cells.
    ConfusionCell {
        weights: Vec<Vec<f64>>,
        constraints: Vec<CellConstraint>,
    },
}

impl NpProblem {
    /// Constraints are stored sorted by class so dual coordinates have a
    /// stable order.
    pub fn per_class(weights: Vec<f64>, constraints: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut constraints: Vec<ClassConstraint> = constraints
            .into_iter()
            .map(|(class, alpha)| ClassConstraint { class, alpha })
            .collect();
        constraints.sort_by_key(|c| c.class);
        NpProblem::PerClass {
            weights,
            constraints,
        }
    }

    pub fn confusion_cell(
        weights: Vec<Vec<f64>>,
        constraints: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Self {
        let mut constraints: Vec<CellConstraint> = constraints
            .into_iter()
            .map(|((truth, predicted), alpha)| CellConstraint {
                truth,
                predicted,
                alpha,
            })
            .collect();
        constraints.sort_by_key(|c| (c.truth, c.predicted));
        NpProblem::ConfusionCell {
            weights,
            constraints,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            NpProblem::PerClass { weights, .. } => weights.len(),
            NpProblem::ConfusionCell { weights, .. } => weights.len(),
        }
    }

    /// `|A|`, the dimension of the dual variable.
    pub fn num_constraints(&self) -> usize {
        match self {
            NpProblem::PerClass { constraints, .. } => constraints.len(),
            NpProblem::ConfusionCell { constraints, .. } => constraints.len(),
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        match self {
            NpProblem::PerClass { constraints, .. } => constraints.iter().map(|c| c.alpha).collect(),
            NpProblem::ConfusionCell { constraints, .. } => {
                constraints.iter().map(|c| c.alpha).collect()
            }
        }
    }

    /// Short labels for the dual coordinates, 1-based: `"3"` or `"1_2"`.
    pub fn constraint_labels(&self) -> Vec<String> {
        match self {
            NpProblem::PerClass { constraints, .. } => {
                constraints.iter().map(|c| (c.class + 1).to_string()).collect()
            }
            NpProblem::ConfusionCell { constraints, .. } => constraints
                .iter()
                .map(|c| format!("{}_{}", c.truth + 1, c.predicted + 1))
                .collect(),
        }
    }

    pub fn is_per_class(&self) -> bool {
        matches!(self, NpProblem::PerClass { .. })
    }

    /// Check the instance against a dataset with `num_classes` classes.
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let bad = |msg: String| Err(NpmcError::InvalidProblem(msg));
        match self {
            NpProblem::PerClass {
                weights,
                constraints,
            } => {
                if weights.len() != num_classes {
                    return bad(format!("{} weights for {num_classes} classes", weights.len()));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                    return bad(format!("weight {w} must be finite and non-negative"));
                }
                for (i, c) in constraints.iter().enumerate() {
                    if c.class >= num_classes {
                        return bad(format!(
                            "constraint on class {} but only {num_classes} classes",
                            c.class + 1
                        ));
                    }
                    if !(0.0..1.0).contains(&c.alpha) {
                        return bad(format!(
                            "alpha {} for class {} must lie in [0, 1)",
                            c.alpha,
                            c.class + 1
                        ));
                    }
                    if constraints[..i].iter().any(|o| o.class == c.class) {
                        return bad(format!("duplicate constraint on class {}", c.class + 1));
                    }
                    if c.alpha == 0.0 {
                        log::warn!(
                            "alpha = 0 for class {}: empirical control at level 0 is usually infeasible",
                            c.class + 1
                        );
                    }
                }
                if constraints.is_empty() && weights.iter().all(|&w| w == 0.0) {
                    return bad("all weights are zero and no constraints are given".into());
                }
            }
            NpProblem::ConfusionCell {
                weights,
                constraints,
            } => {
                if weights.len() != num_classes || weights.iter().any(|r| r.len() != num_classes) {
                    return bad(format!("weight matrix must be {num_classes}x{num_classes}"));
                }
                for (k, row) in weights.iter().enumerate() {
                    for (r, &w) in row.iter().enumerate() {
                        if !(w.is_finite() && w >= 0.0) {
                            return bad(format!("weight w[{}][{}] = {w} is invalid", k + 1, r + 1));
                        }
                        if k == r && w != 0.0 {
                            return bad(format!("diagonal weight w[{0}][{0}] must be zero", k + 1));
                        }
                    }
                }
                for (i, c) in constraints.iter().enumerate() {
                    if c.truth >= num_classes || c.predicted >= num_classes {
                        return bad(format!(
                            "constraint on cell ({}, {}) but only {num_classes} classes",
                            c.truth + 1,
                            c.predicted + 1
                        ));
                    }
                    if c.truth == c.predicted {
                        return bad(format!(
                            "diagonal cell ({0}, {0}) cannot be constrained",
                            c.truth + 1
                        ));
                    }
                    if !(c.alpha > 0.0 && c.alpha < 1.0) {
                        return bad(format!(
                            "alpha {} for cell ({}, {}) must lie in (0, 1)",
                            c.alpha,
                            c.truth + 1,
                            c.predicted + 1
                        ));
                    }
                    if constraints[..i]
                        .iter()
                        .any(|o| (o.truth, o.predicted) == (c.truth, c.predicted))
                    {
                        return bad(format!(
                            "duplicate constraint on cell ({}, {})",
                            c.truth + 1,
                            c.predicted + 1
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Dual variables, one per constraint in the problem's stored order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LambdaVector(Vec<f64>);

impl LambdaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(NpmcError::InvalidArgument(format!(
                "dual variable {v} must be finite and non-negative"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for LambdaVector {
    type Error = NpmcError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<LambdaVector> for Vec<f64> {
    fn from(l: LambdaVector) -> Self {
        l.0
    }
}
