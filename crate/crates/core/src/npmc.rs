//! Fitting Neyman-Pearson classifiers: maximize an empirical dual over the
//! constraint multipliers, then either return the plug-in classifier at the
//! maximizer or report the problem infeasible when the dual exceeds 1.
//!
//! The same entry points serve per-class and confusion-cell problems; the
//! problem's mode selects the cost rule.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{argmax, Costs};
use crate::dataset::{class_display_name, class_priors, stratified_split, LabeledDataset, PriorVector};
use crate::dual::{g_hat_cx, g_hat_er, CxContext, ErContext};
use crate::error::{NpmcError, Result};
use crate::optimize::{default_starts, hooke_jeeves_maximize, hooke_jeeves_multistart, SearchConfig, SearchResult};
use crate::posterior::{predict_proba_batch, Estimator, Posterior, PosteriorModel};
use crate::problem::{LambdaVector, NpProblem};

/// A maximized dual above this value means the problem is declared infeasible.
pub const INFEASIBILITY_THRESHOLD: f64 = 1.0;

/// Multiplier / slack threshold for the complementary-slackness diagnostic.
pub const SLACKNESS_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Dual from plug-in posteriors averaged over the whole training set.
    Cx,
    /// Dual from empirical per-class rates on a held-out half.
    Er,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Cx => "cx",
            Algorithm::Er => "er",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub search: SearchConfig,
    /// Restart the search from the zero, all-ones and all-tens points and keep the best.
    pub multistart: bool,
    /// Upper box for the CX search; the dual domain itself is unbounded.
    pub cx_upper: f64,
    /// Search range `R` for ER.
    pub er_range: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            multistart: true,
            cx_upper: 1e4,
            er_range: 200.0,
        }
    }
}

/// Per-constraint complementary-slackness check: either the multiplier is
/// (near) zero or the constraint is (near) tight on the fitting data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlacknessEntry {
    pub lambda: f64,
    pub fitted_rate: f64,
    pub alpha: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub evaluations: usize,
    pub converged: bool,
    /// Some multiplier ended within the step tolerance of the box's upper edge.
    pub boundary_hit: bool,
    pub slackness: Vec<SlacknessEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpClassifier {
    pub base: PosteriorModel,
    pub lambda_hat: LambdaVector,
    pub priors: PriorVector,
    pub problem: NpProblem,
    pub dual_value: f64,
    pub algorithm: Algorithm,
    pub diagnostics: FitDiagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
}

impl NpClassifier {
    pub fn num_features(&self) -> usize {
        self.base.num_features()
    }

    pub fn num_classes(&self) -> usize {
        self.base.num_classes()
    }

    pub fn costs(&self) -> Result<Costs> {
        Costs::compute(&self.lambda_hat, &self.priors, &self.problem)
    }

    /// Same classifier with the multipliers replaced; for sensitivity sweeps.
    pub fn with_lambda(&self, lambda: LambdaVector) -> Result<Self> {
        Costs::compute(&lambda, &self.priors, &self.problem)?;
        Ok(Self {
            lambda_hat: lambda,
            ..self.clone()
        })
    }

    pub fn class_name(&self, class: usize) -> String {
        class_display_name(self.class_names.as_deref(), class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleReport {
    pub algorithm: Algorithm,
    pub dual_value: f64,
    pub lambda_at_max: LambdaVector,
    pub boundary_hit: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FitVerdict {
    Feasible(NpClassifier),
    Infeasible(InfeasibleReport),
}

impl FitVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FitVerdict::Feasible(_))
    }

    pub fn dual_value(&self) -> f64 {
        match self {
            FitVerdict::Feasible(c) => c.dual_value,
            FitVerdict::Infeasible(r) => r.dual_value,
        }
    }

    pub fn lambda(&self) -> &LambdaVector {
        match self {
            FitVerdict::Feasible(c) => &c.lambda_hat,
            FitVerdict::Infeasible(r) => &r.lambda_at_max,
        }
    }

    pub fn classifier(&self) -> Option<&NpClassifier> {
        match self {
            FitVerdict::Feasible(c) => Some(c),
            FitVerdict::Infeasible(_) => None,
        }
    }
}

fn maximize<F: FnMut(&[f64]) -> f64>(f: F, dim: usize, upper: f64, opts: &FitOptions) -> Result<SearchResult> {
    let lower = vec![0.0; dim];
    let upper = vec![upper; dim];
    if opts.multistart && opts.search.initial_point.is_none() {
        hooke_jeeves_multistart(f, &lower, &upper, &opts.search, &default_starts(dim))
    } else {
        hooke_jeeves_maximize(f, &lower, &upper, &opts.search)
    }
}

fn slackness(lambda: &LambdaVector, problem: &NpProblem, rates: &[Vec<f64>]) -> Vec<SlacknessEntry> {
    let fitted: Vec<f64> = match problem {
        NpProblem::PerClass { constraints, .. } => {
            constraints.iter().map(|c| 1.0 - rates[c.class][c.class]).collect()
        }
        NpProblem::ConfusionCell { constraints, .. } => {
            constraints.iter().map(|c| rates[c.truth][c.predicted]).collect()
        }
    };
    lambda
        .values()
        .iter()
        .zip(fitted)
        .zip(problem.alphas())
        .map(|((&l, rate), alpha)| SlacknessEntry {
            lambda: l,
            fitted_rate: rate,
            alpha,
            holds: l < SLACKNESS_TOLERANCE || (rate - alpha).abs() < SLACKNESS_TOLERANCE,
        })
        .collect()
}

fn confusion_of(labels: &[usize], truth: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in labels.iter().zip(truth) {
        counts[t][p] += 1;
    }
    counts
        .into_iter()
        .map(|row| {
            let n: usize = row.iter().sum();
            row.into_iter().map(|c| c as f64 / n.max(1) as f64).collect()
        })
        .collect()
}


/// Fit on the full training data, maximize the CX dual over `[0, cx_upper]^|A|`.
pub fn fit_cx(ds: &LabeledDataset, problem: &NpProblem, estimator: &Estimator, opts: &FitOptions) -> Result<FitVerdict> {
    problem.validate(ds.num_classes())?;
    let base = estimator.fit(ds)?;
    fit_cx_with_base(ds, base, problem, opts)
}

/// [`fit_cx`] with an already fitted base model (which must have been fit on `ds`).
pub fn fit_cx_with_base(
    ds: &LabeledDataset,
    base: PosteriorModel,
    problem: &NpProblem,
    opts: &FitOptions,
) -> Result<FitVerdict> {
    problem.validate(ds.num_classes())?;
    opts.search.validate()?;
    let priors = class_priors(ds)?;
    let posteriors = predict_proba_batch(&base, ds.features())?;
    let ctx = CxContext::new(posteriors, priors.clone(), problem.clone())?;
    let search = maximize(
        |l| LambdaVector::new(l.to_vec()).and_then(|l| g_hat_cx(&l, &ctx)).unwrap_or(f64::NAN),
        problem.num_constraints(),
        opts.cx_upper,
        opts,
    )?;
    let lambda = LambdaVector::new(search.argmax.clone())?;
    let rates = confusion_of(&ctx.plug_in_labels(&lambda)?, ds.labels(), ds.num_classes());
    verdict(
        Algorithm::Cx,
        base,
        priors,
        problem,
        search,
        opts.cx_upper,
        opts.search.step_tolerance,
        rates,
        ds.class_names().map(<[String]>::to_vec),
    )
}

/// Split per class in half; fit the base model and priors on the second
/// half, estimate rates on the first, maximize the ER dual over `[0, er_range]^|A|`.
pub fn fit_er<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    problem: &NpProblem,
    estimator: &Estimator,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<FitVerdict> {
    problem.validate(ds.num_classes())?;
    opts.search.validate()?;
    if !(opts.er_range > 0.0 && opts.er_range.is_finite()) {
        return Err(NpmcError::InvalidArgument(format!("ER range must be positive, got {}", opts.er_range)));
    }
    let (d1, d2) = stratified_split(ds, 0.5, rng)?;
    let base = estimator.fit(&d2)?;
    let priors = class_priors(&d2)?;
    let posteriors = predict_proba_batch(&base, d1.features())?;
    let ctx = ErContext::new(posteriors, d1.labels().to_vec(), priors.clone(), problem.clone())?;
    let search = maximize(
        |l| LambdaVector::new(l.to_vec()).and_then(|l| g_hat_er(&l, &ctx)).unwrap_or(f64::NAN),
        problem.num_constraints(),
        opts.er_range,
        opts,
    )?;
    let rates = ctx.confusion_rates(&LambdaVector::new(search.argmax.clone())?)?;
    verdict(
        Algorithm::Er,
        base,
        priors,
        problem,
        search,
        opts.er_range,
        opts.search.step_tolerance,
        rates,
        ds.class_names().map(<[String]>::to_vec),
    )
}

#[allow(clippy::too_many_arguments)]
fn verdict(
    algorithm: Algorithm,
    base: PosteriorModel,
    priors: PriorVector,
    problem: &NpProblem,
    search: SearchResult,
    upper: f64,
    step_tolerance: f64,
    rates: Vec<Vec<f64>>,
    class_names: Option<Vec<String>>,
) -> Result<FitVerdict> {
    let lambda = LambdaVector::new(search.argmax.clone())?;
    let boundary_hit = search.argmax.iter().any(|&l| l >= upper - step_tolerance);
    // Without constraints every classifier is feasible.
    if problem.num_constraints() > 0 && search.value > INFEASIBILITY_THRESHOLD {
        return Ok(FitVerdict::Infeasible(InfeasibleReport {
            algorithm,
            dual_value: search.value,
            lambda_at_max: lambda,
            boundary_hit,
            evaluations: search.evaluations,
        }));
    }
    if boundary_hit {
        log::warn!("{} search ended on the box boundary with a feasible dual", algorithm.name());
    }
    let slackness = slackness(&lambda, problem, &rates);
    Ok(FitVerdict::Feasible(NpClassifier {
        base,
        lambda_hat: lambda,
        priors,
        problem: problem.clone(),
        dual_value: search.value,
        algorithm,
        diagnostics: FitDiagnostics {
            evaluations: search.evaluations,
            converged: search.converged,
            boundary_hit,
            slackness,
        },
        class_names,
    }))
}

/// Plug-in predictions with the classifier's frozen multipliers, priors and base model.
pub fn predict(clf: &NpClassifier, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
    let costs = clf.costs()?;
    let post = predict_proba_batch(&clf.base, x)?;
    Ok(post
        .rows()
        .into_iter()
        .map(|r| costs.classify(r.as_slice().expect("standard layout")))
        .collect())
}

/// Plain posterior argmax, ties to the smallest index.
pub fn vanilla_classify<M: Posterior + ?Sized>(model: &M, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
    let post = predict_proba_batch(model, x)?;
    Ok(post
        .rows()
        .into_iter()
        .map(|r| argmax(r.as_slice().expect("standard layout")))
        .collect())
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct DocumentOut<'a> {
    format_version: u32,
    #[serde(flatten)]
    verdict: &'a FitVerdict,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// Serialize a verdict to the versioned JSON document.
pub fn verdict_to_json(verdict: &FitVerdict) -> Result<String> {
    Ok(serde_json::to_string_pretty(&DocumentOut {
        format_version: FORMAT_VERSION,
        verdict,
    })?)
}

pub fn verdict_from_json(text: &str) -> Result<FitVerdict> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    let probe: VersionProbe = serde_json::from_value(value.clone())?;
    if probe.format_version != FORMAT_VERSION {
        return Err(NpmcError::UnsupportedVersion(probe.format_version));
    }
    if let Some(obj) = value.as_object_mut() {
        obj.remove("format_version");
    }
    Ok(serde_json::from_value(value)?)
}

pub fn save_verdict(verdict: &FitVerdict, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| NpmcError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    std::io::Write::write_all(&mut w, verdict_to_json(verdict)?.as_bytes()).map_err(io)?;
    std::io::Write::flush(&mut w).map_err(io)
}

pub fn load_verdict(path: impl AsRef<Path>) -> Result<FitVerdict> {
    let path = path.as_ref();
    let mut text = String::new();
    let file = File::open(path).map_err(|source| NpmcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    std::io::Read::read_to_string(&mut BufReader::new(file), &mut text).map_err(|source| NpmcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    verdict_from_json(&text)
}
