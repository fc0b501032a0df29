//! Experiment configuration, read from TOML.
//!
//! Classes are numbered from 1 in configuration files and in every report;
//! the conversion to the library's 0-based ids happens here.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use npmc_core::{Estimator, FitOptions, LogisticOptions, NpProblem, SearchConfig, SimulationCase};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub methods: Vec<MethodSpec>,
    pub data: DataConfig,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default)]
    pub estimators: EstimatorSettings,
    #[serde(default)]
    pub smote: Option<SmoteConfig>,
}

fn default_reps() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    Case1 { n: usize, test_n: usize },
    Case2 { n: usize, test_n: usize },
    Csv {
        path: PathBuf,
        label_column: String,
        /// Per-class share of the file used for training; the rest is the test set.
        train_fraction: f64,
    },
}

impl DataConfig {
    pub fn simulation_case(&self) -> Option<SimulationCase> {
        match self {
            DataConfig::Case1 { .. } => Some(SimulationCase::Case1),
            DataConfig::Case2 { .. } => Some(SimulationCase::Case2),
            DataConfig::Csv { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    PerClass {
        weights: Vec<f64>,
        #[serde(default)]
        constraints: Vec<ClassBound>,
    },
    ConfusionCell {
        weights: Vec<Vec<f64>>,
        #[serde(default)]
        constraints: Vec<CellBound>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClassBound {
    pub class: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CellBound {
    pub truth: usize,
    pub predicted: usize,
    pub alpha: f64,
}

impl ProblemConfig {
    pub fn to_problem(&self) -> Result<NpProblem, CliError> {
        let zero_based = |c: usize, key: &str| {
            c.checked_sub(1)
                .ok_or_else(|| CliError::config(key, "classes are numbered from 1"))
        };
        Ok(match self {
            ProblemConfig::PerClass { weights, constraints } => {
                let mut bounds = Vec::with_capacity(constraints.len());
                for (i, b) in constraints.iter().enumerate() {
                    bounds.push((zero_based(b.class, &format!("problem.constraints[{i}].class"))?, b.alpha));
                }
                NpProblem::per_class(weights.clone(), bounds)
            }
            ProblemConfig::ConfusionCell { weights, constraints } => {
                let mut bounds = Vec::with_capacity(constraints.len());
                for (i, b) in constraints.iter().enumerate() {
                    let t = zero_based(b.truth, &format!("problem.constraints[{i}].truth"))?;
                    let p = zero_based(b.predicted, &format!("problem.constraints[{i}].predicted"))?;
                    bounds.push(((t, p), b.alpha));
                }
                NpProblem::confusion_cell(weights.clone(), bounds)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub initial_step: f64,
    pub shrink_factor: f64,
    pub step_tolerance: f64,
    pub max_evaluations: usize,
    pub multistart: bool,
    pub cx_upper: f64,
    /// Search range for the ER dual.
    #[serde(alias = "R")]
    pub er_range: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let fit = FitOptions::default();
        Self {
            initial_step: fit.search.initial_step,
            shrink_factor: fit.search.shrink_factor,
            step_tolerance: fit.search.step_tolerance,
            max_evaluations: fit.search.max_evaluations,
            multistart: fit.multistart,
            cx_upper: fit.cx_upper,
            er_range: fit.er_range,
        }
    }
}

impl SearchSettings {
    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            search: SearchConfig {
                initial_step: self.initial_step,
                shrink_factor: self.shrink_factor,
                step_tolerance: self.step_tolerance,
                max_evaluations: self.max_evaluations,
                initial_point: None,
            },
            multistart: self.multistart,
            cx_upper: self.cx_upper,
            er_range: self.er_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSettings {
    pub logistic: LogisticOptions,
    /// Neighbour count for kNN; `floor(sqrt(n / K))` when absent.
    pub knn_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SmoteConfig {
    #[serde(default = "default_neighbors")]
    pub neighbors: usize,
    pub multiplier: usize,
}

fn default_neighbors() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Cx,
    Er,
    Vanilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Logistic,
    Lda,
    Knn,
    Gknb,
}

impl EstimatorKind {
    pub fn estimator(self, settings: &EstimatorSettings) -> Estimator {
        match self {
            EstimatorKind::Logistic => Estimator::Logistic(settings.logistic.clone()),
            EstimatorKind::Lda => Estimator::Lda,
            EstimatorKind::Knn => Estimator::Knn { k: settings.knn_k },
            EstimatorKind::Gknb => Estimator::KernelNb,
        }
    }
}

/// `algorithm+estimator`, for example `cx+logistic` or `vanilla+knn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, Serialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    pub algorithm: AlgorithmKind,
    pub estimator: EstimatorKind,
}

impl MethodSpec {
    /// Stable small integer identifying the method, independent of its
    /// position in a configuration.
    pub fn id(&self) -> u64 {
        let a = match self.algorithm {
            AlgorithmKind::Cx => 0,
            AlgorithmKind::Er => 1,
            AlgorithmKind::Vanilla => 2,
        };
        let e = match self.estimator {
            EstimatorKind::Logistic => 0,
            EstimatorKind::Lda => 1,
            EstimatorKind::Knn => 2,
            EstimatorKind::Gknb => 3,
        };
        a * 4 + e
    }
}

impl FromStr for MethodSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, e) = s
            .split_once('+')
            .ok_or_else(|| format!("method `{s}` is not of the form algorithm+estimator"))?;
        let algorithm = match a.trim() {
            "cx" => AlgorithmKind::Cx,
            "er" => AlgorithmKind::Er,
            "vanilla" => AlgorithmKind::Vanilla,
            other => return Err(format!("unknown algorithm `{other}` (expected cx, er or vanilla)")),
        };
        let estimator = match e.trim() {
            "logistic" => EstimatorKind::Logistic,
            "lda" => EstimatorKind::Lda,
            "knn" => EstimatorKind::Knn,
            "gknb" => EstimatorKind::Gknb,
            other => return Err(format!("unknown estimator `{other}` (expected logistic, lda, knn or gknb)")),
        };
        Ok(Self { algorithm, estimator })
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> String {
        m.to_string()
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.algorithm {
            AlgorithmKind::Cx => "cx",
            AlgorithmKind::Er => "er",
            AlgorithmKind::Vanilla => "vanilla",
        };
        let e = match self.estimator {
            EstimatorKind::Logistic => "logistic",
            EstimatorKind::Lda => "lda",
            EstimatorKind::Knn => "knn",
            EstimatorKind::Gknb => "gknb",
        };
        write!(f, "{a}+{e}")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that do not need the data. Problem/class-count consistency is
    /// checked once the number of classes is known.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.reps == 0 {
            return Err(CliError::config("reps", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(CliError::config("methods", "at least one method is required"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(CliError::config(&format!("methods[{i}]"), format!("duplicate method `{m}`")));
            }
        }
        match &self.data {
            DataConfig::Case1 { n, test_n } | DataConfig::Case2 { n, test_n } => {
                if *n == 0 {
                    return Err(CliError::config("data.n", "must be positive"));
                }
                if *test_n == 0 {
                    return Err(CliError::config("data.test_n", "must be positive"));
                }
            }
            DataConfig::Csv { train_fraction, .. } => {
                if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                    return Err(CliError::config("data.train_fraction", "must lie strictly between 0 and 1"));
                }
            }
        }
        let problem = self.problem.to_problem()?;
        if let Some(case) = self.data.simulation_case() {
            let k = case.mixture().num_classes();
            problem
                .validate(k)
                .map_err(|e| CliError::config("problem", e.to_string()))?;
        }
        self.search
            .fit_options()
            .search
            .validate()
            .map_err(|e| CliError::config("search", e.to_string()))?;
        if !(self.search.cx_upper > 0.0) {
            return Err(CliError::config("search.cx_upper", "must be positive"));
        }
        if !(self.search.er_range > 0.0) {
            return Err(CliError::config("search.er_range", "must be positive"));
        }
        if self.estimators.knn_k == Some(0) {
            return Err(CliError::config("estimators.knn_k", "must be positive"));
        }
        if let Some(s) = &self.smote {
            if s.multiplier == 0 {
                return Err(CliError::config("smote.multiplier", "must be at least 1"));
            }
            if s.neighbors == 0 {
                return Err(CliError::config("smote.neighbors", "must be at least 1"));
            }
        }
        Ok(())
    }
}
