//! Single-shot subcommands: fit one classifier, apply a saved one, export
//! simulated data.

use std::fs;
use std::path::{Path, PathBuf};

use npmc_core::{
    fit_cx, fit_er, load_csv, load_features_csv, load_verdict, predict, save_verdict, write_csv, FitVerdict,
    LabeledDataset, NpmcError, SimulationCase,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{AlgorithmKind, DataConfig, ExperimentConfig, MethodSpec};
use crate::error::CliError;

pub const CLASSIFIER_FILE: &str = "classifier.json";

/// Fit `method` (the config's first method when `None`) on the configured
/// training data and write `classifier.json` into `out_dir`. Simulated data
/// uses `n` rows drawn with `seed`; a CSV source is used whole.
///
/// The verdict document is written in both outcomes; an infeasible verdict
/// is then reported as [`CliError::Infeasible`].
pub fn train(cfg: &ExperimentConfig, method: Option<MethodSpec>, seed: u64, out_dir: &Path) -> Result<PathBuf, CliError> {
    let method = method.unwrap_or(cfg.methods[0]);
    if method.algorithm == AlgorithmKind::Vanilla {
        return Err(CliError::config("method", "train needs cx or er, not vanilla"));
    }
    let problem = cfg.problem.to_problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: LabeledDataset = match &cfg.data {
        DataConfig::Case1 { n, .. } | DataConfig::Case2 { n, .. } => cfg
            .data
            .simulation_case()
            .expect("simulation source")
            .mixture()
            .sample(*n, &mut rng)
            .map_err(|e| CliError::core("simulating training data", e))?,
        DataConfig::Csv { path, label_column, .. } => {
            load_csv(path, label_column).map_err(|e| CliError::core(format!("loading {}", path.display()), e))?
        }
    };
    problem
        .validate(data.num_classes())
        .map_err(|e| CliError::config("problem", e))?;
    let estimator = method.estimator.estimator(&cfg.estimators);
    let options = cfg.search.fit_options();
    let verdict = match method.algorithm {
        AlgorithmKind::Cx => fit_cx(&data, &problem, &estimator, &options),
        _ => fit_er(&data, &problem, &estimator, &options, &mut rng),
    }
    .map_err(|e| CliError::core(format!("fitting {method}"), e))?;

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = out_dir.join(CLASSIFIER_FILE);
    save_verdict(&verdict, &path).map_err(|e| CliError::core("saving classifier", e))?;
    match verdict {
        FitVerdict::Feasible(_) => Ok(path),
        FitVerdict::Infeasible(r) => Err(CliError::Infeasible {
            dual_value: r.dual_value,
        }),
    }
}

/// Predict every row of `data` with a saved classifier and write a one-column
/// `label` CSV. `skip_column` names a column of `data` to ignore (typically
/// the true labels).
pub fn predict_file(model: &Path, data: &Path, skip_column: Option<&str>, out: &Path) -> Result<usize, CliError> {
    let verdict = load_verdict(model).map_err(|e| CliError::core(format!("loading {}", model.display()), e))?;
    let clf = match verdict {
        FitVerdict::Feasible(c) => c,
        FitVerdict::Infeasible(r) => {
            return Err(CliError::core(
                "predict",
                NpmcError::InvalidArgument(format!(
                    "{} holds an infeasibility report (dual {}), not a classifier",
                    model.display(),
                    r.dual_value
                )),
            ))
        }
    };
    let x = load_features_csv(data, skip_column).map_err(|e| CliError::core(format!("loading {}", data.display()), e))?;
    let labels = predict(&clf, x.view()).map_err(|e| CliError::core("predict", e))?;
    let mut wtr = csv::Writer::from_path(out).map_err(|e| CliError::core("writing predictions", e.into()))?;
    let csv_err = |e: csv::Error| CliError::core("writing predictions", e.into());
    wtr.write_record(["label"]).map_err(csv_err)?;
    for &y in &labels {
        wtr.write_record([clf.class_name(y)]).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| CliError::io(out, e))?;
    Ok(labels.len())
}

pub fn simulate(case: SimulationCase, n: usize, seed: u64, label_column: &str, out: &Path) -> Result<(), CliError> {
    let ds = case
        .mixture()
        .sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
        .map_err(|e| CliError::core("simulate", e))?;
    write_csv(&ds, out, label_column).map_err(|e| CliError::core("simulate", e))
}
