//! Seeded replication runner: data, optional oversampling, every requested
//! method, evaluation on held-out data, then per-replication rows and an
//! aggregate summary.
//!
//! Replication `r` (1-based) uses seed `master_seed + r`. Inside a
//! replication every random consumer draws from its own ChaCha stream of
//! that seed, so results do not depend on scheduling or on which other
//! methods are configured before it.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use npmc_core::{
    aggregate, class_priors, evaluate, fit_cx_with_base, fit_er, load_csv, smote_half, stratified_split,
    vanilla_classify, EvalReport, FitVerdict, LabeledDataset, NpProblem, NpmcError, PosteriorModel, Summary,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AlgorithmKind, DataConfig, EstimatorKind, ExperimentConfig, MethodSpec, SCHEMA_VERSION};
use crate::error::CliError;

const DATA_STREAM: u64 = 0;
const SMOTE_STREAM: u64 = 1;
/// A method draws from stream `METHOD_STREAM + MethodSpec::id()`.
const METHOD_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Plain posterior argmax; no dual involved.
    Baseline(EvalReport),
    Feasible {
        dual_value: f64,
        lambda: Vec<f64>,
        report: EvalReport,
    },
    Infeasible {
        dual_value: f64,
        lambda: Vec<f64>,
    },
}

impl Outcome {
    pub fn report(&self) -> Option<&EvalReport> {
        match self {
            Outcome::Baseline(r) | Outcome::Feasible { report: r, .. } => Some(r),
            Outcome::Infeasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub seed: u64,
    pub method: MethodSpec,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub master_seed: u64,
    pub problem: NpProblem,
    pub class_names: Vec<String>,
    /// Replication-major, then in configured method order.
    pub records: Vec<ReplicationRecord>,
    pub summaries: Vec<MethodSummary>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

enum Source {
    Simulated { mixture: npmc_core::GaussianMixture, n: usize, test_n: usize },
    File { data: LabeledDataset, train_fraction: f64 },
}

impl Source {
    fn from_config(data: &DataConfig) -> Result<Self, CliError> {
        Ok(match data {
            DataConfig::Case1 { n, test_n } | DataConfig::Case2 { n, test_n } => Source::Simulated {
                mixture: data.simulation_case().expect("simulation source").mixture(),
                n: *n,
                test_n: *test_n,
            },
            DataConfig::Csv {
                path,
                label_column,
                train_fraction,
            } => Source::File {
                data: load_csv(path, label_column)
                    .map_err(|e| CliError::core(format!("loading {}", path.display()), e))?,
                train_fraction: *train_fraction,
            },
        })
    }

    fn num_classes(&self) -> usize {
        match self {
            Source::Simulated { mixture, .. } => mixture.num_classes(),
            Source::File { data, .. } => data.num_classes(),
        }
    }

    fn class_names(&self) -> Vec<String> {
        if let Source::File { data, .. } = self {
            if let Some(names) = data.class_names() {
                return names.to_vec();
            }
        }
        (1..=self.num_classes()).map(|k| k.to_string()).collect()
    }

    fn draw(&self, seed: u64) -> npmc_core::Result<(LabeledDataset, LabeledDataset)> {
        let mut rng = rng_for(seed, DATA_STREAM);
        match self {
            Source::Simulated { mixture, n, test_n } => {
                let train = mixture.sample(*n, &mut rng)?;
                let test = mixture.sample(*test_n, &mut rng)?;
                Ok((train, test))
            }
            Source::File { data, train_fraction } => stratified_split(data, *train_fraction, &mut rng),
        }
    }
}

/// Run every replication of `cfg` with the given master seed, using up to
/// `jobs` worker threads (all cores when `None`).
pub fn run_experiment(cfg: &ExperimentConfig, master_seed: u64, jobs: Option<usize>) -> Result<ExperimentOutput, CliError> {
    cfg.validate()?;
    let problem = cfg.problem.to_problem()?;
    let source = Source::from_config(&cfg.data)?;
    problem
        .validate(source.num_classes())
        .map_err(|e| CliError::config("problem", e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let per_rep: Vec<Result<Vec<ReplicationRecord>, CliError>> = pool.install(|| {
        (1..=cfg.reps)
            .into_par_iter()
            .map(|r| run_replication(cfg, &problem, &source, r, master_seed.wrapping_add(r as u64)))
            .collect()
    });

    let mut records = Vec::with_capacity(cfg.reps * cfg.methods.len());
    for rep in per_rep {
        records.extend(rep?);
    }
    let mut summaries = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let reports: Vec<Option<EvalReport>> = records
            .iter()
            .filter(|r| r.method == *m)
            .map(|r| r.outcome.report().cloned())
            .collect();
        let summary = aggregate(&reports).map_err(|e| CliError::core(format!("aggregating {m}"), e))?;
        summaries.push(MethodSummary {
            method: m.to_string(),
            summary,
        });
    }
    Ok(ExperimentOutput {
        master_seed,
        problem,
        class_names: source.class_names(),
        records,
        summaries,
    })
}

fn run_replication(
    cfg: &ExperimentConfig,
    problem: &NpProblem,
    source: &Source,
    replication: usize,
    seed: u64,
) -> Result<Vec<ReplicationRecord>, CliError> {
    let fail = |method: String| {
        move |source: NpmcError| CliError::Replication {
            replication,
            seed,
            method: method.clone(),
            source,
        }
    };
    let (mut train, test) = source.draw(seed).map_err(fail("data".into()))?;
    if let Some(s) = &cfg.smote {
        train = smote_half(&train, s.neighbors, s.multiplier, &mut rng_for(seed, SMOTE_STREAM))
            .map_err(fail("smote".into()))?;
    }
    class_priors(&train).map_err(fail("data".into()))?;

    let options = cfg.search.fit_options();
    // Full-data base models are shared between CX and vanilla of the same estimator.
    let mut bases: HashMap<EstimatorKind, PosteriorModel> = HashMap::new();
    let mut records = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let err = fail(m.to_string());
        let estimator = m.estimator.estimator(&cfg.estimators);
        let outcome = match m.algorithm {
            AlgorithmKind::Cx | AlgorithmKind::Vanilla => {
                let base = match bases.get(&m.estimator) {
                    Some(b) => b.clone(),
                    None => {
                        let b = estimator.fit(&train).map_err(&err)?;
                        bases.insert(m.estimator, b.clone());
                        b
                    }
                };
                if m.algorithm == AlgorithmKind::Vanilla {
                    let pred = vanilla_classify(&base, test.features()).map_err(&err)?;
                    Outcome::Baseline(evaluate(&pred, test.labels(), problem).map_err(&err)?)
                } else {
                    let v = fit_cx_with_base(&train, base, problem, &options).map_err(&err)?;
                    outcome_of(v, &test, problem).map_err(&err)?
                }
            }
            AlgorithmKind::Er => {
                let mut rng = rng_for(seed, METHOD_STREAM + m.id());
                let v = fit_er(&train, problem, &estimator, &options, &mut rng).map_err(&err)?;
                outcome_of(v, &test, problem).map_err(&err)?
            }
        };
        log::debug!("replication {replication} {m}: {outcome:?}");
        records.push(ReplicationRecord {
            replication,
            seed,
            method: *m,
            outcome,
        });
    }
    log::info!("replication {replication} (seed {seed}) done");
    Ok(records)
}

fn outcome_of(v: FitVerdict, test: &LabeledDataset, problem: &NpProblem) -> npmc_core::Result<Outcome> {
    Ok(match v {
        FitVerdict::Feasible(clf) => {
            let pred = npmc_core::predict(&clf, test.features())?;
            Outcome::Feasible {
                dual_value: clf.dual_value,
                lambda: clf.lambda_hat.values().to_vec(),
                report: evaluate(&pred, test.labels(), problem)?,
            }
        }
        FitVerdict::Infeasible(r) => Outcome::Infeasible {
            dual_value: r.dual_value,
            lambda: r.lambda_at_max.values().to_vec(),
        },
    })
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// One row per replication per method. Rates are empty for infeasible
/// fits; dual values and multipliers are empty for baselines.
pub fn replications_csv(out: &ExperimentOutput) -> Result<String, CliError> {
    let labels = out.problem.constraint_labels();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["replication".to_string(), "seed".into(), "method".into(), "feasible".into()];
    header.push("dual_value".into());
    header.push("objective".into());
    header.extend(out.class_names.iter().map(|c| format!("err_{c}")));
    header.extend(labels.iter().map(|l| format!("achieved_{l}")));
    header.extend(labels.iter().map(|l| format!("lambda_{l}")));
    let csv_err = |e: csv::Error| CliError::core("writing replications.csv", NpmcError::from(e));
    wtr.write_record(&header).map_err(csv_err)?;

    let k = out.class_names.len();
    let blank = |n: usize| vec![String::new(); n];
    for rec in &out.records {
        let mut row = vec![rec.replication.to_string(), rec.seed.to_string(), rec.method.to_string()];
        let (feasible, dual, lambda) = match &rec.outcome {
            Outcome::Baseline(_) => (true, None, None),
            Outcome::Feasible { dual_value, lambda, .. } => (true, Some(*dual_value), Some(lambda)),
            Outcome::Infeasible { dual_value, lambda } => (false, Some(*dual_value), Some(lambda)),
        };
        row.push(feasible.to_string());
        row.push(dual.map(num).unwrap_or_default());
        match rec.outcome.report() {
            Some(r) => {
                row.push(num(r.objective));
                row.extend(r.per_class_error.iter().copied().map(num));
                row.extend(r.constrained_rates(&out.problem).into_iter().map(num));
            }
            None => {
                row.extend(blank(1 + k + labels.len()));
            }
        }
        match lambda {
            Some(l) => row.extend(l.iter().copied().map(num)),
            None => row.extend(blank(labels.len())),
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::io("replications.csv", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    schema_version: u32,
    master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix_time: Option<u64>,
    classes: &'a [String],
    constraint_labels: Vec<String>,
    methods: &'a [MethodSummary],
}

pub fn summary_json(out: &ExperimentOutput, timestamp: bool) -> Result<String, CliError> {
    let doc = SummaryDocument {
        schema_version: SCHEMA_VERSION,
        master_seed: out.master_seed,
        generated_unix_time: timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
        classes: &out.class_names,
        constraint_labels: out.problem.constraint_labels(),
        methods: &out.summaries,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| CliError::core("writing summary.json", NpmcError::from(e)))
}

/// Write `summary.json` and `replications.csv` into `dir`, creating it if needed.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path, timestamp: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join("replications.csv");
    fs::write(&csv_path, replications_csv(out)?).map_err(|e| CliError::io(&csv_path, e))?;
    let json_path = dir.join("summary.json");
    fs::write(&json_path, summary_json(out, timestamp)?).map_err(|e| CliError::io(&json_path, e))?;
    Ok(())
}
