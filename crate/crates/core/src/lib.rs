//! Neyman-Pearson multi-class classification.
//!
//! Minimize a weighted combination of per-class (or confusion-cell) error
//! rates subject to upper bounds on selected rates. The constrained problem
//! is solved through its Lagrangian dual: for fixed multipliers the optimal
//! rule is a cost-sensitive plug-in classifier, and the multipliers are
//! chosen by maximizing an empirical dual with pattern search. A maximized
//! dual above 1 certifies the problem as infeasible.
//!
//! ```no_run
//! use npmc_core::{fit_cx, predict, Estimator, FitOptions, GaussianMixture, NpProblem};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let train = GaussianMixture::case1().sample(2000, &mut rng).unwrap();
//! // Minimize the class-2 error with class-1 error <= 5% and class-3 error <= 1%.
//! let problem = NpProblem::per_class(vec![0.0, 1.0, 0.0], [(0, 0.05), (2, 0.01)]);
//! let verdict = fit_cx(&train, &problem, &Estimator::Lda, &FitOptions::default()).unwrap();
//! if let Some(clf) = verdict.classifier() {
//!     let labels = predict(clf, train.features()).unwrap();
//!     assert_eq!(labels.len(), train.len());
//! }
//! ```

pub mod augment;
pub mod cost;
pub mod dataset;
pub mod dual;
pub mod error;
pub mod eval;
mod math;
pub mod npmc;
pub mod optimize;
pub mod posterior;
pub mod problem;
pub mod simulate;

pub use augment::{smote_half, smote_half_traced, SmoteOutput, SyntheticOrigin};
pub use cost::{cost_matrix, cost_vector, cs_classify, gnpmc_cs_classify, CostMatrix, CostVector, Costs};
pub use dataset::{class_priors, load_csv, load_features_csv, read_csv, read_features_csv, stratified_split, write_csv, write_csv_to, LabeledDataset, PriorVector};
pub use dual::{f_hat_cx, g_hat_cx, g_hat_er, CxContext, ErContext};
pub use error::{NpmcError, Result};
pub use eval::{aggregate, evaluate, EvalReport, Summary};
pub use npmc::{
    fit_cx, fit_cx_with_base, fit_er, load_verdict, predict, save_verdict, vanilla_classify, Algorithm, FitOptions,
    FitVerdict, InfeasibleReport, NpClassifier,
};
pub use optimize::{hooke_jeeves_maximize, hooke_jeeves_multistart, SearchConfig, SearchResult};
pub use posterior::{predict_proba_batch, Estimator, LogisticOptions, Posterior, PosteriorModel};
pub use problem::{LambdaVector, NpProblem};
pub use simulate::{GaussianMixture, SimulationCase};
