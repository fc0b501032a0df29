//! Fixtures shared by the benchmarks.

use npmc_core::{class_priors, predict_proba_batch, CxContext, Estimator, GaussianMixture, LabeledDataset, NpProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn case1_sample(n: usize, seed: u64) -> LabeledDataset {
    GaussianMixture::case1()
        .sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
        .expect("positive sample size")
}

pub fn case1_problem() -> NpProblem {
    NpProblem::per_class(vec![0.0, 1.0, 0.0], [(0, 0.05), (2, 0.01)])
}

pub fn case1_context(n: usize) -> CxContext {
    let ds = case1_sample(n, 1);
    let model = Estimator::Lda.fit(&ds).expect("lda fits case 1");
    let post = predict_proba_batch(&model, ds.features()).expect("matching dimension");
    CxContext::new(post, class_priors(&ds).expect("all classes present"), case1_problem()).expect("valid context")
}
