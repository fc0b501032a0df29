use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use npmc_bench::{case1_context, case1_problem, case1_sample};
use npmc_core::{
    fit_cx, fit_er, g_hat_cx, hooke_jeeves_maximize, predict_proba_batch, Estimator, FitOptions, LambdaVector,
    SearchConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dual(c: &mut Criterion) {
    let mut group = c.benchmark_group("g_hat_cx");
    for n in [500, 2000, 8000] {
        let ctx = case1_context(n);
        let lambda = LambdaVector::new(vec![2.5, 12.0]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &ctx, |b, ctx| {
            b.iter(|| g_hat_cx(black_box(&lambda), ctx).unwrap())
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let ctx = case1_context(2000);
    c.bench_function("hooke_jeeves/cx_dual_n2000", |b| {
        b.iter(|| {
            hooke_jeeves_maximize(
                |l| g_hat_cx(&LambdaVector::new(l.to_vec()).unwrap(), &ctx).unwrap(),
                &[0.0, 0.0],
                &[1e4, 1e4],
                &SearchConfig::default(),
            )
            .unwrap()
        })
    });
}

fn estimators(c: &mut Criterion) {
    let train = case1_sample(2000, 2);
    let test = case1_sample(1000, 3);
    let mut group = c.benchmark_group("estimator");
    group.sample_size(20);
    for name in ["logistic", "lda", "knn", "gknb"] {
        let est = Estimator::from_name(name).unwrap();
        group.bench_function(BenchmarkId::new("fit", name), |b| b.iter(|| est.fit(black_box(&train)).unwrap()));
        let model = est.fit(&train).unwrap();
        group.bench_function(BenchmarkId::new("predict_1000", name), |b| {
            b.iter(|| predict_proba_batch(&model, black_box(test.features())).unwrap())
        });
    }
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let train = case1_sample(2000, 4);
    let problem = case1_problem();
    let logistic = Estimator::from_name("logistic").unwrap();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("cx_logistic_n2000", |b| {
        b.iter(|| fit_cx(&train, &problem, &logistic, &FitOptions::default()).unwrap())
    });
    group.bench_function("er_logistic_n2000", |b| {
        b.iter(|| {
            fit_er(&train, &problem, &logistic, &FitOptions::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, dual, search, estimators, end_to_end);
criterion_main!(benches);
