use criterion::{criterion_group, criterion_main, Criterion};

use specsense::{
    gram_matrix, train_detector, DetectorSpec, KernelSpec, SnrSpec,
};
use specsense_bench::{experiment_frames, random_frames};

/// One Monte Carlo trial per detector at experiment scale: train once, score
/// a noise-only frame set (the cost that dominates threshold calibration).
fn bench_score(c: &mut Criterion) {
    let training = experiment_frames();
    let received = random_frames(373, 128, 3);
    let noise_var = SnrSpec::new(-10.0, 1.5).unwrap().noise_variance();

    let specs = [
        DetectorSpec::Pca,
        DetectorSpec::Kpca {
            kernel: KernelSpec::Polynomial { c: 1.0, degree: 2 },
        },
        DetectorSpec::Glrt { rank_tol: 1e-8 },
        DetectorSpec::Kglrt {
            kernel: KernelSpec::GaussianRbf {
                sigma: 15.0 / 2f64.sqrt(),
            },
            rank_tol: 1e-8,
            centering: false,
        },
        DetectorSpec::Ec,
        DetectorSpec::Mme,
    ];

    let mut group = c.benchmark_group("score");
    group.sample_size(10);
    for spec in specs {
        let det = train_detector(&spec, &training, Some(noise_var)).unwrap();
        group.bench_function(spec.id(), |b| b.iter(|| det.score(&received).unwrap()));
    }
    group.finish();
}

fn bench_gram(c: &mut Criterion) {
    let frames = experiment_frames();
    let kernel = KernelSpec::Polynomial { c: 1.0, degree: 2 };
    let mut group = c.benchmark_group("gram");
    group.sample_size(10);
    group.bench_function("polynomial_373x373", |b| {
        b.iter(|| gram_matrix(&kernel, &frames).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_score, bench_gram);
criterion_main!(benches);
