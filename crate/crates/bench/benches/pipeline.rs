use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonoptic_bench::{benchmark_features, scene};
use sonoptic_core::descriptors::{extract_features, orientation_profile, MorletParams};
use sonoptic_core::fusion::{Mode, QdaModel};
use sonoptic_core::harness::{pair_features, ObjectType, PipelineConfig};
use sonoptic_core::optic2sas::{hpr_visible_indices, optic_to_sas, LambertianHeight};

fn hpr(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dome: Vec<Vector3<f64>> = (0..2000)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Vector3::new(x * 20.0, y * 20.0, 8.0 * (1.0 - (x * x + y * y).min(1.0)).sqrt())
        })
        .collect();
    let viewpoint = Vector3::new(-600.0, 0.0, 200.0);
    c.bench_function("hpr_2000_points", |b| b.iter(|| hpr_visible_indices(black_box(&dome), viewpoint)));
}

fn transform(c: &mut Criterion) {
    let pair = scene(ObjectType::Manta, 3);
    let recovery = LambertianHeight { height_scale_m: PipelineConfig::default().height_scale_m };
    c.bench_function("optic_to_sas_manta", |b| b.iter(|| optic_to_sas(black_box(&pair), &recovery)));
}

fn descriptors(c: &mut Criterion) {
    let pair = scene(ObjectType::Cylinder, 5);
    let seg = &pair.sas.segmentation;
    let (highlight, shadow) = (seg.highlight(), seg.shadow());
    let params = MorletParams::default();
    c.bench_function("orientation_profile", |b| b.iter(|| orientation_profile(black_box(&shadow))));
    c.bench_function("extract_features", |b| {
        b.iter(|| extract_features(black_box(&highlight), black_box(&shadow), &params))
    });
    let cfg = PipelineConfig::default();
    c.bench_function("pair_features", |b| b.iter(|| pair_features(black_box(&pair), &cfg)));
}

fn qda(c: &mut Criterion) {
    let feats = benchmark_features(12);
    let samples: Vec<_> = feats.iter().filter_map(|f| f.training_sample()).collect();
    c.bench_function("qda_fit", |b| b.iter(|| QdaModel::fit_default(black_box(&samples))));
    let model = QdaModel::fit_default(&samples).expect("fit");
    c.bench_function("qda_classify_fused", |b| {
        b.iter(|| {
            feats
                .iter()
                .map(|f| model.classify(&f.sas, &f.opt, f.psi_sas, f.psi_opt, Mode::Fused).map(|c| c.label))
                .collect::<Vec<_>>()
        })
    });
}

criterion_group!(benches, hpr, transform, descriptors, qda);
criterion_main!(benches);
