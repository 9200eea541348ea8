//! Benchmark fixtures.

use sonoptic_core::harness::{
    build_benchmark, extract_all, generate_scene, BenchmarkSpec, ObjectType, PairFeatures,
    PipelineConfig, SceneRanges, SceneSpec,
};
use sonoptic_core::ImagePair;

/// A default-range scene of `kind` at the benchmark noise level.
pub fn scene(kind: ObjectType, seed: u64) -> ImagePair {
    let spec = SceneSpec::sample(kind, seed, 0.03, &SceneRanges::default()).expect("valid ranges");
    generate_scene(&spec, format!("bench-{seed}")).expect("scene renders")
}

/// Features of a small default benchmark, U pairs included.
pub fn benchmark_features(per_class: usize) -> Vec<PairFeatures> {
    let pairs = build_benchmark(&BenchmarkSpec { per_class, ..BenchmarkSpec::default() }).expect("benchmark");
    extract_all(&pairs, &PipelineConfig::default()).expect("features")
}
