//! Synthetic scenes, the end-to-end feature pipeline and Monte-Carlo
//! evaluation.

mod benchmark;
mod eval;
mod io;
mod pipeline;
mod scene;

pub use benchmark::{build_benchmark, BenchmarkSpec};
pub use eval::{
    one_vs_rest_average, run_monte_carlo, EvalConfig, EvalReport, RocCurve, SensitivityReport,
};
pub use io::{
    features_csv, write_atomic, write_benchmark, write_features_csv, write_json, FEATURE_COLUMNS,
    MANIFEST_NAME,
};
pub use pipeline::{extract_all, pair_features, PairFeatures, PipelineConfig};
pub use scene::{
    generate_scene, median3, mismatched_pair, Corruption, ObjectType, SceneRanges, SceneSpec,
};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "SONOPTIC_SEED";

/// Seed from [`SEED_ENV`], or 0.
pub fn default_seed() -> crate::Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| crate::Error::InvalidSpec(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}
