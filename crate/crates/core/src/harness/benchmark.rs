//! The synthetic benchmark: seeded scenes per class plus mismatched pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::{generate_scene, mismatched_pair, Corruption, ObjectType, SceneRanges, SceneSpec};
use crate::error::{Error, Result};
use crate::model::{ImagePair, Modality};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    /// Objects generated per target type (M, C, N).
    pub per_class: usize,
    pub seed: u64,
    pub noise_level: f64,
    /// Every `mismatch_every`-th object of each type is paired with the
    /// optical view of another type's object (label U). Zero disables.
    pub mismatch_every: usize,
    /// Noise multiplier applied to one randomly chosen modality per pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corruption_factor: Option<f64>,
    pub ranges: SceneRanges,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            per_class: 50,
            seed: 0,
            noise_level: 0.03,
            mismatch_every: 4,
            corruption_factor: None,
            ranges: SceneRanges::default(),
        }
    }
}

impl BenchmarkSpec {
    /// Default benchmark with one modality per pair at 5x noise.
    pub fn corrupted() -> Self {
        Self {
            corruption_factor: Some(5.0),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_class == 0 {
            return Err(Error::InvalidSpec("per_class must be positive".into()));
        }
        if self.mismatch_every == 1 {
            return Err(Error::InvalidSpec("mismatch_every = 1 leaves no matched pairs".into()));
        }
        Ok(())
    }

    /// Scene seed of object `index` of `kind`.
    fn scene_seed(&self, kind: usize, index: usize) -> u64 {
        // splitmix-style spread so nearby benchmark seeds do not share scenes
        let mut z = self
            .seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(1 + (kind * 100_003 + index) as u64));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn scene_spec(&self, kind: usize, index: usize) -> Result<SceneSpec> {
        let seed = self.scene_seed(kind, index);
        let mut spec = SceneSpec::sample(ObjectType::ALL[kind], seed, self.noise_level, &self.ranges)?;
        if let Some(factor) = self.corruption_factor {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(3);
            let modality = if rng.gen_bool(0.5) { Modality::Sas } else { Modality::Optical };
            spec.corruption = Some(Corruption { modality, factor });
        }
        Ok(spec)
    }
}

fn is_mismatched(spec: &BenchmarkSpec, index: usize) -> bool {
    spec.mismatch_every > 1 && index % spec.mismatch_every == spec.mismatch_every - 1
}

/// Builds the benchmark pairs. Matched pairs come first per type; for the
/// mismatched slots the SAS view of type `k` meets the optical view of type
/// `k + 1 (mod 3)`.
pub fn build_benchmark(spec: &BenchmarkSpec) -> Result<Vec<ImagePair>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..3)
        .flat_map(|k| (0..spec.per_class).map(move |i| (k, i)))
        .collect();
    let scenes: Vec<Result<ImagePair>> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let id = format!("{}-{i:03}", ObjectType::ALL[k].label().as_str().to_lowercase());
            generate_scene(&spec.scene_spec(k, i)?, id)
        })
        .collect();
    let scenes: Vec<ImagePair> = scenes.into_iter().collect::<Result<_>>()?;
    let at = |k: usize, i: usize| &scenes[k * spec.per_class + i];

    let mut pairs = Vec::with_capacity(scenes.len());
    for k in 0..3 {
        for i in 0..spec.per_class {
            if is_mismatched(spec, i) {
                let other = (k + 1) % 3;
                let id = format!(
                    "u-{i:03}-{}{}",
                    ObjectType::ALL[k].label().as_str().to_lowercase(),
                    ObjectType::ALL[other].label().as_str().to_lowercase()
                );
                pairs.push(mismatched_pair(id, at(k, i), at(other, i))?);
            } else {
                pairs.push(at(k, i).clone());
            }
        }
    }
    Ok(pairs)
}
