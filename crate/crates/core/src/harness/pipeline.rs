//! Per-pair feature extraction: SAS descriptors, optic-to-SAS descriptors and
//! both quality indices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{extract_features, FeatureVector, MorletParams};
use crate::error::Result;
use crate::fusion::{quality_index, TrainingSample};
use crate::model::{ImagePair, Label};
use crate::optic2sas::{optic_to_sas, LambertianHeight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Height given to the brightest optical pixel, meters.
    pub height_scale_m: f64,
    pub morlet: MorletParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            height_scale_m: 0.45,
            morlet: MorletParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures {
    pub id: String,
    pub label: Option<Label>,
    pub sas: FeatureVector,
    pub opt: FeatureVector,
    pub psi_sas: f64,
    pub psi_opt: f64,
}

impl PairFeatures {
    pub fn training_sample(&self) -> Option<TrainingSample> {
        self.label
            .map(|label| TrainingSample::from_features(&self.sas, &self.opt, label))
    }
}

pub fn pair_features(pair: &ImagePair, cfg: &PipelineConfig) -> Result<PairFeatures> {
    let seg = &pair.sas.segmentation;
    let sas = extract_features(&seg.highlight(), &seg.shadow(), &cfg.morlet)?;
    let synthetic = optic_to_sas(
        pair,
        &LambertianHeight {
            height_scale_m: cfg.height_scale_m,
        },
    )?;
    let opt = extract_features(&synthetic.highlight, &synthetic.shadow, &cfg.morlet)?;
    Ok(PairFeatures {
        id: pair.id.clone(),
        label: pair.ground_truth,
        sas,
        opt,
        psi_sas: quality_index(&pair.sas.image, seg)?,
        psi_opt: quality_index(&pair.optical.image, &pair.optical.segmentation)?,
    })
}

/// Features of every pair, in input order. The first failing pair (by
/// index) aborts the run.
pub fn extract_all(pairs: &[ImagePair], cfg: &PipelineConfig) -> Result<Vec<PairFeatures>> {
    let results: Vec<Result<PairFeatures>> = pairs.par_iter().map(|p| pair_features(p, cfg)).collect();
    results.into_iter().collect()
}
