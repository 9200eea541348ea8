//! Per-class Gaussian statistics for each modality, merged by quality weights
//! at decision time.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{merge_features, normalize_weights, Mode, TransferFunction};
use crate::descriptors::FeatureVector;
use crate::error::{Error, Result};
use crate::model::Label;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Relative ridge `eps` in `S + eps * trace(S) / L * I`.
pub const DEFAULT_RIDGE: f64 = 1e-3;

/// One training pair: the SAS and the optical feature vectors and the label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub sas: Vec<f64>,
    pub opt: Vec<f64>,
    pub label: Label,
}

impl TrainingSample {
    pub fn from_features(sas: &FeatureVector, opt: &FeatureVector, label: Label) -> Self {
        Self {
            sas: sas.to_array().to_vec(),
            opt: opt.to_array().to_vec(),
            label,
        }
    }
}

/// Means and regularized population covariances (row-major) of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub label: Label,
    pub count: usize,
    pub mean_sas: Vec<f64>,
    pub mean_opt: Vec<f64>,
    pub cov_sas: Vec<f64>,
    pub cov_opt: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaModel {
    pub format_version: u32,
    pub dim: usize,
    pub ridge: f64,
    pub transfer_sas: TransferFunction,
    pub transfer_opt: TransferFunction,
    /// One entry per label, in `Label::ALL` order.
    pub classes: Vec<ClassStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    /// Class log-densities in `Label::ALL` order.
    pub log_densities: [f64; 4],
    pub w_sas: f64,
    pub w_opt: f64,
}

fn mean_cov<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, dim: usize) -> (DVector<f64>, DMatrix<f64>) {
    let n = rows.clone().count() as f64;
    let mut mean = DVector::zeros(dim);
    for r in rows.clone() {
        mean += DVector::from_column_slice(r);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(dim, dim);
    for r in rows {
        let d = DVector::from_column_slice(r) - &mean;
        cov += &d * d.transpose();
    }
    cov /= n;
    (mean, cov)
}

fn regularize(mut cov: DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    let dim = cov.nrows();
    let trace = cov.trace();
    let shift = if trace > 0.0 { ridge * trace / dim as f64 } else { ridge };
    for i in 0..dim {
        cov[(i, i)] += shift;
    }
    cov
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn from_row_major(v: &[f64], dim: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(dim, dim, v)
}

/// `ln N(t; mean, cov)` through a Cholesky factor; `None` when `cov` is not
/// positive definite.
pub fn gaussian_log_density(mean: &DVector<f64>, cov: &DMatrix<f64>, t: &DVector<f64>) -> Option<f64> {
    let dim = mean.len() as f64;
    let chol = cov.clone().cholesky()?;
    let l = chol.l();
    let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let z = l.solve_lower_triangular(&(t - mean))?;
    let quad = z.norm_squared();
    Some(-0.5 * (dim * (2.0 * std::f64::consts::PI).ln() + log_det + quad))
}

/// Largest log-density; earlier labels win exact ties.
pub fn argmax_label(log_densities: &[f64; 4]) -> Label {
    let mut best = 0;
    for i in 1..4 {
        if log_densities[i] > log_densities[best] {
            best = i;
        }
    }
    Label::ALL[best]
}

/// The label whose log-ratio against every other label is positive, if any.
pub fn pairwise_label(log_densities: &[f64; 4]) -> Option<Label> {
    (0..4)
        .find(|&i| (0..4).all(|j| j == i || log_densities[i] - log_densities[j] > 0.0))
        .map(|i| Label::ALL[i])
}

impl QdaModel {
    pub fn fit(
        samples: &[TrainingSample],
        ridge: f64,
        transfer_sas: TransferFunction,
        transfer_opt: TransferFunction,
    ) -> Result<Self> {
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidSpec(format!("ridge must be positive, got {ridge}")));
        }
        transfer_sas.validate()?;
        transfer_opt.validate()?;
        let dim = samples.first().ok_or(Error::MissingClass(Label::M))?.sas.len();
        for s in samples {
            for v in [&s.sas, &s.opt] {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: (dim, 1),
                        found: (v.len(), 1),
                    });
                }
            }
        }

        let classes = Label::ALL
            .iter()
            .map(|&label| {
                let members: Vec<&TrainingSample> = samples.iter().filter(|s| s.label == label).collect();
                if members.is_empty() {
                    return Err(Error::MissingClass(label));
                }
                let (mean_sas, cov_sas) = mean_cov(members.iter().map(|s| s.sas.as_slice()), dim);
                let (mean_opt, cov_opt) = mean_cov(members.iter().map(|s| s.opt.as_slice()), dim);
                Ok(ClassStats {
                    label,
                    count: members.len(),
                    mean_sas: mean_sas.as_slice().to_vec(),
                    mean_opt: mean_opt.as_slice().to_vec(),
                    cov_sas: row_major(&regularize(cov_sas, ridge)),
                    cov_opt: row_major(&regularize(cov_opt, ridge)),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            format_version: MODEL_FORMAT_VERSION,
            dim,
            ridge,
            transfer_sas,
            transfer_opt,
            classes,
        })
    }

    pub fn fit_default(samples: &[TrainingSample]) -> Result<Self> {
        Self::fit(
            samples,
            DEFAULT_RIDGE,
            TransferFunction::default_sas(),
            TransferFunction::default_optic(),
        )
    }

    pub fn class(&self, label: Label) -> &ClassStats {
        &self.classes[label.index()]
    }

    /// Class mean `a m_sas + b m_opt` and covariance `a^2 S_sas + b^2 S_opt`
    /// with normalized weights.
    pub fn merged_stats(&self, label: Label, w_sas: f64, w_opt: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (a, b) = normalize_weights(w_sas, w_opt)?;
        let c = self.class(label);
        let mean = DVector::from_column_slice(&c.mean_sas) * a + DVector::from_column_slice(&c.mean_opt) * b;
        let cov = from_row_major(&c.cov_sas, self.dim) * (a * a) + from_row_major(&c.cov_opt, self.dim) * (b * b);
        Ok((mean, cov))
    }

    pub fn log_density(&self, label: Label, t: &[f64], w_sas: f64, w_opt: f64) -> Result<f64> {
        if t.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: (self.dim, 1),
                found: (t.len(), 1),
            });
        }
        let (mean, cov) = self.merged_stats(label, w_sas, w_opt)?;
        gaussian_log_density(&mean, &cov, &DVector::from_column_slice(t)).ok_or(Error::SingularCovariance(label))
    }

    pub fn log_densities(&self, t: &[f64], w_sas: f64, w_opt: f64) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for label in Label::ALL {
            out[label.index()] = self.log_density(label, t, w_sas, w_opt)?;
        }
        Ok(out)
    }

    /// Merges the pair with explicit weights and picks the most likely class.
    pub fn classify_weighted(
        &self,
        t_sas: &FeatureVector,
        t_opt: &FeatureVector,
        w_sas: f64,
        w_opt: f64,
    ) -> Result<Classification> {
        let merged = merge_features(t_sas, t_opt, w_sas, w_opt)?;
        let log_densities = self.log_densities(&merged, w_sas, w_opt)?;
        Ok(Classification {
            label: argmax_label(&log_densities),
            log_densities,
            w_sas,
            w_opt,
        })
    }

    /// Weights from the image qualities according to `mode`.
    pub fn classify(
        &self,
        t_sas: &FeatureVector,
        t_opt: &FeatureVector,
        psi_sas: f64,
        psi_opt: f64,
        mode: Mode,
    ) -> Result<Classification> {
        let (w_sas, w_opt) = mode.weights(psi_sas, psi_opt, &self.transfer_sas, &self.transfer_opt);
        self.classify_weighted(t_sas, t_opt, w_sas, w_opt)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let v: Version = serde_json::from_str(text)?;
        if v.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(v.format_version));
        }
        let model: Self = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let bad = |what: &str| Error::InvalidSpec(format!("model file: {what}"));
        if self.classes.len() != 4 {
            return Err(bad("expected four classes"));
        }
        for (c, label) in self.classes.iter().zip(Label::ALL) {
            if c.label != label {
                return Err(bad("classes out of order"));
            }
            if c.mean_sas.len() != self.dim
                || c.mean_opt.len() != self.dim
                || c.cov_sas.len() != self.dim * self.dim
                || c.cov_opt.len() != self.dim * self.dim
            {
                return Err(bad("statistics do not match the feature dimension"));
            }
        }
        self.transfer_sas.validate()?;
        self.transfer_opt.validate()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Frobenius norms of the within-class cross-covariance between the two
/// modality vectors and of each modality's own covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCovarianceReport {
    pub classes: Vec<ClassCrossCovariance>,
    /// `sum cross / sqrt(sum sas * sum opt)` over classes.
    pub pooled_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCrossCovariance {
    pub label: Label,
    pub cross_norm: f64,
    pub sas_norm: f64,
    pub opt_norm: f64,
}

pub fn cross_covariance_report(samples: &[TrainingSample]) -> CrossCovarianceReport {
    let mut classes = Vec::new();
    for label in Label::ALL {
        let members: Vec<&TrainingSample> = samples.iter().filter(|s| s.label == label).collect();
        let Some(first) = members.first() else { continue };
        let dim = first.sas.len();
        let (ms, cs) = mean_cov(members.iter().map(|s| s.sas.as_slice()), dim);
        let (mo, co) = mean_cov(members.iter().map(|s| s.opt.as_slice()), dim);
        let mut cross = DMatrix::zeros(dim, dim);
        for s in &members {
            cross += (DVector::from_column_slice(&s.sas) - &ms) * (DVector::from_column_slice(&s.opt) - &mo).transpose();
        }
        cross /= members.len() as f64;
        classes.push(ClassCrossCovariance {
            label,
            cross_norm: cross.norm(),
            sas_norm: cs.norm(),
            opt_norm: co.norm(),
        });
    }
    let sum = |f: fn(&ClassCrossCovariance) -> f64| classes.iter().map(f).sum::<f64>();
    let denom = (sum(|c| c.sas_norm) * sum(|c| c.opt_norm)).sqrt();
    let pooled_ratio = if denom > 0.0 { sum(|c| c.cross_norm) / denom } else { 0.0 };
    CrossCovarianceReport { classes, pooled_ratio }
}
