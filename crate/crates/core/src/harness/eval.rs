//! Monte-Carlo train/test evaluation and its metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::PairFeatures;
use crate::error::{Error, Result};
use crate::fusion::{
    cross_covariance_report, CrossCovarianceReport, Mode, QdaModel, TrainingSample,
    TransferFunction, DEFAULT_RIDGE,
};
use crate::model::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub trials: usize,
    /// Fraction of each class used for training.
    pub split: f64,
    pub mode: Mode,
    /// Trial `t` draws its split from `seed + t`.
    pub seed: u64,
    pub ridge: f64,
    pub transfer_sas: TransferFunction,
    pub transfer_opt: TransferFunction,
    /// Transfer-weight perturbation draws for the sensitivity study; zero
    /// skips it.
    pub sensitivity_draws: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            split: 0.7,
            mode: Mode::Fused,
            seed: 0,
            ridge: DEFAULT_RIDGE,
            transfer_sas: TransferFunction::default_sas(),
            transfer_opt: TransferFunction::default_optic(),
            sensitivity_draws: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidSpec(format!("split must lie in (0, 1), got {}", self.split)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be positive".into()));
        }
        self.transfer_sas.validate()?;
        self.transfer_opt.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub label: Label,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub draws: usize,
    pub relative_std: f64,
    pub baseline_mean_diag: f64,
    pub p90_abs_change: f64,
    pub max_abs_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Rows: ground truth M, C, N, U; columns: decided label. Rows sum to 1.
    pub confusion: [[f64; 4]; 4],
    /// Raw decision counts summed over trials.
    pub counts: [[u64; 4]; 4],
    pub roc: Vec<RocCurve>,
    pub mean_diag: f64,
    pub trials: usize,
    pub split: f64,
    pub mode: Mode,
    pub config: EvalConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityReport>,
    pub cross_covariance: CrossCovarianceReport,
}

/// Unweighted mean of the four per-class values.
pub fn one_vs_rest_average(per_class: &[f64; 4]) -> f64 {
    per_class.iter().sum::<f64>() / 4.0
}

/// Indices of the labeled pairs per class, in input order.
fn class_indices(features: &[PairFeatures]) -> Result<[Vec<usize>; 4]> {
    let mut by_class: [Vec<usize>; 4] = Default::default();
    for (i, f) in features.iter().enumerate() {
        if let Some(l) = f.label {
            by_class[l.index()].push(i);
        }
    }
    for label in Label::ALL {
        match by_class[label.index()].len() {
            0 => return Err(Error::MissingClass(label)),
            1 => return Err(Error::DegenerateSplit(0)),
            _ => {}
        }
    }
    Ok(by_class)
}

/// Stratified split: `round(split * n)` of each class, at least one on each
/// side.
fn split_trial(by_class: &[Vec<usize>; 4], split: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for members in by_class {
        let mut idx = members.clone();
        idx.shuffle(&mut rng);
        let n_train = ((split * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    (train, test)
}

/// Decisions of one trial: `(truth, log_densities)` per test pair.
type TrialOutcome = Vec<(Label, [f64; 4])>;

fn run_trial(
    features: &[PairFeatures],
    by_class: &[Vec<usize>; 4],
    cfg: &EvalConfig,
    trial: usize,
) -> Result<TrialOutcome> {
    let (train, test) = split_trial(by_class, cfg.split, cfg.seed.wrapping_add(trial as u64));
    let samples: Vec<TrainingSample> = train
        .iter()
        .filter_map(|&i| features[i].training_sample())
        .collect();
    let model = QdaModel::fit(&samples, cfg.ridge, cfg.transfer_sas, cfg.transfer_opt)?;
    test.iter()
        .map(|&i| {
            let f = &features[i];
            let c = model.classify(&f.sas, &f.opt, f.psi_sas, f.psi_opt, cfg.mode)?;
            Ok((f.label.expect("test pairs are labeled"), c.log_densities))
        })
        .collect()
}

fn decide(log_densities: &[f64; 4]) -> Label {
    crate::fusion::argmax_label(log_densities)
}

/// Margin of `label` over its best rival.
fn margin(log_densities: &[f64; 4], label: Label) -> f64 {
    let own = log_densities[label.index()];
    let rival = (0..4)
        .filter(|&j| j != label.index())
        .map(|j| log_densities[j])
        .fold(f64::NEG_INFINITY, f64::max);
    own - rival
}

fn roc_curve(outcomes: &[(Label, [f64; 4])], label: Label) -> RocCurve {
    let mut scored: Vec<(f64, bool)> = outcomes
        .iter()
        .map(|(truth, ld)| (margin(ld, label), *truth == label))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pos = scored.iter().filter(|s| s.1).count().max(1) as f64;
    let neg = scored.iter().filter(|s| !s.1).count().max(1) as f64;

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < scored.len() {
        // all pairs sharing a score cross the threshold together
        let threshold = scored[i].0;
        while i < scored.len() && scored[i].0 == threshold {
            if scored[i].1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push((fp / neg, tp / pos));
    }
    if points.last() != Some(&(1.0, 1.0)) {
        points.push((1.0, 1.0));
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    RocCurve { label, points, auc }
}

fn confusion_of(outcomes: &[(Label, [f64; 4])]) -> ([[u64; 4]; 4], [[f64; 4]; 4]) {
    let mut counts = [[0u64; 4]; 4];
    for (truth, ld) in outcomes {
        counts[truth.index()][decide(ld).index()] += 1;
    }
    let mut confusion = [[0.0; 4]; 4];
    for (row, c) in confusion.iter_mut().zip(&counts) {
        let total: u64 = c.iter().sum();
        if total > 0 {
            for (v, &n) in row.iter_mut().zip(c) {
                *v = n as f64 / total as f64;
            }
        }
    }
    (counts, confusion)
}

fn mean_diag_of(features: &[PairFeatures], by_class: &[Vec<usize>; 4], cfg: &EvalConfig) -> Result<(TrialOutcome, f64)> {
    let per_trial: Vec<Result<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(features, by_class, cfg, t))
        .collect();
    let mut outcomes = Vec::new();
    for r in per_trial {
        outcomes.extend(r?);
    }
    let (_, confusion) = confusion_of(&outcomes);
    let diag: [f64; 4] = std::array::from_fn(|i| confusion[i][i]);
    Ok((outcomes, one_vs_rest_average(&diag)))
}

/// Repeated stratified train/test evaluation over precomputed features.
pub fn run_monte_carlo(features: &[PairFeatures], cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let by_class = class_indices(features)?;
    let (outcomes, mean_diag) = mean_diag_of(features, &by_class, cfg)?;
    let (counts, confusion) = confusion_of(&outcomes);
    let roc = Label::ALL.iter().map(|&l| roc_curve(&outcomes, l)).collect();

    let sensitivity = (cfg.sensitivity_draws > 0)
        .then(|| sensitivity_study(features, &by_class, cfg, mean_diag))
        .transpose()?;
    let samples: Vec<TrainingSample> = features.iter().filter_map(|f| f.training_sample()).collect();

    Ok(EvalReport {
        confusion,
        counts,
        roc,
        mean_diag,
        trials: cfg.trials,
        split: cfg.split,
        mode: cfg.mode,
        config: cfg.clone(),
        sensitivity,
        cross_covariance: cross_covariance_report(&samples),
    })
}

const SENSITIVITY_STD: f64 = 0.1;

fn perturb(tf: &TransferFunction, rng: &mut ChaCha8Rng) -> TransferFunction {
    let mut w = [tf.w_low, tf.w_mid, tf.w_high].map(|v| {
        let noise = Normal::new(0.0, SENSITIVITY_STD * v).map_or(0.0, |n| n.sample(rng));
        (v + noise).clamp(0.0, 1.0)
    });
    w.sort_by(f64::total_cmp);
    TransferFunction {
        w_low: w[0],
        w_mid: w[1],
        w_high: w[2],
        ..*tf
    }
}

/// Re-runs the evaluation with transfer weights perturbed by Gaussian noise
/// of 10% of their values and reports the spread of `mean_diag`.
fn sensitivity_study(
    features: &[PairFeatures],
    by_class: &[Vec<usize>; 4],
    cfg: &EvalConfig,
    baseline: f64,
) -> Result<SensitivityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(7);
    let configs: Vec<EvalConfig> = (0..cfg.sensitivity_draws)
        .map(|_| EvalConfig {
            transfer_sas: perturb(&cfg.transfer_sas, &mut rng),
            transfer_opt: perturb(&cfg.transfer_opt, &mut rng),
            sensitivity_draws: 0,
            ..cfg.clone()
        })
        .collect();
    let mut changes = configs
        .iter()
        .map(|c| mean_diag_of(features, by_class, c).map(|(_, d)| (d - baseline).abs()))
        .collect::<Result<Vec<f64>>>()?;
    changes.sort_by(f64::total_cmp);
    let p90 = changes[((0.9 * changes.len() as f64).ceil() as usize).clamp(1, changes.len()) - 1];
    Ok(SensitivityReport {
        draws: cfg.sensitivity_draws,
        relative_std: SENSITIVITY_STD,
        baseline_mean_diag: baseline,
        p90_abs_change: p90,
        max_abs_change: *changes.last().expect("at least one draw"),
    })
}
