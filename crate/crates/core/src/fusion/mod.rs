//! Quality-weighted fusion of the two modalities and the four-label QDA
//! classifier.

mod qda;

use serde::{Deserialize, Serialize};

use crate::descriptors::{FeatureVector, FEATURE_LEN, THETA_MAX, THETA_MIN};
use crate::error::{Error, Result};
use crate::model::{PixelClass, Region, RoiImage, SegmentationMap};

pub use qda::{
    argmax_label, cross_covariance_report, gaussian_log_density, pairwise_label, ClassCrossCovariance, ClassStats,
    Classification, CrossCovarianceReport, QdaModel, TrainingSample, DEFAULT_RIDGE,
    MODEL_FORMAT_VERSION,
};

/// Value returned by [`quality_index`] when both regions are constant but
/// differ.
pub const PSI_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub psi: f64,
    pub weight: f64,
}

/// Fisher-style separation between background and highlight intensities,
/// `(mu_bg - mu_echo)^2 / (var_bg + var_echo)`, population variances.
pub fn quality_index(roi: &RoiImage, seg: &SegmentationMap) -> Result<f64> {
    seg.ensure_matches(roi)?;
    let mut bg = Vec::new();
    let mut echo = Vec::new();
    for (&v, &c) in roi.intensities().iter().zip(seg.labels()) {
        match c {
            PixelClass::Background => bg.push(v),
            PixelClass::Highlight => echo.push(v),
            PixelClass::Shadow => {}
        }
    }
    for (region, values) in [(Region::Background, &bg), (Region::Highlight, &echo)] {
        if values.len() < 2 {
            return Err(Error::RegionTooSmall {
                region,
                found: values.len(),
                needed: 2,
            });
        }
    }
    let (m_bg, v_bg) = mean_var(&bg);
    let (m_echo, v_echo) = mean_var(&echo);
    // intensities live in [0, 1]; anything this small is summation rounding
    let negligible = |v: f64| if v < 1e-24 { 0.0 } else { v };
    let gap = negligible((m_bg - m_echo).powi(2));
    let spread = negligible(v_bg + v_echo);
    Ok(if spread > 0.0 {
        gap / spread
    } else if gap > 0.0 {
        PSI_CAP
    } else {
        0.0
    })
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Three-level step function from quality index to fusion weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub t_low: f64,
    pub t_high: f64,
    pub w_low: f64,
    pub w_mid: f64,
    pub w_high: f64,
}

impl TransferFunction {
    pub fn new(t_low: f64, t_high: f64, w_low: f64, w_mid: f64, w_high: f64) -> Result<Self> {
        let tf = Self {
            t_low,
            t_high,
            w_low,
            w_mid,
            w_high,
        };
        tf.validate()?;
        Ok(tf)
    }

    pub fn default_sas() -> Self {
        Self {
            t_low: 0.3,
            t_high: 3.0,
            w_low: 0.4,
            w_mid: 0.6,
            w_high: 0.65,
        }
    }

    pub fn default_optic() -> Self {
        Self {
            t_low: 0.3,
            t_high: 3.0,
            w_low: 0.1,
            w_mid: 0.25,
            w_high: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |w: f64| (0.0..=1.0).contains(&w);
        if !(self.t_low.is_finite() && self.t_high.is_finite() && self.t_low < self.t_high) {
            return Err(Error::InvalidSpec(format!(
                "transfer thresholds must satisfy t_low < t_high, got {} and {}",
                self.t_low, self.t_high
            )));
        }
        if !(unit(self.w_low) && unit(self.w_mid) && unit(self.w_high))
            || self.w_low > self.w_mid
            || self.w_mid > self.w_high
        {
            return Err(Error::InvalidSpec(format!(
                "transfer weights must be ordered in [0, 1], got {} {} {}",
                self.w_low, self.w_mid, self.w_high
            )));
        }
        Ok(())
    }

    pub fn apply(&self, psi: f64) -> f64 {
        if psi < self.t_low {
            self.w_low
        } else if psi < self.t_high {
            self.w_mid
        } else {
            self.w_high
        }
    }

    pub fn score(&self, psi: f64) -> QualityScore {
        QualityScore {
            psi,
            weight: self.apply(psi),
        }
    }
}

pub fn apply_transfer(psi: f64, tf: &TransferFunction) -> f64 {
    tf.apply(psi)
}

/// `(w_sas, w_opt) / (w_sas + w_opt)`.
pub fn normalize_weights(w_sas: f64, w_opt: f64) -> Result<(f64, f64)> {
    let total = w_sas + w_opt;
    if !(total > 0.0) || w_sas < 0.0 || w_opt < 0.0 {
        return Err(Error::ZeroWeights);
    }
    Ok((w_sas / total, w_opt / total))
}

/// Weighted mean of two axial angles (degrees) on the doubled-angle circle.
/// Opposite directions have no mean; the heavier side (SAS on a tie) wins.
pub fn axial_mean(a_deg: f64, b_deg: f64, wa: f64, wb: f64) -> f64 {
    if wb == 0.0 {
        return a_deg;
    }
    if wa == 0.0 {
        return b_deg;
    }
    let (sa, ca) = (2.0 * a_deg).to_radians().sin_cos();
    let (sb, cb) = (2.0 * b_deg).to_radians().sin_cos();
    let (x, y) = (wa * ca + wb * cb, wa * sa + wb * sb);
    if x.hypot(y) < 1e-12 {
        return if wb > wa { b_deg } else { a_deg };
    }
    let mean = y.atan2(x).to_degrees() / 2.0;
    let folded = mean.rem_euclid(180.0);
    if folded >= 180.0 {
        0.0
    } else {
        folded
    }
}

/// Merged feature vector `a t_sas + b t_opt` with normalized weights.
/// The axial angles use [`axial_mean`]; everything else, including HSO
/// (already folded to `[0, 90]`), is combined linearly.
pub fn merge_features(
    t_sas: &FeatureVector,
    t_opt: &FeatureVector,
    w_sas: f64,
    w_opt: f64,
) -> Result<[f64; FEATURE_LEN]> {
    let (a, b) = normalize_weights(w_sas, w_opt)?;
    let s = t_sas.to_array();
    let o = t_opt.to_array();
    let mut out = [0.0; FEATURE_LEN];
    for i in 0..FEATURE_LEN {
        out[i] = match i {
            THETA_MAX | THETA_MIN => axial_mean(s[i], o[i], a, b),
            _ if b == 0.0 => s[i],
            _ if a == 0.0 => o[i],
            _ => a * s[i] + b * o[i],
        };
    }
    Ok(out)
}

/// How the two modalities are weighted at classification time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Weights from the quality transfer functions.
    #[default]
    Fused,
    SasOnly,
    OpticOnly,
    /// Fixed equal weights.
    AverageMerge,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Fused, Mode::SasOnly, Mode::OpticOnly, Mode::AverageMerge];

    pub fn weights(
        self,
        psi_sas: f64,
        psi_opt: f64,
        sas: &TransferFunction,
        opt: &TransferFunction,
    ) -> (f64, f64) {
        match self {
            Mode::Fused => (sas.apply(psi_sas), opt.apply(psi_opt)),
            Mode::SasOnly => (1.0, 0.0),
            Mode::OpticOnly => (0.0, 1.0),
            Mode::AverageMerge => (0.5, 0.5),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fused => "fused",
            Mode::SasOnly => "sas-only",
            Mode::OpticOnly => "optic-only",
            Mode::AverageMerge => "average-merge",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown mode {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinaryGrid, Modality};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn fv(theta_max: f64, theta_min: f64, rest: f64) -> FeatureVector {
        FeatureVector {
            theta_max_deg: theta_max,
            theta_min_deg: theta_min,
            skew_scale: rest,
            skew_translation: -rest,
            hso_deg: 10.0 * rest,
            hc: [rest, 0.5, 0.25, 0.0],
            shadow_missing: false,
        }
    }

    fn scene(values: impl Fn(usize, usize) -> f64, hl: impl Fn(usize, usize) -> bool) -> (RoiImage, SegmentationMap) {
        let (w, h) = (16, 16);
        let v = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| values(x, y)).collect();
        let roi = RoiImage::new(w, h, v, Modality::Sas).unwrap();
        let seg = SegmentationMap::from_masks(&BinaryGrid::from_fn(w, h, hl), &BinaryGrid::new(w, h)).unwrap();
        (roi, seg)
    }

    #[test]
    fn identical_regions_score_zero() {
        let (roi, seg) = scene(|_, _| 0.4, |x, _| x < 4);
        assert_eq!(quality_index(&roi, &seg).unwrap(), 0.0);
    }

    #[test]
    fn constant_distinct_regions_hit_the_cap() {
        let (roi, seg) = scene(|x, _| if x < 4 { 0.9 } else { 0.2 }, |x, _| x < 4);
        assert_eq!(quality_index(&roi, &seg).unwrap(), PSI_CAP);
    }

    #[test]
    fn unit_separation() {
        // checkerboards: highlight {0.5, 1}, background {0, 0.5};
        // means 0.75 / 0.25, variances 0.0625 each, psi = 0.25 / 0.125
        let (roi, seg) = scene(
            |x, y| {
                let odd = (x + y) % 2 == 1;
                match (x < 8, odd) {
                    (true, false) => 0.5,
                    (true, true) => 1.0,
                    (false, false) => 0.0,
                    (false, true) => 0.5,
                }
            },
            |x, _| x < 8,
        );
        assert!((quality_index(&roi, &seg).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_two_pass_oracle_on_noisy_scene() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let noise: Vec<f64> = (0..256).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let hl = |x: usize, y: usize| (5..11).contains(&x) && (4..12).contains(&y);
        let (roi, seg) = scene(|x, y| if hl(x, y) { 0.7 } else { 0.3 } + noise[y * 16 + x], hl);
        let (mut bg, mut echo) = (vec![], vec![]);
        for y in 0..16 {
            for x in 0..16 {
                if hl(x, y) { echo.push(roi.get(x, y)) } else { bg.push(roi.get(x, y)) }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mb, me) = (mean(&bg), mean(&echo));
        let vb = bg.iter().map(|v| (v - mb) * (v - mb)).sum::<f64>() / bg.len() as f64;
        let ve = echo.iter().map(|v| (v - me) * (v - me)).sum::<f64>() / echo.len() as f64;
        let want = (mb - me).powi(2) / (vb + ve);
        assert!((quality_index(&roi, &seg).unwrap() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn tiny_regions_rejected() {
        let (roi, seg) = scene(|_, _| 0.5, |x, y| x == 0 && y == 0);
        assert!(matches!(
            quality_index(&roi, &seg),
            Err(Error::RegionTooSmall { region: Region::Highlight, found: 1, .. })
        ));
    }

    #[test]
    fn transfer_boundaries() {
        let tf = TransferFunction::default_sas();
        assert_eq!(apply_transfer(0.1, &tf), 0.4);
        assert_eq!(apply_transfer(0.3, &tf), 0.6);
        assert_eq!(apply_transfer(2.999, &tf), 0.6);
        assert_eq!(apply_transfer(3.0, &tf), 0.65);
        assert!(TransferFunction::new(3.0, 0.3, 0.1, 0.2, 0.3).is_err());
        assert!(TransferFunction::new(0.3, 3.0, 0.3, 0.2, 0.3).is_err());
        TransferFunction::default_optic().validate().unwrap();
    }

    #[test]
    fn merge_examples() {
        let s = fv(170.0, 20.0, 1.0);
        let o = fv(10.0, 40.0, 3.0);
        let m = merge_features(&s, &o, 0.5, 0.5).unwrap();
        assert!(m[THETA_MAX].abs() < 1e-9 || (m[THETA_MAX] - 180.0).abs() < 1e-9);
        assert!((m[THETA_MIN] - 30.0).abs() < 1e-9);
        assert!((m[2] - 2.0).abs() < 1e-12);
        assert!((m[crate::descriptors::HSO] - 20.0).abs() < 1e-12);
        assert_eq!(merge_features(&s, &o, 0.7, 0.0).unwrap(), s.to_array());
        assert_eq!(merge_features(&s, &o, 0.0, 0.2).unwrap(), o.to_array());
        assert!(matches!(merge_features(&s, &o, 0.0, 0.0), Err(Error::ZeroWeights)));
    }

    #[test]
    fn axial_mean_oracle() {
        // doubled-angle oracle written against unit vectors
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (a, b): (f64, f64) = (rng.gen_range(0.0..180.0), rng.gen_range(0.0..180.0));
            let wa: f64 = rng.gen_range(0.1..1.0);
            let m = axial_mean(a, b, wa, 1.0 - wa);
            let dir = |t: f64| ((2.0 * t).to_radians().cos(), (2.0 * t).to_radians().sin());
            let (ua, ub) = (dir(a), dir(b));
            let r = (wa * ua.0 + (1.0 - wa) * ub.0, wa * ua.1 + (1.0 - wa) * ub.1);
            let um = dir(m);
            // merged direction is parallel to the resultant
            let cross = um.0 * r.1 - um.1 * r.0;
            let dot = um.0 * r.0 + um.1 * r.1;
            assert!(cross.abs() < 1e-9 && dot > 0.0);
            assert!((0.0..180.0).contains(&m));
        }
    }

    #[test]
    fn mode_weights_and_names() {
        let (s, o) = (TransferFunction::default_sas(), TransferFunction::default_optic());
        assert_eq!(Mode::Fused.weights(5.0, 0.1, &s, &o), (0.65, 0.1));
        assert_eq!(Mode::SasOnly.weights(5.0, 0.1, &s, &o), (1.0, 0.0));
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("both".parse::<Mode>().is_err());
    }

    proptest! {
        #[test]
        fn transfer_is_monotone(p in 0.0f64..10.0, q in 0.0f64..10.0) {
            let tf = TransferFunction::default_optic();
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(tf.apply(lo) <= tf.apply(hi));
        }

        #[test]
        fn merge_scale_invariant(ws in 0.01f64..1.0, wo in 0.01f64..1.0, c in 0.1f64..10.0) {
            let s = fv(12.0, 100.0, 0.5);
            let o = fv(40.0, 150.0, -0.5);
            let a = merge_features(&s, &o, ws, wo).unwrap();
            let b = merge_features(&s, &o, c * ws, c * wo).unwrap();
            for i in 0..FEATURE_LEN {
                prop_assert!((a[i] - b[i]).abs() < 1e-9);
            }
        }
    }
}
