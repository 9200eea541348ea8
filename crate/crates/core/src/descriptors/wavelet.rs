//! Continuous Morlet wavelet transform of the orientation profile and the
//! skewness of its scale and translation marginals.

use serde::{Deserialize, Serialize};

use super::orientation_sum::{OrientationProfile, PROFILE_LEN};

/// Number of dyadic quarter-octave scales `a_k = 2^(k/4)`.
pub const SCALE_COUNT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorletParams {
    /// Bandwidth `sigma_b` in the normalization `1 / sqrt(sigma_b a)`.
    pub bandwidth: f64,
    /// Center frequency `omega_0` (cycles per unit of `(t - b) / a`).
    pub center_frequency: f64,
}

impl Default for MorletParams {
    fn default() -> Self {
        Self {
            bandwidth: 1.5,
            center_frequency: 1.0,
        }
    }
}

/// Real Morlet wavelet at scale `a`, translation `b`.
pub fn morlet(t: f64, a: f64, b: f64, params: &MorletParams) -> f64 {
    let u = (t - b) / a;
    (-0.5 * u * u).exp() * (2.0 * std::f64::consts::PI * params.center_frequency * u).cos()
        / (params.bandwidth * a).sqrt()
}

pub fn scale(k: usize) -> f64 {
    2f64.powf(k as f64 / 4.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFeatures {
    pub skew_scale: f64,
    pub skew_translation: f64,
    /// Coefficients `W(a_k, b)`, row-major by scale index.
    pub coefficients: Vec<f64>,
}

impl WaveletFeatures {
    pub fn coefficient(&self, k: usize, b: usize) -> f64 {
        self.coefficients[k * PROFILE_LEN + b]
    }

    /// Mean over translations for each scale.
    pub fn scale_marginal(&self) -> Vec<f64> {
        self.coefficients
            .chunks(PROFILE_LEN)
            .map(|row| row.iter().sum::<f64>() / PROFILE_LEN as f64)
            .collect()
    }

    /// Mean over scales for each translation.
    pub fn translation_marginal(&self) -> Vec<f64> {
        (0..PROFILE_LEN)
            .map(|b| (0..SCALE_COUNT).map(|k| self.coefficient(k, b)).sum::<f64>() / SCALE_COUNT as f64)
            .collect()
    }
}

/// Skewness of the axis positions `0..n` weighted by `|marginal|`; zero when
/// the weights or the spread vanish.
pub(crate) fn position_skewness(marginal: &[f64]) -> f64 {
    let total: f64 = marginal.iter().map(|m| m.abs()).sum();
    if total == 0.0 || !total.is_finite() {
        return 0.0;
    }
    let mean = marginal
        .iter()
        .enumerate()
        .map(|(i, m)| i as f64 * m.abs())
        .sum::<f64>()
        / total;
    let (m2, m3) = marginal.iter().enumerate().fold((0.0, 0.0), |(m2, m3), (i, m)| {
        let d = i as f64 - mean;
        (m2 + m.abs() * d * d, m3 + m.abs() * d * d * d)
    });
    let (m2, m3) = (m2 / total, m3 / total);
    if m2 <= 0.0 {
        return 0.0;
    }
    m3 / m2.powf(1.5)
}

/// Transforms the profile on the `SCALE_COUNT x PROFILE_LEN` grid (no
/// wrap-around) and reduces it to the two marginal skewness values.
pub fn wavelet_features(profile: &OrientationProfile, params: &MorletParams) -> WaveletFeatures {
    let n = PROFILE_LEN;
    let mut coefficients = vec![0.0; SCALE_COUNT * n];
    let mut kernel = vec![0.0; 2 * n - 1];
    for k in 0..SCALE_COUNT {
        let a = scale(k);
        // psi depends on t - b only; index d + n - 1 for d in -(n-1)..=(n-1)
        for (i, v) in kernel.iter_mut().enumerate() {
            *v = morlet(i as f64 - (n - 1) as f64, a, 0.0, params);
        }
        for b in 0..n {
            coefficients[k * n + b] = profile
                .values
                .iter()
                .enumerate()
                .map(|(t, g)| g * kernel[t + n - 1 - b])
                .sum();
        }
    }
    let mut wf = WaveletFeatures {
        skew_scale: 0.0,
        skew_translation: 0.0,
        coefficients,
    };
    wf.skew_scale = position_skewness(&wf.scale_marginal());
    wf.skew_translation = position_skewness(&wf.translation_marginal());
    wf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_profile(seed: u64) -> OrientationProfile {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..PROFILE_LEN).map(|_| rng.gen_range(0.1..1.0)).collect();
        let max = v.iter().copied().fold(0.0, f64::max);
        v.iter_mut().for_each(|x| *x /= max);
        OrientationProfile::from_values(v)
    }

    #[test]
    fn morlet_values() {
        let p = MorletParams::default();
        assert!((morlet(0.0, 1.0, 0.0, &p) - 1.0 / 1.5f64.sqrt()).abs() < 1e-12);
        assert!((morlet(0.0, 1.0, 0.0, &p) - 0.8165).abs() < 1e-4);
        for t in [0.3, 1.7, 4.0] {
            assert_eq!(morlet(5.0 + t, 2.0, 5.0, &p), morlet(5.0 - t, 2.0, 5.0, &p));
        }
        // integer offsets hit cosine peaks at unit scale
        let expected = (-0.5f64).exp() / 1.5f64.sqrt();
        assert!((morlet(1.0, 1.0, 0.0, &p) - expected).abs() < 1e-12);
    }

    #[test]
    fn coefficients_match_direct_sum() {
        let prof = random_profile(3);
        let p = MorletParams::default();
        let wf = wavelet_features(&prof, &p);
        for (k, b) in [(0, 0), (5, 90), (31, 179), (17, 44)] {
            let direct: f64 = (0..PROFILE_LEN)
                .map(|t| prof.values[t] * morlet(t as f64, scale(k), b as f64, &p))
                .sum();
            assert!((wf.coefficient(k, b) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_profile_has_no_translation_skew() {
        let wf = wavelet_features(
            &OrientationProfile::from_values(vec![1.0; PROFILE_LEN]),
            &MorletParams::default(),
        );
        assert!(wf.skew_translation.abs() <= 0.1, "{}", wf.skew_translation);
    }

    #[test]
    fn mirrored_profile_negates_translation_skew() {
        for seed in 0..5 {
            let prof = random_profile(seed);
            let mut rev = prof.values.clone();
            rev.reverse();
            let p = MorletParams::default();
            let a = wavelet_features(&prof, &p);
            let b = wavelet_features(&OrientationProfile::from_values(rev), &p);
            assert!((a.skew_translation + b.skew_translation).abs() < 1e-6);
            assert!((a.skew_scale - b.skew_scale).abs() < 1e-6);
        }
    }

    /// Three separate passes: total weight and mean, second moment, third moment.
    fn three_pass(m: &[f64]) -> f64 {
        let w: Vec<f64> = m.iter().map(|v| v.abs()).collect();
        let total: f64 = w.iter().sum();
        let mean = w.iter().enumerate().map(|(i, w)| i as f64 * w).sum::<f64>() / total;
        let var = w.iter().enumerate().map(|(i, w)| w * (i as f64 - mean).powi(2)).sum::<f64>() / total;
        let third = w.iter().enumerate().map(|(i, w)| w * (i as f64 - mean).powi(3)).sum::<f64>() / total;
        third / var.powf(1.5)
    }

    #[test]
    fn skewness_matches_three_pass_oracle() {
        for seed in 10..15 {
            let wf = wavelet_features(&random_profile(seed), &MorletParams::default());
            let s = three_pass(&wf.scale_marginal());
            let t = three_pass(&wf.translation_marginal());
            assert!((wf.skew_scale - s).abs() <= 1e-12 * s.abs().max(1.0));
            assert!((wf.skew_translation - t).abs() <= 1e-12 * t.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_marginals() {
        assert_eq!(position_skewness(&[0.0; 5]), 0.0);
        assert_eq!(position_skewness(&[0.0, 2.0, 0.0]), 0.0);
        assert!(position_skewness(&[1.0, 1.0, 1.0, 1.0, 8.0]) < 0.0);
    }
}
