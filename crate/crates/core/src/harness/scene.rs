//! Seeded synthetic scenes: a heightfield object seen by an overhead camera
//! and by a side-looking sonar.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BinaryGrid, ImagePair, Label, LookDirection, Modality, PixelClass, PointCloud, RoiImage,
    SegmentationMap, SensorGeometry, View, MIN_DIMENSION,
};
use crate::optic2sas::render_sas_maps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectType {
    /// Truncated cone.
    Manta,
    /// Cylinder lying on the seabed.
    Cylinder,
    /// Rough low dome.
    Boulder,
}

impl ObjectType {
    pub const ALL: [ObjectType; 3] = [ObjectType::Manta, ObjectType::Cylinder, ObjectType::Boulder];

    pub fn label(self) -> Label {
        match self {
            ObjectType::Manta => Label::M,
            ObjectType::Cylinder => Label::C,
            ObjectType::Boulder => Label::N,
        }
    }
}

/// Intensity levels of the rendered images.
pub const SAS_SHADOW_LEVEL: f64 = 0.1;
pub const SAS_HIGHLIGHT_THRESHOLD: f64 = 0.55;
pub const SAS_SHADOW_THRESHOLD: f64 = 0.24;
pub const OPT_BACKGROUND_LEVEL: f64 = 0.2;
pub const OPT_HIGHLIGHT_THRESHOLD: f64 = 0.33;
/// Optical object brightness is `OPT_OBJECT_LEVEL` at the seabed and grows
/// with height (the lamp sits above the camera), modulated by the surface
/// slope.
pub const OPT_OBJECT_LEVEL: f64 = 0.4;
pub const OPT_HEIGHT_GAIN: f64 = 0.55;
pub const OPT_FALLOFF_HEIGHT_M: f64 = 0.5;
/// RMS amplitude of the boulder surface relief.
pub const BOULDER_ROUGHNESS_M: f64 = 0.02;

/// Which modality of a pair receives extra noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    pub modality: Modality,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub object_type: ObjectType,
    /// Object center in SAS ROI pixels.
    pub position_px: (f64, f64),
    /// Object axis in the SAS image, degrees (math convention, y up).
    pub orientation_deg: f64,
    /// Object axis in the optical image.
    pub optical_orientation_deg: f64,
    /// Object center in optical ROI pixels.
    pub optical_position_px: (f64, f64),
    /// Footprint: cone base diameter, cylinder length, boulder extent.
    pub size_m: f64,
    /// Cone height, cylinder diameter, boulder peak height.
    pub height_m: f64,
    /// Standard deviation of additive intensity noise.
    pub noise_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<Corruption>,
    pub sas_background: f64,
    pub sas_highlight: f64,
    pub roi_size: usize,
    pub sensor: SensorGeometry,
    pub seed: u64,
}

/// Ranges the scene parameters are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneRanges {
    pub roi_size: usize,
    pub altitude_m: f64,
    pub pixel_spacing_m: f64,
    pub range_origin_m: (f64, f64),
    pub center_x_px: (f64, f64),
    pub center_y_px: (f64, f64),
    /// Cylinder axis deviation from broadside, degrees.
    pub cylinder_spread_deg: f64,
    /// Cone base diameter and height, meters.
    pub manta_size_m: (f64, f64),
    pub manta_height_m: (f64, f64),
    /// Cylinder length and diameter, meters.
    pub cylinder_length_m: (f64, f64),
    pub cylinder_diameter_m: (f64, f64),
    /// Boulder footprint and peak height, meters.
    pub boulder_size_m: (f64, f64),
    pub boulder_height_m: (f64, f64),
}

impl Default for SceneRanges {
    fn default() -> Self {
        Self {
            roi_size: 96,
            altitude_m: 10.0,
            pixel_spacing_m: 0.05,
            range_origin_m: (30.0, 32.0),
            center_x_px: (37.0, 39.0),
            center_y_px: (47.0, 49.0),
            cylinder_spread_deg: 10.0,
            manta_size_m: (0.95, 1.05),
            manta_height_m: (0.38, 0.42),
            cylinder_length_m: (2.0, 2.2),
            cylinder_diameter_m: (0.48, 0.52),
            boulder_size_m: (2.2, 2.4),
            boulder_height_m: (0.4, 0.45),
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl SceneSpec {
    /// Draws every free parameter from `seed`.
    pub fn sample(object_type: ObjectType, seed: u64, noise_level: f64, ranges: &SceneRanges) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (size_m, height_m) = match object_type {
            ObjectType::Manta => (draw(&mut rng, ranges.manta_size_m), draw(&mut rng, ranges.manta_height_m)),
            ObjectType::Cylinder => (
                draw(&mut rng, ranges.cylinder_length_m),
                draw(&mut rng, ranges.cylinder_diameter_m),
            ),
            ObjectType::Boulder => (draw(&mut rng, ranges.boulder_size_m), draw(&mut rng, ranges.boulder_height_m)),
        };
        let orientation_deg = match object_type {
            ObjectType::Cylinder => 90.0 + draw(&mut rng, (-ranges.cylinder_spread_deg, ranges.cylinder_spread_deg)),
            _ => draw(&mut rng, (0.0, 180.0)),
        };
        let c = ranges.roi_size as f64 / 2.0;
        let spec = Self {
            object_type,
            position_px: (draw(&mut rng, ranges.center_x_px), draw(&mut rng, ranges.center_y_px)),
            orientation_deg,
            optical_orientation_deg: draw(&mut rng, (0.0, 180.0)),
            optical_position_px: (draw(&mut rng, (c - 3.0, c + 3.0)), draw(&mut rng, (c - 3.0, c + 3.0))),
            size_m,
            height_m,
            noise_level,
            corruption: None,
            sas_background: draw(&mut rng, (0.35, 0.4)),
            sas_highlight: draw(&mut rng, (0.7, 0.85)),
            roi_size: ranges.roi_size,
            sensor: SensorGeometry::new(
                ranges.altitude_m,
                draw(&mut rng, ranges.range_origin_m),
                ranges.pixel_spacing_m,
                LookDirection::Right,
            )?,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        self.sensor.validate()?;
        if self.roi_size < MIN_DIMENSION {
            return fail(format!("roi_size {} is below {MIN_DIMENSION}", self.roi_size));
        }
        if !(self.size_m > 0.0 && self.height_m > 0.0) {
            return fail(format!("object size {} and height {} must be positive", self.size_m, self.height_m));
        }
        if self.height_m >= self.sensor.altitude_m {
            return fail(format!(
                "object height {} m reaches the sensor altitude {} m",
                self.height_m, self.sensor.altitude_m
            ));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return fail(format!("noise_level must be non-negative, got {}", self.noise_level));
        }
        if let Some(c) = self.corruption {
            if !(c.factor >= 0.0 && c.factor.is_finite()) {
                return fail(format!("corruption factor must be non-negative, got {}", c.factor));
            }
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(unit(self.sas_background) && unit(self.sas_highlight)) {
            return fail("SAS intensity levels must lie in [0, 1]".into());
        }
        Ok(())
    }

    fn noise_for(&self, modality: Modality) -> f64 {
        match self.corruption {
            Some(c) if c.modality == modality => self.noise_level * c.factor,
            _ => self.noise_level,
        }
    }

    /// Object height in meters at local object coordinates `(u, v)` (meters,
    /// `u` along the object axis).
    fn height_at(&self, u: f64, v: f64, bumps: &[Bump]) -> f64 {
        match self.object_type {
            ObjectType::Manta => {
                let rb = self.size_m / 2.0;
                let rt = 0.45 * rb;
                let r = u.hypot(v);
                if r <= rt {
                    self.height_m
                } else if r <= rb {
                    self.height_m * (rb - r) / (rb - rt)
                } else {
                    0.0
                }
            }
            ObjectType::Cylinder => {
                let radius = self.height_m / 2.0;
                if u.abs() <= self.size_m / 2.0 && v.abs() <= radius {
                    radius + (radius * radius - v * v).sqrt()
                } else {
                    0.0
                }
            }
            ObjectType::Boulder => {
                let z = bumps.iter().map(|b| b.eval(u, v)).fold(0.0, f64::max);
                if z > 0.0 {
                    (z + self.roughness(u, v)).max(1e-3)
                } else {
                    0.0
                }
            }
        }
    }

    /// Heightfield on the ROI grid with the object centered at `center` and
    /// its axis at `orientation_deg`.
    fn heightfield(&self, center: (f64, f64), orientation_deg: f64, bumps: &[Bump]) -> Vec<f64> {
        let n = self.roi_size;
        let ps = self.sensor.pixel_spacing_m;
        let (s, c) = orientation_deg.to_radians().sin_cos();
        let mut z = vec![0.0; n * n];
        for y in 0..n {
            for x in 0..n {
                let dx = (x as f64 - center.0) * ps;
                let dy = (center.1 - y as f64) * ps;
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                z[y * n + x] = self.height_at(u, v, bumps);
            }
        }
        z
    }

    /// Small surface relief of natural objects, a fixed sum of short waves in
    /// object coordinates.
    fn roughness(&self, u: f64, v: f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(4);
        let waves = 12;
        (0..waves)
            .map(|_| {
                let k = std::f64::consts::TAU / rng.gen_range(0.08..0.25);
                let dir = rng.gen_range(0.0..std::f64::consts::PI);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                (k * (u * dir.cos() + v * dir.sin()) + phase).sin()
            })
            .sum::<f64>()
            * BOULDER_ROUGHNESS_M
            / (waves as f64 / 2.0).sqrt()
    }

    fn bumps(&self) -> Vec<Bump> {
        if self.object_type != ObjectType::Boulder {
            return Vec::new();
        }
        vec![Bump {
            u: 0.0,
            v: 0.0,
            radius_u: 0.5 * self.size_m,
            radius_v: 0.5 * self.size_m,
            amplitude: self.height_m,
        }]
    }
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    u: f64,
    v: f64,
    radius_u: f64,
    radius_v: f64,
    amplitude: f64,
}

impl Bump {
    fn eval(&self, u: f64, v: f64) -> f64 {
        // ellipsoidal cap
        let d2 = ((u - self.u) / self.radius_u).powi(2) + ((v - self.v) / self.radius_v).powi(2);
        self.amplitude * (1.0 - d2).max(0.0).sqrt()
    }
}

/// 3x3 median with edge clamping.
pub fn median3(values: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut window = [0.0; 9];
    for y in 0..height {
        for x in 0..width {
            let mut k = 0;
            for dy in [-1isize, 0, 1] {
                for dx in [-1isize, 0, 1] {
                    let xx = (x as isize + dx).clamp(0, width as isize - 1) as usize;
                    let yy = (y as isize + dy).clamp(0, height as isize - 1) as usize;
                    window[k] = values[yy * width + xx];
                    k += 1;
                }
            }
            window.sort_by(f64::total_cmp);
            out[y * width + x] = window[4];
        }
    }
    out
}

fn add_noise(values: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("finite non-negative sigma");
    for v in values.iter_mut() {
        *v = (*v + normal.sample(rng)).clamp(0.0, 1.0);
    }
}

/// Renders both views of the scene.
pub fn generate_scene(spec: &SceneSpec, id: impl Into<String>) -> Result<ImagePair> {
    spec.validate()?;
    let n = spec.roi_size;
    let bumps = spec.bumps();
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(1);

    // sonar view
    let z = spec.heightfield(spec.position_px, spec.orientation_deg, &bumps);
    let cloud = PointCloud::new(
        z.iter()
            .enumerate()
            .filter(|(_, h)| **h > 0.0)
            .map(|(i, h)| Vector3::new((i % n) as f64, (i / n) as f64, *h))
            .collect(),
    );
    let maps = render_sas_maps(&cloud, &spec.sensor, (n, n))?;
    let mut sas: Vec<f64> = (0..n * n)
        .map(|i| {
            let (x, y) = (i % n, i / n);
            if maps.highlight.get(x, y) {
                spec.sas_highlight
            } else if maps.shadow.get(x, y) {
                SAS_SHADOW_LEVEL
            } else {
                spec.sas_background
            }
        })
        .collect();
    add_noise(&mut sas, spec.noise_for(Modality::Sas), &mut noise_rng);
    let smooth = median3(&sas, n, n);
    let sas_seg = SegmentationMap::from_masks(
        &BinaryGrid::from_fn(n, n, |x, y| smooth[y * n + x] >= SAS_HIGHLIGHT_THRESHOLD),
        &BinaryGrid::from_fn(n, n, |x, y| smooth[y * n + x] <= SAS_SHADOW_THRESHOLD),
    )?;
    let sas_view = View::new(RoiImage::new(n, n, sas, Modality::Sas)?, sas_seg)?;

    // overhead camera with a lamp above it
    let z = spec.heightfield(spec.optical_position_px, spec.optical_orientation_deg, &bumps);
    let ps = spec.sensor.pixel_spacing_m;
    let at = |x: isize, y: isize| z[(y.clamp(0, n as isize - 1) as usize) * n + x.clamp(0, n as isize - 1) as usize];
    let mut opt: Vec<f64> = (0..n * n)
        .map(|i| {
            if z[i] <= 0.0 {
                return OPT_BACKGROUND_LEVEL;
            }
            let (x, y) = ((i % n) as isize, (i / n) as isize);
            let gx = (at(x + 1, y) - at(x - 1, y)) / (2.0 * ps);
            let gy = (at(x, y + 1) - at(x, y - 1)) / (2.0 * ps);
            let nz = 1.0 / (1.0 + gx * gx + gy * gy).sqrt();
            (OPT_OBJECT_LEVEL + OPT_HEIGHT_GAIN * (z[i] / OPT_FALLOFF_HEIGHT_M).min(1.0) * (0.75 + 0.25 * nz)).min(1.0)
        })
        .collect();
    add_noise(&mut opt, spec.noise_for(Modality::Optical), &mut noise_rng);
    let smooth = median3(&opt, n, n);
    let labels = smooth
        .iter()
        .map(|&v| if v >= OPT_HIGHLIGHT_THRESHOLD { PixelClass::Highlight } else { PixelClass::Background })
        .collect();
    let opt_view = View::new(
        RoiImage::new(n, n, opt, Modality::Optical)?,
        SegmentationMap::new(n, n, labels)?,
    )?;

    ImagePair::new(id, sas_view, opt_view, Some(spec.object_type.label()), spec.sensor)
}

/// SAS view of one scene with the optical view of another; labeled per the
/// ground-truth table.
pub fn mismatched_pair(id: impl Into<String>, sas_of: &ImagePair, optical_of: &ImagePair) -> Result<ImagePair> {
    let label = match (sas_of.ground_truth, optical_of.ground_truth) {
        (Some(s), Some(o)) => Some(Label::for_pair(s, o)),
        _ => None,
    };
    ImagePair::new(id, sas_of.sas.clone(), optical_of.optical.clone(), label, sas_of.geometry)
}
