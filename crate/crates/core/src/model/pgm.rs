//! Binary portable graymap (P5) reading and writing.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Modality, PixelClass, RoiImage, SegmentationMap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }
}

struct Graymap {
    width: usize,
    height: usize,
    max_value: u16,
    samples: Vec<u16>,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedFile {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse(path: &Path, bytes: &[u8]) -> Result<Graymap> {
    let mut pos = 0usize;
    let mut fields = [0usize; 3];

    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed(path, "missing P5 magic"));
    }
    pos += 2;

    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed(path, "truncated header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(path, "header field out of range"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed(path, "missing raster separator")),
    }

    let [width, height, max_value] = fields;
    if width == 0 || height == 0 {
        return Err(malformed(path, "zero dimension"));
    }
    if max_value == 0 || max_value > u16::MAX as usize {
        return Err(malformed(path, format!("max value {max_value} out of range")));
    }
    let bytes_per_sample = if max_value < 256 { 1 } else { 2 };
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per_sample))
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(malformed(
            path,
            format!("raster has {} bytes, expected {expected}", raster.len()),
        ));
    }
    let samples: Vec<u16> = if bytes_per_sample == 1 {
        raster[..expected].iter().map(|&b| b as u16).collect()
    } else {
        raster[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    if let Some(&s) = samples.iter().find(|&&s| s as usize > max_value) {
        return Err(malformed(path, format!("sample {s} exceeds max value {max_value}")));
    }
    Ok(Graymap {
        width,
        height,
        max_value: max_value as u16,
        samples,
    })
}

fn read(path: &Path) -> Result<Graymap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse(path, &bytes)
}

fn write(path: &Path, width: usize, height: usize, depth: BitDepth, samples: &[u16]) -> Result<()> {
    let mut out = Vec::with_capacity(20 + samples.len() * 2);
    write!(out, "P5\n{width} {height}\n{}\n", depth.max_value()).expect("write to Vec");
    match depth {
        BitDepth::Eight => out.extend(samples.iter().map(|&s| s as u8)),
        BitDepth::Sixteen => {
            for &s in samples {
                out.extend_from_slice(&s.to_be_bytes());
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads an 8- or 16-bit P5 graymap, scaling samples by the file's max value.
pub fn load_roi(path: impl AsRef<Path>, modality: Modality) -> Result<RoiImage> {
    let gm = read(path.as_ref())?;
    let scale = gm.max_value as f64;
    let intensities = gm.samples.iter().map(|&s| s as f64 / scale).collect();
    RoiImage::new(gm.width, gm.height, intensities, modality)
}

/// Loads a `{0, 128, 255}` encoded segmentation map.
pub fn load_segmentation(path: impl AsRef<Path>) -> Result<SegmentationMap> {
    let path = path.as_ref();
    let gm = read(path)?;
    if gm.max_value != 255 {
        return Err(malformed(path, "segmentation maps must be 8-bit"));
    }
    let labels = gm
        .samples
        .iter()
        .enumerate()
        .map(|(i, &s)| match s {
            0 => Ok(PixelClass::Background),
            128 => Ok(PixelClass::Shadow),
            255 => Ok(PixelClass::Highlight),
            value => Err(Error::IllegalLabelValue {
                value,
                x: i % gm.width,
                y: i / gm.width,
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    SegmentationMap::new(gm.width, gm.height, labels)
}

pub fn save_roi(path: impl AsRef<Path>, roi: &RoiImage, depth: BitDepth) -> Result<()> {
    let max = depth.max_value() as f64;
    let samples: Vec<u16> = roi
        .intensities()
        .iter()
        .map(|&v| (v * max).round().clamp(0.0, max) as u16)
        .collect();
    write(path.as_ref(), roi.width(), roi.height(), depth, &samples)
}

pub fn save_segmentation(path: impl AsRef<Path>, seg: &SegmentationMap) -> Result<()> {
    let samples: Vec<u16> = seg
        .labels()
        .iter()
        .map(|l| match l {
            PixelClass::Background => 0,
            PixelClass::Shadow => 128,
            PixelClass::Highlight => 255,
        })
        .collect();
    write(path.as_ref(), seg.width(), seg.height(), BitDepth::Eight, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Region;
    use proptest::prelude::*;

    fn p5(width: usize, height: usize, max: u16, samples: &[u16]) -> Vec<u8> {
        let mut out = format!("P5\n# comment\n{width} {height}\n{max}\n").into_bytes();
        for &s in samples {
            if max < 256 {
                out.push(s as u8);
            } else {
                out.extend_from_slice(&s.to_be_bytes());
            }
        }
        out
    }

    fn write_tmp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f
    }

    #[test]
    fn eight_bit_extremes() {
        let f = write_tmp(&p5(8, 8, 255, &[255; 64]));
        let roi = load_roi(f.path(), Modality::Sas).unwrap();
        assert!(roi.intensities().iter().all(|&v| v == 1.0));

        let f = write_tmp(&p5(8, 8, 255, &[0; 64]));
        let roi = load_roi(f.path(), Modality::Sas).unwrap();
        assert!(roi.intensities().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sixteen_bit_rescale() {
        let f = write_tmp(&p5(8, 8, 65535, &[32768; 64]));
        let roi = load_roi(f.path(), Modality::Optical).unwrap();
        assert_eq!(roi.get(3, 3), 32768.0 / 65535.0);
        assert!((roi.get(0, 0) - 0.50001).abs() < 1e-5);
    }

    #[test]
    fn malformed_and_small() {
        let f = write_tmp(b"P2\n8 8\n255\n");
        assert!(matches!(load_roi(f.path(), Modality::Sas), Err(Error::MalformedFile { .. })));
        let f = write_tmp(&p5(8, 8, 255, &[0; 10]));
        assert!(matches!(load_roi(f.path(), Modality::Sas), Err(Error::MalformedFile { .. })));
        let f = write_tmp(&p5(4, 9, 255, &[0; 36]));
        assert!(matches!(
            load_roi(f.path(), Modality::Sas),
            Err(Error::DimensionTooSmall { width: 4, height: 9 })
        ));
        assert!(matches!(
            load_roi("/definitely/not/here.pgm", Modality::Sas),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn segmentation_values() {
        let f = write_tmp(&p5(8, 8, 255, &[0; 64]));
        let seg = load_segmentation(f.path()).unwrap();
        assert_eq!(seg.count(Region::Background), 64);

        let mut samples = [0u16; 64];
        samples[9] = 255;
        let f = write_tmp(&p5(8, 8, 255, &samples));
        let seg = load_segmentation(f.path()).unwrap();
        assert_eq!(seg.count(Region::Highlight), 1);
        assert_eq!(seg.get(1, 1), PixelClass::Highlight);

        samples[20] = 200;
        let f = write_tmp(&p5(8, 8, 255, &samples));
        assert!(matches!(
            load_segmentation(f.path()),
            Err(Error::IllegalLabelValue { value: 200, x: 4, y: 2 })
        ));
    }

    #[test]
    fn segmentation_binds_to_roi() {
        let seg = SegmentationMap::new(8, 9, vec![PixelClass::Background; 72]).unwrap();
        let roi = RoiImage::new(8, 8, vec![0.0; 64], Modality::Sas).unwrap();
        assert!(matches!(seg.ensure_matches(&roi), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn roi_round_trip_within_quantization(
            values in proptest::collection::vec(0.0f64..=1.0, 64..=64),
            sixteen in any::<bool>(),
        ) {
            let depth = if sixteen { BitDepth::Sixteen } else { BitDepth::Eight };
            let roi = RoiImage::new(8, 8, values, Modality::Sas).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("roi.pgm");
            save_roi(&path, &roi, depth).unwrap();
            let back = load_roi(&path, Modality::Sas).unwrap();
            let tol = 0.5 / depth.max_value() as f64 + 1e-15;
            for (a, b) in roi.intensities().iter().zip(back.intensities()) {
                prop_assert!((a - b).abs() <= tol);
            }
        }

        #[test]
        fn segmentation_round_trip_preserves_counts(codes in proptest::collection::vec(0u8..3, 80..=80)) {
            let labels = codes.iter().map(|c| match c {
                0 => PixelClass::Background,
                1 => PixelClass::Highlight,
                _ => PixelClass::Shadow,
            }).collect();
            let seg = SegmentationMap::new(8, 10, labels).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("seg.pgm");
            save_segmentation(&path, &seg).unwrap();
            let back = load_segmentation(&path).unwrap();
            for r in [Region::Background, Region::Highlight, Region::Shadow] {
                prop_assert_eq!(seg.count(r), back.count(r));
            }
            prop_assert_eq!(seg, back);
        }
    }
}
