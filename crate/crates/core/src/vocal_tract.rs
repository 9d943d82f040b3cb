//! Articulatory-to-perceptual physics shared by all agents.
//!
//! Two mappings are available. The abstract one is a fixed random 2x2
//! linear map from a 2-d articulation space to a 2-d perceptual space.
//! The realistic one drives a vowel synthesizer: a 3-d articulation
//! (lip rounding, tongue height, tongue position) yields the first four
//! formant frequencies via polynomial interpolation fitted to real vowel
//! data, and an ear model compresses those into (F1, effective second
//! formant F2'), both on the Bark scale, normalized into the unit square.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold of the effective-second-formant weighting, in Barks.
pub const BARK_C: f64 = 3.5;

/// Intermediate configurations inserted between consecutive articulatory
/// targets.
pub const STEPS_PER_SEGMENT: usize = 10;

/// Grid resolution per axis used to calibrate perceptual normalization
/// bounds for the realistic mapping.
pub const DEFAULT_CALIBRATION_GRID: usize = 21;

/// Per-dimension normalization bounds of the raw perceptual space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptualBounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

/// The articulatory-to-perceptual mapping, fixed for a whole simulation and
/// shared by all agents (it models common physics, not agent state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MappingSpec {
    /// `ac_k = (c[k][0]*d1 + c[k][1]*d2) / 2` with coefficients drawn
    /// uniformly from `[0,1]` once per world.
    Abstract { coeffs: [[f64; 2]; 2] },
    /// Vowel synthesizer plus ear model, with calibrated normalization
    /// bounds mapping (bark(F1), F2') into the unit square.
    DeBoer { bounds: Option<PerceptualBounds> },
}

impl MappingSpec {
    /// Abstract mapping with coefficients drawn from `rng` in row-major
    /// order (r11, r12, r21, r22).
    pub fn abstract_random<R: Rng>(rng: &mut R) -> Self {
        let mut coeffs = [[0.0; 2]; 2];
        for row in &mut coeffs {
            for c in row.iter_mut() {
                *c = rng.random::<f64>();
            }
        }
        MappingSpec::Abstract { coeffs }
    }

    pub fn abstract_with_coeffs(coeffs: [[f64; 2]; 2]) -> Self {
        MappingSpec::Abstract { coeffs }
    }

    /// Uncalibrated realistic mapping; call [`MappingSpec::calibrate`]
    /// before converting articulations.
    pub fn deboer() -> Self {
        MappingSpec::DeBoer { bounds: None }
    }

    /// Realistic mapping calibrated on the default grid.
    pub fn deboer_calibrated() -> Self {
        let mut spec = Self::deboer();
        spec.calibrate(DEFAULT_CALIBRATION_GRID)
            .expect("default calibration cannot fail");
        spec
    }

    /// Dimensionality of the articulation space.
    pub fn motor_dim(&self) -> usize {
        match self {
            MappingSpec::Abstract { .. } => 2,
            MappingSpec::DeBoer { .. } => 3,
        }
    }

    /// Scan a regular grid over the articulation cube and store the
    /// min/max of each raw perceptual dimension as normalization bounds.
    /// Deterministic; repeating calibration yields identical bounds.
    pub fn calibrate(&mut self, grid_resolution: usize) -> Result<()> {
        match self {
            MappingSpec::Abstract { .. } => Err(Error::Config(
                "abstract mapping needs no calibration".into(),
            )),
            MappingSpec::DeBoer { bounds } => {
                if grid_resolution < 2 {
                    return Err(Error::Config(format!(
                        "calibration grid must be >= 2, got {grid_resolution}"
                    )));
                }
                let mut min = [f64::INFINITY; 2];
                let mut max = [f64::NEG_INFINITY; 2];
                let step = 1.0 / (grid_resolution - 1) as f64;
                for ir in 0..grid_resolution {
                    for ih in 0..grid_resolution {
                        for ip in 0..grid_resolution {
                            let ar = [ir as f64 * step, ih as f64 * step, ip as f64 * step];
                            let raw = raw_percept(&ar)?;
                            for d in 0..2 {
                                min[d] = min[d].min(raw[d]);
                                max[d] = max[d].max(raw[d]);
                            }
                        }
                    }
                }
                *bounds = Some(PerceptualBounds { min, max });
                Ok(())
            }
        }
    }

    pub fn bounds(&self) -> Option<&PerceptualBounds> {
        match self {
            MappingSpec::Abstract { .. } => None,
            MappingSpec::DeBoer { bounds } => bounds.as_ref(),
        }
    }

    /// Perceptual image of one articulatory configuration, in `[0,1]^2`.
    pub fn to_perceptual(&self, ar: &[f64]) -> Result<[f64; 2]> {
        match self {
            MappingSpec::Abstract { coeffs } => {
                if ar.len() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        got: ar.len(),
                    });
                }
                Ok([
                    (coeffs[0][0] * ar[0] + coeffs[0][1] * ar[1]) / 2.0,
                    (coeffs[1][0] * ar[0] + coeffs[1][1] * ar[1]) / 2.0,
                ])
            }
            MappingSpec::DeBoer { bounds } => {
                let Some(b) = bounds else {
                    return Err(Error::Config(
                        "realistic mapping used before calibration".into(),
                    ));
                };
                let raw = raw_percept(ar)?;
                let mut out = [0.0; 2];
                for d in 0..2 {
                    let range = b.max[d] - b.min[d];
                    out[d] = ((raw[d] - b.min[d]) / range).clamp(0.0, 1.0);
                }
                Ok(out)
            }
        }
    }
}

/// Raw (unnormalized) perceptual point of a realistic articulation:
/// `(bark(F1), F2')` with all formants converted to Bark first.
fn raw_percept(ar: &[f64]) -> Result<[f64; 2]> {
    let f = deboer_formants(ar)?;
    let bark = [
        hz_to_bark(f[0])?,
        hz_to_bark(f[1])?,
        hz_to_bark(f[2])?,
        hz_to_bark(f[3])?,
    ];
    Ok([bark[0], effective_second_formant(&bark)?])
}

/// Linear interpolation through 2-4 articulatory targets: the first target
/// followed by `steps_per_segment` evenly spaced points per segment, ending
/// exactly on each subsequent target.
pub fn interpolate_trajectory(
    targets: &[Vec<f64>],
    steps_per_segment: usize,
) -> Result<Vec<Vec<f64>>> {
    if targets.len() < 2 || targets.len() > 4 {
        return Err(Error::OutOfRange(format!(
            "a vocalization needs 2 to 4 articulatory targets, got {}",
            targets.len()
        )));
    }
    if steps_per_segment == 0 {
        return Err(Error::Config("steps_per_segment must be >= 1".into()));
    }
    let dim = targets[0].len();
    if targets.iter().any(|t| t.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: targets.iter().map(|t| t.len()).find(|&l| l != dim).unwrap(),
        });
    }
    let mut out = Vec::with_capacity(1 + steps_per_segment * (targets.len() - 1));
    out.push(targets[0].clone());
    for pair in targets.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for j in 1..=steps_per_segment {
            if j == steps_per_segment {
                out.push(b.clone()); // land exactly on the target
            } else {
                let t = j as f64 / steps_per_segment as f64;
                out.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
            }
        }
    }
    Ok(out)
}

/// First four formant frequencies (Hz) of an articulation
/// `(r, h, p) = (lip rounding, tongue height, tongue position)`, each in
/// `[0,1]`, from polynomial interpolation fitted to a vowel database.
pub fn deboer_formants(ar: &[f64]) -> Result<[f64; 4]> {
    if ar.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: ar.len(),
        });
    }
    if ar.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::OutOfRange(format!(
            "articulation {ar:?} outside [0,1]^3"
        )));
    }
    let (r, h, p) = (ar[0], ar[1], ar[2]);
    let h2 = h * h;

    let f1 = ((-392.0 + 392.0 * r) * h2 + (596.0 - 668.0 * r) * h + (-146.0 + 166.0 * r)) * p * p
        + ((348.0 - 348.0 * r) * h2 + (-494.0 + 606.0 * r) * h + (141.0 - 175.0 * r)) * p
        + ((340.0 - 72.0 * r) * h2 + (-796.0 + 108.0 * r) * h + (708.0 - 38.0 * r));

    let f2 = ((-1200.0 + 1208.0 * r) * h2 + (1320.0 - 1328.0 * r) * h + (118.0 - 158.0 * r))
        * p
        * p
        + ((1864.0 - 1488.0 * r) * h2 + (-2644.0 + 1510.0 * r) * h + (-561.0 + 221.0 * r)) * p
        + ((-670.0 + 490.0 * r) * h2 + (1355.0 - 697.0 * r) * h + (1517.0 - 117.0 * r));

    let f3 = ((604.0 - 604.0 * r) * h2 + (1038.0 - 1178.0 * r) * h + (246.0 + 566.0 * r)) * p * p
        + ((-1150.0 + 1262.0 * r) * h2 + (-1443.0 + 1313.0 * r) * h + (-317.0 - 483.0 * r)) * p
        + ((1130.0 - 836.0 * r) * h2 + (-315.0 + 44.0 * r) * h + (2427.0 - 127.0 * r));

    let f4 = ((-1120.0 + 16.0 * r) * h2 + (1696.0 - 180.0 * r) * h + (500.0 + 522.0 * r)) * p * p
        + ((-140.0 + 240.0 * r) * h2 + (-578.0 + 214.0 * r) * h + (-692.0 - 419.0 * r)) * p
        + ((1480.0 - 602.0 * r) * h2 + (-1220.0 + 289.0 * r) * h + (3678.0 - 178.0 * r));

    Ok([f1, f2, f3, f4])
}

/// Frequency (Hz) to Bark: `7 * asinh(f / 650)`.
pub fn hz_to_bark(f: f64) -> Result<f64> {
    if f < 0.0 {
        return Err(Error::OutOfRange(format!("negative frequency {f} Hz")));
    }
    Ok(7.0 * (f / 650.0).asinh())
}

/// Effective second formant F2' in Bark from the four formants in Bark.
///
/// Piecewise spectral weighting with threshold `c = 3.5` Bark: F2 alone when
/// F3 is far, otherwise weighted blends of the higher formants.
pub fn effective_second_formant(f_bark: &[f64; 4]) -> Result<f64> {
    let [f1, f2, f3, f4] = *f_bark;
    if !(f1 <= f2 && f2 <= f3 && f3 <= f4) {
        return Err(Error::OutOfRange(format!(
            "formants not ordered: {f_bark:?}"
        )));
    }
    let c = BARK_C;
    if f3 - f2 > c {
        return Ok(f2);
    }
    if f4 - f2 >= c {
        let w1 = (c - (f3 - f2)) / c;
        return Ok(((2.0 - w1) * f2 + w1 * f3) / 2.0);
    }
    // f4 - f2 < c from here; degenerate equal-formant input has w2 -> 0
    let w2 = if f4 - f2 > 0.0 {
        ((f4 - f3) - (f3 - f2)) / (f4 - f2)
    } else {
        0.0
    };
    if f3 - f2 <= f4 - f3 {
        Ok((w2 * f2 + (2.0 - w2) * f3) / 2.0 - 1.0)
    } else {
        Ok(((2.0 + w2) * f3 - w2 * f4) / 2.0 - 1.0)
    }
}
