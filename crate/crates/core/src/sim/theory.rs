//! Closed-form expectations for simulated scenes.

use alloc::vec::Vec;

use super::{in_range, positive, ConfigError, Detector, SceneConfig};
use crate::math::sqrt;

/// Zero-delay coherence of independent ideal single emitters plus flat,
/// uncorrelated background.
///
/// `weights` are relative emitter intensities; the emitters together carry a
/// share `1 - background_fraction` of the light. Returns `1 - sum(p_i^2)` over
/// the emitter shares `p_i`.
pub fn expected_g2_zero(weights: &[f64], background_fraction: f64) -> Result<f64, ConfigError> {
    if weights.is_empty() {
        return Err(ConfigError::NoEmitters);
    }
    for &w in weights {
        positive("weight", w)?;
    }
    in_range("background_fraction", background_fraction, 0.0, 1.0)?;
    if background_fraction >= 1.0 {
        return Err(ConfigError::OutOfRange {
            field: "background_fraction",
            value: background_fraction,
            min: 0.0,
            max: 1.0,
        });
    }
    let total: f64 = weights.iter().sum();
    let signal = 1.0 - background_fraction;
    let sum_sq: f64 = weights
        .iter()
        .map(|w| (signal * w / total) * (signal * w / total))
        .sum();
    Ok(1.0 - sum_sq)
}

/// Weights `[w1, w2]` (normalized to sum 1, `w1 >= w2`) of two emitters whose
/// mixture with `background_fraction` of flat light has `g2(0) = target`.
pub fn two_emitter_weights(target: f64, background_fraction: f64) -> Result<[f64; 2], ConfigError> {
    in_range("background_fraction", background_fraction, 0.0, 0.999_999)?;
    let s = 1.0 - background_fraction;
    // p1 + p2 = s, p1^2 + p2^2 = 1 - target.
    let min = 1.0 - s * s;
    let max = 1.0 - s * s / 2.0;
    if !(target.is_finite() && target >= min && target <= max) {
        return Err(ConfigError::UnreachableG2 {
            target,
            background: background_fraction,
            min,
            max,
        });
    }
    let q = 1.0 - target;
    let disc = (2.0 * q - s * s).max(0.0);
    let p1 = (s + sqrt(disc)) / 2.0;
    let p2 = s - p1;
    Ok([p1 / s, p2 / s])
}

/// Expected per-detector event rates (1/ns) of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorRates {
    /// Photon-induced candidates before dead time.
    pub signal: f64,
    pub dark: f64,
    /// Registered rate after the non-paralyzable dead time,
    /// `r / (1 + r * dead_time)`.
    pub registered: f64,
}

pub fn expected_rates(scene: &SceneConfig) -> Result<[DetectorRates; 3], ConfigError> {
    scene.validate()?;
    let keep = scene.weight_factors();
    let collected: f64 = scene
        .emitters
        .iter()
        .zip(&keep)
        .map(|(e, k)| e.emission_rate_per_ns() * k)
        .sum();
    Ok(Detector::ALL.map(|d| {
        let p = scene.detectors[&d];
        let signal = collected * scene.routing_probability(d) * p.efficiency;
        let raw = signal + p.dark_rate_per_ns;
        DetectorRates {
            signal,
            dark: p.dark_rate_per_ns,
            registered: raw / (1.0 + raw * p.dead_time_ns),
        }
    }))
}

/// Signal share of each emitter at any detector; branching does not depend on
/// the emitter, so these are the same everywhere.
pub fn emitter_shares(scene: &SceneConfig) -> Vec<f64> {
    let keep = scene.weight_factors();
    let rates: Vec<f64> = scene
        .emitters
        .iter()
        .zip(&keep)
        .map(|(e, k)| e.emission_rate_per_ns() * k)
        .collect();
    let total: f64 = rates.iter().sum();
    rates.iter().map(|r| r / total).collect()
}
