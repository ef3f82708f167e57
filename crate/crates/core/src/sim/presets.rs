//! Ready-made two-emitter scenes.
//!
//! Both presets share the optical model: two independent emitters with a 0.77 ns
//! lifetime whose brightness ratio, together with 3 % uncorrelated background
//! at every detector, yields `g2(0) = 0.47`; a 91/9 reflection/transmission
//! split; identical detectors with 22 ns dead time and 20 ps timing jitter.
//!
//! - [`Preset::Reference`] solves for the pump rate so that the total registered
//!   rate is 264 000 events/s, the raw rate of the reference hardware.
//! - [`Preset::Bright`] pumps harder and collects more light so that a 10 ms
//!   record holds enough coincidences for a `g2` fit.

use alloc::string::String;
use alloc::vec;
use core::fmt;
use core::str::FromStr;

use super::theory::{expected_rates, two_emitter_weights};
use super::{Detector, DetectorParams, EmitterParams, SceneConfig, SplitParams};

pub const LIFETIME_NS: f64 = 0.77;
pub const TARGET_G2_ZERO: f64 = 0.47;
pub const BACKGROUND_FRACTION: f64 = 0.03;
pub const PROB_REFLECTION: f64 = 0.91;
pub const DEAD_TIME_NS: f64 = 22.0;
pub const JITTER_SIGMA_NS: f64 = 0.02;
/// Registered events per second targeted by [`Preset::Reference`].
pub const REFERENCE_RATE_PER_S: f64 = 264_000.0;

const REFERENCE_EFFICIENCY: f64 = 0.6;
const BRIGHT_EFFICIENCY: f64 = 0.9;
const BRIGHT_PUMP_PER_NS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Reference,
    Bright,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Reference => "reference",
            Preset::Bright => "bright",
        }
    }

    pub fn scene(self, seed: u64, duration_ns: f64) -> SceneConfig {
        match self {
            Preset::Reference => reference_rate(seed, duration_ns),
            Preset::Bright => bright(seed, duration_ns),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "reference" => Ok(Preset::Reference),
            "bright" => Ok(Preset::Bright),
            other => Err(alloc::format!("unknown preset {other:?}, expected reference or bright")),
        }
    }
}

/// Two-emitter scene at the given pump rate and detector efficiency, with dark
/// rates set so that background is [`BACKGROUND_FRACTION`] of every detector's
/// events.
pub fn two_emitter_scene(pump_rate_per_ns: f64, efficiency: f64, seed: u64, duration_ns: f64) -> SceneConfig {
    let w = two_emitter_weights(TARGET_G2_ZERO, BACKGROUND_FRACTION).expect("preset target is reachable");
    let emitter = |weight| EmitterParams {
        lifetime_ns: LIFETIME_NS,
        pump_rate_per_ns,
        weight,
    };
    let mut scene = SceneConfig::new(vec![emitter(w[0]), emitter(w[1])], duration_ns, seed);
    scene.split = SplitParams {
        prob_reflection: PROB_REFLECTION,
    };
    for d in Detector::ALL {
        scene.detectors.insert(
            d,
            DetectorParams {
                efficiency,
                dead_time_ns: DEAD_TIME_NS,
                dark_rate_per_ns: 0.0,
                jitter_sigma_ns: JITTER_SIGMA_NS,
            },
        );
    }
    let ratio = BACKGROUND_FRACTION / (1.0 - BACKGROUND_FRACTION);
    // Rates only depend on the scene shape, so a probe with a valid duration is fine.
    let mut probe = scene.clone();
    probe.duration_ns = 1.0;
    if let Ok(rates) = expected_rates(&probe) {
        for d in Detector::ALL {
            scene.detectors.get_mut(&d).unwrap().dark_rate_per_ns = ratio * rates[d.index()].signal;
        }
    }
    scene
}

fn registered_total_per_ns(pump: f64, efficiency: f64) -> f64 {
    let scene = two_emitter_scene(pump, efficiency, 0, 1.0);
    expected_rates(&scene)
        .map(|r| r.iter().map(|x| x.registered).sum())
        .unwrap_or(f64::NAN)
}

/// Scene calibrated to register [`REFERENCE_RATE_PER_S`] events per second.
pub fn reference_rate(seed: u64, duration_ns: f64) -> SceneConfig {
    let target = REFERENCE_RATE_PER_S * 1e-9;
    // Registered rate is increasing in the pump rate; bisect in log space.
    let (mut lo, mut hi) = (1e-9f64, 1.0f64);
    for _ in 0..200 {
        let mid = crate::math::sqrt(lo * hi);
        if registered_total_per_ns(mid, REFERENCE_EFFICIENCY) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    two_emitter_scene(crate::math::sqrt(lo * hi), REFERENCE_EFFICIENCY, seed, duration_ns)
}

/// High-count scene for correlation measurements.
pub fn bright(seed: u64, duration_ns: f64) -> SceneConfig {
    two_emitter_scene(BRIGHT_PUMP_PER_NS, BRIGHT_EFFICIENCY, seed, duration_ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::theory::{emitter_shares, expected_g2_zero};

    #[test]
    fn reference_preset_is_rate_calibrated() {
        let s = reference_rate(1, 1e9);
        s.validate().unwrap();
        let total: f64 = expected_rates(&s).unwrap().iter().map(|r| r.registered).sum();
        assert!((total * 1e9 - REFERENCE_RATE_PER_S).abs() < 1e-6 * REFERENCE_RATE_PER_S);
    }

    #[test]
    fn presets_have_target_coherence() {
        for s in [reference_rate(1, 1e6), bright(1, 1e6)] {
            let shares = emitter_shares(&s);
            let g = expected_g2_zero(&shares, BACKGROUND_FRACTION).unwrap();
            assert!((g - TARGET_G2_ZERO).abs() < 1e-12);
            for r in expected_rates(&s).unwrap() {
                let bg = r.dark / (r.dark + r.signal);
                assert!((bg - BACKGROUND_FRACTION).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for p in [Preset::Reference, Preset::Bright] {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("dim".parse::<Preset>().is_err());
    }
}
