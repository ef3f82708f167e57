//! Time-tag stream simulation.
//!
//! Each emitter is a two-stage renewal process: an exponential wait for
//! re-excitation (rate `pump_rate_per_ns`) followed by an exponential wait for
//! spontaneous decay (mean `lifetime_ns`). Every emitted photon branches into
//! the transmission channel with probability `T = 1 - R`, otherwise into
//! reflection, where it is routed to R1 or R2. Detectors thin by efficiency,
//! add Gaussian timing jitter, quantize to picoseconds, superpose Poisson dark
//! counts and finally apply a non-paralyzable dead time.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

mod detect;
mod emission;
pub mod presets;
pub mod theory;

pub use detect::{branch_and_detect, channel_timestamps, simulate_scene};
pub use emission::{simulate_emissions, EmissionIter};
pub use theory::{expected_g2_zero, two_emitter_weights};

/// Picoseconds per nanosecond.
pub const PS_PER_NS: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} must be finite and > 0, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite and >= 0, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("{field} must lie in [{min}, {max}], got {value}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("prob_reflection + prob_transmission must equal 1, got {reflection} + {transmission}")]
    SplitSum { reflection: f64, transmission: f64 },
    #[error("scene needs at least one emitter")]
    NoEmitters,
    #[error("no detector parameters for {0}")]
    MissingDetector(Detector),
    #[error("g2(0) = {target} is unreachable with two emitters and background {background}; reachable range is [{min}, {max}]")]
    UnreachableG2 {
        target: f64,
        background: f64,
        min: f64,
        max: f64,
    },
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::NotPositive { field, value })
    }
}

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::Negative { field, value })
    }
}

pub(crate) fn in_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value >= min && value <= max {
        Ok(value)
    } else {
        Err(ConfigError::OutOfRange { field, value, min, max })
    }
}

/// Detector identity. The derived order `R1 < R2 < T1` is the tie-break for
/// equal timestamps in a merged stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[repr(u8)]
pub enum Detector {
    R1 = 0,
    R2 = 1,
    T1 = 2,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::R1, Detector::R2, Detector::T1];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(Detector::R1),
            1 => Some(Detector::R2),
            2 => Some(Detector::T1),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Detector::R1 => "R1",
            Detector::R2 => "R2",
            Detector::T1 => "T1",
        }
    }

    pub fn is_reflection(self) -> bool {
        matches!(self, Detector::R1 | Detector::R2)
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown detector {0:?}, expected one of R1, R2, T1")]
pub struct UnknownDetector(pub String);

impl FromStr for Detector {
    type Err = UnknownDetector;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "R1" | "r1" => Ok(Detector::R1),
            "R2" | "r2" => Ok(Detector::R2),
            "T1" | "t1" => Ok(Detector::T1),
            other => Err(UnknownDetector(other.into())),
        }
    }
}

/// One detection event.
///
/// The derived ordering sorts by timestamp first and detector second, which is
/// exactly the merged-stream order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeTag {
    pub timestamp_ps: u64,
    pub detector: Detector,
}

impl TimeTag {
    pub fn new(timestamp_ps: u64, detector: Detector) -> Self {
        TimeTag { timestamp_ps, detector }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmitterParams {
    /// Excited-state lifetime in ns.
    pub lifetime_ns: f64,
    /// Mean re-excitation rate in 1/ns.
    pub pump_rate_per_ns: f64,
    /// Relative brightness at the collection optics.
    pub weight: f64,
}

impl EmitterParams {
    pub fn new(lifetime_ns: f64, pump_rate_per_ns: f64, weight: f64) -> Result<Self, ConfigError> {
        let p = EmitterParams {
            lifetime_ns,
            pump_rate_per_ns,
            weight,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("lifetime_ns", self.lifetime_ns)?;
        positive("pump_rate_per_ns", self.pump_rate_per_ns)?;
        positive("weight", self.weight)?;
        Ok(())
    }

    /// Mean interval between emissions, `1/pump + lifetime`.
    pub fn mean_interval_ns(&self) -> f64 {
        1.0 / self.pump_rate_per_ns + self.lifetime_ns
    }

    /// Long-run emission rate in 1/ns.
    pub fn emission_rate_per_ns(&self) -> f64 {
        1.0 / self.mean_interval_ns()
    }

    /// Time constant of the single-emitter coherence recovery,
    /// `1 / (pump + 1/lifetime)`.
    pub fn recovery_time_ns(&self) -> f64 {
        1.0 / (self.pump_rate_per_ns + 1.0 / self.lifetime_ns)
    }
}

/// Branching between reflection and transmission. Only `R` is stored, so
/// `R + T = 1` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitParams {
    prob_reflection: f64,
}

impl SplitParams {
    pub const BALANCED: SplitParams = SplitParams { prob_reflection: 0.5 };

    pub fn new(prob_reflection: f64) -> Result<Self, ConfigError> {
        in_range("prob_reflection", prob_reflection, 0.0, 1.0)?;
        Ok(SplitParams { prob_reflection })
    }

    /// Builds a split from both probabilities, which must sum to one within
    /// `1e-9`.
    pub fn from_pair(prob_reflection: f64, prob_transmission: f64) -> Result<Self, ConfigError> {
        in_range("prob_reflection", prob_reflection, 0.0, 1.0)?;
        in_range("prob_transmission", prob_transmission, 0.0, 1.0)?;
        if (prob_reflection + prob_transmission - 1.0).abs() > 1e-9 {
            return Err(ConfigError::SplitSum {
                reflection: prob_reflection,
                transmission: prob_transmission,
            });
        }
        Ok(SplitParams { prob_reflection })
    }

    pub fn prob_reflection(&self) -> f64 {
        self.prob_reflection
    }

    pub fn prob_transmission(&self) -> f64 {
        1.0 - self.prob_reflection
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorParams {
    pub efficiency: f64,
    pub dead_time_ns: f64,
    pub dark_rate_per_ns: f64,
    pub jitter_sigma_ns: f64,
}

impl DetectorParams {
    /// Perfect detector: unit efficiency, no dead time, no darks, no jitter.
    pub const IDEAL: DetectorParams = DetectorParams {
        efficiency: 1.0,
        dead_time_ns: 0.0,
        dark_rate_per_ns: 0.0,
        jitter_sigma_ns: 0.0,
    };

    pub fn validate(&self) -> Result<(), ConfigError> {
        in_range("efficiency", self.efficiency, 0.0, 1.0)?;
        non_negative("dead_time_ns", self.dead_time_ns)?;
        non_negative("dark_rate_per_ns", self.dark_rate_per_ns)?;
        non_negative("jitter_sigma_ns", self.jitter_sigma_ns)?;
        Ok(())
    }

    pub(crate) fn dead_time_ps(&self) -> u64 {
        crate::math::round(self.dead_time_ns * PS_PER_NS) as u64
    }
}

/// Complete description of a simulated measurement.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneConfig {
    pub emitters: Vec<EmitterParams>,
    pub split: SplitParams,
    pub detectors: BTreeMap<Detector, DetectorParams>,
    /// Probability that a reflected photon reaches R1 rather than R2.
    pub reflection_hbt_split: f64,
    pub duration_ns: f64,
    pub seed: u64,
}

/// Longest duration whose picosecond count still fits comfortably in `u64`.
const MAX_DURATION_NS: f64 = 1.0e15;

impl SceneConfig {
    /// A scene with the given emitters, ideal detectors and a balanced split.
    pub fn new(emitters: Vec<EmitterParams>, duration_ns: f64, seed: u64) -> Self {
        SceneConfig {
            emitters,
            split: SplitParams::BALANCED,
            detectors: Detector::ALL.iter().map(|&d| (d, DetectorParams::IDEAL)).collect(),
            reflection_hbt_split: 0.5,
            duration_ns,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.emitters.is_empty() {
            return Err(ConfigError::NoEmitters);
        }
        for e in &self.emitters {
            e.validate()?;
        }
        in_range("prob_reflection", self.split.prob_reflection, 0.0, 1.0)?;
        for d in Detector::ALL {
            self.detectors
                .get(&d)
                .ok_or(ConfigError::MissingDetector(d))?
                .validate()?;
        }
        in_range("reflection_hbt_split", self.reflection_hbt_split, 0.0, 1.0)?;
        positive("duration_ns", self.duration_ns)?;
        in_range("duration_ns", self.duration_ns, 0.0, MAX_DURATION_NS)?;
        Ok(())
    }

    pub fn detector(&self, d: Detector) -> Result<&DetectorParams, ConfigError> {
        self.detectors.get(&d).ok_or(ConfigError::MissingDetector(d))
    }

    pub fn duration_ps(&self) -> u64 {
        crate::math::round(self.duration_ns * PS_PER_NS) as u64
    }

    /// Probability that an emitted photon is routed towards detector `d`.
    pub fn routing_probability(&self, d: Detector) -> f64 {
        let r = self.split.prob_reflection();
        match d {
            Detector::R1 => r * self.reflection_hbt_split,
            Detector::R2 => r * (1.0 - self.reflection_hbt_split),
            Detector::T1 => self.split.prob_transmission(),
        }
    }

    /// Per-emitter survival probability from brightness weights; the brightest
    /// emitter keeps every photon.
    pub fn weight_factors(&self) -> Vec<f64> {
        let max = self.emitters.iter().map(|e| e.weight).fold(0.0, f64::max);
        self.emitters.iter().map(|e| e.weight / max).collect()
    }
}
