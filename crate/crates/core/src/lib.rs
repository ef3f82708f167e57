//! Core algorithms for a photon-branching random bit source.
//!
//! A single-photon emitter radiates each photon into one of two opposite
//! observation channels, reflection (R) and transmission (T). Which channel
//! fires is decided by spontaneous emission, so the detector identity of each
//! time tag is a random bit. This crate models that chain end to end:
//!
//! - [`sim`]: seeded time-tag streams from independent emitters, branching and
//!   imperfect detectors.
//! - [`correlate`]: coincidence histograms, normalized `g2(tau)` and a weighted
//!   fit of `g2(tau) = 1 - a * exp(-|tau| / tau0)`.
//! - [`extract`]: detector-to-bit encoding and the two-stage debiasing cascade
//!   (`11 -> 1, 10 -> 0` truncation followed by the von Neumann mapping).
//! - [`randtests`]: a fifteen-test statistical battery in the style of
//!   NIST SP 800-22, with second-level proportion and uniformity analysis.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and all
//! IO live in the companion `qrng` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]
// `!(x > y)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub(crate) mod math;

pub mod correlate;
pub mod extract;
pub mod randtests;
pub mod seed;
pub mod sim;

pub use correlate::{
    fit_antibunching, histogram_coincidences, AntibunchFit, FitError, G2Curve, HistogramError, HistogramOptions,
};
pub use extract::{
    debias_cascade, debias_stage1, debias_von_neumann, encode_bits, BitStream, EncodeError, EncodingRule, Origin,
    RateReport,
};
pub use randtests::{run_battery, Sequence, TestKind, TestParams, TestReport, Verdict};
pub use sim::{
    branch_and_detect, expected_g2_zero, simulate_emissions, simulate_scene, ConfigError, Detector, DetectorParams,
    EmitterParams, SceneConfig, SplitParams, TimeTag,
};
