//! Statistical test battery in the style of NIST SP 800-22.
//!
//! Each test lives in its own module as a kernel that computes statistics and
//! p-values from a slice of `0`/`1` bytes. Kernels do not enforce minimum
//! lengths; [`run_test`] and [`run_battery`] do, and report short inputs as
//! skipped.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::extract::BitStream;

pub mod complexity;
pub mod excursions;
pub mod fft;
pub mod frequency;
pub mod gf2;
pub mod rank;
pub mod runs;
pub mod second_level;
pub mod serial;
pub mod special;
pub mod spectral;
pub mod template;
pub mod universal;

pub use second_level::{proportion_interval, uniformity_p_value, SecondLevelReport, SecondLevelRow};

/// Unpacked bit sequence, one byte (`0` or `1`) per bit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sequence {
    bits: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("byte {value} at index {index} is not a bit")]
pub struct InvalidBit {
    pub index: usize,
    pub value: u8,
}

impl Sequence {
    pub fn new(bits: Vec<u8>) -> Result<Self, InvalidBit> {
        if let Some(index) = bits.iter().position(|&b| b > 1) {
            return Err(InvalidBit {
                index,
                value: bits[index],
            });
        }
        Ok(Sequence { bits })
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Sequence {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }

    pub fn from_stream(stream: &BitStream) -> Self {
        Sequence { bits: stream.unpack() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn prefix(&self, len: usize) -> &[u8] {
        &self.bits[..len.min(self.bits.len())]
    }

    pub fn reversed(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        Sequence { bits }
    }
}

impl From<&BitStream> for Sequence {
    fn from(stream: &BitStream) -> Self {
        Self::from_stream(stream)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TestKind {
    Frequency,
    BlockFrequency,
    CumulativeSums,
    Runs,
    LongestRun,
    Rank,
    Spectral,
    NonOverlappingTemplate,
    OverlappingTemplate,
    Universal,
    LinearComplexity,
    Serial,
    ApproximateEntropy,
    RandomExcursions,
    RandomExcursionsVariant,
}

impl TestKind {
    pub const ALL: [TestKind; 15] = [
        TestKind::Frequency,
        TestKind::BlockFrequency,
        TestKind::CumulativeSums,
        TestKind::Runs,
        TestKind::LongestRun,
        TestKind::Rank,
        TestKind::Spectral,
        TestKind::NonOverlappingTemplate,
        TestKind::OverlappingTemplate,
        TestKind::Universal,
        TestKind::LinearComplexity,
        TestKind::Serial,
        TestKind::ApproximateEntropy,
        TestKind::RandomExcursions,
        TestKind::RandomExcursionsVariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Frequency => "frequency",
            TestKind::BlockFrequency => "block_frequency",
            TestKind::CumulativeSums => "cumulative_sums",
            TestKind::Runs => "runs",
            TestKind::LongestRun => "longest_run",
            TestKind::Rank => "rank",
            TestKind::Spectral => "spectral",
            TestKind::NonOverlappingTemplate => "non_overlapping_template",
            TestKind::OverlappingTemplate => "overlapping_template",
            TestKind::Universal => "universal",
            TestKind::LinearComplexity => "linear_complexity",
            TestKind::Serial => "serial",
            TestKind::ApproximateEntropy => "approximate_entropy",
            TestKind::RandomExcursions => "random_excursions",
            TestKind::RandomExcursionsVariant => "random_excursions_variant",
        }
    }

    /// Shortest input the battery will run this test on.
    pub fn min_len(self, params: &TestParams) -> usize {
        match self {
            TestKind::Frequency | TestKind::Runs | TestKind::CumulativeSums => 100,
            TestKind::BlockFrequency => params.block_frequency_m.max(100),
            TestKind::LongestRun => runs::LONGEST_RUN_MIN_LEN,
            TestKind::Rank => rank::MIN_LEN,
            TestKind::Spectral => spectral::MIN_LEN,
            TestKind::NonOverlappingTemplate => template::non_overlapping_min_len(params.non_overlapping_m),
            TestKind::OverlappingTemplate => template::overlapping_min_len(),
            TestKind::Universal => universal::MIN_LEN,
            TestKind::LinearComplexity => complexity::MIN_BLOCKS * params.linear_complexity_m,
            TestKind::Serial => 1 << (params.serial_m + 2),
            TestKind::ApproximateEntropy => 1 << (params.apen_m + 6),
            TestKind::RandomExcursions | TestKind::RandomExcursionsVariant => excursions::MIN_LEN,
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown test {0:?}")]
pub struct UnknownTest(pub String);

impl FromStr for TestKind {
    type Err = UnknownTest;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownTest(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("{name} = {value} is outside {min}..={max}")]
    Range {
        name: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestParams {
    /// Significance level.
    pub alpha: f64,
    pub block_frequency_m: usize,
    pub non_overlapping_m: usize,
    pub overlapping_m: usize,
    pub linear_complexity_m: usize,
    pub serial_m: usize,
    pub apen_m: usize,
}

impl Default for TestParams {
    fn default() -> Self {
        TestParams {
            alpha: 0.01,
            block_frequency_m: 128,
            non_overlapping_m: 9,
            overlapping_m: 9,
            linear_complexity_m: 500,
            serial_m: 16,
            apen_m: 10,
        }
    }
}

impl TestParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ParamError::Alpha(self.alpha));
        }
        let check = |name, value, min, max| {
            if (min..=max).contains(&value) {
                Ok(())
            } else {
                Err(ParamError::Range { name, value, min, max })
            }
        };
        check("block_frequency_m", self.block_frequency_m, 2, 1 << 24)?;
        check("non_overlapping_m", self.non_overlapping_m, 2, 16)?;
        check("overlapping_m", self.overlapping_m, 2, 16)?;
        check("linear_complexity_m", self.linear_complexity_m, 10, 10_000)?;
        check("serial_m", self.serial_m, 3, 20)?;
        check("apen_m", self.apen_m, 1, 20)?;
        Ok(())
    }
}

/// Why a test produced no p-values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Skip {
    #[error("needs at least {needed} bits, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("only {cycles} random-walk cycles, needs {needed}")]
    TooFewCycles { cycles: usize, needed: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Raw result of a test kernel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub parameters: Vec<(String, f64)>,
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
}

impl Outcome {
    pub(crate) fn single(statistic: f64, p_value: f64) -> Self {
        Outcome {
            parameters: Vec::new(),
            statistics: alloc::vec![statistic],
            p_values: alloc::vec![special::clamp_p(p_value)],
        }
    }

    pub(crate) fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub(crate) fn push(&mut self, statistic: f64, p_value: f64) {
        self.statistics.push(statistic);
        self.p_values.push(special::clamp_p(p_value));
    }
}

/// Šidák-adjusted minimum, `1 - (1 - min p)^k`. Under the null it is uniform
/// when the `k` p-values are independent and conservative otherwise.
pub fn combined_p_value(p_values: &[f64]) -> Option<f64> {
    let min = p_values.iter().copied().fold(f64::INFINITY, f64::min);
    if p_values.is_empty() {
        return None;
    }
    let k = p_values.len() as f64;
    // 1 - (1 - m)^k computed as -expm1(k * log1p(-m)).
    let x = k * crate::math::log1p(-min);
    Some(special::clamp_p(-(crate::math::exp(x) - 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestRecord {
    pub test: TestKind,
    pub parameters: Vec<(String, f64)>,
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Smallest p-value, the headline figure for bar charts.
    pub min_p_value: Option<f64>,
    /// Multiplicity-adjusted p-value the pass decision is based on.
    pub combined_p_value: Option<f64>,
    /// Whether every individual p-value is at least alpha.
    pub all_p_values_pass: Option<bool>,
    pub pass: Option<bool>,
    pub skipped: Option<String>,
}

impl TestRecord {
    fn skipped(test: TestKind, reason: Skip) -> Self {
        TestRecord {
            test,
            parameters: Vec::new(),
            statistics: Vec::new(),
            p_values: Vec::new(),
            min_p_value: None,
            combined_p_value: None,
            all_p_values_pass: None,
            pass: None,
            skipped: Some(reason.to_string()),
        }
    }

    fn executed(test: TestKind, outcome: Outcome, alpha: f64) -> Self {
        let min = outcome.p_values.iter().copied().fold(f64::INFINITY, f64::min);
        let combined = combined_p_value(&outcome.p_values);
        let all = outcome.p_values.iter().all(|&p| p >= alpha);
        TestRecord {
            test,
            parameters: outcome.parameters,
            statistics: outcome.statistics,
            min_p_value: Some(min),
            combined_p_value: combined,
            all_p_values_pass: Some(all),
            pass: combined.map(|p| p >= alpha),
            p_values: outcome.p_values,
            skipped: None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
    /// No test could be executed.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestReport {
    pub bits: usize,
    pub params: TestParams,
    pub records: Vec<TestRecord>,
    pub verdict: Verdict,
}

impl TestReport {
    pub fn record(&self, kind: TestKind) -> Option<&TestRecord> {
        self.records.iter().find(|r| r.test == kind)
    }

    pub fn executed(&self) -> impl Iterator<Item = &TestRecord> {
        self.records.iter().filter(|r| !r.is_skipped())
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestRecord> {
        self.records.iter().filter(|r| r.pass == Some(false))
    }

    fn from_records(bits: usize, params: TestParams, records: Vec<TestRecord>) -> Self {
        let verdict = if records.iter().any(|r| r.pass == Some(false)) {
            Verdict::Fail
        } else if records.iter().any(|r| r.pass == Some(true)) {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        TestReport {
            bits,
            params,
            records,
            verdict,
        }
    }
}

/// Runs the kernel of one test without any length check.
pub fn run_kernel(kind: TestKind, bits: &[u8], params: &TestParams) -> Result<Outcome, Skip> {
    match kind {
        TestKind::Frequency => Ok(frequency::monobit(bits)),
        TestKind::BlockFrequency => frequency::block_frequency(bits, params.block_frequency_m),
        TestKind::CumulativeSums => Ok(frequency::cumulative_sums(bits)),
        TestKind::Runs => Ok(runs::runs(bits)),
        TestKind::LongestRun => runs::longest_run(bits),
        TestKind::Rank => rank::matrix_rank(bits),
        TestKind::Spectral => Ok(spectral::spectral(bits)),
        TestKind::NonOverlappingTemplate => template::non_overlapping(bits, params.non_overlapping_m),
        TestKind::OverlappingTemplate => template::overlapping(bits, params.overlapping_m),
        TestKind::Universal => universal::universal(bits),
        TestKind::LinearComplexity => complexity::linear_complexity(bits, params.linear_complexity_m),
        TestKind::Serial => Ok(serial::serial(bits, params.serial_m)),
        TestKind::ApproximateEntropy => Ok(serial::approximate_entropy(bits, params.apen_m)),
        TestKind::RandomExcursions => excursions::random_excursions(bits),
        TestKind::RandomExcursionsVariant => excursions::random_excursions_variant(bits),
    }
}

/// Runs one test with its minimum-length check.
pub fn run_test(kind: TestKind, bits: &[u8], params: &TestParams) -> TestRecord {
    if let Err(e) = params.validate() {
        return TestRecord::skipped(kind, Skip::InvalidParams(e.to_string()));
    }
    let needed = kind.min_len(params);
    if bits.len() < needed {
        return TestRecord::skipped(
            kind,
            Skip::TooShort {
                needed,
                got: bits.len(),
            },
        );
    }
    match run_kernel(kind, bits, params) {
        Ok(outcome) => TestRecord::executed(kind, outcome, params.alpha),
        Err(skip) => TestRecord::skipped(kind, skip),
    }
}

/// Runs a chosen subset of tests; records follow the order of `kinds`.
pub fn run_tests(kinds: &[TestKind], seq: &Sequence, params: &TestParams) -> TestReport {
    let records = kinds.iter().map(|&k| run_test(k, seq.as_slice(), params)).collect();
    TestReport::from_records(seq.len(), *params, records)
}

/// Runs all fifteen tests in fixed order.
pub fn run_battery(seq: &Sequence, params: &TestParams) -> TestReport {
    run_tests(&TestKind::ALL, seq, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in TestKind::ALL {
            assert_eq!(k.name().parse::<TestKind>().unwrap(), k);
        }
        assert!("dieharder".parse::<TestKind>().is_err());
    }

    #[test]
    fn short_input_skips_everything() {
        let seq = Sequence::from_bools((0..99).map(|i| i % 3 == 0));
        let report = run_battery(&seq, &TestParams::default());
        assert_eq!(report.verdict, Verdict::Inconclusive);
        assert!(report.records.iter().all(TestRecord::is_skipped));
        assert_eq!(report.records.len(), 15);
    }

    #[test]
    fn invalid_params_skip() {
        let seq = Sequence::from_bools((0..1000).map(|i| i % 3 == 0));
        let params = TestParams {
            alpha: 1.5,
            ..TestParams::default()
        };
        let report = run_battery(&seq, &params);
        assert_eq!(report.verdict, Verdict::Inconclusive);
        assert!(report.records[0].skipped.as_deref().unwrap().contains("alpha"));
    }

    #[test]
    fn combined_p_value_of_one_is_identity() {
        assert!((combined_p_value(&[0.3]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(combined_p_value(&[]), None);
        let p = combined_p_value(&[0.5, 0.5]).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sequence_rejects_non_bits() {
        assert_eq!(
            Sequence::new(alloc::vec![0, 1, 2]),
            Err(InvalidBit { index: 2, value: 2 })
        );
        assert_eq!(
            Sequence::new(alloc::vec![1, 0, 0]).unwrap().reversed().as_slice(),
            &[0, 0, 1]
        );
    }
}
