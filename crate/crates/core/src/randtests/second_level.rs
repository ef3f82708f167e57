//! Second-level analysis over many sequences: proportion of passing
//! sequences and uniformity of the p-values.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::special::igamc;
use super::{run_battery, Sequence, TestKind, TestParams, TestReport};
use crate::math::sqrt;

/// Uniformity threshold on the chi-square p-value of the histogram.
pub const UNIFORMITY_ALPHA: f64 = 1e-4;
const BINS: usize = 10;

/// Chi-square p-value for ten equal bins over `[0, 1]`; `None` if empty.
pub fn uniformity_p_value(p_values: &[f64]) -> Option<f64> {
    if p_values.is_empty() {
        return None;
    }
    let mut bins = [0u64; BINS];
    for &p in p_values {
        let i = ((p * BINS as f64) as usize).min(BINS - 1);
        bins[i] += 1;
    }
    let e = p_values.len() as f64 / BINS as f64;
    let chi2: f64 = bins.iter().map(|&b| (b as f64 - e) * (b as f64 - e) / e).sum();
    Some(igamc((BINS - 1) as f64 / 2.0, chi2 / 2.0))
}

/// Three-sigma acceptance interval for the pass proportion of `m` sequences.
pub fn proportion_interval(alpha: f64, m: usize) -> (f64, f64) {
    let p = 1.0 - alpha;
    let half = 3.0 * sqrt(p * alpha / m as f64);
    (p - half, p + half)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SecondLevelRow {
    pub test: TestKind,
    /// Position of the p-value within the test's output.
    pub index: usize,
    pub sequences: usize,
    pub passed: usize,
    pub proportion: f64,
    pub proportion_ok: bool,
    pub uniformity_p_value: Option<f64>,
    pub uniformity_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SecondLevelReport {
    pub sequences: usize,
    pub alpha: f64,
    pub rows: Vec<SecondLevelRow>,
}

impl SecondLevelReport {
    pub fn from_reports(reports: &[TestReport], alpha: f64) -> Self {
        let mut table: BTreeMap<(TestKind, usize), Vec<f64>> = BTreeMap::new();
        for r in reports {
            for rec in r.executed() {
                for (i, &p) in rec.p_values.iter().enumerate() {
                    table.entry((rec.test, i)).or_default().push(p);
                }
            }
        }
        let rows = table
            .into_iter()
            .map(|((test, index), ps)| {
                let passed = ps.iter().filter(|&&p| p >= alpha).count();
                let proportion = passed as f64 / ps.len() as f64;
                let (lo, hi) = proportion_interval(alpha, ps.len());
                let uniformity = uniformity_p_value(&ps);
                SecondLevelRow {
                    test,
                    index,
                    sequences: ps.len(),
                    passed,
                    proportion,
                    proportion_ok: (lo..=hi).contains(&proportion),
                    uniformity_p_value: uniformity,
                    uniformity_ok: uniformity.is_some_and(|p| p >= UNIFORMITY_ALPHA),
                }
            })
            .collect();
        SecondLevelReport {
            sequences: reports.len(),
            alpha,
            rows,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.proportion_ok && r.uniformity_ok)
    }
}

/// Splits `seq` into `parts` equal consecutive pieces (dropping the tail)
/// and runs the battery on each.
pub fn run_partitioned(seq: &Sequence, parts: usize, params: &TestParams) -> (Vec<TestReport>, SecondLevelReport) {
    let parts = parts.max(1);
    let len = seq.len() / parts;
    let reports: Vec<TestReport> = (0..parts)
        .map(|i| {
            let piece = Sequence::from_bools(seq.as_slice()[i * len..(i + 1) * len].iter().map(|&b| b == 1));
            run_battery(&piece, params)
        })
        .collect();
    let summary = SecondLevelReport::from_reports(&reports, params.alpha);
    (reports, summary)
}

/// Histogram of `p_values` over ten bins, for plotting.
pub fn histogram(p_values: &[f64]) -> Vec<u64> {
    let mut bins = vec![0u64; BINS];
    for &p in p_values {
        bins[((p * BINS as f64) as usize).min(BINS - 1)] += 1;
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_is_uniform() {
        let ps: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!((uniformity_p_value(&ps).unwrap() - 1.0).abs() < 1e-12);
        let skewed: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 5000.0).collect();
        assert!(uniformity_p_value(&skewed).unwrap() < 1e-10);
        assert_eq!(uniformity_p_value(&[]), None);
    }

    #[test]
    fn interval_for_a_thousand() {
        let (lo, hi) = proportion_interval(0.01, 1000);
        assert!((lo - 0.980_561).abs() < 1e-6);
        assert!((hi - 0.999_439).abs() < 1e-6);
    }
}
