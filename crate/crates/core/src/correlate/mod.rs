//! Second-order correlation from two time-tag streams.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math::floor;
use crate::sim::PS_PER_NS;

mod fit;

pub use fit::{antibunching_jacobian, antibunching_model, fit_antibunching, AntibunchFit, FitError, FitFlags, FitStep};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistogramError {
    #[error("stream {0} is empty, its rate is undefined")]
    EmptyStream(char),
    #[error("stream {stream} is not sorted at index {index}")]
    Unsorted { stream: char, index: usize },
    #[error("bin width must be finite and > 0, got {0} ns")]
    BinWidth(f64),
    #[error("max lag {max_lag_ns} ns must be at least one bin width ({bin_width_ns} ns)")]
    MaxLag { max_lag_ns: f64, bin_width_ns: f64 },
    #[error("observation time must be finite and > 0, got {0} ns")]
    ObservationTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramOptions {
    pub bin_width_ns: f64,
    pub max_lag_ns: f64,
    /// Observation time used for the singles rates. `None` uses the span from
    /// the earliest to the latest tag of either stream.
    pub observation_ns: Option<f64>,
}

impl HistogramOptions {
    pub fn new(bin_width_ns: f64, max_lag_ns: f64) -> Self {
        HistogramOptions {
            bin_width_ns,
            max_lag_ns,
            observation_ns: None,
        }
    }

    /// Bin width `tau0 / 8` and window `12 * tau0`.
    pub fn for_lifetime(tau0_ns: f64) -> Self {
        Self::new(tau0_ns / 8.0, 12.0 * tau0_ns)
    }

    pub fn with_observation(mut self, observation_ns: f64) -> Self {
        self.observation_ns = Some(observation_ns);
        self
    }

    /// Number of bins on each side of zero.
    pub fn half_bins(&self) -> usize {
        floor(self.max_lag_ns / self.bin_width_ns + 0.5) as usize
    }
}

/// Coincidence histogram and its normalization.
///
/// Bin `k` (for `k` in `-K..=K`) is centered on `k * bin_width_ns`; a pair with
/// lag `l = t_b - t_a` lands in bin `sign(l) * floor(|l| / width + 1/2)`, so
/// the axis is exactly mirror symmetric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct G2Curve {
    pub bin_width_ns: f64,
    pub lags_ns: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalized: Vec<f64>,
    pub total_time_ns: f64,
    pub rate_a: f64,
    pub rate_b: f64,
}

impl G2Curve {
    /// Expected counts per bin for uncorrelated streams,
    /// `rate_a * rate_b * bin_width * total_time`.
    pub fn normalization(&self) -> f64 {
        self.rate_a * self.rate_b * self.bin_width_ns * self.total_time_ns
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Index of the zero-lag bin.
    pub fn center(&self) -> usize {
        self.counts.len() / 2
    }

    /// Builds a curve from known counts, filling lags and normalized values.
    pub fn from_counts(counts: Vec<u64>, bin_width_ns: f64, total_time_ns: f64, rate_a: f64, rate_b: f64) -> Self {
        let half = (counts.len() / 2) as i64;
        let lags_ns = (-half..=half).map(|k| k as f64 * bin_width_ns).collect();
        let norm = rate_a * rate_b * bin_width_ns * total_time_ns;
        let normalized = counts.iter().map(|&c| c as f64 / norm).collect();
        G2Curve {
            bin_width_ns,
            lags_ns,
            counts,
            normalized,
            total_time_ns,
            rate_a,
            rate_b,
        }
    }
}

fn check_sorted(stream: &[u64], name: char) -> Result<(), HistogramError> {
    if stream.is_empty() {
        return Err(HistogramError::EmptyStream(name));
    }
    match stream.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(HistogramError::Unsorted {
            stream: name,
            index: i + 1,
        }),
        None => Ok(()),
    }
}

/// Signed bin index of a lag in ps, or `None` outside the window.
#[inline]
pub(crate) fn bin_of(lag_ps: i64, width_ps: f64, half_bins: i64) -> Option<i64> {
    let k = floor(lag_ps.unsigned_abs() as f64 / width_ps + 0.5) as i64;
    if k > half_bins {
        None
    } else if lag_ps < 0 {
        Some(-k)
    } else {
        Some(k)
    }
}

/// Adds the coincidences of every `a` in `a_chunk` with all of `b` to
/// `counts` (length `2K + 1`). Chunks of `a` can be accumulated independently
/// and summed.
pub fn accumulate_coincidences(a_chunk: &[u64], b: &[u64], opts: &HistogramOptions, counts: &mut [u64]) {
    let half = opts.half_bins() as i64;
    debug_assert_eq!(counts.len() as i64, 2 * half + 1);
    let width_ps = opts.bin_width_ns * PS_PER_NS;
    // Any lag beyond this reach is outside the last bin.
    let reach = (floor((half as f64 + 0.5) * width_ps) as u64).saturating_add(1);
    let mut lo = 0usize;
    for &ta in a_chunk {
        let start = ta.saturating_sub(reach);
        while lo < b.len() && b[lo] < start {
            lo += 1;
        }
        let stop = ta.saturating_add(reach);
        for &tb in &b[lo..] {
            if tb > stop {
                break;
            }
            let lag = tb as i64 - ta as i64;
            if let Some(k) = bin_of(lag, width_ps, half) {
                counts[(k + half) as usize] += 1;
            }
        }
    }
}

/// Full cross-correlation histogram of two sorted picosecond streams with a
/// two-pointer sweep, `O(n + m + pairs in window)`.
pub fn histogram_coincidences(a: &[u64], b: &[u64], opts: &HistogramOptions) -> Result<G2Curve, HistogramError> {
    check_sorted(a, 'a')?;
    check_sorted(b, 'b')?;
    if !(opts.bin_width_ns.is_finite() && opts.bin_width_ns > 0.0) {
        return Err(HistogramError::BinWidth(opts.bin_width_ns));
    }
    if !(opts.max_lag_ns >= opts.bin_width_ns) || !opts.max_lag_ns.is_finite() {
        return Err(HistogramError::MaxLag {
            max_lag_ns: opts.max_lag_ns,
            bin_width_ns: opts.bin_width_ns,
        });
    }
    let total_time_ns = match opts.observation_ns {
        Some(t) => t,
        None => {
            let first = a[0].min(b[0]);
            let last = a[a.len() - 1].max(b[b.len() - 1]);
            (last - first) as f64 / PS_PER_NS
        }
    };
    if !(total_time_ns.is_finite() && total_time_ns > 0.0) {
        return Err(HistogramError::ObservationTime(total_time_ns));
    }
    let half = opts.half_bins();
    let mut counts = vec![0u64; 2 * half + 1];
    accumulate_coincidences(a, b, opts, &mut counts);
    Ok(G2Curve::from_counts(
        counts,
        opts.bin_width_ns,
        total_time_ns,
        a.len() as f64 / total_time_ns,
        b.len() as f64 / total_time_ns,
    ))
}
