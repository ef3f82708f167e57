//! Runs and longest run of ones in a block.

use alloc::vec;
use alloc::vec::Vec;

use super::special::{erfc, igamc};
use super::{Outcome, Skip};
use crate::math::{abs, sqrt};

pub const LONGEST_RUN_MIN_LEN: usize = 128;

/// Total number of runs, against the count expected for the observed
/// proportion of ones. Fails outright when the proportion itself is too far
/// from one half.
pub fn runs(bits: &[u8]) -> Outcome {
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| b == 1).count() as f64 / n;
    let tau = 2.0 / sqrt(n);
    if abs(pi - 0.5) >= tau {
        return Outcome::single(f64::NAN, 0.0).param("prerequisite_failed", 1.0);
    }
    let v = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = v as f64;
    let q = pi * (1.0 - pi);
    let p = erfc(abs(v - 2.0 * n * q) / (2.0 * sqrt(2.0 * n) * q));
    Outcome::single(v, p)
}

/// Block length, class boundaries `(lowest, highest)` for the longest run and
/// block count cap for an input of `n` bits.
fn longest_run_layout(n: usize) -> (usize, usize, usize) {
    if n >= 750_000 {
        (10_000, 10, 16)
    } else if n >= 6272 {
        (128, 4, 9)
    } else {
        (8, 1, 4)
    }
}

/// `P(longest run of ones <= k)` for `m` fair bits, `k = 0..=m`.
fn longest_run_cdf(m: usize, k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| {
            // state = length of the current trailing run of ones, at most k.
            let mut dist = vec![0.0f64; k + 1];
            dist[0] = 1.0;
            for _ in 0..m {
                let mut next = vec![0.0f64; k + 1];
                for (run, &p) in dist.iter().enumerate() {
                    next[0] += 0.5 * p;
                    if run < k {
                        next[run + 1] += 0.5 * p;
                    }
                }
                dist = next;
            }
            dist.iter().sum()
        })
        .collect()
}

/// Class probabilities for the longest run in an `m`-bit block with classes
/// `<= lo`, `lo + 1`, ..., `>= hi`.
pub fn longest_run_probabilities(m: usize, lo: usize, hi: usize) -> Vec<f64> {
    let cdf = longest_run_cdf(m, hi);
    let mut probs = vec![cdf[lo]];
    for v in lo + 1..hi {
        probs.push(cdf[v] - cdf[v - 1]);
    }
    probs.push(1.0 - cdf[hi - 1]);
    probs
}

pub fn longest_run(bits: &[u8]) -> Result<Outcome, Skip> {
    if bits.len() < LONGEST_RUN_MIN_LEN {
        return Err(Skip::TooShort {
            needed: LONGEST_RUN_MIN_LEN,
            got: bits.len(),
        });
    }
    let (m, lo, hi) = longest_run_layout(bits.len());
    let probs = longest_run_probabilities(m, lo, hi);
    let mut nu = vec![0u64; probs.len()];
    let blocks = bits.len() / m;
    for block in bits.chunks_exact(m) {
        let mut best = 0usize;
        let mut cur = 0usize;
        for &b in block {
            if b == 1 {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        nu[best.clamp(lo, hi) - lo] += 1;
    }
    let nf = blocks as f64;
    let chi2: f64 = nu
        .iter()
        .zip(&probs)
        .map(|(&v, &p)| {
            let e = nf * p;
            (v as f64 - e) * (v as f64 - e) / e
        })
        .sum();
    let k = (probs.len() - 1) as f64;
    Ok(Outcome::single(chi2, igamc(k / 2.0, chi2 / 2.0))
        .param("m", m as f64)
        .param("blocks", nf))
}
