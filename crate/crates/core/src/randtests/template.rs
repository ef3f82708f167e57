//! Non-overlapping and overlapping template matching.

use alloc::vec;
use alloc::vec::Vec;

use super::special::igamc;
use super::{Outcome, Skip};
use crate::math::pow;

const NON_OVERLAPPING_BLOCKS: usize = 8;
const OVERLAPPING_BLOCK: usize = 1032;
const OVERLAPPING_CLASSES: usize = 5;
/// Smallest block count giving every class an expected count of five.
const OVERLAPPING_MIN_BLOCKS: usize = 71;

/// Templates of length `m` (first bit most significant) that cannot overlap
/// a shifted copy of themselves, in ascending order.
pub fn aperiodic_templates(m: usize) -> Vec<u32> {
    (0u32..1 << m)
        .filter(|&t| {
            (1..m).all(|shift| {
                // Prefix of length m - shift against suffix of the same length.
                let len = m - shift;
                let mask = (1u32 << len) - 1;
                (t >> shift) != (t & mask)
            })
        })
        .collect()
}

pub fn non_overlapping_min_len(m: usize) -> usize {
    NON_OVERLAPPING_BLOCKS * ((1 << m) + m - 1)
}

pub fn overlapping_min_len() -> usize {
    OVERLAPPING_MIN_BLOCKS * OVERLAPPING_BLOCK
}

/// Counts of every `m`-bit window in `block`.
fn window_histogram(block: &[u8], m: usize) -> Vec<u32> {
    let mut hist = vec![0u32; 1 << m];
    let mask = (1u32 << m) - 1;
    let mut w = 0u32;
    for (i, &b) in block.iter().enumerate() {
        w = ((w << 1) | b as u32) & mask;
        if i + 1 >= m {
            hist[w as usize] += 1;
        }
    }
    hist
}

/// Occurrences of each aperiodic template in eight blocks. A non-overlapping
/// scan of an aperiodic template finds every occurrence, so the counts come
/// straight from a window histogram.
pub fn non_overlapping(bits: &[u8], m: usize) -> Result<Outcome, Skip> {
    let big_m = bits.len() / NON_OVERLAPPING_BLOCKS;
    if big_m < m {
        return Err(Skip::TooShort {
            needed: NON_OVERLAPPING_BLOCKS * m,
            got: bits.len(),
        });
    }
    let hists: Vec<Vec<u32>> = bits
        .chunks_exact(big_m)
        .take(NON_OVERLAPPING_BLOCKS)
        .map(|b| window_histogram(b, m))
        .collect();
    let two_m = pow(2.0, m as f64);
    let mf = big_m as f64;
    let mu = (mf - m as f64 + 1.0) / two_m;
    let var = mf * (1.0 / two_m - (2.0 * m as f64 - 1.0) / (two_m * two_m));
    let mut out = Outcome::default()
        .param("m", m as f64)
        .param("block_length", mf)
        .param("blocks", NON_OVERLAPPING_BLOCKS as f64);
    for t in aperiodic_templates(m) {
        let chi2: f64 = hists
            .iter()
            .map(|h| {
                let w = h[t as usize] as f64;
                (w - mu) * (w - mu) / var
            })
            .sum();
        out.push(chi2, igamc(NON_OVERLAPPING_BLOCKS as f64 / 2.0, chi2 / 2.0));
    }
    Ok(out)
}

/// Probabilities of 0, 1, ..., `classes - 1` and at least `classes`
/// overlapping occurrences of `m` ones in a block of `block` fair bits.
pub fn overlapping_probabilities(m: usize, block: usize, classes: usize) -> Vec<f64> {
    // dist[run][count], run capped at m, count capped at classes.
    let width = classes + 1;
    let mut dist = vec![0.0f64; (m + 1) * width];
    dist[0] = 1.0;
    for _ in 0..block {
        let mut next = vec![0.0f64; (m + 1) * width];
        for run in 0..=m {
            for count in 0..width {
                let p = dist[run * width + count];
                if p == 0.0 {
                    continue;
                }
                next[count] += 0.5 * p;
                let r = (run + 1).min(m);
                let c = if r == m { (count + 1).min(classes) } else { count };
                next[r * width + c] += 0.5 * p;
            }
        }
        dist = next;
    }
    (0..width)
        .map(|c| (0..=m).map(|run| dist[run * width + c]).sum())
        .collect()
}

/// Overlapping occurrences of the all-ones template of length `m`.
pub fn overlapping(bits: &[u8], m: usize) -> Result<Outcome, Skip> {
    let blocks = bits.len() / OVERLAPPING_BLOCK;
    if blocks == 0 {
        return Err(Skip::TooShort {
            needed: OVERLAPPING_BLOCK,
            got: bits.len(),
        });
    }
    let probs = overlapping_probabilities(m, OVERLAPPING_BLOCK, OVERLAPPING_CLASSES);
    let mut nu = [0u64; OVERLAPPING_CLASSES + 1];
    for block in bits.chunks_exact(OVERLAPPING_BLOCK) {
        let mut run = 0usize;
        let mut count = 0usize;
        for &b in block {
            if b == 1 {
                run += 1;
                if run >= m {
                    count += 1;
                }
            } else {
                run = 0;
            }
        }
        nu[count.min(OVERLAPPING_CLASSES)] += 1;
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
    let p = igamc(OVERLAPPING_CLASSES as f64 / 2.0, chi2 / 2.0);
    Ok(Outcome::single(chi2, p)
        .param("m", m as f64)
        .param("block_length", OVERLAPPING_BLOCK as f64)
        .param("blocks", nf))
}
