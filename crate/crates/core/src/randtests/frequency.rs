//! Monobit, block frequency and cumulative sums.

use alloc::vec::Vec;

use super::special::{erfc, igamc, normal_cdf};
use super::{Outcome, Skip};
use crate::math::{abs, sqrt, SQRT_2};

fn signed_sum(bits: &[u8]) -> i64 {
    let ones = bits.iter().filter(|&&b| b == 1).count() as i64;
    2 * ones - bits.len() as i64
}

/// Proportion of ones over the whole sequence.
pub fn monobit(bits: &[u8]) -> Outcome {
    let n = bits.len() as f64;
    let s_obs = abs(signed_sum(bits) as f64) / sqrt(n);
    Outcome::single(s_obs, erfc(s_obs / SQRT_2))
}

/// Proportion of ones within `m`-bit blocks.
pub fn block_frequency(bits: &[u8], m: usize) -> Result<Outcome, Skip> {
    let blocks = bits.len() / m;
    if blocks == 0 {
        return Err(Skip::TooShort {
            needed: m,
            got: bits.len(),
        });
    }
    let chi2: f64 = bits
        .chunks_exact(m)
        .map(|b| {
            let pi = b.iter().filter(|&&x| x == 1).count() as f64 / m as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(Outcome::single(chi2, p)
        .param("m", m as f64)
        .param("blocks", blocks as f64))
}

/// p-value for the maximal partial-sum excursion `z` of an `n`-step walk.
fn cusum_p_value(n: usize, z: i64) -> f64 {
    let n_i = n as i64;
    let sn = sqrt(n as f64);
    let zf = z as f64;
    let phi = |k: i64, c: i64| normal_cdf((4 * k + c) as f64 * zf / sn);
    // Integer division truncates toward zero, as in the reference code.
    let mut sum1 = 0.0;
    for k in (-n_i / z + 1) / 4..=(n_i / z - 1) / 4 {
        sum1 += phi(k, 1) - phi(k, -1);
    }
    let mut sum2 = 0.0;
    for k in (-n_i / z - 3) / 4..=(n_i / z - 1) / 4 {
        sum2 += phi(k, 3) - phi(k, 1);
    }
    1.0 - sum1 + sum2
}

/// Maximal excursion of the partial sums, forward then backward.
pub fn cumulative_sums(bits: &[u8]) -> Outcome {
    let n = bits.len();
    let max_abs = |it: &mut dyn Iterator<Item = &u8>| {
        let mut s = 0i64;
        let mut z = 0i64;
        for &b in it {
            s += if b == 1 { 1 } else { -1 };
            z = z.max(s.abs());
        }
        z
    };
    let forward = max_abs(&mut bits.iter());
    let backward = max_abs(&mut bits.iter().rev());
    let mut out = Outcome::default();
    for z in [forward, backward] {
        // z = 0 only for empty input.
        let p = if z == 0 { 1.0 } else { cusum_p_value(n, z) };
        out.push(z as f64, p);
    }
    out
}

pub(crate) fn partial_sums(bits: &[u8]) -> Vec<i64> {
    let mut s = 0i64;
    bits.iter()
        .map(|&b| {
            s += if b == 1 { 1 } else { -1 };
            s
        })
        .collect()
}
