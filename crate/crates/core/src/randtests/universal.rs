//! Maurer's universal statistical test.

use alloc::vec;

use super::special::erfc;
use super::{Outcome, Skip};
use crate::math::{abs, log2, pow, sqrt, SQRT_2};

pub const MIN_LEN: usize = 387_840;

/// `(minimum n, L, expected value, variance)` per block length.
const TABLE: [(usize, usize, f64, f64); 11] = [
    (387_840, 6, 5.217_705_2, 2.954),
    (904_960, 7, 6.196_250_7, 3.125),
    (2_068_480, 8, 7.183_665_6, 3.238),
    (4_654_080, 9, 8.176_424_8, 3.311),
    (10_342_400, 10, 9.172_324_3, 3.356),
    (22_753_280, 11, 10.170_032, 3.384),
    (49_643_520, 12, 11.168_765, 3.401),
    (107_560_960, 13, 12.168_070, 3.410),
    (231_669_760, 14, 13.167_693, 3.416),
    (496_435_200, 15, 14.167_488, 3.419),
    (1_059_061_760, 16, 15.167_379, 3.421),
];

pub fn universal(bits: &[u8]) -> Result<Outcome, Skip> {
    let n = bits.len();
    let Some(&(_, l, expected, variance)) = TABLE.iter().rev().find(|row| n >= row.0) else {
        return Err(Skip::TooShort {
            needed: MIN_LEN,
            got: n,
        });
    };
    let q = 10 << l;
    let k = n / l - q;
    let mut last = vec![0usize; 1 << l];
    let block_value = |i: usize| {
        bits[i * l..(i + 1) * l]
            .iter()
            .fold(0usize, |a, &b| (a << 1) | b as usize)
    };
    for i in 0..q {
        last[block_value(i)] = i + 1;
    }
    let mut sum = 0.0;
    for i in q..q + k {
        let v = block_value(i);
        sum += log2((i + 1 - last[v]) as f64);
        last[v] = i + 1;
    }
    let kf = k as f64;
    let lf = l as f64;
    let fn_ = sum / kf;
    let c = 0.7 - 0.8 / lf + (4.0 + 32.0 / lf) * pow(kf, -3.0 / lf) / 15.0;
    let sigma = c * sqrt(variance / kf);
    let p = erfc(abs(fn_ - expected) / (SQRT_2 * sigma));
    Ok(Outcome::single(fn_, p)
        .param("l", lf)
        .param("q", q as f64)
        .param("k", kf))
}
