//! Rank of disjoint 32x32 binary matrices.

use super::gf2::{rank, rank_probability};
use super::{Outcome, Skip};
use crate::math::exp;

const SIZE: usize = 32;
const BLOCK: usize = SIZE * SIZE;
/// 38 matrices.
pub const MIN_LEN: usize = 38 * BLOCK;

/// Fills a matrix row by row from `SIZE * SIZE` bits.
fn matrix(block: &[u8]) -> [u64; SIZE] {
    core::array::from_fn(|r| {
        block[r * SIZE..(r + 1) * SIZE]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64)
    })
}

pub fn matrix_rank(bits: &[u8]) -> Result<Outcome, Skip> {
    let n_mat = bits.len() / BLOCK;
    if n_mat == 0 {
        return Err(Skip::TooShort {
            needed: BLOCK,
            got: bits.len(),
        });
    }
    let mut counts = [0u64; 3];
    for block in bits.chunks_exact(BLOCK) {
        let mut m = matrix(block);
        match rank(&mut m, SIZE) {
            SIZE => counts[0] += 1,
            r if r == SIZE - 1 => counts[1] += 1,
            _ => counts[2] += 1,
        }
    }
    let p_full = rank_probability(SIZE, SIZE, SIZE);
    let p_minus = rank_probability(SIZE, SIZE, SIZE - 1);
    let probs = [p_full, p_minus, 1.0 - p_full - p_minus];
    let nf = n_mat as f64;
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, p)| {
            let e = nf * p;
            (c as f64 - e) * (c as f64 - e) / e
        })
        .sum();
    Ok(Outcome::single(chi2, exp(-chi2 / 2.0)).param("matrices", nf))
}
