//! Rank over GF(2) of small dense matrices stored as bit rows.

use crate::math::pow;

/// Rank of the matrix whose rows are the low `cols` bits of `rows`
/// (`cols <= 64`). The rows are reduced in place.
pub fn rank(rows: &mut [u64], cols: usize) -> usize {
    debug_assert!(cols <= 64);
    let mut rank = 0;
    for col in (0..cols).rev() {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Probability that a uniformly random `m x q` binary matrix has rank `r`.
pub fn rank_probability(m: usize, q: usize, r: usize) -> f64 {
    if r > m.min(q) {
        return 0.0;
    }
    let exponent = (r * (q + m - r)) as i32 - (m * q) as i32;
    let mut p = pow(2.0, exponent as f64);
    for i in 0..r {
        let num = (1.0 - pow(2.0, i as f64 - q as f64)) * (1.0 - pow(2.0, i as f64 - m as f64));
        let den = 1.0 - pow(2.0, i as f64 - r as f64);
        p *= num / den;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        let mut id: [u64; 8] = core::array::from_fn(|i| 1 << i);
        assert_eq!(rank(&mut id, 8), 8);
        let mut z = [0u64; 5];
        assert_eq!(rank(&mut z, 5), 0);
        let mut dup = [0b1011, 0b1011, 0b0110, 0b1101];
        assert_eq!(rank(&mut dup, 4), 2);
    }

    #[test]
    fn thirty_two_square_probabilities() {
        // Full rank, rank 31 and the rest, as tabulated for the rank test.
        let p32 = rank_probability(32, 32, 32);
        let p31 = rank_probability(32, 32, 31);
        assert!((p32 - 0.288_788_095_1).abs() < 1e-9);
        assert!((p31 - 0.577_576_190_1).abs() < 1e-9);
        assert!((1.0 - p32 - p31 - 0.133_635_714_8).abs() < 1e-9);
        let total: f64 = (0..=6).map(|r| rank_probability(6, 6, r)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
