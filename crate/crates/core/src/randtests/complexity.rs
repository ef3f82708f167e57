//! Linear complexity of fixed-length blocks.

use alloc::vec;

use super::special::igamc;
use super::{Outcome, Skip};
use crate::math::pow;

pub const MIN_BLOCKS: usize = 200;

/// Class probabilities for the normalized complexity deviation.
const PI: [f64; 7] = [
    1.0 / 96.0,
    1.0 / 32.0,
    1.0 / 8.0,
    1.0 / 2.0,
    1.0 / 4.0,
    1.0 / 16.0,
    1.0 / 48.0,
];

/// The 64 bits starting at bit `offset`, zero past the end.
#[inline]
fn word_at(words: &[u64], offset: usize) -> u64 {
    let w = offset / 64;
    let b = offset % 64;
    let lo = words.get(w).copied().unwrap_or(0);
    if b == 0 {
        lo
    } else {
        (lo >> b) | (words.get(w + 1).copied().unwrap_or(0) << (64 - b))
    }
}

/// `dst ^= src << shift` over word arrays of equal length.
fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let ws = shift / 64;
    let bs = shift % 64;
    for i in (ws..dst.len()).rev() {
        let j = i - ws;
        let mut v = src[j] << bs;
        if bs != 0 && j > 0 {
            v |= src[j - 1] >> (64 - bs);
        }
        dst[i] ^= v;
    }
}

/// Length of the shortest LFSR generating `seq`, by Berlekamp-Massey over
/// bit-packed polynomials.
pub fn berlekamp_massey(seq: &[u8]) -> usize {
    let n = seq.len();
    let words = n / 64 + 2;
    // Reversed sequence: r[j] = s[n - 1 - j], so s[k - i] = r[n - 1 - k + i].
    let mut r = vec![0u64; words];
    for (j, &b) in seq.iter().rev().enumerate() {
        r[j / 64] |= (b as u64) << (j % 64);
    }
    let mut c = vec![0u64; words];
    let mut b = vec![0u64; words];
    c[0] = 1;
    b[0] = 1;
    let mut l = 0usize;
    let mut m: isize = -1;
    for k in 0..n {
        // d = sum_{i=0..=l} c_i s_{k-i}
        let base = n - 1 - k;
        let mut acc = 0u64;
        let mut i = 0;
        while i <= l {
            let mut cw = word_at(&c, i);
            let rem = l + 1 - i;
            if rem < 64 {
                cw &= (1u64 << rem) - 1;
            }
            acc ^= cw & word_at(&r, base + i);
            i += 64;
        }
        if acc.count_ones() & 1 == 1 {
            let t = c.clone();
            xor_shifted(&mut c, &b, (k as isize - m) as usize);
            if 2 * l <= k {
                l = k + 1 - l;
                m = k as isize;
                b = t;
            }
        }
    }
    l
}

pub fn linear_complexity(bits: &[u8], m: usize) -> Result<Outcome, Skip> {
    let blocks = bits.len() / m;
    if blocks == 0 {
        return Err(Skip::TooShort {
            needed: m,
            got: bits.len(),
        });
    }
    let mf = m as f64;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mu = mf / 2.0 + (9.0 - sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / pow(2.0, mf);
    let mut nu = [0u64; 7];
    for block in bits.chunks_exact(m) {
        let l = berlekamp_massey(block) as f64;
        let t = sign * (l - mu) + 2.0 / 9.0;
        let class = if t <= -2.5 {
            0
        } else if t <= -1.5 {
            1
        } else if t <= -0.5 {
            2
        } else if t <= 0.5 {
            3
        } else if t <= 1.5 {
            4
        } else if t <= 2.5 {
            5
        } else {
            6
        };
        nu[class] += 1;
    }
    let nf = blocks as f64;
    let chi2: f64 = nu
        .iter()
        .zip(PI)
        .map(|(&v, p)| {
            let e = nf * p;
            (v as f64 - e) * (v as f64 - e) / e
        })
        .sum();
    Ok(Outcome::single(chi2, igamc(3.0, chi2 / 2.0))
        .param("m", mf)
        .param("blocks", nf))
}

/// Reference Berlekamp-Massey on unpacked bits.
#[cfg(test)]
fn berlekamp_massey_naive(s: &[u8]) -> usize {
    let n = s.len();
    let mut c = vec![0u8; n + 1];
    let mut b = vec![0u8; n + 1];
    c[0] = 1;
    b[0] = 1;
    let (mut l, mut m) = (0usize, -1isize);
    for k in 0..n {
        let mut d = s[k];
        for i in 1..=l {
            d ^= c[i] & s[k - i];
        }
        if d == 1 {
            let t = c.clone();
            let shift = (k as isize - m) as usize;
            for i in 0..=n - shift {
                c[i + shift] ^= b[i];
            }
            if 2 * l <= k {
                l = k + 1 - l;
                m = k as isize;
                b = t;
            }
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn known_complexity() {
        let s: Vec<u8> = "1101011110001".bytes().map(|c| c - b'0').collect();
        assert_eq!(berlekamp_massey(&s), 4);
        assert_eq!(berlekamp_massey(&[0; 10]), 0);
        assert_eq!(berlekamp_massey(&[0, 0, 0, 1]), 4);
        assert_eq!(berlekamp_massey(&[1; 70]), 1);
    }

    #[test]
    fn packed_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in [1usize, 2, 63, 64, 65, 127, 128, 200, 500] {
            for _ in 0..20 {
                let s: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
                assert_eq!(berlekamp_massey(&s), berlekamp_massey_naive(&s), "len {len}");
            }
        }
    }
}
