//! Serial and approximate entropy tests on circular pattern counts.

use alloc::vec;
use alloc::vec::Vec;

use super::special::igamc;
use super::Outcome;
use crate::math::{ln, pow, LN_2};

/// Counts of every `m`-bit window of the sequence extended circularly by its
/// first `m - 1` bits.
pub fn circular_counts(bits: &[u8], m: usize) -> Vec<u32> {
    let n = bits.len();
    let mut counts = vec![0u32; 1 << m];
    if m == 0 || n == 0 {
        counts[0] = n as u32;
        return counts;
    }
    let mask = (1usize << m) - 1;
    let mut w = 0usize;
    for i in 0..m - 1 {
        w = (w << 1) | bits[i % n] as usize;
    }
    for i in 0..n {
        let b = bits[(i + m - 1) % n];
        w = ((w << 1) | b as usize) & mask;
        counts[w] += 1;
    }
    counts
}

/// Counts for windows one bit shorter: drop the last bit of each pattern.
fn marginal(counts: &[u32]) -> Vec<u32> {
    counts.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}

fn psi_sq(counts: &[u32], n: usize) -> f64 {
    if counts.len() == 1 {
        return 0.0;
    }
    let sum: f64 = counts.iter().map(|&c| c as f64 * c as f64).sum();
    counts.len() as f64 / n as f64 * sum - n as f64
}

/// Two p-values from the first and second differences of `psi^2`.
pub fn serial(bits: &[u8], m: usize) -> Outcome {
    let n = bits.len();
    let c_m = circular_counts(bits, m);
    let c_m1 = marginal(&c_m);
    let c_m2 = marginal(&c_m1);
    let (p0, p1, p2) = (psi_sq(&c_m, n), psi_sq(&c_m1, n), psi_sq(&c_m2, n));
    let del1 = p0 - p1;
    let del2 = p0 - 2.0 * p1 + p2;
    let mut out = Outcome::default().param("m", m as f64);
    out.push(del1, igamc(pow(2.0, m as f64 - 2.0), del1 / 2.0));
    out.push(del2, igamc(pow(2.0, m as f64 - 3.0), del2 / 2.0));
    out
}

fn phi(counts: &[u32], n: usize) -> f64 {
    let nf = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            p * ln(p)
        })
        .sum()
}

pub fn approximate_entropy(bits: &[u8], m: usize) -> Outcome {
    let n = bits.len();
    let c_hi = circular_counts(bits, m + 1);
    let c_lo = marginal(&c_hi);
    let apen = phi(&c_lo, n) - phi(&c_hi, n);
    let chi2 = 2.0 * n as f64 * (LN_2 - apen);
    Outcome::single(chi2, igamc(pow(2.0, m as f64 - 1.0), chi2 / 2.0))
        .param("m", m as f64)
        .param("apen", apen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn serial_example() {
        // 0011011101 with m = 3.
        let o = serial(&parse("0011011101"), 3);
        assert!((o.statistics[0] - 1.6).abs() < 1e-12);
        assert!((o.statistics[1] - 0.8).abs() < 1e-12);
        assert!((o.p_values[0] - 0.808792).abs() < 1e-6);
        assert!((o.p_values[1] - 0.670320).abs() < 1e-6);
    }

    #[test]
    fn apen_example() {
        // 0100110101 with m = 3: chi2 = 10.043859, p = 0.261961.
        let o = approximate_entropy(&parse("0100110101"), 3);
        assert!((o.statistics[0] - 10.043_859).abs() < 1e-5, "{}", o.statistics[0]);
        assert!((o.p_values[0] - 0.261961).abs() < 1e-5);
    }

    #[test]
    fn marginals_equal_direct_counts() {
        let bits: Vec<u8> = (0..999u32).map(|i| (i.wrapping_mul(40_503) >> 7 & 1) as u8).collect();
        assert_eq!(marginal(&circular_counts(&bits, 6)), circular_counts(&bits, 5));
    }
}
