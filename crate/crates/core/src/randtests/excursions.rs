//! Random excursions and random excursions variant.

use alloc::vec::Vec;

use super::frequency::partial_sums;
use super::special::{erfc, igamc};
use super::{Outcome, Skip};
use crate::math::{abs, pow, sqrt};

/// Below this length the cycle requirement of 500 is rarely met.
pub const MIN_LEN: usize = 1_000_000;
const MIN_CYCLES: usize = 500;

const STATES: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];

fn required_cycles(n: usize) -> usize {
    let by_len = (0.005 * sqrt(n as f64)) as usize;
    by_len.max(MIN_CYCLES)
}

/// Partial sums split into zero-to-zero cycles; the walk is closed with a
/// final zero.
fn cycles(bits: &[u8]) -> Result<(Vec<i64>, usize), Skip> {
    let sums = partial_sums(bits);
    let j = sums.iter().filter(|&&s| s == 0).count() + usize::from(sums.last() != Some(&0));
    let needed = required_cycles(bits.len());
    if j < needed {
        return Err(Skip::TooFewCycles { cycles: j, needed });
    }
    Ok((sums, j))
}

/// Probability that state `x` is visited exactly `k` times in a cycle
/// (`k = 5` meaning five or more).
pub fn visit_probability(x: i64, k: usize) -> f64 {
    let ax = abs(x as f64);
    let q = 1.0 - 1.0 / (2.0 * ax);
    match k {
        0 => q,
        1..=4 => pow(q, k as f64 - 1.0) / (4.0 * ax * ax),
        _ => pow(q, 4.0) / (2.0 * ax),
    }
}

pub fn random_excursions(bits: &[u8]) -> Result<Outcome, Skip> {
    let (sums, j) = cycles(bits)?;
    // nu[state][k] over cycles.
    let mut nu = [[0u64; 6]; 8];
    let mut visits = [0usize; 8];
    let close = |nu: &mut [[u64; 6]; 8], visits: &mut [usize; 8]| {
        for (s, v) in visits.iter_mut().enumerate() {
            nu[s][(*v).min(5)] += 1;
            *v = 0;
        }
    };
    for &s in &sums {
        if s == 0 {
            close(&mut nu, &mut visits);
        } else if (-4..=4).contains(&s) {
            let idx = if s < 0 { (s + 4) as usize } else { (s + 3) as usize };
            visits[idx] += 1;
        }
    }
    if sums.last() != Some(&0) {
        close(&mut nu, &mut visits);
    }
    let jf = j as f64;
    let mut out = Outcome::default().param("cycles", jf);
    for (si, &x) in STATES.iter().enumerate() {
        let chi2: f64 = (0..6)
            .map(|k| {
                let e = jf * visit_probability(x, k);
                let d = nu[si][k] as f64 - e;
                d * d / e
            })
            .sum();
        out.push(chi2, igamc(2.5, chi2 / 2.0));
    }
    Ok(out)
}

pub fn random_excursions_variant(bits: &[u8]) -> Result<Outcome, Skip> {
    let (sums, j) = cycles(bits)?;
    let mut xi = [0u64; 19];
    for &s in &sums {
        if (-9..=9).contains(&s) {
            xi[(s + 9) as usize] += 1;
        }
    }
    let jf = j as f64;
    let mut out = Outcome::default().param("cycles", jf);
    for x in (-9i64..=9).filter(|&x| x != 0) {
        let count = xi[(x + 9) as usize] as f64;
        let p = erfc(abs(count - jf) / sqrt(2.0 * jf * (4.0 * abs(x as f64) - 2.0)));
        out.push(count, p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_sum_to_one() {
        for x in STATES {
            let total: f64 = (0..6).map(|k| visit_probability(x, k)).sum();
            assert!((total - 1.0).abs() < 1e-14, "{x}");
        }
        assert!((visit_probability(1, 0) - 0.5).abs() < 1e-15);
        assert!((visit_probability(4, 5) - 0.0733).abs() < 1e-4);
    }

    #[test]
    fn too_few_cycles_skips() {
        let bits = [1u8; 2000];
        assert!(matches!(random_excursions(&bits), Err(Skip::TooFewCycles { .. })));
    }
}
