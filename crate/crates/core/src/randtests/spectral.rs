//! Discrete Fourier transform test.

use alloc::vec::Vec;

use super::fft::dft_real;
use super::special::erfc;
use super::Outcome;
use crate::math::{abs, ln, sqrt, SQRT_2};

pub const MIN_LEN: usize = 1000;

/// Moduli of the first `n / 2` coefficients of the DFT of `2 * bits - 1`.
pub fn magnitudes(bits: &[u8]) -> Vec<f64> {
    let x: Vec<f64> = bits.iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).collect();
    let spectrum = dft_real(&x);
    spectrum[..bits.len() / 2].iter().map(|c| c.norm()).collect()
}

/// Number of peaks below the 95% threshold against the expected count.
pub fn spectral(bits: &[u8]) -> Outcome {
    let n = bits.len() as f64;
    let mags = magnitudes(bits);
    let threshold = sqrt(ln(1.0 / 0.05) * n);
    let n0 = 0.95 * n / 2.0;
    let n1 = mags.iter().filter(|&&m| m < threshold).count() as f64;
    let d = (n1 - n0) / sqrt(n * 0.95 * 0.05 / 4.0);
    Outcome::single(d, erfc(abs(d) / SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        // 1001010011: half-spectrum moduli 0, 2, sqrt(20), 2, sqrt(20) all
        // sit below T = sqrt(10 ln 20), so N1 = 5 against N0 = 4.75.
        let bits = [1, 0, 0, 1, 0, 1, 0, 0, 1, 1];
        let m = magnitudes(&bits);
        let want = [0.0, 2.0, 20f64.sqrt(), 2.0, 20f64.sqrt()];
        for (a, b) in m.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let o = spectral(&bits);
        assert!((o.statistics[0] - 0.725_476_250_1).abs() < 1e-9, "{}", o.statistics[0]);
        assert!((o.p_values[0] - 0.468_159_909_9).abs() < 1e-9);
    }
}
