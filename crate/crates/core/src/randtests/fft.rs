//! Discrete Fourier transform of arbitrary length: iterative radix-2 for
//! powers of two, Bluestein's chirp-z otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::math::{cos, sin, sqrt, PI};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        Complex::new(cos(theta), sin(theta))
    }

    #[inline]
    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        sqrt(self.re * self.re + self.im * self.im)
    }

    #[inline]
    fn scale(self, s: f64) -> Self {
        Complex::new(self.re * s, self.im * s)
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// In-place forward (`inverse = false`, kernel `e^{-2 pi i jk/n}`) or
/// unnormalized inverse transform; `data.len()` must be a power of two.
fn radix2(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    // Twiddles for the largest stage; smaller stages stride through them.
    let twiddles: Vec<Complex> = (0..n / 2)
        .map(|k| Complex::from_angle(sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let u = data[start + k];
                let v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub fn dft(input: &[Complex]) -> Vec<Complex> {
    let n = input.len();
    if n <= 1 {
        return input.to_vec();
    }
    if n.is_power_of_two() {
        let mut data = input.to_vec();
        radix2(&mut data, false);
        return data;
    }
    // Bluestein: jk = (j^2 + k^2 - (k-j)^2) / 2. The chirp angle uses
    // k^2 mod 2n so it stays exact for large n.
    let two_n = 2 * n as u128;
    let chirp: Vec<Complex> = (0..n)
        .map(|k| {
            let k2 = (k as u128 * k as u128) % two_n;
            Complex::from_angle(-PI * k2 as f64 / n as f64)
        })
        .collect();
    let m = (2 * n - 1).next_power_of_two();
    let mut a = vec![Complex::ZERO; m];
    for (k, (&x, &w)) in input.iter().zip(&chirp).enumerate() {
        a[k] = x * w;
    }
    let mut b = vec![Complex::ZERO; m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = *x * *y;
    }
    radix2(&mut a, true);
    let inv_m = 1.0 / m as f64;
    (0..n).map(|k| (a[k] * chirp[k]).scale(inv_m)).collect()
}

/// DFT of a real sequence.
pub fn dft_real(input: &[f64]) -> Vec<Complex> {
    let data: Vec<Complex> = input.iter().map(|&x| Complex::new(x, 0.0)).collect();
    dft(&data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[f64]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex::ZERO, |acc, (j, &v)| {
                    let t = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + Complex::from_angle(t).scale(v)
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_for_assorted_lengths() {
        for n in [1usize, 2, 3, 5, 8, 12, 17, 64, 100, 127] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
            let fast = dft_real(&x);
            let slow = naive(&x);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((*f - *s).norm() < 1e-9 * (1.0 + s.norm()), "n={n}");
            }
        }
    }
}
