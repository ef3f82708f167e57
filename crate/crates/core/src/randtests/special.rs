//! Special functions for p-values.

use crate::math::{abs, exp, lgamma, ln, log1p, PI, SQRT_2};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
/// Above this shape the prefactor uses the Stirling form.
const STIRLING_FROM: f64 = 10.0;

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    crate::math::erfc(x)
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `ln Gamma(a) - ((a - 1/2) ln a - a + ln(2 pi) / 2)` for `a >= 10`.
fn stirling_correction(a: f64) -> f64 {
    let r = 1.0 / a;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360360.0))))))
}

/// `ln(x^a e^-x / Gamma(a))`, accurate for large `a` near `x`.
fn ln_prefactor(a: f64, x: f64) -> f64 {
    if a < STIRLING_FROM {
        a * ln(x) - x - lgamma(a)
    } else {
        let t = (x - a) / a;
        a * (log1p(t) - t) + 0.5 * ln(a) - 0.5 * ln(2.0 * PI) - stirling_correction(a)
    }
}

/// Series for the lower regularized gamma `P(a, x)`, used for `x < a + 1`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..MAX_ITER {
        n += 1.0;
        term *= x / n;
        sum += term;
        if abs(term) < abs(sum) * EPS {
            break;
        }
    }
    sum * exp(ln_prefactor(a, x))
}

/// Continued fraction for the upper regularized gamma `Q(a, x)` (modified
/// Lentz), used for `x >= a + 1`.
fn upper_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if abs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if abs(delta - 1.0) < EPS {
            break;
        }
    }
    exp(ln_prefactor(a, x)) * h
}

/// Upper regularized incomplete gamma `Q(a, x) = Gamma(a, x) / Gamma(a)`.
pub fn igamc(a: f64, x: f64) -> f64 {
    if !(a > 0.0) || x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_fraction(a, x)
    }
}

/// Lower regularized incomplete gamma `P(a, x)`.
pub fn igam(a: f64, x: f64) -> f64 {
    if !(a > 0.0) || x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_fraction(a, x)
    }
}

/// Survival function of the chi-square distribution with `df` degrees of
/// freedom.
#[inline]
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    igamc(df / 2.0, stat / 2.0)
}

#[inline]
pub(crate) fn clamp_p(p: f64) -> f64 {
    if p.is_nan() {
        p
    } else {
        p.clamp(0.0, 1.0)
    }
}
