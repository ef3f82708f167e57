//! `f64` functions routed through `libm` so the crate builds without `std`.

pub use libm::{cos, erfc, exp, fabs as abs, floor, log as ln, log1p, log2, pow, round, sin, sqrt};

pub const PI: f64 = core::f64::consts::PI;
pub const LN_2: f64 = core::f64::consts::LN_2;
pub const SQRT_2: f64 = core::f64::consts::SQRT_2;

#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}
