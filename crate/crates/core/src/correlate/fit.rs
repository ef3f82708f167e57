use alloc::vec::Vec;

use thiserror::Error;

use super::G2Curve;
use crate::math::{abs, exp, sqrt};

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 60;

/// `g2(lag) = 1 - a * exp(-|lag| / tau0)`.
#[inline]
pub fn antibunching_model(lag_ns: f64, a: f64, tau0_ns: f64) -> f64 {
    1.0 - a * exp(-abs(lag_ns) / tau0_ns)
}

/// Partial derivatives of [`antibunching_model`] with respect to `(a, tau0)`.
#[inline]
pub fn antibunching_jacobian(lag_ns: f64, a: f64, tau0_ns: f64) -> [f64; 2] {
    let e = exp(-abs(lag_ns) / tau0_ns);
    [-e, -a * e * abs(lag_ns) / (tau0_ns * tau0_ns)]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitFlags {
    pub a_at_lower_bound: bool,
    pub a_at_upper_bound: bool,
    /// `tau0` is not constrained by the data: no contrast, singular normal
    /// matrix, or a standard error larger than the value itself.
    pub tau_unidentifiable: bool,
    /// The contrast is below three standard errors.
    pub contrast_insignificant: bool,
}

impl FitFlags {
    pub fn any(&self) -> bool {
        self.a_at_lower_bound || self.a_at_upper_bound || self.tau_unidentifiable || self.contrast_insignificant
    }
}

/// Fitted antibunching parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AntibunchFit {
    pub a: f64,
    pub tau0_ns: f64,
    /// Always exactly `1 - a`.
    pub g2_at_zero: f64,
    pub residual_rms: f64,
    pub std_error_a: Option<f64>,
    pub std_error_tau0_ns: Option<f64>,
    pub iterations: usize,
    pub flags: FitFlags,
}

impl AntibunchFit {
    pub fn is_identified(&self) -> bool {
        !(self.flags.a_at_lower_bound || self.flags.tau_unidentifiable || self.flags.contrast_insignificant)
    }
}

/// One accepted Gauss-Newton iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStep {
    pub iteration: usize,
    pub a: f64,
    pub tau0_ns: f64,
    pub cost: f64,
    pub step_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 5 bins, curve has {0}")]
    TooFewBins(usize),
    #[error("curve spans {span_ns} ns but at least {required_ns} ns (3 lifetimes) are needed")]
    InsufficientSpan { span_ns: f64, required_ns: f64 },
    #[error("curve has no usable normalization or contains non-finite values")]
    BadCurve,
    #[error("no convergence after {} iterations", trace.len())]
    NoConvergence { trace: Vec<FitStep> },
}

struct Problem<'a> {
    lags: &'a [f64],
    values: &'a [f64],
    weights: Vec<f64>,
    tau_bounds: (f64, f64),
}

impl Problem<'_> {
    fn cost(&self, a: f64, tau0: f64) -> f64 {
        self.lags
            .iter()
            .zip(self.values)
            .zip(&self.weights)
            .map(|((&x, &y), &w)| {
                let r = y - antibunching_model(x, a, tau0);
                w * r * r
            })
            .sum()
    }

    /// Normal matrix `J^T W J` (upper triangle) and gradient `J^T W r`.
    fn normal_equations(&self, a: f64, tau0: f64) -> ([f64; 3], [f64; 2]) {
        let mut h = [0.0; 3];
        let mut g = [0.0; 2];
        for ((&x, &y), &w) in self.lags.iter().zip(self.values).zip(&self.weights) {
            let j = antibunching_jacobian(x, a, tau0);
            let r = y - antibunching_model(x, a, tau0);
            h[0] += w * j[0] * j[0];
            h[1] += w * j[0] * j[1];
            h[2] += w * j[1] * j[1];
            g[0] += w * j[0] * r;
            g[1] += w * j[1] * r;
        }
        (h, g)
    }

    fn project(&self, a: f64, tau0: f64) -> (f64, f64) {
        (a.clamp(0.0, 1.0), tau0.clamp(self.tau_bounds.0, self.tau_bounds.1))
    }
}

fn is_singular(h: &[f64; 3]) -> bool {
    let det = h[0] * h[2] - h[1] * h[1];
    !(det > 1e-12 * h[0] * h[2]) || !(h[2] > 0.0)
}

fn invert(h: &[f64; 3]) -> Option<[f64; 3]> {
    if is_singular(h) {
        return None;
    }
    let det = h[0] * h[2] - h[1] * h[1];
    Some([h[2] / det, -h[1] / det, h[0] / det])
}

/// Initial guesses: contrast from the deepest point, `tau0` from the first lag
/// where the mirrored curve recovers to `1 - a0 / e`.
fn initial_guess(curve: &G2Curve) -> (f64, f64) {
    let min = curve.normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let a0 = (1.0 - min).clamp(0.0, 1.0);
    let c = curve.center();
    let level = 1.0 - a0 / core::f64::consts::E;
    let mut tau = None;
    for k in 1..=c {
        let avg = 0.5 * (curve.normalized[c + k] + curve.normalized[c - k]);
        if avg >= level {
            tau = Some(k as f64 * curve.bin_width_ns);
            break;
        }
    }
    // A dip that never recovers inside the window has tau beyond the span.
    let tau = if a0 == 0.0 {
        curve.bin_width_ns
    } else {
        tau.unwrap_or(f64::INFINITY)
    };
    (a0, tau)
}

/// Weighted least-squares fit of `1 - a * exp(-|lag| / tau0)` to the
/// normalized curve, with Poisson weights from the raw counts.
///
/// Projected Gauss-Newton with a backtracking line search; `a` is held in
/// `[0, 1]`. Standard errors come from the inverse normal matrix at the
/// solution.
pub fn fit_antibunching(curve: &G2Curve) -> Result<AntibunchFit, FitError> {
    let n = curve.len();
    if n < 5 {
        return Err(FitError::TooFewBins(n));
    }
    let norm = curve.normalization();
    if !(norm.is_finite() && norm > 0.0) || curve.normalized.iter().any(|v| !v.is_finite()) {
        return Err(FitError::BadCurve);
    }
    let (mut a, mut tau) = initial_guess(curve);
    let span = curve.center() as f64 * curve.bin_width_ns;
    if span < 3.0 * tau {
        return Err(FitError::InsufficientSpan {
            span_ns: span,
            required_ns: 3.0 * tau.min(span),
        });
    }
    let problem = Problem {
        lags: &curve.lags_ns,
        values: &curve.normalized,
        weights: curve.counts.iter().map(|&c| norm * norm / (c.max(1) as f64)).collect(),
        tau_bounds: (1e-3 * curve.bin_width_ns, 1e3 * span),
    };

    let mut trace = Vec::new();
    let mut cost = problem.cost(a, tau);
    let mut converged = false;
    let mut tau_frozen = false;
    for iteration in 0..MAX_ITERATIONS {
        let (h, g) = problem.normal_equations(a, tau);
        let step = match invert(&h) {
            Some(inv) => {
                let da = inv[0] * g[0] + inv[1] * g[1];
                let dt = inv[1] * g[0] + inv[2] * g[1];
                if a >= 1.0 && da > 0.0 {
                    [0.0, g[1] / h[2]]
                } else if a <= 0.0 && da < 0.0 {
                    [0.0, 0.0]
                } else {
                    [da, dt]
                }
            }
            // No information about tau0 left; move the contrast only.
            None => {
                tau_frozen = true;
                let da = if h[0] > 0.0 { g[0] / h[0] } else { 0.0 };
                [da, 0.0]
            }
        };

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let (na, nt) = problem.project(a + scale * step[0], tau + scale * step[1]);
            let nc = problem.cost(na, nt);
            if nc <= cost {
                accepted = Some((na, nt, nc));
                break;
            }
            scale *= 0.5;
        }
        let Some((na, nt, nc)) = accepted else {
            // No descent along the step: the iterate is a minimum to working precision.
            converged = true;
            break;
        };
        let rel = |new: f64, old: f64| abs(new - old) / abs(old).max(1e-12);
        let small = rel(na, a) < STEP_TOLERANCE && rel(nt, tau) < STEP_TOLERANCE;
        a = na;
        tau = nt;
        cost = nc;
        trace.push(FitStep {
            iteration,
            a,
            tau0_ns: tau,
            cost,
            step_scale: scale,
        });
        if small {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(FitError::NoConvergence { trace });
    }

    let (h, _) = problem.normal_equations(a, tau);
    let cov = invert(&h);
    let std_error_a = match cov {
        Some(c) => Some(sqrt(c[0])),
        None if h[0] > 0.0 => Some(sqrt(1.0 / h[0])),
        None => None,
    };
    let std_error_tau = cov.map(|c| sqrt(c[2]));
    let residual_rms = sqrt(
        curve
            .lags_ns
            .iter()
            .zip(&curve.normalized)
            .map(|(&x, &y)| {
                let r = y - antibunching_model(x, a, tau);
                r * r
            })
            .sum::<f64>()
            / n as f64,
    );
    let a_at_lower_bound = a <= 0.0;
    let flags = FitFlags {
        a_at_lower_bound,
        a_at_upper_bound: a >= 1.0,
        tau_unidentifiable: a_at_lower_bound || tau_frozen || std_error_tau.is_none_or(|s| !(s < tau)),
        contrast_insignificant: std_error_a.is_none_or(|s| !(a > 3.0 * s)),
    };
    Ok(AntibunchFit {
        a,
        tau0_ns: tau,
        g2_at_zero: 1.0 - a,
        residual_rms,
        std_error_a,
        std_error_tau0_ns: std_error_tau,
        iterations: trace.len(),
        flags,
    })
}
