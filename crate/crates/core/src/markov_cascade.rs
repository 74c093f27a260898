//! Failure probability after converting an averaged distance bound into an
//! individual guarantee with one or two Markov-inequality layers.
//!
//! A layer with threshold `σ` fails with probability at most `σ` and passes
//! the bound `ε/σ` on to the next layer. With one layer the guarantee fails
//! with probability `σ + ε/σ − ε`; with two independent layers the product
//! rule gives `1 − (1−σ₁)(1−σ₂)(1 − ε/(σ₁σ₂))`. Optima are located
//! numerically and compared against the closed forms `σ = √ε` and
//! `σ₁ = σ₂ = ∛ε`.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const LOG_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    /// One threshold for a single layer, two for a double cascade.
    pub sigma_values: Vec<f64>,
    /// Failure probability evaluated at the numeric optimum.
    pub failure_prob: f64,
    /// Small-ε asymptote: `2√ε` (single) or `3∛ε` (double).
    pub analytic_optimum: f64,
}

/// `min(mean/delta, 1)`.
pub fn markov_bound(mean: f64, delta: f64) -> Result<f64> {
    check_range("mean", mean, "[0, inf)", mean >= 0.0)?;
    check_range("delta", delta, "(0, inf)", delta > 0.0)?;
    Ok((mean / delta).min(1.0))
}

fn check_sigma(name: &'static str, sigma: f64) -> Result<()> {
    check_range(name, sigma, "(0, 1)", sigma > 0.0 && sigma < 1.0)
}

fn check_eps(eps: f64) -> Result<()> {
    check_range("eps", eps, "[0, 1]", (0.0..=1.0).contains(&eps))
}

// Expanded forms keep full relative precision when the result is small.
fn single_raw(eps: f64, sigma: f64) -> f64 {
    sigma + eps / sigma - eps
}

fn double_raw(eps: f64, s1: f64, s2: f64) -> f64 {
    let c = eps / (s1 * s2);
    s1 + s2 + c - s1 * s2 - s1 * c - s2 * c + s1 * s2 * c
}

pub fn failure_single(eps: f64, sigma: f64) -> Result<f64> {
    check_eps(eps)?;
    check_sigma("sigma", sigma)?;
    Ok(single_raw(eps, sigma).min(1.0))
}

pub fn failure_double(eps: f64, sigma1: f64, sigma2: f64) -> Result<f64> {
    check_eps(eps)?;
    check_sigma("sigma1", sigma1)?;
    check_sigma("sigma2", sigma2)?;
    Ok(double_raw(eps, sigma1, sigma2).min(1.0))
}

/// Golden-section minimum of `f(exp(t))` for `t` in `[lo, hi]`; returns the
/// minimiser in linear scale.
fn golden_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    while b - a > LOG_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d.exp());
        }
    }
    (0.5 * (a + b)).exp()
}

fn check_open_eps(eps: f64) -> Result<()> {
    check_range("eps", eps, "(0, 1)", eps > 0.0 && eps < 1.0)
}

/// Minimises the single-layer failure probability over `σ ∈ (ε, 1)`.
pub fn optimize_single(eps: f64) -> Result<CascadeResult> {
    check_open_eps(eps)?;
    let sigma = golden_log(|s| single_raw(eps, s), eps.ln(), 0.0);
    Ok(CascadeResult {
        sigma_values: vec![sigma],
        failure_prob: single_raw(eps, sigma).min(1.0),
        analytic_optimum: 2.0 * eps.sqrt(),
    })
}

/// Alternating 1-d minimisation over each threshold, keeping `σ₁σ₂ > ε`.
fn coordinate_descent(eps: f64, mut s1: f64, mut s2: f64) -> (f64, f64) {
    for _ in 0..MAX_SWEEPS {
        let (p1, p2) = (s1, s2);
        s1 = golden_log(|s| double_raw(eps, s, s2), (eps / s2).ln(), 0.0);
        s2 = golden_log(|s| double_raw(eps, s1, s), (eps / s1).ln(), 0.0);
        if ((s1 / p1).ln().abs()).max((s2 / p2).ln().abs()) < 1e-12 {
            break;
        }
    }
    (s1, s2)
}

/// Minimises the two-layer failure probability: a golden-section search on
/// the diagonal `σ₁ = σ₂`, refined by coordinate descent in both thresholds.
pub fn optimize_double(eps: f64) -> Result<CascadeResult> {
    check_open_eps(eps)?;
    let diag = golden_log(|s| double_raw(eps, s, s), 0.5 * eps.ln(), 0.0);
    let (s1, s2) = coordinate_descent(eps, diag, diag);
    Ok(CascadeResult {
        sigma_values: vec![s1, s2],
        failure_prob: double_raw(eps, s1, s2).min(1.0),
        analytic_optimum: 3.0 * eps.cbrt(),
    })
}
