//! Closed-form key-rate accounting.
//!
//! All lengths are in bits. Leaks are reported as reals; only [`key_length`]
//! and the integer fields of [`RateReport`] are rounded.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Default reconciliation efficiency for the heuristic leak.
pub const DEFAULT_F_FACTOR: f64 = 1.1;

/// Privacy amplification keeps one output bit per this many bits of min-entropy.
pub const PA_DIVISOR: f64 = 7.0;

/// Smallest code rate for which any QBER admits a net key.
pub const MIN_FEASIBLE_RATE: f64 = 7.0 / 8.0;

const INVERSE_TOL: f64 = 1e-10;

/// Quantum bit error rate, `0 <= Q < 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Qber(f64);

impl Qber {
    pub fn new(value: f64) -> Result<Self> {
        check_range("qber", value, "[0, 0.5)", (0.0..0.5).contains(&value))?;
        Ok(Self(value))
    }

    pub const ZERO: Qber = Qber(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Qber {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Qber> for f64 {
    fn from(q: Qber) -> f64 {
        q.0
    }
}

/// Rate `k/n` of an error-correcting code, `0 < r <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CodeRate(f64);

impl CodeRate {
    pub fn new(value: f64) -> Result<Self> {
        check_range("code rate", value, "(0, 1]", value > 0.0 && value <= 1.0)?;
        Ok(Self(value))
    }

    /// Rate of an `(n_total, k_info)` block code.
    pub fn from_dims(n_total: usize, k_info: usize) -> Result<Self> {
        if n_total == 0 || k_info == 0 || k_info > n_total {
            return Err(Error::InvalidConfig(format!(
                "code dimensions need 0 < k_info <= n_total, got n_total={n_total}, k_info={k_info}"
            )));
        }
        Self::new(k_info as f64 / n_total as f64)
    }

    /// Capacity of the binary symmetric channel at `q`, the best asymptotic rate.
    pub fn shannon(q: Qber) -> Result<Self> {
        Self::new(1.0 - h2(q.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CodeRate {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<CodeRate> for f64 {
    fn from(r: CodeRate) -> f64 {
        r.0
    }
}

/// Unchecked binary entropy; callers guarantee `p` in `[0, 1]`.
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Binary entropy `h(p)` in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_range("p", p, "[0, 1]", (0.0..=1.0).contains(&p))?;
    Ok(h2(p))
}

/// The unique `p` in `[0, 0.5]` with `h(p) = h_target`, by bisection.
pub fn binary_entropy_inverse(h_target: f64) -> Result<f64> {
    check_range("h_target", h_target, "[0, 1]", (0.0..=1.0).contains(&h_target))?;
    if h_target == 0.0 {
        return Ok(0.0);
    }
    if h_target == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > INVERSE_TOL {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < h_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Heuristic leak `f * |S| * h(Q)`; `f = 1` is the ideal one-way limit.
pub fn leak_ec_heuristic(sifted_len: u64, q: Qber, f: f64) -> Result<f64> {
    check_range("f", f, "[1, inf)", f >= 1.0)?;
    Ok(f * sifted_len as f64 * h2(q.0))
}

/// Pre-shared bits consumed by padding the parity of a capacity-achieving
/// systematic code: `|S| * h(Q) / (1 - h(Q))`.
pub fn leak_ec_padded(sifted_len: u64, q: Qber) -> Result<f64> {
    let h = h2(q.0);
    if h >= 1.0 {
        return Err(Error::DivergentLeak);
    }
    Ok(sifted_len as f64 * h / (1.0 - h))
}

/// Parity bits added to `sifted_len` information bits by a rate-`r` code.
pub fn parity_overhead(sifted_len: u64, r: CodeRate) -> f64 {
    sifted_len as f64 * (1.0 / r.0 - 1.0)
}

/// Collective-attack min-entropy bound `|S| * (1 - h(Q + mu))`.
pub fn min_entropy_bound(sifted_len: u64, q: Qber, mu: f64) -> Result<f64> {
    check_range("mu", mu, "[0, inf)", mu >= 0.0)?;
    let q_eff = q.0 + mu;
    if q_eff >= 0.5 {
        return Err(Error::VacuousBound(q_eff));
    }
    Ok(sifted_len as f64 * (1.0 - h2(q_eff)))
}

/// Near-uniform final key length `floor(H_min / 7)`.
pub fn key_length(sifted_len: u64, q: Qber, mu: f64) -> Result<u64> {
    let h_min = min_entropy_bound(sifted_len, q, mu)?;
    Ok((h_min / PA_DIVISOR).floor() as u64)
}

/// Key length minus the parity bits that must be padded, with the parity
/// count rounded to the nearest bit.
pub fn net_key_bits(sifted_len: u64, q: Qber, r: CodeRate, mu: f64) -> Result<i64> {
    let key = key_length(sifted_len, q, mu)?;
    let parity = parity_overhead(sifted_len, r).round();
    Ok(key as i64 - parity as i64)
}

/// Right-hand side of the feasibility condition, `8 - 7/r`.
pub fn feasibility_bound(r: CodeRate) -> f64 {
    8.0 - 7.0 / r.0
}

/// Whether a net key is possible: `h(Q) < 8 - 7/r`.
pub fn net_key_feasible(q: Qber, r: CodeRate) -> bool {
    h2(q.0) < feasibility_bound(r)
}

/// How the code rate is chosen when looking for the largest feasible QBER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// `r = 1 - h(Q)`, the asymptotic capacity of the channel.
    ShannonLimit,
    Fixed(CodeRate),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Largest QBER still admitting a net key (0.5 when unconstrained).
    pub qber: f64,
    /// Binary-entropy value at the boundary.
    pub h_bound: f64,
    /// Set when the bound does not cut into `[0, 0.5)`.
    pub unconstrained: bool,
}

/// Largest QBER with a net key for the given rate mode.
pub fn threshold_qber(mode: RateMode) -> Result<Threshold> {
    let h_bound = match mode {
        // h = 8 - 7/(1 - h)  <=>  h^2 - 9h + 1 = 0
        RateMode::ShannonLimit => (9.0 - 77.0_f64.sqrt()) / 2.0,
        RateMode::Fixed(r) => {
            if r.0 <= MIN_FEASIBLE_RATE {
                return Err(Error::EmptyFeasibilityRegion(r.0));
            }
            feasibility_bound(r).min(1.0)
        }
    };
    Ok(Threshold { qber: binary_entropy_inverse(h_bound)?, h_bound, unconstrained: h_bound >= 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaExponents {
    /// `(H_min - n) / 2`, exponent of the hash-averaged distance.
    pub lhl_exponent: f64,
    /// `(H_min - n) / 6`, after the cube root needed for an individual guarantee.
    pub operational_exponent: f64,
    /// `operational_exponent >= n`.
    pub near_uniform: bool,
}

pub fn pa_exponents(h_min: f64, n: u64) -> Result<PaExponents> {
    check_range("h_min", h_min, "[0, inf)", h_min >= 0.0)?;
    let slack = h_min - n as f64;
    Ok(PaExponents {
        lhl_exponent: slack / 2.0,
        operational_exponent: slack / 6.0,
        near_uniform: h_min >= PA_DIVISOR * n as f64,
    })
}

/// Every accounting quantity for one `(|S|, Q, f, mu, r)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub sifted_len: u64,
    pub qber: Qber,
    pub f_factor: f64,
    pub mu: f64,
    pub code_rate: CodeRate,
    pub h_q: f64,
    pub leak_heuristic: f64,
    pub leak_padded: f64,
    pub parity_bits: i64,
    pub h_min: f64,
    pub key_len_n: u64,
    pub net_bits: i64,
    pub feasible: bool,
}

impl RateReport {
    pub fn compute(sifted_len: u64, qber: Qber, f_factor: f64, mu: f64, code_rate: CodeRate) -> Result<Self> {
        let h_min = min_entropy_bound(sifted_len, qber, mu)?;
        let key_len_n = key_length(sifted_len, qber, mu)?;
        let parity_bits = parity_overhead(sifted_len, code_rate).round() as i64;
        Ok(Self {
            sifted_len,
            qber,
            f_factor,
            mu,
            code_rate,
            h_q: h2(qber.0),
            leak_heuristic: leak_ec_heuristic(sifted_len, qber, f_factor)?,
            leak_padded: leak_ec_padded(sifted_len, qber)?,
            parity_bits,
            h_min,
            key_len_n,
            net_bits: key_len_n as i64 - parity_bits,
            feasible: net_key_feasible(qber, code_rate),
        })
    }
}
