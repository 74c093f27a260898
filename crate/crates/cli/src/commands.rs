use std::fmt;

use serde_json::{json, Value};

use qkdaudit::breach::{baseline_chain, build_breach_ensemble, guessing_chain, Pac};
use qkdaudit::distance_guessing::{
    guessing_prob, operational_guarantee, skewed_pair, theorem1_gap, variational_distance, CondEnsemble, Distribution,
};
use qkdaudit::entropy_rates::{
    binary_entropy, feasibility_bound, net_key_feasible, threshold_qber, CodeRate, Qber, RateMode, RateReport,
};
use qkdaudit::gf2::{make_code, BitWord, CodeSpec, ToeplitzHash};
use qkdaudit::markov_cascade::{optimize_double, optimize_single};
use qkdaudit::pipeline::{run_protocol, sweep, CodeChoice, ProtocolConfig, SweepGrid};
use qkdaudit::Error;

/// Largest number of rows a `rates` grid may produce.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent flag values.
    Flag(String),
    /// Well-formed input with no meaningful answer.
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Flag(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Flag(m) | CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange { .. } | Error::LengthMismatch { .. } | Error::InvalidConfig(_) => {
                CliError::Flag(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

pub type CmdResult = Result<Value, CliError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateArg {
    Shannon,
    Fixed(CodeRate),
}

pub fn parse_rate(s: &str) -> Result<RateArg, String> {
    if s.trim().eq_ignore_ascii_case("shannon") {
        return Ok(RateArg::Shannon);
    }
    let r: f64 = s.trim().parse().map_err(|_| format!("expected a number in (0, 1] or 'shannon', got '{s}'"))?;
    CodeRate::new(r).map(RateArg::Fixed).map_err(|e| e.to_string())
}

fn rate_label(rate: RateArg) -> Value {
    match rate {
        RateArg::Shannon => json!("shannon"),
        RateArg::Fixed(r) => json!(r.value()),
    }
}

pub fn threshold(rate: RateArg) -> CmdResult {
    let mode = match rate {
        RateArg::Shannon => RateMode::ShannonLimit,
        RateArg::Fixed(r) => RateMode::Fixed(r),
    };
    let t = threshold_qber(mode)?;
    Ok(json!({
        "rate": rate_label(rate),
        "qber_max": t.qber,
        "h_bound": t.h_bound,
        "empty_region": false,
        "unconstrained": t.unconstrained,
    }))
}

pub struct RatesArgs {
    pub sifted_len: u64,
    pub qber_start: f64,
    pub qber_end: f64,
    pub qber_step: f64,
    pub rate: RateArg,
    pub f: f64,
    pub mu: f64,
}

/// QBER grid `start, start+step, ..` up to and including `end`.
pub fn qber_grid(start: f64, end: f64, step: f64) -> Result<Vec<Qber>, CliError> {
    if step.is_nan() || step <= 0.0 {
        return Err(CliError::Flag(format!("--qber-step must be positive, got {step}")));
    }
    if end.is_nan() || end < start {
        return Err(CliError::Flag(format!("--qber-end {end} is below --qber-start {start}")));
    }
    let span = ((end - start) / step + 1e-9).floor();
    if span >= MAX_GRID_POINTS as f64 {
        return Err(CliError::Flag(format!("grid has more than {MAX_GRID_POINTS} points")));
    }
    (0..=span as usize).map(|i| Qber::new(start + i as f64 * step).map_err(CliError::from)).collect()
}

pub fn rates(a: &RatesArgs) -> CmdResult {
    let rows = qber_grid(a.qber_start, a.qber_end, a.qber_step)?
        .into_iter()
        .map(|q| {
            let r = match a.rate {
                RateArg::Shannon => CodeRate::shannon(q)?,
                RateArg::Fixed(r) => r,
            };
            let report = RateReport::compute(a.sifted_len, q, a.f, a.mu, r)?;
            Ok(serde_json::to_value(report).expect("report serializes"))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;
    Ok(Value::Array(rows))
}

pub fn audit_code(n_total: usize, k_info: usize, operating_qber: f64) -> CmdResult {
    if k_info > n_total {
        return Err(CliError::Flag(format!(
            "--k-info {k_info} exceeds --n-total {n_total}; k_info counts information bits, \
             so a code written (m, n) with n information bits is --n-total m --k-info n"
        )));
    }
    let r = CodeRate::from_dims(n_total, k_info)?;
    let q = Qber::new(operating_qber)?;
    let (max_q, empty) = match threshold_qber(RateMode::Fixed(r)) {
        Ok(t) => (t.qber, false),
        Err(Error::EmptyFeasibilityRegion(_)) => (0.0, true),
        Err(e) => return Err(e.into()),
    };
    let feasible = net_key_feasible(q, r);
    Ok(json!({
        "n_total": n_total,
        "k_info": k_info,
        "rate": r.value(),
        "h_bound": feasibility_bound(r),
        "max_feasible_qber": max_q,
        "empty_region": empty,
        "operating_qber": q.value(),
        "h_operating": binary_entropy(q.value())?,
        "verdict": if feasible { "FEASIBLE" } else { "INFEASIBLE" },
    }))
}

pub fn simulate(config: &ProtocolConfig) -> CmdResult {
    let report = run_protocol(config)?;
    Ok(serde_json::to_value(report).expect("report serializes"))
}

pub fn sweep_table(grid: &SweepGrid) -> CmdResult {
    let configs = grid.configs()?;
    let reports = sweep(grid)?;
    let rows = configs
        .iter()
        .zip(&reports)
        .enumerate()
        .map(|(i, (c, r))| {
            json!({
                "index": i,
                "qber": c.qber.value(),
                "code": c.code.to_string(),
                "ecc_mode": c.ecc_mode.to_string(),
                "rng_seed": c.rng_seed,
                "code_rate": r.code_rate,
                "sifted_bits": r.ledger.sifted_bits,
                "pad_bits_spent": r.ledger.pad_bits_spent,
                "key_bits_generated": r.ledger.key_bits_generated,
                "net_bits": r.ledger.net_bits,
                "measured_qber": r.measured_qber,
                "residual_errors": r.residual_errors,
                "keys_match": r.keys_match,
                "feasibility_prediction": r.feasibility_prediction,
            })
        })
        .collect();
    Ok(Value::Array(rows))
}

pub fn parse_code_choice(s: &str) -> Result<CodeChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_code_spec(s: &str) -> Result<CodeSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_bits(s: &str) -> Result<BitWord, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn counterexample(spec: CodeSpec, toeplitz_seed: Option<&BitWord>) -> CmdResult {
    let code = make_code(spec)?;
    let k = code.k_info();
    let pac = match toeplitz_seed {
        None => Pac::Identity,
        Some(seed) => {
            if seed.len() < k || k == 0 {
                return Err(CliError::Flag(format!(
                    "--toeplitz-seed needs at least k_info = {k} bits, got {}",
                    seed.len()
                )));
            }
            Pac::Toeplitz(ToeplitzHash::new(k, seed.len() + 1 - k, seed.clone())?)
        }
    };
    let ensemble = build_breach_ensemble(&code)?;
    let chain = guessing_chain(&ensemble, &pac)?;
    let baseline = baseline_chain(&code, &pac)?;
    Ok(json!({
        "code": spec.to_string(),
        "n_total": code.n_total(),
        "k_info": k,
        "pac": match &pac { Pac::Identity => "identity".to_string(), Pac::Toeplitz(h) => format!("toeplitz:{}", h.seed()) },
        "observation_groups": ensemble.n_groups(),
        "nominal_p1_s": ensemble.nominal_sifted_guessing(),
        "p1_s": chain.p1_s,
        "p1_l": chain.p1_l,
        "p1_k": chain.p1_k,
        "monotone": chain.is_monotone(1e-12),
        "baseline_p1_s": baseline.p1_s,
        "baseline_p1_l": baseline.p1_l,
        "baseline_p1_k": baseline.p1_k,
    }))
}

pub fn markov(epsilon: f64, double: bool) -> CmdResult {
    let res = if double { optimize_double(epsilon)? } else { optimize_single(epsilon)? };
    let mut out = json!({
        "epsilon": epsilon,
        "stages": if double { 2 } else { 1 },
        "sigma": res.sigma_values[0],
    });
    if double {
        out["sigma2"] = json!(res.sigma_values[1]);
    }
    out["failure"] = json!(res.failure_prob);
    out["analytic_sigma"] = json!(if double { epsilon.cbrt() } else { epsilon.sqrt() });
    out["asymptotic_failure"] = json!(res.analytic_optimum);
    Ok(out)
}

pub fn distance(n: usize, epsilon: f64) -> CmdResult {
    let p = skewed_pair(n, epsilon)?;
    let v = variational_distance(&p, &Distribution::uniform(n)?)?;
    let guessing = guessing_prob(&p);
    let gap = theorem1_gap(&CondEnsemble::single(p));
    Ok(json!({
        "n": n,
        "epsilon": epsilon,
        "v": v,
        "guessing": guessing,
        "uniform_guessing": 1.0 / n as f64,
        "theorem1_bound": 1.0 / n as f64 + v,
        "gap": gap,
        "operational_guarantee": operational_guarantee(v, n)?,
    }))
}
