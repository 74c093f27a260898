//! Seeded end-to-end BB84 run under a collective-attack channel.
//!
//! The run goes sifting → QBER check → block error correction → Toeplitz
//! privacy amplification, and records every secret bit produced or consumed
//! in a [`KeyLedger`]. The adversary is never simulated explicitly: the final
//! key length comes from the min-entropy bound `|S'|·(1 − h(Q + μ))` at the
//! measured QBER, kept at one seventh for near-uniformity.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy_rates::{h2, key_length, net_key_feasible, CodeRate, Qber};
use crate::error::{check_range, Error, Result};
use crate::gf2::{make_code, BitWord, CodeSpec, LinearCode, NearestDecoder, ToeplitzHash};

pub const DEFAULT_CHECK_FRACTION: f64 = 0.25;
pub const MIN_RAW_LEN: usize = 64;

const SYNDROME_WARNING: &str = "syndrome mode sends parity in the clear and charges nothing for it; \
the adversary's knowledge of the code is not accounted for and the key may be fully exposed";

/// Error-correcting code used for reconciliation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CodeChoice {
    Linear(CodeSpec),
    /// Synthetic capacity-achieving code; see [`ideal_code_oracle`].
    IdealOracle,
}

impl fmt::Display for CodeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeChoice::Linear(spec) => spec.fmt(f),
            CodeChoice::IdealOracle => f.write_str("ideal"),
        }
    }
}

impl FromStr for CodeChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("ideal") {
            Ok(CodeChoice::IdealOracle)
        } else {
            s.parse().map(CodeChoice::Linear)
        }
    }
}

impl From<CodeChoice> for String {
    fn from(c: CodeChoice) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for CodeChoice {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EccMode {
    /// Parity bits are one-time padded with pre-shared secret bits.
    PaddedParity,
    /// Syndromes are sent in the clear. Insecure; kept to expose the breach.
    Syndrome,
}

impl fmt::Display for EccMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EccMode::PaddedParity => "padded-parity",
            EccMode::Syndrome => "syndrome",
        })
    }
}

impl FromStr for EccMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "padded" | "padded-parity" => Ok(EccMode::PaddedParity),
            "syndrome" => Ok(EccMode::Syndrome),
            other => Err(Error::InvalidConfig(format!("unknown ecc mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackModel {
    /// Identical independent probing: a memoryless binary symmetric channel.
    Collective,
    /// Correlated probing across signals. No key rate is known, so runs refuse it.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub raw_len: usize,
    /// Flip probability on sifted bits.
    pub qber: Qber,
    pub check_fraction: f64,
    pub code: CodeChoice,
    pub ecc_mode: EccMode,
    pub mu: f64,
    pub rng_seed: u64,
    pub attack: AttackModel,
}

impl ProtocolConfig {
    pub fn new(raw_len: usize, qber: Qber, code: CodeChoice) -> Self {
        Self {
            raw_len,
            qber,
            check_fraction: DEFAULT_CHECK_FRACTION,
            code,
            ecc_mode: EccMode::PaddedParity,
            mu: 0.0,
            rng_seed: 0,
            attack: AttackModel::Collective,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: EccMode) -> Self {
        self.ecc_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.attack == AttackModel::Joint {
            return Err(Error::Unsupported("joint attacks have no quantified key rate; refusing to simulate".into()));
        }
        if self.raw_len < MIN_RAW_LEN {
            return Err(Error::InvalidConfig(format!("raw_len must be at least {MIN_RAW_LEN}, got {}", self.raw_len)));
        }
        check_range(
            "check_fraction",
            self.check_fraction,
            "(0, 1)",
            self.check_fraction > 0.0 && self.check_fraction < 1.0,
        )?;
        check_range("mu", self.mu, "[0, inf)", self.mu >= 0.0)
    }
}

/// Secret bits produced and consumed in one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyLedger {
    /// Bits surviving basis matching.
    pub sifted_bits: u64,
    /// Sifted bits disclosed to estimate the QBER.
    pub check_bits_sacrificed: u64,
    /// Remainder shorter than one code block, dropped.
    pub discarded_bits: u64,
    /// `|S'|`, the bits that go through error correction.
    pub reconciled_bits: u64,
    /// Pre-shared secret bits used to pad parity.
    pub pad_bits_spent: u64,
    /// `|K| = floor(H_min / 7)`.
    pub key_bits_generated: u64,
    /// `key_bits_generated − pad_bits_spent`.
    pub net_bits: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub config: ProtocolConfig,
    pub code_rate: f64,
    /// Set when the reconciliation code is the synthetic oracle.
    pub synthetic_code: bool,
    pub ledger: KeyLedger,
    pub check_errors: u64,
    pub measured_qber: f64,
    /// Bits where B's corrected key still differs from A's.
    pub residual_errors: u64,
    pub correction_ok: bool,
    pub keys_match: bool,
    /// Feasibility condition at the measured QBER and the code's rate.
    pub feasibility_prediction: bool,
    pub mode_warning: Option<String>,
}

/// Stand-in for a code at the Shannon limit of the channel. Its decoder
/// always succeeds; it exists only inside the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealCode {
    pub rate: f64,
    pub s_len: u64,
    /// `ceil(s_len · h(q) / (1 − h(q)))`.
    pub parity_bits: u64,
    pub synthetic: bool,
}

pub fn ideal_code_oracle(q: Qber, s_len: u64) -> Result<IdealCode> {
    let h = h2(q.value());
    if h >= 1.0 {
        return Err(Error::DivergentLeak);
    }
    Ok(IdealCode { rate: 1.0 - h, s_len, parity_bits: (s_len as f64 * h / (1.0 - h)).ceil() as u64, synthetic: true })
}

struct Reconciled {
    alice: BitWord,
    bob: BitWord,
    pad_bits: u64,
    discarded: u64,
    blocks_ok: bool,
    rate: f64,
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> BitWord {
    BitWord::from_bools(&(0..len).map(|_| rng.random()).collect::<Vec<bool>>())
}

fn reconcile_linear(
    code: &LinearCode,
    mode: EccMode,
    a: &[bool],
    b: &[bool],
    rng: &mut ChaCha8Rng,
) -> Result<Reconciled> {
    let decoder = NearestDecoder::new(code)?;
    let (n, k) = (code.n_total(), code.k_info());
    let block = match mode {
        EccMode::PaddedParity => k,
        EccMode::Syndrome => n,
    };
    let blocks = a.len() / block;
    if blocks == 0 {
        return Err(Error::InvalidConfig(format!(
            "{} key bits left after checking, fewer than one code block of {block}",
            a.len()
        )));
    }
    let used = blocks * block;
    let mut bob_corrected = Vec::with_capacity(used);
    let mut blocks_ok = true;
    let mut pad_bits = 0;
    for (ab, bb) in a[..used].chunks(block).zip(b[..used].chunks(block)) {
        let (aw, bw) = (BitWord::from_bools(ab), BitWord::from_bools(bb));
        let fixed = match mode {
            EccMode::PaddedParity => {
                let parity = code.parity_bits(&aw)?;
                let pad = random_word(rng, parity.len());
                let sent = parity.xor(&pad)?;
                pad_bits += pad.len() as u64;
                let received = sent.xor(&pad)?;
                decoder.decode(&bw.concat(&received))?.info
            }
            EccMode::Syndrome => {
                let diff = code.syndrome(&aw)?.xor(&code.syndrome(&bw)?)?;
                // any word with syndrome `diff`; its nearest codeword gives the coset leader
                let z = BitWord::zeros(k).concat(&diff);
                let err = z.xor(&decoder.decode(&z)?.corrected)?;
                bw.xor(&err)?
            }
        };
        blocks_ok &= fixed == aw;
        bob_corrected.extend(fixed.iter());
    }
    Ok(Reconciled {
        alice: BitWord::from_bools(&a[..used]),
        bob: BitWord::from_bools(&bob_corrected),
        pad_bits,
        discarded: (a.len() - used) as u64,
        blocks_ok,
        rate: code.rate(),
    })
}

fn reconcile_ideal(q: Qber, mode: EccMode, a: &[bool]) -> Result<Reconciled> {
    if a.is_empty() {
        return Err(Error::InvalidConfig("no key bits left after checking".into()));
    }
    let oracle = ideal_code_oracle(q, a.len() as u64)?;
    let alice = BitWord::from_bools(a);
    Ok(Reconciled {
        bob: alice.clone(),
        alice,
        pad_bits: match mode {
            EccMode::PaddedParity => oracle.parity_bits,
            EccMode::Syndrome => 0,
        },
        discarded: 0,
        blocks_ok: true,
        rate: oracle.rate,
    })
}

/// One deterministic protocol run.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    // sifting over a binary symmetric channel
    let mut alice = Vec::with_capacity(config.raw_len / 2 + 64);
    let mut bob = Vec::with_capacity(config.raw_len / 2 + 64);
    for _ in 0..config.raw_len {
        let bit: bool = rng.random();
        let (basis_a, basis_b): (bool, bool) = (rng.random(), rng.random());
        if basis_a == basis_b {
            alice.push(bit);
            bob.push(bit ^ rng.random_bool(config.qber.value()));
        }
    }
    let sifted = alice.len();

    if sifted < 2 {
        return Err(Error::InvalidConfig(format!("only {sifted} bits survived sifting")));
    }
    let n_check = ((sifted as f64 * config.check_fraction).round() as usize).clamp(1, sifted - 1);
    let mut is_check = vec![false; sifted];
    sample(&mut rng, sifted, n_check).into_iter().for_each(|i| is_check[i] = true);
    let check_errors = (0..sifted).filter(|&i| is_check[i] && alice[i] != bob[i]).count() as u64;
    let measured_qber = check_errors as f64 / n_check as f64;
    let (a_key, b_key): (Vec<bool>, Vec<bool>) =
        (0..sifted).filter(|&i| !is_check[i]).map(|i| (alice[i], bob[i])).unzip();

    let rec = match config.code {
        CodeChoice::Linear(spec) => reconcile_linear(&make_code(spec)?, config.ecc_mode, &a_key, &b_key, &mut rng)?,
        CodeChoice::IdealOracle => reconcile_ideal(config.qber, config.ecc_mode, &a_key)?,
    };

    let measured = Qber::new(measured_qber).map_err(|_| Error::VacuousBound(measured_qber + config.mu))?;
    let reconciled = rec.alice.len() as u64;
    let n_out = key_length(reconciled, measured, config.mu)?;
    let hash = ToeplitzHash::random(&mut rng, rec.alice.len(), n_out as usize)?;
    let keys_match = hash.apply(&rec.alice)? == hash.apply(&rec.bob)?;

    let ledger = KeyLedger {
        sifted_bits: sifted as u64,
        check_bits_sacrificed: n_check as u64,
        discarded_bits: rec.discarded,
        reconciled_bits: reconciled,
        pad_bits_spent: rec.pad_bits,
        key_bits_generated: n_out,
        net_bits: n_out as i64 - rec.pad_bits as i64,
    };
    Ok(ProtocolReport {
        config: config.clone(),
        code_rate: rec.rate,
        synthetic_code: config.code == CodeChoice::IdealOracle,
        ledger,
        check_errors,
        measured_qber,
        residual_errors: rec.alice.distance_unchecked(&rec.bob) as u64,
        correction_ok: rec.blocks_ok,
        keys_match,
        feasibility_prediction: net_key_feasible(measured, CodeRate::new(rec.rate)?),
        mode_warning: (config.ecc_mode == EccMode::Syndrome).then(|| SYNDROME_WARNING.to_string()),
    })
}

/// Cartesian grid of runs sharing every other setting with `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub base: ProtocolConfig,
    pub qbers: Vec<Qber>,
    pub codes: Vec<CodeChoice>,
    pub modes: Vec<EccMode>,
}

impl SweepGrid {
    /// Configurations in grid order (QBER outermost, mode innermost), each
    /// seeded from the base seed and its grid index.
    pub fn configs(&self) -> Result<Vec<ProtocolConfig>> {
        if self.qbers.is_empty() || self.codes.is_empty() || self.modes.is_empty() {
            return Err(Error::InvalidConfig("sweep grid must be nonempty in every axis".into()));
        }
        let mut out = Vec::with_capacity(self.qbers.len() * self.codes.len() * self.modes.len());
        for &qber in &self.qbers {
            for &code in &self.codes {
                for &ecc_mode in &self.modes {
                    let index = out.len() as u64;
                    out.push(ProtocolConfig {
                        qber,
                        code,
                        ecc_mode,
                        rng_seed: derive_seed(self.base.rng_seed, index),
                        ..self.base.clone()
                    });
                }
            }
        }
        Ok(out)
    }
}

/// SplitMix64 finaliser over `(base, index)`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every grid point in parallel; output keeps grid order.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<ProtocolReport>> {
    grid.configs()?.par_iter().map(run_protocol).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy_rates::binary_entropy;

    fn q(v: f64) -> Qber {
        Qber::new(v).unwrap()
    }

    fn hamming() -> CodeChoice {
        CodeChoice::Linear(CodeSpec::Hamming74)
    }

    #[test]
    fn noiseless_hamming_run() {
        let cfg = ProtocolConfig::new(4096, Qber::ZERO, hamming()).with_seed(1);
        let rep = run_protocol(&cfg).unwrap();
        let l = &rep.ledger;
        assert_eq!(rep.measured_qber, 0.0);
        assert!(rep.correction_ok && rep.keys_match);
        assert_eq!(l.reconciled_bits % 4, 0);
        assert_eq!(l.key_bits_generated, l.reconciled_bits / 7);
        assert_eq!(l.pad_bits_spent, l.reconciled_bits * 3 / 4);
        assert!(l.net_bits < 0);
        assert_eq!(l.sifted_bits, l.check_bits_sacrificed + l.discarded_bits + l.reconciled_bits);
        assert!(rep.mode_warning.is_none());
    }

    #[test]
    fn noisy_hamming_is_never_net_positive() {
        for seed in 0..5 {
            let rep = run_protocol(&ProtocolConfig::new(4096, q(0.01), hamming()).with_seed(7 + seed)).unwrap();
            assert!(rep.ledger.net_bits < 0);
            assert!(!rep.feasibility_prediction);
        }
    }

    #[test]
    fn ideal_code_at_one_percent_is_net_positive() {
        let cfg = ProtocolConfig::new(4096, q(0.01), CodeChoice::IdealOracle).with_seed(3);
        let rep = run_protocol(&cfg).unwrap();
        assert!(rep.synthetic_code && rep.correction_ok && rep.keys_match);
        assert!(rep.ledger.net_bits > 0, "{:?}", rep.ledger);
    }

    #[test]
    fn ideal_oracle_examples() {
        let o = ideal_code_oracle(q(0.05), 1000).unwrap();
        assert!((o.rate - 0.713_603).abs() < 1e-6);
        assert!(o.synthetic);
        let z = ideal_code_oracle(Qber::ZERO, 1000).unwrap();
        assert_eq!((z.rate, z.parity_bits), (1.0, 0));
        let t = ideal_code_oracle(q(0.015), 1000).unwrap();
        assert!((t.rate - (1.0 - binary_entropy(0.015).unwrap())).abs() < 1e-15);
        assert!(t.rate > 0.887 && t.rate < 0.888);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = ProtocolConfig::new(2048, q(0.03), hamming()).with_seed(99);
        assert_eq!(run_protocol(&cfg).unwrap(), run_protocol(&cfg).unwrap());
        let other = run_protocol(&cfg.clone().with_seed(100)).unwrap();
        assert_ne!(run_protocol(&cfg).unwrap(), other);
    }

    #[test]
    fn ledger_conserves_bits() {
        for mode in [EccMode::PaddedParity, EccMode::Syndrome] {
            for code in [hamming(), CodeChoice::Linear(CodeSpec::Repetition(3)), CodeChoice::IdealOracle] {
                let rep = run_protocol(&ProtocolConfig::new(3000, q(0.02), code).with_mode(mode).with_seed(5)).unwrap();
                let l = &rep.ledger;
                assert_eq!(l.net_bits + l.pad_bits_spent as i64, l.key_bits_generated as i64);
                if mode == EccMode::Syndrome {
                    assert_eq!(l.pad_bits_spent, 0);
                    assert!(rep.mode_warning.is_some());
                } else {
                    assert!(rep.mode_warning.is_none());
                }
            }
        }
    }

    #[test]
    fn padded_ledger_charges_every_parity_bit() {
        let rep =
            run_protocol(&ProtocolConfig::new(4096, q(0.02), CodeChoice::Linear(CodeSpec::Repetition(3))).with_seed(2))
                .unwrap();
        assert_eq!(rep.ledger.pad_bits_spent, rep.ledger.reconciled_bits * 2);
    }

    #[test]
    fn syndrome_mode_corrects_single_errors() {
        let cfg = ProtocolConfig::new(4096, q(0.01), hamming()).with_mode(EccMode::Syndrome).with_seed(11);
        let rep = run_protocol(&cfg).unwrap();
        assert_eq!(rep.ledger.reconciled_bits % 7, 0);
        // residual errors come only from blocks with two or more flips
        assert!(rep.residual_errors <= rep.ledger.reconciled_bits / 20);
    }

    #[test]
    fn measured_qber_tracks_channel() {
        let mean: f64 = (0..20)
            .map(|s| {
                run_protocol(&ProtocolConfig::new(1 << 16, q(0.05), CodeChoice::IdealOracle).with_seed(s))
                    .unwrap()
                    .measured_qber
            })
            .sum::<f64>()
            / 20.0;
        assert!((mean - 0.05).abs() < 0.005);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ProtocolConfig::new(4096, q(0.01), hamming());
        cfg.attack = AttackModel::Joint;
        assert!(matches!(run_protocol(&cfg), Err(Error::Unsupported(_))));
        let mut cfg = ProtocolConfig::new(32, q(0.01), hamming());
        assert!(run_protocol(&cfg).is_err());
        cfg.raw_len = 4096;
        cfg.check_fraction = 1.0;
        assert!(run_protocol(&cfg).is_err());
        let cfg = ProtocolConfig::new(64, q(0.01), CodeChoice::Linear(CodeSpec::Repetition(60)));
        assert!(run_protocol(&cfg.with_mode(EccMode::Syndrome).with_seed(1)).is_err());
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let grid = SweepGrid {
            base: ProtocolConfig::new(1024, Qber::ZERO, hamming()).with_seed(42),
            qbers: vec![q(0.0), q(0.01), q(0.02)],
            codes: vec![hamming(), CodeChoice::IdealOracle],
            modes: vec![EccMode::PaddedParity],
        };
        let a = sweep(&grid).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a, sweep(&grid).unwrap());
        assert_eq!(a[3].config.qber, q(0.01));
        assert_eq!(a[3].config.code, CodeChoice::IdealOracle);
        let seeds: std::collections::HashSet<u64> = a.iter().map(|r| r.config.rng_seed).collect();
        assert_eq!(seeds.len(), 6);
        let empty = SweepGrid { qbers: vec![], ..grid };
        assert!(sweep(&empty).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ProtocolConfig::new(4096, q(0.01), CodeChoice::Linear(CodeSpec::Random { n: 8, k: 4, seed: 3 }))
            .with_mode(EccMode::Syndrome);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ProtocolConfig>(&json).unwrap(), cfg);
        assert!(json.contains("\"random(8,4,3)\""));
    }
}
