//! Code-aligned observations that expose the error-corrected key.
//!
//! The sifted key `S` is uniform over `{0,1}^n`. A public `(n, k)` code splits
//! that space into `2^k` decoding regions and the corrected key `L` is the
//! information word of the region `S` falls in. If the adversary's
//! observation tells her only which region she is in, `S` stays hard to guess
//! (`2^{k−n}`) but `L`, and every hash of it, is known with certainty.
//!
//! Guessing probabilities are computed by exhaustive enumeration of the joint
//! distribution of `(S, Y)`, so `n_total` is capped at [`MAX_ENUM_BITS`].

use serde::{Deserialize, Serialize};

use crate::distance_guessing::{CondEnsemble, Distribution};
use crate::error::{Error, Result};
use crate::gf2::{BitWord, LinearCode, NearestDecoder, ToeplitzHash};

pub const MAX_ENUM_BITS: usize = 20;

/// Average guessing probabilities of `S`, `L` and `K` given the observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessingChain {
    pub p1_s: f64,
    pub p1_l: f64,
    pub p1_k: f64,
}

impl GuessingChain {
    /// `p1_s <= p1_l <= p1_k` within `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.p1_s <= self.p1_l + tol && self.p1_l <= self.p1_k + tol
    }
}

/// Privacy amplification applied to `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pac {
    Identity,
    Toeplitz(ToeplitzHash),
}

impl Pac {
    fn output_len(&self, input_len: usize) -> Result<usize> {
        match self {
            Pac::Identity => Ok(input_len),
            Pac::Toeplitz(h) if h.n_in() == input_len => Ok(h.n_out()),
            Pac::Toeplitz(h) => Err(Error::LengthMismatch {
                what: "privacy amplification input",
                expected: input_len,
                actual: h.n_in(),
            }),
        }
    }

    fn apply(&self, l: &BitWord) -> Result<BitWord> {
        match self {
            Pac::Identity => Ok(l.clone()),
            Pac::Toeplitz(h) => h.apply(l),
        }
    }
}

fn check_enumerable(code: &LinearCode) -> Result<()> {
    if code.n_total() > MAX_ENUM_BITS {
        return Err(Error::DeskScaleLimit(format!(
            "exhaustive enumeration needs n_total <= {MAX_ENUM_BITS}, got {}",
            code.n_total()
        )));
    }
    Ok(())
}

/// `L` and `K` as functions of every value of `S`.
struct KeyMaps {
    l_of_s: Vec<usize>,
    k_of_s: Vec<usize>,
    n_l: usize,
    n_k: usize,
}

impl KeyMaps {
    fn build(code: &LinearCode, pac: &Pac) -> Result<Self> {
        check_enumerable(code)?;
        let n = code.n_total();
        let k_out = pac.output_len(code.k_info())?;
        let decoder = NearestDecoder::new(code)?;
        let mut l_of_s = Vec::with_capacity(1 << n);
        let mut k_of_s = Vec::with_capacity(1 << n);
        // L and K depend on S only through the decoded info word
        let mut k_of_l = vec![None; 1 << code.k_info()];
        for s in 0..1u64 << n {
            let l = decoder.decode(&BitWord::from_index(s, n))?.info.to_index() as usize;
            let k = match k_of_l[l] {
                Some(k) => k,
                None => {
                    let k = pac.apply(&BitWord::from_index(l as u64, code.k_info()))?.to_index() as usize;
                    k_of_l[l] = Some(k);
                    k
                }
            };
            l_of_s.push(l);
            k_of_s.push(k);
        }
        Ok(Self { l_of_s, k_of_s, n_l: 1 << code.k_info(), n_k: 1 << k_out })
    }

    /// Chain for a joint weight `p(s, y)` over `n_obs` observations.
    fn chain<F: Fn(usize, usize) -> f64>(&self, n_obs: usize, joint: F) -> GuessingChain {
        let mut chain = GuessingChain { p1_s: 0.0, p1_l: 0.0, p1_k: 0.0 };
        let mut by_l = vec![0.0; self.n_l];
        let mut by_k = vec![0.0; self.n_k];
        for y in 0..n_obs {
            by_l.fill(0.0);
            by_k.fill(0.0);
            let mut best_s = 0.0_f64;
            for s in 0..self.l_of_s.len() {
                let p = joint(s, y);
                best_s = best_s.max(p);
                by_l[self.l_of_s[s]] += p;
                by_k[self.k_of_s[s]] += p;
            }
            chain.p1_s += best_s;
            chain.p1_l += by_l.iter().copied().fold(0.0, f64::max);
            chain.p1_k += by_k.iter().copied().fold(0.0, f64::max);
        }
        chain
    }
}

/// Uniform `S` with the adversary observing its decoding region.
#[derive(Debug, Clone, PartialEq)]
pub struct BreachEnsemble {
    code: LinearCode,
    /// Region index (= decoded information word as an integer) for each `S`.
    observation: Vec<usize>,
    group_sizes: Vec<usize>,
}

pub fn build_breach_ensemble(code: &LinearCode) -> Result<BreachEnsemble> {
    check_enumerable(code)?;
    let maps = KeyMaps::build(code, &Pac::Identity)?;
    let mut group_sizes = vec![0; maps.n_l];
    maps.l_of_s.iter().for_each(|&g| group_sizes[g] += 1);
    Ok(BreachEnsemble { code: code.clone(), observation: maps.l_of_s, group_sizes })
}

impl BreachEnsemble {
    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn n_groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    /// Region of each sifted value, indexed by `S` read most-significant first.
    pub fn observation(&self) -> &[usize] {
        &self.observation
    }

    /// Members of region `g`.
    pub fn group(&self, g: usize) -> Vec<BitWord> {
        let n = self.code.n_total();
        self.observation
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == g)
            .map(|(s, _)| BitWord::from_index(s as u64, n))
            .collect()
    }

    /// Information word labelling region `g`.
    pub fn label(&self, g: usize) -> BitWord {
        BitWord::from_index(g as u64, self.code.k_info())
    }

    /// `2^{−k}`, the scale quoted for the sifted key of an `(n, k)` construction.
    pub fn nominal_sifted_guessing(&self) -> f64 {
        (-(self.code.k_info() as f64)).exp2()
    }

    /// The `L`-given-`Y` ensemble: each region pins `L` to its label.
    pub fn l_ensemble(&self) -> Result<CondEnsemble> {
        let total = self.observation.len() as f64;
        let marginal = Distribution::new(self.group_sizes.iter().map(|&c| c as f64 / total).collect())?;
        let conditionals =
            (0..self.n_groups()).map(|g| Distribution::point_mass(self.n_groups(), g)).collect::<Result<Vec<_>>>()?;
        CondEnsemble::new(marginal, conditionals)
    }
}

/// Guessing chain when the adversary sees the decoding region of `S`.
pub fn guessing_chain(e: &BreachEnsemble, pac: &Pac) -> Result<GuessingChain> {
    let maps = KeyMaps::build(&e.code, pac)?;
    let p_s = 1.0 / e.observation.len() as f64;
    Ok(maps.chain(e.n_groups(), |s, y| if e.observation[s] == y { p_s } else { 0.0 }))
}

/// Control case: the observation is independent of `S`.
pub fn baseline_chain(code: &LinearCode, pac: &Pac) -> Result<GuessingChain> {
    let maps = KeyMaps::build(code, pac)?;
    let p_s = 1.0 / maps.l_of_s.len() as f64;
    Ok(maps.chain(1, |_, _| p_s))
}

/// Guessing chain for uniform `S` seen through an arbitrary channel;
/// `channel[s]` is the observation distribution given `S = s`.
pub fn chain_for_channel(code: &LinearCode, pac: &Pac, channel: &[Distribution]) -> Result<GuessingChain> {
    let maps = KeyMaps::build(code, pac)?;
    if channel.len() != maps.l_of_s.len() {
        return Err(Error::LengthMismatch { what: "channel rows", expected: maps.l_of_s.len(), actual: channel.len() });
    }
    let n_obs = channel[0].len();
    if let Some(row) = channel.iter().find(|r| r.len() != n_obs) {
        return Err(Error::LengthMismatch { what: "observation alphabet", expected: n_obs, actual: row.len() });
    }
    let p_s = 1.0 / channel.len() as f64;
    Ok(maps.chain(n_obs, |s, y| p_s * channel[s].probs()[y]))
}
