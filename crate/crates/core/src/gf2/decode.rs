use serde::{Deserialize, Serialize};

use super::{BitWord, LinearCode};
use crate::error::{Error, Result};

/// Largest information length decoded by listing every codeword.
pub const MAX_EXHAUSTIVE_K: usize = 20;
/// Largest block length decoded by searching error patterns by weight.
pub const MAX_COSET_SEARCH_N: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub info: BitWord,
    pub corrected: BitWord,
    pub error_weight: usize,
}

enum Strategy {
    Exhaustive(Vec<BitWord>),
    CosetSearch { columns: Vec<BitWord> },
}

/// Exact minimum-distance decoder. Ties go to the lexicographically smallest
/// codeword.
pub struct NearestDecoder<'a> {
    code: &'a LinearCode,
    strategy: Strategy,
}

impl<'a> NearestDecoder<'a> {
    pub fn new(code: &'a LinearCode) -> Result<Self> {
        let strategy = if code.k_info() <= MAX_EXHAUSTIVE_K {
            Strategy::Exhaustive(code.codewords()?)
        } else if code.n_total() <= MAX_COSET_SEARCH_N {
            let h = code.parity_check();
            Strategy::CosetSearch { columns: (0..code.n_total()).map(|c| h.column(c)).collect() }
        } else {
            return Err(Error::DeskScaleLimit(format!(
                "nearest-codeword decoding needs k_info <= {MAX_EXHAUSTIVE_K} or n_total <= {MAX_COSET_SEARCH_N}, got ({}, {})",
                code.n_total(),
                code.k_info()
            )));
        };
        Ok(Self { code, strategy })
    }

    pub fn code(&self) -> &LinearCode {
        self.code
    }

    pub fn decode(&self, word: &BitWord) -> Result<Decoded> {
        if word.len() != self.code.n_total() {
            return Err(Error::LengthMismatch {
                what: "received word",
                expected: self.code.n_total(),
                actual: word.len(),
            });
        }
        let corrected = match &self.strategy {
            Strategy::Exhaustive(words) => words
                .iter()
                .min_by(|a, b| a.distance_unchecked(word).cmp(&b.distance_unchecked(word)).then_with(|| a.lex_cmp(b)))
                .expect("a code has at least one codeword")
                .clone(),
            Strategy::CosetSearch { columns } => self.coset_search(columns, word)?,
        };
        Ok(Decoded { info: self.code.info_of(&corrected), error_weight: corrected.distance_unchecked(word), corrected })
    }

    fn coset_search(&self, columns: &[BitWord], word: &BitWord) -> Result<BitWord> {
        let n = self.code.n_total();
        let target = self.code.syndrome(word)?;
        for weight in 0..=n {
            let mut best: Option<BitWord> = None;
            for_each_subset(n, weight, |positions| {
                let mut s = BitWord::zeros(target.len());
                positions.iter().for_each(|&p| s.xor_assign_unchecked(&columns[p]));
                if s == target {
                    let mut c = word.clone();
                    positions.iter().for_each(|&p| c.flip(p));
                    if best.as_ref().is_none_or(|b| c.lex_cmp(b).is_lt()) {
                        best = Some(c);
                    }
                }
            });
            if let Some(c) = best {
                return Ok(c);
            }
        }
        unreachable!("the received word itself lies in its own coset")
    }
}

fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One-shot convenience around [`NearestDecoder`].
pub fn decode_nearest(code: &LinearCode, word: &BitWord) -> Result<Decoded> {
    NearestDecoder::new(code)?.decode(word)
}
