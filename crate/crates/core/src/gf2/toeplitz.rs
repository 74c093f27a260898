use rand::Rng;

use super::BitWord;
use crate::error::{Error, Result};

/// Toeplitz hash `{0,1}^n_in → {0,1}^n_out` with `T[j][i] = seed[j − i + n_in − 1]`.
///
/// Over a uniformly random seed the family is XOR-universal, which is what
/// privacy amplification needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzHash {
    n_in: usize,
    n_out: usize,
    seed: BitWord,
    // row j is the window [n_out-1-j, n_out-1-j+n_in) of the reversed seed
    reversed: BitWord,
}

impl ToeplitzHash {
    pub fn new(n_in: usize, n_out: usize, seed: BitWord) -> Result<Self> {
        if n_in == 0 {
            return Err(Error::InvalidConfig("Toeplitz input length must be positive".into()));
        }
        if n_out > n_in {
            return Err(Error::InvalidConfig(format!("Toeplitz output {n_out} exceeds input {n_in}")));
        }
        let expected = n_in + n_out - 1;
        if seed.len() != expected {
            return Err(Error::LengthMismatch { what: "Toeplitz seed", expected, actual: seed.len() });
        }
        let reversed = seed.reversed();
        Ok(Self { n_in, n_out, seed, reversed })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_in: usize, n_out: usize) -> Result<Self> {
        let len = (n_in + n_out).saturating_sub(1);
        let bits: Vec<bool> = (0..len).map(|_| rng.random()).collect();
        Self::new(n_in, n_out, BitWord::from_bools(&bits))
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn seed(&self) -> &BitWord {
        &self.seed
    }

    pub fn apply(&self, input: &BitWord) -> Result<BitWord> {
        if input.len() != self.n_in {
            return Err(Error::LengthMismatch { what: "hash input", expected: self.n_in, actual: input.len() });
        }
        let mut out = BitWord::zeros(self.n_out);
        for j in 0..self.n_out {
            let start = self.n_out - 1 - j;
            // window bits past n_in meet zero padding in `input`
            let acc = input
                .words()
                .iter()
                .enumerate()
                .fold(0u64, |acc, (w, x)| acc ^ (self.reversed.word_at(start + 64 * w) & x));
            if acc.count_ones() % 2 == 1 {
                out.set(j, true);
            }
        }
        Ok(out)
    }
}
