use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BitWord;
use crate::error::{Error, Result};

/// Dense GF(2) matrix stored as packed rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<BitWord>,
}

impl Gf2Matrix {
    pub fn from_rows(cols: usize, rows: Vec<BitWord>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch { what: "matrix row", expected: cols, actual: r.len() });
        }
        Ok(Self { cols, rows })
    }

    /// Rows given as `0`/`1` strings.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let rows = rows.iter().map(|r| r.parse()).collect::<Result<Vec<BitWord>>>()?;
        let cols = rows.first().map_or(0, BitWord::len);
        Self::from_rows(cols, rows)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = BitWord::zeros(n);
                r.set(i, true);
                r
            })
            .collect();
        Self { cols: n, rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitWord] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    /// `v · M`: XOR of the rows selected by `v`.
    pub fn left_mul(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.rows.len() {
            return Err(Error::LengthMismatch { what: "vector", expected: self.rows.len(), actual: v.len() });
        }
        let mut out = BitWord::zeros(self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            if v.get(i) {
                out.xor_assign_unchecked(row);
            }
        }
        Ok(out)
    }

    /// `M · vᵀ`, one bit per row.
    pub fn mul_transposed(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch { what: "vector", expected: self.cols, actual: v.len() });
        }
        Ok(BitWord::from_bools(&self.rows.iter().map(|r| r.dot_unchecked(v)).collect::<Vec<_>>()))
    }

    pub fn column(&self, c: usize) -> BitWord {
        BitWord::from_bools(&self.rows.iter().map(|r| r.get(c)).collect::<Vec<_>>())
    }

    pub fn rank(&self) -> usize {
        row_reduce(self.rows.clone(), self.cols).1.len()
    }

    fn permute_columns(&self, order: &[usize]) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| BitWord::from_bools(&order.iter().map(|&c| r.get(c)).collect::<Vec<_>>()))
            .collect();
        Self { cols: self.cols, rows }
    }
}

/// Reduced row echelon form; returns the rows and pivot columns.
fn row_reduce(mut rows: Vec<BitWord>, cols: usize) -> (Vec<BitWord>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign_unchecked(&pivot);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (rows, pivots)
}

/// Binary linear `(n_total, k_info)` code with generator `G` and parity-check `H`.
///
/// Codes built here are systematic: `G = [I | P]`, `H = [Pᵀ | I]`, so a
/// codeword carries its information bits first and its parity bits last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    n_total: usize,
    k_info: usize,
    generator: Gf2Matrix,
    parity_check: Gf2Matrix,
    systematic: bool,
    /// Position `j` of this code holds column `column_order[j]` of the
    /// matrix it was derived from.
    column_order: Vec<usize>,
}

impl LinearCode {
    /// Systematic code from its `k × (n−k)` parity block `P`.
    pub fn from_parity_block(k_info: usize, parity: &[BitWord]) -> Result<Self> {
        if k_info == 0 || parity.len() != k_info {
            return Err(Error::InvalidConfig(format!(
                "parity block needs k_info > 0 rows, got {} rows for k_info={k_info}",
                parity.len()
            )));
        }
        let m = parity[0].len();
        if let Some(p) = parity.iter().find(|p| p.len() != m) {
            return Err(Error::LengthMismatch { what: "parity row", expected: m, actual: p.len() });
        }
        let n = k_info + m;
        let generator_rows = (0..k_info)
            .map(|i| {
                let mut unit = BitWord::zeros(k_info);
                unit.set(i, true);
                unit.concat(&parity[i])
            })
            .collect();
        let check_rows = (0..m)
            .map(|j| {
                let pt = BitWord::from_bools(&parity.iter().map(|row| row.get(j)).collect::<Vec<_>>());
                let mut unit = BitWord::zeros(m);
                unit.set(j, true);
                pt.concat(&unit)
            })
            .collect();
        Ok(Self {
            n_total: n,
            k_info,
            generator: Gf2Matrix::from_rows(n, generator_rows)?,
            parity_check: Gf2Matrix::from_rows(n, check_rows)?,
            systematic: true,
            column_order: (0..n).collect(),
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn k_info(&self) -> usize {
        self.k_info
    }

    pub fn n_parity(&self) -> usize {
        self.n_total - self.k_info
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n_total as f64
    }

    pub fn generator(&self) -> &Gf2Matrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &Gf2Matrix {
        &self.parity_check
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    /// `info · G`.
    pub fn encode(&self, info: &BitWord) -> Result<BitWord> {
        if info.len() != self.k_info {
            return Err(Error::LengthMismatch { what: "information word", expected: self.k_info, actual: info.len() });
        }
        self.generator.left_mul(info)
    }

    /// Trailing `n − k` bits of the systematic codeword for `info`.
    pub fn parity_bits(&self, info: &BitWord) -> Result<BitWord> {
        Ok(self.encode(info)?.slice(self.k_info, self.n_parity()))
    }

    /// `word · Hᵀ`; all-zero exactly on codewords.
    pub fn syndrome(&self, word: &BitWord) -> Result<BitWord> {
        if word.len() != self.n_total {
            return Err(Error::LengthMismatch { what: "received word", expected: self.n_total, actual: word.len() });
        }
        self.parity_check.mul_transposed(word)
    }

    /// Leading `k` bits of a codeword.
    pub fn info_of(&self, codeword: &BitWord) -> BitWord {
        codeword.slice(0, self.k_info)
    }

    /// Every codeword, ordered by information word (`k_info <= 24`).
    pub fn codewords(&self) -> Result<Vec<BitWord>> {
        if self.k_info > 24 {
            return Err(Error::DeskScaleLimit(format!("enumerating 2^{} codewords", self.k_info)));
        }
        (0..1u64 << self.k_info).map(|i| self.encode(&BitWord::from_index(i, self.k_info))).collect()
    }
}

/// Gaussian elimination to `[I | P]`, permuting columns when a row has no
/// pivot in its natural position.
pub fn systematic_form(g: &Gf2Matrix) -> Result<LinearCode> {
    let k = g.n_rows();
    let n = g.n_cols();
    if k == 0 || n == 0 {
        return Err(Error::InvalidConfig("generator must be nonempty".into()));
    }
    let (rows, pivots) = row_reduce(g.rows.clone(), n);
    if pivots.len() < k {
        return Err(Error::RankDeficient { rank: pivots.len(), rows: k });
    }
    let mut order = pivots.clone();
    order.extend((0..n).filter(|c| !pivots.contains(c)));
    let reduced = Gf2Matrix { cols: n, rows }.permute_columns(&order);
    let parity: Vec<BitWord> = reduced.rows.iter().map(|r| r.slice(k, n - k)).collect();
    let mut code = LinearCode::from_parity_block(k, &parity)?;
    code.column_order = order;
    Ok(code)
}

/// Named code constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeSpec {
    Hamming74,
    Repetition(usize),
    Random {
        n: usize,
        k: usize,
        seed: u64,
    },
    /// Rate-one code with no parity.
    Identity(usize),
}

pub fn make_code(spec: CodeSpec) -> Result<LinearCode> {
    match spec {
        CodeSpec::Hamming74 => {
            let p = ["110", "101", "011", "111"].map(|s| s.parse::<BitWord>().expect("literal"));
            LinearCode::from_parity_block(4, &p)
        }
        CodeSpec::Repetition(n) => {
            if n == 0 {
                return Err(Error::InvalidConfig("repetition length must be positive".into()));
            }
            let mut ones = BitWord::zeros(n - 1);
            (0..n - 1).for_each(|i| ones.set(i, true));
            LinearCode::from_parity_block(1, &[ones])
        }
        CodeSpec::Random { n, k, seed } => {
            if k == 0 || k > n {
                return Err(Error::InvalidConfig(format!("random code needs 0 < k <= n, got n={n}, k={k}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let parity: Vec<BitWord> = (0..k)
                .map(|_| BitWord::from_bools(&(0..n - k).map(|_| rng.random::<bool>()).collect::<Vec<_>>()))
                .collect();
            LinearCode::from_parity_block(k, &parity)
        }
        CodeSpec::Identity(n) => {
            if n == 0 {
                return Err(Error::InvalidConfig("identity length must be positive".into()));
            }
            LinearCode::from_parity_block(n, &vec![BitWord::zeros(0); n])
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Hamming74 => f.write_str("hamming74"),
            CodeSpec::Repetition(n) => write!(f, "repetition{n}"),
            CodeSpec::Random { n, k, seed } => write!(f, "random({n},{k},{seed})"),
            CodeSpec::Identity(n) => write!(f, "identity{n}"),
        }
    }
}

fn parse_args(s: &str) -> Option<Vec<u64>> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn parse_len(rest: &str) -> Option<usize> {
    match parse_args(rest) {
        Some(v) if v.len() == 1 => Some(v[0] as usize),
        _ => rest.parse().ok(),
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    /// Accepts `hamming74`, `repetitionN`, `repetition(N)`, `identityN`,
    /// `identity(N)` and `random(N,K,SEED)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::InvalidConfig(format!("unknown code '{s}'"));
        if s == "hamming74" || s == "hamming(7,4)" {
            return Ok(CodeSpec::Hamming74);
        }
        if let Some(rest) = s.strip_prefix("repetition") {
            return parse_len(rest).map(CodeSpec::Repetition).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix("identity") {
            return parse_len(rest).map(CodeSpec::Identity).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix("random") {
            return match parse_args(rest).as_deref() {
                Some(&[n, k, seed]) => Ok(CodeSpec::Random { n: n as usize, k: k as usize, seed }),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }
}
