use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Fixed-length bit string, packed little-endian into `u64` words.
///
/// Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    len: usize,
    words: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut w = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                w.words[i / 64] |= 1 << (i % 64);
            }
        }
        w
    }

    /// Bits given as `0`/`1` bytes.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if let Some(&bad) = bits.iter().find(|b| **b > 1) {
            return Err(Error::InvalidConfig(format!("bit value {bad} is not 0 or 1")));
        }
        Ok(Self::from_bools(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>()))
    }

    /// Word whose bits spell `value` most-significant first, so numeric order
    /// of `value` equals lexicographic order of the words.
    pub fn from_index(value: u64, len: usize) -> Self {
        assert!(len <= 64, "index words are limited to 64 bits");
        let mut w = Self::zeros(len);
        for i in 0..len {
            if (value >> (len - 1 - i)) & 1 == 1 {
                w.set(i, true);
            }
        }
        w
    }

    /// Inverse of [`BitWord::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "index words are limited to 64 bits");
        (0..self.len).fold(0, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn check_len(&self, other: &Self, what: &'static str) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { what, expected: self.len, actual: other.len });
        }
        Ok(())
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.check_len(other, "xor operand")?;
        let mut out = self.clone();
        out.xor_assign_unchecked(other);
        Ok(out)
    }

    pub(crate) fn xor_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        self.check_len(other, "hamming distance operand")?;
        Ok(self.distance_unchecked(other))
    }

    pub(crate) fn distance_unchecked(&self, other: &Self) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool> {
        self.check_len(other, "inner product operand")?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &Self) -> bool {
        let acc = self.words.iter().zip(&other.words).fold(0u64, |acc, (a, b)| acc ^ (a & b));
        acc.count_ones() % 2 == 1
    }

    /// Lexicographic order on equal-length words, first bit most significant.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let first = diff.trailing_zeros();
                return if (a >> first) & 1 == 0 { Ordering::Less } else { Ordering::Greater };
            }
        }
        self.len.cmp(&other.len)
    }

    /// Bits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = Self::zeros(len);
        for (w, chunk) in out.words.iter_mut().enumerate() {
            *chunk = self.word_at(start + 64 * w);
        }
        out.clear_tail();
        out
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for i in 0..other.len {
            if other.get(i) {
                out.set(self.len + i, true);
            }
        }
        out
    }

    /// 64 bits starting at `offset`; positions past the end read as zero.
    pub(crate) fn word_at(&self, offset: usize) -> u64 {
        let (q, r) = (offset / 64, offset % 64);
        let lo = self.words.get(q).copied().unwrap_or(0);
        if r == 0 {
            lo
        } else {
            let hi = self.words.get(q + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        }
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    /// Reversed bit order.
    pub fn reversed(&self) -> Self {
        let mut out = Self::zeros(self.len);
        for i in 0..self.len {
            if self.get(i) {
                out.set(self.len - 1 - i, true);
            }
        }
        out
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidConfig(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }
}

impl Serialize for BitWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn basic_ops() {
        let a = w("1011");
        assert_eq!(a.len(), 4);
        assert_eq!(a.weight(), 3);
        assert_eq!(a.to_string(), "1011");
        assert_eq!(a.xor(&w("0110")).unwrap(), w("1101"));
        assert!(!a.dot(&w("1001")).unwrap());
        assert!(a.dot(&w("1000")).unwrap());
        assert_eq!(a.hamming_distance(&w("0000")).unwrap(), 3);
        assert!(a.xor(&w("101")).is_err());
        assert!("10a1".parse::<BitWord>().is_err());
        assert!(BitWord::from_bits(&[0, 2]).is_err());
        assert_eq!(BitWord::from_bits(&[1, 0, 1]).unwrap(), w("101"));
    }

    #[test]
    fn index_round_trip_is_msb_first() {
        assert_eq!(BitWord::from_index(0b1011, 4), w("1011"));
        assert_eq!(BitWord::from_index(1, 3), w("001"));
        assert_eq!(w("110").to_index(), 6);
    }

    #[test]
    fn lex_order() {
        assert_eq!(w("0111").lex_cmp(&w("1000")), Ordering::Less);
        assert_eq!(w("1010").lex_cmp(&w("1001")), Ordering::Greater);
        assert_eq!(w("1010").lex_cmp(&w("1010")), Ordering::Equal);
    }

    #[test]
    fn slice_and_concat_across_word_boundaries() {
        let bits: Vec<bool> = (0..200).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
        let word = BitWord::from_bools(&bits);
        let s = word.slice(61, 90);
        assert_eq!(s.to_bools(), bits[61..151].to_vec());
        let joined = word.slice(0, 70).concat(&word.slice(70, 130));
        assert_eq!(joined, word);
        assert_eq!(word.reversed().reversed(), word);
    }

    proptest! {
        #[test]
        fn lex_cmp_matches_index_order(a in 0u64..(1 << 20), b in 0u64..(1 << 20)) {
            let (wa, wb) = (BitWord::from_index(a, 20), BitWord::from_index(b, 20));
            prop_assert_eq!(wa.lex_cmp(&wb), a.cmp(&b));
            prop_assert_eq!(wa.to_index(), a);
        }

        #[test]
        fn string_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let word = BitWord::from_bools(&bits);
            prop_assert_eq!(word.to_string().parse::<BitWord>().unwrap(), word.clone());
            prop_assert_eq!(word.to_bools(), bits);
        }
    }
}
