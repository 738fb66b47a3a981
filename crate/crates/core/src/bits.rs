//! Finite binary strings.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A finite binary string. Ordered by length first, then lexicographically.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bitstring {
    bits: Vec<bool>,
}

impl Bitstring {
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The `len`-bit string whose MSB-first reading is `value`.
    pub fn from_value(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_value supports at most 64 bits");
        let bits = (0..len)
            .map(|i| (value >> (len - 1 - i)) & 1 == 1)
            .collect();
        Self { bits }
    }

    /// Standard binary numeral without leading zeros; `bin(0)` is `"0"`.
    pub fn bin(n: u64) -> Self {
        if n == 0 {
            return Self::from_bits(vec![false]);
        }
        let len = 64 - n.leading_zeros() as usize;
        Self::from_value(n, len)
    }

    /// All strings of length `n`, in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Bitstring> + Clone {
        assert!(n < 64);
        (0..1u64 << n).map(move |v| Bitstring::from_value(v, n))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    /// MSB-first numeric value; this is the string's rank among strings of its length.
    pub fn value(&self) -> u64 {
        assert!(self.len() <= 64, "value() supports at most 64 bits");
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn prefix(&self, k: usize) -> Bitstring {
        Self::from_bits(self.bits[..k.min(self.len())].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Bitstring {
        Self::from_bits(self.bits[k.min(self.len())..].to_vec())
    }

    pub fn concat(&self, other: &Bitstring) -> Bitstring {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    pub fn concat_all<'a>(parts: impl IntoIterator<Item = &'a Bitstring>) -> Bitstring {
        let mut bits = Vec::new();
        for p in parts {
            bits.extend_from_slice(&p.bits);
        }
        Self { bits }
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from(&mut self, other: &Bitstring) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// Packs the bits MSB-first, zero-padding the final byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_packed_bytes(bytes: &[u8], len: usize) -> Option<Bitstring> {
        if bytes.len() < len.div_ceil(8) {
            return None;
        }
        let bits = (0..len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect();
        Some(Self { bits })
    }

    pub fn starts_with(&self, other: &Bitstring) -> bool {
        self.bits.starts_with(&other.bits)
    }
}

impl Ord for Bitstring {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for Bitstring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bits)
    }
}

impl From<&[bool]> for Bitstring {
    fn from(bits: &[bool]) -> Self {
        Self::from_bits(bits.to_vec())
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for parsing bit literals in tests and examples. Panics on bad input.
pub fn bs(s: &str) -> Bitstring {
    s.parse().expect("valid bit literal")
}

/// `⌈log₂ n⌉`, with `log⁺(0) = log⁺(1) = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
