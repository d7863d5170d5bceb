use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite 0/1 word; the empty word is the single element of `D_0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DyadicString {
    bits: Vec<bool>,
}

impl DyadicString {
    pub fn empty() -> Self {
        DyadicString::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        DyadicString { bits }
    }

    /// Binary expansion of `n >= 1`, leading bit 1.
    pub fn of_natural(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("only positive integers have a dyadic code"));
        }
        let len = 64 - n.leading_zeros();
        Ok(DyadicString { bits: (0..len).rev().map(|i| n >> i & 1 == 1).collect() })
    }

    /// Inverse of [`of_natural`](Self::of_natural) for codes of at most 63 bits.
    pub fn to_natural(&self) -> Option<u64> {
        if self.bits.first() != Some(&true) || self.bits.len() > 63 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn is_prefix_of(&self, other: &DyadicString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn is_strict_prefix_of(&self, other: &DyadicString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }
}

pub fn concat(t: &DyadicString, s: &DyadicString) -> DyadicString {
    let mut bits = t.bits.clone();
    bits.extend_from_slice(&s.bits);
    DyadicString { bits }
}

impl fmt::Display for DyadicString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DyadicString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::domain(format!("'{other}' is not a binary digit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(DyadicString::from_bits)
    }
}

impl Serialize for DyadicString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `k` with `2^k <= n < 2^{k+1}`.
pub fn lambda_of(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::domain("lambda is defined for n >= 1"));
    }
    Ok(63 - n.leading_zeros())
}

/// The binary expansion of `m` is a strict prefix of that of `n`.
pub fn dotprec(m: u64, n: u64) -> bool {
    if m == 0 || n == 0 || m >= n {
        return false;
    }
    let shift = lambda_of(n).unwrap() - lambda_of(m).unwrap();
    shift > 0 && n >> shift == m
}

/// `m ⊑̇ n`: prefix or equal.
pub fn dotpreceq(m: u64, n: u64) -> bool {
    m == n || dotprec(m, n)
}

fn check_positive(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("indices start at 1"));
    }
    Ok(())
}

/// `B_n`: every `m` whose expansion is a prefix of that of `n`.
pub fn branch(n: u64) -> Result<BTreeSet<u64>> {
    check_positive(n)?;
    let mut out = BTreeSet::new();
    let mut m = n;
    while m > 0 {
        out.insert(m);
        m >>= 1;
    }
    Ok(out)
}

/// `T_n = {1, .., n}`.
pub fn tree_upto(n: u64) -> Result<BTreeSet<u64>> {
    check_positive(n)?;
    Ok((1..=n).collect())
}

/// `Λ(n)`: indices on the same level as `n`.
pub fn level_set(n: u64) -> Result<BTreeSet<u64>> {
    let k = lambda_of(n)?;
    if k >= 32 {
        return Err(Error::SizeCap { what: "level set".into(), needed: 1u128 << k, cap: 1 << 31 });
    }
    Ok(((1u64 << k)..(1u64 << (k + 1))).collect())
}

fn branches_of_level(n: u64, keep: impl Fn(u64) -> bool) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for m in level_set(n)? {
        if keep(m) {
            out.extend(branch(m)?);
        }
    }
    Ok(out)
}

/// `L_n`: union of the branches `B_{n'}` over `n' ∈ Λ(n)` with `n' <= n`.
pub fn left_set(n: u64) -> Result<BTreeSet<u64>> {
    branches_of_level(n, |m| m <= n)
}

/// `R_n`: union of the branches `B_{n'}` over `n' ∈ Λ(n)` with `n' >= n`.
pub fn right_set(n: u64) -> Result<BTreeSet<u64>> {
    branches_of_level(n, |m| m >= n)
}
