use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::weights::{check_exponent, mass_exponent, Tail, WeightSequence};
use crate::error::{Error, Result};

/// Isomorphism type of the weighted space, by the asymptotics of `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightCase {
    /// `inf w_n > 0`: the space is `l^2`.
    A,
    /// `sum w_n^s < inf`: the space is `l^p`.
    B,
    /// Infinitely many large and infinitely many small weights, small ones summable: `l^2 + l^p`.
    C,
    /// Condition (*): every small-weight tail has divergent mass.
    D,
    /// No tail declared; a finite prefix cannot decide the case.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSum {
    pub epsilon: f64,
    /// `sum_{n <= M, w_n < epsilon} w_n^s`.
    pub mass: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub case: WeightCase,
    pub prefix_inf: f64,
    pub sums: Vec<ThresholdSum>,
}

fn case_from_tail(tail: Tail, p: f64) -> WeightCase {
    match tail {
        Tail::None => WeightCase::Undetermined,
        Tail::Constant => WeightCase::A,
        Tail::PowerLaw(e) if e >= 0.0 => WeightCase::A,
        // w_n^s ~ n^{e s}: summable exactly when e s < -1
        Tail::PowerLaw(e) if e * mass_exponent(p) < -1.0 => WeightCase::B,
        Tail::PowerLaw(_) => WeightCase::D,
        Tail::Interleaved => WeightCase::C,
        Tail::BlockHarmonic => WeightCase::D,
    }
}

pub fn classify_weights(w: &WeightSequence, epsilon_grid: &[f64]) -> Result<ClassificationReport> {
    if epsilon_grid.is_empty() {
        return Err(Error::domain("epsilon grid is empty"));
    }
    if w.is_empty() {
        return Err(Error::domain("weight sequence is empty"));
    }
    if let Some(e) = epsilon_grid.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::domain(format!("epsilon {e} is not positive")));
    }
    let masses = w.masses();
    let sums = epsilon_grid
        .iter()
        .map(|&eps| {
            let (mass, count) = w
                .weights()
                .iter()
                .zip(&masses)
                .filter(|(wn, _)| **wn < eps)
                .fold((0.0, 0), |(m, c), (_, mn)| (m + mn, c + 1));
            ThresholdSum { epsilon: eps, mass, count }
        })
        .collect();
    let prefix_inf = w.weights().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ClassificationReport { case: case_from_tail(w.tail(), w.p()), prefix_inf, sums })
}

/// Which standard witness [`canonical_weights`] should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalCase {
    A,
    B,
    C,
    Star,
}

impl FromStr for CanonicalCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(CanonicalCase::A),
            "b" => Ok(CanonicalCase::B),
            "c" => Ok(CanonicalCase::C),
            "star" | "*" | "d" => Ok(CanonicalCase::Star),
            other => Err(Error::domain(format!("unknown weight case '{other}'"))),
        }
    }
}

impl fmt::Display for CanonicalCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CanonicalCase::A => "a",
            CanonicalCase::B => "b",
            CanonicalCase::C => "c",
            CanonicalCase::Star => "star",
        })
    }
}

/// Length-`len` prefix of a standard witness sequence for `case`.
///
/// * `A`: `w_n = 1`.
/// * `B`: `w_n^s = n^{-2}`.
/// * `C`: odd positions 1, even positions follow the `B` witness.
/// * `Star`: `w_n^s = 1/n`.
pub fn canonical_weights(p: f64, case: CanonicalCase, len: usize) -> Result<WeightSequence> {
    check_exponent(p)?;
    if len == 0 {
        return Err(Error::domain("canonical weights need length at least 1"));
    }
    let s = mass_exponent(p);
    let power = |n: usize, e: f64| (n as f64).powf(e);
    let (weights, tail) = match case {
        CanonicalCase::A => (vec![1.0; len], Tail::Constant),
        CanonicalCase::B => ((1..=len).map(|n| power(n, -2.0 / s)).collect(), Tail::PowerLaw(-2.0 / s)),
        CanonicalCase::C => (
            (1..=len)
                .map(|n| if n % 2 == 1 { 1.0 } else { power(n / 2, -2.0 / s) })
                .collect(),
            Tail::Interleaved,
        ),
        CanonicalCase::Star => ((1..=len).map(|n| power(n, -1.0 / s)).collect(), Tail::PowerLaw(-1.0 / s)),
    };
    WeightSequence::with_tail(p, weights, tail)
}

/// Blocks of cardinality `1, 2, ..., blocks` where every weight in block `j`
/// satisfies `w^s = 1/(j n)`, so each block carries mass exactly `1/n`.
pub fn block_harmonic_weights(p: f64, n: usize, blocks: usize) -> Result<WeightSequence> {
    check_exponent(p)?;
    if n == 0 || blocks == 0 {
        return Err(Error::domain("block-harmonic weights need n >= 1 and at least one block"));
    }
    let s = mass_exponent(p);
    let weights = (1..=blocks)
        .flat_map(|j| std::iter::repeat((1.0 / (j * n) as f64).powf(1.0 / s)).take(j))
        .collect();
    WeightSequence::with_tail(p, weights, Tail::BlockHarmonic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_examples() {
        let a = canonical_weights(4.0, CanonicalCase::A, 3).unwrap();
        assert_eq!(a.weights(), &[1.0, 1.0, 1.0]);
        assert_eq!(a.tail(), Tail::Constant);

        let star = canonical_weights(4.0, CanonicalCase::Star, 4).unwrap();
        let expect = [1.0, 2f64.powf(-0.25), 3f64.powf(-0.25), 4f64.powf(-0.25)];
        for (w, e) in star.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
        let b = canonical_weights(4.0, CanonicalCase::B, 2).unwrap();
        assert!((b.weights()[1] - 2f64.powf(-0.5)).abs() < 1e-15);
        assert!("z".parse::<CanonicalCase>().is_err());
    }

    #[test]
    fn classification_from_tags() {
        let grid = [0.5, 0.1];
        let case = |c| classify_weights(&canonical_weights(4.0, c, 8).unwrap(), &grid).unwrap().case;
        assert_eq!(case(CanonicalCase::A), WeightCase::A);
        assert_eq!(case(CanonicalCase::B), WeightCase::B);
        assert_eq!(case(CanonicalCase::C), WeightCase::C);
        assert_eq!(case(CanonicalCase::Star), WeightCase::D);

        let harmonic = block_harmonic_weights(3.0, 2, 4).unwrap();
        assert_eq!(classify_weights(&harmonic, &grid).unwrap().case, WeightCase::D);

        let plain = WeightSequence::new(4.0, vec![1.0, 0.5]).unwrap();
        let r = classify_weights(&plain, &[0.75, 2.0]).unwrap();
        assert_eq!(r.case, WeightCase::Undetermined);
        assert_eq!(r.prefix_inf, 0.5);
        assert_eq!(r.sums[0].mass, 0.0625);
        assert_eq!(r.sums[0].count, 1);
        assert_eq!(r.sums[1].mass, 1.0625);
        assert!(classify_weights(&plain, &[]).is_err());
    }

    #[test]
    fn power_law_boundary() {
        // p = 4: w^4 = n^{4e}; e = -1/4 is the harmonic boundary
        let tagged = |e| WeightSequence::with_tail(4.0, vec![1.0], Tail::PowerLaw(e)).unwrap();
        assert_eq!(classify_weights(&tagged(-0.5), &[1.0]).unwrap().case, WeightCase::B);
        assert_eq!(classify_weights(&tagged(-0.25), &[1.0]).unwrap().case, WeightCase::D);
        assert_eq!(classify_weights(&tagged(-0.1), &[1.0]).unwrap().case, WeightCase::D);
        assert_eq!(classify_weights(&tagged(0.0), &[1.0]).unwrap().case, WeightCase::A);
    }

    #[test]
    fn block_harmonic_masses() {
        let w = block_harmonic_weights(4.0, 2, 3).unwrap();
        assert_eq!(w.len(), 6);
        let m = w.masses();
        assert!((m[0] - 0.5).abs() < 1e-15);
        assert!((m[1] + m[2] - 0.5).abs() < 1e-15);
        assert!((m[3] + m[4] + m[5] - 0.5).abs() < 1e-15);
    }
}
