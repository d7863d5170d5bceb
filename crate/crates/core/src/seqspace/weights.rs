use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a finite weight prefix continues past its last stored index.
///
/// Asymptotic questions about a weight sequence cannot be answered from a
/// finite prefix, so the continuation is declared explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    #[default]
    None,
    /// `w_n` is eventually constant.
    Constant,
    /// `w_n` behaves like `n^e`.
    PowerLaw(f64),
    /// Blocks of cardinality `j` carrying `w_n^s = 1/(jN)`.
    BlockHarmonic,
    /// Odd indices constant, even indices with summable `w_n^s`.
    Interleaved,
}

/// Positive weights `w_1..w_M` together with the exponent `p > 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSequence {
    p: f64,
    weights: Vec<f64>,
    #[serde(default)]
    tail: Tail,
}

#[derive(Deserialize)]
struct RawWeights {
    p: f64,
    weights: Vec<f64>,
    #[serde(default)]
    tail: Tail,
}

impl<'de> Deserialize<'de> for WeightSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawWeights::deserialize(d)?;
        WeightSequence::with_tail(raw.p, raw.weights, raw.tail).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("exponent p must satisfy 2 < p < inf, got {p}")));
    }
    Ok(())
}

impl WeightSequence {
    pub fn new(p: f64, weights: Vec<f64>) -> Result<Self> {
        Self::with_tail(p, weights, Tail::None)
    }

    pub fn with_tail(p: f64, weights: Vec<f64>, tail: Tail) -> Result<Self> {
        check_exponent(p)?;
        if let Some((n, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::domain(format!("weight w_{} = {w} is not a positive real", n + 1)));
        }
        if let Tail::PowerLaw(e) = tail {
            if !e.is_finite() {
                return Err(Error::domain("power-law tail exponent must be finite"));
            }
        }
        Ok(WeightSequence { p, weights, tail })
    }

    /// The constant sequence `c, c, ..., c` of length `len`.
    pub fn constant(p: f64, c: f64, len: usize) -> Result<Self> {
        Self::with_tail(p, vec![c; len], Tail::Constant)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `2p/(p-2)`, the exponent turning a weight into a block mass.
    pub fn mass_exponent(&self) -> f64 {
        mass_exponent(self.p)
    }

    /// `w_n^{2p/(p-2)}` for every stored index.
    pub fn masses(&self) -> Vec<f64> {
        let s = self.mass_exponent();
        self.weights.iter().map(|w| w.powf(s)).collect()
    }
}

pub fn mass_exponent(p: f64) -> f64 {
    2.0 * p / (p - 2.0)
}

/// Conjugate exponent `q` with `1/p + 1/q = 1`.
pub fn conjugate_index(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("conjugate index needs p > 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok(p / (p - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_index(2.0).unwrap(), 2.0);
        assert!((conjugate_index(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let q = conjugate_index(3.7).unwrap();
        assert!((conjugate_index(q).unwrap() - 3.7).abs() < 1e-12);
        assert!(matches!(conjugate_index(1.0), Err(Error::Domain(_))));
        assert!(matches!(conjugate_index(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightSequence::new(2.0, vec![1.0]).is_err());
        assert!(WeightSequence::new(4.0, vec![1.0, 0.0]).is_err());
        assert!(WeightSequence::new(4.0, vec![1.0, -1.0]).is_err());
        assert!(WeightSequence::new(4.0, vec![f64::NAN]).is_err());
        assert!(WeightSequence::new(f64::INFINITY, vec![1.0]).is_err());
    }

    #[test]
    fn mass_exponent_exceeds_two() {
        for p in [2.1, 3.0, 4.0, 10.0, 100.0] {
            assert!(mass_exponent(p) > 2.0);
        }
        assert_eq!(mass_exponent(4.0), 4.0);
    }

    #[test]
    fn json_shape() {
        let w: WeightSequence =
            serde_json::from_str(r#"{"p": 4, "weights": [1, 0.5], "tail": {"power_law": -0.25}}"#)
                .unwrap();
        assert_eq!(w.tail(), Tail::PowerLaw(-0.25));
        let w: WeightSequence =
            serde_json::from_str(r#"{"p": 4, "weights": [1], "tail": "block_harmonic"}"#).unwrap();
        assert_eq!(w.tail(), Tail::BlockHarmonic);
        let w: WeightSequence = serde_json::from_str(r#"{"p": 4, "weights": [1]}"#).unwrap();
        assert_eq!(w.tail(), Tail::None);
        assert!(serde_json::from_str::<WeightSequence>(r#"{"p": 4, "weights": [0]}"#).is_err());
        let back = serde_json::to_string(&WeightSequence::constant(4.0, 1.0, 1).unwrap()).unwrap();
        assert_eq!(back, r#"{"p":4.0,"weights":[1.0],"tail":"constant"}"#);
    }
}
