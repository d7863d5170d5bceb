use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{extremize_ratio, RatioConfig};
use crate::seqspace::{lp_norm, xpw_norm_slice, WeightSequence};
use crate::stepfn::{disjoint_sum, dyadic_level, StepFunction};

/// The entries of a level vector and the norm they are measured in.
#[derive(Debug, Clone)]
pub enum Carriers {
    /// `L^p` functions
    Step(Vec<StepFunction>),
    /// coefficient vectors in `X_{p,w}`
    Sequence { weights: WeightSequence, entries: Vec<Vec<f64>> },
}

/// `u ∈ B^{D_k}`: one carrier per dyadic string of length `k`, indexed by
/// the string read as a binary number.
#[derive(Debug, Clone)]
pub struct LevelVector {
    level: u32,
    p: f64,
    carriers: Carriers,
}

/// JSON: `{"level", "p", "entries": [StepFunction]}` or
/// `{"level", "weights": WeightSequence, "entries": [[..]]}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawLevel {
    Sequence { level: u32, weights: WeightSequence, entries: Vec<Vec<f64>> },
    Step { level: u32, p: f64, entries: Vec<StepFunction> },
}

impl Serialize for LevelVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match &self.carriers {
            Carriers::Step(e) => RawLevel::Step { level: self.level, p: self.p, entries: e.clone() },
            Carriers::Sequence { weights, entries } => {
                RawLevel::Sequence { level: self.level, weights: weights.clone(), entries: entries.clone() }
            }
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LevelVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawLevel::deserialize(d)? {
            RawLevel::Step { level, p, entries } => LevelVector::step(level, p, entries),
            RawLevel::Sequence { level, weights, entries } => LevelVector::sequence(level, weights, entries),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn check_count(level: u32, n: usize) -> Result<()> {
    if level >= usize::BITS - 1 || n != 1usize << level {
        return Err(Error::shape(format!("level {level} needs 2^{level} entries, got {n}")));
    }
    Ok(())
}

impl LevelVector {
    pub fn step(level: u32, p: f64, entries: Vec<StepFunction>) -> Result<Self> {
        check_count(level, entries.len())?;
        if !(p >= 1.0) {
            return Err(Error::domain(format!("exponent must be >= 1, got {p}")));
        }
        Ok(LevelVector { level, p, carriers: Carriers::Step(entries) })
    }

    pub fn sequence(level: u32, weights: WeightSequence, entries: Vec<Vec<f64>>) -> Result<Self> {
        check_count(level, entries.len())?;
        if let Some(e) = entries.iter().find(|e| e.len() > weights.len()) {
            return Err(Error::shape(format!("entry of length {} exceeds {} weights", e.len(), weights.len())));
        }
        let p = weights.p();
        Ok(LevelVector { level, p, carriers: Carriers::Sequence { weights, entries } })
    }

    /// `u_k` in `L^p`.
    pub fn dyadic(k: u32, p: f64) -> Result<Self> {
        Self::step(k, p, dyadic_level(k, p)?)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn carriers(&self) -> &Carriers {
        &self.carriers
    }

    pub fn len(&self) -> usize {
        1 << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scale(&self, c: f64) -> Self {
        let carriers = match &self.carriers {
            Carriers::Step(e) => Carriers::Step(e.iter().map(|f| f.scale(c)).collect()),
            Carriers::Sequence { weights, entries } => Carriers::Sequence {
                weights: weights.clone(),
                entries: entries.iter().map(|x| x.iter().map(|v| c * v).collect()).collect(),
            },
        };
        LevelVector { carriers, ..self.clone() }
    }

    /// Replace entry `t` with `f`, keeping the carrier kind.
    pub fn with_step_entry(&self, t: usize, f: StepFunction) -> Result<Self> {
        match &self.carriers {
            Carriers::Step(e) if t < e.len() => {
                let mut e = e.clone();
                e[t] = f;
                Ok(LevelVector { carriers: Carriers::Step(e), ..self.clone() })
            }
            Carriers::Step(_) => Err(Error::shape(format!("entry {t} outside level {}", self.level))),
            Carriers::Sequence { .. } => Err(Error::shape("sequence carriers hold vectors")),
        }
    }

    /// `‖Σ c(t) u(t)‖`, refining the step carriers once.
    pub fn dense(&self) -> Result<DenseLevel> {
        match &self.carriers {
            Carriers::Step(entries) => {
                let skeleton = entries
                    .iter()
                    .try_fold(entries[0].scale(0.0), |acc, f| acc.zip_with(f, |a, b| a + b.abs()))?;
                let mut cell_weights = Vec::with_capacity(skeleton.cell_count());
                skeleton.for_each_cell(|_, _, w| cell_weights.push(w));
                let columns = entries
                    .iter()
                    .map(|f| {
                        let r = skeleton.zip_with(f, |_, b| b)?;
                        debug_assert_eq!(r.support(), skeleton.support());
                        Ok(r.values().to_vec())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(DenseLevel { p: self.p, columns, norm: DenseNorm::Lp(cell_weights) })
            }
            Carriers::Sequence { weights, entries } => {
                let len = entries.iter().map(Vec::len).max().unwrap_or(0);
                let columns = entries
                    .iter()
                    .map(|x| {
                        let mut v = x.clone();
                        v.resize(len, 0.0);
                        v
                    })
                    .collect();
                Ok(DenseLevel { p: self.p, columns, norm: DenseNorm::Xpw(weights.clone()) })
            }
        }
    }
}

#[derive(Debug, Clone)]
enum DenseNorm {
    /// probability of each cell
    Lp(Vec<f64>),
    Xpw(WeightSequence),
}

/// Carriers as columns over a common grid.
#[derive(Debug, Clone)]
pub struct DenseLevel {
    p: f64,
    columns: Vec<Vec<f64>>,
    norm: DenseNorm,
}

impl DenseLevel {
    pub fn combination_norm(&self, c: &[f64]) -> f64 {
        let rows = self.columns.first().map_or(0, Vec::len);
        let mut x = vec![0.0; rows];
        for (col, &ct) in self.columns.iter().zip(c) {
            if ct != 0.0 {
                for (xi, v) in x.iter_mut().zip(col) {
                    *xi += ct * v;
                }
            }
        }
        match &self.norm {
            DenseNorm::Lp(w) => x.iter().zip(w).map(|(v, w)| w * v.abs().powf(self.p)).sum::<f64>().powf(1.0 / self.p),
            DenseNorm::Xpw(weights) => xpw_norm_slice(weights, &x).map(|r| r.value).unwrap_or(f64::NAN),
        }
    }
}

fn same_kind(u: &LevelVector, v: &LevelVector) -> Result<()> {
    let ok = match (&u.carriers, &v.carriers) {
        (Carriers::Step(_), Carriers::Step(_)) => u.p == v.p,
        (Carriers::Sequence { weights: a, .. }, Carriers::Sequence { weights: b, .. }) => a == b,
        _ => false,
    };
    if !ok {
        return Err(Error::shape("level vectors carry different norms"));
    }
    Ok(())
}

/// `u ≺ v`: `|u| < |v|` and `u(t) = 2^{-d/p} Σ_{s ∈ D_d} v(t·s)` with `d = |v| - |u|`,
/// each identity checked to `tol` in the carrier norm.
pub fn level_prec(u: &LevelVector, v: &LevelVector, tol: f64) -> Result<bool> {
    same_kind(u, v)?;
    if u.level >= v.level {
        return Ok(false);
    }
    let d = v.level - u.level;
    let block = 1usize << d;
    let scale = 2f64.powf(-(d as f64) / u.p);
    for t in 0..u.len() {
        let err = match (&u.carriers, &v.carriers) {
            (Carriers::Step(ue), Carriers::Step(ve)) => {
                let mut acc = ue[t].clone();
                for s in 0..block {
                    acc = acc.zip_with(&ve[t * block + s], |a, b| a - scale * b)?;
                }
                acc.lp_norm(u.p)?
            }
            (Carriers::Sequence { weights, entries: ue }, Carriers::Sequence { entries: ve, .. }) => {
                let mut acc = ue[t].clone();
                for s in 0..block {
                    let x = &ve[t * block + s];
                    if x.len() > acc.len() {
                        acc.resize(x.len(), 0.0);
                    }
                    for (a, b) in acc.iter_mut().zip(x) {
                        *a -= scale * b;
                    }
                }
                xpw_norm_slice(weights, &acc)?.value
            }
            _ => unreachable!(),
        };
        if !(err <= tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub is_member: bool,
    /// smallest `‖Σ c u‖ / ‖c‖_p` found
    pub worst_lower: f64,
    /// largest `‖Σ c u‖ / ‖c‖_p` found
    pub worst_upper: f64,
}

/// Numerical test of `δ ‖c‖_p <= ‖Σ c(t) u(t)‖ <= ‖c‖_p` over all `c`.
pub fn delta_membership(u: &LevelVector, delta: f64, tol: f64, budget: &RatioConfig) -> Result<DeltaReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let dense = u.dense()?;
    let p = u.p;
    let f = |c: &[f64]| dense.combination_norm(c) / lp_norm(c, p);
    let ext = extremize_ratio(&f, u.len(), p, budget);
    Ok(DeltaReport {
        is_member: ext.min >= delta - tol && ext.max <= 1.0 + tol,
        worst_lower: ext.min,
        worst_upper: ext.max,
    })
}

/// The pair `(τe, ē)` on the space enlarged by one fair coin:
/// `τe(0·t) = e(t) ⊕ 0`, `τe(1·t) = 0 ⊕ e(t)`, `ē(t) = 2^{-1/p}(τe(t·0) + τe(t·1))`.
pub fn disjoint_lift(e: &LevelVector) -> Result<(LevelVector, LevelVector)> {
    let Carriers::Step(entries) = &e.carriers else {
        return Err(Error::domain("the disjoint lift needs step-function carriers"));
    };
    let m = entries[0].space().len();
    if entries.iter().any(|f| f.space().len() != m) {
        return Err(Error::shape("carriers live on different spaces"));
    }
    let p = e.p;
    let zero = |f: &StepFunction| StepFunction::constant(f.space().clone(), 0.0);
    let mut tau = Vec::with_capacity(2 * entries.len());
    for f in entries {
        tau.push(disjoint_sum(f, &zero(f), p)?);
    }
    for f in entries {
        tau.push(disjoint_sum(&zero(f), f, p)?);
    }
    let s = 2f64.powf(-1.0 / p);
    let bar = (0..entries.len())
        .map(|t| Ok(tau[2 * t].add(&tau[2 * t + 1])?.scale(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok((LevelVector::step(e.level + 1, p, tau)?, LevelVector::step(e.level, p, bar)?))
}
