use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoints closer than this are treated as the same point.
pub const CUT_TOL: f64 = 1e-12;
const PROB_SUM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoordKind {
    /// `[0, 1)` with Lebesgue measure, split into consecutive cells.
    #[default]
    Interval,
    /// `{0, 1}` with mass 1/2 on each point; cannot be refined.
    TwoPoint,
}

/// One factor of a finite product probability space, partitioned into cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coordinate {
    #[serde(skip_serializing_if = "is_interval")]
    kind: CoordKind,
    probs: Vec<f64>,
    #[serde(skip)]
    cuts: Vec<f64>,
}

fn is_interval(k: &CoordKind) -> bool {
    *k == CoordKind::Interval
}

#[derive(Deserialize)]
struct RawCoordinate {
    probs: Vec<f64>,
    #[serde(default)]
    kind: CoordKind,
}

impl<'de> Deserialize<'de> for Coordinate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCoordinate::deserialize(d)?;
        Coordinate::with_kind(raw.kind, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl Coordinate {
    /// An interval coordinate split into cells of the given lengths.
    pub fn interval(probs: Vec<f64>) -> Result<Self> {
        Self::with_kind(CoordKind::Interval, probs)
    }

    /// The unsplit unit interval.
    pub fn unit() -> Self {
        Coordinate { kind: CoordKind::Interval, probs: vec![1.0], cuts: vec![0.0, 1.0] }
    }

    pub fn two_point() -> Self {
        Coordinate { kind: CoordKind::TwoPoint, probs: vec![0.5, 0.5], cuts: vec![0.0, 0.5, 1.0] }
    }

    /// `[0,1)` split into `2^k` equal cells.
    pub fn dyadic(k: u32) -> Self {
        let n = 1usize << k;
        let h = 1.0 / n as f64;
        Coordinate {
            kind: CoordKind::Interval,
            probs: vec![h; n],
            cuts: (0..=n).map(|i| i as f64 * h).collect(),
        }
    }

    /// Cells delimited by interior breakpoints `0 < c_1 < ... < 1`.
    pub fn from_cuts(interior: &[f64]) -> Result<Self> {
        let mut cuts = Vec::with_capacity(interior.len() + 2);
        cuts.push(0.0);
        cuts.extend_from_slice(interior);
        cuts.push(1.0);
        if cuts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!("breakpoints {interior:?} are not increasing inside (0, 1)")));
        }
        let probs = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Coordinate { kind: CoordKind::Interval, probs, cuts })
    }

    pub fn with_kind(kind: CoordKind, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("a coordinate needs at least one cell"));
        }
        if probs.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::domain("cell probabilities must be positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::domain(format!("cell probabilities sum to {total}, not 1")));
        }
        if kind == CoordKind::TwoPoint && probs != [0.5, 0.5] {
            return Err(Error::domain("a two-point coordinate carries probabilities (1/2, 1/2)"));
        }
        let mut cuts = Vec::with_capacity(probs.len() + 1);
        let mut acc = 0.0;
        cuts.push(0.0);
        for p in &probs[..probs.len() - 1] {
            acc += p;
            cuts.push(acc);
        }
        cuts.push(1.0);
        Ok(Coordinate { kind, probs, cuts })
    }

    pub fn kind(&self) -> CoordKind {
        self.kind
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative breakpoints `0 = c_0 < c_1 < ... < c_n = 1`.
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn cells(&self) -> usize {
        self.probs.len()
    }

    /// Index of the cell containing `x` in `[0, 1)`.
    pub fn cell_of(&self, x: f64) -> usize {
        match self.cuts[1..].iter().position(|&c| x < c) {
            Some(i) => i,
            None => self.cells() - 1,
        }
    }
}

/// Common refinement of two partitions of the same coordinate.
pub(crate) struct Refinement {
    pub coord: Coordinate,
    /// refined cell -> cell of the left operand
    pub left: Vec<usize>,
    /// refined cell -> cell of the right operand
    pub right: Vec<usize>,
}

fn identity_map(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub(crate) fn refine(a: &Coordinate, b: &Coordinate) -> Result<Refinement> {
    if a.kind != b.kind {
        return Err(Error::shape("cannot refine a two-point coordinate against an interval"));
    }
    let same = a.cuts.len() == b.cuts.len() && a.cuts.iter().zip(&b.cuts).all(|(x, y)| (x - y).abs() <= CUT_TOL);
    if same {
        let n = a.cells();
        return Ok(Refinement { coord: a.clone(), left: identity_map(n), right: identity_map(n) });
    }
    // merged interior breakpoints
    let mut merged: Vec<f64> = Vec::with_capacity(a.cuts.len() + b.cuts.len());
    let (mut i, mut j) = (1, 1);
    let (ai, bj) = (&a.cuts[..a.cuts.len() - 1], &b.cuts[..b.cuts.len() - 1]);
    while i < ai.len() || j < bj.len() {
        let next = match (ai.get(i), bj.get(j)) {
            (Some(&x), Some(&y)) if (x - y).abs() <= CUT_TOL => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if merged.last().map_or(true, |&l| next - l > CUT_TOL) && next < 1.0 - CUT_TOL {
            merged.push(next);
        }
    }
    let mut coord = Coordinate::from_cuts(&merged)?;
    let locate = |c: &Coordinate| -> Vec<usize> {
        coord.cuts.windows(2).map(|w| c.cell_of(0.5 * (w[0] + w[1]))).collect()
    };
    let (left, right) = (locate(a), locate(b));
    // cut differences lose the relative accuracy of tiny cells; keep the
    // operand's own mass wherever a refined cell is a whole cell of it
    let whole = |map: &[usize], k: usize| {
        (k == 0 || map[k - 1] != map[k]) && map.get(k + 1).map_or(true, |&n| n != map[k])
    };
    for k in 0..coord.probs.len() {
        if whole(&left, k) {
            coord.probs[k] = a.probs[left[k]];
        } else if whole(&right, k) {
            coord.probs[k] = b.probs[right[k]];
        }
    }
    Ok(Refinement { left, right, coord })
}

/// Ordered list of coordinates; the empty list is the one-point space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CoordinateSpace {
    pub coords: Vec<Coordinate>,
}

impl CoordinateSpace {
    pub fn new(coords: Vec<Coordinate>) -> Self {
        CoordinateSpace { coords }
    }

    pub fn two_point(m: usize) -> Self {
        CoordinateSpace { coords: vec![Coordinate::two_point(); m] }
    }

    pub fn unit_intervals(m: usize) -> Self {
        CoordinateSpace { coords: vec![Coordinate::unit(); m] }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}
