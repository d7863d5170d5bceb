use serde::{Deserialize, Serialize};

use super::space::{refine, Coordinate, CoordinateSpace};
use crate::error::{Error, Result};

/// Largest number of value cells a single function may carry.
pub const DEFAULT_MAX_CELLS: usize = 1 << 20;

/// A function on a finite product space, constant on the cells of its
/// support coordinates and independent of every other coordinate.
///
/// `values` is row-major over `support` in ascending coordinate order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    #[serde(flatten)]
    space: CoordinateSpace,
    support: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepFunction {
    coords: Vec<Coordinate>,
    #[serde(default)]
    support: Vec<usize>,
    values: Vec<f64>,
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawStepFunction::deserialize(d)?;
        StepFunction::new(CoordinateSpace::new(raw.coords), raw.support, raw.values)
            .map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_cells(needed: u128, what: &str) -> Result<()> {
    if needed > DEFAULT_MAX_CELLS as u128 {
        return Err(Error::SizeCap { what: what.to_string(), needed, cap: DEFAULT_MAX_CELLS as u128 });
    }
    Ok(())
}

/// Visit every multi-index of `dims` in row-major order.
pub(crate) fn odometer(dims: &[usize], mut visit: impl FnMut(&[usize])) {
    if dims.iter().any(|&d| d == 0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        visit(&idx);
        let mut axis = dims.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < dims[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

fn row_strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

impl StepFunction {
    pub fn new(space: CoordinateSpace, mut support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let sorted = support.windows(2).all(|w| w[0] < w[1]);
        if !sorted {
            // accept any order on input, store ascending
            let mut order: Vec<usize> = (0..support.len()).collect();
            order.sort_by_key(|&a| support[a]);
            if order.windows(2).any(|w| support[w[0]] == support[w[1]]) {
                return Err(Error::shape(format!("support {support:?} repeats a coordinate")));
            }
            let dims: Vec<usize> = support
                .iter()
                .map(|&c| space.coords.get(c).map_or(0, Coordinate::cells))
                .collect();
            if dims.contains(&0) {
                return Err(Error::shape(format!("support {support:?} names a coordinate outside the space")));
            }
            let f = StepFunction::new_sorted(space.clone(), support.clone(), values, &dims)?;
            return f.permuted(&order);
        }
        if let Some(&c) = support.iter().find(|&&c| c >= space.len()) {
            return Err(Error::shape(format!("support coordinate {c} outside a space of {} coordinates", space.len())));
        }
        let dims: Vec<usize> = support.iter().map(|&c| space.coords[c].cells()).collect();
        support.shrink_to_fit();
        Self::new_sorted(space, support, values, &dims)
    }

    fn new_sorted(space: CoordinateSpace, support: Vec<usize>, values: Vec<f64>, dims: &[usize]) -> Result<Self> {
        let needed: u128 = dims.iter().map(|&d| d as u128).product();
        check_cells(needed, "step function cells")?;
        if values.len() as u128 != needed {
            return Err(Error::shape(format!("{} values for {needed} cells", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("step function values must be finite"));
        }
        Ok(StepFunction { space, support, values })
    }

    /// Reorder value axes; `order[a]` is the input axis that becomes axis `a`.
    fn permuted(self, order: &[usize]) -> Result<Self> {
        let in_dims: Vec<usize> = self.support.iter().map(|&c| self.space.coords[c].cells()).collect();
        let in_strides = row_strides(&in_dims);
        let out_dims: Vec<usize> = order.iter().map(|&a| in_dims[a]).collect();
        let mut values = Vec::with_capacity(self.values.len());
        odometer(&out_dims, |idx| {
            let off: usize = idx.iter().zip(order).map(|(&i, &a)| i * in_strides[a]).sum();
            values.push(self.values[off]);
        });
        let support = order.iter().map(|&a| self.support[a]).collect();
        Ok(StepFunction { space: self.space, support, values })
    }

    pub fn constant(space: CoordinateSpace, c: f64) -> Self {
        StepFunction { space, support: Vec::new(), values: vec![c] }
    }

    /// A function of one coordinate on the one-coordinate space.
    pub fn on_coordinate(coord: Coordinate, values: Vec<f64>) -> Result<Self> {
        Self::new(CoordinateSpace::new(vec![coord]), vec![0], values)
    }

    /// The `i`-th Rademacher function on `{0,1}^m`: `+1` on the first point, `-1` on the second.
    pub fn rademacher(m: usize, i: usize) -> Result<Self> {
        Self::new(CoordinateSpace::two_point(m), vec![i], vec![1.0, -1.0])
    }

    /// Indicator of `[a, b)` inside `[0, 1)`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::domain(format!("[{a}, {b}) is not a subinterval of [0, 1)")));
        }
        let mut cuts = Vec::new();
        let mut values = Vec::new();
        if a > 0.0 {
            cuts.push(a);
            values.push(0.0);
        }
        values.push(1.0);
        if b < 1.0 {
            cuts.push(b);
            values.push(0.0);
        }
        Self::on_coordinate(Coordinate::from_cuts(&cuts)?, values)
    }

    pub fn space(&self) -> &CoordinateSpace {
        &self.space
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn dims(&self) -> Vec<usize> {
        self.support.iter().map(|&c| self.space.coords[c].cells()).collect()
    }

    pub(crate) fn from_parts(space: CoordinateSpace, support: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(
            support.iter().map(|&c| space.coords[c].cells()).product::<usize>(),
            values.len()
        );
        StepFunction { space, support, values }
    }

    /// Visit each cell as `(value, probability)`.
    pub fn for_each_cell(&self, mut visit: impl FnMut(&[usize], f64, f64)) {
        let probs: Vec<&[f64]> = self.support.iter().map(|&c| self.space.coords[c].probs()).collect();
        let mut k = 0;
        odometer(&self.dims(), |idx| {
            let w: f64 = idx.iter().zip(&probs).map(|(&i, p)| p[i]).product();
            visit(idx, self.values[k], w);
            k += 1;
        });
    }

    pub fn integrate(&self) -> f64 {
        let mut total = 0.0;
        self.for_each_cell(|_, v, w| total += v * w);
        total
    }

    pub fn lp_norm(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(Error::domain(format!("L^r norm needs r >= 1, got {r}")));
        }
        let mut total = 0.0;
        self.for_each_cell(|_, v, w| total += v.abs().powf(r) * w);
        Ok(total.powf(1.0 / r))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at a point given by one number in `[0, 1)` per coordinate.
    pub fn value_at(&self, point: &[f64]) -> Result<f64> {
        if point.len() < self.space.len() {
            return Err(Error::shape(format!("point has {} coordinates, space has {}", point.len(), self.space.len())));
        }
        let dims = self.dims();
        let strides = row_strides(&dims);
        let off: usize = self
            .support
            .iter()
            .zip(&strides)
            .map(|(&c, &s)| self.space.coords[c].cell_of(point[c]) * s)
            .sum();
        Ok(self.values[off])
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        StepFunction {
            space: self.space.clone(),
            support: self.support.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise `op(f, g)` on the common refinement of both grids.
    pub fn zip_with(&self, g: &StepFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = self.space.len().max(g.space.len());
        let mut coords = Vec::with_capacity(n);
        // per coordinate: (refined -> f cell, refined -> g cell)
        let mut maps: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(n);
        for i in 0..n {
            match (self.space.coords.get(i), g.space.coords.get(i)) {
                (Some(a), Some(b)) => {
                    let r = refine(a, b)?;
                    coords.push(r.coord);
                    maps.push((r.left, r.right));
                }
                (Some(a), None) => {
                    coords.push(a.clone());
                    maps.push(((0..a.cells()).collect(), Vec::new()));
                }
                (None, Some(b)) => {
                    coords.push(b.clone());
                    maps.push((Vec::new(), (0..b.cells()).collect()));
                }
                (None, None) => unreachable!(),
            }
        }
        let mut support: Vec<usize> = self.support.iter().chain(&g.support).copied().collect();
        support.sort_unstable();
        support.dedup();

        let dims: Vec<usize> = support.iter().map(|&c| coords[c].cells()).collect();
        check_cells(dims.iter().map(|&d| d as u128).product(), "refined grid cells")?;

        let f_strides = row_strides(&self.dims());
        let g_strides = row_strides(&g.dims());
        // per union axis: (f stride, g stride), zero when the operand ignores it
        let axis_strides: Vec<(usize, usize)> = support
            .iter()
            .map(|c| {
                let fs = self.support.iter().position(|x| x == c).map_or(0, |a| f_strides[a]);
                let gs = g.support.iter().position(|x| x == c).map_or(0, |a| g_strides[a]);
                (fs, gs)
            })
            .collect();

        let mut values = Vec::with_capacity(dims.iter().product());
        odometer(&dims, |idx| {
            let (mut fo, mut go) = (0, 0);
            for ((&i, &c), &(fs, gs)) in idx.iter().zip(&support).zip(&axis_strides) {
                if fs != 0 {
                    fo += maps[c].0[i] * fs;
                }
                if gs != 0 {
                    go += maps[c].1[i] * gs;
                }
            }
            values.push(op(self.values[fo], g.values[go]));
        });
        Ok(StepFunction { space: CoordinateSpace::new(coords), support, values })
    }

    pub fn add(&self, g: &StepFunction) -> Result<Self> {
        self.zip_with(g, |a, b| a + b)
    }

    pub fn sub(&self, g: &StepFunction) -> Result<Self> {
        self.zip_with(g, |a, b| a - b)
    }

    pub fn mul(&self, g: &StepFunction) -> Result<Self> {
        self.zip_with(g, |a, b| a * b)
    }

    /// `∫ f g`
    pub fn inner(&self, g: &StepFunction) -> Result<f64> {
        Ok(self.mul(g)?.integrate())
    }

    /// Largest pointwise difference after refinement.
    pub fn max_abs_diff(&self, g: &StepFunction) -> Result<f64> {
        Ok(self.sub(g)?.max_abs())
    }

    pub fn approx_eq(&self, g: &StepFunction, tol: f64) -> Result<bool> {
        Ok(self.max_abs_diff(g)? <= tol)
    }

    /// `Σ c_k f_k`, refining as it goes.
    pub fn linear_combination(space: &CoordinateSpace, fs: &[StepFunction], c: &[f64]) -> Result<Self> {
        if fs.len() != c.len() {
            return Err(Error::shape(format!("{} functions, {} coefficients", fs.len(), c.len())));
        }
        let mut acc = StepFunction::constant(space.clone(), 0.0);
        for (f, &ck) in fs.iter().zip(c) {
            if ck != 0.0 {
                acc = acc.zip_with(f, |a, b| a + ck * b)?;
            }
        }
        Ok(acc)
    }
}
