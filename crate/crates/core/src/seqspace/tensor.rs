use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real array in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl<'de> Deserialize<'de> for CoefficientTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTensor::deserialize(d)?;
        CoefficientTensor::new(raw.shape, raw.values).map_err(serde::de::Error::custom)
    }
}

impl CoefficientTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::domain("tensor must have rank at least 1"));
        }
        if shape.iter().any(|&n| n == 0) {
            return Err(Error::domain("zero-length tensor axes are not allowed"));
        }
        let count = shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::shape("tensor element count overflows"))?;
        if count != values.len() {
            return Err(Error::shape(format!(
                "shape {shape:?} needs {count} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("tensor entries must be finite"));
        }
        Ok(CoefficientTensor { shape, values })
    }

    pub fn vector(values: Vec<f64>) -> Result<Self> {
        Self::new(vec![values.len()], values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn require_vector(&self) -> Result<&[f64]> {
        if self.rank() != 1 {
            return Err(Error::shape(format!("expected a rank-1 tensor, got rank {}", self.rank())));
        }
        Ok(&self.values)
    }

    /// Reorders axes so that new axis `k` is old axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank || perm.iter().any(|&a| a >= rank || std::mem::replace(&mut seen[a], true)) {
            return Err(Error::shape(format!("{perm:?} is not a permutation of {rank} axes")));
        }
        let shape: Vec<usize> = perm.iter().map(|&a| self.shape[a]).collect();
        let old_strides = strides(&self.shape);
        let mut values = Vec::with_capacity(self.values.len());
        for_each_index(&shape, |idx| {
            let off: usize = idx.iter().zip(perm).map(|(&i, &a)| i * old_strides[a]).sum();
            values.push(self.values[off]);
        });
        CoefficientTensor::new(shape, values)
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Visits every multi-index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.iter().any(|&n| n == 0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut k = shape.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}
