use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tensor::{for_each_index, strides, CoefficientTensor};
use super::weights::{check_exponent, WeightSequence};
use crate::error::{Error, Result};

/// Default cap on the rank accepted by [`tensor_norm`]; the formula visits `2^rank` subsets.
pub const DEFAULT_MAX_TENSOR_RANK: usize = 12;

pub const BRANCH_LP: &str = "lp";
pub const BRANCH_L2W: &str = "l2w";

/// Value of a max-of-norms formula together with every competing term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub branch: String,
    pub components: BTreeMap<String, f64>,
}

impl NormReport {
    /// Builds a report from labelled terms, taking the first largest one.
    fn max_of(terms: Vec<(String, f64)>) -> Self {
        let (branch, value) = terms
            .iter()
            .fold(None::<(&String, f64)>, |best, (label, v)| match best {
                Some((_, bv)) if bv >= *v => best,
                _ => Some((label, *v)),
            })
            .map(|(l, v)| (l.clone(), v))
            .unwrap_or_default();
        NormReport { value, branch, components: terms.into_iter().collect() }
    }
}

pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(sum |w_n x_n|^2)^{1/2}`; `x` may be shorter than `w`.
pub fn weighted_l2_norm(weights: &[f64], x: &[f64]) -> f64 {
    x.iter().zip(weights).map(|(v, w)| (v * w).powi(2)).sum::<f64>().sqrt()
}

fn check_support(w: &WeightSequence, len: usize) -> Result<()> {
    if len > w.len() {
        return Err(Error::shape(format!(
            "coefficient length {len} exceeds the {} available weights",
            w.len()
        )));
    }
    Ok(())
}

/// Norm of `x` in the space normed by the larger of the `l^p` norm and the `w`-weighted `l^2` norm.
pub fn xpw_norm(w: &WeightSequence, x: &CoefficientTensor) -> Result<NormReport> {
    xpw_norm_slice(w, x.require_vector()?)
}

pub fn xpw_norm_slice(w: &WeightSequence, x: &[f64]) -> Result<NormReport> {
    check_support(w, x.len())?;
    Ok(NormReport::max_of(vec![
        (BRANCH_LP.to_string(), lp_norm(x, w.p())),
        (BRANCH_L2W.to_string(), weighted_l2_norm(w.weights(), x)),
    ]))
}

/// `sum_n x_n y_n w_n^2`.
pub fn ell2w_inner(w: &WeightSequence, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::shape(format!("inner product of lengths {} and {}", x.len(), y.len())));
    }
    check_support(w, x.len())?;
    Ok(x.iter().zip(y).zip(w.weights()).map(|((a, b), w)| a * b * w * w).sum())
}

/// One summand of the `B_p` direct sum: coefficients living in the copy indexed by `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpBlock {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

/// Common value of the constant weight sequence attached to block `n` of `B_p`.
pub fn bp_block_weight(p: f64, n: usize) -> f64 {
    (1.0 / n as f64).powf((p - 2.0) / (2.0 * p))
}

pub fn bp_norm(p: f64, blocks: &[BpBlock]) -> Result<NormReport> {
    check_exponent(p)?;
    let mut components = BTreeMap::new();
    let mut total = 0.0;
    for (k, block) in blocks.iter().enumerate() {
        if block.n == 0 {
            return Err(Error::domain("B_p block index must be at least 1"));
        }
        if block.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("B_p coefficients must be finite"));
        }
        let v = bp_block_weight(p, block.n);
        let norm = lp_norm(&block.coeffs, p).max(v * lp_norm(&block.coeffs, 2.0));
        total += norm.powf(p);
        components.insert(format!("block[{k}] N={}", block.n), norm);
    }
    Ok(NormReport { value: total.powf(1.0 / p), branch: "lp_sum".into(), components })
}

/// `max((sum_k |x_k|_p^p)^{1/p}, (sum_k |x_k|_{2,v_k}^2)^{1/2})`.
pub fn mixed_p2w_norm(p: f64, v_list: &[WeightSequence], x: &[Vec<f64>]) -> Result<NormReport> {
    check_exponent(p)?;
    if v_list.len() != x.len() {
        return Err(Error::shape(format!(
            "{} weight sequences for {} blocks",
            v_list.len(),
            x.len()
        )));
    }
    let mut lp_pow = 0.0;
    let mut l2_sq = 0.0;
    for (v, block) in v_list.iter().zip(x) {
        check_support(v, block.len())?;
        if block.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        lp_pow += block.iter().map(|c| c.abs().powf(p)).sum::<f64>();
        l2_sq += weighted_l2_norm(v.weights(), block).powi(2);
    }
    Ok(NormReport::max_of(vec![
        (BRANCH_LP.to_string(), lp_pow.powf(1.0 / p)),
        (BRANCH_L2W.to_string(), l2_sq.sqrt()),
    ]))
}

/// Label of an axis subset, 1-based: `{}`, `{1}`, `{1,3}`.
pub fn subset_label(mask: u32, rank: usize) -> String {
    let members: Vec<String> =
        (0..rank).filter(|k| mask & (1 << k) != 0).map(|k| (k + 1).to_string()).collect();
    format!("{{{}}}", members.join(","))
}

/// Maximum over axis subsets `S` of
/// `(sum_{i_S} (sum_{i_{S^c}} |a|^2 prod_{l in S^c} w_{i_l}^2)^{p/2})^{1/p}`.
pub fn tensor_norm(w: &WeightSequence, a: &CoefficientTensor) -> Result<NormReport> {
    tensor_norm_capped(w, a, DEFAULT_MAX_TENSOR_RANK)
}

pub fn tensor_norm_capped(w: &WeightSequence, a: &CoefficientTensor, max_rank: usize) -> Result<NormReport> {
    let rank = a.rank();
    if rank == 0 {
        return Err(Error::domain("tensor norm needs rank at least 1"));
    }
    if rank > max_rank.min(31) {
        return Err(Error::SizeCap {
            what: "tensor rank".into(),
            needed: rank as u128,
            cap: max_rank.min(31) as u128,
        });
    }
    for &len in a.shape() {
        check_support(w, len)?;
    }
    let p = w.p();
    let weights = w.weights();
    let shape = a.shape();
    let values = a.values();

    let mut terms = Vec::with_capacity(1 << rank);
    for mask in 0u32..(1u32 << rank) {
        let kept: Vec<usize> = (0..rank).filter(|k| mask & (1 << k) != 0).collect();
        let kept_shape: Vec<usize> = kept.iter().map(|&k| shape[k]).collect();
        let kept_strides = strides(&kept_shape);
        let mut buckets = vec![0.0; kept_shape.iter().product()];
        let mut flat = 0usize;
        for_each_index(shape, |idx| {
            let mut t = values[flat] * values[flat];
            flat += 1;
            if t == 0.0 {
                return;
            }
            let mut bucket = 0usize;
            let mut j = 0usize;
            for (k, &i) in idx.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    bucket += i * kept_strides[j];
                    j += 1;
                } else {
                    t *= weights[i] * weights[i];
                }
            }
            buckets[bucket] += t;
        });
        let value = buckets.iter().map(|b| b.powf(p / 2.0)).sum::<f64>().powf(1.0 / p);
        terms.push((subset_label(mask, rank), value));
    }
    Ok(NormReport::max_of(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqspace::Tail;

    fn vecw(p: f64, w: &[f64]) -> WeightSequence {
        WeightSequence::new(p, w.to_vec()).unwrap()
    }

    fn vect(x: &[f64]) -> CoefficientTensor {
        CoefficientTensor::vector(x.to_vec()).unwrap()
    }

    #[test]
    fn xpw_examples() {
        let w = vecw(4.0, &[1.0, 1.0]);
        let r = xpw_norm(&w, &vect(&[1.0, 0.0])).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.components[BRANCH_LP], 1.0);
        assert_eq!(r.components[BRANCH_L2W], 1.0);

        let r = xpw_norm(&w, &vect(&[1.0, 1.0])).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.components[BRANCH_LP] - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(r.branch, BRANCH_L2W);

        let w = WeightSequence::with_tail(4.0, vec![0.5; 4], Tail::Constant).unwrap();
        let r = xpw_norm(&w, &vect(&[1.0; 4])).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn xpw_rejects_long_coefficients() {
        let w = vecw(4.0, &[1.0]);
        assert!(matches!(xpw_norm(&w, &vect(&[1.0, 1.0])), Err(Error::Shape(_))));
        // shorter coefficient vectors are zero-padded
        assert_eq!(xpw_norm(&vecw(4.0, &[1.0, 2.0, 3.0]), &vect(&[1.0])).unwrap().value, 1.0);
    }

    #[test]
    fn inner_product_examples() {
        let w = vecw(4.0, &[1.0, 1.0]);
        assert_eq!(ell2w_inner(&w, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ell2w_inner(&w, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ell2w_inner(&vecw(4.0, &[0.5]), &[2.0], &[3.0]).unwrap(), 1.5);
        assert!(ell2w_inner(&w, &[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn bp_examples() {
        let r = bp_norm(4.0, &[BpBlock { n: 1, coeffs: vec![1.0] }]).unwrap();
        assert_eq!(r.value, 1.0);

        let r = bp_norm(4.0, &[BpBlock { n: 4, coeffs: vec![1.0; 4] }]).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-14);

        let p = 3.0;
        let blocks = [BpBlock { n: 1, coeffs: vec![1.0] }, BpBlock { n: 3, coeffs: vec![1.0] }];
        // each unit vector has block norm max(1, v) = 1
        let r = bp_norm(p, &blocks).unwrap();
        assert!((r.value - 2f64.powf(1.0 / p)).abs() < 1e-14);
        assert!(bp_norm(4.0, &[BpBlock { n: 0, coeffs: vec![1.0] }]).is_err());
    }

    #[test]
    fn mixed_examples() {
        let v = vecw(4.0, &[1.0]);
        let r = mixed_p2w_norm(4.0, &[v.clone(), v.clone()], &[vec![1.0], vec![1.0]]).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-15);

        let w = vecw(4.0, &[0.3, 0.7, 1.1]);
        let x = vec![0.2, -1.5, 0.4];
        let one = mixed_p2w_norm(4.0, &[w.clone()], &[x.clone()]).unwrap();
        assert_eq!(one.value, xpw_norm_slice(&w, &x).unwrap().value);

        let zero = mixed_p2w_norm(4.0, &[w.clone(), w.clone()], &[vec![0.0; 3], vec![0.0]]).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(mixed_p2w_norm(4.0, &[w], &[]).is_err());
    }

    #[test]
    fn tensor_identity_two_by_two() {
        let w = vecw(4.0, &[1.0, 1.0]);
        let a = CoefficientTensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = tensor_norm(&w, &a).unwrap();
        assert_eq!(r.components.len(), 4);
        assert!((r.components["{}"] - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.components["{1,2}"] - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((r.components["{1}"] - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((r.components["{2}"] - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(r.branch, "{}");
        assert!((r.value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tensor_two_axis_display_terms() {
        // closed forms of the four n = 2 quantities written out directly
        let (p, wv) = (3.0, [0.4, 0.9, 1.3]);
        let w = vecw(p, &wv);
        let a = [[0.5, -1.0, 2.0], [0.0, 0.3, -0.7]];
        let t = CoefficientTensor::new(vec![2, 3], a.iter().flatten().copied().collect()).unwrap();
        let r = tensor_norm(&w, &t).unwrap();
        let mut none = 0.0;
        let mut all = 0.0;
        for i in 0..2 {
            for j in 0..3 {
                none += a[i][j].powi(2) * wv[i].powi(2) * wv[j].powi(2);
                all += f64::abs(a[i][j]).powf(p);
            }
        }
        let first: f64 = (0..2)
            .map(|i| (0..3).map(|j| a[i][j].powi(2) * wv[j].powi(2)).sum::<f64>().powf(p / 2.0))
            .sum::<f64>()
            .powf(1.0 / p);
        let second: f64 = (0..3)
            .map(|j| (0..2).map(|i| a[i][j].powi(2) * wv[i].powi(2)).sum::<f64>().powf(p / 2.0))
            .sum::<f64>()
            .powf(1.0 / p);
        assert!((r.components["{}"] - none.sqrt()).abs() < 1e-12);
        assert!((r.components["{1,2}"] - all.powf(1.0 / p)).abs() < 1e-12);
        assert!((r.components["{1}"] - first).abs() < 1e-12);
        assert!((r.components["{2}"] - second).abs() < 1e-12);
    }

    #[test]
    fn tensor_rank_cap() {
        let w = vecw(4.0, &[1.0]);
        let a = CoefficientTensor::new(vec![1; 3], vec![1.0]).unwrap();
        assert!(matches!(tensor_norm_capped(&w, &a, 2), Err(Error::SizeCap { .. })));
        assert!(tensor_norm_capped(&w, &a, 3).is_ok());
        let long = CoefficientTensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap();
        assert!(tensor_norm(&w, &long).is_err());
    }
}
