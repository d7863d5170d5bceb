//! Block bases of the weighted space and their norm-one projections.
//!
//! A block `E_j` of indices carries the vector `b_j = sum_{n in E_j} w_n^{2/(p-2)} e_n`.
//! Its `l^p` norm to the power `p` and its squared weighted `l^2` norm are both
//! the block mass `sigma_j = sum_{n in E_j} w_n^{2p/(p-2)}`, which is what makes
//! the normalized blocks isometric to the unit vectors of the space weighted by
//! `v_j = sigma_j^{(p-2)/(2p)}`.
//!
//! Index sets in a [`BlockPartition`] are 1-based (they name weights `w_1..w_M`);
//! block positions `j` are 0-based slice indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{ball_gauge, maximize_linear, AscentConfig, RestartRecord};
use crate::seqspace::{
    bp_block_weight, conjugate_index, lp_norm, mass_exponent, weighted_l2_norm, xpw_norm_slice, NormReport,
    WeightSequence,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub sets: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(sets: Vec<Vec<usize>>) -> Self {
        BlockPartition { sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Checks non-emptiness, disjointness and that every index lies in `1..=m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        let mut owner = vec![usize::MAX; m + 1];
        for (j, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::domain(format!("block {j} is empty")));
            }
            for &n in set {
                if n == 0 || n > m {
                    return Err(Error::domain(format!("index {n} in block {j} is outside 1..={m}")));
                }
                if owner[n] != usize::MAX {
                    return Err(Error::domain(format!("index {n} appears in blocks {} and {j}", owner[n])));
                }
                owner[n] = j;
            }
        }
        Ok(())
    }
}

/// Sparse vector: `(0-based coordinate, value)` pairs.
pub type Sparse = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSystem {
    pub weights: WeightSequence,
    pub partition: BlockPartition,
    pub sigma: Vec<f64>,
    pub b: Vec<Sparse>,
    pub b_tilde: Vec<Sparse>,
    pub v: Vec<f64>,
    pub d: Vec<Sparse>,
}

impl BlockSystem {
    pub fn p(&self) -> f64 {
        self.weights.p()
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Induced weights `v_j` as a weight sequence in their own right.
    pub fn induced_weights(&self) -> Result<WeightSequence> {
        WeightSequence::new(self.p(), self.v.clone())
    }

    pub fn ambient_len(&self) -> usize {
        self.weights.len()
    }

    /// Dense ambient vector `sum_j coeffs_j vecs_j`.
    pub fn combine(&self, vecs: &[Sparse], coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_len()];
        for (vec, &c) in vecs.iter().zip(coeffs) {
            for &(n, x) in vec {
                out[n] += c * x;
            }
        }
        out
    }
}

pub fn sparse_to_dense(v: &Sparse, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for &(n, x) in v {
        out[n] = x;
    }
    out
}

/// `<x, y>` in the weighted `l^2` inner product, for sparse vectors.
pub fn sparse_inner(w: &WeightSequence, x: &Sparse, y: &Sparse) -> f64 {
    let ws = w.weights();
    x.iter()
        .flat_map(|&(n, a)| y.iter().filter(move |&&(m, _)| m == n).map(move |&(_, b)| a * b * ws[n] * ws[n]))
        .sum()
}

pub fn build_blocks(w: &WeightSequence, partition: &BlockPartition) -> Result<BlockSystem> {
    partition.validate(w.len())?;
    let p = w.p();
    let s = mass_exponent(p);
    let coef_exp = 2.0 / (p - 2.0);
    let ws = w.weights();

    let mut sys = BlockSystem {
        weights: w.clone(),
        partition: partition.clone(),
        sigma: Vec::with_capacity(partition.len()),
        b: Vec::with_capacity(partition.len()),
        b_tilde: Vec::with_capacity(partition.len()),
        v: Vec::with_capacity(partition.len()),
        d: Vec::with_capacity(partition.len()),
    };
    for set in &partition.sets {
        let mut idx: Vec<usize> = set.iter().map(|n| n - 1).collect();
        idx.sort_unstable();
        let sigma: f64 = idx.iter().map(|&n| ws[n].powf(s)).sum();
        let b: Sparse = idx.iter().map(|&n| (n, ws[n].powf(coef_exp))).collect();
        let lp = sigma.powf(1.0 / p);
        let lp_pm1 = sigma.powf((p - 1.0) / p);
        sys.b_tilde.push(b.iter().map(|&(n, x)| (n, x / lp)).collect());
        sys.d.push(b.iter().map(|&(n, x)| (n, x / lp_pm1)).collect());
        sys.v.push(sigma.powf((p - 2.0) / (2.0 * p)));
        sys.sigma.push(sigma);
        sys.b.push(b);
    }
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    pub fn abs_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Ambient norm of `sum_j lambda_j b~_j` against the induced-weight norm of `lambda`.
pub fn block_isometry_check(sys: &BlockSystem, lambda: &[f64]) -> Result<Comparison> {
    if lambda.len() > sys.len() {
        return Err(Error::shape(format!("{} coefficients for {} blocks", lambda.len(), sys.len())));
    }
    let ambient = sys.combine(&sys.b_tilde, lambda);
    let lhs = xpw_norm_slice(&sys.weights, &ambient)?.value;
    let rhs = xpw_norm_slice(&sys.induced_weights()?, lambda)?.value;
    Ok(Comparison { lhs, rhs })
}

/// Packs indices left to right so that block `j` has `w'_j <= v_j <= 2 w'_j`.
///
/// An index whose mass would push a non-empty block past the upper bracket is
/// left out of the partition.
pub fn greedy_partition(w: &WeightSequence, targets: &[f64]) -> Result<BlockPartition> {
    if targets.is_empty() {
        return Err(Error::domain("no target weights given"));
    }
    if let Some(t) = targets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("target weight {t} is not positive")));
    }
    let s = w.mass_exponent();
    let masses = w.masses();
    let mut next = 0usize;
    let mut sets = Vec::with_capacity(targets.len());
    for (j, &target) in targets.iter().enumerate() {
        let lo = target.powf(s);
        let hi = (2.0 * target).powf(s);
        let mut set = Vec::new();
        let mut sigma = 0.0;
        loop {
            if next >= masses.len() {
                return Err(Error::SupplyExhausted(format!(
                    "indices ran out while filling block {j} (mass {sigma} of {lo} needed)"
                )));
            }
            let m = masses[next];
            next += 1;
            if sigma + m > hi {
                if set.is_empty() {
                    return Err(Error::domain(format!(
                        "index {next} has mass {m} above the bracket {hi} for block {j}"
                    )));
                }
                continue;
            }
            sigma += m;
            set.push(next);
            if sigma >= lo * (1.0 - 1e-12) {
                break;
            }
        }
        sets.push(set);
    }
    Ok(BlockPartition { sets })
}

/// `lambda_j = sigma_j^{-1} sum_{n in E_j} x_n w_n^{2(p-1)/(p-2)}`.
pub fn projection_coefficients(sys: &BlockSystem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() > sys.ambient_len() {
        return Err(Error::shape(format!("vector of length {} exceeds {} weights", x.len(), sys.ambient_len())));
    }
    let p = sys.p();
    let e = 2.0 * (p - 1.0) / (p - 2.0);
    let ws = sys.weights.weights();
    Ok(sys
        .b
        .iter()
        .zip(&sys.sigma)
        .map(|(b, sigma)| {
            b.iter().filter(|(n, _)| *n < x.len()).map(|&(n, _)| x[n] * ws[n].powf(e)).sum::<f64>() / sigma
        })
        .collect())
}

/// The norm-one projection `P(x) = sum_j lambda_j b_j`, as a dense ambient vector.
pub fn project(sys: &BlockSystem, x: &[f64]) -> Result<Vec<f64>> {
    let lambda = projection_coefficients(sys, x)?;
    Ok(sys.combine(&sys.b, &lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub lp_in: f64,
    pub lp_out: f64,
    pub l2w_in: f64,
    pub l2w_out: f64,
}

pub fn projection_contraction_check(sys: &BlockSystem, x: &[f64]) -> Result<ContractionReport> {
    let px = project(sys, x)?;
    let p = sys.p();
    let ws = sys.weights.weights();
    Ok(ContractionReport {
        lp_in: lp_norm(x, p),
        lp_out: lp_norm(&px, p),
        l2w_in: weighted_l2_norm(ws, x),
        l2w_out: weighted_l2_norm(ws, &px),
    })
}

/// `J` blocks whose masses all fall in `[(1/2N)^{2p/(p-2)}, 1/N]`.
///
/// Each block is filled left to right with as many indices as fit under `1/N`;
/// indices with mass above `1/N` on their own are skipped.
pub fn lpn_block_design(w: &WeightSequence, n: usize, j_count: usize) -> Result<BlockSystem> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if j_count == 0 {
        return Err(Error::domain("block count must be at least 1"));
    }
    let s = w.mass_exponent();
    let cap = 1.0 / n as f64;
    let cap_tol = cap * (1.0 + 1e-12);
    let floor = (0.5 / n as f64).powf(s);
    let masses = w.masses();

    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(j_count);
    let mut set = Vec::new();
    let mut sigma = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        if sets.len() == j_count {
            break;
        }
        if m > cap_tol {
            continue;
        }
        if sigma + m > cap_tol {
            if sigma >= floor {
                sets.push(std::mem::take(&mut set));
                sigma = 0.0;
                if sets.len() == j_count {
                    break;
                }
            } else {
                continue;
            }
        }
        sigma += m;
        set.push(i + 1);
    }
    if sets.len() < j_count && sigma >= floor && !set.is_empty() {
        sets.push(set);
    }
    if sets.len() < j_count {
        return Err(Error::SupplyExhausted(format!(
            "only {} of {j_count} blocks with mass in [{floor:e}, {cap}] fit in {} weights",
            sets.len(),
            w.len()
        )));
    }
    build_blocks(w, &BlockPartition { sets })
}

/// Ambient norm of `sum_k x_k b~_{j_k}` against `|x|_p`.
pub fn lpn_isometry_check(sys: &BlockSystem, n: usize, x: &[f64], blocks: &[usize]) -> Result<Comparison> {
    if x.len() != n || blocks.len() != n {
        return Err(Error::shape(format!("need {n} coefficients and {n} block indices")));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &j in blocks {
        if j >= sys.len() || !seen.insert(j) {
            return Err(Error::domain(format!("block indices {blocks:?} are not {n} distinct blocks")));
        }
    }
    let cap = (1.0 / n as f64) * (1.0 + 1e-12);
    if let Some(&j) = blocks.iter().find(|&&j| sys.sigma[j] > cap) {
        return Err(Error::domain(format!("block {j} has mass {} above 1/N", sys.sigma[j])));
    }
    let mut coeffs = vec![0.0; sys.len()];
    for (&j, &c) in blocks.iter().zip(x) {
        coeffs[j] = c;
    }
    let ambient = sys.combine(&sys.b_tilde, &coeffs);
    Ok(Comparison { lhs: xpw_norm_slice(&sys.weights, &ambient)?.value, rhs: lp_norm(x, sys.p()) })
}

/// Which linear functional [`dual_sup_unit_ball`] maximizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMode {
    /// `d -> sum_{m <= M} d_m`.
    HeadSum { m: usize },
    /// `d -> sum_k sum_{l <= n} lambda_k d_{k,l}`.
    Strip { lambda: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSupReport {
    pub closed_form: f64,
    pub numeric: f64,
    /// Value of the explicit maximizer pattern.
    pub witness_value: f64,
    /// Gauge `max(|d|_p, |v d|_2)` of that maximizer; at most 1.
    pub witness_gauge: f64,
    pub restarts: Vec<RestartRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSupOptions {
    pub ascent: AscentConfig,
    /// Seed the ascent with the explicit maximizer pattern as an extra start.
    pub warm_start: bool,
}

impl Default for DualSupOptions {
    fn default() -> Self {
        DualSupOptions { ascent: AscentConfig::default(), warm_start: true }
    }
}

/// Supremum of a linear functional over the unit ball of the space with
/// constant weights `(1/n)^{(p-2)/(2p)}`: closed form and numerical ascent.
pub fn dual_sup_unit_ball(p: f64, n: usize, mode: &DualMode, opts: &DualSupOptions) -> Result<DualSupReport> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("need 2 < p < inf, got {p}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let q = conjugate_index(p)?;
    let vn = bp_block_weight(p, n);
    let (c, closed_form, witness): (Vec<f64>, f64, Vec<f64>) = match mode {
        DualMode::HeadSum { m } => {
            let m = *m;
            if m == 0 {
                return Err(Error::domain("M must be at least 1"));
            }
            if m > n {
                return Err(Error::domain(format!("M = {m} exceeds n = {n}; no closed form")));
            }
            let mf = m as f64;
            (vec![1.0; m], mf.powf(1.0 / q), vec![mf.powf(-1.0 / p); m])
        }
        DualMode::Strip { lambda } => {
            if lambda.is_empty() || lambda.iter().any(|l| !l.is_finite()) {
                return Err(Error::domain("lambda must be a non-empty finite vector"));
            }
            let l2 = lp_norm(lambda, 2.0);
            let nf = n as f64;
            let c: Vec<f64> = lambda.iter().flat_map(|&l| std::iter::repeat(l).take(n)).collect();
            let scale = if l2 > 0.0 { nf.powf(-1.0 / p) / l2 } else { 0.0 };
            let witness = c.iter().map(|l| l * scale).collect();
            (c, nf.powf(1.0 / q) * l2, witness)
        }
    };
    let weights = vec![vn; c.len()];
    let witness_value = c.iter().zip(&witness).map(|(a, b)| a * b).sum();
    let witness_gauge = ball_gauge(&witness, p, &weights);
    let warm = opts.warm_start.then_some(witness.as_slice());
    let result = maximize_linear(&c, p, &weights, warm, &opts.ascent);
    Ok(DualSupReport { closed_form, numeric: result.value, witness_value, witness_gauge, restarts: result.restarts })
}

/// Ambient norm report of a dense vector, re-exported for convenience.
pub fn ambient_norm(sys: &BlockSystem, x: &[f64]) -> Result<NormReport> {
    xpw_norm_slice(&sys.weights, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqspace::{block_harmonic_weights, canonical_weights, CanonicalCase};

    fn ones(p: f64, m: usize) -> WeightSequence {
        WeightSequence::constant(p, 1.0, m).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn two_index_block() {
        let sys = build_blocks(&ones(4.0, 2), &BlockPartition::new(vec![vec![1, 2]])).unwrap();
        assert!(close(sys.sigma[0], 2.0));
        assert_eq!(sys.b[0], vec![(0, 1.0), (1, 1.0)]);
        assert!(close(sys.v[0], 2f64.powf(0.25)));
        let t = 2f64.powf(-0.25);
        assert!(close(sys.b_tilde[0][0].1, t) && close(sys.b_tilde[0][1].1, t));
    }

    #[test]
    fn singleton_block_is_unit_vector() {
        let sys = build_blocks(&ones(4.0, 3), &BlockPartition::new(vec![vec![1]])).unwrap();
        assert_eq!(sys.sigma[0], 1.0);
        assert_eq!(sys.b_tilde[0], vec![(0, 1.0)]);
        assert_eq!(sys.v[0], 1.0);
    }

    #[test]
    fn half_weights_block_mass() {
        let w = WeightSequence::new(4.0, vec![0.5, 0.5]).unwrap();
        let sys = build_blocks(&w, &BlockPartition::new(vec![vec![1, 2]])).unwrap();
        assert!(close(sys.sigma[0], 0.125));
        assert!(close(sys.v[0], 0.125f64.powf(0.25)));
    }

    #[test]
    fn invalid_partitions() {
        let w = ones(4.0, 3);
        assert!(build_blocks(&w, &BlockPartition::new(vec![vec![1, 2], vec![2]])).is_err());
        assert!(build_blocks(&w, &BlockPartition::new(vec![vec![4]])).is_err());
        assert!(build_blocks(&w, &BlockPartition::new(vec![vec![0]])).is_err());
        assert!(build_blocks(&w, &BlockPartition::new(vec![vec![]])).is_err());
    }

    #[test]
    fn isometry_examples() {
        let sys = build_blocks(&ones(4.0, 4), &BlockPartition::new(vec![vec![1, 2], vec![3, 4]])).unwrap();
        let r = block_isometry_check(&sys, &[1.0, 1.0]).unwrap();
        assert!(close(r.rhs, 2f64.powf(0.75)));
        assert!(close(r.lhs, r.rhs));
        let r = block_isometry_check(&sys, &[0.0, 0.0]).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));

        let w = WeightSequence::new(4.0, vec![0.5, 0.5, 0.9]).unwrap();
        let sys = build_blocks(&w, &BlockPartition::new(vec![vec![1, 2]])).unwrap();
        let r = block_isometry_check(&sys, &[1.0]).unwrap();
        assert!(sys.v[0] <= 1.0);
        assert!(close(r.lhs, 1.0) && close(r.rhs, 1.0));
    }

    #[test]
    fn greedy_examples() {
        let w = canonical_weights(4.0, CanonicalCase::Star, 10).unwrap();
        let part = greedy_partition(&w, &[0.5f64.powf(0.25)]).unwrap();
        assert_eq!(part.sets, vec![vec![1]]);

        // target equal to the induced weight of the exact prefix {1, 2, 3}
        let sigma: f64 = w.masses()[..3].iter().sum();
        let part = greedy_partition(&w, &[sigma.powf(0.25)]).unwrap();
        assert_eq!(part.sets, vec![vec![1, 2, 3]]);

        let err = greedy_partition(&w, &[1.0; 20]).unwrap_err();
        assert!(matches!(err, Error::SupplyExhausted(_)));
        // a first index far heavier than the bracket allows
        assert!(matches!(greedy_partition(&w, &[0.01]), Err(Error::Domain(_))));
    }

    #[test]
    fn projection_examples() {
        let w = ones(4.0, 3);
        let sys = build_blocks(&w, &BlockPartition::new(vec![vec![1, 2]])).unwrap();
        assert!(close(projection_coefficients(&sys, &[1.0, 0.0, 0.0]).unwrap()[0], 0.5));
        assert_eq!(projection_coefficients(&sys, &[0.0, 0.0, 7.0]).unwrap(), vec![0.0]);
        let b = sparse_to_dense(&sys.b[0], 3);
        assert!(close(projection_coefficients(&sys, &b).unwrap()[0], 1.0));

        let r = projection_contraction_check(&sys, &[0.0; 3]).unwrap();
        assert_eq!(r.lp_out, 0.0);
        let r = projection_contraction_check(&sys, &b).unwrap();
        assert!(close(r.lp_in, r.lp_out) && close(r.l2w_in, r.l2w_out));
    }

    #[test]
    fn lpn_design_recipe() {
        let w = block_harmonic_weights(4.0, 1, 6).unwrap();
        let sys = lpn_block_design(&w, 1, 6).unwrap();
        for (j, set) in sys.partition.sets.iter().enumerate() {
            assert_eq!(set.len(), j + 1);
            assert!(close(sys.sigma[j], 1.0));
        }
        let w = block_harmonic_weights(4.0, 2, 6).unwrap();
        let sys = lpn_block_design(&w, 2, 5).unwrap();
        for &s in &sys.sigma {
            assert!(close(s, 0.5));
            assert!(s >= 0.25f64.powi(4));
        }
        assert!(lpn_block_design(&w, 2, 0).is_err());
        assert!(matches!(lpn_block_design(&w, 2, 50), Err(Error::SupplyExhausted(_))));
    }

    #[test]
    fn lpn_isometry_examples() {
        let w = block_harmonic_weights(4.0, 2, 8).unwrap();
        let sys = lpn_block_design(&w, 2, 4).unwrap();
        let r = lpn_isometry_check(&sys, 2, &[1.0, 1.0], &[0, 3]).unwrap();
        assert!(close(r.lhs, 2f64.powf(0.25)) && close(r.rhs, 2f64.powf(0.25)));
        let r = lpn_isometry_check(&sys, 2, &[1.0, 0.0], &[1, 2]).unwrap();
        assert!(close(r.lhs, 1.0) && close(r.rhs, 1.0));
        let r = lpn_isometry_check(&sys, 2, &[0.0, 0.0], &[1, 2]).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(lpn_isometry_check(&sys, 2, &[1.0, 1.0], &[1, 1]).is_err());
    }

    #[test]
    fn dual_sup_examples() {
        let opts = DualSupOptions::default();
        let r = dual_sup_unit_ball(4.0, 4, &DualMode::HeadSum { m: 4 }, &opts).unwrap();
        assert!(close(r.closed_form, 4f64.powf(0.75)));
        assert!((r.numeric - r.closed_form).abs() <= 1e-6 * r.closed_form);
        assert!(close(r.witness_value, r.closed_form));

        let r = dual_sup_unit_ball(4.0, 1, &DualMode::HeadSum { m: 1 }, &opts).unwrap();
        assert!(close(r.closed_form, 1.0));
        assert!((r.numeric - 1.0).abs() < 1e-6);

        let r = dual_sup_unit_ball(4.0, 2, &DualMode::Strip { lambda: vec![1.0] }, &opts).unwrap();
        assert!(close(r.closed_form, 2f64.powf(0.75)));
        assert!((r.numeric - r.closed_form).abs() <= 1e-6 * r.closed_form);
        assert!(r.witness_gauge <= 1.0 + 1e-12);

        assert!(dual_sup_unit_ball(4.0, 2, &DualMode::HeadSum { m: 3 }, &opts).is_err());
    }
}
