use super::function::{check_cells, odometer, StepFunction};
use super::space::{refine, CoordKind, Coordinate, CoordinateSpace};
use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-10;

/// The single coordinate of a function on a space of at most one coordinate,
/// with values spread over all of its cells.
fn single_coordinate(f: &StepFunction) -> Result<(Coordinate, Vec<f64>)> {
    match f.space().len() {
        0 => Ok((Coordinate::unit(), vec![f.values()[0]])),
        1 => {
            let c = f.space().coords[0].clone();
            let vals = if f.support().is_empty() { vec![f.values()[0]; c.cells()] } else { f.values().to_vec() };
            Ok((c, vals))
        }
        n => Err(Error::shape(format!("expected a function of one coordinate, got a space of {n}"))),
    }
}

/// `T f(s) = k^{-1/p} f(s/k)` on `[0, k)` and `0` on `[k, 1)`.
pub fn squeeze(f: &StepFunction, k: f64, p: f64) -> Result<StepFunction> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::domain(format!("squeeze factor must lie in (0, 1], got {k}")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("exponent must be positive, got {p}")));
    }
    let (coord, vals) = single_coordinate(f)?;
    if coord.kind() != CoordKind::Interval {
        return Err(Error::domain("squeeze acts on interval coordinates"));
    }
    let scale = k.powf(-1.0 / p);
    let mut values: Vec<f64> = vals.iter().map(|v| scale * v).collect();
    if k == 1.0 {
        return StepFunction::on_coordinate(coord, values);
    }
    let mut probs: Vec<f64> = coord.probs().iter().map(|q| k * q).collect();
    probs.push(1.0 - k);
    values.push(0.0);
    StepFunction::on_coordinate(Coordinate::interval(probs)?, values)
}

/// `f ∘ π_i`: place a one-coordinate function on coordinate `i` of `ambient`.
///
/// A trivial (one-cell) ambient coordinate is replaced by the partition of `f`;
/// otherwise the two partitions are refined together.
pub fn lift(f: &StepFunction, ambient: &CoordinateSpace, i: usize) -> Result<StepFunction> {
    let target = ambient
        .coords
        .get(i)
        .ok_or_else(|| Error::domain(format!("coordinate {i} outside a space of {}", ambient.len())))?;
    let (coord, vals) = single_coordinate(f)?;
    let (coord, values) = if target.cells() == 1 {
        (coord, vals)
    } else {
        let r = refine(target, &coord)?;
        let values = r.right.iter().map(|&c| vals[c]).collect();
        (r.coord, values)
    };
    let mut space = ambient.clone();
    space.coords[i] = coord;
    StepFunction::new(space, vec![i], values)
}

/// Average over every coordinate outside `keep`.
///
/// Coordinates in `keep` that the function does not use are irrelevant.
pub fn cond_expect(f: &StepFunction, keep: &[usize]) -> StepFunction {
    let kept: Vec<bool> = f.support().iter().map(|c| keep.contains(c)).collect();
    if kept.iter().all(|&k| k) {
        return f.clone();
    }
    let support: Vec<usize> = f.support().iter().zip(&kept).filter(|(_, &k)| k).map(|(&c, _)| c).collect();
    let out_dims: Vec<usize> = support.iter().map(|&c| f.space().coords[c].cells()).collect();
    let mut out_strides = vec![0usize; kept.len()];
    let mut s = 1;
    for a in (0..kept.len()).rev() {
        if kept[a] {
            out_strides[a] = s;
            s *= f.space().coords[f.support()[a]].cells();
        }
    }
    let probs: Vec<&[f64]> = f.support().iter().map(|&c| f.space().coords[c].probs()).collect();
    let mut values = vec![0.0; out_dims.iter().product()];
    let mut k = 0;
    let vals = f.values();
    odometer(&f.dims(), |idx| {
        let mut w = 1.0;
        let mut off = 0;
        for (a, &i) in idx.iter().enumerate() {
            if kept[a] {
                off += i * out_strides[a];
            } else {
                w *= probs[a][i];
            }
        }
        values[off] += vals[k] * w;
        k += 1;
    });
    StepFunction::from_parts(f.space().clone(), support, values)
}

/// Conditional expectation onto the branch σ-algebra of the coordinates in `s`.
pub fn branch_project(f: &StepFunction, s: &[usize]) -> Result<StepFunction> {
    if let Some(&c) = s.iter().find(|&&c| c >= f.space().len()) {
        return Err(Error::domain(format!("coordinate {c} outside a space of {}", f.space().len())));
    }
    Ok(cond_expect(f, s))
}

/// An orthogonal mean-zero family of functions of a single coordinate.
#[derive(Debug, Clone)]
pub struct DesignatedSpan {
    coordinate: usize,
    members: Vec<StepFunction>,
    norms_sq: Vec<f64>,
}

impl DesignatedSpan {
    pub fn new(coordinate: usize, members: Vec<StepFunction>) -> Result<Self> {
        let mut norms_sq = Vec::with_capacity(members.len());
        for (j, y) in members.iter().enumerate() {
            if y.support().iter().any(|&c| c != coordinate) {
                return Err(Error::domain(format!("member {j} depends on coordinates other than {coordinate}")));
            }
            let n2 = y.inner(y)?;
            if !(n2 > 0.0) {
                return Err(Error::domain(format!("member {j} is zero")));
            }
            if y.integrate().abs() > ORTHO_TOL * n2.sqrt() {
                return Err(Error::domain(format!("member {j} does not have mean zero")));
            }
            norms_sq.push(n2);
        }
        for a in 0..members.len() {
            for b in 0..a {
                let ip = members[a].inner(&members[b])?;
                if ip.abs() > ORTHO_TOL * (norms_sq[a] * norms_sq[b]).sqrt() {
                    return Err(Error::domain(format!("members {b} and {a} are not orthogonal (inner product {ip:e})")));
                }
            }
        }
        Ok(DesignatedSpan { coordinate, members, norms_sq })
    }

    /// Squeeze each function of `[0,1)` by `k`, then lift it to coordinate `i`.
    pub fn squeezed(family: &[StepFunction], k: f64, p: f64, ambient: &CoordinateSpace, i: usize) -> Result<Self> {
        let members = family
            .iter()
            .map(|x| lift(&squeeze(x, k, p)?, ambient, i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(i, members)
    }

    pub fn coordinate(&self) -> usize {
        self.coordinate
    }

    pub fn members(&self) -> &[StepFunction] {
        &self.members
    }
}

/// Conditional expectation onto the designated coordinate followed by
/// the orthogonal projection onto the span.
pub fn s_projection(f: &StepFunction, span: &DesignatedSpan) -> Result<StepFunction> {
    let g = cond_expect(f, &[span.coordinate]);
    let coeffs = span
        .members
        .iter()
        .zip(&span.norms_sq)
        .map(|(y, n2)| Ok(g.inner(y)? / n2))
        .collect::<Result<Vec<_>>>()?;
    StepFunction::linear_combination(f.space(), &span.members, &coeffs)
}

/// `b0 ⊕ b1`: `2^{1/p} b0` where a fresh fair coin shows 0, `2^{1/p} b1` where it shows 1.
pub fn disjoint_sum(b0: &StepFunction, b1: &StepFunction, p: f64) -> Result<StepFunction> {
    if b0.space().len() != b1.space().len() {
        return Err(Error::shape(format!(
            "space mismatch: {} vs {} coordinates",
            b0.space().len(),
            b1.space().len()
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::domain(format!("exponent must be >= 1, got {p}")));
    }
    let c0 = b0.zip_with(b1, |a, _| a)?;
    let c1 = b0.zip_with(b1, |_, b| b)?;
    check_cells(2 * c0.cell_count() as u128, "disjoint sum cells")?;
    let s = 2f64.powf(1.0 / p);
    let mut space = c0.space().clone();
    let eps = space.len();
    space.coords.push(Coordinate::two_point());
    let mut support = c0.support().to_vec();
    support.push(eps);
    let values = c0.values().iter().zip(c1.values()).flat_map(|(a, b)| [s * a, s * b]).collect();
    StepFunction::new(space, support, values)
}

/// `u_k(s) = 2^{k/p} 1_{[s/2^k, (s+1)/2^k)}` for `s = 0 .. 2^k - 1`.
pub fn dyadic_level(k: u32, p: f64) -> Result<Vec<StepFunction>> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("exponent must be >= 1, got {p}")));
    }
    if k > 20 {
        return Err(Error::SizeCap { what: "dyadic level".into(), needed: 1u128 << k, cap: 1 << 20 });
    }
    let n = 1u64 << k;
    let h = 1.0 / n as f64;
    let c = 2f64.powf(k as f64 / p);
    (0..n)
        .map(|s| Ok(StepFunction::indicator(s as f64 * h, (s + 1) as f64 * h)?.scale(c)))
        .collect()
}

/// Martingale differences along `order`: `f_0 = E f`, `f_i = E_{T_i} f - E_{T_{i-1}} f`
/// with `T_i = {order[0], .., order[i-1]}`.
pub fn haar_decompose(f: &StepFunction, order: &[usize]) -> Result<Vec<StepFunction>> {
    if f.space().coords.iter().any(|c| c.kind() != CoordKind::TwoPoint) {
        return Err(Error::domain("the Haar ladder needs every coordinate two-point"));
    }
    let m = f.space().len();
    let mut seen = vec![false; m];
    for &c in order {
        if c >= m || std::mem::replace(&mut seen[c], true) {
            return Err(Error::domain(format!("order {order:?} is not a permutation of 0..{m}")));
        }
    }
    if order.len() != m {
        return Err(Error::domain(format!("order {order:?} is not a permutation of 0..{m}")));
    }
    let mut parts = Vec::with_capacity(m + 1);
    let mut prev = cond_expect(f, &[]);
    parts.push(prev.clone());
    for i in 1..=m {
        let cur = cond_expect(f, &order[..i]);
        parts.push(cur.sub(&prev)?);
        prev = cur;
    }
    Ok(parts)
}

/// Natural coordinate order `0, 1, .., m-1`.
pub fn haar_decompose_natural(f: &StepFunction) -> Result<Vec<StepFunction>> {
    let order: Vec<usize> = (0..f.space().len()).collect();
    haar_decompose(f, &order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_fn(probs: &[f64], values: &[f64]) -> StepFunction {
        StepFunction::on_coordinate(Coordinate::interval(probs.to_vec()).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn squeeze_norm_scaling() {
        let f = interval_fn(&[0.25, 0.5, 0.25], &[2.0, -1.0, 3.0]);
        let t = squeeze(&f, 1.0 / 16.0, 4.0).unwrap();
        assert!((t.lp_norm(2.0).unwrap() - 0.5 * f.lp_norm(2.0).unwrap()).abs() < 1e-14);
        assert!((t.lp_norm(4.0).unwrap() - f.lp_norm(4.0).unwrap()).abs() < 1e-14);
        let same = squeeze(&f, 1.0, 3.0).unwrap();
        assert!(same.approx_eq(&f, 0.0).unwrap());
        let mz = interval_fn(&[0.5, 0.5], &[1.0, -1.0]);
        assert!(squeeze(&mz, 0.3, 3.0).unwrap().integrate().abs() < 1e-16);
        assert!(squeeze(&f, 0.0, 3.0).is_err());
        let two = StepFunction::rademacher(2, 0).unwrap();
        assert_eq!(squeeze(&two, 0.5, 3.0).unwrap_err().kind(), "shape");
    }

    #[test]
    fn lift_places_coordinate() {
        let ambient = CoordinateSpace::unit_intervals(3);
        let f = interval_fn(&[0.3, 0.7], &[1.0, 2.0]);
        let g = interval_fn(&[0.6, 0.4], &[-1.0, 5.0]);
        let lf = lift(&f, &ambient, 0).unwrap();
        let lg = lift(&g, &ambient, 2).unwrap();
        assert_eq!(lf.support(), &[0]);
        assert!((lf.inner(&lg).unwrap() - f.integrate() * g.integrate()).abs() < 1e-14);
        assert_eq!(lf.lp_norm(3.0).unwrap(), f.lp_norm(3.0).unwrap());
        assert!(lift(&f, &ambient, 3).is_err());
        let c = lift(&StepFunction::constant(CoordinateSpace::default(), 2.0), &ambient, 1).unwrap();
        assert_eq!(c.integrate(), 2.0);
    }

    #[test]
    fn conditional_expectation_basics() {
        let space = CoordinateSpace::new(vec![
            Coordinate::interval(vec![0.25, 0.75]).unwrap(),
            Coordinate::interval(vec![0.5, 0.5]).unwrap(),
        ]);
        let f = StepFunction::new(space, vec![0, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(cond_expect(&f, &[0, 1]).approx_eq(&f, 0.0).unwrap());
        let e = cond_expect(&f, &[]);
        assert_eq!(e.support(), &[] as &[usize]);
        assert!((e.values()[0] - f.integrate()).abs() < 1e-15);
        let e0 = cond_expect(&f, &[0]);
        assert_eq!(e0.values(), &[1.5, 3.5]);
        let e1 = cond_expect(&f, &[1]);
        assert_eq!(e1.values(), &[0.25 * 1.0 + 0.75 * 3.0, 0.25 * 2.0 + 0.75 * 4.0]);
        assert!(cond_expect(&e0, &[]).approx_eq(&e, 1e-15).unwrap());
    }

    #[test]
    fn s_projection_contract() {
        let p = 4.0;
        let ambient = CoordinateSpace::unit_intervals(2);
        let haar = [
            interval_fn(&[0.5, 0.5], &[1.0, -1.0]),
            interval_fn(&[0.25, 0.25, 0.5], &[1.0, -1.0, 0.0]),
        ];
        let span = DesignatedSpan::squeezed(&haar, 0.25, p, &ambient, 1).unwrap();
        let one = StepFunction::constant(ambient.clone(), 1.0);
        assert!(s_projection(&one, &span).unwrap().max_abs() < 1e-15);
        let y = span.members()[0].scale(2.0).add(&span.members()[1]).unwrap();
        assert!(s_projection(&y, &span).unwrap().approx_eq(&y, 1e-13).unwrap());
        let bad = [haar[0].clone(), interval_fn(&[0.5, 0.5], &[1.0, 0.0])];
        assert!(DesignatedSpan::new(0, bad.iter().map(|f| lift(f, &ambient, 0).unwrap()).collect()).is_err());
    }

    #[test]
    fn disjoint_sum_identities() {
        let p = 3.0;
        let space = CoordinateSpace::unit_intervals(1);
        let one = StepFunction::constant(space.clone(), 1.0);
        let zero = StepFunction::constant(space.clone(), 0.0);
        let s = disjoint_sum(&one, &one, p).unwrap();
        assert!(s.approx_eq(&StepFunction::constant(CoordinateSpace::new(vec![Coordinate::unit(), Coordinate::two_point()]), 2f64.powf(1.0 / p)), 1e-15).unwrap());
        assert_eq!(disjoint_sum(&zero, &zero, p).unwrap().max_abs(), 0.0);
        let b = lift(&interval_fn(&[0.2, 0.8], &[3.0, -1.0]), &space, 0).unwrap();
        let bz = disjoint_sum(&b, &zero, p).unwrap();
        assert!((bz.lp_norm(p).unwrap() - b.lp_norm(p).unwrap()).abs() < 1e-14);
        assert!(disjoint_sum(&b, &StepFunction::constant(CoordinateSpace::unit_intervals(2), 0.0), p).is_err());
    }

    #[test]
    fn dyadic_refinement() {
        let p = 3.0;
        let u1 = dyadic_level(1, p).unwrap();
        let u2 = dyadic_level(2, p).unwrap();
        assert_eq!(dyadic_level(0, p).unwrap()[0].values(), &[1.0]);
        for s in 0..2 {
            let rhs = u2[2 * s].add(&u2[2 * s + 1]).unwrap().scale(2f64.powf(-1.0 / p));
            assert!(u1[s].approx_eq(&rhs, 1e-14).unwrap());
        }
        let sum = StepFunction::linear_combination(&CoordinateSpace::default(), &u2, &[1.0; 4]).unwrap();
        assert!((sum.lp_norm(p).unwrap() - 4f64.powf(1.0 / p)).abs() < 1e-14);
    }

    #[test]
    fn haar_trivial_cases() {
        let m = 3;
        let c = StepFunction::constant(CoordinateSpace::two_point(m), 2.5);
        let parts = haar_decompose_natural(&c).unwrap();
        assert_eq!(parts.len(), m + 1);
        assert_eq!(parts[0].values(), &[2.5]);
        assert!(parts[1..].iter().all(|f| f.max_abs() == 0.0));
        let r = StepFunction::rademacher(m, 0).unwrap();
        let parts = haar_decompose_natural(&r).unwrap();
        assert!(parts[1].approx_eq(&r, 0.0).unwrap());
        assert!(parts[0].max_abs() == 0.0 && parts[2].max_abs() == 0.0 && parts[3].max_abs() == 0.0);
        assert!(haar_decompose(&r, &[0, 0, 1]).is_err());
        assert!(haar_decompose_natural(&StepFunction::indicator(0.0, 0.5).unwrap()).is_err());
    }
}
