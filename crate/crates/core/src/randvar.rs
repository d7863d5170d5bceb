//! Independent random variables as step functions, and the moment
//! inequalities for their sums.
//!
//! Exact mode enumerates every cell of the product space; Monte Carlo mode
//! samples each member independently from a seeded ChaCha8 stream.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqspace::{check_exponent, mass_exponent, WeightSequence};
use crate::stepfn::{lift, Coordinate, CoordinateSpace, StepFunction};

const SYMMETRY_TOL: f64 = 1e-12;

/// Takes `+α`, `0`, `-α` with probabilities `μ/2`, `1-μ`, `μ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeValuedRV {
    pub alpha: f64,
    pub mu: f64,
}

impl ThreeValuedRV {
    pub fn new(alpha: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::domain(format!("mu must lie in (0, 1], got {mu}")));
        }
        Ok(ThreeValuedRV { alpha, mu })
    }

    /// `α μ^{1/r}`
    pub fn lr_norm(&self, r: f64) -> f64 {
        self.alpha * self.mu.powf(1.0 / r)
    }

    pub fn step_function(&self) -> StepFunction {
        let (probs, values) = if self.mu == 1.0 {
            (vec![0.5, 0.5], vec![self.alpha, -self.alpha])
        } else {
            let h = 0.5 * self.mu;
            (vec![h, 1.0 - self.mu, h], vec![self.alpha, 0.0, -self.alpha])
        };
        let coord = Coordinate::interval(probs).expect("three-valued cells are a valid partition");
        StepFunction::on_coordinate(coord, values).expect("three values on three cells")
    }
}

/// `μ = w^{2p/(p-2)}`, `α = μ^{-1/p}`, so that `‖f‖_p = 1` and `‖f‖_2 = w`.
pub fn make_three_valued(p: f64, w: f64) -> Result<ThreeValuedRV> {
    check_exponent(p)?;
    let s = mass_exponent(p);
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::domain(format!("weight must lie in (0, 1], got {w}")));
    }
    let mu = if w == 1.0 { 1.0 } else { w.powf(s) };
    if mu == 0.0 {
        return Err(Error::domain(format!("weight {w} underflows its support mass")));
    }
    ThreeValuedRV::new(mu.powf(-1.0 / p), mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum FamilyKind {
    ThreeValued,
    Rademacher,
    Stable(f64),
    Custom,
}

#[derive(Debug, Clone)]
enum Member {
    Step(StepFunction),
    /// symmetric `T`-stable law with characteristic function `exp(-|x|^T)`
    Stable(f64),
}

/// Independent variables, member `n` living on coordinate `n`.
#[derive(Debug, Clone)]
pub struct RVFamily {
    kind: FamilyKind,
    members: Vec<Member>,
}

impl RVFamily {
    pub fn three_valued(p: f64, weights: &[f64]) -> Result<Self> {
        let members = weights
            .iter()
            .map(|&w| Ok(Member::Step(make_three_valued(p, w)?.step_function())))
            .collect::<Result<_>>()?;
        Ok(RVFamily { kind: FamilyKind::ThreeValued, members })
    }

    pub fn from_weights(w: &WeightSequence) -> Result<Self> {
        Self::three_valued(w.p(), w.weights())
    }

    pub fn rademacher(n: usize) -> Self {
        let r = StepFunction::on_coordinate(Coordinate::interval(vec![0.5, 0.5]).unwrap(), vec![1.0, -1.0]).unwrap();
        RVFamily { kind: FamilyKind::Rademacher, members: vec![Member::Step(r); n] }
    }

    /// Sampling only: stable members have no step-function form.
    pub fn stable(t: f64, n: usize) -> Result<Self> {
        check_stable_index(t)?;
        Ok(RVFamily { kind: FamilyKind::Stable(t), members: vec![Member::Stable(t); n] })
    }

    /// Arbitrary functions of one coordinate each.
    pub fn custom(members: Vec<StepFunction>) -> Result<Self> {
        for (n, f) in members.iter().enumerate() {
            if f.space().len() > 1 {
                return Err(Error::shape(format!("member {n} depends on more than one coordinate")));
            }
        }
        Ok(RVFamily { kind: FamilyKind::Custom, members: members.into_iter().map(Member::Step).collect() })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member `n` as a one-coordinate step function.
    pub fn member(&self, n: usize) -> Result<&StepFunction> {
        match self.members.get(n) {
            Some(Member::Step(f)) => Ok(f),
            Some(Member::Stable(_)) => Err(Error::domain("stable members have no exact form")),
            None => Err(Error::shape(format!("member {n} of a family of {}", self.len()))),
        }
    }

    /// Member `n` lifted onto coordinate `n` of an `N`-fold product.
    pub fn lifted(&self, n: usize) -> Result<StepFunction> {
        lift(self.member(n)?, &CoordinateSpace::unit_intervals(self.len()), n)
    }

    pub fn is_symmetric(&self, n: usize) -> Result<bool> {
        Ok(is_symmetric(self.member(n)?))
    }

    fn check_coeffs(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.len() {
            return Err(Error::shape(format!("{} coefficients for {} members", c.len(), self.len())));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(())
    }

    /// `Σ c_n f_n` as one step function on the product space.
    pub fn sum(&self, c: &[f64]) -> Result<StepFunction> {
        self.check_coeffs(c)?;
        let mut needed: u128 = 1;
        for (n, &cn) in c.iter().enumerate() {
            if cn != 0.0 {
                needed = needed.saturating_mul(self.member(n)?.cell_count() as u128);
            }
        }
        if needed > crate::stepfn::DEFAULT_MAX_CELLS as u128 {
            return Err(Error::SizeCap {
                what: "exact enumeration cells".into(),
                needed,
                cap: crate::stepfn::DEFAULT_MAX_CELLS as u128,
            });
        }
        let mut acc = StepFunction::constant(CoordinateSpace::unit_intervals(self.len()), 0.0);
        for (n, &cn) in c.iter().enumerate() {
            if cn != 0.0 {
                acc = acc.zip_with(&self.lifted(n)?, |a, b| a + cn * b)?;
            }
        }
        Ok(acc)
    }
}

fn is_symmetric(f: &StepFunction) -> bool {
    let mut masses: Vec<(f64, f64)> = Vec::new();
    f.for_each_cell(|_, v, w| masses.push((v, w)));
    let near = |a: f64, b: f64| (a - b).abs() <= SYMMETRY_TOL * (1.0 + a.abs());
    let mass_at = |x: f64| -> f64 { masses.iter().filter(|(u, _)| near(x, *u)).map(|m| m.1).sum() };
    masses.iter().all(|&(v, _)| (mass_at(v) - mass_at(-v)).abs() <= SYMMETRY_TOL)
}

/// Exact `‖Σ c_n f_n‖_r` over every cell of the product space.
pub fn exact_pnorm_of_sum(family: &RVFamily, c: &[f64], r: f64) -> Result<f64> {
    family.sum(c)?.lp_norm(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// `(mean |S|^r)^{1/r}`
    pub estimate: f64,
    /// delta-method error of `estimate`
    pub stderr: f64,
    /// sample mean of `|S|^r`
    pub moment: f64,
    pub moment_stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

fn check_stable_index(t: f64) -> Result<()> {
    if !(t > 1.0 && t <= 2.0) {
        return Err(Error::domain(format!("stable index must lie in (1, 2], got {t}")));
    }
    Ok(())
}

fn draw_stable(t: f64, rng: &mut ChaCha8Rng) -> f64 {
    let v = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let w: f64 = Exp1.sample(rng);
    (t * v).sin() / v.cos().powf(1.0 / t) * (((1.0 - t) * v).cos() / w).powf((1.0 - t) / t)
}

/// Symmetric `T`-stable draws with characteristic function `exp(-|x|^T)`
/// (Chambers-Mallows-Stuck).
pub fn sample_stable(t: f64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    check_stable_index(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials).map(|_| draw_stable(t, &mut rng)).collect())
}

fn draw_member(m: &Member, rng: &mut ChaCha8Rng) -> f64 {
    match m {
        Member::Step(f) => {
            let u: f64 = rng.random();
            f.value_at(&[u]).expect("members have one coordinate")
        }
        Member::Stable(t) => draw_stable(*t, rng),
    }
}

/// Monte Carlo `‖Σ c_n f_n‖_r`, reproducible for a given seed.
pub fn mc_pnorm_of_sum(family: &RVFamily, c: &[f64], r: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    family.check_coeffs(c)?;
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    if !(r >= 1.0) {
        return Err(Error::domain(format!("L^r norm needs r >= 1, got {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for t in 0..trials {
        let mut s = 0.0;
        for (m, &cn) in family.members.iter().zip(c) {
            let x = draw_member(m, &mut rng);
            s += cn * x;
        }
        let y = s.abs().powf(r);
        // Welford
        let d = y - mean;
        mean += d / (t + 1) as f64;
        m2 += d * (y - mean);
    }
    let var = if trials > 1 { m2 / (trials - 1) as f64 } else { 0.0 };
    let moment_stderr = (var / trials as f64).sqrt();
    let estimate = mean.powf(1.0 / r);
    let stderr = if mean > 0.0 { moment_stderr * estimate / (r * mean) } else { 0.0 };
    Ok(McEstimate { estimate, stderr, moment: mean, moment_stderr, trials, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// `lhs` against `rhs`, with any auxiliary quantities in `details`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

impl Report {
    fn exact(lhs: f64, rhs: f64) -> Self {
        Report { lhs, rhs, ratio: ratio(lhs, rhs), mode: Mode::Exact, trials: None, seed: None, details: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }
}

fn sum_norm(family: &RVFamily, c: &[f64], r: f64, eval: Evaluation) -> Result<(f64, Mode, Option<u64>, Option<u64>, Option<f64>)> {
    match eval {
        Evaluation::Exact => Ok((exact_pnorm_of_sum(family, c, r)?, Mode::Exact, None, None, None)),
        Evaluation::MonteCarlo { trials, seed } => {
            let e = mc_pnorm_of_sum(family, c, r, trials, seed)?;
            Ok((e.estimate, Mode::Mc, Some(trials), Some(seed), Some(e.stderr)))
        }
    }
}

fn require_symmetric(family: &RVFamily, c: &[f64]) -> Result<()> {
    for (n, &cn) in c.iter().enumerate() {
        if cn != 0.0 && !family.is_symmetric(n)? {
            return Err(Error::domain(format!("member {n} is not symmetric")));
        }
    }
    Ok(())
}

/// `S = ‖Σ c_n f_n‖_p` against
/// `L = max((Σ ‖c_n f_n‖_p^p)^{1/p}, (Σ ‖c_n f_n‖_2^2)^{1/2})`.
///
/// `lhs = S`, `rhs = L`. For symmetric members `S >= L`.
pub fn rosenthal_check(family: &RVFamily, c: &[f64], p: f64, eval: Evaluation) -> Result<Report> {
    if !(p > 2.0) {
        return Err(Error::domain(format!("Rosenthal's inequality needs p > 2, got {p}")));
    }
    family.check_coeffs(c)?;
    if eval == Evaluation::Exact {
        require_symmetric(family, c)?;
    }
    let (mut sp, mut s2) = (0.0, 0.0);
    for (n, &cn) in c.iter().enumerate() {
        if cn == 0.0 {
            continue;
        }
        let f = family.member(n)?;
        sp += (cn.abs() * f.lp_norm(p)?).powf(p);
        s2 += (cn * f.lp_norm(2.0)?).powi(2);
    }
    let (lp_term, l2_term) = (sp.powf(1.0 / p), s2.sqrt());
    let (s, mode, trials, seed, stderr) = sum_norm(family, c, p, eval)?;
    let mut rep = Report::exact(s, lp_term.max(l2_term)).with("lp_term", lp_term).with("l2_term", l2_term);
    rep.mode = mode;
    rep.trials = trials;
    rep.seed = seed;
    if let Some(e) = stderr {
        rep = rep.with("stderr", e);
    }
    Ok(rep)
}

/// `‖Σ c_n f_n‖_q` against `(Σ ‖c_n f_n‖_q^q)^{1/q}` for `1 <= q < 2`.
pub fn lemma24_check(family: &RVFamily, c: &[f64], q: f64) -> Result<Report> {
    if !(1.0..2.0).contains(&q) {
        return Err(Error::domain(format!("q must lie in [1, 2), got {q}")));
    }
    family.check_coeffs(c)?;
    let mut sq = 0.0;
    for (n, &cn) in c.iter().enumerate() {
        if cn != 0.0 {
            sq += (cn.abs() * family.member(n)?.lp_norm(q)?).powf(q);
        }
    }
    Ok(Report::exact(exact_pnorm_of_sum(family, c, q)?, sq.powf(1.0 / q)))
}

/// `‖Σ a_i r_i‖_p` against `‖a‖_2`, by enumeration of all sign patterns.
///
/// For `p = 4` the closed form `3(Σa²)² - 2Σa⁴` of the fourth moment is
/// reported as `fourth_moment_formula`.
pub fn khintchine_check(a: &[f64], p: f64) -> Result<Report> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let family = RVFamily::rademacher(a.len());
    let norm = exact_pnorm_of_sum(&family, a, p)?;
    let s2: f64 = a.iter().map(|x| x * x).sum();
    let mut rep = Report::exact(norm, s2.sqrt());
    if p == 4.0 {
        let s4: f64 = a.iter().map(|x| x.powi(4)).sum();
        rep = rep.with("fourth_moment_formula", 3.0 * s2 * s2 - 2.0 * s4).with("fourth_moment", norm.powi(4));
    }
    Ok(rep)
}

/// `∫ (Σ_i |Σ_j a_ij r_j|²)^{p/2}` against `(Σ a_ij²)^{p/2}`.
pub fn kahane_vector_check(a: &[Vec<f64>], p: f64) -> Result<Report> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("exponent must be >= 1, got {p}")));
    }
    let cols = a.first().map_or(0, Vec::len);
    if a.iter().any(|row| row.len() != cols) {
        return Err(Error::shape("rows of unequal length"));
    }
    let family = RVFamily::rademacher(cols);
    let mut sq = StepFunction::constant(CoordinateSpace::unit_intervals(cols), 0.0);
    for row in a {
        let g = family.sum(row)?;
        sq = sq.zip_with(&g, |acc, x| acc + x * x)?;
    }
    let lhs = sq.map(|v| v.powf(p / 2.0)).integrate();
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();
    Ok(Report::exact(lhs, total.powf(p / 2.0)))
}
