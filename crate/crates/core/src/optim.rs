//! Projected ascent over unit balls of max-of-norms spaces.
//!
//! Two optimizers live here. [`maximize_linear`] maximizes `<c, d>` over
//! `{ |d|_p <= 1, |w d|_2 <= 1 }` by projected gradient ascent, projecting
//! through the two KKT multipliers. [`extremize_ratio`] searches the `l^p`
//! unit sphere for the smallest and largest values of a 0-homogeneous
//! function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seqspace::lp_norm;

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Stop a restart once an iterate moves less than this, relative to the
    /// `l^2` radius of the feasible set.
    pub step_tol: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig { restarts: 32, max_iters: 10_000, seed: DEFAULT_SEED, step_tol: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub iterations: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMax {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
}

/// Solves `t + mu t^{p-1} = a` for `t` in `[0, a]`, `a >= 0`, `p >= 2`.
fn shrink_root(a: f64, mu: f64, p: f64) -> f64 {
    if a == 0.0 || mu == 0.0 {
        return a;
    }
    // g is increasing and convex on [0, a]; Newton from the right stays right of the root.
    let mut t = a;
    for _ in 0..200 {
        let tp = t.powf(p - 2.0);
        let g = t + mu * tp * t - a;
        let dg = 1.0 + mu * (p - 1.0) * tp;
        let next = (t - g / dg).max(0.0);
        // iterates decrease monotonically until rounding takes over
        if next >= t {
            return t;
        }
        t = next;
    }
    t
}

/// Euclidean projection onto the `l^p` unit ball, `p >= 2`.
pub fn project_lp_ball(y: &[f64], p: f64) -> Vec<f64> {
    if lp_norm(y, p) <= 1.0 {
        return y.to_vec();
    }
    let mass = |mu: f64| y.iter().map(|v| shrink_root(v.abs(), mu, p).powf(p)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while mass(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    y.iter().map(|v| v.signum() * shrink_root(v.abs(), hi, p)).collect()
}

/// Euclidean projection onto the ellipsoid `sum w_i^2 d_i^2 <= 1`.
pub fn project_weighted_l2_ball(y: &[f64], weights: &[f64]) -> Vec<f64> {
    let energy = |beta: f64| {
        y.iter()
            .zip(weights)
            .map(|(v, w)| (w * v / (1.0 + beta * w * w)).powi(2))
            .sum::<f64>()
    };
    if energy(0.0) <= 1.0 {
        return y.to_vec();
    }
    let first = weights[0];
    if weights.iter().all(|&w| w == first) {
        let scale = 1.0 / energy(0.0).sqrt();
        return y.iter().map(|v| v * scale).collect();
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while energy(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if energy(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    y.iter().zip(weights).map(|(v, w)| v / (1.0 + hi * w * w)).collect()
}

/// `max(|d|_p, |w d|_2)`.
pub fn ball_gauge(d: &[f64], p: f64, weights: &[f64]) -> f64 {
    let l2w = d.iter().zip(weights).map(|(v, w)| (v * w).powi(2)).sum::<f64>().sqrt();
    lp_norm(d, p).max(l2w)
}

/// Smallest `x >= 0` with `pred(x)`, for `pred` monotone and eventually true.
fn least_true(pred: impl Fn(f64) -> bool) -> f64 {
    if pred(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while !pred(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-16 * hi {
            return hi;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Euclidean projection onto the intersection of the two balls.
///
/// The minimizer has `x_i (1 + beta w_i^2) + mu |x_i|^{p-1} sgn x_i = y_i` for
/// multipliers `mu, beta >= 0`; for fixed `beta` the least feasible `mu` is found
/// by bisection, and the `l^2_w` energy along that curve decreases in `beta`.
pub fn project_ball(y: &[f64], p: f64, weights: &[f64]) -> Vec<f64> {
    if ball_gauge(y, p, weights) <= 1.0 {
        return y.to_vec();
    }
    let at = |mu: f64, beta: f64| -> Vec<f64> {
        y.iter()
            .zip(weights)
            .map(|(v, w)| {
                let m = 1.0 / (1.0 + beta * w * w);
                shrink_root(v.abs() * m, mu * m, p)
            })
            .collect()
    };
    let mass = |x: &[f64]| x.iter().map(|t| t.powf(p)).sum::<f64>();
    let energy = |x: &[f64]| x.iter().zip(weights).map(|(t, w)| (t * w).powi(2)).sum::<f64>();
    let solve = |beta: f64| at(least_true(|mu| mass(&at(mu, beta)) <= 1.0), beta);
    // one constraint alone often suffices
    let only_l2 = at(0.0, least_true(|beta| energy(&at(0.0, beta)) <= 1.0));
    let x = if mass(&only_l2) <= 1.0 {
        only_l2
    } else {
        let only_lp = solve(0.0);
        if energy(&only_lp) <= 1.0 {
            only_lp
        } else {
            solve(least_true(|beta| energy(&solve(beta)) <= 1.0))
        }
    };
    let mut x: Vec<f64> = x.into_iter().zip(y).map(|(t, v)| t.copysign(*v)).collect();
    // bisection leaves the iterate on the feasible side up to rounding
    let g = ball_gauge(&x, p, weights);
    if g > 1.0 {
        x.iter_mut().for_each(|v| *v /= g);
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `<c, d>` over the unit ball of `max(|.|_p, |w .|_2)` by projected
/// gradient ascent from `config.restarts` seeded random starts (plus `warm_start`).
pub fn maximize_linear(
    c: &[f64],
    p: f64,
    weights: &[f64],
    warm_start: Option<&[f64]>,
    config: &AscentConfig,
) -> LinearMax {
    let n = c.len();
    let c_norm = lp_norm(c, 2.0);
    let mut best = LinearMax { value: 0.0, argmax: vec![0.0; n], restarts: Vec::new() };
    if n == 0 || c_norm == 0.0 {
        return best;
    }
    // the ball sits inside the l^p ball, hence inside the l^2 ball of radius n^{1/2 - 1/p}
    let radius = (n as f64).powf(0.5 - 1.0 / p);
    let step = radius / c_norm;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(config.restarts + 1);
    if let Some(w) = warm_start {
        starts.push(w.to_vec());
    }
    for _ in 0..config.restarts {
        starts.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }

    let mut best_value = f64::NEG_INFINITY;
    for (restart, start) in starts.into_iter().enumerate() {
        let mut d = project_ball(&start, p, weights);
        let mut iterations = 0;
        while iterations < config.max_iters {
            iterations += 1;
            let trial: Vec<f64> = d.iter().zip(c).map(|(v, g)| v + step * g).collect();
            let next = project_ball(&trial, p, weights);
            let moved = d.iter().zip(&next).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            d = next;
            if moved <= config.step_tol * radius.max(1.0) {
                break;
            }
        }
        let value = dot(c, &d);
        best.restarts.push(RestartRecord { restart, iterations, value });
        if value > best_value {
            best_value = value;
            best.value = value;
            best.argmax = d;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioConfig {
    pub random_starts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for RatioConfig {
    fn default() -> Self {
        RatioConfig { random_starts: 8, max_iters: 200, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioExtremes {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

fn normalize_lp(c: &mut [f64], p: f64) {
    let n = lp_norm(c, p);
    if n > 0.0 {
        c.iter_mut().for_each(|v| *v /= n);
    }
}

fn climb(f: &dyn Fn(&[f64]) -> f64, start: &[f64], p: f64, sign: f64, max_iters: usize) -> (f64, Vec<f64>) {
    let dim = start.len();
    let mut c = start.to_vec();
    normalize_lp(&mut c, p);
    let mut value = sign * f(&c);
    let mut step = 0.1;
    let h = 1e-6;
    for _ in 0..max_iters {
        let mut grad = vec![0.0; dim];
        for i in 0..dim {
            let mut up = c.clone();
            let mut down = c.clone();
            up[i] += h;
            down[i] -= h;
            grad[i] = sign * (f(&up) - f(&down)) / (2.0 * h);
        }
        let gnorm = lp_norm(&grad, 2.0);
        if !(gnorm > 1e-14) {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut trial: Vec<f64> = c.iter().zip(&grad).map(|(v, g)| v + step * g / gnorm).collect();
            normalize_lp(&mut trial, p);
            let tv = sign * f(&trial);
            if tv > value {
                c = trial;
                value = tv;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (sign * value, c)
}

/// Smallest and largest values of a 0-homogeneous `f` over the `l^p` unit sphere
/// of dimension `dim`, by normalized gradient steps from coordinate vectors,
/// the all-ones vector, and seeded random starts.
pub fn extremize_ratio(f: &dyn Fn(&[f64]) -> f64, dim: usize, p: f64, config: &RatioConfig) -> RatioExtremes {
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        starts.push(e);
    }
    starts.push(vec![1.0; dim]);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.random_starts {
        starts.push((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let mut out = RatioExtremes { min: f64::INFINITY, max: f64::NEG_INFINITY, argmin: vec![], argmax: vec![] };
    for s in &starts {
        if lp_norm(s, p) == 0.0 {
            continue;
        }
        let (lo, at_lo) = climb(f, s, p, -1.0, config.max_iters);
        if lo < out.min {
            out.min = lo;
            out.argmin = at_lo;
        }
        let (hi, at_hi) = climb(f, s, p, 1.0, config.max_iters);
        if hi > out.max {
            out.max = hi;
            out.argmax = at_hi;
        }
    }
    out
}
