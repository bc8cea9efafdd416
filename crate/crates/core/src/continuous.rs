//! Monte Carlo estimates for level bodies of `phi(x) = prod_i sin(pi x_i)` on
//! the unit torus `[0,1)^d`.
//!
//! Surface areas use the coarea strip estimator
//! `Vol_{d-1}({phi = t}) ~ (1/eps) E[|grad phi(X)| 1{t <= phi(X) < t + eps}]`
//! for uniform `X`, which carries an `O(eps)` bias.
//!
//! Samples are drawn in fixed-size blocks; block `b` uses ChaCha8 seeded with
//! the config seed on stream `b`, and block results are merged in block
//! order, so estimates are identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::stats::Moments;

const BLOCK: u64 = 1 << 16;
const SHIFT_STREAM: u64 = u64::MAX;
const COVERAGE_STREAM: u64 = u64::MAX - 1;

/// Largest dimension accepted by [`estimate_spine_area`].
pub const SPINE_AREA_MAX_DIM: usize = 3;
/// Largest dimension accepted by [`best_ratio_scan`].
pub const RATIO_SCAN_MAX_DIM: usize = 6;
pub const DEFAULT_STRIP_EPSILON: f64 = 1e-3;
pub const DEFAULT_COVERAGE_SAMPLES: usize = 1_000_000;

pub fn phi(x: &[f64]) -> f64 {
    x.iter().map(|&xi| (PI * xi).sin()).product()
}

pub fn grad_phi(x: &[f64]) -> Vec<f64> {
    let sines: Vec<f64> = x.iter().map(|&xi| (PI * xi).sin()).collect();
    (0..x.len())
        .map(|i| {
            let others: f64 = sines
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| s)
                .product();
            PI * (PI * x[i]).cos() * others
        })
        .collect()
}

/// `(phi(x), |grad phi(x)|)` in one pass.
fn phi_and_grad_norm(x: &[f64]) -> (f64, f64) {
    let mut sines = [0.0f64; RATIO_SCAN_MAX_DIM];
    let mut cosines = [0.0f64; RATIO_SCAN_MAX_DIM];
    for (i, &xi) in x.iter().enumerate() {
        let (s, c) = (PI * xi).sin_cos();
        sines[i] = s;
        cosines[i] = c;
    }
    let d = x.len();
    let value: f64 = sines[..d].iter().product();
    let mut norm_sq = 0.0;
    for (i, cos) in cosines[..d].iter().enumerate() {
        let others: f64 = (0..d).filter(|&j| j != i).map(|j| sines[j]).product();
        norm_sq += (PI * cos * others).powi(2);
    }
    (value, norm_sq.sqrt())
}

/// `D_t = {x in [0,1]^d : phi(x) >= t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelBody {
    d: usize,
    t: f64,
}

impl LevelBody {
    pub fn new(d: usize, t: f64) -> Result<Self> {
        if d == 0 || d > RATIO_SCAN_MAX_DIM {
            return Err(Error::InvalidDimension(d));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "level t = {t} must lie in (0, 1)"
            )));
        }
        Ok(LevelBody { d, t })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        phi(x) >= self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCConfig {
    pub samples: u64,
    pub strip_epsilon: f64,
    pub seed: u64,
    pub jobs: usize,
}

impl MCConfig {
    pub fn new(samples: u64, strip_epsilon: f64, seed: u64) -> Result<Self> {
        let cfg = MCConfig {
            samples,
            strip_epsilon,
            seed,
            jobs: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(Error::InvalidParameter(format!(
                "need at least 1000 samples, got {}",
                self.samples
            )));
        }
        if !(self.strip_epsilon > 0.0 && self.strip_epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "strip width {} must lie in (0, 1)",
                self.strip_epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples_used: u64,
}

impl AreaEstimate {
    fn from_moments(m: &Moments) -> Self {
        AreaEstimate {
            value: m.mean(),
            stderr: m.stderr(),
            samples_used: m.count,
        }
    }
}

/// Runs `block(rng, count)` over sample blocks and returns the per-block
/// results in block order.
fn run_blocks<A, F>(mc: &MCConfig, block: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> A + Sync,
{
    mc.validate()?;
    let blocks = mc.samples.div_ceil(BLOCK);
    let one = |b: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(b);
        let count = BLOCK.min(mc.samples - b * BLOCK);
        block(&mut rng, count)
    };
    if mc.jobs <= 1 {
        return Ok((0..blocks).map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(pool.install(|| (0..blocks).into_par_iter().map(one).collect()))
}

fn uniform_point(rng: &mut ChaCha8Rng, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi = rng.gen::<f64>();
    }
}

fn check_strip(body: &LevelBody, eps: f64) -> Result<()> {
    let upper = body.t + eps;
    if upper >= 1.0 {
        return Err(Error::DegenerateStrip { t: body.t, upper });
    }
    Ok(())
}

/// Volume and strip-surface estimates of one body from the same samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyEstimate {
    pub t: f64,
    pub volume: AreaEstimate,
    pub surface: AreaEstimate,
    pub ratio: f64,
    /// Delta-method error of `surface / volume`.
    pub ratio_stderr: f64,
}

pub fn estimate_body(body: &LevelBody, mc: &MCConfig) -> Result<BodyEstimate> {
    check_strip(body, mc.strip_epsilon)?;
    let (t, eps, d) = (body.t, mc.strip_epsilon, body.d);
    let parts = run_blocks(mc, |rng, count| {
        let mut x = [0.0f64; RATIO_SCAN_MAX_DIM];
        let (mut vol, mut surf) = (Moments::default(), Moments::default());
        for _ in 0..count {
            uniform_point(rng, &mut x[..d]);
            let (p, g) = phi_and_grad_norm(&x[..d]);
            vol.push(if p >= t { 1.0 } else { 0.0 });
            surf.push(if p >= t && p < t + eps { g / eps } else { 0.0 });
        }
        (vol, surf)
    })?;
    let (mut vol, mut surf) = (Moments::default(), Moments::default());
    for (v, s) in &parts {
        vol.merge(v);
        surf.merge(s);
    }
    let volume = AreaEstimate::from_moments(&vol);
    let surface = AreaEstimate::from_moments(&surf);
    let ratio = surface.value / volume.value;
    let ratio_stderr = ratio
        * ((surface.stderr / surface.value).powi(2) + (volume.stderr / volume.value).powi(2))
            .sqrt();
    Ok(BodyEstimate {
        t,
        volume,
        surface,
        ratio,
        ratio_stderr,
    })
}

/// Fraction of uniform samples with `phi >= t`.
pub fn estimate_volume(body: &LevelBody, mc: &MCConfig) -> Result<AreaEstimate> {
    let (t, d) = (body.t, body.d);
    let parts = run_blocks(mc, |rng, count| {
        let mut x = [0.0f64; RATIO_SCAN_MAX_DIM];
        let mut vol = Moments::default();
        for _ in 0..count {
            uniform_point(rng, &mut x[..d]);
            vol.push(if phi(&x[..d]) >= t { 1.0 } else { 0.0 });
        }
        vol
    })?;
    let mut vol = Moments::default();
    parts.iter().for_each(|p| vol.merge(p));
    Ok(AreaEstimate::from_moments(&vol))
}

pub fn estimate_surface(body: &LevelBody, mc: &MCConfig) -> Result<AreaEstimate> {
    estimate_body(body, mc).map(|b| b.surface)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioScan {
    pub t_star: f64,
    pub ratio_star: f64,
    pub ratio_stderr: f64,
    /// `2 pi sqrt(d)`
    pub bound: f64,
    /// `ratio_star <= bound + 3 * ratio_stderr`
    pub bound_satisfied: bool,
    pub estimates: Vec<BodyEstimate>,
}

/// Smallest estimated surface/volume ratio over the level bodies `D_t` for
/// `t` in the grid. Grid point `k` samples with seed `mc.seed + k`. The
/// result only upper-bounds the Cheeger constant of the open cube.
pub fn best_ratio_scan(d: usize, t_grid: &[f64], mc: &MCConfig) -> Result<RatioScan> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty t grid".into()));
    }
    let mut estimates = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        let body = LevelBody::new(d, t)?;
        let cfg = MCConfig {
            seed: mc.seed.wrapping_add(k as u64),
            ..*mc
        };
        estimates.push(estimate_body(&body, &cfg)?);
    }
    let best = estimates
        .iter()
        .filter(|e| e.ratio.is_finite())
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .copied()
        .ok_or_else(|| Error::InvalidParameter("no level body was hit by the samples".into()))?;
    let bound = 2.0 * PI * (d as f64).sqrt();
    Ok(RatioScan {
        t_star: best.t,
        ratio_star: best.ratio,
        ratio_stderr: best.ratio_stderr,
        bound,
        bound_satisfied: best.ratio <= bound + 3.0 * best.ratio_stderr,
        estimates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpineAreaEstimate {
    pub d: usize,
    pub t: f64,
    pub area: AreaEstimate,
    pub shifts: Vec<Vec<f64>>,
    /// Estimated area of each `S_i`.
    pub per_shift: Vec<f64>,
    pub volume: AreaEstimate,
    pub shift_cap: usize,
    pub coverage_samples: usize,
    /// `2 pi sqrt(d)`
    pub bound: f64,
    /// `kappa(d) / 2`, reported alongside.
    pub kappa_floor: f64,
}

/// Expected area of `S = union_i (dD_i - union_{j<i} D_j)` for random
/// translates `D_i = v_i + D_t`, estimated by strip sampling. Shifts are drawn
/// until a uniform sample of `coverage_samples` points is covered.
pub fn estimate_spine_area(
    d: usize,
    t: f64,
    mc: &MCConfig,
    coverage_samples: usize,
) -> Result<SpineAreaEstimate> {
    if d > SPINE_AREA_MAX_DIM {
        return Err(Error::TooLarge {
            what: "spine-area dimension",
            size: d as u128,
            cap: SPINE_AREA_MAX_DIM as u128,
        });
    }
    let body = LevelBody::new(d, t)?;
    check_strip(&body, mc.strip_epsilon)?;
    if coverage_samples == 0 {
        return Err(Error::InvalidParameter("coverage sample is empty".into()));
    }
    let volume = estimate_volume(&body, mc)?;
    if volume.value <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "level body at t = {t} was never sampled"
        )));
    }
    let shift_cap =
        (10.0 * (1.0 / volume.value).ceil() * (coverage_samples as f64).ln()).ceil() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream(COVERAGE_STREAM);
    let mut uncovered: Vec<f64> = (0..coverage_samples * d)
        .map(|_| rng.gen::<f64>())
        .collect();
    let mut shift_rng = ChaCha8Rng::seed_from_u64(mc.seed);
    shift_rng.set_stream(SHIFT_STREAM);
    let mut shifts: Vec<Vec<f64>> = Vec::new();
    let mut y = vec![0.0; d];
    while !uncovered.is_empty() {
        if shifts.len() >= shift_cap {
            return Err(Error::CoverageFailed { cap: shift_cap });
        }
        let v: Vec<f64> = (0..d).map(|_| shift_rng.gen::<f64>()).collect();
        let mut kept = Vec::with_capacity(uncovered.len());
        for x in uncovered.chunks_exact(d) {
            torus_sub(x, &v, &mut y);
            if phi(&y) < t {
                kept.extend_from_slice(x);
            }
        }
        uncovered = kept;
        shifts.push(v);
    }

    let eps = mc.strip_epsilon;
    let n_shifts = shifts.len();
    let parts = run_blocks(mc, |rng, count| {
        let mut x = [0.0f64; SPINE_AREA_MAX_DIM];
        let mut y = [0.0f64; SPINE_AREA_MAX_DIM];
        let mut total = Moments::default();
        let mut per_shift = vec![0.0f64; n_shifts];
        for _ in 0..count {
            uniform_point(rng, &mut x[..d]);
            let mut value = 0.0;
            // only the first translate containing x can contribute
            for (i, v) in shifts.iter().enumerate() {
                torus_sub(&x[..d], v, &mut y[..d]);
                let (p, g) = phi_and_grad_norm(&y[..d]);
                if p >= t {
                    if p < t + eps {
                        value = g / eps;
                        per_shift[i] += value;
                    }
                    break;
                }
            }
            total.push(value);
        }
        (total, per_shift)
    })?;
    let mut total = Moments::default();
    let mut per_shift = vec![0.0; n_shifts];
    for (m, p) in &parts {
        total.merge(m);
        per_shift.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    let n = total.count as f64;
    per_shift.iter_mut().for_each(|s| *s /= n);
    Ok(SpineAreaEstimate {
        d,
        t,
        area: AreaEstimate::from_moments(&total),
        shifts,
        per_shift,
        volume,
        shift_cap,
        coverage_samples,
        bound: 2.0 * PI * (d as f64).sqrt(),
        kappa_floor: kappa(d) / 2.0,
    })
}

/// `(x - v) mod 1`, coordinatewise.
fn torus_sub(x: &[f64], v: &[f64], out: &mut [f64]) {
    for ((o, &xi), &vi) in out.iter_mut().zip(x).zip(v) {
        let mut r = xi - vi;
        if r < 0.0 {
            r += 1.0;
        }
        *o = r;
    }
}

/// Isoperimetric constant `d sqrt(pi) Gamma(1 + d/2)^(-1/d)`.
pub fn kappa(d: usize) -> f64 {
    let df = d as f64;
    df * PI.sqrt() * (-libm::lgamma(1.0 + df / 2.0) / df).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn phi_values() {
        assert!((phi(&[0.5, 0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(phi(&[0.0, 0.3]), 0.0);
        assert_eq!(phi(&[0.7, 0.0, 0.2]), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..0.95)).collect();
            let g = grad_phi(&x);
            for i in 0..3 {
                let h = 1e-6;
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                let fd = (phi(&a) - phi(&b)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-7);
            }
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((phi_and_grad_norm(&x).1 - norm).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_eigenfunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        for _ in 0..100 {
            let d = rng.gen_range(1..=4);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..0.95)).collect();
            let center = phi(&x);
            let mut lap = 0.0;
            for i in 0..d {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                lap += (phi(&a) - 2.0 * center + phi(&b)) / (h * h);
            }
            let expected = -(d as f64) * PI * PI * center;
            assert!(((lap - expected) / expected).abs() < 1e-4);
        }
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(1) - 2.0).abs() < 1e-12);
        assert!((kappa(2) - 2.0 * PI.sqrt()).abs() < 1e-12);
        let target = (2.0 * PI * std::f64::consts::E).sqrt();
        let ratio = kappa(100) / 10.0;
        assert!((ratio - target).abs() <= 0.3);
    }

    #[test]
    fn one_dimensional_volume() {
        let mc = MCConfig::new(200_000, 1e-3, 5).unwrap();
        let t = std::f64::consts::FRAC_1_SQRT_2;
        let est = estimate_volume(&LevelBody::new(1, t).unwrap(), &mc).unwrap();
        assert!((est.value - 0.5).abs() <= 3.0 * est.stderr);
        let near_top = estimate_volume(&LevelBody::new(1, 0.999_999).unwrap(), &mc).unwrap();
        assert!(near_top.value < 1e-2);
    }

    #[test]
    fn degenerate_strip_and_bad_config() {
        let mc = MCConfig::new(10_000, 0.05, 1).unwrap();
        let body = LevelBody::new(2, 0.97).unwrap();
        assert!(matches!(
            estimate_surface(&body, &mc),
            Err(Error::DegenerateStrip { .. })
        ));
        assert!(MCConfig::new(10, 1e-3, 0).is_err());
        assert!(MCConfig::new(10_000, 0.0, 0).is_err());
        assert!(LevelBody::new(2, 1.0).is_err());
        assert!(LevelBody::new(0, 0.5).is_err());
        assert!(estimate_spine_area(4, 0.1, &mc, 1000).is_err());
    }

    #[test]
    fn block_estimates_ignore_thread_count() {
        let body = LevelBody::new(2, 0.3).unwrap();
        let mc = MCConfig::new(300_000, 1e-2, 8).unwrap();
        let a = estimate_body(&body, &mc).unwrap();
        let b = estimate_body(&body, &mc.with_jobs(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn torus_sub_wraps() {
        let mut out = [0.0; 2];
        torus_sub(&[0.1, 0.9], &[0.3, 0.2], &mut out);
        assert!((out[0] - 0.8).abs() < 1e-15);
        assert!((out[1] - 0.7).abs() < 1e-15);
    }
}
