//! Circle and annulus integrals of `|f'|^t`.
//!
//! Mean integrals use the equispaced trapezoid rule, which converges
//! geometrically for the smooth periodic integrands met at `r < 1`. The
//! starting grid resolves the boundary peak of width `~(1 - r)`; refinement
//! doubles the grid, reusing every previous sample.
//!
//! All sums are formed over fixed 4096-point chunks added in index order, so a
//! value depends only on the grid, never on thread count or on the cache.

pub mod cache;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{ImsError, Result};
use crate::funcalg::{AnalyticMap, PrimitiveRule};
use crate::gauss::GaussLegendre;
pub use cache::ResultCache;

/// Points per evaluation path and per partial sum.
pub const CHUNK: usize = 4096;
/// Deepest admissible radius, `1 - 2^-15`.
pub const R_MAX: f64 = 1.0 - 1.0 / 32768.0;
/// `t log|f'|` below this contributes 0 and is counted as an underflow.
const UNDERFLOW_EXP: f64 = -700.0;
/// Gauss–Legendre nodes per annulus in the area integral.
pub const ANNULUS_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadConfig {
    /// Starting points per boundary-peak width `2π(1 - r)`.
    pub density: f64,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(skip)]
    pub rule: PrimitiveRule,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { density: 64.0, n_min: 256, n_max: 1 << 22, rule: PrimitiveRule::default() }
    }
}

impl QuadConfig {
    /// `max(n_min, nextpow2(density * 2π / (1 - r)))`, capped at `n_max`.
    pub fn initial_points(&self, r: f64) -> usize {
        let want = (self.density * TAU / (1.0 - r)).ceil();
        let want = if want >= self.n_max as f64 { self.n_max } else { (want as usize).next_power_of_two() };
        want.max(self.n_min).min(self.n_max)
    }
}

/// One converged mean integral.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanValue {
    pub r: f64,
    pub n_points: usize,
    pub value: f64,
    pub est_rel_err: f64,
    /// Nodes whose contribution underflowed to 0.
    pub underflows: usize,
}

/// Mean integrals of one map and exponent along increasing radii.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MeanSeries {
    pub map_id: String,
    pub t: f64,
    pub entries: Vec<MeanValue>,
}

/// Evaluates `|f'|^t` means for one map, optionally through a [`ResultCache`].
#[derive(Debug, Clone)]
pub struct MeanIntegrator {
    map_id: String,
    deriv: AnalyticMap,
    config: QuadConfig,
    cache: Option<Arc<ResultCache>>,
    /// Path-dependent values are keyed by their starting grid as well.
    path_dependent: bool,
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= R_MAX) {
        return Err(ImsError::InvalidArgument(format!(
            "radius {r} outside (0, 1 - 2^-15]"
        )));
    }
    Ok(())
}

/// Chunked sum of `exp(t l_j)` over `l[0], l[stride], ...`.
fn chunked_sum(logs: &[f64], stride: usize, t: f64) -> (f64, usize) {
    let count = logs.len().div_ceil(stride);
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<(f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            let mut uf = 0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                let x = t * logs[i * stride];
                if x < UNDERFLOW_EXP {
                    uf += 1;
                } else {
                    s += x.exp();
                }
            }
            (s, uf)
        })
        .collect();
    parts.iter().fold((0.0, 0), |(s, u), (a, b)| (s + a, u + b))
}

struct Pending {
    t: f64,
    prev: f64,
    chain: Vec<(usize, f64)>,
    underflows: usize,
}

impl MeanIntegrator {
    pub fn new(map: &AnalyticMap, config: QuadConfig, cache: Option<Arc<ResultCache>>) -> Self {
        let deriv = map.derivative();
        MeanIntegrator {
            map_id: map.map_id(),
            path_dependent: deriv.uses_quadrature(),
            deriv,
            config,
            cache,
        }
    }

    pub fn map_id(&self) -> &str {
        &self.map_id
    }

    pub fn config(&self) -> &QuadConfig {
        &self.config
    }

    /// `f'` at `r e^{iθ}` for `θ = phase + step * i`, `i < count`, one path per chunk.
    fn deriv_on_arc(&self, r: f64, count: usize, phase: f64, step: f64) -> Result<Vec<C64>> {
        let chunks = count.div_ceil(CHUNK);
        let parts: Vec<Result<Vec<C64>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let pts: Vec<C64> = (c * CHUNK..((c + 1) * CHUNK).min(count))
                    .map(|i| C64::from_polar(r, phase + step * i as f64))
                    .collect();
                self.deriv.eval_with(&pts, &self.config.rule)
            })
            .collect();
        let mut out = Vec::with_capacity(count);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    /// `f'` at the `n` equispaced points `r e^{2πij/n}`.
    pub fn circle_eval(&self, r: f64, n: usize) -> Result<Vec<C64>> {
        if !(r > 0.0 && r < 1.0) {
            return Err(ImsError::InvalidArgument(format!("radius {r} outside (0, 1)")));
        }
        if !n.is_power_of_two() {
            return Err(ImsError::InvalidArgument(format!("point count {n} is not a power of two")));
        }
        self.deriv_on_arc(r, n, 0.0, TAU / n as f64)
    }

    fn log_abs(&self, vals: Vec<C64>) -> Vec<f64> {
        vals.into_iter().map(|v| v.norm().ln()).collect()
    }

    /// Plain `n`-point trapezoid value of `∫|f'(re^{iθ})|^t dθ`.
    pub fn trapezoid(&self, t: f64, r: f64, n: usize) -> Result<f64> {
        let logs = self.log_abs(self.circle_eval(r, n)?);
        Ok(chunked_sum(&logs, 1, t).0 * TAU / n as f64)
    }

    fn key(&self, t: f64, r: f64, n: usize, n0: usize) -> String {
        let base = cache::record_key(&self.map_id, t, r, n);
        if self.path_dependent {
            format!("{base}|n0={n0}")
        } else {
            base
        }
    }

    fn cached_value(&self, t: f64, r: f64, rtol: f64, n0: usize) -> Option<MeanValue> {
        let cache = self.cache.as_ref()?;
        let mut prev = cache.get(&self.key(t, r, n0 / 2, n0))?;
        let mut n = n0;
        loop {
            let cur = cache.get(&self.key(t, r, n, n0))?;
            let est = (cur - prev).abs() / cur.abs();
            if est < rtol || n >= self.config.n_max {
                if !(est <= 10.0 * rtol) {
                    return None;
                }
                let underflows = cache
                    .get(&format!("{}|underflow", self.key(t, r, n, n0)))
                    .map_or(0, |u| u as usize);
                return Some(MeanValue { r, n_points: n, value: cur, est_rel_err: est, underflows });
            }
            prev = cur;
            n *= 2;
        }
    }

    /// `∫_0^{2π} |f'(re^{iθ})|^t dθ`, doubling from the starting grid until the
    /// relative change drops below `rtol`.
    pub fn mean_integral(&self, t: f64, r: f64, rtol: f64) -> Result<MeanValue> {
        self.mean_integrals(&[t], r, rtol)?.pop().expect("one exponent in, one out")
    }

    /// Mean integrals for several exponents sharing the same `|f'|` samples.
    /// The outer error is a failed evaluation; inner errors are per exponent.
    pub fn mean_integrals(&self, ts: &[f64], r: f64, rtol: f64) -> Result<Vec<Result<MeanValue>>> {
        check_radius(r)?;
        if !(rtol > 1e-14 && rtol < 1e-2) {
            return Err(ImsError::InvalidArgument(format!("rtol {rtol:e} outside (1e-14, 1e-2)")));
        }
        let n0 = self.config.initial_points(r);
        let mut out: Vec<Option<Result<MeanValue>>> = ts
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    Some(Ok(MeanValue { r, n_points: 0, value: TAU, est_rel_err: 0.0, underflows: 0 }))
                } else {
                    self.cached_value(t, r, rtol, n0).map(Ok)
                }
            })
            .collect();
        if out.iter().all(Option::is_some) {
            return Ok(out.into_iter().map(Option::unwrap).collect());
        }

        let mut n = n0;
        let mut logs = self.log_abs(self.circle_eval(r, n)?);
        let mut pending: Vec<(usize, Pending)> = Vec::new();
        for (i, &t) in ts.iter().enumerate() {
            if out[i].is_some() {
                continue;
            }
            if t < 0.0 {
                if let Some(j) = logs.iter().position(|&l| !(l >= (1e-300f64).ln())) {
                    let z = C64::from_polar(r, TAU * j as f64 / n as f64);
                    out[i] = Some(Err(ImsError::Evaluation(format!(
                        "|f'| below 1e-300 at z={z} with t={t}"
                    ))));
                    continue;
                }
            }
            let (half, _) = chunked_sum(&logs, 2, t);
            let half = half * TAU / (n / 2) as f64;
            pending.push((i, Pending { t, prev: half, chain: vec![(n / 2, half)], underflows: 0 }));
        }
        loop {
            let mut still = Vec::new();
            for (i, mut p) in pending {
                let (s, uf) = chunked_sum(&logs, 1, p.t);
                let cur = s * TAU / n as f64;
                p.chain.push((n, cur));
                let est = (cur - p.prev).abs() / cur.abs();
                if !cur.is_finite() {
                    out[i] = Some(Err(ImsError::Evaluation(format!(
                        "mean integral overflowed at r={r}, t={}", p.t
                    ))));
                } else if est < rtol || n >= self.config.n_max {
                    if est <= 10.0 * rtol {
                        p.underflows = uf;
                        self.store(&p, r, n0)?;
                        out[i] = Some(Ok(MeanValue { r, n_points: n, value: cur, est_rel_err: est, underflows: uf }));
                    } else {
                        out[i] = Some(Err(ImsError::NonConvergence { r, est, n_max: self.config.n_max }));
                    }
                } else {
                    p.prev = cur;
                    still.push((i, p));
                }
            }
            pending = still;
            if pending.is_empty() {
                break;
            }
            let odd = self.log_abs(self.deriv_on_arc(r, n, PI / n as f64, TAU / n as f64)?);
            let mut merged = Vec::with_capacity(2 * n);
            for (a, b) in logs.iter().zip(&odd) {
                merged.push(*a);
                merged.push(*b);
            }
            logs = merged;
            n *= 2;
        }
        Ok(out.into_iter().map(|o| o.expect("every exponent resolved")).collect())
    }

    fn store(&self, p: &Pending, r: f64, n0: usize) -> Result<()> {
        let Some(cache) = &self.cache else { return Ok(()) };
        for &(n, v) in &p.chain {
            cache.put(&self.key(p.t, r, n, n0), v)?;
        }
        if p.underflows > 0 {
            let (n, _) = *p.chain.last().expect("chain is never empty");
            cache.put(&format!("{}|underflow", self.key(p.t, r, n, n0)), p.underflows as f64)?;
        }
        Ok(())
    }

    /// Series of mean integrals over `radii` for every exponent in `ts`.
    pub fn mean_series(&self, ts: &[f64], radii: &[f64], rtol: f64) -> Result<Vec<Result<MeanSeries>>> {
        let mut per_t: Vec<Result<Vec<MeanValue>>> = ts.iter().map(|_| Ok(Vec::new())).collect();
        for &r in radii {
            let vals = self.mean_integrals(ts, r, rtol)?;
            for (slot, v) in per_t.iter_mut().zip(vals) {
                if let Ok(entries) = slot {
                    match v {
                        Ok(m) => entries.push(m),
                        Err(e) => *slot = Err(e),
                    }
                }
            }
        }
        Ok(ts
            .iter()
            .zip(per_t)
            .map(|(&t, r)| r.map(|entries| MeanSeries { map_id: self.map_id.clone(), t, entries }))
            .collect())
    }

    /// Mean integrals at the Gauss–Legendre nodes of each annulus `(r_k, r_{k+1})`.
    pub fn annulus_profile(&self, t: f64, radii: &[f64], rtol: f64) -> Result<AnnulusProfile> {
        if radii.len() < 2 || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ImsError::InvalidArgument("annulus radii must increase".into()));
        }
        let gl = GaussLegendre::cached(ANNULUS_NODES);
        let mut annuli = Vec::with_capacity(radii.len() - 1);
        for w in radii.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mut nodes = Vec::with_capacity(gl.len());
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let rho = 0.5 * (a + b) + half * x;
                let m = self.mean_integral(t, rho, rtol)?;
                nodes.push(AnnulusNode { rho, weight: wt * half, mean: m.value });
            }
            annuli.push(nodes);
        }
        Ok(AnnulusProfile { t, radii: radii.to_vec(), annuli })
    }

    /// `A_k = (1/π) ∬_{r_k<|z|<r_{k+1}} |f'|^t (1-|z|^2)^α dA` for consecutive radii.
    pub fn area_tail_integral(&self, t: f64, alpha: f64, radii: &[f64], rtol: f64) -> Result<Vec<f64>> {
        if !(alpha > -1.0) {
            return Err(ImsError::InvalidArgument(format!("alpha {alpha} must exceed -1")));
        }
        Ok(self.annulus_profile(t, radii, rtol)?.tails(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusNode {
    pub rho: f64,
    pub weight: f64,
    pub mean: f64,
}

/// Radial quadrature data from which area tails follow for any `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusProfile {
    pub t: f64,
    pub radii: Vec<f64>,
    pub annuli: Vec<Vec<AnnulusNode>>,
}

impl AnnulusProfile {
    pub fn tails(&self, alpha: f64) -> Vec<f64> {
        self.annuli
            .iter()
            .map(|nodes| {
                nodes
                    .iter()
                    .map(|n| n.weight * n.mean * (1.0 - n.rho * n.rho).powf(alpha) * n.rho)
                    .sum::<f64>()
                    / PI
            })
            .collect()
    }
}

/// `f'` on the circle of radius `r` with default configuration.
pub fn circle_eval(map: &AnalyticMap, r: f64, n: usize) -> Result<Vec<C64>> {
    MeanIntegrator::new(map, QuadConfig::default(), None).circle_eval(r, n)
}

/// Uncached mean integral with default configuration.
pub fn mean_integral(map: &AnalyticMap, t: f64, r: f64, rtol: f64) -> Result<MeanValue> {
    MeanIntegrator::new(map, QuadConfig::default(), None).mean_integral(t, r, rtol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(text: &str) -> AnalyticMap {
        AnalyticMap::parse(text).unwrap()
    }

    #[test]
    fn initial_points_follow_peak_width() {
        let q = QuadConfig::default();
        assert_eq!(q.initial_points(0.1), 512);
        assert_eq!(q.initial_points(0.0001), 512);
        assert_eq!(q.initial_points(0.5), 1024);
        assert_eq!(q.initial_points(1.0 - 2f64.powi(-13)), 1 << 22);
        assert_eq!(q.initial_points(R_MAX), 1 << 22);
        let q = QuadConfig { density: 1.0, ..q };
        assert_eq!(q.initial_points(0.5), 256);
    }

    #[test]
    fn circle_eval_examples() {
        let v = circle_eval(&map("id"), 0.5, 8).unwrap();
        assert!(v.iter().all(|&x| x == C64::new(1.0, 0.0)));
        let v = circle_eval(&map("logmap"), 0.5, 4).unwrap();
        assert!((v[0] - C64::new(2.0, 0.0)).norm() < 1e-15);
        let v = circle_eval(&map("koebe"), 0.5, 64).unwrap();
        assert!((v[32].norm() - 0.5 / 3.375).abs() < 1e-15);
        assert!(circle_eval(&map("id"), 0.5, 12).is_err());
        assert!(circle_eval(&map("id"), 1.0, 8).is_err());
    }

    #[test]
    fn identity_mean_is_two_pi() {
        for t in [-3.0, 0.5, 4.0] {
            let m = mean_integral(&map("id"), t, 0.9, 1e-10).unwrap();
            assert!((m.value - TAU).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_deep_rungs_and_bad_rtol() {
        let f = map("koebe");
        assert!(mean_integral(&f, 1.0, 1.0 - 2f64.powi(-16), 1e-8).is_err());
        assert!(mean_integral(&f, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn t_zero_short_circuits() {
        let m = mean_integral(&map("koebe"), 0.0, 0.99, 1e-8).unwrap();
        assert_eq!(m.value, TAU);
    }

    #[test]
    fn annulus_tail_of_identity() {
        let q = MeanIntegrator::new(&map("id"), QuadConfig::default(), None);
        let radii = [0.5, 0.75, 0.875];
        let a = q.area_tail_integral(2.0, 0.0, &radii, 1e-10).unwrap();
        assert!((a[0] - (0.75f64.powi(2) - 0.25)).abs() < 1e-13);
        assert!((a[1] - (0.875f64.powi(2) - 0.75f64.powi(2))).abs() < 1e-13);
    }
}
