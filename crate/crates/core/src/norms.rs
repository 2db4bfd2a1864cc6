//! Weighted sup-norms `sup |φ(z)| (1 - |z|^2)^j` on a polar sample grid.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{ImsError, Result};
use crate::funcalg::AnalyticMap;
use crate::quadrature::R_MAX;

/// Geometric radial ladder `r_i = 1 - 2^(-i/steps_per_octave)` plus `r = 0`,
/// crossed with equispaced angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub steps_per_octave: u32,
    pub octaves: u32,
    pub angular_steps: usize,
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { steps_per_octave: 8, octaves: 15, angular_steps: 4096, refine: true }
    }
}

impl GridSpec {
    pub fn radii(&self) -> Vec<f64> {
        let steps = self.steps_per_octave * self.octaves;
        std::iter::once(0.0)
            .chain(
                (1..=steps).map(|i| 1.0 - 2f64.powf(-(i as f64) / self.steps_per_octave as f64)),
            )
            .collect()
    }

    pub fn r_max(&self) -> f64 {
        1.0 - 2f64.powi(-(self.octaves as i32))
    }

    fn validate(&self) -> Result<()> {
        if self.steps_per_octave == 0 || self.octaves == 0 || self.angular_steps < 4 {
            return Err(ImsError::InvalidArgument("degenerate norm grid".into()));
        }
        if self.r_max() > R_MAX {
            return Err(ImsError::InvalidArgument(format!(
                "grid r_max {} exceeds 1 - 2^-15",
                self.r_max()
            )));
        }
        Ok(())
    }
}

/// Deepest profile rung: `r_k = 1 - 2^-k` for `k = 1..=14`.
pub const PROFILE_DEPTH: u32 = 14;
/// Rungs reported by [`asymptotic_seminorm`].
pub const SEMINORM_RUNGS: std::ops::RangeInclusive<u32> = 3..=12;

fn ser_complex<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub j: u32,
    pub value: f64,
    #[serde(serialize_with = "ser_complex")]
    pub witness: C64,
    /// `(r_min, r_max, steps)`
    pub radial_grid: (f64, f64, usize),
    pub angular_steps: usize,
    /// `(r_k, sup over |z| >= r_k)` for `r_k = 1 - 2^-k`.
    pub tail_profile: Vec<(f64, f64)>,
}

struct CircleMax {
    r: f64,
    value: f64,
    index: usize,
}

fn weight(r: f64, j: u32) -> f64 {
    (1.0 - r * r).powi(j as i32)
}

fn circle_points(r: f64, n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64)).collect()
}

fn scan(phi: &AnalyticMap, j: u32, radii: &[f64], n: usize) -> Result<Vec<CircleMax>> {
    radii
        .par_iter()
        .map(|&r| {
            let pts = if r == 0.0 { vec![C64::new(0.0, 0.0)] } else { circle_points(r, n) };
            let vals = phi.eval_many(&pts)?;
            let w = weight(r, j);
            let (index, value) = vals
                .iter()
                .map(|v| v.norm() * w)
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
            if !value.is_finite() {
                return Err(ImsError::Evaluation(format!("non-finite weighted value on |z|={r}")));
            }
            Ok(CircleMax { r, value, index })
        })
        .collect()
}

/// `‖φ‖_{E_j}` estimated as the grid maximum, refined once around the best cell.
pub fn growth_norm(phi: &AnalyticMap, j: u32, grid: &GridSpec) -> Result<GrowthReport> {
    grid.validate()?;
    let radii = grid.radii();
    let n = grid.angular_steps;
    let circles = scan(phi, j, &radii, n)?;
    let (best, _) = circles
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, c)| if c.value > b.1 { (i, c.value) } else { b });
    let c = &circles[best];
    let theta = |k: usize| std::f64::consts::TAU * k as f64 / n as f64;
    let mut value = c.value;
    let mut witness = if c.r == 0.0 { C64::new(0.0, 0.0) } else { C64::from_polar(c.r, theta(c.index)) };

    if grid.refine && c.r > 0.0 {
        let r_lo = radii[best.saturating_sub(1)];
        let r_hi = radii[(best + 1).min(radii.len() - 1)];
        let dtheta = std::f64::consts::TAU / n as f64;
        let mut pts = Vec::new();
        for a in 0..=6 {
            let r = (r_lo + (r_hi - r_lo) * a as f64 / 6.0).min(grid.r_max());
            for b in 0..=6 {
                pts.push(C64::from_polar(r, theta(c.index) + dtheta * (b as f64 - 3.0) / 3.0));
            }
        }
        let vals = phi.eval_many(&pts)?;
        for (z, v) in pts.iter().zip(vals) {
            let w = v.norm() * weight(z.norm(), j);
            if w > value {
                value = w;
                witness = *z;
            }
        }
    }

    let tail_profile = (1..=PROFILE_DEPTH)
        .map(|k| {
            let rk = 1.0 - 2f64.powi(-(k as i32));
            let mut sup = circles
                .iter()
                .filter(|c| c.r >= rk - 1e-15)
                .map(|c| c.value)
                .fold(0.0, f64::max);
            if witness.norm() >= rk {
                sup = sup.max(value);
            }
            (rk, sup)
        })
        .collect();

    Ok(GrowthReport {
        j,
        value,
        witness,
        radial_grid: (0.0, grid.r_max(), radii.len()),
        angular_steps: n,
        tail_profile,
    })
}

/// `sup_{r <= |z| <= r_max} |N_g - N_f| (1 - |z|^2)` on the default grid.
pub fn tail_deviation(f: &AnalyticMap, g: &AnalyticMap, r: f64) -> Result<f64> {
    tail_deviation_on(f, g, r, &GridSpec::default())
}

pub fn tail_deviation_on(f: &AnalyticMap, g: &AnalyticMap, r: f64, grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    if !(r > 0.0 && r < grid.r_max()) {
        return Err(ImsError::InvalidArgument(format!("tail radius {r} outside (0, r_max)")));
    }
    let diff = g.pre_schwarzian().difference(&f.pre_schwarzian());
    let radii: Vec<f64> = std::iter::once(r)
        .chain(grid.radii().into_iter().filter(|&x| x > r))
        .collect();
    let circles = scan(&diff, 1, &radii, grid.angular_steps)?;
    Ok(circles.iter().map(|c| c.value).fold(0.0, f64::max))
}

/// Tail sups at `r_k = 1 - 2^-k`, `k = 3..=12`; the last entry bounds the
/// `E_j / E_{j,0}` quotient seminorm from above.
pub fn asymptotic_seminorm(phi: &AnalyticMap, j: u32) -> Result<Vec<(f64, f64)>> {
    let report = growth_norm(phi, j, &GridSpec::default())?;
    Ok(report
        .tail_profile
        .into_iter()
        .enumerate()
        .filter(|(i, _)| SEMINORM_RUNGS.contains(&(*i as u32 + 1)))
        .map(|(_, p)| p)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LittleOVerdict {
    pub holds: bool,
    pub threshold: f64,
    pub profile: Vec<(f64, f64)>,
}

/// Whether `φ (1 - |z|^2)^j → 0`, judged on the deepest three profile rungs:
/// each below `threshold` and non-increasing.
pub fn little_o_test(phi: &AnalyticMap, j: u32, threshold: f64) -> Result<LittleOVerdict> {
    let profile = growth_norm(phi, j, &GridSpec::default())?.tail_profile;
    let last = &profile[profile.len() - 3..];
    let small = last.iter().all(|&(_, v)| v < threshold || v == 0.0);
    let falling = last.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(LittleOVerdict { holds: small && falling, threshold, profile })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = GridSpec::default();
        let r = g.radii();
        assert_eq!(r.len(), 121);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[8], 0.5);
        assert_eq!(*r.last().unwrap(), R_MAX);
        assert!(GridSpec { octaves: 16, ..g }.validate().is_err());
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let z = AnalyticMap::constant(C64::new(0.0, 0.0));
        let rep = growth_norm(&z, 1, &GridSpec::default()).unwrap();
        assert_eq!(rep.value, 0.0);
        assert!(little_o_test(&z, 1, 1e-9).unwrap().holds);
    }
}
