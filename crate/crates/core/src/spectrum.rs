//! Growth exponents of mean integrals along a dyadic radius ladder.
//!
//! With `x_k = log 1/(1 - r_k)` and `y_k = log I_k`, the exponent is the
//! least-squares slope of `y` on `x` over the deepest rungs. Regimes where a
//! finite ladder slope is misleading (logarithmic growth, bounded means,
//! oscillating increments) are detected from the increments `I_{k+1} - I_k`
//! and flagged.

use std::sync::Arc;

use crate::error::{ImsError, Result};
use crate::funcalg::AnalyticMap;
use crate::quadrature::{MeanIntegrator, QuadConfig, ResultCache};

/// Increment exponents within this band count as logarithmic growth.
pub const LOG_BAND: f64 = 0.05;
/// Spread of incremental slopes above which oscillation is flagged.
pub const IRREGULAR_SPREAD: f64 = 0.1;
/// RMS fit residual above which oscillation is flagged.
pub const IRREGULAR_RESIDUAL: f64 = 1e-3;
/// Max/min ratio of means allowed in the bounded regime.
pub const BOUNDED_RATIO: f64 = 4.0;
/// Increments below this fraction of the mean are treated as zero.
pub const FLAT_INCREMENT: f64 = 1e-12;
/// The tail is declared divergent when `A_last / A_prev` reaches `1 - DIVERGENCE_SLACK`.
pub const DIVERGENCE_SLACK: f64 = 1e-3;
pub const AREA_BISECTIONS: usize = 12;

/// Radii `r_k = 1 - 2^-k` for `k_min <= k <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RadiusLadder {
    pub k_min: u32,
    pub k_max: u32,
}

impl Default for RadiusLadder {
    fn default() -> Self {
        RadiusLadder { k_min: 3, k_max: 13 }
    }
}

impl RadiusLadder {
    pub fn new(k_min: u32, k_max: u32) -> Result<Self> {
        if !(2 <= k_min && k_min < k_max && k_max <= 15) {
            return Err(ImsError::InvalidArgument(format!(
                "ladder {k_min}..{k_max} outside 2 <= k_min < k_max <= 15"
            )));
        }
        Ok(RadiusLadder { k_min, k_max })
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(k: u32) -> f64 {
        1.0 - 0.5f64.powi(k as i32)
    }

    pub fn radii(&self) -> Vec<f64> {
        (self.k_min..=self.k_max).map(Self::radius).collect()
    }

    /// `x_k = log 1/(1 - r_k) = k log 2`
    pub fn xs(&self) -> Vec<f64> {
        (self.k_min..=self.k_max).map(|k| k as f64 * std::f64::consts::LN_2).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    PowerLaw,
    Logarithmic,
    Bounded,
    Irregular,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PowerLaw => "PowerLaw",
            Regime::Logarithmic => "Logarithmic",
            Regime::Bounded => "Bounded",
            Regime::Irregular => "Irregular",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SpectrumEstimate {
    pub t: f64,
    pub beta_hat: f64,
    pub window: usize,
    /// `(y_{k+1} - y_k) / (x_{k+1} - x_k)` over the whole ladder.
    pub incremental_slopes: Vec<f64>,
    /// RMS residual of the windowed least-squares fit.
    pub fit_residual: f64,
    pub regime: Regime,
    /// Unclamped least-squares slope over the window.
    pub ls_slope: f64,
    /// Slope of `log |I_{k+1} - I_k|` over the window (NaN when increments vanish).
    pub increment_exponent: f64,
    pub log_means: Vec<f64>,
}

impl SpectrumEstimate {
    fn windowed_slopes(&self) -> &[f64] {
        let n = self.incremental_slopes.len();
        &self.incremental_slopes[n + 1 - self.window.min(n + 1)..]
    }

    pub fn slope_min(&self) -> f64 {
        let s = self.windowed_slopes();
        if s.is_empty() { 0.0 } else { s.iter().copied().fold(f64::INFINITY, f64::min) }
    }

    pub fn slope_max(&self) -> f64 {
        let s = self.windowed_slopes();
        if s.is_empty() { 0.0 } else { s.iter().copied().fold(f64::NEG_INFINITY, f64::max) }
    }

    fn trivial(t: f64, window: usize) -> Self {
        SpectrumEstimate {
            t,
            beta_hat: 0.0,
            window,
            incremental_slopes: Vec::new(),
            fit_residual: 0.0,
            regime: Regime::Bounded,
            ls_slope: 0.0,
            increment_exponent: f64::NAN,
            log_means: Vec::new(),
        }
    }
}

/// Least-squares line `y = a + b x`; returns `(b, rms residual)`.
pub fn ls_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - b * (x - mx)).powi(2)).sum();
    (b, (ss / n).sqrt())
}

/// Regime and exponent from log-means `ys` at abscissae `xs` (pure function).
pub fn classify(t: f64, xs: &[f64], ys: &[f64], window: usize) -> Result<SpectrumEstimate> {
    if window < 3 || window > xs.len() {
        return Err(ImsError::LadderTooShort { window, rungs: xs.len() });
    }
    if t == 0.0 {
        return Ok(SpectrumEstimate::trivial(t, window));
    }
    let m = xs.len();
    let (wx, wy) = (&xs[m - window..], &ys[m - window..]);
    let (slope, residual) = ls_fit(wx, wy);
    let incremental: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let local = &incremental[incremental.len() + 1 - window..];

    let mut est = SpectrumEstimate {
        t,
        beta_hat: slope.max(0.0),
        window,
        incremental_slopes: incremental.clone(),
        fit_residual: residual,
        regime: Regime::PowerLaw,
        ls_slope: slope,
        increment_exponent: f64::NAN,
        log_means: ys.to_vec(),
    };

    let spread = local.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - local.iter().copied().fold(f64::INFINITY, f64::min);
    let steps: Vec<f64> = local.windows(2).map(|w| w[1] - w[0]).collect();
    let reverses = steps.windows(2).any(|d| d[0] * d[1] < 0.0);
    if reverses && spread > IRREGULAR_SPREAD && residual > IRREGULAR_RESIDUAL {
        est.regime = Regime::Irregular;
        est.beta_hat = local.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        return Ok(est);
    }

    let means: Vec<f64> = wy.iter().map(|y| y.exp()).collect();
    let (lo, hi) = means
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let incr: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
    let flat = incr.iter().zip(&means).all(|(d, v)| d.abs() <= FLAT_INCREMENT * v);
    let d = if incr.iter().all(|d| d.abs() > 0.0) {
        let lx: Vec<f64> = wx[..window - 1].to_vec();
        let ly: Vec<f64> = incr.iter().map(|d| d.abs().ln()).collect();
        ls_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    est.increment_exponent = d;
    if (flat || d <= -LOG_BAND) && hi / lo < BOUNDED_RATIO {
        est.regime = Regime::Bounded;
        est.beta_hat = 0.0;
        return Ok(est);
    }
    let increasing = wy.windows(2).all(|w| w[1] > w[0]);
    let ratio_falls = wx
        .iter()
        .zip(wy)
        .map(|(x, y)| y / x)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] < w[0]);
    if d.abs() < LOG_BAND && increasing && ratio_falls {
        est.regime = Regime::Logarithmic;
        est.beta_hat = 0.0;
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectrumConfig {
    pub ladder: RadiusLadder,
    pub window: usize,
    pub rtol: f64,
    pub quad: QuadConfig,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { ladder: RadiusLadder::default(), window: 6, rtol: 1e-8, quad: QuadConfig::default() }
    }
}

/// Defaults of the area estimator's `α` bracket.
pub const ALPHA_LO: f64 = -0.999;
pub const ALPHA_HI: f64 = 9.0;

/// One map's spectrum estimator; rung integrals are shared across exponents.
#[derive(Debug, Clone)]
pub struct Spectrometer {
    integrator: MeanIntegrator,
    config: SpectrumConfig,
}

impl Spectrometer {
    pub fn new(map: &AnalyticMap, config: SpectrumConfig, cache: Option<Arc<ResultCache>>) -> Self {
        Spectrometer { integrator: MeanIntegrator::new(map, config.quad, cache), config }
    }

    pub fn config(&self) -> &SpectrumConfig {
        &self.config
    }

    pub fn integrator(&self) -> &MeanIntegrator {
        &self.integrator
    }

    pub fn estimate(&self, t: f64) -> Result<SpectrumEstimate> {
        self.estimate_many(&[t])?.pop().expect("one exponent in, one out")
    }

    /// One estimate per exponent; the outer error only reports a failed evaluation.
    pub fn estimate_many(&self, ts: &[f64]) -> Result<Vec<Result<SpectrumEstimate>>> {
        let ladder = self.config.ladder;
        let window = self.config.window;
        if window > ladder.len() {
            return Err(ImsError::LadderTooShort { window, rungs: ladder.len() });
        }
        let xs = ladder.xs();
        let active: Vec<f64> = ts.iter().copied().filter(|t| *t != 0.0).collect();
        let mut series = if active.is_empty() {
            Vec::new()
        } else {
            self.integrator.mean_series(&active, &ladder.radii(), self.config.rtol)?
        }
        .into_iter();
        Ok(ts
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    return classify(t, &xs, &xs, window);
                }
                let s = series.next().expect("one series per nonzero exponent")?;
                let ys: Vec<f64> = s.entries.iter().map(|m| m.value.ln()).collect();
                classify(t, &xs, &ys, window)
            })
            .collect())
    }

    /// Exponent from the area criterion: bisection on `α` for the boundary
    /// between divergent and convergent annulus tails; returns `α* + 1`.
    pub fn estimate_area(&self, t: f64, alpha_lo: f64, alpha_hi: f64) -> Result<f64> {
        if !(alpha_lo > -1.0 && alpha_lo < alpha_hi) {
            return Err(ImsError::InvalidArgument(format!(
                "alpha bracket [{alpha_lo}, {alpha_hi}] must satisfy -1 < lo < hi"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let profile =
            self.integrator.annulus_profile(t, &self.config.ladder.radii(), self.config.rtol)?;
        let divergent = |alpha: f64| {
            let a = profile.tails(alpha);
            let n = a.len();
            n >= 2 && a[n - 1] / a[n - 2] >= 1.0 - DIVERGENCE_SLACK
        };
        if !divergent(alpha_lo) {
            if alpha_lo + 1.0 <= LOG_BAND {
                return Ok(0.0);
            }
            return Err(ImsError::Bracket { lo: alpha_lo, hi: alpha_hi });
        }
        if divergent(alpha_hi) {
            return Err(ImsError::Bracket { lo: alpha_lo, hi: alpha_hi });
        }
        let (mut lo, mut hi) = (alpha_lo, alpha_hi);
        for _ in 0..AREA_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if divergent(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi) + 1.0)
    }
}

pub fn estimate_beta(
    map: &AnalyticMap,
    t: f64,
    ladder: RadiusLadder,
    window: usize,
    rtol: f64,
) -> Result<SpectrumEstimate> {
    let config = SpectrumConfig { ladder, window, rtol, ..SpectrumConfig::default() };
    Spectrometer::new(map, config, None).estimate(t)
}

pub fn estimate_beta_area(
    map: &AnalyticMap,
    t: f64,
    alpha_lo: f64,
    alpha_hi: f64,
    ladder: RadiusLadder,
) -> Result<f64> {
    let config = SpectrumConfig { ladder, ..SpectrumConfig::default() };
    Spectrometer::new(map, config, None).estimate_area(t, alpha_lo, alpha_hi)
}

/// One row per exponent; a failed row does not abort the table.
pub fn spectrum_curve(
    map: &AnalyticMap,
    t_values: &[f64],
    ladder: RadiusLadder,
    window: usize,
) -> Result<Vec<(f64, Result<SpectrumEstimate>)>> {
    if let Some(t) = t_values.iter().find(|t| !t.is_finite()) {
        return Err(ImsError::InvalidArgument(format!("non-finite exponent {t}")));
    }
    let config = SpectrumConfig { ladder, window, ..SpectrumConfig::default() };
    let rows = Spectrometer::new(map, config, None).estimate_many(t_values)?;
    Ok(t_values.iter().copied().zip(rows).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs() -> Vec<f64> {
        RadiusLadder::default().xs()
    }

    #[test]
    fn ladder_validation() {
        assert!(RadiusLadder::new(3, 13).is_ok());
        assert!(RadiusLadder::new(1, 13).is_err());
        assert!(RadiusLadder::new(5, 5).is_err());
        assert!(RadiusLadder::new(3, 16).is_err());
        let l = RadiusLadder::default();
        assert_eq!(l.len(), 11);
        assert_eq!(l.radii()[0], 0.875);
    }

    #[test]
    fn exact_power_law() {
        let ys: Vec<f64> = xs().iter().map(|x| 0.3 + 1.7 * x).collect();
        let e = classify(1.0, &xs(), &ys, 6).unwrap();
        assert_eq!(e.regime, Regime::PowerLaw);
        assert!((e.beta_hat - 1.7).abs() < 1e-12);
        assert!(e.fit_residual < 1e-12);
        assert!((e.increment_exponent - 1.7).abs() < 1e-9);
    }

    #[test]
    fn logarithmic_growth() {
        let ys: Vec<f64> = xs().iter().map(|x| (2.0 + 3.0 * x).ln()).collect();
        let e = classify(2.0, &xs(), &ys, 6).unwrap();
        assert_eq!(e.regime, Regime::Logarithmic);
        assert_eq!(e.beta_hat, 0.0);
        assert!(e.ls_slope > 0.05);
    }

    #[test]
    fn bounded_means() {
        let ys: Vec<f64> = xs().iter().map(|x| (5.0 - (-x).exp()).ln()).collect();
        let e = classify(0.2, &xs(), &ys, 6).unwrap();
        assert_eq!(e.regime, Regime::Bounded);
        assert_eq!(e.beta_hat, 0.0);
        let flat = vec![TAU_LN; 11];
        let e = classify(3.0, &xs(), &flat, 6).unwrap();
        assert_eq!(e.regime, Regime::Bounded);
    }

    const TAU_LN: f64 = 1.8378770664093453;

    #[test]
    fn oscillating_slopes_are_irregular() {
        let ys: Vec<f64> = xs()
            .iter()
            .enumerate()
            .map(|(k, x)| x + if k % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        let e = classify(1.0, &xs(), &ys, 6).unwrap();
        assert_eq!(e.regime, Regime::Irregular);
        assert!((e.beta_hat - e.slope_max()).abs() < 1e-15);
    }

    #[test]
    fn window_validation_and_t_zero() {
        let ys = xs();
        assert!(matches!(classify(1.0, &xs(), &ys, 12), Err(ImsError::LadderTooShort { .. })));
        assert!(classify(1.0, &xs(), &ys, 2).is_err());
        let e = classify(0.0, &xs(), &ys, 6).unwrap();
        assert_eq!((e.beta_hat, e.regime), (0.0, Regime::Bounded));
    }
}
