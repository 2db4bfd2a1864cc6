use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{irregular, require_certified, CheckReport, Lab, Status, Subject};
use crate::error::{ImsError, Result};
use crate::families::{FamilyKind, BETA_TOL, DERIV_POWER_EPS_MAX};
use crate::norms::{growth_norm, little_o_test, tail_deviation_on};

/// Inflation applied to sampled tail sups before they are used as `ε`.
pub const EPS_INFLATION: f64 = 1.05;
/// Slack for inequalities between sampled quantities.
pub const SAMPLE_SLACK: f64 = 1e-9;
/// `β̂` above which a spectrum counts as nonzero for strictness and monotonicity.
pub const ACTIVE_BETA: f64 = 0.1;
/// Threshold of the little-o test used for asymptotic equivalence.
pub const LITTLE_O_THRESHOLD: f64 = 0.05;

fn nonzero_t(t: f64) -> Result<()> {
    if t == 0.0 || !t.is_finite() {
        return Err(ImsError::InvalidArgument(format!("check needs a finite nonzero t, got {t}")));
    }
    Ok(())
}

fn fmt_t(t: f64) -> String {
    format!("{t:?}")
}

/// `|β_g(t) - β_f(t)| ≤ |t| ε` with `ε` the inflated tail deviation of the
/// pre-Schwarzians beyond `r`.
pub fn check_stability(lab: &Lab, f: &Subject, g: &Subject, t: f64, r: f64) -> Result<CheckReport> {
    nonzero_t(t)?;
    require_certified(f)?;
    require_certified(g)?;
    let dev = tail_deviation_on(&f.map, &g.map, r, &lab.grid)?;
    let eps = EPS_INFLATION * dev;
    let bf = lab.beta(&f.map, t)?;
    let bg = lab.beta(&g.map, t)?;
    let observed = (bg.beta_hat - bf.beta_hat).abs();
    let bound = t.abs() * eps + f.tolerance(t) + g.tolerance(t);
    let id = format!("stability[{}|{}|t={}]", f.label, g.label, fmt_t(t));
    let report = CheckReport::new(
        id,
        &[("t", t), ("r", r), ("eps", eps), ("tail_deviation", dev), ("beta_f", bf.beta_hat), ("beta_g", bg.beta_hat)],
        bound,
        observed,
        0.0,
    );
    if irregular(&bf) || irregular(&bg) {
        return Ok(report.with_status(Status::Inconclusive).note("irregular ladder"));
    }
    Ok(report)
}

/// Two-sided growth of `|g'/f'|` beyond `|z| = r`: `log|g'/f'|` stays within
/// `[log C₁, log C₂] ± (ε/2)·[log((1+|z|)/(1-|z|)) - log((1+r)/(1-r))]`,
/// with `C₁, C₂` the extremes on `|z| = r`.
pub fn check_growth_bounds(lab: &Lab, f: &Subject, g: &Subject, r: f64) -> Result<CheckReport> {
    require_certified(f)?;
    require_certified(g)?;
    let dev = tail_deviation_on(&f.map, &g.map, r, &lab.grid)?;
    let eps = EPS_INFLATION * dev;
    let fp = f.map.derivative();
    let gp = g.map.derivative();
    let n = lab.grid.angular_steps;
    let radii: Vec<f64> = std::iter::once(r).chain(lab.grid.radii().into_iter().filter(|&x| x > r)).collect();
    let log_ratio: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|&rho| {
            let pts: Vec<C64> =
                (0..n).map(|k| C64::from_polar(rho, std::f64::consts::TAU * k as f64 / n as f64)).collect();
            let a = fp.eval_many(&pts)?;
            let b = gp.eval_many(&pts)?;
            a.iter()
                .zip(&b)
                .map(|(a, b)| {
                    let v = b.norm().ln() - a.norm().ln();
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(ImsError::Evaluation(format!("g'/f' degenerate on |z|={rho}")))
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let log_c1 = log_ratio[0].iter().copied().fold(f64::INFINITY, f64::min);
    let log_c2 = log_ratio[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hyp = |rho: f64| ((1.0 + rho) / (1.0 - rho)).ln();
    let mut excess = f64::NEG_INFINITY;
    for (rho, row) in radii.iter().zip(&log_ratio).skip(1) {
        let allow = 0.5 * eps * (hyp(*rho) - hyp(r));
        for &v in row {
            excess = excess.max((v - log_c2).max(log_c1 - v) - allow);
        }
    }
    Ok(CheckReport::new(
        format!("growth_bounds[{}|{}|r={}]", f.label, g.label, fmt_t(r)),
        &[("r", r), ("eps", eps), ("C1", log_c1.exp()), ("C2", log_c2.exp()), ("radii", radii.len() as f64)],
        0.0,
        excess,
        SAMPLE_SLACK,
    ))
}

fn non_increasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Continuity of `φ ↦ β_{f_φ}(t)` along a family: `Δβ_n ≤ |t| δ_n + 2 tol`
/// with `δ_n = ‖N_n - N_0‖_{E_1}`, and both sequences shrinking.
/// `param_0` may sit at the upper end of the range, where the family's limit map is used.
pub fn check_continuity(lab: &Lab, kind: FamilyKind, params: &[f64], param_0: f64, t: f64) -> Result<CheckReport> {
    let (lo, hi) = kind.valid_range();
    if params.is_empty() {
        return Err(ImsError::InvalidArgument("empty parameter sequence".into()));
    }
    if let Some(p) = params.iter().find(|p| !(**p > lo && **p < hi)) {
        return Err(ImsError::Range { family: kind.name().into(), value: *p, range: format!("({lo}, {hi})") });
    }
    if !(param_0 > lo && param_0 <= hi) {
        return Err(ImsError::Range { family: kind.name().into(), value: param_0, range: format!("({lo}, {hi}]") });
    }
    let limit = if param_0 == hi { kind.upper_limit() } else { kind.member(param_0) };
    let s0 = Subject::family(limit)?;
    let members: Vec<Subject> = params.iter().map(|&p| Subject::family(kind.member(p))).collect::<Result<_>>()?;
    let n0 = s0.map.pre_schwarzian();
    let b0 = lab.beta(&s0.map, t)?;
    let rows: Vec<(f64, f64, f64)> = members
        .par_iter()
        .map(|m| {
            let delta = growth_norm(&m.map.pre_schwarzian().difference(&n0), 1, &lab.grid)?.value;
            let db = (lab.beta(&m.map, t)?.beta_hat - b0.beta_hat).abs();
            Ok((delta, db, m.tolerance(t) + s0.tolerance(t)))
        })
        .collect::<Result<_>>()?;
    let deltas: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let dbetas: Vec<f64> = rows.iter().map(|r| r.1).collect();
    // worst-margin member
    let (bound, observed) = rows
        .iter()
        .map(|&(d, db, tol)| (t.abs() * d + tol, db))
        .min_by(|a, b| (a.0 - a.1).total_cmp(&(b.0 - b.1)))
        .expect("nonempty");
    let mut report = CheckReport::new(
        format!("continuity[{}|{:?}->{}|t={}]", kind.name(), params, fmt_t(param_0), fmt_t(t)),
        &[("t", t), ("param_0", param_0), ("beta_0", b0.beta_hat), ("delta_last", *deltas.last().unwrap())],
        bound,
        observed,
        0.0,
    )
    .note(format!("delta={deltas:?}; dbeta={dbetas:?}"));
    let shrinking = non_increasing(&deltas, SAMPLE_SLACK) && non_increasing(&dbetas, 0.5 * BETA_TOL);
    if !shrinking {
        report.pass = false;
        report.status = Status::Fail;
        report = report.note("sequences not decreasing");
    }
    Ok(report)
}

/// Little-o pre-Schwarzian difference implies equal spectra; otherwise no claim.
pub fn check_asymptotic_equivalence(lab: &Lab, f: &Subject, g: &Subject, t_grid: &[f64]) -> Result<CheckReport> {
    if t_grid.is_empty() {
        return Err(ImsError::InvalidArgument("empty t grid".into()));
    }
    let diff = g.map.pre_schwarzian().difference(&f.map.pre_schwarzian());
    let verdict = little_o_test(&diff, 1, LITTLE_O_THRESHOLD)?;
    let id = format!("asymptotic_equivalence[{}|{}]", f.label, g.label);
    let tail = verdict.profile.last().map_or(0.0, |p| p.1);
    if !verdict.holds {
        return Ok(CheckReport::new(id, &[("threshold", LITTLE_O_THRESHOLD), ("tail", tail)], LITTLE_O_THRESHOLD, tail, 0.0)
            .with_status(Status::Informational)
            .note("pre-Schwarzian difference is not little-o; no claim"));
    }
    let bf = lab.betas(&f.map, t_grid);
    let bg = lab.betas(&g.map, t_grid);
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut any_irregular = false;
    for ((&t, a), b) in t_grid.iter().zip(bf).zip(bg) {
        let (a, b) = (a?, b?);
        any_irregular |= irregular(&a) || irregular(&b);
        let row = (t, f.tolerance(t) + g.tolerance(t), (a.beta_hat - b.beta_hat).abs());
        if worst.is_none_or(|w| row.1 - row.2 < w.1 - w.2) {
            worst = Some(row);
        }
    }
    let (t, bound, observed) = worst.expect("nonempty grid");
    let report = CheckReport::new(id, &[("t_worst", t), ("tail", tail)], bound, observed, 0.0);
    Ok(if any_irregular { report.with_status(Status::Inconclusive).note("irregular ladder") } else { report })
}

/// `F' = (f')^{1+ε}`: `β̂_F(t)` must match `β̂_f(t(1+ε))`, and exceed `β̂_f(t)`
/// by `0.5·ε·β̂_f(t)/(3·max(|t|,1))` whenever `β̂_f(t) > 0.1`.
pub fn perturb_spectrum(lab: &Lab, f: &Subject, eps: f64, t: f64) -> Result<CheckReport> {
    if !(eps > 0.0 && eps <= DERIV_POWER_EPS_MAX) {
        return Err(ImsError::Range { family: "perturbation".into(), value: eps, range: "(0, 1/24]".into() });
    }
    nonzero_t(t)?;
    let big = f.deriv_power(1.0 + eps)?;
    let tol = f.tolerance(t * (1.0 + eps));
    let b_big = lab.beta(&big.map, t)?;
    let b_shift = lab.beta(&f.map, t * (1.0 + eps))?;
    let b_base = lab.beta(&f.map, t)?;
    let equal_margin = 2.0 * tol - (b_big.beta_hat - b_shift.beta_hat).abs();
    let premises = [
        ("eps", eps),
        ("t", t),
        ("beta_F", b_big.beta_hat),
        ("beta_f_shifted", b_shift.beta_hat),
        ("beta_f", b_base.beta_hat),
        ("equality_margin", equal_margin),
    ];
    let id = format!("perturbation[{}|eps={}|t={}]", f.label, fmt_t(eps), fmt_t(t));
    let mut report = if b_base.beta_hat > ACTIVE_BETA {
        let required = 0.5 * eps * b_base.beta_hat / (3.0 * t.abs().max(1.0));
        let gain = b_big.beta_hat - b_base.beta_hat;
        CheckReport::new(id, &premises, gain, required, 0.0).note("strict gain clause: bound=gain, observed=required")
    } else {
        CheckReport::new(id, &premises, 2.0 * tol, (b_big.beta_hat - b_shift.beta_hat).abs(), 0.0)
            .note("zero-spectrum branch: equality clause only")
    };
    if equal_margin < 0.0 {
        report.pass = false;
        report.status = Status::Fail;
        report = report.note("equality clause failed");
    }
    if [&b_big, &b_shift, &b_base].iter().any(|e| irregular(e)) {
        report = report.with_status(Status::Inconclusive).note("irregular ladder");
    }
    Ok(report)
}

/// Strict monotonicity of `β̂` away from zero: increasing on grid points at or
/// beyond the first positive `t₁` with `β̂ > 0.1`, mirrored for negative `t`.
pub fn check_monotonicity(lab: &Lab, f: &Subject, t_grid: &[f64]) -> Result<CheckReport> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ImsError::InvalidArgument("t grid must be strictly increasing".into()));
    }
    let ests = lab.betas(&f.map, t_grid);
    let mut pairs = Vec::with_capacity(t_grid.len());
    for (&t, e) in t_grid.iter().zip(ests) {
        let e = e?;
        pairs.push((t, e.beta_hat, irregular(&e)));
    }
    let pos: Vec<_> = pairs.iter().filter(|p| p.0 > 0.0).copied().collect();
    // negative side, ordered outward from zero
    let neg: Vec<_> = pairs.iter().rev().filter(|p| p.0 < 0.0).copied().collect();
    let mut increments = Vec::new();
    let mut t1: Vec<(&str, f64)> = Vec::new();
    for (name, side) in [("t1_pos", &pos), ("t1_neg", &neg)] {
        if let Some(start) = side.iter().position(|p| p.1 > ACTIVE_BETA) {
            t1.push((name, side[start].0));
            increments.extend(side[start..].windows(2).map(|w| w[1].1 - w[0].1));
        }
    }
    let id = format!("monotonicity[{}|{:?}]", f.label, t_grid);
    if t1.is_empty() {
        return Ok(CheckReport::new(id, &[], BETA_TOL, f64::NAN, 0.0)
            .with_status(Status::Inconclusive)
            .note("no grid point with beta_hat > 0.1"));
    }
    let min_inc = increments.iter().copied().fold(f64::INFINITY, f64::min);
    let observed = if min_inc.is_finite() { min_inc } else { BETA_TOL };
    // the increments must exceed tol: bound=min increment, observed=tol
    let report = CheckReport::new(id, &t1, observed, BETA_TOL, 0.0)
        .note(format!("beta_hat={:?}", pairs.iter().map(|p| p.1).collect::<Vec<_>>()));
    Ok(if pairs.iter().any(|p| p.2) { report.with_status(Status::Inconclusive).note("irregular ladder") } else { report })
}
