use serde::Serialize;

use super::{CheckReport, Lab, Status, Subject, SCHEMA_VERSION};
use crate::error::{ImsError, Result};
use crate::families::{FamilyKind, BETA_TOL};

/// Allowed excess of a search result over a proven row before it is flagged.
pub const VIOLATION_FACTOR: f64 = 3.0;
/// The second extrapolation probe sits this fraction of the interval below `b`.
pub const EXTRAPOLATION_STEP: f64 = 0.1;
pub const MIN_BUDGET: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub param: f64,
    pub beta_hat: Option<f64>,
    pub error: Option<String>,
}

/// Linear extrapolation of `β̂` from two probes near `b` to the end of the valid range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub near: Probe,
    pub far: Probe,
    pub boundary: f64,
    pub family_sup: Option<f64>,
    pub limit_map: String,
    pub limit_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: &'static str,
    /// `proven`, `floor`, `conjecture` or `lower_bound`.
    pub kind: &'static str,
    pub value: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub schema_version: u32,
    pub family: &'static str,
    pub interval: (f64, f64),
    pub t: f64,
    pub budget: usize,
    pub param_star: f64,
    pub beta_star: f64,
    pub probes: Vec<Probe>,
    pub extrapolation: Extrapolation,
    pub comparison: Vec<ComparisonRow>,
    pub violation: bool,
}

/// Known values or bounds of the universal spectra that apply at `t`.
pub fn comparison_rows(t: f64, beta_star: f64) -> Vec<ComparisonRow> {
    let limit = beta_star - VIOLATION_FACTOR * BETA_TOL;
    let mut rows = Vec::new();
    let mut push = |label, kind, value: f64| {
        rows.push(ComparisonRow { label, kind, value, violation: kind == "proven" && limit > value });
    };
    if t >= 0.4 {
        push("B(t) = 3t-1 (t >= 2/5)", "proven", 3.0 * t - 1.0);
    }
    if t >= 2.0 {
        push("B_b(t) = t-1 (t >= 2)", "proven", t - 1.0);
    }
    if t <= -2.0 {
        push("B_b(t) = |t|-1 (t <= -2)", "floor", t.abs() - 1.0);
    }
    if t.abs() <= 2.0 {
        push("B_b(t) = t^2/4 (|t| <= 2)", "conjecture", t * t / 4.0);
    }
    if t > 0.0 && t <= 0.4 {
        push("B(t) > t^2/5 (0 < t <= 2/5)", "lower_bound", t * t / 5.0);
    }
    rows
}

fn probe(lab: &Lab, kind: FamilyKind, p: f64, t: f64) -> Probe {
    match Subject::family(kind.member(p)).and_then(|s| lab.beta(&s.map, t)) {
        Ok(e) => Probe { param: p, beta_hat: Some(e.beta_hat), error: None },
        Err(e) => Probe { param: p, beta_hat: None, error: Some(e.to_string()) },
    }
}

fn score(p: &Probe) -> f64 {
    p.beta_hat.unwrap_or(f64::NEG_INFINITY)
}

/// Golden-section maximization of `β̂(t)` over the family parameter; a failed
/// evaluation scores `-∞`, which cuts its side of the bracket away.
pub fn search_lower_bound(lab: &Lab, kind: FamilyKind, interval: (f64, f64), t: f64, budget: usize) -> Result<SearchOutcome> {
    let (lo, hi) = kind.valid_range();
    let (a0, b0) = interval;
    if !(a0 > lo && b0 < hi && a0 < b0) {
        return Err(ImsError::Range {
            family: kind.name().into(),
            value: if a0 <= lo { a0 } else { b0 },
            range: format!("({lo}, {hi})"),
        });
    }
    if budget < MIN_BUDGET {
        return Err(ImsError::InvalidArgument(format!("search budget {budget} below {MIN_BUDGET}")));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a0, b0);
    let mut probes = Vec::with_capacity(budget + 2);
    let mut c = probe(lab, kind, b - phi * (b - a), t);
    let mut d = probe(lab, kind, a + phi * (b - a), t);
    probes.push(c.clone());
    probes.push(d.clone());
    while probes.len() < budget {
        // ties move toward larger parameters
        if score(&c) > score(&d) {
            b = d.param;
            d = c;
            c = probe(lab, kind, b - phi * (b - a), t);
            probes.push(c.clone());
        } else {
            a = c.param;
            c = d;
            d = probe(lab, kind, a + phi * (b - a), t);
            probes.push(d.clone());
        }
    }
    let near = probe(lab, kind, b0, t);
    let far = probe(lab, kind, b0 - EXTRAPOLATION_STEP * (b0 - a0), t);
    let best = probes
        .iter()
        .chain([&near])
        .filter(|p| p.beta_hat.is_some())
        .max_by(|x, y| score(x).total_cmp(&score(y)).then(x.param.total_cmp(&y.param)))
        .ok_or_else(|| ImsError::Evaluation(format!("every {} evaluation failed", kind.name())))?;
    let (param_star, beta_star) = (best.param, score(best));

    let family_sup = match (near.beta_hat, far.beta_hat) {
        (Some(bn), Some(bf)) => Some(bn + (bn - bf) / (near.param - far.param) * (hi - near.param)),
        _ => None,
    };
    let limit = kind.upper_limit();
    let limit_beta = limit.make(false).and_then(|m| lab.beta(&m, t)).ok().map(|e| e.beta_hat);
    let comparison = comparison_rows(t, beta_star);
    let violation = comparison.iter().any(|r| r.violation);
    Ok(SearchOutcome {
        schema_version: SCHEMA_VERSION,
        family: kind.name(),
        interval,
        t,
        budget,
        param_star,
        beta_star,
        probes,
        extrapolation: Extrapolation { near, far, boundary: hi, family_sup, limit_map: limit.to_string(), limit_beta },
        comparison,
        violation,
    })
}

impl SearchOutcome {
    /// `β*` against the tightest proven row plus slack; informational where no row is proven.
    pub fn to_report(&self) -> CheckReport {
        let id = format!("search[{}|[{:?},{:?}]|t={:?}]", self.family, self.interval.0, self.interval.1, self.t);
        let premises = [
            ("t", self.t),
            ("param_star", self.param_star),
            ("family_sup", self.extrapolation.family_sup.unwrap_or(f64::NAN)),
            ("limit_beta", self.extrapolation.limit_beta.unwrap_or(f64::NAN)),
        ];
        let proven = self
            .comparison
            .iter()
            .filter(|r| r.kind == "proven")
            .map(|r| r.value)
            .fold(f64::INFINITY, f64::min);
        if proven.is_finite() {
            CheckReport::new(id, &premises, proven + VIOLATION_FACTOR * BETA_TOL, self.beta_star, 0.0)
        } else {
            CheckReport::new(id, &premises, self.beta_star, self.beta_star, 0.0)
                .with_status(Status::Informational)
                .note("no proven row at t")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_by_exponent() {
        let labels = |t| comparison_rows(t, 0.0).iter().map(|r| r.kind).collect::<Vec<_>>();
        assert_eq!(labels(2.0), ["proven", "proven", "conjecture"]);
        assert_eq!(labels(-3.0), ["floor"]);
        assert_eq!(labels(0.3), ["conjecture", "lower_bound"]);
        assert!(comparison_rows(2.0, 1.0 + 3.0 * BETA_TOL + 0.01)[1].violation);
        assert!(!comparison_rows(2.0, 1.1)[1].violation);
    }

    #[test]
    fn zero_exponent_search() {
        let lab = Lab::default();
        let out = search_lower_bound(&lab, FamilyKind::PowerMapF, (0.1, 0.9), 0.0, 8).unwrap();
        assert_eq!(out.beta_star, 0.0);
        assert_eq!(out.param_star, 0.9);
        assert!(!out.violation);
        assert!(search_lower_bound(&lab, FamilyKind::PowerMapF, (0.1, 1.0), 2.0, 8).is_err());
        assert!(search_lower_bound(&lab, FamilyKind::PowerMapF, (0.1, 0.9), 2.0, 4).is_err());
    }
}
