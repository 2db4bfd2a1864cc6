//! Numerical checks of stability, growth, continuity and strictness
//! statements, plus a lower-bound search over one-parameter families.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{ImsError, Result};
use crate::families::{self, Family, BETA_TOL};
use crate::funcalg::AnalyticMap;
use crate::norms::GridSpec;
use crate::quadrature::ResultCache;
use crate::spectrum::{Regime, Spectrometer, SpectrumConfig, SpectrumEstimate};

pub mod checks;
pub mod search;
pub mod suite;

pub use checks::{
    check_asymptotic_equivalence, check_continuity, check_growth_bounds, check_monotonicity,
    check_stability, perturb_spectrum,
};
pub use search::{search_lower_bound, ComparisonRow, Extrapolation, Probe, SearchOutcome};
pub use suite::{run_suite, summarize, Summary, SUITES};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// Premises not met by the data (e.g. an irregular ladder); counts as a failure.
    Inconclusive,
    /// No claim is made; excluded from the suite verdict.
    Informational,
    /// The check could not be evaluated.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub check_id: String,
    pub status: Status,
    pub premises: BTreeMap<String, f64>,
    pub bound: f64,
    pub observed: f64,
    pub margin: f64,
    pub pass: bool,
    pub slack: f64,
    pub notes: String,
}

impl CheckReport {
    /// `margin = bound - observed`; passes iff `margin >= -slack`.
    pub fn new(check_id: impl Into<String>, premises: &[(&str, f64)], bound: f64, observed: f64, slack: f64) -> Self {
        let margin = bound - observed;
        let pass = margin >= -slack;
        CheckReport {
            schema_version: SCHEMA_VERSION,
            check_id: check_id.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            premises: premises.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            bound,
            observed,
            margin,
            pass,
            slack,
            notes: String::new(),
        }
    }

    pub fn errored(check_id: impl Into<String>, err: &ImsError) -> Self {
        CheckReport {
            schema_version: SCHEMA_VERSION,
            check_id: check_id.into(),
            status: Status::Error,
            premises: BTreeMap::new(),
            bound: f64::NAN,
            observed: f64::NAN,
            margin: f64::NAN,
            pass: false,
            slack: 0.0,
            notes: err.to_string(),
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn note(mut self, text: impl AsRef<str>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
        self
    }

    /// Whether the report counts toward a passing suite.
    pub fn ok(&self) -> bool {
        match self.status {
            Status::Pass => true,
            Status::Informational => true,
            Status::Fail | Status::Inconclusive | Status::Error => false,
        }
    }
}

/// A map under test, with its catalog identity when known.
#[derive(Debug, Clone)]
pub struct Subject {
    pub label: String,
    pub map: AnalyticMap,
    pub family: Option<Family>,
}

impl Subject {
    pub fn family(family: Family) -> Result<Self> {
        Ok(Subject { label: family.to_string(), map: family.make(false)?, family: Some(family) })
    }

    pub fn parse(text: &str, unchecked: bool) -> Result<Self> {
        let p = families::parse_map(text, unchecked)?;
        Ok(Subject { label: text.trim().to_string(), map: p.map, family: p.family })
    }

    pub fn from_map(label: impl Into<String>, map: AnalyticMap) -> Self {
        Subject { label: label.into(), map, family: None }
    }

    /// Estimator tolerance at `t`, doubled near known kinks.
    pub fn tolerance(&self, t: f64) -> f64 {
        self.family.as_ref().map_or(BETA_TOL, |f| f.tolerance_at(t))
    }

    pub fn reference_beta(&self, t: f64) -> Option<f64> {
        self.family.as_ref().and_then(|f| f.reference_beta(t))
    }

    /// `F` with `F' = (f')^s`.
    pub fn deriv_power(&self, s: f64) -> Result<Subject> {
        match &self.family {
            Some(f) => Subject::family(Family::DerivPowerOf(Box::new(f.clone()), s)),
            None => Ok(Subject::from_map(format!("derivpow({},{s:?})", self.label), self.map.deriv_power(s)?)),
        }
    }
}

type MemoKey = (String, u64);

/// Shared estimator state: one spectrum configuration, an optional result
/// cache and a memo of finished estimates.
#[derive(Debug)]
pub struct Lab {
    pub config: SpectrumConfig,
    pub grid: GridSpec,
    cache: Option<Arc<ResultCache>>,
    memo: Mutex<HashMap<MemoKey, Result<SpectrumEstimate>>>,
}

impl Default for Lab {
    fn default() -> Self {
        Lab::new(SpectrumConfig::default(), None)
    }
}

impl Lab {
    pub fn new(config: SpectrumConfig, cache: Option<Arc<ResultCache>>) -> Self {
        Lab { config, grid: GridSpec::default(), cache, memo: Mutex::new(HashMap::new()) }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn beta(&self, map: &AnalyticMap, t: f64) -> Result<SpectrumEstimate> {
        self.betas(map, &[t]).pop().expect("one exponent in, one out")
    }

    /// Estimates for several exponents, computing missing ones in one ladder pass.
    pub fn betas(&self, map: &AnalyticMap, ts: &[f64]) -> Vec<Result<SpectrumEstimate>> {
        let id = map.map_id();
        let key = |t: f64| (id.clone(), t.to_bits());
        let missing: Vec<f64> = {
            let memo = self.memo.lock().expect("memo lock");
            let mut m: Vec<f64> = ts.iter().copied().filter(|&t| !memo.contains_key(&key(t))).collect();
            m.sort_by(f64::total_cmp);
            m.dedup();
            m
        };
        if !missing.is_empty() {
            let spec = Spectrometer::new(map, self.config, self.cache.clone());
            let rows = match spec.estimate_many(&missing) {
                Ok(rows) => rows,
                Err(e) => missing.iter().map(|_| Err(e.clone())).collect(),
            };
            let mut memo = self.memo.lock().expect("memo lock");
            for (t, row) in missing.iter().zip(rows) {
                memo.entry(key(*t)).or_insert(row);
            }
        }
        let memo = self.memo.lock().expect("memo lock");
        ts.iter().map(|&t| memo[&key(t)].clone()).collect()
    }
}

pub(crate) fn irregular(e: &SpectrumEstimate) -> bool {
    e.regime == Regime::Irregular
}

pub(crate) fn require_certified(s: &Subject) -> Result<()> {
    if s.map.is_certified() {
        Ok(())
    } else {
        Err(ImsError::InvalidArgument(format!("'{}' is not catalog-certified univalent", s.label)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_invariant() {
        let r = CheckReport::new("x", &[("t", 1.0)], 1.0, 1.0 + 1e-10, 1e-9);
        assert!(r.pass && r.status == Status::Pass);
        let r = CheckReport::new("x", &[], 1.0, 1.1, 1e-9);
        assert!(!r.pass && !r.ok());
        assert!(r.clone().with_status(Status::Informational).ok());
    }

    #[test]
    fn memo_returns_identical_estimates() {
        let lab = Lab::default();
        let f = AnalyticMap::identity();
        let a = lab.betas(&f, &[2.0, 0.0]);
        let b = lab.beta(&f, 2.0);
        assert_eq!(a[0].as_ref().unwrap().beta_hat, b.unwrap().beta_hat);
        assert_eq!(a[1].as_ref().unwrap().beta_hat, 0.0);
    }
}
