use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::checks::*;
use super::search::search_lower_bound;
use super::{CheckReport, Lab, Status, Subject};
use crate::error::{ImsError, Result};
use crate::families::{Family, FamilyKind};
use crate::funcalg::AnalyticMap;

pub const SUITES: [&str; 7] =
    ["stability", "growth", "continuity", "equivalence", "perturbation", "monotonicity", "search"];

/// Exponents of the stability suite.
pub const STABILITY_TS: [f64; 5] = [-2.0, -1.0, 1.0, 2.0, 4.0];
pub const STABILITY_R: f64 = 0.5;
pub const SEARCH_BUDGET: usize = 12;

type Job<'a> = (String, Box<dyn Fn() -> Result<CheckReport> + Send + Sync + 'a>);

fn fam(f: Family) -> Subject {
    Subject::family(f).expect("suite members are in range")
}

/// `f_γ` on `γ ∈ {0, 0.2, ..., 0.9, 1}`; the endpoints are the identity and the log map.
pub fn stability_family() -> Vec<Subject> {
    let mut v = vec![Subject::from_map("id", AnalyticMap::identity())];
    v.extend((2..=9).map(|k| fam(Family::PowerMapF(k as f64 / 10.0))));
    v.push(fam(Family::LogMap));
    v
}

fn jobs<'a>(lab: &'a Lab, suite: &str) -> Result<Vec<Job<'a>>> {
    let mut out: Vec<Job<'a>> = Vec::new();
    match suite {
        "stability" => {
            let members = stability_family();
            members.par_iter().for_each(|m| {
                lab.betas(&m.map, &STABILITY_TS);
            });
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    for t in STABILITY_TS {
                        let (f, g) = (members[i].clone(), members[j].clone());
                        out.push((
                            format!("stability[{}|{}|t={t:?}]", f.label, g.label),
                            Box::new(move || check_stability(lab, &f, &g, t, STABILITY_R)),
                        ));
                    }
                }
            }
        }
        "growth" => {
            for (a, b) in [
                (Family::PowerMapF(0.5), Family::PowerMapF(0.5)),
                (Family::PowerMapF(0.5), Family::PowerMapF(0.6)),
                (Family::Koebe, Family::PowerMapF(0.5)),
                (Family::PowerMapG(0.7), Family::PowerMapG(0.8)),
            ] {
                let (f, g) = (fam(a), fam(b));
                out.push((
                    format!("growth_bounds[{}|{}]", f.label, g.label),
                    Box::new(move || check_growth_bounds(lab, &f, &g, STABILITY_R)),
                ));
            }
        }
        "continuity" => {
            let cases: [(FamilyKind, Vec<f64>, f64, f64); 4] = [
                (FamilyKind::PowerMapF, vec![0.6, 0.55, 0.52, 0.51], 0.5, 4.0),
                (FamilyKind::PowerMapF, vec![0.5, 0.5, 0.5], 0.5, 4.0),
                (FamilyKind::PowerMapF, vec![0.9, 0.95, 0.98, 0.99], 1.0, 2.0),
                (FamilyKind::PowerMapG, vec![0.9, 0.95, 0.98, 0.99], 1.0, -3.0),
            ];
            for (kind, params, p0, t) in cases {
                out.push((
                    format!("continuity[{}|{params:?}->{p0:?}|t={t:?}]", kind.name()),
                    Box::new(move || check_continuity(lab, kind, &params, p0, t)),
                ));
            }
        }
        "equivalence" => {
            let f = fam(Family::PowerMapF(0.5));
            let shifted = Subject {
                label: "3*fgamma(0.5)+0.2".into(),
                map: f.map.post_affine(C64::new(3.0, 0.0), C64::new(0.2, 0.0)),
                family: f.family.clone(),
            };
            let cases = [
                (f.clone(), shifted, vec![-2.0, 1.0, 2.0, 4.0]),
                (fam(Family::KoebeScaled(0.9)), Subject::from_map("id", AnalyticMap::identity()), vec![-2.0, 1.0, 2.0]),
                (f, fam(Family::LogMap), vec![2.0, 3.0]),
            ];
            for (a, b, ts) in cases {
                out.push((
                    format!("asymptotic_equivalence[{}|{}]", a.label, b.label),
                    Box::new(move || check_asymptotic_equivalence(lab, &a, &b, &ts)),
                ));
            }
        }
        "perturbation" => {
            for (f, eps, t) in [
                (Family::PowerMapF(0.5), 0.04, 4.0),
                (Family::Koebe, 0.04, 1.0),
                (Family::PowerMapG(0.8), 0.04, -3.0),
                (Family::KoebeScaled(0.9), 1e-3, 2.0),
            ] {
                let s = fam(f);
                out.push((
                    format!("perturbation[{}|eps={eps:?}|t={t:?}]", s.label),
                    Box::new(move || perturb_spectrum(lab, &s, eps, t)),
                ));
            }
        }
        "monotonicity" => {
            for (f, ts) in [
                (Family::Koebe, vec![0.4, 0.6, 1.0, 2.0]),
                (Family::PowerMapG(0.8), vec![-3.0, -2.5, -2.0, -1.5]),
                (Family::PowerMapF(0.5), vec![2.5, 3.0, 4.0]),
            ] {
                let s = fam(f);
                out.push((format!("monotonicity[{}|{ts:?}]", s.label), Box::new(move || check_monotonicity(lab, &s, &ts))));
            }
        }
        "search" => {
            for (kind, t) in [
                (FamilyKind::PowerMapF, 2.0),
                (FamilyKind::PowerMapF, 4.0),
                (FamilyKind::PowerMapF, 0.0),
                (FamilyKind::PowerMapG, -3.0),
                (FamilyKind::KoebeScaled, 1.0),
            ] {
                out.push((
                    format!("search[{}|[0.1,0.9]|t={t:?}]", kind.name()),
                    Box::new(move || {
                        search_lower_bound(lab, kind, (0.1, 0.9), t, SEARCH_BUDGET).map(|o| o.to_report())
                    }),
                ));
            }
        }
        "all" => {
            for s in SUITES {
                out.extend(jobs(lab, s)?);
            }
        }
        other => {
            return Err(ImsError::InvalidArgument(format!(
                "unknown suite '{other}' (expected all, {})",
                SUITES.join(", ")
            )))
        }
    }
    Ok(out)
}

/// Runs a named suite (or `all`); failing checks become `Error` reports
/// instead of aborting the suite.
pub fn run_suite(lab: &Lab, suite: &str) -> Result<Vec<CheckReport>> {
    let jobs = jobs(lab, suite)?;
    Ok(jobs
        .par_iter()
        .map(|(id, job)| job().unwrap_or_else(|e| CheckReport::errored(id.clone(), &e)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub informational: usize,
}

impl Summary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}/{} checks passed ({} informational, {} failed)",
            if self.ok() { "PASS" } else { "FAIL" },
            self.passed,
            self.total - self.informational,
            self.informational,
            self.failed
        )
    }
}

pub fn summarize(reports: &[CheckReport]) -> Summary {
    let informational = reports.iter().filter(|r| r.status == Status::Informational).count();
    let passed = reports.iter().filter(|r| r.status == Status::Pass).count();
    Summary { total: reports.len(), passed, failed: reports.len() - passed - informational, informational }
}
