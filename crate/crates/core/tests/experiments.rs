use imslab::experiments::{
    check_asymptotic_equivalence, check_continuity, check_growth_bounds, check_monotonicity,
    check_stability, perturb_spectrum, run_suite, search_lower_bound, summarize, Lab, Status,
    Subject,
};
use imslab::families::{Family, FamilyKind};
use imslab::{AnalyticMap, ImsError};
use num_complex::Complex64 as C64;

fn fam(f: Family) -> Subject {
    Subject::family(f).unwrap()
}

fn id() -> Subject {
    Subject::from_map("id", AnalyticMap::identity())
}

#[test]
fn stability_examples() {
    let lab = Lab::default();
    let f = fam(Family::PowerMapF(0.5));
    let same = check_stability(&lab, &f, &f, 2.0, 0.5).unwrap();
    assert_eq!(same.observed, 0.0);
    assert!(same.pass);

    let g = fam(Family::PowerMapF(0.6));
    let r = check_stability(&lab, &f, &g, 4.0, 0.5).unwrap();
    assert!((r.observed - 0.4).abs() < 0.05, "{r:?}");
    assert!(r.bound > 0.8 && r.bound < 1.0, "{r:?}");
    assert_eq!(r.status, Status::Pass);

    let a = fam(Family::PowerMapF(0.3));
    let b = fam(Family::PowerMapF(0.35));
    let r = check_stability(&lab, &a, &b, -3.0, 0.5).unwrap();
    assert!(r.pass && r.observed < 0.01, "{r:?}");

    assert!(matches!(check_stability(&lab, &f, &g, 0.0, 0.5), Err(ImsError::InvalidArgument(_))));
    let uncertified = Subject::from_map("koebe", AnalyticMap::parse("koebe").unwrap());
    assert!(check_stability(&lab, &f, &uncertified, 1.0, 0.5).is_err());
}

#[test]
fn growth_bound_examples() {
    let lab = Lab::default();
    let f = fam(Family::PowerMapF(0.5));
    let r = check_growth_bounds(&lab, &f, &f, 0.5).unwrap();
    assert!(r.pass && r.observed == 0.0);
    let g = fam(Family::PowerMapF(0.6));
    let r = check_growth_bounds(&lab, &f, &g, 0.5).unwrap();
    assert!(r.pass && r.margin > 0.0, "{r:?}");
    let r = check_growth_bounds(&lab, &fam(Family::Koebe), &f, 0.5).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn continuity_examples() {
    let lab = Lab::default();
    let r = check_continuity(&lab, FamilyKind::PowerMapF, &[0.6, 0.55, 0.52, 0.51], 0.5, 4.0).unwrap();
    assert!(r.pass, "{r:?}");
    let r = check_continuity(&lab, FamilyKind::PowerMapF, &[0.5, 0.5], 0.5, 4.0).unwrap();
    assert!(r.pass && r.observed == 0.0, "{r:?}");
    let r = check_continuity(&lab, FamilyKind::PowerMapF, &[0.9, 0.95, 0.98, 0.99], 1.0, 2.0).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(check_continuity(&lab, FamilyKind::PowerMapF, &[1.2], 0.5, 4.0).is_err());
}

#[test]
fn equivalence_examples() {
    let lab = Lab::default();
    let f = fam(Family::PowerMapF(0.5));
    let shifted = Subject::from_map("affine", f.map.post_affine(C64::new(2.0, -1.0), C64::new(0.5, 0.0)));
    let r = check_asymptotic_equivalence(&lab, &f, &shifted, &[1.0, 4.0]).unwrap();
    assert!(r.pass && r.observed < 1e-9, "{r:?}");
    let r = check_asymptotic_equivalence(&lab, &fam(Family::KoebeScaled(0.9)), &id(), &[-2.0, 1.0, 2.0]).unwrap();
    assert_eq!(r.status, Status::Pass, "{r:?}");
    let r = check_asymptotic_equivalence(&lab, &f, &fam(Family::LogMap), &[2.0]).unwrap();
    assert_eq!(r.status, Status::Informational);
}

#[test]
fn perturbation_examples() {
    let lab = Lab::default();
    let r = perturb_spectrum(&lab, &fam(Family::PowerMapF(0.5)), 0.04, 4.0).unwrap();
    assert!(r.pass, "{r:?}");
    assert!((r.premises["beta_F"] - 1.08).abs() < 0.06);
    let r = perturb_spectrum(&lab, &fam(Family::Koebe), 0.04, 1.0).unwrap();
    assert!(r.pass && (r.premises["beta_F"] - 2.12).abs() < 0.06, "{r:?}");
    let r = perturb_spectrum(&lab, &fam(Family::KoebeScaled(0.9)), 1e-3, 2.0).unwrap();
    assert!(r.pass && r.notes.contains("equality"), "{r:?}");
    assert!(matches!(perturb_spectrum(&lab, &fam(Family::Koebe), 0.1, 1.0), Err(ImsError::Range { .. })));
    assert!(perturb_spectrum(&lab, &fam(Family::Koebe), 0.0, 1.0).is_err());
}

#[test]
fn monotonicity_examples() {
    let lab = Lab::default();
    let r = check_monotonicity(&lab, &fam(Family::Koebe), &[0.4, 0.6, 1.0, 2.0]).unwrap();
    assert!(r.pass, "{r:?}");
    let r = check_monotonicity(&lab, &fam(Family::PowerMapG(0.8)), &[-3.0, -2.5, -2.0, -1.5]).unwrap();
    assert!(r.pass, "{r:?}");
    let r = check_monotonicity(&lab, &id(), &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
}

#[test]
fn search_examples() {
    let lab = Lab::default();
    let out = search_lower_bound(&lab, FamilyKind::PowerMapF, (0.1, 0.9), 2.0, 12).unwrap();
    assert!(out.param_star >= 0.88, "{out:?}");
    assert!((out.beta_star - 0.8).abs() < 0.06);
    assert!((out.extrapolation.family_sup.unwrap() - 1.0).abs() <= 0.1);
    assert!((out.extrapolation.limit_beta.unwrap() - 1.0).abs() <= 0.05);
    assert!(!out.violation);
    let out = search_lower_bound(&lab, FamilyKind::PowerMapG, (0.1, 0.9), -3.0, 12).unwrap();
    assert!(out.param_star >= 0.88 && (out.beta_star - 1.7).abs() < 0.06, "{out:?}");
    assert!((out.extrapolation.family_sup.unwrap() - 2.0).abs() <= 0.1);
}

#[test]
fn growth_and_monotonicity_suites_pass() {
    let lab = Lab::default();
    for suite in ["growth", "monotonicity"] {
        let reports = run_suite(&lab, suite).unwrap();
        let s = summarize(&reports);
        assert!(s.ok(), "{suite}: {reports:#?}");
    }
}
