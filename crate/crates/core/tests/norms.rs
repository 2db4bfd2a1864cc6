use imslab::norms::{
    asymptotic_seminorm, growth_norm, little_o_test, tail_deviation, GridSpec,
};
use imslab::AnalyticMap;
use num_complex::Complex64 as C64;

fn map(text: &str) -> AnalyticMap {
    AnalyticMap::parse(text).unwrap()
}

fn norm(phi: &AnalyticMap, j: u32) -> f64 {
    growth_norm(phi, j, &GridSpec::default()).unwrap().value
}

#[test]
fn koebe_pre_schwarzian_norm_approaches_six() {
    let rep = growth_norm(&map("koebe").pre_schwarzian(), 1, &GridSpec::default()).unwrap();
    assert!(rep.value >= 5.999 && rep.value <= 6.0 + 1e-6, "{}", rep.value);
    assert!(rep.witness.im.abs() < 1e-9 && rep.witness.re > 0.99);
    let profile = &rep.tail_profile;
    assert_eq!(profile.len(), 14);
    assert!(profile.windows(2).all(|w| w[1].1 <= w[0].1));
}

#[test]
fn closed_form_norms() {
    let n_log = norm(&map("logmap").pre_schwarzian(), 1);
    assert!((n_log - 2.0).abs() <= 1e-3, "{n_log}");
    let s_k = norm(&map("koebe").schwarzian(), 2);
    assert!((s_k - 6.0).abs() <= 1e-3 && s_k <= 6.0 + 1e-6, "{s_k}");
    assert_eq!(norm(&AnalyticMap::constant(C64::new(0.0, 0.0)), 1), 0.0);
}

#[test]
fn triangle_inequality_on_shared_grid() {
    let a = map("koebe").pre_schwarzian();
    let b = map("fgamma(0.4)").schwarzian();
    let s = a.sum(&b);
    assert!(norm(&s, 1) <= norm(&a, 1) + norm(&b, 1) + 1e-9);
}

#[test]
fn tail_deviation_examples() {
    let f = map("fgamma(0.5)");
    assert_eq!(tail_deviation(&f, &f, 0.5).unwrap(), 0.0);
    let g = map("fgamma(0.6)");
    let d = tail_deviation(&f, &g, 0.5).unwrap();
    assert!((0.15..=0.2).contains(&d), "{d}");
    for gamma in [0.3, 0.7] {
        let d = tail_deviation(&map("logmap"), &map(&format!("fgamma({gamma})")), 0.5).unwrap();
        let w = 1.0 - gamma;
        assert!(d >= 1.5 * w && d <= 2.0 * w, "{d}");
    }
    let rs = [0.5, 0.75, 0.9, 0.99];
    let devs: Vec<f64> = rs.iter().map(|&r| tail_deviation(&map("koebe"), &f, r).unwrap()).collect();
    assert!(devs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{devs:?}");
}

#[test]
fn asymptotic_seminorm_profiles() {
    let c = asymptotic_seminorm(&AnalyticMap::constant(C64::new(2.0, 0.0)), 1).unwrap();
    assert_eq!(c.len(), 10);
    assert!(c.windows(2).all(|w| w[1].1 < w[0].1));
    assert!((c[0].1 - 2.0 * (1.0 - c[0].0 * c[0].0)).abs() < 1e-12);
    let k = asymptotic_seminorm(&map("kscaled(0.9)").pre_schwarzian(), 1).unwrap();
    assert!(k.last().unwrap().1 <= 0.02);
    let cover = asymptotic_seminorm(&map("cover(1.0)"), 1).unwrap();
    assert!((cover.last().unwrap().1 - 2.0).abs() < 1e-2);
}

#[test]
fn little_o_examples() {
    assert!(little_o_test(&AnalyticMap::constant(C64::new(5.0, 0.0)), 1, 0.05).unwrap().holds);
    let n = map("kscaled(0.9)").pre_schwarzian();
    assert!(little_o_test(&n.difference(&n), 1, 1e-6).unwrap().holds);
    assert!(little_o_test(&n, 1, 0.05).unwrap().holds);
    let v = little_o_test(&map("cover(1.0)"), 1, 0.05).unwrap();
    assert!(!v.holds);
    assert_eq!(v.profile.len(), 14);
}

#[test]
fn catalog_maps_respect_univalence_bounds() {
    for text in [
        "koebe",
        "logmap",
        "gmap",
        "kscaled(0.5)",
        "kscaled(0.9)",
        "fgamma(0.2)",
        "fgamma(0.9)",
        "ggamma(0.3)",
        "ggamma(0.8)",
        "derivpow(fgamma(0.5),1.04)",
    ] {
        let f = map(text);
        let n1 = norm(&f.pre_schwarzian(), 1);
        let n2 = norm(&f.schwarzian(), 2);
        assert!(n1 <= 6.0 + 1e-6 && n2 <= 6.0 + 1e-6, "{text}: {n1} {n2}");
    }
}

#[test]
fn family_limit_distances() {
    let log = map("logmap").pre_schwarzian();
    let gmap = map("gmap").pre_schwarzian();
    let mut last = f64::INFINITY;
    for gamma in [0.5, 0.8, 0.95, 0.99] {
        let d = norm(&map(&format!("fgamma({gamma})")).pre_schwarzian().difference(&log), 1);
        assert!((d - 2.0 * (1.0 - gamma)).abs() <= 1e-3, "{gamma}: {d}");
        let e = norm(&map(&format!("ggamma({gamma})")).pre_schwarzian().difference(&gmap), 1);
        assert!(e < last);
        last = e;
    }
    assert!(last < 0.03);
}
