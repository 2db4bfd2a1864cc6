//! Named extremal families with validity ranges and reference spectra.

use std::fmt;

use serde::Serialize;

use crate::error::{ImsError, Result};
use crate::funcalg::expr::{koebe, log1mz};
use crate::funcalg::parse::{self, Syntax};
use crate::funcalg::{AnalyticMap, UnivalenceCertificate};

/// Default tolerance on `|β̂ - β_ref|`.
pub const BETA_TOL: f64 = 0.06;
/// Tolerance is doubled within this distance of a kink of the reference spectrum.
pub const KINK_BAND: f64 = 0.05;
/// Largest `ε = s - 1` for which a derivative power is certified univalent.
pub const DERIV_POWER_EPS_MAX: f64 = 1.0 / 24.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Family {
    Koebe,
    KoebeScaled(f64),
    LogMap,
    PowerMapF(f64),
    PowerMapG(f64),
    /// `G = -[(1 - z)^2 - 1] / 2`, the `γ → 1` end of the g-family.
    LimitG,
    DerivPowerOf(Box<Family>, f64),
}

/// One-parameter families used by searches and continuity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    KoebeScaled,
    PowerMapF,
    PowerMapG,
}

impl FamilyKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "kscaled" | "KoebeScaled" => Ok(FamilyKind::KoebeScaled),
            "fgamma" | "PowerMapF" => Ok(FamilyKind::PowerMapF),
            "ggamma" | "PowerMapG" => Ok(FamilyKind::PowerMapG),
            other => Err(ImsError::InvalidArgument(format!(
                "unknown family '{other}' (expected fgamma, ggamma or kscaled)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::KoebeScaled => "KoebeScaled",
            FamilyKind::PowerMapF => "PowerMapF",
            FamilyKind::PowerMapG => "PowerMapG",
        }
    }

    pub fn member(&self, p: f64) -> Family {
        match self {
            FamilyKind::KoebeScaled => Family::KoebeScaled(p),
            FamilyKind::PowerMapF => Family::PowerMapF(p),
            FamilyKind::PowerMapG => Family::PowerMapG(p),
        }
    }

    /// Open parameter interval.
    pub fn valid_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// The map reached as the parameter tends to the upper end of its range.
    pub fn upper_limit(&self) -> Family {
        match self {
            FamilyKind::KoebeScaled => Family::Koebe,
            FamilyKind::PowerMapF => Family::LogMap,
            FamilyKind::PowerMapG => Family::LimitG,
        }
    }
}

fn piecewise_koebe(t: f64) -> f64 {
    if t >= 1.0 / 3.0 {
        3.0 * t - 1.0
    } else if t >= -1.0 {
        0.0
    } else {
        t.abs() - 1.0
    }
}

impl Family {
    pub fn kind(&self) -> Option<FamilyKind> {
        match self {
            Family::KoebeScaled(_) => Some(FamilyKind::KoebeScaled),
            Family::PowerMapF(_) => Some(FamilyKind::PowerMapF),
            Family::PowerMapG(_) => Some(FamilyKind::PowerMapG),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Koebe => "Koebe",
            Family::KoebeScaled(_) => "KoebeScaled",
            Family::LogMap => "LogMap",
            Family::PowerMapF(_) => "PowerMapF",
            Family::PowerMapG(_) => "PowerMapG",
            Family::LimitG => "LimitG",
            Family::DerivPowerOf(..) => "DerivPowerOf",
        }
    }

    /// Checks the parameter against the family's valid range.
    pub fn check_range(&self) -> Result<()> {
        let open_unit = |family: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(ImsError::Range { family: family.into(), value: v, range: "(0, 1)".into() })
            }
        };
        match self {
            Family::KoebeScaled(r) => open_unit("KoebeScaled", *r),
            Family::PowerMapF(g) => open_unit("PowerMapF", *g),
            Family::PowerMapG(g) => open_unit("PowerMapG", *g),
            Family::DerivPowerOf(base, s) => {
                base.check_range()?;
                if s.is_finite() && *s != 0.0 {
                    Ok(())
                } else {
                    Err(ImsError::Range { family: "DerivPowerOf".into(), value: *s, range: "s != 0".into() })
                }
            }
            _ => Ok(()),
        }
    }

    /// Derivative powers are certified only over quasidisk bases with a
    /// small exponent perturbation.
    fn certifiable(&self) -> bool {
        match self {
            Family::DerivPowerOf(base, s) => {
                let eps = s - 1.0;
                matches!(**base, Family::PowerMapF(_) | Family::PowerMapG(_) | Family::KoebeScaled(_))
                    && (0.0..=DERIV_POWER_EPS_MAX).contains(&eps)
            }
            _ => true,
        }
    }

    /// Builds the map; out-of-range parameters are an error unless `unchecked`,
    /// in which case the map carries no univalence certificate.
    pub fn make(&self, unchecked: bool) -> Result<AnalyticMap> {
        let in_range = self.check_range();
        if let Err(e) = &in_range {
            if !unchecked {
                return Err(e.clone());
            }
        }
        let node = match self {
            Family::Koebe => koebe(),
            Family::KoebeScaled(r) => parse::koebe_scaled(*r),
            Family::LogMap => log1mz(),
            Family::PowerMapF(g) => parse::f_gamma(*g)?,
            Family::PowerMapG(g) => parse::g_gamma(*g)?,
            Family::LimitG => parse::g_limit(),
            Family::DerivPowerOf(base, s) => {
                let b = base.make(unchecked)?;
                b.deriv_power(*s)?.node
            }
        };
        let mut map = AnalyticMap::certified(node);
        if in_range.is_err() || !self.certifiable() {
            map.certificate = UnivalenceCertificate::Unknown;
        }
        Ok(map)
    }

    /// Closed-form spectrum, where one is recorded.
    pub fn reference_beta(&self, t: f64) -> Option<f64> {
        if !t.is_finite() {
            return None;
        }
        Some(match self {
            Family::Koebe => piecewise_koebe(t),
            Family::KoebeScaled(_) => 0.0,
            Family::LogMap => (t - 1.0).max(0.0),
            Family::PowerMapF(g) => (g * t - 1.0).max(0.0),
            Family::PowerMapG(g) => {
                if t <= 0.0 {
                    (g * t.abs() - 1.0).max(0.0)
                } else {
                    0.0
                }
            }
            Family::LimitG => {
                if t <= 0.0 {
                    (t.abs() - 1.0).max(0.0)
                } else {
                    0.0
                }
            }
            // |G'|^t = |base'|^{st}
            Family::DerivPowerOf(base, s) => base.reference_beta(s * t)?,
        })
    }

    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Family::Koebe => vec![-1.0, 1.0 / 3.0],
            Family::KoebeScaled(_) => vec![],
            Family::LogMap => vec![1.0],
            Family::PowerMapF(g) => vec![1.0 / g],
            Family::PowerMapG(g) => vec![-1.0 / g],
            Family::LimitG => vec![-1.0],
            Family::DerivPowerOf(base, s) => base.kinks().into_iter().map(|k| k / s).collect(),
        }
    }

    /// `BETA_TOL`, doubled within `KINK_BAND` of a kink.
    pub fn tolerance_at(&self, t: f64) -> f64 {
        if self.kinks().iter().any(|k| (t - k).abs() < KINK_BAND) {
            2.0 * BETA_TOL
        } else {
            BETA_TOL
        }
    }

    pub fn reference_formula(&self) -> String {
        match self {
            Family::Koebe => "3t-1 (t>=1/3); 0 (-1<=t<1/3); |t|-1 (t<-1)".into(),
            Family::KoebeScaled(_) => "0".into(),
            Family::LogMap => "max(t-1,0) (t>=0); 0 (t<0)".into(),
            Family::PowerMapF(_) => "max(gamma*t-1,0) (t>=0); 0 (t<0)".into(),
            Family::PowerMapG(_) => "max(gamma*|t|-1,0) (t<=0); 0 (t>0)".into(),
            Family::LimitG => "max(|t|-1,0) (t<=0); 0 (t>0)".into(),
            Family::DerivPowerOf(base, _) => format!("base at s*t: {}", base.reference_formula()),
        }
    }

    /// Recognizes a top-level catalog form in parsed map text.
    pub fn from_syntax(s: &Syntax) -> Option<Result<Family>> {
        let Syntax::Call { name, args, pos } = s else { return None };
        let num = |i: usize| match args.get(i) {
            Some(Syntax::Number { value, .. }) => Ok(*value),
            _ => Err(ImsError::Parse { pos: *pos, message: format!("'{name}' expects numeric arguments") }),
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(ImsError::Parse { pos: *pos, message: format!("'{name}' takes {n} argument(s)") })
            }
        };
        let fam = match name.as_str() {
            "koebe" => arity(0).map(|_| Family::Koebe),
            "logmap" => arity(0).map(|_| Family::LogMap),
            "gmap" => arity(0).map(|_| Family::LimitG),
            "kscaled" => arity(1).and_then(|_| num(0)).map(Family::KoebeScaled),
            "fgamma" => arity(1).and_then(|_| num(0)).map(Family::PowerMapF),
            "ggamma" => arity(1).and_then(|_| num(0)).map(Family::PowerMapG),
            "derivpow" => {
                if args.len() != 2 {
                    return Some(Err(ImsError::Parse { pos: *pos, message: "'derivpow' takes 2 argument(s)".into() }));
                }
                let base = Family::from_syntax(&args[0])?;
                match (base, num(1)) {
                    (Ok(b), Ok(s)) => Ok(Family::DerivPowerOf(Box::new(b), s)),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                }
            }
            _ => return None,
        };
        Some(fam)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Koebe => write!(f, "koebe"),
            Family::KoebeScaled(r) => write!(f, "kscaled({r:?})"),
            Family::LogMap => write!(f, "logmap"),
            Family::PowerMapF(g) => write!(f, "fgamma({g:?})"),
            Family::PowerMapG(g) => write!(f, "ggamma({g:?})"),
            Family::LimitG => write!(f, "gmap"),
            Family::DerivPowerOf(b, s) => write!(f, "derivpow({b},{s:?})"),
        }
    }
}

/// A parsed map with its catalog identity, if it has one.
#[derive(Debug, Clone)]
pub struct ParsedMap {
    pub map: AnalyticMap,
    pub family: Option<Family>,
}

/// Parses map text; top-level catalog forms are range-checked and certified.
pub fn parse_map(text: &str, unchecked: bool) -> Result<ParsedMap> {
    let syntax = parse::parse_syntax(text)?;
    if let Some(fam) = Family::from_syntax(&syntax) {
        let fam = fam?;
        let map = fam.make(unchecked).map_err(|e| match e {
            ImsError::Range { .. } | ImsError::Parse { .. } => e,
            other => ImsError::Parse { pos: syntax.pos(), message: other.to_string() },
        })?;
        return Ok(ParsedMap { map, family: Some(fam) });
    }
    let node = parse::lower(&syntax)?;
    let map = if matches!(*node, crate::funcalg::Expr::Identity) {
        AnalyticMap::identity()
    } else {
        AnalyticMap::new(node)
    };
    Ok(ParsedMap { map, family: None })
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub syntax: &'static str,
    pub valid_range: &'static str,
    pub reference_beta: String,
    pub kinks: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let e = |name, syntax, valid_range, fam: Family, kinks| CatalogEntry {
        name,
        syntax,
        valid_range,
        reference_beta: fam.reference_formula(),
        kinks,
    };
    vec![
        e("Koebe", "koebe", "-", Family::Koebe, "-1, 1/3"),
        e("KoebeScaled", "kscaled(rho)", "rho in (0,1)", Family::KoebeScaled(0.5), "-"),
        e("LogMap", "logmap", "-", Family::LogMap, "1"),
        e("PowerMapF", "fgamma(gamma)", "gamma in (0,1)", Family::PowerMapF(0.5), "1/gamma"),
        e("PowerMapG", "ggamma(gamma)", "gamma in (0,1)", Family::PowerMapG(0.5), "-1/gamma"),
        e("LimitG", "gmap", "-", Family::LimitG, "-1"),
        e(
            "DerivPowerOf",
            "derivpow(base,s)",
            "certified for base in {fgamma, ggamma, kscaled}, 0 <= s-1 <= 1/24",
            Family::DerivPowerOf(Box::new(Family::Koebe), 1.0),
            "base kinks / s",
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn members_evaluate_to_formulas() {
        let f = Family::PowerMapF(0.5).make(false).unwrap();
        assert!((f.eval(C64::new(0.75, 0.0)).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        let k = Family::KoebeScaled(0.9).make(false).unwrap();
        assert_eq!(k.eval(C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        assert!((k.derivative().eval(C64::new(0.0, 0.0)).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        for fam in [Family::Koebe, Family::LogMap, Family::PowerMapG(0.4), Family::LimitG] {
            let m = fam.make(false).unwrap();
            assert_eq!(m.eval(C64::new(0.0, 0.0)).unwrap().norm(), 0.0);
            assert!((m.derivative().eval(C64::new(0.0, 0.0)).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
            assert!(m.is_certified());
        }
    }

    #[test]
    fn range_checks() {
        assert!(matches!(Family::PowerMapG(1.0).make(false), Err(ImsError::Range { .. })));
        assert!(Family::PowerMapF(1.2).make(false).is_err());
        let m = Family::PowerMapF(1.2).make(true).unwrap();
        assert!(!m.is_certified());
        assert!(Family::KoebeScaled(0.0).make(false).is_err());
    }

    #[test]
    fn reference_values() {
        assert_eq!(Family::Koebe.reference_beta(1.0), Some(2.0));
        assert_eq!(Family::Koebe.reference_beta(-2.0), Some(1.0));
        assert_eq!(Family::Koebe.reference_beta(0.2), Some(0.0));
        assert_eq!(Family::PowerMapF(0.5).reference_beta(4.0), Some(1.0));
        assert_eq!(Family::KoebeScaled(0.9).reference_beta(2.0), Some(0.0));
        assert_eq!(Family::LogMap.reference_beta(-3.0), Some(0.0));
        assert!((Family::PowerMapG(0.8).reference_beta(-3.0).unwrap() - 1.4).abs() < 1e-15);
        let d = Family::DerivPowerOf(Box::new(Family::PowerMapF(0.5)), 1.04);
        assert!((d.reference_beta(4.0).unwrap() - 1.08).abs() < 1e-12);
        assert_eq!(d.kinks(), vec![2.0 / 1.04]);
        assert_eq!(Family::Koebe.tolerance_at(0.35), 0.12);
        assert_eq!(Family::Koebe.tolerance_at(0.4), 0.06);
    }

    #[test]
    fn deriv_power_certification() {
        let ok = Family::DerivPowerOf(Box::new(Family::PowerMapF(0.5)), 1.04);
        assert!(ok.make(false).unwrap().is_certified());
        let big = Family::DerivPowerOf(Box::new(Family::PowerMapF(0.5)), 1.1);
        assert!(!big.make(false).unwrap().is_certified());
        let koebe = Family::DerivPowerOf(Box::new(Family::Koebe), 1.04);
        assert!(!koebe.make(false).unwrap().is_certified());
    }

    #[test]
    fn parse_routes_catalog_forms() {
        let p = parse_map("fgamma(0.5)", false).unwrap();
        assert_eq!(p.family, Some(Family::PowerMapF(0.5)));
        assert!(p.map.is_certified());
        assert!(matches!(parse_map("ggamma(1)", false), Err(ImsError::Range { .. })));
        assert!(parse_map("ggamma(1)", true).is_ok());
        let p = parse_map("derivpow(fgamma(0.5),1.2)", false).unwrap();
        assert!(!p.map.is_certified());
        let p = parse_map("scale(0.9,koebe)", false).unwrap();
        assert!(p.family.is_none() && !p.map.is_certified());
        assert!(parse_map("id", false).unwrap().map.is_certified());
        assert_eq!(Family::DerivPowerOf(Box::new(Family::PowerMapG(0.8)), 1.04).to_string(), "derivpow(ggamma(0.8),1.04)");
    }
}
