//! Exact expression trees for analytic maps of the unit disk.

mod derive;
mod eval;
pub mod expr;
pub mod parse;

use std::fmt;

use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

pub use derive::{deriv_power_generic, log_derivative};
pub use eval::{radial_primitive, PrimitiveRule, DIVISION_FLOOR};
pub use expr::{Expr, Node};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum UnivalenceCertificate {
    CatalogCertified,
    Unknown,
}

/// An analytic function on the open unit disk with its provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMap {
    pub node: Node,
    pub certificate: UnivalenceCertificate,
    pub nonvanishing_derivative: bool,
}

impl AnalyticMap {
    /// A map with no univalence claim.
    pub fn new(node: Node) -> Self {
        AnalyticMap {
            node,
            certificate: UnivalenceCertificate::Unknown,
            nonvanishing_derivative: false,
        }
    }

    /// A catalog map: certified univalent, derivative nonvanishing.
    pub fn certified(node: Node) -> Self {
        AnalyticMap {
            node,
            certificate: UnivalenceCertificate::CatalogCertified,
            nonvanishing_derivative: true,
        }
    }

    /// Parses a map expression without certification.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(parse::parse_expr(text)?))
    }

    pub fn identity() -> Self {
        Self::certified(expr::identity())
    }

    pub fn constant(v: C64) -> Self {
        Self::new(expr::constant(v))
    }

    pub fn is_certified(&self) -> bool {
        self.certificate == UnivalenceCertificate::CatalogCertified
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.eval_with(&[z], &PrimitiveRule::default())?[0])
    }

    /// Values along `pts`, read as an ordered path (cheapest when consecutive
    /// points are close, e.g. a circle sweep).
    pub fn eval_many(&self, pts: &[C64]) -> Result<Vec<C64>> {
        self.eval_with(pts, &PrimitiveRule::default())
    }

    pub fn eval_with(&self, pts: &[C64], rule: &PrimitiveRule) -> Result<Vec<C64>> {
        eval::eval_points(&self.node, pts, rule)
    }

    pub fn derivative(&self) -> AnalyticMap {
        Self::new(derive::derivative(&self.node))
    }

    /// `N_f = f''/f'`
    pub fn pre_schwarzian(&self) -> AnalyticMap {
        Self::new(derive::pre_schwarzian(&self.node))
    }

    /// `S_f = N_f' - N_f^2 / 2`
    pub fn schwarzian(&self) -> AnalyticMap {
        Self::new(derive::schwarzian(&self.node))
    }

    /// `outer ∘ inner`; certified when both factors are.
    pub fn compose(outer: &AnalyticMap, inner: &AnalyticMap) -> AnalyticMap {
        let node = expr::compose(outer.node.clone(), inner.node.clone());
        if outer.is_certified() && inner.is_certified() {
            Self::certified(node)
        } else {
            Self::new(node)
        }
    }

    /// `f_phi(z) = int_0^z exp(int_0^w phi)`, so that `f(0) = 0`, `f'(0) = 1`, `N_f = phi`.
    pub fn from_pre_schwarzian(phi: &AnalyticMap) -> AnalyticMap {
        let mut f = Self::new(parse::from_phi(phi.node.clone()));
        f.nonvanishing_derivative = true;
        f
    }

    /// `G` with `G(0) = 0`, `G' = (f')^s` anchored at the principal branch at 0.
    pub fn deriv_power(&self, s: f64) -> Result<AnalyticMap> {
        let mut g = Self::new(derive::deriv_power(&self.node, s)?);
        g.nonvanishing_derivative = self.nonvanishing_derivative;
        Ok(g)
    }

    pub fn sum(&self, other: &AnalyticMap) -> AnalyticMap {
        Self::new(expr::add(self.node.clone(), other.node.clone()))
    }

    pub fn difference(&self, other: &AnalyticMap) -> AnalyticMap {
        Self::new(expr::sub(self.node.clone(), other.node.clone()))
    }

    /// `a f + b`
    pub fn post_affine(&self, a: C64, b: C64) -> AnalyticMap {
        let node = expr::add(expr::scale(a, self.node.clone()), expr::constant(b));
        AnalyticMap { node, ..self.clone() }
    }

    /// Canonical grammar text.
    pub fn canonical(&self) -> String {
        self.node.to_string()
    }

    /// Content hash of the canonical text (16 hex digits).
    pub fn map_id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }

    /// True when evaluation uses path quadrature somewhere in the tree.
    pub fn uses_quadrature(&self) -> bool {
        expr::has_quadrature(&self.node)
    }
}

impl fmt::Display for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.node.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ImsError;

    fn map(text: &str) -> AnalyticMap {
        AnalyticMap::parse(text).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn spec_values() {
        assert_eq!(map("koebe").eval(C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        assert!(close(map("koebe").eval(C64::new(0.5, 0.0)).unwrap(), C64::new(2.0, 0.0), 1e-15));
        assert!(close(
            map("logmap").eval(C64::new(0.5, 0.0)).unwrap(),
            C64::new(2f64.ln(), 0.0),
            1e-15
        ));
        assert!(matches!(
            map("koebe").eval(C64::new(0.6, 0.8)),
            Err(ImsError::Domain { .. })
        ));
    }

    #[test]
    fn derivative_of_primitive_is_integrand() {
        let g = map("pow1mz(-1.5)");
        let p = AnalyticMap::new(expr::primitive(g.node.clone()));
        assert_eq!(p.derivative().node, g.node);
        assert_eq!(map("id").derivative().node, expr::one());
    }

    #[test]
    fn f_gamma_pre_schwarzian_is_closed_form() {
        let f = map("fgamma(0.5)");
        let n = f.pre_schwarzian();
        assert_eq!(n.node, parse::parse_expr("prod(const(0.5),pow1mz(-1.0))").unwrap());
        for k in 0..20 {
            let z = C64::from_polar(0.97 * (k as f64 / 20.0), 2.3 * k as f64);
            let want = 0.5 / (C64::new(1.0, 0.0) - z);
            assert!(close(n.eval(z).unwrap(), want, 1e-12));
        }
    }

    #[test]
    fn scaled_koebe_pre_schwarzian_chain_rule() {
        let r = 0.7;
        let k = map("koebe");
        let kr = AnalyticMap::compose(&k, &AnalyticMap::new(expr::affine(C64::new(r, 0.0), C64::new(0.0, 0.0))));
        let nk = k.pre_schwarzian();
        let nkr = kr.pre_schwarzian();
        for j in 0..100 {
            let z = C64::from_polar(0.99 * ((j as f64 + 0.5) / 100.0).sqrt(), 0.7 * j as f64);
            let want = nk.eval(z * r).unwrap() * r;
            assert!(close(nkr.eval(z).unwrap(), want, 1e-12));
        }
    }

    #[test]
    fn affine_postcomposition_keeps_pre_schwarzian() {
        let f = map("fgamma(0.3)");
        let g = f.post_affine(C64::new(2.0, -1.0), C64::new(0.5, 0.5));
        for j in 0..30 {
            let z = C64::from_polar(0.9 * j as f64 / 30.0, 1.1 * j as f64);
            let a = f.pre_schwarzian().eval(z).unwrap();
            let b = g.pre_schwarzian().eval(z).unwrap();
            assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn from_pre_schwarzian_reconstructs() {
        let zero = AnalyticMap::constant(C64::new(0.0, 0.0));
        assert_eq!(AnalyticMap::from_pre_schwarzian(&zero).node, expr::identity());

        let f = AnalyticMap::from_pre_schwarzian(&map("cover(0.5)"));
        let exact = map("fgamma(0.5)");
        let z = C64::new(0.9, 0.0);
        assert!((f.eval(z).unwrap() - exact.eval(z).unwrap()).norm() < 1e-8);

        let f = AnalyticMap::from_pre_schwarzian(&map("cover(1.0)"));
        let z = C64::new(0.5, 0.0);
        assert!((f.eval(z).unwrap() - C64::new(2f64.ln(), 0.0)).norm() < 1e-8);

        let n = f.pre_schwarzian();
        for j in 0..10 {
            let z = C64::from_polar(0.99 * j as f64 / 10.0, 0.9 * j as f64);
            let want = 1.0 / (C64::new(1.0, 0.0) - z);
            assert!(close(n.eval(z).unwrap(), want, 1e-8));
        }
    }

    #[test]
    fn map_id_is_stable_and_distinguishes() {
        assert_eq!(map("koebe").map_id(), map("koebe").map_id());
        assert_ne!(map("koebe").map_id(), map("logmap").map_id());
        assert_eq!(map("koebe").map_id().len(), 16);
    }

    #[test]
    fn branch_is_continuous_along_paths() {
        let f = map("pow1mz(c(0.5,0.3))");
        let pts: Vec<C64> = (0..4000)
            .map(|j| C64::from_polar(0.999, std::f64::consts::TAU * j as f64 / 4000.0))
            .collect();
        let v = f.eval_many(&pts).unwrap();
        let d = f.derivative().eval_many(&pts).unwrap();
        for j in 1..pts.len() {
            let h = (pts[j] - pts[j - 1]).norm();
            let lip = 2.0 * d[j].norm().max(d[j - 1].norm());
            assert!((v[j] - v[j - 1]).norm() <= lip * h + 1e-12);
        }
    }
}
