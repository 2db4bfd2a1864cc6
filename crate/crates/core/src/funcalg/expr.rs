//! Expression nodes and the rule-based simplifying constructors.
//!
//! Every constructor here folds constants, merges powers of a common affine
//! base and pushes argument scalings inward, so that the trees produced by
//! differentiation stay small and closed under the catalog.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{ImsError, Result};

pub type Node = Arc<Expr>;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Identity,
    Constant(C64),
    /// `a z + b`
    Affine { a: C64, b: C64 },
    /// `-log(1 - z)`
    Log1mZ,
    /// `(a z + b)^s` on the principal branch; `Re b >= |a|` unless `s` is an integer.
    AffinePower { a: C64, b: C64, s: C64 },
    /// `z / (1 - z)^2`
    Koebe,
    Sum(Node, Node),
    Product(Node, Node),
    Quotient(Node, Node),
    Exp(Node),
    /// `z -> inner(rho z)`, `rho` in (0, 1].
    ScaleArg { rho: f64, inner: Node },
    /// `outer(inner(z))`
    Compose { outer: Node, inner: Node },
    DerivPower(DerivPowerNode),
    /// `z -> int_0^z integrand`, evaluated by path quadrature.
    Primitive(Node),
}

/// `G` with `G(0) = 0` and `G' = exp(s L)`, `L` the radial continuation of
/// `log base'` anchored at the principal value at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivPowerNode {
    pub base: Node,
    pub s: f64,
    /// Tree for `G'`.
    pub deriv: Node,
    /// Closed form of `G` when the rewrite rules find one.
    pub closed: Option<Node>,
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn constant(v: C64) -> Node {
    Arc::new(Expr::Constant(v))
}

pub fn real(v: f64) -> Node {
    constant(c(v))
}

pub fn zero() -> Node {
    real(0.0)
}

pub fn one() -> Node {
    real(1.0)
}

pub fn identity() -> Node {
    Arc::new(Expr::Identity)
}

pub fn koebe() -> Node {
    Arc::new(Expr::Koebe)
}

pub fn log1mz() -> Node {
    Arc::new(Expr::Log1mZ)
}

pub fn affine(a: C64, b: C64) -> Node {
    if a == C64::new(0.0, 0.0) {
        return constant(b);
    }
    if a == c(1.0) && b == c(0.0) {
        return identity();
    }
    Arc::new(Expr::Affine { a, b })
}

pub(crate) fn integer_exponent(s: C64) -> Option<i32> {
    if s.im == 0.0 && s.re.fract() == 0.0 && s.re.abs() <= 64.0 {
        Some(s.re as i32)
    } else {
        None
    }
}

/// `(a z + b)^s`, rejecting branch choices that are not single-valued on the disk.
/// Integer powers are always accepted; poles surface as evaluation errors.
pub fn pow_affine(a: C64, b: C64, s: C64) -> Result<Node> {
    if integer_exponent(s).is_none() && b.re < a.norm() {
        return Err(ImsError::InvalidArgument(format!(
            "principal branch of (({a})z+({b}))^({s}) is not single-valued on the disk"
        )));
    }
    Ok(pow_affine_unchecked(a, b, s))
}

pub(crate) fn pow_affine_unchecked(a: C64, b: C64, s: C64) -> Node {
    if s == c(0.0) {
        return one();
    }
    if s == c(1.0) {
        return affine(a, b);
    }
    if a == c(0.0) {
        let v = match integer_exponent(s) {
            Some(k) => b.powi(k),
            None => (s * b.ln()).exp(),
        };
        return constant(v);
    }
    Arc::new(Expr::AffinePower { a, b, s })
}

/// `(1 - z)^s`
pub fn pow_one_minus_z(s: C64) -> Node {
    pow_affine_unchecked(c(-1.0), c(1.0), s)
}

pub fn as_constant(e: &Node) -> Option<C64> {
    match **e {
        Expr::Constant(v) => Some(v),
        _ => None,
    }
}

fn is_const(e: &Node, v: f64) -> bool {
    as_constant(e) == Some(c(v))
}

/// Splits `c * rest` into its constant factor.
fn split_scale(e: &Node) -> (C64, Node) {
    match &**e {
        Expr::Product(l, r) => match as_constant(l) {
            Some(k) => (k, r.clone()),
            None => (c(1.0), e.clone()),
        },
        Expr::Constant(v) => (*v, one()),
        _ => (c(1.0), e.clone()),
    }
}

fn as_power(e: &Node) -> Option<(C64, C64, C64)> {
    match **e {
        Expr::AffinePower { a, b, s } => Some((a, b, s)),
        Expr::Affine { a, b } => Some((a, b, c(1.0))),
        Expr::Identity => Some((c(1.0), c(0.0), c(1.0))),
        _ => None,
    }
}

pub fn add(u: Node, v: Node) -> Node {
    if let (Some(x), Some(y)) = (as_constant(&u), as_constant(&v)) {
        return constant(x + y);
    }
    if is_const(&u, 0.0) {
        return v;
    }
    if is_const(&v, 0.0) {
        return u;
    }
    let (cu, xu) = split_scale(&u);
    let (cv, xv) = split_scale(&v);
    if xu == xv {
        return scale(cu + cv, xu);
    }
    Arc::new(Expr::Sum(u, v))
}

pub fn neg(u: Node) -> Node {
    scale(c(-1.0), u)
}

pub fn sub(u: Node, v: Node) -> Node {
    add(u, neg(v))
}

pub fn scale(k: C64, u: Node) -> Node {
    mul(constant(k), u)
}

pub fn mul(u: Node, v: Node) -> Node {
    if let (Some(x), Some(y)) = (as_constant(&u), as_constant(&v)) {
        return constant(x * y);
    }
    if is_const(&u, 0.0) || is_const(&v, 0.0) {
        return zero();
    }
    if is_const(&u, 1.0) {
        return v;
    }
    if is_const(&v, 1.0) {
        return u;
    }
    if as_constant(&v).is_some() {
        return mul(v, u);
    }
    if let Some(k) = as_constant(&u) {
        let (kv, rest) = split_scale(&v);
        if kv != c(1.0) {
            return mul(constant(k * kv), rest);
        }
        return Arc::new(Expr::Product(u, v));
    }
    let (ku, xu) = split_scale(&u);
    let (kv, xv) = split_scale(&v);
    if ku != c(1.0) || kv != c(1.0) {
        return scale(ku * kv, mul(xu, xv));
    }
    if let (Some((a1, b1, s1)), Some((a2, b2, s2))) = (as_power(&xu), as_power(&xv)) {
        if a1 == a2 && b1 == b2 {
            return pow_affine_unchecked(a1, b1, s1 + s2);
        }
    }
    if let (Expr::Exp(p), Expr::Exp(q)) = (&*xu, &*xv) {
        return exp(add(p.clone(), q.clone()));
    }
    Arc::new(Expr::Product(xu, xv))
}

pub fn div(u: Node, v: Node) -> Node {
    if let Some(k) = as_constant(&v) {
        if k != c(0.0) {
            return scale(k.inv(), u);
        }
        return Arc::new(Expr::Quotient(u, v));
    }
    if is_const(&u, 0.0) {
        return zero();
    }
    if u == v {
        return one();
    }
    if let Some((a, b, s)) = as_power(&v) {
        return mul(u, pow_affine_unchecked(a, b, -s));
    }
    if let Expr::Exp(w) = &*v {
        return mul(u, exp(neg(w.clone())));
    }
    let (ku, xu) = split_scale(&u);
    let (kv, xv) = split_scale(&v);
    if ku != c(1.0) || kv != c(1.0) {
        return scale(ku / kv, div(xu, xv));
    }
    Arc::new(Expr::Quotient(u, v))
}

pub fn exp(u: Node) -> Node {
    if let Some(k) = as_constant(&u) {
        return constant(k.exp());
    }
    Arc::new(Expr::Exp(u))
}

pub fn scale_arg(rho: f64, u: Node) -> Node {
    if rho == 1.0 {
        return u;
    }
    let r = c(rho);
    match &*u {
        Expr::Identity => affine(r, c(0.0)),
        Expr::Constant(_) => u,
        Expr::Affine { a, b } => affine(a * r, *b),
        Expr::AffinePower { a, b, s } => pow_affine_unchecked(a * r, *b, *s),
        Expr::Sum(x, y) => add(scale_arg(rho, x.clone()), scale_arg(rho, y.clone())),
        Expr::Product(x, y) => mul(scale_arg(rho, x.clone()), scale_arg(rho, y.clone())),
        Expr::Quotient(x, y) => div(scale_arg(rho, x.clone()), scale_arg(rho, y.clone())),
        Expr::Exp(x) => exp(scale_arg(rho, x.clone())),
        Expr::ScaleArg { rho: r2, inner } => scale_arg(rho * r2, inner.clone()),
        Expr::Compose { outer, inner } => compose(outer.clone(), scale_arg(rho, inner.clone())),
        _ => Arc::new(Expr::ScaleArg { rho, inner: u }),
    }
}

pub fn compose(outer: Node, inner: Node) -> Node {
    if matches!(*inner, Expr::Identity) {
        return outer;
    }
    match &*outer {
        Expr::Identity => return inner,
        Expr::Constant(_) => return outer,
        Expr::Affine { a, b } => return add(scale(*a, inner), constant(*b)),
        _ => {}
    }
    if let Expr::Affine { a, b } = &*inner {
        if b == &c(0.0) && a.im == 0.0 && a.re > 0.0 && a.re <= 1.0 {
            return scale_arg(a.re, outer);
        }
    }
    Arc::new(Expr::Compose { outer, inner })
}

pub fn primitive(g: Node) -> Node {
    if let Some(k) = as_constant(&g) {
        return affine(k, c(0.0));
    }
    Arc::new(Expr::Primitive(g))
}

/// True when the node is only defined on the disk (poles, branch cuts or
/// path quadrature anchored at 0).
pub fn requires_disk(e: &Expr) -> bool {
    match e {
        Expr::Identity | Expr::Constant(_) | Expr::Affine { .. } => false,
        Expr::AffinePower { s, .. } => !matches!(integer_exponent(*s), Some(k) if k >= 0),
        Expr::Koebe | Expr::Log1mZ | Expr::Primitive(_) | Expr::DerivPower(_) => true,
        Expr::Sum(x, y) | Expr::Product(x, y) | Expr::Quotient(x, y) => {
            requires_disk(x) || requires_disk(y)
        }
        Expr::Exp(x) | Expr::ScaleArg { inner: x, .. } => requires_disk(x),
        Expr::Compose { outer, inner } => requires_disk(outer) || requires_disk(inner),
    }
}

/// True when the tree contains a node evaluated by quadrature.
pub fn has_quadrature(e: &Expr) -> bool {
    match e {
        Expr::Primitive(_) => true,
        Expr::DerivPower(d) => d.closed.is_none(),
        Expr::Sum(x, y) | Expr::Product(x, y) | Expr::Quotient(x, y) => {
            has_quadrature(x) || has_quadrature(y)
        }
        Expr::Exp(x) | Expr::ScaleArg { inner: x, .. } => has_quadrature(x),
        Expr::Compose { outer, inner } => has_quadrature(outer) || has_quadrature(inner),
        _ => false,
    }
}

pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn fmt_complex(v: C64) -> String {
    if v.im == 0.0 {
        fmt_real(v.re)
    } else {
        format!("c({},{})", fmt_real(v.re), fmt_real(v.im))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Identity => write!(f, "id"),
            Expr::Constant(v) => write!(f, "const({})", fmt_complex(*v)),
            Expr::Affine { a, b } => write!(f, "affine({},{})", fmt_complex(*a), fmt_complex(*b)),
            Expr::Log1mZ => write!(f, "logmap"),
            Expr::AffinePower { a, b, s } => {
                if *a == c(-1.0) && *b == c(1.0) {
                    write!(f, "pow1mz({})", fmt_complex(*s))
                } else {
                    write!(
                        f,
                        "powaff({},{},{})",
                        fmt_complex(*a),
                        fmt_complex(*b),
                        fmt_complex(*s)
                    )
                }
            }
            Expr::Koebe => write!(f, "koebe"),
            Expr::Sum(x, y) => write!(f, "sum({x},{y})"),
            Expr::Product(x, y) => write!(f, "prod({x},{y})"),
            Expr::Quotient(x, y) => write!(f, "quot({x},{y})"),
            Expr::Exp(x) => write!(f, "exp({x})"),
            Expr::ScaleArg { rho, inner } => write!(f, "scale({},{inner})", fmt_real(*rho)),
            Expr::Compose { outer, inner } => write!(f, "compose({outer},{inner})"),
            Expr::DerivPower(d) => write!(f, "derivpow({},{})", d.base, fmt_real(d.s)),
            Expr::Primitive(g) => write!(f, "prim({g})"),
        }
    }
}
