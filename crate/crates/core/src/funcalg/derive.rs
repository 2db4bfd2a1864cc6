//! Symbolic derivative, log-derivative and derivative-power rules.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::eval::{eval_points, PrimitiveRule};
use super::expr::*;
use crate::error::{ImsError, Result};

/// Exact derivative tree.
pub fn derivative(e: &Node) -> Node {
    match &**e {
        Expr::Identity => one(),
        Expr::Constant(_) => zero(),
        Expr::Affine { a, .. } => constant(*a),
        Expr::Log1mZ => pow_one_minus_z(c(-1.0)),
        Expr::AffinePower { a, b, s } => {
            scale(s * a, pow_affine_unchecked(*a, *b, s - 1.0))
        }
        // (1 + z) (1 - z)^-3
        Expr::Koebe => mul(affine(c(1.0), c(1.0)), pow_one_minus_z(c(-3.0))),
        Expr::Sum(x, y) => add(derivative(x), derivative(y)),
        Expr::Product(x, y) => add(
            mul(derivative(x), y.clone()),
            mul(x.clone(), derivative(y)),
        ),
        Expr::Quotient(x, y) => div(
            sub(mul(derivative(x), y.clone()), mul(x.clone(), derivative(y))),
            mul(y.clone(), y.clone()),
        ),
        Expr::Exp(x) => mul(derivative(x), e.clone()),
        Expr::ScaleArg { rho, inner } => scale(c(*rho), scale_arg(*rho, derivative(inner))),
        Expr::Compose { outer, inner } => {
            mul(compose(derivative(outer), inner.clone()), derivative(inner))
        }
        Expr::DerivPower(d) => d.deriv.clone(),
        Expr::Primitive(g) => g.clone(),
    }
}

/// Tree for `g'/g`, split along products so catalog maps stay in closed form.
pub fn log_derivative(g: &Node) -> Node {
    match &**g {
        Expr::Constant(_) => zero(),
        Expr::Affine { a, b } => scale(*a, pow_affine_unchecked(*a, *b, c(-1.0))),
        Expr::AffinePower { a, b, s } => scale(s * a, pow_affine_unchecked(*a, *b, c(-1.0))),
        Expr::Product(x, y) => add(log_derivative(x), log_derivative(y)),
        Expr::Quotient(x, y) => sub(log_derivative(x), log_derivative(y)),
        Expr::Exp(x) => derivative(x),
        Expr::ScaleArg { rho, inner } => scale(c(*rho), scale_arg(*rho, log_derivative(inner))),
        Expr::Compose { outer, inner } => {
            mul(compose(log_derivative(outer), inner.clone()), derivative(inner))
        }
        _ => div(derivative(g), g.clone()),
    }
}

/// `f''/f'`
pub fn pre_schwarzian(f: &Node) -> Node {
    log_derivative(&derivative(f))
}

/// `N' - N^2/2`
pub fn schwarzian(f: &Node) -> Node {
    let n = pre_schwarzian(f);
    sub(derivative(&n), scale(c(0.5), mul(n.clone(), n)))
}

/// `c * prod (a_i z + b_i)^{s_i} * exp(u)`
struct Factored {
    k: C64,
    powers: Vec<(C64, C64, C64)>,
    exp_arg: Option<Node>,
}

impl Factored {
    fn unit() -> Self {
        Factored { k: c(1.0), powers: Vec::new(), exp_arg: None }
    }

    fn combine(mut self, other: Factored, sign: f64) -> Self {
        self.k *= if sign > 0.0 { other.k } else { other.k.inv() };
        for (a, b, s) in other.powers {
            match self.powers.iter_mut().find(|(a2, b2, _)| *a2 == a && *b2 == b) {
                Some(p) => p.2 += s * sign,
                None => self.powers.push((a, b, s * sign)),
            }
        }
        if let Some(u) = other.exp_arg {
            let u = scale(c(sign), u);
            self.exp_arg = Some(match self.exp_arg.take() {
                Some(v) => add(v, u),
                None => u,
            });
        }
        self
    }
}

fn factorize(e: &Node) -> Option<Factored> {
    match &**e {
        Expr::Constant(k) if *k != c(0.0) => Some(Factored { k: *k, ..Factored::unit() }),
        Expr::Affine { a, b } => Some(Factored { powers: vec![(*a, *b, c(1.0))], ..Factored::unit() }),
        Expr::AffinePower { a, b, s } => Some(Factored { powers: vec![(*a, *b, *s)], ..Factored::unit() }),
        Expr::Product(x, y) => Some(factorize(x)?.combine(factorize(y)?, 1.0)),
        Expr::Quotient(x, y) => Some(factorize(x)?.combine(factorize(y)?, -1.0)),
        Expr::Exp(u) => Some(Factored { exp_arg: Some(u.clone()), ..Factored::unit() }),
        Expr::ScaleArg { rho, inner } => {
            let mut f = factorize(inner)?;
            for p in &mut f.powers {
                p.0 *= *rho;
            }
            f.exp_arg = f.exp_arg.map(|u| scale_arg(*rho, u));
            Some(f)
        }
        _ => None,
    }
}

/// The principal logarithm of `a z + b` is continuous on the disk: the image
/// disk of radius `|a|` about `b` stays off the cut `(-inf, 0]`.
fn principal_log_is_continuous(a: C64, b: C64) -> bool {
    let dist_to_cut = if b.re >= 0.0 { b.norm() } else { b.im.abs() };
    dist_to_cut >= a.norm()
}

fn eval_at_origin(e: &Node) -> Result<C64> {
    Ok(eval_points(e, &[c(0.0)], &PrimitiveRule::default())?[0])
}

fn derivative_at_origin(base: &Node) -> Result<(Node, C64)> {
    let bp = derivative(base);
    let v0 = eval_at_origin(&bp)?;
    if !(v0.norm() >= 1e-14) {
        return Err(ImsError::InvalidArgument(format!(
            "derivative power needs a nonvanishing derivative at 0, got {v0}"
        )));
    }
    Ok((bp, v0))
}

/// `G` with `G(0) = 0` and `G' = (base')^s` on the branch anchored at `Log base'(0)`.
///
/// When `base'` factors into single-valued affine powers the result is a
/// product of powers (with a closed-form primitive for a single factor);
/// otherwise `G' = exp(s (Log base'(0) + int_0^z N_base))`.
pub fn deriv_power(base: &Node, s: f64) -> Result<Node> {
    let (bp, v0) = derivative_at_origin(base)?;
    if let Some(f) = factorize(&bp) {
        if f.powers.iter().all(|&(a, b, _)| principal_log_is_continuous(a, b)) {
            let u0 = match &f.exp_arg {
                Some(u) => eval_at_origin(u)?,
                None => c(0.0),
            };
            let mut l0 = f.k.ln() + u0;
            for &(_, b, p) in &f.powers {
                l0 += p * b.ln();
            }
            let winding = ((v0.ln() - l0).im / TAU).round();
            let k = (c(s) * (f.k.ln() + C64::new(0.0, TAU * winding))).exp();
            let mut deriv = constant(k);
            for &(a, b, p) in &f.powers {
                deriv = mul(deriv, pow_affine_unchecked(a, b, p * s));
            }
            if let Some(u) = &f.exp_arg {
                deriv = mul(deriv, exp(scale(c(s), u.clone())));
            }
            let closed = closed_primitive(k, &f, s);
            return Ok(Arc::new(Expr::DerivPower(DerivPowerNode {
                base: base.clone(),
                s,
                deriv,
                closed,
            })));
        }
    }
    Ok(deriv_power_generic_from(base, bp, v0, s))
}

/// The generic branch of [`deriv_power`], without any rewriting.
pub fn deriv_power_generic(base: &Node, s: f64) -> Result<Node> {
    let (bp, v0) = derivative_at_origin(base)?;
    Ok(deriv_power_generic_from(base, bp, v0, s))
}

fn deriv_power_generic_from(base: &Node, bp: Node, v0: C64, s: f64) -> Node {
    let log_branch = add(constant(v0.ln()), primitive(log_derivative(&bp)));
    let deriv = exp(scale(c(s), log_branch));
    Arc::new(Expr::DerivPower(DerivPowerNode { base: base.clone(), s, deriv, closed: None }))
}

/// `int_0^z k (a w + b)^p dw` for a single factor.
fn closed_primitive(k: C64, f: &Factored, s: f64) -> Option<Node> {
    if f.exp_arg.is_some() {
        return None;
    }
    match f.powers.as_slice() {
        [] => Some(affine(k, c(0.0))),
        [(a, b, p)] => {
            let q = p * s + 1.0;
            if q.norm() < 1e-14 {
                // k/a * log(1 + (a/b) z)
                let w = affine(-(a / b), c(0.0));
                Some(scale(-(k / a), compose(log1mz(), w)))
            } else {
                let head = pow_affine_unchecked(*a, *b, q);
                let tail = pow_affine_unchecked(c(0.0), *b, q);
                Some(scale(k / (a * q), sub(head, tail)))
            }
        }
        _ => None,
    }
}
