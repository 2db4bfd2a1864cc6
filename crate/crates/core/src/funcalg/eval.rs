//! Batched evaluation of expression trees along paths in the disk.
//!
//! Points handed to [`eval_points`] are treated as an ordered path. Closed-form
//! nodes are evaluated pointwise; `Primitive` nodes are anchored by radial
//! quadrature from 0 and then continued along the path chord by chord, which
//! is what makes circle sweeps over trees with primitives affordable.

use num_complex::Complex64 as C64;

use super::expr::{integer_exponent, requires_disk, Expr};
use crate::error::{ImsError, Result};
use crate::gauss::GaussLegendre;

/// Denominators below this magnitude are reported as evaluation errors.
pub const DIVISION_FLOOR: f64 = 1e-14;

/// Quadrature configuration for `Primitive` and unsimplified `DerivPower` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveRule {
    /// Gauss–Legendre nodes per radial panel.
    pub nodes_per_panel: usize,
    /// Relative change between panel doublings that ends refinement.
    pub rtol: f64,
    /// Maximum number of panel doublings on the radial anchor.
    pub max_levels: u32,
    /// Gauss–Legendre nodes per path chord.
    pub chord_nodes: usize,
    /// A fresh radial anchor is taken after this many chord steps.
    pub anchor_interval: usize,
}

impl Default for PrimitiveRule {
    fn default() -> Self {
        PrimitiveRule {
            nodes_per_panel: 32,
            rtol: 1e-10,
            max_levels: 10,
            chord_nodes: 8,
            anchor_interval: 512,
        }
    }
}

/// Evaluates `e` at each point, rejecting points outside the open disk.
pub fn eval_points(e: &Expr, pts: &[C64], rule: &PrimitiveRule) -> Result<Vec<C64>> {
    if let Some(p) = pts.iter().find(|p| !(p.norm() < 1.0)) {
        return Err(ImsError::domain(*p));
    }
    eval_batch(e, pts, rule)
}

fn eval_batch(e: &Expr, pts: &[C64], rule: &PrimitiveRule) -> Result<Vec<C64>> {
    let out = match e {
        Expr::Identity => pts.to_vec(),
        Expr::Constant(v) => vec![*v; pts.len()],
        Expr::Affine { a, b } => pts.iter().map(|z| a * z + b).collect(),
        Expr::Log1mZ => pts.iter().map(|z| -(C64::new(1.0, 0.0) - z).ln()).collect(),
        Expr::AffinePower { a, b, s } => {
            let mut out = Vec::with_capacity(pts.len());
            for z in pts {
                out.push(affine_power(*a, *b, *s, *z)?);
            }
            out
        }
        Expr::Koebe => pts
            .iter()
            .map(|z| {
                let w = C64::new(1.0, 0.0) - z;
                z / (w * w)
            })
            .collect(),
        Expr::Sum(x, y) => {
            let mut u = eval_batch(x, pts, rule)?;
            let v = eval_batch(y, pts, rule)?;
            u.iter_mut().zip(v).for_each(|(a, b)| *a += b);
            u
        }
        Expr::Product(x, y) => {
            let mut u = eval_batch(x, pts, rule)?;
            let v = eval_batch(y, pts, rule)?;
            u.iter_mut().zip(v).for_each(|(a, b)| *a *= b);
            u
        }
        Expr::Quotient(x, y) => {
            let mut u = eval_batch(x, pts, rule)?;
            let v = eval_batch(y, pts, rule)?;
            for ((a, b), z) in u.iter_mut().zip(v).zip(pts) {
                if !(b.norm() >= DIVISION_FLOOR) {
                    return Err(ImsError::Evaluation(format!(
                        "division by ~0 ({:e}) at z={z}",
                        b.norm()
                    )));
                }
                *a /= b;
            }
            u
        }
        Expr::Exp(x) => {
            let mut u = eval_batch(x, pts, rule)?;
            u.iter_mut().for_each(|a| *a = a.exp());
            u
        }
        Expr::ScaleArg { rho, inner } => {
            let scaled: Vec<C64> = pts.iter().map(|z| z * rho).collect();
            eval_batch(inner, &scaled, rule)?
        }
        Expr::Compose { outer, inner } => {
            let w = eval_batch(inner, pts, rule)?;
            if requires_disk(outer) {
                if let Some(p) = w.iter().find(|p| !(p.norm() < 1.0)) {
                    return Err(ImsError::domain(*p));
                }
            }
            eval_batch(outer, &w, rule)?
        }
        Expr::DerivPower(d) => match &d.closed {
            Some(closed) => eval_batch(closed, pts, rule)?,
            None => primitive_along(&d.deriv, pts, rule)?,
        },
        Expr::Primitive(g) => primitive_along(g, pts, rule)?,
    };
    if let Some((z, v)) = pts.iter().zip(&out).find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(ImsError::Evaluation(format!("non-finite value {v} at z={z}")));
    }
    Ok(out)
}

fn affine_power(a: C64, b: C64, s: C64, z: C64) -> Result<C64> {
    let w = a * z + b;
    if let Some(k) = integer_exponent(s) {
        if k < 0 && w.norm() < DIVISION_FLOOR {
            return Err(ImsError::Evaluation(format!("pole of ({a})z+({b}) at z={z}")));
        }
        return Ok(w.powi(k));
    }
    if w == C64::new(0.0, 0.0) {
        if s.re > 0.0 {
            return Ok(w);
        }
        return Err(ImsError::Evaluation(format!("branch point of power at z={z}")));
    }
    Ok((s * w.ln()).exp())
}

enum Step {
    Anchor,
    Chord { pieces: usize },
}

/// Largest number of sub-chords tried before falling back to a radial anchor.
const MAX_CHORD_PIECES: usize = 16;

/// Values of `z -> int_0^z g` along an ordered path.
fn primitive_along(g: &Expr, pts: &[C64], rule: &PrimitiveRule) -> Result<Vec<C64>> {
    let mut steps = Vec::with_capacity(pts.len());
    let mut since_anchor = 0usize;
    for i in 0..pts.len() {
        if i == 0 || since_anchor >= rule.anchor_interval {
            steps.push(Step::Anchor);
            since_anchor = 0;
            continue;
        }
        let (p, q) = (pts[i - 1], pts[i]);
        let h = (q - p).norm();
        let d = 1.0 - p.norm().max(q.norm());
        if h == 0.0 {
            steps.push(Step::Chord { pieces: 0 });
        } else {
            let pieces = (4.0 * h / d).ceil().max(1.0);
            if d > 0.0 && pieces <= MAX_CHORD_PIECES as f64 {
                steps.push(Step::Chord { pieces: pieces as usize });
            } else {
                steps.push(Step::Anchor);
                since_anchor = 0;
                continue;
            }
        }
        since_anchor += 1;
    }

    let gl = GaussLegendre::cached(rule.chord_nodes);
    let mut nodes = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        if let Step::Chord { pieces } = step {
            let (p, q) = (pts[i - 1], pts[i]);
            let delta = (q - p) / *pieces as f64;
            for k in 0..*pieces {
                let mid = p + delta * (k as f64 + 0.5);
                for x in &gl.nodes {
                    nodes.push(mid + delta * (0.5 * x));
                }
            }
        }
    }
    let node_vals = if nodes.is_empty() {
        Vec::new()
    } else {
        eval_batch(g, &nodes, rule)?
    };

    let mut out = Vec::with_capacity(pts.len());
    let mut cursor = 0usize;
    let mut acc = C64::new(0.0, 0.0);
    for (i, step) in steps.iter().enumerate() {
        match step {
            Step::Anchor => {
                acc = radial_primitive(g, pts[i], rule)?;
            }
            Step::Chord { pieces } => {
                let delta = (pts[i] - pts[i - 1]) / *pieces as f64;
                for _ in 0..*pieces {
                    let mut s = C64::new(0.0, 0.0);
                    for w in &gl.weights {
                        s += node_vals[cursor] * *w;
                        cursor += 1;
                    }
                    acc += s * delta * 0.5;
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `int_0^z g(w) dw` along the segment `[0, z]`.
///
/// Panels are graded geometrically toward `z` so that each panel is no longer
/// than its distance to the unit circle, then split uniformly and doubled
/// until the relative change drops below `rule.rtol`.
pub fn radial_primitive(g: &Expr, z: C64, rule: &PrimitiveRule) -> Result<C64> {
    let rz = z.norm();
    if rz == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if !(rz < 1.0) {
        return Err(ImsError::domain(z));
    }
    let d = 1.0 - rz;
    let mut breaks = vec![0.0f64];
    let mut cur = 0.0f64;
    while (1.0 - cur) * rz > d && breaks.len() < 64 {
        cur += 0.5 * (1.0 - cur);
        breaks.push(cur);
    }
    breaks.push(1.0);

    let gl = GaussLegendre::cached(rule.nodes_per_panel);
    let level_sum = |level: u32| -> Result<(C64, f64)> {
        let split = 1usize << level;
        let mut s_nodes = Vec::with_capacity((breaks.len() - 1) * split * gl.len());
        let mut s_weights = Vec::with_capacity(s_nodes.capacity());
        for w in breaks.windows(2) {
            let h = (w[1] - w[0]) / split as f64;
            for k in 0..split {
                let mid = w[0] + h * (k as f64 + 0.5);
                for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                    s_nodes.push(mid + 0.5 * h * x);
                    s_weights.push(0.5 * h * wt);
                }
            }
        }
        let pts: Vec<C64> = s_nodes.iter().map(|s| z * s).collect();
        let vals = eval_batch(g, &pts, rule)?;
        let mut total = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (v, w) in vals.iter().zip(&s_weights) {
            total += v * w;
            scale += v.norm() * w;
        }
        Ok((total * z, scale * rz))
    };

    let (mut prev, _) = level_sum(0)?;
    let mut last_change = f64::INFINITY;
    for level in 1..=rule.max_levels {
        let (cur, scale) = level_sum(level)?;
        let change = (cur - prev).norm();
        if change <= rule.rtol * scale.max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        last_change = change / scale.max(f64::MIN_POSITIVE);
        prev = cur;
    }
    Err(ImsError::Quadrature { rtol: rule.rtol, last: last_change })
}
