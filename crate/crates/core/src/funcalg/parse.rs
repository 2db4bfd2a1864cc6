//! Prefix-notation map expressions, e.g. `derivpow(fgamma(0.5),1.2)`.
//!
//! Parsing is two-stage: text to a [`Syntax`] tree (so callers can inspect
//! the top-level form), then [`lower`] to an expression tree.

use num_complex::Complex64 as C64;

use super::derive;
use super::expr::*;
use crate::error::{ImsError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Syntax {
    Number { value: f64, pos: usize },
    Call { name: String, args: Vec<Syntax>, pos: usize },
}

impl Syntax {
    pub fn pos(&self) -> usize {
        match self {
            Syntax::Number { pos, .. } | Syntax::Call { pos, .. } => *pos,
        }
    }
}

fn err(pos: usize, message: impl Into<String>) -> ImsError {
    ImsError::Parse { pos, message: message.into() }
}

struct Parser<'a> {
    src: &'a [u8],
    at: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.src.len() && self.src[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn col(&self) -> usize {
        self.at + 1
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.at).copied()
    }

    fn node(&mut self) -> Result<Syntax> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => self.call(),
            Some(c) if c.is_ascii_digit() || matches!(c, b'-' | b'+' | b'.') => self.number(),
            Some(c) => Err(err(self.col(), format!("unexpected '{}'", c as char))),
            None => Err(err(self.col(), "unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Syntax> {
        let start = self.at;
        let s = self.src;
        let mut i = self.at;
        if i < s.len() && matches!(s[i], b'-' | b'+') {
            i += 1;
        }
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && matches!(s[i], b'e' | b'E') {
            i += 1;
            if i < s.len() && matches!(s[i], b'-' | b'+') {
                i += 1;
            }
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).unwrap_or_default();
        let value: f64 = text
            .parse()
            .map_err(|_| err(start + 1, format!("malformed number '{text}'")))?;
        if !value.is_finite() {
            return Err(err(start + 1, format!("non-finite number '{text}'")));
        }
        self.at = i;
        Ok(Syntax::Number { value, pos: start + 1 })
    }

    fn call(&mut self) -> Result<Syntax> {
        let start = self.at;
        while self.at < self.src.len()
            && (self.src[self.at].is_ascii_alphanumeric() || self.src[self.at] == b'_')
        {
            self.at += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.at]).unwrap_or_default().to_string();
        let mut args = Vec::new();
        if self.peek() == Some(b'(') {
            self.at += 1;
            loop {
                args.push(self.node()?);
                match self.peek() {
                    Some(b',') => self.at += 1,
                    Some(b')') => {
                        self.at += 1;
                        break;
                    }
                    Some(c) => return Err(err(self.col(), format!("expected ',' or ')', found '{}'", c as char))),
                    None => return Err(err(self.col(), "unclosed '('")),
                }
            }
        }
        Ok(Syntax::Call { name, args, pos: start + 1 })
    }
}

/// Parses text into a syntax tree.
pub fn parse_syntax(text: &str) -> Result<Syntax> {
    let mut p = Parser { src: text.as_bytes(), at: 0 };
    let node = p.node()?;
    if let Some(c) = p.peek() {
        return Err(err(p.col(), format!("trailing input starting at '{}'", c as char)));
    }
    Ok(node)
}

/// Parses and lowers `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<Node> {
    lower(&parse_syntax(text)?)
}

fn real_arg(s: &Syntax) -> Result<f64> {
    match s {
        Syntax::Number { value, .. } => Ok(*value),
        Syntax::Call { pos, name, .. } => Err(err(*pos, format!("expected a number, found '{name}'"))),
    }
}

fn complex_arg(s: &Syntax) -> Result<C64> {
    match s {
        Syntax::Number { value, .. } => Ok(c(*value)),
        Syntax::Call { name, args, pos } if name == "c" => match args.as_slice() {
            [re, im] => Ok(C64::new(real_arg(re)?, real_arg(im)?)),
            _ => Err(err(*pos, "c(re,im) takes two numbers")),
        },
        Syntax::Call { pos, name, .. } => {
            Err(err(*pos, format!("expected a number or c(re,im), found '{name}'")))
        }
    }
}

fn arity(name: &str, args: &[Syntax], n: usize, pos: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(err(pos, format!("'{name}' takes {n} argument(s), got {}", args.len())))
    }
}

/// `[(1 - z)^{1-gamma} - 1] / (gamma - 1)`
pub fn f_gamma(gamma: f64) -> Result<Node> {
    if gamma == 1.0 {
        return Err(ImsError::InvalidArgument("fgamma(1) is singular; use logmap".into()));
    }
    Ok(scale(c(1.0 / (gamma - 1.0)), sub(pow_one_minus_z(c(1.0 - gamma)), one())))
}

/// `[(1 - z)^{1+gamma} - 1] / (-gamma - 1)`
pub fn g_gamma(gamma: f64) -> Result<Node> {
    if gamma == -1.0 {
        return Err(ImsError::InvalidArgument("ggamma(-1) is singular".into()));
    }
    Ok(scale(c(-1.0 / (gamma + 1.0)), sub(pow_one_minus_z(c(1.0 + gamma)), one())))
}

/// `-[(1 - z)^2 - 1] / 2`
pub fn g_limit() -> Node {
    g_gamma(1.0).expect("gamma = 1 is regular for the g-family")
}

/// `kappa(rho z) / rho`
pub fn koebe_scaled(rho: f64) -> Node {
    scale(c(1.0 / rho), scale_arg(rho, koebe()))
}

/// `gamma / (1 - z)`
pub fn cover(gamma: f64) -> Node {
    scale(c(gamma), pow_one_minus_z(c(-1.0)))
}

/// `z -> int_0^z exp(int_0^w phi)`
pub fn from_phi(phi: Node) -> Node {
    primitive(exp(primitive(phi)))
}

/// Lowers a syntax tree to an expression tree.
pub fn lower(s: &Syntax) -> Result<Node> {
    let (name, args, pos) = match s {
        Syntax::Number { pos, .. } => {
            return Err(err(*pos, "a bare number is not a map; use const(x)"))
        }
        Syntax::Call { name, args, pos } => (name.as_str(), args.as_slice(), *pos),
    };
    let at = |e: ImsError| match e {
        ImsError::Parse { .. } => e,
        other => err(pos, other.to_string()),
    };
    let unary = |n: usize| arity(name, args, n, pos);
    Ok(match name {
        "id" | "z" => {
            unary(0)?;
            identity()
        }
        "koebe" => {
            unary(0)?;
            koebe()
        }
        "logmap" => {
            unary(0)?;
            log1mz()
        }
        "gmap" => {
            unary(0)?;
            g_limit()
        }
        "const" => match args {
            [x] => constant(complex_arg(x)?),
            [x, y] => constant(C64::new(real_arg(x)?, real_arg(y)?)),
            _ => return Err(err(pos, "const takes x, x,y or c(x,y)")),
        },
        "affine" => {
            unary(2)?;
            affine(complex_arg(&args[0])?, complex_arg(&args[1])?)
        }
        "pow1mz" => {
            unary(1)?;
            pow_affine(c(-1.0), c(1.0), complex_arg(&args[0])?).map_err(at)?
        }
        "powaff" => {
            unary(3)?;
            pow_affine(complex_arg(&args[0])?, complex_arg(&args[1])?, complex_arg(&args[2])?)
                .map_err(at)?
        }
        "sum" | "prod" | "quot" | "compose" => {
            unary(2)?;
            let (u, v) = (lower(&args[0])?, lower(&args[1])?);
            match name {
                "sum" => add(u, v),
                "prod" => mul(u, v),
                "quot" => div(u, v),
                _ => compose(u, v),
            }
        }
        "exp" | "prim" | "deriv" | "pre" | "schw" | "fromphi" => {
            unary(1)?;
            let u = lower(&args[0])?;
            match name {
                "exp" => exp(u),
                "prim" => primitive(u),
                "deriv" => derive::derivative(&u),
                "pre" => derive::pre_schwarzian(&u),
                "schw" => derive::schwarzian(&u),
                _ => from_phi(u),
            }
        }
        "scale" => {
            unary(2)?;
            let rho = real_arg(&args[0])?;
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(err(args[0].pos(), format!("scale factor {rho} outside (0, 1]")));
            }
            scale_arg(rho, lower(&args[1])?)
        }
        "derivpow" => {
            unary(2)?;
            let base = lower(&args[0])?;
            derive::deriv_power(&base, real_arg(&args[1])?).map_err(at)?
        }
        "fgamma" => {
            unary(1)?;
            f_gamma(real_arg(&args[0])?).map_err(at)?
        }
        "ggamma" => {
            unary(1)?;
            g_gamma(real_arg(&args[0])?).map_err(at)?
        }
        "kscaled" => {
            unary(1)?;
            let rho = real_arg(&args[0])?;
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(err(args[0].pos(), format!("kscaled radius {rho} outside (0, 1]")));
            }
            koebe_scaled(rho)
        }
        "cover" => {
            unary(1)?;
            cover(real_arg(&args[0])?)
        }
        other => return Err(err(pos, format!("unknown form '{other}'"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_catalog_forms() {
        for text in [
            "koebe",
            "scale(0.9,koebe)",
            "fgamma(0.5)",
            "ggamma(0.7)",
            "logmap",
            "derivpow(fgamma(0.5),1.2)",
            "fromphi(cover(0.5))",
            "sum(id, const(c(1.0, -2.5)))",
            "powaff(c(0.0,0.5), 1, -2.5e-1)",
        ] {
            parse_expr(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        }
    }

    #[test]
    fn errors_report_column() {
        match parse_expr("sum(koebe,,id)") {
            Err(ImsError::Parse { pos, .. }) => assert_eq!(pos, 11),
            other => panic!("{other:?}"),
        }
        match parse_expr("prod(koebe, wat)") {
            Err(ImsError::Parse { pos, message }) => {
                assert_eq!(pos, 13);
                assert!(message.contains("wat"));
            }
            other => panic!("{other:?}"),
        }
        match parse_expr("koebe)") {
            Err(ImsError::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        match parse_expr("pow1mz(c(0.5") {
            Err(ImsError::Parse { pos, .. }) => assert_eq!(pos, 13),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("powaff(2,1,0.5)"), Err(ImsError::Parse { pos: 1, .. })));
    }

    fn leaf() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("id".to_string()),
            Just("koebe".to_string()),
            Just("logmap".to_string()),
            Just("gmap".to_string()),
            (-3.0f64..3.0).prop_map(|x| format!("const({x:?})")),
            (0.05f64..0.95).prop_map(|g| format!("fgamma({g:?})")),
            (0.05f64..0.95).prop_map(|g| format!("ggamma({g:?})")),
            (-2.5f64..2.5).prop_map(|s| format!("pow1mz({s:?})")),
            ((-1.0f64..1.0), (-1.0f64..1.0)).prop_map(|(a, b)| format!("affine(c({a:?},{b:?}),1.5)")),
        ]
    }

    fn tree() -> impl Strategy<Value = String> {
        leaf().prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("sum({a},{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("prod({a},{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("quot({a},{b})")),
                inner.clone().prop_map(|a| format!("exp({a})")),
                inner.clone().prop_map(|a| format!("prim({a})")),
                inner.clone().prop_map(|a| format!("deriv({a})")),
                ((0.1f64..1.0), inner).prop_map(|(r, a)| format!("scale({r:?},{a})")),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn display_round_trips(text in tree()) {
            let e = parse_expr(&text).unwrap();
            let shown = e.to_string();
            let again = parse_expr(&shown).unwrap();
            prop_assert_eq!(shown, again.to_string());
            prop_assert_eq!(e, again);
        }
    }
}
