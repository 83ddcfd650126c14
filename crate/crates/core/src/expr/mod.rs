//! Scalar expression language used for every user-supplied function.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | ln | sqrt | atan
//! ```
//!
//! Exponents must fold to a rational constant (`t^3`, `t^(1/2)`, `t^-0.25`).
//! The name `pi` is the constant π; every other name is a variable, resolved
//! only when the expression is evaluated.

mod diff;
mod parse;
mod simplify;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Scalar;

pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error in {op} (argument {arg}){bindings}")]
    Domain {
        op: &'static str,
        arg: f64,
        bindings: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

/// Reduced fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational {
            num: s * num / g.max(1),
            den: s * den / g.max(1),
        }
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    /// Recover a small-denominator fraction from a float, if one matches.
    pub fn approximate(v: f64) -> Option<Rational> {
        if !v.is_finite() || v.abs() > 1e12 {
            return None;
        }
        if v.fract() == 0.0 {
            return Some(Rational::integer(v as i64));
        }
        // continued fraction expansion
        let (mut h0, mut h1) = (0i64, 1i64);
        let (mut k0, mut k1) = (1i64, 0i64);
        let mut x = v;
        for _ in 0..40 {
            let a = x.floor();
            if a.abs() > 1e12 {
                break;
            }
            let ai = a as i64;
            let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
            let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
            if k2 > 10_000 {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            if ((h1 as f64 / k1 as f64) - v).abs() <= 4.0 * f64::EPSILON * v.abs() {
                return Some(Rational::new(h1, k1));
            }
            let frac = x - a;
            if frac == 0.0 {
                break;
            }
            x = 1.0 / frac;
        }
        None
    }

    fn minus_one(self) -> Rational {
        Rational::new(self.num - self.den, self.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.den, self.num < 0) {
            (1, false) => write!(f, "{}", self.num),
            (1, true) => write!(f, "({})", self.num),
            _ => write!(f, "({}/{})", self.num, self.den),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Arc<str>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Rational),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn pow(self, exponent: Rational) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn powi(self, n: i64) -> Expr {
        self.pow(Rational::integer(n))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Names of all free variables.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.to_string());
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluate with `f64` bindings.
    pub fn evaluate<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, ExprError> {
        self.eval_with(&|name: &str| bindings.lookup(name))
    }

    /// Evaluate over any [`Scalar`]; `lookup` resolves variable names.
    pub fn eval_with<S: Scalar>(&self, lookup: &dyn Fn(&str) -> Option<S>) -> Result<S, ExprError> {
        self.eval_inner(lookup).map_err(|e| match e {
            ExprError::Domain { op, arg, .. } => {
                let vars: Vec<String> = self
                    .variables()
                    .into_iter()
                    .filter_map(|v| lookup(&v).map(|s| format!("{v} = {}", s.value())))
                    .collect();
                let bindings = if vars.is_empty() {
                    String::new()
                } else {
                    format!(" at {}", vars.join(", "))
                };
                ExprError::Domain { op, arg, bindings }
            }
            other => other,
        })
    }

    fn eval_inner<S: Scalar>(&self, lookup: &dyn Fn(&str) -> Option<S>) -> Result<S, ExprError> {
        let domain = |op: &'static str, arg: f64| ExprError::Domain {
            op,
            arg,
            bindings: String::new(),
        };
        let out = match self {
            Expr::Num(v) => S::cst(*v),
            Expr::Var(name) => {
                if let Some(v) = lookup(name) {
                    v
                } else {
                    return Err(ExprError::UnboundVariable(name.to_string()));
                }
            }
            Expr::Neg(a) => -a.eval_inner(lookup)?,
            Expr::Add(a, b) => a.eval_inner(lookup)? + b.eval_inner(lookup)?,
            Expr::Sub(a, b) => a.eval_inner(lookup)? - b.eval_inner(lookup)?,
            Expr::Mul(a, b) => a.eval_inner(lookup)? * b.eval_inner(lookup)?,
            Expr::Div(a, b) => {
                let num = a.eval_inner(lookup)?;
                let den = b.eval_inner(lookup)?;
                if den.value() == 0.0 {
                    return Err(domain("division", num.value()));
                }
                num / den
            }
            Expr::Pow(a, r) => {
                let base = a.eval_inner(lookup)?;
                let bv = base.value();
                if r.is_integer() {
                    if bv == 0.0 && r.num < 0 {
                        return Err(domain("negative power of zero", bv));
                    }
                    base.powi(r.num as i32)
                } else if bv > 0.0 {
                    base.powf(r.to_f64())
                } else if bv == 0.0 {
                    if r.num < 0 {
                        return Err(domain("negative power of zero", bv));
                    }
                    S::cst(0.0)
                } else if r.den % 2 == 1 {
                    let m = (-base).powf(r.to_f64());
                    if r.num % 2 == 0 {
                        m
                    } else {
                        -m
                    }
                } else {
                    return Err(domain("even root of negative number", bv));
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval_inner(lookup)?;
                let v = x.value();
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => {
                        if v.cos() == 0.0 {
                            return Err(domain("tan", v));
                        }
                        x.tan()
                    }
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if v <= 0.0 {
                            return Err(domain("ln", v));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(domain("sqrt", v));
                        }
                        x.sqrt()
                    }
                    Func::Atan => x.atan(),
                }
            }
        };
        if !out.value().is_finite() {
            return Err(domain("non-finite result", out.value()));
        }
        Ok(out)
    }

    /// Exact symbolic derivative (unsimplified).
    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    /// Constant folding, 0/1 identities and like-term collection.
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// `differentiate` followed by `simplify`.
    pub fn derivative(&self, var: &str) -> Expr {
        self.differentiate(var).simplify()
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

/// Source of variable values for `f64` evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Bindings for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

impl Bindings for std::collections::HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for std::collections::BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "({v:?})"),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, r) => write!(f, "({a}^{r})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Expr, ExprError> {
        parse(s)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Num(rhs)))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Num(self)), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, name: &str, v: f64) -> Result<f64, ExprError> {
        parse(src).unwrap().evaluate(&[(name, v)])
    }

    #[test]
    fn evaluates_basic_examples() {
        assert_eq!(eval1("2*t + sin(t)", "t", 0.0).unwrap(), 0.0);
        let e = parse("x^2+y^2").unwrap();
        assert_eq!(e.evaluate(&[("x", 3.0), ("y", 4.0)]).unwrap(), 25.0);
        let v = eval1("exp(ln(t))", "t", 2.5).unwrap();
        assert!((v - 2.5).abs() <= 1e-14);
    }

    #[test]
    fn division_by_zero_is_a_domain_error_with_bindings() {
        let err = eval1("1/t", "t", 0.0).unwrap_err();
        match err {
            ExprError::Domain { op, bindings, .. } => {
                assert_eq!(op, "division");
                assert!(bindings.contains("t = 0"), "{bindings}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(eval1("ln(t)", "t", -1.0), Err(ExprError::Domain { op: "ln", .. })));
        assert!(matches!(eval1("sqrt(t)", "t", -1.0), Err(ExprError::Domain { .. })));
        assert!(matches!(eval1("t^(1/2)", "t", -4.0), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn unbound_variable_only_at_evaluation() {
        let e = parse("rho + 1").unwrap();
        assert_eq!(e.evaluate(&[("t", 1.0)]), Err(ExprError::UnboundVariable("rho".into())));
    }

    #[test]
    fn odd_roots_of_negative_numbers() {
        assert!((eval1("t^(1/3)", "t", -8.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((eval1("t^(2/3)", "t", -8.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(eval1("t^3", "t", -2.0).unwrap(), -8.0);
    }

    #[test]
    fn print_parse_round_trip() {
        let e = parse("t^3").unwrap();
        let back = parse(&e.to_string()).unwrap();
        assert_eq!(back.evaluate(&[("t", 2.0)]).unwrap(), 8.0);
        for src in [
            "-t^2 + 3.5e-3*t/(1+t^2)",
            "sqrt(1+t^2)*atan(t)-tan(t/3)",
            "t^(-1/3)*exp(-t)",
            "-(-(2))*pi",
        ] {
            let e = parse(src).unwrap();
            let back = parse(&e.to_string()).unwrap();
            let a = e.evaluate(&[("t", 0.8)]).unwrap();
            let b = back.evaluate(&[("t", 0.8)]).unwrap();
            assert_eq!(a, b, "{src} -> {e}");
        }
    }

    #[test]
    fn rational_recovery() {
        assert_eq!(Rational::approximate(0.5), Some(Rational::new(1, 2)));
        assert_eq!(Rational::approximate(1.0 / 3.0), Some(Rational::new(1, 3)));
        assert_eq!(Rational::approximate(-2.25), Some(Rational::new(-9, 4)));
        assert_eq!(Rational::approximate(std::f64::consts::PI), None);
        assert_eq!(Rational::new(4, -6), Rational::new(-2, 3));
    }

    #[test]
    fn variables_are_collected() {
        let e = parse("xbar*ybar + sin(t) + pi").unwrap();
        let v: Vec<_> = e.variables().into_iter().collect();
        assert_eq!(v, vec!["t", "xbar", "ybar"]);
    }
}
