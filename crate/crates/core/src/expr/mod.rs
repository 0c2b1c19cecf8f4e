//! Scalar expressions of chart coordinates, parsed from text and evaluable
//! over plain numbers or over second-order jets.
//!
//! The grammar is standard infix with `^` right-associative and binding
//! tighter than unary minus, which binds tighter than `*`/`/`, which bind
//! tighter than `+`/`-`. Coordinates are the fixed names `x1..x4`.

mod jet;
mod parser;

pub use jet::Jet2;
pub use parser::parse;

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Function {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sinh => "sinh",
            Function::Cosh => "cosh",
            Function::Tanh => "tanh",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Function> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "sinh" => Function::Sinh,
            "cosh" => Function::Cosh,
            "tanh" => Function::Tanh,
            "exp" => Function::Exp,
            "log" => Function::Log,
            "sqrt" => Function::Sqrt,
            "abs" => Function::Abs,
            _ => return None,
        })
    }
}

/// Expression tree over coordinates `x1..x4`, numeric literals, `pi`/`e`,
/// the four arithmetic operators plus `^`, unary negation, and the
/// elementary functions.
///
/// Numeric literals are kept non-negative; negative values are represented
/// through [`Expr::Neg`], so `parse(print(e))` reproduces the tree exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// 0-based coordinate index: `x1` is `Coord(0)`.
    Coord(u8),
    Num(f64),
    Const(Constant),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Func(Function, Box<Expr>),
}

impl Expr {
    /// Literal, normalising negatives into an explicit negation node.
    pub fn num(v: f64) -> Expr {
        assert!(v.is_finite(), "expression literals must be finite");
        if v.is_sign_negative() && v != 0.0 {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    pub fn coord(i: usize) -> Expr {
        assert!(i < 4);
        Expr::Coord(i as u8)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn func(f: Function, a: Expr) -> Expr {
        Expr::Func(f, Box::new(a))
    }

    /// Squared expression, via an integer power.
    pub fn squared(self) -> Expr {
        Expr::pow(self, Expr::Num(2.0))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Highest coordinate index referenced, if any (0-based).
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Coord(i) => Some(*i as usize),
            Expr::Num(_) | Expr::Const(_) => None,
            Expr::Neg(a) | Expr::Func(_, a) => a.max_coord(),
            Expr::Bin(_, a, b) => match (a.max_coord(), b.max_coord()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Rename every coordinate `xᵢ` to `x_{i+offset}`; used when embedding a
    /// fiber metric after a base block.
    pub fn shift_coords(&self, offset: usize) -> Expr {
        match self {
            Expr::Coord(i) => {
                let j = *i as usize + offset;
                assert!(j < 4, "coordinate shift leaves dimension 4");
                Expr::Coord(j as u8)
            }
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::neg(a.shift_coords(offset)),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.shift_coords(offset)), Box::new(b.shift_coords(offset)))
            }
            Expr::Func(f, a) => Expr::func(*f, a.shift_coords(offset)),
        }
    }

    fn domain_err(&self, what: &str) -> Error {
        Error::Domain {
            what: what.to_string(),
            subexpr: self.to_string(),
        }
    }

    fn eval_impl<T: Scalar>(&self, point: &[T], n: usize) -> Result<T> {
        Ok(match self {
            Expr::Coord(i) => {
                let i = *i as usize;
                if i >= n {
                    return Err(Error::CoordOutOfRange { coord: i + 1, dim: n });
                }
                point[i]
            }
            Expr::Num(v) => T::constant(*v, n),
            Expr::Const(Constant::Pi) => T::constant(std::f64::consts::PI, n),
            Expr::Const(Constant::E) => T::constant(std::f64::consts::E, n),
            Expr::Neg(a) => -a.eval_impl(point, n)?,
            Expr::Bin(op, a, b) => {
                // Integer exponents stay on the repeated-multiplication
                // route, so negative bases are fine.
                if *op == BinOp::Pow {
                    if let Some(k) = b.as_int_literal() {
                        let base = a.eval_impl(point, n)?;
                        if k < 0 && base.value() == 0.0 {
                            return Err(self.domain_err("zero base with negative exponent"));
                        }
                        return Ok(base.powi(k));
                    }
                }
                let lhs = a.eval_impl(point, n)?;
                let rhs = b.eval_impl(point, n)?;
                match op {
                    BinOp::Add => lhs + rhs,
                    BinOp::Sub => lhs - rhs,
                    BinOp::Mul => lhs * rhs,
                    BinOp::Div => {
                        if rhs.value() == 0.0 {
                            return Err(self.domain_err("division by zero"));
                        }
                        lhs / rhs
                    }
                    BinOp::Pow => {
                        if lhs.value() <= 0.0 {
                            return Err(
                                self.domain_err("non-integer power of a non-positive base")
                            );
                        }
                        lhs.powf(rhs)
                    }
                }
            }
            Expr::Func(f, a) => {
                let u = a.eval_impl(point, n)?;
                match f {
                    Function::Sin => u.sin(),
                    Function::Cos => u.cos(),
                    Function::Tan => u.tan(),
                    Function::Sinh => u.sinh(),
                    Function::Cosh => u.cosh(),
                    Function::Tanh => u.tanh(),
                    Function::Exp => u.exp(),
                    Function::Log => {
                        if u.value() <= 0.0 {
                            return Err(self.domain_err("log of a non-positive argument"));
                        }
                        u.ln()
                    }
                    Function::Sqrt => {
                        if u.value() < 0.0 {
                            return Err(self.domain_err("sqrt of a negative argument"));
                        }
                        u.sqrt()
                    }
                    Function::Abs => u.abs(),
                }
            }
        })
    }

    /// Exponent as a small integer, if this node is a literal `k` or `-k`.
    fn as_int_literal(&self) -> Option<i32> {
        let (sign, v) = match self {
            Expr::Num(v) => (1.0, *v),
            Expr::Neg(inner) => match &**inner {
                Expr::Num(v) => (-1.0, *v),
                _ => return None,
            },
            _ => return None,
        };
        if v.fract() == 0.0 && v.abs() <= 64.0 {
            Some((sign * v) as i32)
        } else {
            None
        }
    }

    /// Plain numeric evaluation.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        self.eval_impl(point, point.len())
    }

    /// Value, gradient and Hessian at `point`, exact to rounding.
    pub fn eval_jet(&self, point: &[f64]) -> Result<Jet2> {
        let n = point.len();
        debug_assert!(n <= 4);
        let mut seeds = [Jet2::constant(0.0, n); 4];
        for (i, &x) in point.iter().enumerate() {
            seeds[i] = Jet2::coordinate(x, i, n);
        }
        self.eval_impl(&seeds[..n], n)
    }
}

/// Numeric carrier for evaluation: `f64` or [`Jet2`].
trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn constant(v: f64, n: usize) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64, _n: usize) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

impl Scalar for Jet2 {
    fn constant(v: f64, n: usize) -> Self {
        Jet2::constant(v, n)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn sin(self) -> Self {
        Jet2::sin(self)
    }
    fn cos(self) -> Self {
        Jet2::cos(self)
    }
    fn tan(self) -> Self {
        Jet2::tan(self)
    }
    fn sinh(self) -> Self {
        Jet2::sinh(self)
    }
    fn cosh(self) -> Self {
        Jet2::cosh(self)
    }
    fn tanh(self) -> Self {
        Jet2::tanh(self)
    }
    fn exp(self) -> Self {
        Jet2::exp(self)
    }
    fn ln(self) -> Self {
        Jet2::ln(self)
    }
    fn sqrt(self) -> Self {
        Jet2::sqrt(self)
    }
    fn abs(self) -> Self {
        Jet2::abs(self)
    }
    fn powi(self, k: i32) -> Self {
        Jet2::powi(self, k)
    }
    fn powf(self, e: Self) -> Self {
        Jet2::powf(self, e)
    }
}

// Precedence levels used by the printer; must agree with the parser.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
            Expr::Neg(_) => PREC_NEG,
            Expr::Bin(BinOp::Pow, ..) => PREC_POW,
            _ => PREC_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Coord(i) => write!(f, "x{}", i + 1)?,
            Expr::Num(v) => write!(f, "{v}")?,
            Expr::Const(Constant::Pi) => write!(f, "pi")?,
            Expr::Const(Constant::E) => write!(f, "e")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, PREC_NEG)?;
            }
            Expr::Bin(op, a, b) => {
                let (sym, left_min, right_min) = match op {
                    BinOp::Add => ("+", PREC_ADD, PREC_ADD + 1),
                    BinOp::Sub => ("-", PREC_ADD, PREC_ADD + 1),
                    BinOp::Mul => ("*", PREC_MUL, PREC_MUL + 1),
                    BinOp::Div => ("/", PREC_MUL, PREC_MUL + 1),
                    // Right-associative and tighter than unary minus on the
                    // left; a unary minus is allowed as the exponent.
                    BinOp::Pow => ("^", PREC_POW + 1, PREC_NEG),
                };
                a.fmt_prec(f, left_min)?;
                if *op == BinOp::Pow {
                    write!(f, "{sym}")?;
                } else {
                    write!(f, " {sym} ")?;
                }
                b.fmt_prec(f, right_min)?;
            }
            Expr::Func(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_example() {
        let e = parse("x1*x2").unwrap();
        let j = e.eval_jet(&[3.0, 5.0]).unwrap();
        assert_eq!(j.value, 15.0);
        assert_eq!(&j.grad[..2], &[5.0, 3.0]);
        assert_eq!(j.hess[0][1], 1.0);
        assert_eq!(j.hess[0][0], 0.0);
        assert_eq!(j.hess[1][1], 0.0);
    }

    #[test]
    fn sin_at_origin() {
        let e = parse("sin(x1)").unwrap();
        let j = e.eval_jet(&[0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad[0], 1.0);
        assert_eq!(j.hess[0][0], 0.0);
    }

    #[test]
    fn exp_square_matches_central_differences() {
        let e = parse("exp(x1^2)").unwrap();
        let x = 0.7;
        let h = 1e-4;
        let f = |t: f64| e.eval_f64(&[t]).unwrap();
        let grad_fd = (f(x + h) - f(x - h)) / (2.0 * h);
        let hess_fd = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let j = e.eval_jet(&[x]).unwrap();
        assert!((j.grad[0] - grad_fd).abs() <= 1e-6 * (1.0 + grad_fd.abs()));
        assert!((j.hess[0][0] - hess_fd).abs() <= 1e-6 * (1.0 + hess_fd.abs()));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("log(x1 - 2)").unwrap();
        let err = e.eval_f64(&[1.0]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("log"), "{msg}");
        assert!(msg.contains("x1 - 2"), "{msg}");
    }

    #[test]
    fn coordinate_out_of_chart_dimension() {
        let e = parse("x3 + 1").unwrap();
        assert!(matches!(
            e.eval_f64(&[0.0, 0.0]),
            Err(Error::CoordOutOfRange { coord: 3, dim: 2 })
        ));
    }

    #[test]
    fn integer_power_of_negative_base_is_fine() {
        let e = parse("(x1 - 2)^2").unwrap();
        assert_eq!(e.eval_f64(&[1.0]).unwrap(), 1.0);
        // Non-integer power of a negative base is a domain error.
        let e = parse("(x1 - 2)^0.5").unwrap();
        assert!(e.eval_f64(&[1.0]).is_err());
    }

    #[test]
    fn shift_coords_renames() {
        let e = parse("x1 + sin(x2)").unwrap();
        assert_eq!(e.shift_coords(2).to_string(), "x3 + sin(x4)");
    }
}
