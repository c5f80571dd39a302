use std::fmt;

use crate::error::DomainError;
use crate::kernel::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Syntax tree of a bivariate expression.
///
/// Numeric literals are always nonnegative; a leading minus is a `Neg` node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Constructors used by the parser and by tests.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    pub fn pi() -> Expr {
        Expr::Const(Constant::Pi)
    }

    pub fn e() -> Expr {
        Expr::Const(Constant::E)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Add, l, r)
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Sub, l, r)
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Mul, l, r)
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Div, l, r)
    }

    pub fn pow(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Pow, l, r)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// True when the expression mentions neither `x` nor `y`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, DomainError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Const(c) => c.value(),
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(x, y)?, r.eval(x, y)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(DomainError::new("division by zero", x, y));
                        }
                        l / r
                    }
                    BinOp::Pow => power(l, r),
                }
            }
            Expr::Call(f, arg) => {
                let v = arg.eval(x, y)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(DomainError::new(
                                format!("log of nonpositive value {v}"),
                                x,
                                y,
                            ));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(DomainError::new(
                                format!("sqrt of negative value {v}"),
                                x,
                                y,
                            ));
                        }
                        v.sqrt()
                    }
                }
            }
        };
        if v.is_nan() {
            return Err(DomainError::new("expression is undefined", x, y));
        }
        if v.is_infinite() {
            return Err(DomainError::new("expression overflows", x, y));
        }
        Ok(v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Binary(BinOp::Pow, ..) => 3,
            Expr::Neg(_) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Const(_) | Expr::Call(..) => 5,
        }
    }
}

/// Integer exponents go through repeated multiplication so that `x^2` is exactly `x*x`.
pub(crate) fn power(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= 1024.0 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

/// Standard real evaluation of `expr` at `point`.
pub fn evaluate(expr: &Expr, point: Point2) -> Result<f64, DomainError> {
    expr.eval(point.x(), point.y())
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints with the minimal parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Neg(e) => write!(f, "-{}", Wrapped(e, e.precedence() < 4)),
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
            Expr::Binary(op, l, r) => {
                let own = self.precedence();
                let (lp, rp) = match op {
                    // base of ^ is a unary, exponent is a factor
                    BinOp::Pow => (l.precedence() < 4, r.precedence() < 3),
                    _ => (l.precedence() < own, r.precedence() <= own),
                };
                match op {
                    BinOp::Pow => write!(f, "{}^{}", Wrapped(l, lp), Wrapped(r, rp)),
                    _ => write!(f, "{} {} {}", Wrapped(l, lp), op.symbol(), Wrapped(r, rp)),
                }
            }
        }
    }
}
