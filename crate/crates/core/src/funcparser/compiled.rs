use super::expr::{power, BinOp, Expr, Func, Var};
use crate::error::DomainError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Push(f64),
    X,
    Y,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    PowI(i32),
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

const STACK: usize = 32;

/// Postfix program equivalent to an `Expr`, performing the same floating-point
/// operations in the same order.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    ops: Vec<Op>,
    depth: usize,
}

impl Program {
    pub(crate) fn compile(expr: &Expr) -> Self {
        let mut ops = Vec::new();
        emit(expr, &mut ops);
        let mut depth: usize = 0;
        let mut max = 0;
        for op in &ops {
            match op {
                Op::Push(_) | Op::X | Op::Y => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => depth -= 1,
                _ => {}
            }
            max = max.max(depth);
        }
        Self { ops, depth: max }
    }

    /// Unchecked run; the flag reports a division by zero, a log of a
    /// nonpositive value or a sqrt of a negative value.
    fn run(&self, x: f64, y: f64, stack: &mut [f64]) -> (f64, bool) {
        let mut sp = 0;
        let mut bad = false;
        for op in &self.ops {
            match *op {
                Op::Push(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Op::X => {
                    stack[sp] = x;
                    sp += 1;
                }
                Op::Y => {
                    stack[sp] = y;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::PowI(k) => stack[sp - 1] = stack[sp - 1].powi(k),
                Op::Sin => stack[sp - 1] = stack[sp - 1].sin(),
                Op::Cos => stack[sp - 1] = stack[sp - 1].cos(),
                Op::Exp => stack[sp - 1] = stack[sp - 1].exp(),
                Op::Log => {
                    let v = stack[sp - 1];
                    bad |= v <= 0.0;
                    stack[sp - 1] = v.ln();
                }
                Op::Sqrt => {
                    let v = stack[sp - 1];
                    bad |= v < 0.0;
                    stack[sp - 1] = v.sqrt();
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
                    sp -= 1;
                    let (l, r) = (stack[sp - 1], stack[sp]);
                    stack[sp - 1] = match *op {
                        Op::Add => l + r,
                        Op::Sub => l - r,
                        Op::Mul => l * r,
                        Op::Div => {
                            bad |= r == 0.0;
                            l / r
                        }
                        _ => power(l, r),
                    };
                }
            }
        }
        (stack[0], bad)
    }

    /// Evaluate; on any irregularity defer to the checked tree walk for the exact error.
    pub(crate) fn eval(&self, expr: &Expr, x: f64, y: f64) -> Result<f64, DomainError> {
        let (v, bad) = if self.depth <= STACK {
            let mut stack = [0.0; STACK];
            self.run(x, y, &mut stack)
        } else {
            let mut stack = vec![0.0; self.depth];
            self.run(x, y, &mut stack)
        };
        if bad || !v.is_finite() {
            return expr.eval(x, y);
        }
        Ok(v)
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    if e.is_constant() {
        if let Ok(v) = e.eval(0.0, 0.0) {
            ops.push(Op::Push(v));
            return;
        }
    }
    match e {
        Expr::Num(v) => ops.push(Op::Push(*v)),
        Expr::Const(c) => ops.push(Op::Push(c.value())),
        Expr::Var(Var::X) => ops.push(Op::X),
        Expr::Var(Var::Y) => ops.push(Op::Y),
        Expr::Neg(inner) => {
            emit(inner, ops);
            ops.push(Op::Neg);
        }
        Expr::Call(f, arg) => {
            emit(arg, ops);
            ops.push(match f {
                Func::Sin => Op::Sin,
                Func::Cos => Op::Cos,
                Func::Exp => Op::Exp,
                Func::Log => Op::Log,
                Func::Sqrt => Op::Sqrt,
            });
        }
        Expr::Binary(BinOp::Pow, base, exponent) => {
            emit(base, ops);
            match integral_exponent(exponent) {
                Some(k) => ops.push(Op::PowI(k)),
                None => {
                    emit(exponent, ops);
                    ops.push(Op::Pow);
                }
            }
        }
        Expr::Binary(op, l, r) => {
            emit(l, ops);
            emit(r, ops);
            ops.push(match op {
                BinOp::Add => Op::Add,
                BinOp::Sub => Op::Sub,
                BinOp::Mul => Op::Mul,
                BinOp::Div => Op::Div,
                BinOp::Pow => Op::Pow,
            });
        }
    }
}

/// A constant exponent that `power` would route through `powi`.
fn integral_exponent(e: &Expr) -> Option<i32> {
    if !e.is_constant() {
        return None;
    }
    let v = e.eval(0.0, 0.0).ok()?;
    (v.fract() == 0.0 && v.abs() <= 1024.0).then_some(v as i32)
}
