use std::collections::HashMap;
use std::fmt;

use super::ast::FieldExpr;
use super::EvalError;

/// Value of a field expression: an element of `F_p` or the absorbing sentinel `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldValue {
    Finite(u64),
    Infinity,
}

impl FieldValue {
    pub fn is_zero(self) -> bool {
        self == FieldValue::Finite(0)
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldValue::Finite(v) => write!(f, "{v}"),
            FieldValue::Infinity => write!(f, "inf"),
        }
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse modulo a prime; `a` must be nonzero.
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Evaluate `expr` over `F_p` with `∞` absorbing every operation.
pub fn evaluate(
    expr: &FieldExpr,
    assignment: &HashMap<String, u64>,
    p: u64,
) -> Result<FieldValue, EvalError> {
    use FieldValue::*;
    let bin = |a: &FieldExpr, b: &FieldExpr| -> Result<Option<(u64, u64)>, EvalError> {
        match (evaluate(a, assignment, p)?, evaluate(b, assignment, p)?) {
            (Finite(x), Finite(y)) => Ok(Some((x, y))),
            _ => Ok(None),
        }
    };
    Ok(match expr {
        FieldExpr::Var(v) => {
            let x = assignment
                .get(v)
                .ok_or_else(|| EvalError::Unbound(v.clone()))?;
            Finite(x % p)
        }
        FieldExpr::Const(c) => Finite(c % p),
        FieldExpr::Neg(a) => match evaluate(a, assignment, p)? {
            Finite(x) => Finite((p - x) % p),
            Infinity => Infinity,
        },
        FieldExpr::Add(a, b) => bin(a, b)?.map_or(Infinity, |(x, y)| Finite((x + y) % p)),
        FieldExpr::Sub(a, b) => bin(a, b)?.map_or(Infinity, |(x, y)| Finite((x + p - y) % p)),
        FieldExpr::Mul(a, b) => bin(a, b)?.map_or(Infinity, |(x, y)| Finite(mul_mod(x, y, p))),
        FieldExpr::Div(a, b) => match bin(a, b)? {
            Some((_, 0)) | None => Infinity,
            Some((x, y)) => Finite(mul_mod(x, inv_mod(y, p), p)),
        },
    })
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Load(usize),
    Const(u64),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
}

/// A field expression compiled to a postfix program over variable slots.
///
/// Values are plain `u64` with `p` itself standing for `∞`; this is the hot
/// path for pushforwards and identity validation.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    p: u64,
    inverses: Vec<u64>,
}

impl CompiledExpr {
    /// Compile against an ordered slot list; every free variable must have a slot.
    pub fn new(expr: &FieldExpr, slots: &[String], p: u64) -> Result<Self, EvalError> {
        let mut ops = Vec::new();
        compile_into(expr, slots, p, &mut ops)?;
        // small fields get an inverse table
        let inverses = if p <= 1 << 16 {
            (0..p).map(|a| if a == 0 { 0 } else { inv_mod(a, p) }).collect()
        } else {
            Vec::new()
        };
        Ok(CompiledExpr { ops, p, inverses })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Evaluate on slot values (each `< p`). Returns `p` for `∞`.
    pub fn eval_raw(&self, values: &[u64], stack: &mut Vec<u64>) -> u64 {
        let p = self.p;
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Load(i) => stack.push(values[i]),
                Op::Const(c) => stack.push(c),
                Op::Neg => {
                    let a = stack.last_mut().expect("stack");
                    if *a != p {
                        *a = (p - *a) % p;
                    }
                }
                _ => {
                    let b = stack.pop().expect("stack");
                    let a = stack.last_mut().expect("stack");
                    if *a == p || b == p {
                        *a = p;
                        continue;
                    }
                    *a = match *op {
                        Op::Add => (*a + b) % p,
                        Op::Sub => (*a + p - b) % p,
                        Op::Mul => mul_mod(*a, b, p),
                        Op::Div => {
                            if b == 0 {
                                p
                            } else if self.inverses.is_empty() {
                                mul_mod(*a, inv_mod(b, p), p)
                            } else {
                                mul_mod(*a, self.inverses[b as usize], p)
                            }
                        }
                        _ => unreachable!(),
                    };
                }
            }
        }
        stack[0]
    }

    pub fn eval(&self, values: &[u64]) -> FieldValue {
        let mut stack = Vec::with_capacity(8);
        let raw = self.eval_raw(values, &mut stack);
        if raw == self.p {
            FieldValue::Infinity
        } else {
            FieldValue::Finite(raw)
        }
    }
}

fn compile_into(
    expr: &FieldExpr,
    slots: &[String],
    p: u64,
    ops: &mut Vec<Op>,
) -> Result<(), EvalError> {
    match expr {
        FieldExpr::Var(v) => {
            let i = slots
                .iter()
                .position(|s| s == v)
                .ok_or_else(|| EvalError::Unbound(v.clone()))?;
            ops.push(Op::Load(i));
        }
        FieldExpr::Const(c) => ops.push(Op::Const(c % p)),
        FieldExpr::Neg(a) => {
            compile_into(a, slots, p, ops)?;
            ops.push(Op::Neg);
        }
        FieldExpr::Add(a, b) | FieldExpr::Sub(a, b) | FieldExpr::Mul(a, b) | FieldExpr::Div(a, b) => {
            compile_into(a, slots, p, ops)?;
            compile_into(b, slots, p, ops)?;
            ops.push(match expr {
                FieldExpr::Add(..) => Op::Add,
                FieldExpr::Sub(..) => Op::Sub,
                FieldExpr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
    }
    Ok(())
}
