use super::ast::{Arith, ArithOp, Expr};
use super::EvalError;
use crate::value::{Env, Type, Value};

fn lookup<'e>(env: &'e Env, name: &str) -> Result<&'e Value, EvalError> {
    env.get(name).ok_or_else(|| EvalError::MissingBinding(name.to_string()))
}

fn mismatch(name: &str, expected: Type, found: &Value) -> EvalError {
    EvalError::TypeMismatch { name: name.to_string(), expected, found: found.ty() }
}

pub fn eval_arith(a: &Arith, env: &Env) -> Result<i64, EvalError> {
    match a {
        Arith::Num(n) => Ok(*n),
        Arith::Var(v) => {
            let val = lookup(env, v)?;
            val.as_int().ok_or_else(|| mismatch(v, Type::Int, val))
        }
        Arith::Len(v) => {
            let val = lookup(env, v)?;
            let s = val.as_str().ok_or_else(|| mismatch(v, Type::Str, val))?;
            Ok(s.chars().count() as i64)
        }
        Arith::Bin(op, x, y) => {
            let x = eval_arith(x, env)?;
            let y = eval_arith(y, env)?;
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::Div => {
                    if y == 0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    // Truncates toward zero.
                    x.checked_div(y)
                }
            };
            r.ok_or(EvalError::Overflow)
        }
    }
}

pub fn eval_expr(e: &Expr, env: &Env) -> Result<bool, EvalError> {
    match e {
        Expr::Const(b) => Ok(*b),
        Expr::BoolVar(v) => {
            let val = lookup(env, v)?;
            val.as_bool().ok_or_else(|| mismatch(v, Type::Bool, val))
        }
        Expr::Cmp(op, a, b) => Ok(op.holds(eval_arith(a, env)?, eval_arith(b, env)?)),
        Expr::Member(m) => {
            let val = lookup(env, &m.var)?;
            let s = val.as_str().ok_or_else(|| mismatch(&m.var, Type::Str, val))?;
            Ok(m.dfa.accepts(s))
        }
        Expr::Not(x) => Ok(!eval_expr(x, env)?),
        // Both operands are evaluated so that missing bindings surface
        // regardless of short-circuiting.
        Expr::And(a, b) => {
            let l = eval_expr(a, env)?;
            let r = eval_expr(b, env)?;
            Ok(l && r)
        }
        Expr::Or(a, b) => {
            let l = eval_expr(a, env)?;
            let r = eval_expr(b, env)?;
            Ok(l || r)
        }
    }
}
