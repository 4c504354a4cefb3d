use std::fmt;
use std::sync::Arc;

use super::dfa::Dfa;
use super::regex::{write_quoted, RegexExpr};
use crate::value::Type;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
    Le,
    Ge,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => a == b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arith {
    Num(i64),
    Var(String),
    /// Length of a string variable.
    Len(String),
    Bin(ArithOp, Box<Arith>, Box<Arith>),
}

impl Arith {
    pub fn bin(op: ArithOp, a: Arith, b: Arith) -> Arith {
        Arith::Bin(op, Box::new(a), Box::new(b))
    }

    fn collect_vars(&self, out: &mut Vec<(String, Type)>) {
        match self {
            Arith::Num(_) => {}
            Arith::Var(v) => out.push((v.clone(), Type::Int)),
            Arith::Len(v) => out.push((v.clone(), Type::Str)),
            Arith::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// String membership atom `var ∈ regex`.
///
/// The compiled automaton is shared and excluded from equality: two atoms are
/// equal when they test the same variable against the same expression.
#[derive(Debug, Clone)]
pub struct Membership {
    pub var: String,
    pub regex: RegexExpr,
    pub dfa: Arc<Dfa>,
}

impl Membership {
    pub fn new(var: impl Into<String>, regex: RegexExpr) -> Self {
        let dfa = Arc::new(Dfa::compile(&regex));
        Membership { var: var.into(), regex, dfa }
    }
}

impl PartialEq for Membership {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var && self.regex == other.regex
    }
}

impl Eq for Membership {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    BoolVar(String),
    Cmp(CmpOp, Arith, Arith),
    Member(Membership),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    /// Rewrites `>=`, `<=` and `!=` into `> or =`, `< or =` and `not =`.
    pub fn desugar(&self) -> Expr {
        match self {
            Expr::Cmp(op, a, b) => {
                let cmp = |op| Expr::Cmp(op, a.clone(), b.clone());
                match op {
                    CmpOp::Ge => Expr::or(cmp(CmpOp::Gt), cmp(CmpOp::Eq)),
                    CmpOp::Le => Expr::or(cmp(CmpOp::Lt), cmp(CmpOp::Eq)),
                    CmpOp::Ne => Expr::not(cmp(CmpOp::Eq)),
                    _ => self.clone(),
                }
            }
            Expr::Not(e) => Expr::not(e.desugar()),
            Expr::And(a, b) => Expr::and(a.desugar(), b.desugar()),
            Expr::Or(a, b) => Expr::or(a.desugar(), b.desugar()),
            other => other.clone(),
        }
    }

    /// True when no `>=`, `<=` or `!=` remains.
    pub fn is_desugared(&self) -> bool {
        match self {
            Expr::Cmp(op, ..) => matches!(op, CmpOp::Lt | CmpOp::Gt | CmpOp::Eq),
            Expr::Not(e) => e.is_desugared(),
            Expr::And(a, b) | Expr::Or(a, b) => a.is_desugared() && b.is_desugared(),
            _ => true,
        }
    }

    /// Variable occurrences with the type implied by their position, in
    /// left-to-right order (duplicates included).
    pub(crate) fn occurrences(&self, out: &mut Vec<(String, Type)>) {
        match self {
            Expr::Const(_) => {}
            Expr::BoolVar(v) => out.push((v.clone(), Type::Bool)),
            Expr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Member(m) => out.push((m.var.clone(), Type::Str)),
            Expr::Not(e) => e.occurrences(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.occurrences(out);
                b.occurrences(out);
            }
        }
    }

    /// Top-level conjuncts, flattening nested `and`.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Visits every membership atom.
    pub fn memberships(&self) -> Vec<&Membership> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Membership>) {
            match e {
                Expr::Member(m) => out.push(m),
                Expr::Not(x) => go(x, out),
                Expr::And(a, b) | Expr::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Arith {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arith::Num(n) => write!(f, "{n}"),
            Arith::Var(v) => f.write_str(v),
            Arith::Len(v) => write!(f, "len({v})"),
            Arith::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(b) => write!(f, "{b}"),
            Expr::BoolVar(v) => f.write_str(v),
            Expr::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Expr::Member(m) => {
                write!(f, "{} in ", m.var)?;
                match &m.regex {
                    // Keep bare literals readable.
                    RegexExpr::Literal(s) => write_quoted(f, s),
                    r => write!(f, "{r}"),
                }
            }
            Expr::Not(e) => write!(f, "not ({e})"),
            Expr::And(a, b) => write!(f, "({a} and {b})"),
            Expr::Or(a, b) => write!(f, "({a} or {b})"),
        }
    }
}
