//! Contract language: boolean combinations of integer comparisons, string
//! membership in regular languages, and boolean atoms.
//!
//! ```
//! use coevo::contract::Contract;
//! use coevo::value::Env;
//!
//! let c = Contract::parse("payload ∈ Σ*.[0-9].Σ* ∧ len(payload) ≥ 6").unwrap();
//! assert!(c.evaluate(&Env::new().with("payload", "john42")).unwrap());
//! assert!(!c.evaluate(&Env::new().with("payload", "john")).unwrap());
//! ```
//!
//! The concrete grammar is documented in `docs/contract-grammar.md`.

mod ast;
pub mod dfa;
mod eval;
mod parser;
pub mod regex;

use std::fmt;

use thiserror::Error;

pub use ast::{Arith, ArithOp, CmpOp, Expr, Membership};
pub use dfa::Dfa;
pub use regex::RegexExpr;

use crate::value::{Env, ParamVector, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("type error: {message}")]
    Type { message: String },
    #[error("character {ch:?} at {line}:{column} is outside the printable alphabet")]
    Alphabet { ch: char, line: usize, column: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no binding for variable `{0}`")]
    MissingBinding(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("variable `{name}` is bound to a {found} but used as a {expected}")]
    TypeMismatch { name: String, expected: Type, found: Type },
}

/// A parsed, type-checked contract.
///
/// The surface form keeps `>=`, `<=` and `!=` for printing and solver export;
/// evaluation runs on the desugared core form.
#[derive(Debug, Clone)]
pub struct Contract {
    surface: Expr,
    core: Expr,
    vars: Vec<(String, Type)>,
}

impl PartialEq for Contract {
    fn eq(&self, other: &Self) -> bool {
        self.surface == other.surface
    }
}

impl Contract {
    /// Parses, desugars and type-checks contract source text.
    pub fn parse(text: &str) -> Result<Contract, ContractError> {
        Contract::from_expr(parse_surface(text)?)
    }

    /// Like [`Contract::parse`], additionally requiring every variable to be
    /// declared in `declared` with a matching type.
    pub fn parse_declared(text: &str, declared: &[(String, Type)]) -> Result<Contract, ContractError> {
        let c = Contract::parse(text)?;
        for (name, ty) in &c.vars {
            match declared.iter().find(|(n, _)| n == name) {
                None => return Err(ContractError::Type { message: format!("undeclared variable `{name}`") }),
                Some((_, dty)) if dty != ty => {
                    return Err(ContractError::Type {
                        message: format!("variable `{name}` is declared {dty} but used as {ty}"),
                    })
                }
                _ => {}
            }
        }
        Ok(c)
    }

    /// Type-checks an expression tree.
    pub fn from_expr(surface: Expr) -> Result<Contract, ContractError> {
        let mut occ = Vec::new();
        surface.occurrences(&mut occ);
        let mut vars: Vec<(String, Type)> = Vec::new();
        for (name, ty) in occ {
            match vars.iter().find(|(n, _)| *n == name) {
                Some((_, seen)) if *seen != ty => {
                    return Err(ContractError::Type {
                        message: format!("variable `{name}` used both as {seen} and as {ty}"),
                    })
                }
                Some(_) => {}
                None => vars.push((name, ty)),
            }
        }
        let core = surface.desugar();
        Ok(Contract { surface, core, vars })
    }

    /// The contract `true`.
    pub fn always() -> Contract {
        Contract::from_expr(Expr::Const(true)).expect("constant is well-typed")
    }

    pub fn surface(&self) -> &Expr {
        &self.surface
    }

    pub fn core(&self) -> &Expr {
        &self.core
    }

    /// Free variables in first-occurrence order. This order defines the
    /// component order of every [`ParamVector`] checked against the contract.
    pub fn free_vars(&self) -> &[(String, Type)] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn var_types(&self) -> Vec<Type> {
        self.vars.iter().map(|(_, t)| *t).collect()
    }

    pub fn evaluate(&self, env: &Env) -> Result<bool, EvalError> {
        eval::eval_expr(&self.core, env)
    }

    /// Evaluates against a positional vector; arithmetic errors count as false.
    pub fn holds_for(&self, v: &ParamVector) -> bool {
        v.len() == self.vars.len() && self.evaluate(&v.to_env(&self.vars)).unwrap_or(false)
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.surface)
    }
}

/// Parses without desugaring or type checking.
pub fn parse_surface(text: &str) -> Result<Expr, ContractError> {
    parser::Parser::new(text).parse_document()
}

/// Parses a standalone regular expression in contract syntax.
pub fn parse_regex(text: &str) -> Result<RegexExpr, ContractError> {
    parser::Parser::new(text).parse_regex_only()
}

/// Evaluates any expression tree (surface or core).
pub fn evaluate_expr(e: &Expr, env: &Env) -> Result<bool, EvalError> {
    eval::eval_expr(e, env)
}

/// Evaluates an integer expression.
pub fn evaluate_arith(a: &Arith, env: &Env) -> Result<i64, EvalError> {
    eval::eval_arith(a, env)
}

/// Compiles a regular expression; fails on characters outside the alphabet.
pub fn compile_regex(r: &RegexExpr) -> Result<Dfa, ContractError> {
    if let Some(ch) = r.find_unprintable() {
        return Err(ContractError::Alphabet { ch, line: 0, column: 0 });
    }
    Ok(Dfa::compile(r))
}
