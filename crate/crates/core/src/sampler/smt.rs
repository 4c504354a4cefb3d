//! SMT-LIB 2 export with the strings theory, and a minimal reader used to
//! check that exported documents are well formed.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::contract::{Arith, ArithOp, CmpOp, Contract, Expr, RegexExpr};
use crate::value::{ParamVector, Type, Value};

fn sort(t: Type) -> &'static str {
    match t {
        Type::Bool => "Bool",
        Type::Int => "Int",
        Type::Str => "String",
    }
}

fn string_lit(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn int_lit(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

fn value_lit(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(n) => int_lit(*n),
        Value::Str(s) => string_lit(s),
    }
}

fn arith(a: &Arith) -> String {
    match a {
        Arith::Num(n) => int_lit(*n),
        Arith::Var(v) => v.clone(),
        Arith::Len(v) => format!("(str.len {v})"),
        Arith::Bin(op, x, y) => {
            // `div` rounds toward negative infinity; contracts truncate. The
            // two agree on nonnegative operands.
            let name = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
                ArithOp::Div => "div",
            };
            format!("({name} {} {})", arith(x), arith(y))
        }
    }
}

fn char_lit(c: char) -> String {
    string_lit(&c.to_string())
}

/// Regex term on one line.
fn regex_inline(r: &RegexExpr) -> String {
    regex_at(r, None)
}

/// Regex term; with `Some(indent)` binary operators put their second
/// operand on a new line indented two more columns.
fn regex_at(r: &RegexExpr, indent: Option<usize>) -> String {
    let nest = |op: &str, parts: &[RegexExpr]| -> String {
        match parts {
            [] => "(str.to.re \"\")".to_string(),
            [only] => regex_at(only, indent),
            [first, rest @ ..] => {
                let tail = if rest.len() == 1 {
                    rest[0].clone()
                } else if op == "re.++" {
                    RegexExpr::Seq(rest.to_vec())
                } else {
                    RegexExpr::Alt(rest.to_vec())
                };
                match indent {
                    Some(i) => {
                        format!("({op} {}\n{}{})", regex_inline(first), " ".repeat(i + 2), regex_at(&tail, Some(i + 2)))
                    }
                    None => format!("({op} {} {})", regex_inline(first), regex_inline(&tail)),
                }
            }
        }
    };
    match r {
        RegexExpr::Literal(s) => format!("(str.to.re {})", string_lit(s)),
        RegexExpr::CaseInsensitive(s) => {
            let parts: Vec<RegexExpr> = s
                .chars()
                .map(|c| {
                    let (lo, up) = (c.to_ascii_lowercase(), c.to_ascii_uppercase());
                    if lo == up {
                        RegexExpr::Literal(c.to_string())
                    } else {
                        RegexExpr::Alt(vec![RegexExpr::Literal(lo.to_string()), RegexExpr::Literal(up.to_string())])
                    }
                })
                .collect();
            nest("re.++", &parts)
        }
        RegexExpr::Class(ranges) => {
            let parts: Vec<String> = ranges
                .iter()
                .map(|&(a, b)| {
                    if a == b {
                        format!("(str.to.re {})", char_lit(a))
                    } else {
                        format!("(re.range {} {})", char_lit(a), char_lit(b))
                    }
                })
                .collect();
            match parts.as_slice() {
                [] => "re.none".to_string(),
                [one] => one.clone(),
                many => format!("(re.union {})", many.join(" ")),
            }
        }
        RegexExpr::Any => "(re.range \" \" \"~\")".to_string(),
        RegexExpr::Seq(parts) => nest("re.++", parts),
        RegexExpr::Alt(parts) => nest("re.union", parts),
        RegexExpr::Star(x) => format!("(re.* {})", regex_at(x, indent)),
        RegexExpr::Repeat(x, n) => format!("((_ re.^ {n}) {})", regex_at(x, indent)),
    }
}

fn formula(e: &Expr) -> String {
    match e {
        Expr::Const(b) => b.to_string(),
        Expr::BoolVar(v) => v.clone(),
        Expr::Cmp(CmpOp::Ne, a, b) => format!("(not (= {} {}))", arith(a), arith(b)),
        Expr::Cmp(op, a, b) => format!("({} {} {})", op.symbol(), arith(a), arith(b)),
        Expr::Member(m) => format!("(str.in.re {} {})", m.var, regex_inline(&m.regex)),
        Expr::Not(x) => format!("(not {})", formula(x)),
        Expr::And(a, b) => format!("(and {} {})", formula(a), formula(b)),
        Expr::Or(a, b) => format!("(or {} {})", formula(a), formula(b)),
    }
}

/// SMT-LIB document asserting `c`: one declaration per free variable, one
/// assertion per top-level conjunct, then one negated equality per component
/// of every excluded model.
pub fn export_smtlib(c: &Contract, excluded: &[ParamVector]) -> String {
    let mut out = String::new();
    for (name, ty) in c.free_vars() {
        let _ = writeln!(out, "(declare-const {name} {})", sort(*ty));
    }
    for conj in c.surface().conjuncts() {
        match conj {
            Expr::Const(true) => {}
            Expr::Member(m) => {
                let _ = writeln!(out, "(assert\n  (str.in.re {}\n    {}))", m.var, regex_at(&m.regex, Some(4)));
            }
            other => {
                let _ = writeln!(out, "(assert {})", formula(other));
            }
        }
    }
    for model in excluded {
        for ((name, _), v) in c.free_vars().iter().zip(model.values()) {
            let _ = writeln!(out, "(assert (not (= {name} {})))", value_lit(v));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    Str(String),
    List(Vec<SExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("symbol `{0}` used before declaration")]
    Undeclared(String),
    #[error("malformed command: {0}")]
    Malformed(String),
}

fn tokenize(text: &str) -> Result<Vec<SExpr>, SmtError> {
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or(SmtError::Unbalanced)?;
                stack.last_mut().ok_or(SmtError::Unbalanced)?.push(SExpr::List(done));
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(SmtError::UnterminatedString),
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                    }
                }
                stack.last_mut().ok_or(SmtError::Unbalanced)?.push(SExpr::Str(s));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut atom = c.to_string();
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == '"' {
                        break;
                    }
                    atom.push(n);
                    chars.next();
                }
                stack.last_mut().ok_or(SmtError::Unbalanced)?.push(SExpr::Atom(atom));
            }
        }
        if stack.is_empty() {
            return Err(SmtError::Unbalanced);
        }
    }
    if stack.len() != 1 {
        return Err(SmtError::Unbalanced);
    }
    Ok(stack.pop().expect("one level"))
}

const BUILTINS: &[&str] = &[
    "str.in.re",
    "str.to.re",
    "str.len",
    "re.++",
    "re.*",
    "re.range",
    "re.union",
    "re.none",
    "re.^",
    "_",
    "not",
    "and",
    "or",
    "=",
    "<",
    ">",
    "<=",
    ">=",
    "+",
    "-",
    "*",
    "div",
    "true",
    "false",
];

fn check_symbols(e: &SExpr, declared: &HashSet<String>) -> Result<(), SmtError> {
    match e {
        SExpr::Str(_) => Ok(()),
        SExpr::Atom(a) => {
            if a.chars().all(|c| c.is_ascii_digit()) || BUILTINS.contains(&a.as_str()) || declared.contains(a) {
                Ok(())
            } else {
                Err(SmtError::Undeclared(a.clone()))
            }
        }
        SExpr::List(items) => items.iter().try_for_each(|i| check_symbols(i, declared)),
    }
}

/// Parses a document and checks parenthesis balance and that every symbol
/// is declared before it is used.
pub fn read_smtlib(text: &str) -> Result<Vec<SExpr>, SmtError> {
    let commands = tokenize(text)?;
    let mut declared = HashSet::new();
    for cmd in &commands {
        let SExpr::List(items) = cmd else {
            return Err(SmtError::Malformed(format!("{cmd:?}")));
        };
        match items.as_slice() {
            [SExpr::Atom(k), SExpr::Atom(name), SExpr::Atom(s)] if k == "declare-const" => {
                if !["String", "Int", "Bool"].contains(&s.as_str()) {
                    return Err(SmtError::Malformed(format!("unknown sort {s}")));
                }
                declared.insert(name.clone());
            }
            [SExpr::Atom(k), body] if k == "assert" => check_symbols(body, &declared)?,
            _ => return Err(SmtError::Malformed(format!("{cmd:?}"))),
        }
    }
    Ok(commands)
}
