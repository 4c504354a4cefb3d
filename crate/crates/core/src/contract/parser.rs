//! Recursive-descent parser for contract source text.
//!
//! Regular expressions and arithmetic share characters (`+`, `*`, `.`), so the
//! parser works directly on characters and switches sub-grammar by context.
//! Ambiguous prefixes such as `(` are resolved by backtracking; on failure the
//! error that got furthest into the input is reported.

use std::collections::HashMap;

use super::ast::{Arith, ArithOp, CmpOp, Expr, Membership};
use super::regex::{is_printable, RegexExpr};
use super::ContractError;

const KEYWORDS: &[&str] = &["and", "or", "not", "in", "true", "false", "len", "let", "any"];

#[derive(Debug, Clone)]
enum Kind {
    Syntax,
    Type,
    Alphabet(char),
}

#[derive(Debug, Clone)]
struct PErr {
    pos: usize,
    kind: Kind,
    msg: String,
}

type PResult<T> = Result<T, PErr>;

pub(crate) struct Parser {
    chars: Vec<char>,
    pos: usize,
    lets: HashMap<String, RegexExpr>,
    furthest: Option<PErr>,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Self {
        Parser { chars: text.chars().collect(), pos: 0, lets: HashMap::new(), furthest: None }
    }

    pub(crate) fn parse_document(mut self) -> Result<Expr, ContractError> {
        let result = self.document();
        result.map_err(|e| {
            let e = match &self.furthest {
                Some(f) if f.pos > e.pos && matches!(e.kind, Kind::Syntax) => f.clone(),
                _ => e,
            };
            self.to_error(e)
        })
    }

    pub(crate) fn parse_regex_only(mut self) -> Result<RegexExpr, ContractError> {
        let result = (|| {
            let r = self.regex_alt()?;
            self.ws();
            if !self.at_end() {
                return Err(self.err("unexpected trailing input"));
            }
            Ok(r)
        })();
        result.map_err(|e| self.to_error(e))
    }

    fn to_error(&self, e: PErr) -> ContractError {
        let (line, column) = self.line_col(e.pos);
        match e.kind {
            Kind::Syntax => ContractError::Syntax { line, column, message: e.msg },
            Kind::Type => ContractError::Type { message: e.msg },
            Kind::Alphabet(ch) => ContractError::Alphabet { ch, line, column },
        }
    }

    fn line_col(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in self.chars.iter().take(pos) {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn document(&mut self) -> PResult<Expr> {
        self.ws();
        while self.keyword("let") {
            self.ws();
            let name = self.ident()?;
            self.ws();
            self.expect('=')?;
            let r = self.regex_alt()?;
            self.ws();
            self.expect(';')?;
            self.lets.insert(name, r);
            self.ws();
        }
        let e = self.or_expr()?;
        self.ws();
        if !self.at_end() {
            return Err(self.err(&format!("unexpected `{}`", self.chars[self.pos])));
        }
        Ok(e)
    }

    // ---- lexical helpers ----

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += 1;
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn err(&mut self, msg: &str) -> PErr {
        let e = PErr { pos: self.pos, kind: Kind::Syntax, msg: msg.to_string() };
        if self.furthest.as_ref().is_none_or(|f| e.pos >= f.pos) {
            self.furthest = Some(e.clone());
        }
        e
    }

    fn type_err(&self, msg: String) -> PErr {
        PErr { pos: self.pos, kind: Kind::Type, msg }
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.ws();
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn is_ident_start(c: char) -> bool {
        c.is_ascii_alphabetic() || c == '_'
    }

    fn is_ident_char(c: char) -> bool {
        c.is_ascii_alphanumeric() || c == '_'
    }

    /// Reads an identifier-shaped word at the cursor without consuming it.
    fn peek_word(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        let mut end = start;
        if !self.chars.get(end).copied().is_some_and(Self::is_ident_start) {
            return None;
        }
        while self.chars.get(end).copied().is_some_and(Self::is_ident_char) {
            end += 1;
        }
        Some(self.chars[start..end].iter().collect())
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.peek_word().as_deref() == Some(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek_word() {
            Some(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.pos += w.len();
                Ok(w)
            }
            Some(w) => Err(self.err(&format!("`{w}` is a reserved word"))),
            None => Err(self.err("expected identifier")),
        }
    }

    // ---- boolean layer ----

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.keyword("or") || self.eat('∨') {
            let rhs = self.and_expr()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.keyword("and") || self.eat('∧') {
            let rhs = self.unary()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.keyword("not") || self.eat('¬') {
            return Ok(Expr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        self.ws();
        let save = self.pos;
        if self.keyword("true") {
            return Ok(Expr::Const(true));
        }
        if self.keyword("false") {
            return Ok(Expr::Const(false));
        }
        if let Some(word) = self.peek_word() {
            if !KEYWORDS.contains(&word.as_str()) {
                self.pos += word.len();
                if let Some(e) = self.membership_tail(&word)? {
                    return Ok(e);
                }
                self.pos = save;
            }
        }
        let cmp_err = match self.comparison() {
            Ok(e) => return Ok(e),
            Err(e) => e,
        };
        if matches!(cmp_err.kind, Kind::Type | Kind::Alphabet(_)) {
            return Err(cmp_err);
        }
        self.pos = save;
        if self.eat('(') {
            let e = self.or_expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        self.pos = save;
        if let Some(word) = self.peek_word() {
            if !KEYWORDS.contains(&word.as_str()) {
                self.pos += word.len();
                return Ok(Expr::BoolVar(word));
            }
        }
        Err(cmp_err)
    }

    /// After a variable name: `in R`, `not in R`, `∉ R`, `= "s"`, `!= "s"`.
    fn membership_tail(&mut self, var: &str) -> PResult<Option<Expr>> {
        let after_var = self.pos;
        if self.keyword("in") || self.eat('∈') {
            let r = self.regex_alt()?;
            return Ok(Some(self.member(var, r)));
        }
        self.pos = after_var;
        if self.keyword("not") {
            if self.keyword("in") {
                let r = self.regex_alt()?;
                return Ok(Some(Expr::not(self.member(var, r))));
            }
            self.pos = after_var;
        }
        if self.eat('∉') {
            let r = self.regex_alt()?;
            return Ok(Some(Expr::not(self.member(var, r))));
        }
        self.pos = after_var;
        let negated = if self.eat_str("!=") || self.eat('≠') {
            true
        } else if self.eat('=') {
            false
        } else {
            return Ok(None);
        };
        self.ws();
        let is_lit = self.peek() == Some('"') || (self.peek() == Some('i') && self.peek_at(1) == Some('"'));
        if !is_lit {
            self.pos = after_var;
            return Ok(None);
        }
        let r = self.regex_primary()?;
        let m = self.member(var, r);
        Ok(Some(if negated { Expr::not(m) } else { m }))
    }

    fn member(&self, var: &str, r: RegexExpr) -> Expr {
        Expr::Member(Membership::new(var, r))
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let a = self.arith()?;
        let op = self.cmp_op()?;
        let b = self.arith()?;
        Ok(Expr::Cmp(op, a, b))
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        for (s, op) in [(">=", CmpOp::Ge), ("<=", CmpOp::Le), ("!=", CmpOp::Ne)] {
            if self.eat_str(s) {
                return Ok(op);
            }
        }
        for (c, op) in
            [('≥', CmpOp::Ge), ('≤', CmpOp::Le), ('≠', CmpOp::Ne), ('>', CmpOp::Gt), ('<', CmpOp::Lt), ('=', CmpOp::Eq)]
        {
            if self.eat(c) {
                return Ok(op);
            }
        }
        Err(self.err("expected comparison operator"))
    }

    // ---- arithmetic layer ----

    fn arith(&mut self) -> PResult<Arith> {
        let mut lhs = self.term()?;
        loop {
            self.ws();
            let op = match self.peek() {
                Some('+') => ArithOp::Add,
                Some('-') => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Arith::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Arith> {
        let mut lhs = self.factor()?;
        loop {
            self.ws();
            let op = match self.peek() {
                Some('*') | Some('·') => ArithOp::Mul,
                Some('/') => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Arith::bin(op, lhs, rhs);
        }
    }

    fn number(&mut self, negative: bool) -> PResult<i64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let text = if negative { format!("-{digits}") } else { digits };
        text.parse::<i64>().map_err(|_| {
            self.pos = start;
            self.err("integer literal out of range")
        })
    }

    fn factor(&mut self) -> PResult<Arith> {
        self.ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Arith::Num(self.number(false)?)),
            Some('-') => {
                self.pos += 1;
                if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    Ok(Arith::Num(self.number(true)?))
                } else {
                    let inner = self.factor()?;
                    Ok(Arith::bin(ArithOp::Sub, Arith::Num(0), inner))
                }
            }
            Some('(') => {
                self.pos += 1;
                let a = self.arith()?;
                self.expect(')')?;
                Ok(a)
            }
            _ => {
                if self.keyword("len") {
                    self.expect('(')?;
                    let v = self.ident()?;
                    self.expect(')')?;
                    return Ok(Arith::Len(v));
                }
                match self.peek_word() {
                    Some(w) if !KEYWORDS.contains(&w.as_str()) => {
                        self.pos += w.len();
                        Ok(Arith::Var(w))
                    }
                    _ => Err(self.err("expected arithmetic expression")),
                }
            }
        }
    }

    // ---- regular expressions ----

    fn regex_alt(&mut self) -> PResult<RegexExpr> {
        let mut items = vec![self.regex_seq()?];
        while self.eat('+') || self.eat('|') {
            items.push(self.regex_seq()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { RegexExpr::Alt(items) })
    }

    fn regex_seq(&mut self) -> PResult<RegexExpr> {
        let mut items = vec![self.regex_postfix()?];
        while self.eat('.') {
            items.push(self.regex_postfix()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { RegexExpr::Seq(items) })
    }

    fn regex_postfix(&mut self) -> PResult<RegexExpr> {
        let mut r = self.regex_primary()?;
        loop {
            if self.eat('*') {
                r = RegexExpr::Star(Box::new(r));
            } else if self.eat('^') {
                self.ws();
                if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    return Err(self.err("expected repetition count after `^`"));
                }
                let n = self.number(false)?;
                let n = u32::try_from(n).map_err(|_| self.err("repetition count too large"))?;
                r = RegexExpr::Repeat(Box::new(r), n);
            } else {
                return Ok(r);
            }
        }
    }

    fn regex_primary(&mut self) -> PResult<RegexExpr> {
        self.ws();
        match self.peek() {
            Some('"') => Ok(RegexExpr::Literal(self.string_literal()?)),
            Some('i') if self.peek_at(1) == Some('"') => {
                self.pos += 1;
                Ok(RegexExpr::CaseInsensitive(self.string_literal()?))
            }
            Some('[') => self.char_class(),
            Some('Σ') => {
                self.pos += 1;
                Ok(RegexExpr::Any)
            }
            Some('(') => {
                self.pos += 1;
                let r = self.regex_alt()?;
                self.expect(')')?;
                Ok(r)
            }
            _ => {
                if self.keyword("any") {
                    return Ok(RegexExpr::Any);
                }
                match self.peek_word() {
                    Some(w) if !KEYWORDS.contains(&w.as_str()) => {
                        self.pos += w.len();
                        match self.lets.get(&w) {
                            Some(r) => Ok(r.clone()),
                            None => Err(self
                                .type_err(format!("`{w}` inside a regular expression must name a `let` definition"))),
                        }
                    }
                    _ => Err(self.err("expected regular expression")),
                }
            }
        }
    }

    fn escaped_char(&mut self) -> PResult<char> {
        match self.peek() {
            Some('n') => {
                self.pos += 1;
                Ok('\n')
            }
            Some('t') => {
                self.pos += 1;
                Ok('\t')
            }
            Some(c) => {
                self.pos += 1;
                Ok(c)
            }
            None => Err(self.err("unterminated escape")),
        }
    }

    fn check_printable(&self, c: char, pos: usize) -> PResult<()> {
        if is_printable(c) {
            Ok(())
        } else {
            Err(PErr { pos, kind: Kind::Alphabet(c), msg: String::new() })
        }
    }

    fn string_literal(&mut self) -> PResult<String> {
        // Cursor is on the opening quote.
        self.pos += 1;
        let mut out = String::new();
        loop {
            let at = self.pos;
            match self.peek() {
                None => return Err(self.err("unterminated string literal")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = self.escaped_char()?;
                    self.check_printable(c, at)?;
                    out.push(c);
                }
                Some(c) => {
                    self.check_printable(c, at)?;
                    self.pos += 1;
                    out.push(c);
                }
            }
        }
    }

    fn class_char(&mut self) -> PResult<char> {
        let at = self.pos;
        let c = match self.peek() {
            None => return Err(self.err("unterminated character class")),
            Some('\\') => {
                self.pos += 1;
                self.escaped_char()?
            }
            Some(c) => {
                self.pos += 1;
                c
            }
        };
        self.check_printable(c, at)?;
        Ok(c)
    }

    fn char_class(&mut self) -> PResult<RegexExpr> {
        self.pos += 1;
        let mut ranges = Vec::new();
        loop {
            match self.peek() {
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                None => return Err(self.err("unterminated character class")),
                _ => {}
            }
            let lo = self.class_char()?;
            if self.peek() == Some('-') && self.peek_at(1) != Some(']') {
                self.pos += 1;
                let hi = self.class_char()?;
                if lo <= hi {
                    ranges.push((lo, hi));
                } else if lo.is_ascii_lowercase() && hi.is_ascii_uppercase() {
                    // `[a-Z]`: every letter from `lo` to `z`, then `A` to `hi`.
                    ranges.push((lo, 'z'));
                    ranges.push(('A', hi));
                } else {
                    return Err(self.err(&format!("empty character range `{lo}-{hi}`")));
                }
            } else {
                ranges.push((lo, lo));
            }
        }
        if ranges.is_empty() {
            return Err(self.err("empty character class"));
        }
        Ok(RegexExpr::Class(ranges))
    }
}
