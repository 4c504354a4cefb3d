//! Regular expressions over the printable ASCII alphabet.
//!
//! The surface form keeps the sugar nodes (character classes, `Σ`, bounded
//! repetition, case-insensitive literals) so that contracts print back the
//! way they were written. [`RegexExpr::desugar`] rewrites everything into
//! literal / sequence / choice / star.

use std::fmt;

/// First printable character (space).
pub const FIRST_PRINTABLE: u8 = b' ';
/// Last printable character (`~`).
pub const LAST_PRINTABLE: u8 = b'~';
/// Number of symbols in the alphabet.
pub const ALPHABET_SIZE: usize = (LAST_PRINTABLE - FIRST_PRINTABLE + 1) as usize;

/// Symbol index of a character, `None` if it is outside the alphabet.
#[inline]
pub fn symbol(c: char) -> Option<usize> {
    let b = u32::from(c);
    if (u32::from(FIRST_PRINTABLE)..=u32::from(LAST_PRINTABLE)).contains(&b) {
        Some((b - u32::from(FIRST_PRINTABLE)) as usize)
    } else {
        None
    }
}

#[inline]
pub fn symbol_char(sym: usize) -> char {
    debug_assert!(sym < ALPHABET_SIZE);
    char::from(FIRST_PRINTABLE + sym as u8)
}

pub fn is_printable(c: char) -> bool {
    symbol(c).is_some()
}

/// Every character of the alphabet, in code-point order.
pub fn alphabet() -> impl Iterator<Item = char> {
    (0..ALPHABET_SIZE).map(symbol_char)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexExpr {
    /// Exact string; `""` matches only the empty string.
    Literal(String),
    /// Literal matched without regard to ASCII letter case.
    CaseInsensitive(String),
    /// Union of inclusive character ranges, e.g. `[0-9]`.
    Class(Vec<(char, char)>),
    /// Any single character of the alphabet (`Σ`).
    Any,
    Seq(Vec<RegexExpr>),
    Alt(Vec<RegexExpr>),
    Star(Box<RegexExpr>),
    /// `r^n`: `r` concatenated `n` times.
    Repeat(Box<RegexExpr>, u32),
}

impl RegexExpr {
    pub fn lit(s: &str) -> Self {
        RegexExpr::Literal(s.to_string())
    }

    pub fn star(r: RegexExpr) -> Self {
        RegexExpr::Star(Box::new(r))
    }

    /// Characters of a class, sorted and deduplicated.
    pub fn class_chars(ranges: &[(char, char)]) -> Vec<char> {
        let mut out: Vec<char> = ranges.iter().flat_map(|&(lo, hi)| lo..=hi).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Rewrites sugar nodes into literal / sequence / choice / star only.
    pub fn desugar(&self) -> RegexExpr {
        match self {
            RegexExpr::Literal(s) => RegexExpr::Literal(s.clone()),
            RegexExpr::CaseInsensitive(s) => {
                let parts: Vec<RegexExpr> = s
                    .chars()
                    .map(|c| {
                        if c.is_ascii_alphabetic() {
                            RegexExpr::Alt(vec![
                                RegexExpr::Literal(c.to_ascii_lowercase().to_string()),
                                RegexExpr::Literal(c.to_ascii_uppercase().to_string()),
                            ])
                        } else {
                            RegexExpr::Literal(c.to_string())
                        }
                    })
                    .collect();
                match parts.len() {
                    0 => RegexExpr::Literal(String::new()),
                    1 => parts.into_iter().next().unwrap(),
                    _ => RegexExpr::Seq(parts),
                }
            }
            RegexExpr::Class(ranges) => char_choice(RegexExpr::class_chars(ranges).into_iter()),
            RegexExpr::Any => char_choice(alphabet()),
            RegexExpr::Seq(items) => RegexExpr::Seq(items.iter().map(RegexExpr::desugar).collect()),
            RegexExpr::Alt(items) => RegexExpr::Alt(items.iter().map(RegexExpr::desugar).collect()),
            RegexExpr::Star(inner) => RegexExpr::Star(Box::new(inner.desugar())),
            RegexExpr::Repeat(inner, n) => {
                let d = inner.desugar();
                match *n {
                    0 => RegexExpr::Literal(String::new()),
                    1 => d,
                    n => RegexExpr::Seq(vec![d; n as usize]),
                }
            }
        }
    }

    /// True when the node tree only uses literal / sequence / choice / star.
    pub fn is_core(&self) -> bool {
        match self {
            RegexExpr::Literal(_) => true,
            RegexExpr::Seq(items) | RegexExpr::Alt(items) => items.iter().all(RegexExpr::is_core),
            RegexExpr::Star(inner) => inner.is_core(),
            _ => false,
        }
    }

    /// Characters appearing explicitly in literals and classes.
    pub fn mentioned_chars(&self, out: &mut Vec<char>) {
        match self {
            RegexExpr::Literal(s) => out.extend(s.chars()),
            RegexExpr::CaseInsensitive(s) => {
                for c in s.chars() {
                    out.push(c.to_ascii_lowercase());
                    out.push(c.to_ascii_uppercase());
                }
            }
            RegexExpr::Class(ranges) => out.extend(RegexExpr::class_chars(ranges)),
            RegexExpr::Any => {}
            RegexExpr::Seq(items) | RegexExpr::Alt(items) => {
                for i in items {
                    i.mentioned_chars(out);
                }
            }
            RegexExpr::Star(inner) | RegexExpr::Repeat(inner, _) => inner.mentioned_chars(out),
        }
    }

    /// First character outside the printable alphabet, if any.
    pub fn find_unprintable(&self) -> Option<char> {
        let mut chars = Vec::new();
        self.mentioned_chars(&mut chars);
        chars.into_iter().find(|c| !is_printable(*c))
    }
}

fn char_choice(chars: impl Iterator<Item = char>) -> RegexExpr {
    let mut lits: Vec<RegexExpr> = chars.map(|c| RegexExpr::Literal(c.to_string())).collect();
    if lits.len() == 1 {
        lits.pop().unwrap()
    } else {
        RegexExpr::Alt(lits)
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

fn write_class_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    if matches!(c, ']' | '\\' | '-' | '^' | '[') {
        write!(f, "\\{c}")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for RegexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegexExpr::Literal(s) => write_quoted(f, s),
            RegexExpr::CaseInsensitive(s) => {
                f.write_str("i")?;
                write_quoted(f, s)
            }
            RegexExpr::Class(ranges) => {
                f.write_str("[")?;
                for &(lo, hi) in ranges {
                    write_class_char(f, lo)?;
                    if hi != lo {
                        f.write_str("-")?;
                        write_class_char(f, hi)?;
                    }
                }
                f.write_str("]")
            }
            RegexExpr::Any => f.write_str("Σ"),
            RegexExpr::Seq(items) => write_joined(f, items, " . "),
            RegexExpr::Alt(items) => write_joined(f, items, " | "),
            RegexExpr::Star(inner) => write!(f, "{}*", Postfix(inner)),
            RegexExpr::Repeat(inner, n) => write!(f, "{}^{n}", Postfix(inner)),
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[RegexExpr], sep: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    f.write_str(")")
}

/// Operand of a postfix operator: stars of stars need explicit parentheses.
struct Postfix<'a>(&'a RegexExpr);

impl fmt::Display for Postfix<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            RegexExpr::Star(_) | RegexExpr::Repeat(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_has_95_symbols() {
        assert_eq!(ALPHABET_SIZE, 95);
        assert_eq!(symbol(' '), Some(0));
        assert_eq!(symbol('~'), Some(94));
        assert_eq!(symbol('\n'), None);
        assert_eq!(symbol('é'), None);
        assert_eq!(symbol_char(symbol('q').unwrap()), 'q');
    }

    #[test]
    fn desugar_yields_core_nodes() {
        let r = RegexExpr::Seq(vec![
            RegexExpr::star(RegexExpr::Any),
            RegexExpr::Class(vec![('0', '9')]),
            RegexExpr::CaseInsensitive("ab1".into()),
            RegexExpr::Repeat(Box::new(RegexExpr::lit("x")), 3),
        ]);
        assert!(!r.is_core());
        assert!(r.desugar().is_core());
    }

    #[test]
    fn repeat_zero_is_empty_literal() {
        let r = RegexExpr::Repeat(Box::new(RegexExpr::lit("x")), 0);
        assert_eq!(r.desugar(), RegexExpr::lit(""));
    }
}
