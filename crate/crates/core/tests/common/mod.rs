//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use coevo::value::{ParamVector, Type, Value};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const LETTERS: [char; 4] = ['a', 'b', 'c', 'd'];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn scw_aut() -> PathBuf {
    fixture("scw/aut.toml")
}

pub fn scw_vuln() -> PathBuf {
    fixture("scw/vuln.toml")
}

fn random_regex<R: Rng>(rng: &mut R, depth: u32) -> String {
    let leaf = |rng: &mut R| -> String {
        match rng.random_range(0..4) {
            0 => {
                let n = rng.random_range(1..=2);
                let s: String = (0..n).map(|_| *LETTERS.choose(rng).unwrap()).collect();
                format!("\"{s}\"")
            }
            1 => {
                let a = rng.random_range(0..4);
                let b = rng.random_range(a..4);
                format!("[{}-{}]", LETTERS[a], LETTERS[b])
            }
            2 => "Σ".to_string(),
            _ => format!("\"{}\"", LETTERS.choose(rng).unwrap()),
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.random_range(0..5) {
        0 | 1 => format!("{}.{}", random_regex(rng, depth - 1), random_regex(rng, depth - 1)),
        2 => format!("({} + {})", random_regex(rng, depth - 1), random_regex(rng, depth - 1)),
        3 => format!("({})*", random_regex(rng, depth - 1)),
        _ => leaf(rng),
    }
}

fn atom<R: Rng>(rng: &mut R, strs: &[&str], ints: &[&str]) -> String {
    let pick_str = strs.choose(rng).copied();
    let pick_int = ints.choose(rng).copied();
    let cmp = *["<", "<=", ">", ">=", "=", "!="].choose(rng).unwrap();
    match (rng.random_range(0..5), pick_str, pick_int) {
        (0 | 1, Some(s), _) => format!("{s} in {}", random_regex(rng, 2)),
        (2, Some(s), _) => format!("len({s}) {cmp} {}", rng.random_range(0..=5)),
        (3, Some(s), Some(n)) => format!("len({s}) {cmp} {n}"),
        (3, _, Some(_)) if ints.len() == 2 => format!("{} + {} {cmp} {}", ints[0], ints[1], rng.random_range(0..=12)),
        (_, _, Some(n)) => format!("{n} {cmp} {}", rng.random_range(0..=8)),
        (_, Some(s), None) => format!("{s} in {}", random_regex(rng, 2)),
        (_, None, None) => unreachable!("at least one variable"),
    }
}

/// A random contract over at most two string variables (`s`, `t`) and two
/// integer variables (`n`, `m`), with literals drawn from `LETTERS` and
/// integer constants in `[0, 8]`. Every chosen variable occurs at least once.
pub fn random_contract<R: Rng>(rng: &mut R) -> String {
    let (ns, ni) = loop {
        let p = (rng.random_range(0..=2usize), rng.random_range(0..=2usize));
        if p.0 + p.1 > 0 {
            break p;
        }
    };
    let strs = &["s", "t"][..ns];
    let ints = &["n", "m"][..ni];
    let mut parts: Vec<String> = Vec::new();
    for v in strs {
        parts.push(format!("{v} in {}", random_regex(rng, 2)));
    }
    for v in ints {
        parts.push(format!("{v} {} {}", ["<=", ">="].choose(rng).unwrap(), rng.random_range(0..=8)));
    }
    for _ in 0..rng.random_range(0..=2) {
        let a = atom(rng, strs, ints);
        let extra = match rng.random_range(0..4) {
            0 => format!("not ({a})"),
            1 => format!("({a} or {})", atom(rng, strs, ints)),
            _ => a,
        };
        parts.push(extra);
    }
    parts.join(" and ")
}

/// A uniformly random vector within the enumeration bounds used by the
/// oracle tests.
pub fn random_vector<R: Rng>(rng: &mut R, types: &[Type], max_len: usize, int_max: i64) -> ParamVector {
    ParamVector(
        types
            .iter()
            .map(|t| match t {
                Type::Str => {
                    let n = rng.random_range(0..=max_len);
                    Value::Str((0..n).map(|_| *LETTERS.choose(rng).unwrap()).collect())
                }
                Type::Int => Value::Int(rng.random_range(0..=int_max)),
                Type::Bool => Value::Bool(rng.random()),
            })
            .collect(),
    )
}
