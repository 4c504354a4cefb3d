//! Per-type distances, their Manhattan aggregation, and exact (bounded)
//! contract distances used as test oracles for the evolutionary estimate.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::contract::regex::{alphabet, symbol, symbol_char, ALPHABET_SIZE};
use crate::contract::{Contract, Dfa};
use crate::value::{ParamVector, Type, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("vectors have different arity ({left} vs {right})")]
    ArityMismatch { left: usize, right: usize },
    #[error("component {index} has mismatched types ({left} vs {right})")]
    TypeMismatch { index: usize, left: Type, right: Type },
    #[error("enumeration exceeded the budget of {budget} candidates")]
    BoundsTooLarge { budget: u64 },
    #[error("the automaton accepts no string")]
    EmptyLanguage,
}

pub fn dist_bool(a: bool, b: bool) -> u64 {
    u64::from(a != b)
}

pub fn dist_int(n: i64, m: i64) -> u64 {
    n.abs_diff(m)
}

/// Levenshtein distance with unit costs, over characters.
pub fn dist_str(s: &str, t: &str) -> u64 {
    let a: Vec<char> = s.chars().collect();
    let b: Vec<char> = t.chars().collect();
    levenshtein(&a, &b) as u64
}

pub(crate) fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn dist_value(index: usize, a: &Value, b: &Value) -> Result<u64, DistanceError> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Ok(dist_bool(*x, *y)),
        (Value::Int(x), Value::Int(y)) => Ok(dist_int(*x, *y)),
        (Value::Str(x), Value::Str(y)) => Ok(dist_str(x, y)),
        _ => Err(DistanceError::TypeMismatch { index, left: a.ty(), right: b.ty() }),
    }
}

/// Sum of per-component distances.
pub fn manhattan(v: &ParamVector, w: &ParamVector) -> Result<u64, DistanceError> {
    if v.len() != w.len() {
        return Err(DistanceError::ArityMismatch { left: v.len(), right: w.len() });
    }
    v.values()
        .iter()
        .zip(w.values())
        .enumerate()
        .try_fold(0u64, |acc, (i, (a, b))| Ok(acc.saturating_add(dist_value(i, a, b)?)))
}

/// Finite search space for [`gamma_exact`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBounds {
    pub max_str_len: usize,
    pub int_min: i64,
    pub int_max: i64,
    /// Characters strings are built from. `None` derives a reduced alphabet
    /// from the contract and the query that preserves exactness: the query's
    /// own characters plus one representative per class of characters the
    /// contract's automata cannot tell apart.
    pub alphabet: Option<Vec<char>>,
    /// Maximum number of candidate vectors evaluated.
    pub budget: u64,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds { max_str_len: 8, int_min: -32, int_max: 32, alphabet: None, budget: 20_000_000 }
    }
}

/// Derived alphabet described on [`OracleBounds::alphabet`].
pub fn reduced_alphabet(c: &Contract, v: &ParamVector) -> Vec<char> {
    let dfas: Vec<&Dfa> = c.core().memberships().into_iter().map(|m| &*m.dfa).collect();
    let query_chars: HashSet<char> = v.values().iter().filter_map(Value::as_str).flat_map(str::chars).collect();
    let mut classes: Vec<(Vec<Vec<u32>>, Vec<char>)> = Vec::new();
    for sym in 0..ALPHABET_SIZE {
        let sig: Vec<Vec<u32>> = dfas.iter().map(|d| d.symbol_signature(sym)).collect();
        match classes.iter_mut().find(|(s, _)| *s == sig) {
            Some((_, members)) => members.push(symbol_char(sym)),
            None => classes.push((sig, vec![symbol_char(sym)])),
        }
    }
    let mut out: Vec<char> = query_chars.iter().copied().filter(|c| symbol(*c).is_some()).collect();
    for (_, members) in &classes {
        if let Some(rep) = members.iter().find(|c| !query_chars.contains(c)) {
            out.push(*rep);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Values of one component grouped by their distance to the query component.
struct Layers {
    layers: Vec<Vec<Value>>,
    source: LayerSource,
    upper: usize,
}

enum LayerSource {
    Bool(bool),
    Int {
        center: i64,
        lo: i64,
        hi: i64,
    },
    /// Breadth-first search over single edits; exact when the query itself is
    /// in bounds because an optimal edit script never needs to leave them.
    StrBfs {
        seen: HashSet<String>,
        frontier: Vec<String>,
        alpha: Vec<char>,
        max_len: usize,
    },
    /// Fully materialized (query out of bounds).
    Done,
}

impl Layers {
    fn new(query: &Value, bounds: &OracleBounds, alpha: &[char], budget: u64) -> Result<Layers, DistanceError> {
        Ok(match query {
            Value::Bool(b) => Layers { layers: Vec::new(), source: LayerSource::Bool(*b), upper: 1 },
            Value::Int(n) => {
                let upper = n.abs_diff(bounds.int_min).max(n.abs_diff(bounds.int_max)) as usize;
                Layers {
                    layers: Vec::new(),
                    source: LayerSource::Int { center: *n, lo: bounds.int_min, hi: bounds.int_max },
                    upper,
                }
            }
            Value::Str(s) => {
                let n = s.chars().count();
                let upper = n.max(bounds.max_str_len);
                let in_bounds = n <= bounds.max_str_len && s.chars().all(|c| alpha.contains(&c));
                if in_bounds {
                    Layers {
                        layers: Vec::new(),
                        source: LayerSource::StrBfs {
                            seen: [s.clone()].into(),
                            frontier: vec![s.clone()],
                            alpha: alpha.to_vec(),
                            max_len: bounds.max_str_len,
                        },
                        upper,
                    }
                } else {
                    let total: u64 = (0..=bounds.max_str_len as u32)
                        .map(|k| (alpha.len() as u64).saturating_pow(k))
                        .fold(0u64, u64::saturating_add);
                    if total > budget {
                        return Err(DistanceError::BoundsTooLarge { budget });
                    }
                    let q: Vec<char> = s.chars().collect();
                    let mut layers: Vec<Vec<Value>> = vec![Vec::new(); upper + 1];
                    for w in enumerate_strings(alpha, bounds.max_str_len) {
                        let wc: Vec<char> = w.chars().collect();
                        layers[levenshtein(&q, &wc)].push(Value::Str(w));
                    }
                    Layers { layers, source: LayerSource::Done, upper }
                }
            }
        })
    }

    fn layer(&mut self, k: usize) -> &[Value] {
        while self.layers.len() <= k {
            let d = self.layers.len();
            let next = match &mut self.source {
                LayerSource::Bool(b) => match d {
                    0 => vec![Value::Bool(*b)],
                    1 => vec![Value::Bool(!*b)],
                    _ => Vec::new(),
                },
                LayerSource::Int { center, lo, hi } => {
                    let mut out = Vec::new();
                    let d = d as i64;
                    for x in [center.checked_sub(d), center.checked_add(d)].into_iter().flatten() {
                        if (*lo..=*hi).contains(&x) && !out.contains(&Value::Int(x)) {
                            out.push(Value::Int(x));
                        }
                    }
                    out
                }
                LayerSource::StrBfs { seen, frontier, alpha, max_len } => {
                    if d == 0 {
                        frontier.iter().cloned().map(Value::Str).collect()
                    } else {
                        let mut next = Vec::new();
                        for s in frontier.iter() {
                            for cand in single_edits(s, alpha, *max_len) {
                                if seen.insert(cand.clone()) {
                                    next.push(cand);
                                }
                            }
                        }
                        *frontier = next;
                        frontier.iter().cloned().map(Value::Str).collect()
                    }
                }
                LayerSource::Done => Vec::new(),
            };
            self.layers.push(next);
        }
        &self.layers[k]
    }
}

fn single_edits(s: &str, alpha: &[char], max_len: usize) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    for i in 0..chars.len() {
        let mut t = chars.clone();
        t.remove(i);
        out.push(t.iter().collect());
        for &c in alpha {
            if c != chars[i] {
                let mut t = chars.clone();
                t[i] = c;
                out.push(t.iter().collect());
            }
        }
    }
    if chars.len() < max_len {
        for i in 0..=chars.len() {
            for &c in alpha {
                let mut t = chars.clone();
                t.insert(i, c);
                out.push(t.iter().collect());
            }
        }
    }
    out
}

/// Every string over `alpha` with length at most `max_len`.
pub fn enumerate_strings(alpha: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alpha.len());
        for p in &layer {
            for c in alpha {
                let mut s = p.clone();
                s.push(*c);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Exact contract distance over a bounded search space: the smallest
/// Manhattan distance from `v` to any in-bounds vector satisfying `c`, or
/// `None` when no in-bounds vector satisfies it.
///
/// Candidates are visited in order of increasing total distance, so the
/// first satisfying vector found is optimal.
pub fn gamma_exact(c: &Contract, v: &ParamVector, bounds: &OracleBounds) -> Result<Option<u64>, DistanceError> {
    let vars = c.free_vars();
    if vars.len() != v.len() {
        return Err(DistanceError::ArityMismatch { left: vars.len(), right: v.len() });
    }
    for (i, ((_, ty), val)) in vars.iter().zip(v.values()).enumerate() {
        if *ty != val.ty() {
            return Err(DistanceError::TypeMismatch { index: i, left: *ty, right: val.ty() });
        }
    }
    let alpha = match &bounds.alphabet {
        Some(a) => a.clone(),
        None => reduced_alphabet(c, v),
    };
    let mut layers =
        v.values().iter().map(|q| Layers::new(q, bounds, &alpha, bounds.budget)).collect::<Result<Vec<_>, _>>()?;
    let max_total: usize = layers.iter().map(|l| l.upper).sum();
    let mut search = Search { contract: c, visited: 0, budget: bounds.budget, current: Vec::new() };
    for total in 0..=max_total {
        if search.composition(&mut layers, 0, total)? {
            return Ok(Some(total as u64));
        }
    }
    Ok(None)
}

struct Search<'c> {
    contract: &'c Contract,
    visited: u64,
    budget: u64,
    current: Vec<Value>,
}

impl Search<'_> {
    /// Splits `remaining` among components `i..` and tests every vector whose
    /// per-component distances follow the split.
    fn composition(&mut self, layers: &mut [Layers], i: usize, remaining: usize) -> Result<bool, DistanceError> {
        if i == layers.len() {
            if remaining != 0 {
                return Ok(false);
            }
            self.visited += 1;
            if self.visited > self.budget {
                return Err(DistanceError::BoundsTooLarge { budget: self.budget });
            }
            return Ok(self.contract.holds_for(&ParamVector(self.current.clone())));
        }
        let last = i + 1 == layers.len();
        let ks: Vec<usize> = if last {
            if remaining <= layers[i].upper {
                vec![remaining]
            } else {
                vec![]
            }
        } else {
            (0..=remaining.min(layers[i].upper)).collect()
        };
        for k in ks {
            let candidates: Vec<Value> = layers[i].layer(k).to_vec();
            for val in candidates {
                self.current.push(val);
                let found = self.composition(layers, i + 1, remaining - k)?;
                self.current.pop();
                if found {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Smallest edit distance from `s` to any string accepted by `d`.
///
/// Shortest path over (position in `s`, automaton state): consuming a
/// character of `s` (match or substitution), deleting it, or inserting an
/// alphabet character.
pub fn regex_edit_distance(s: &str, d: &Dfa) -> Result<u64, DistanceError> {
    let live = d.live_states();
    if !live[d.start() as usize] {
        return Err(DistanceError::EmptyLanguage);
    }
    let chars: Vec<Option<usize>> = s.chars().map(symbol).collect();
    let n = chars.len();
    let q = d.num_states();
    let idx = |i: usize, st: u32| i * q + st as usize;
    let mut dist = vec![u64::MAX; (n + 1) * q];
    let mut deque = VecDeque::new();
    dist[idx(0, d.start())] = 0;
    deque.push_back((0usize, d.start()));
    while let Some((i, st)) = deque.pop_front() {
        let here = dist[idx(i, st)];
        if i == n && d.is_accepting(st) {
            return Ok(here);
        }
        let mut relax = |j: usize, t: u32, cost: u64, deque: &mut VecDeque<(usize, u32)>| {
            if !live[t as usize] {
                return;
            }
            let nd = here + cost;
            if nd < dist[idx(j, t)] {
                dist[idx(j, t)] = nd;
                if cost == 0 {
                    deque.push_front((j, t));
                } else {
                    deque.push_back((j, t));
                }
            }
        };
        if i < n {
            relax(i + 1, st, 1, &mut deque);
        }
        for sym in 0..ALPHABET_SIZE {
            let t = d.step(st, sym);
            if i < n {
                let cost = u64::from(chars[i] != Some(sym));
                relax(i + 1, t, cost, &mut deque);
            }
            relax(i, t, 1, &mut deque);
        }
    }
    // Unreachable: a live start state always reaches acceptance.
    Err(DistanceError::EmptyLanguage)
}

/// All printable characters, for callers that want an explicit full alphabet.
pub fn full_alphabet() -> Vec<char> {
    alphabet().collect()
}
