//! Disjunctive sampling plans: one plan per conjunct of the contract's
//! disjunctive normal form, with per-variable automata and bounds.

use rand::Rng;

use super::Domain;
use crate::contract::dfa::SymSet;
use crate::contract::regex::{symbol, symbol_char, ALPHABET_SIZE};
use crate::contract::{evaluate_arith, Arith, CmpOp, Contract, Dfa, Expr, Membership};
use crate::value::{Env, Type, Value};

/// DNF expansion stops here; larger contracts fall back to one
/// unconstrained plan plus rejection.
const MAX_TERMS: usize = 256;

#[derive(Debug, Clone)]
enum Lit {
    Bool(String, bool),
    Cmp(CmpOp, Arith, Arith),
    Member(Membership, bool),
}

fn negate(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Lt,
        CmpOp::Gt => CmpOp::Le,
        CmpOp::Le => CmpOp::Gt,
        CmpOp::Eq => CmpOp::Ne,
        CmpOp::Ne => CmpOp::Eq,
    }
}

/// `a op b` is equivalent to `b (mirror op) a`.
fn mirror(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}

/// Disjunctive normal form of `e` (or of its negation when `!positive`);
/// `None` when it exceeds [`MAX_TERMS`].
fn dnf(e: &Expr, positive: bool) -> Option<Vec<Vec<Lit>>> {
    Some(match e {
        Expr::Const(b) => {
            if *b == positive {
                vec![vec![]]
            } else {
                vec![]
            }
        }
        Expr::BoolVar(v) => vec![vec![Lit::Bool(v.clone(), positive)]],
        Expr::Cmp(op, a, b) => {
            let op = if positive { *op } else { negate(*op) };
            vec![vec![Lit::Cmp(op, a.clone(), b.clone())]]
        }
        Expr::Member(m) => vec![vec![Lit::Member(m.clone(), positive)]],
        Expr::Not(x) => dnf(x, !positive)?,
        Expr::And(a, b) | Expr::Or(a, b) => {
            let conj = matches!(e, Expr::And(..)) == positive;
            let l = dnf(a, positive)?;
            let r = dnf(b, positive)?;
            if conj {
                if l.len() * r.len() > MAX_TERMS {
                    return None;
                }
                let mut out = Vec::with_capacity(l.len() * r.len());
                for x in &l {
                    for y in &r {
                        out.push(x.iter().chain(y).cloned().collect());
                    }
                }
                out
            } else {
                if l.len() + r.len() > MAX_TERMS {
                    return None;
                }
                l.into_iter().chain(r).collect()
            }
        }
    })
}

/// Uniform sampler for strings of a given length accepted by an automaton.
#[derive(Debug, Clone)]
pub(crate) struct StringSampler {
    dfa: Dfa,
    /// `counts[k][q]`: accepted strings of length `k` read from state `q`.
    counts: Vec<Vec<f64>>,
    /// Feasible lengths with their geometric weights.
    lengths: Vec<(usize, f64)>,
}

impl StringSampler {
    pub(crate) fn new(dfa: Dfa, min_len: usize, max_len: usize) -> StringSampler {
        let q = dfa.num_states();
        let mut counts = vec![vec![0.0; q]; max_len + 1];
        for s in 0..q {
            counts[0][s] = if dfa.is_accepting(s as u32) { 1.0 } else { 0.0 };
        }
        for k in 1..=max_len {
            for s in 0..q {
                let mut total = 0.0;
                for sym in 0..ALPHABET_SIZE {
                    total += counts[k - 1][dfa.step(s as u32, sym) as usize];
                }
                counts[k][s] = total;
            }
        }
        let start = dfa.start() as usize;
        let lengths = (min_len..=max_len)
            .filter(|&k| counts[k][start] > 0.0)
            .map(|k| (k, (8.0f64 / 9.0).powi(k as i32)))
            .collect();
        StringSampler { dfa, counts, lengths }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> Option<String> {
        let total: f64 = self.lengths.iter().map(|(_, w)| w).sum();
        let mut pick = rng.random::<f64>() * total;
        let mut len = self.lengths.last()?.0;
        for &(k, w) in &self.lengths {
            if pick < w {
                len = k;
                break;
            }
            pick -= w;
        }
        let mut state = self.dfa.start();
        let mut out = String::with_capacity(len);
        for remaining in (1..=len).rev() {
            let here = self.counts[remaining][state as usize];
            let mut pick = rng.random::<f64>() * here;
            let mut chosen = None;
            for sym in 0..ALPHABET_SIZE {
                let next = self.dfa.step(state, sym);
                let c = self.counts[remaining - 1][next as usize];
                if c <= 0.0 {
                    continue;
                }
                chosen = Some((sym, next));
                if pick < c {
                    break;
                }
                pick -= c;
            }
            let (sym, next) = chosen?;
            out.push(symbol_char(sym));
            state = next;
        }
        Some(out)
    }
}

pub(crate) fn alphabet_mask(domain: &Domain) -> SymSet {
    match &domain.alphabet {
        None => crate::contract::dfa::ALL_SYMBOLS,
        Some(chars) => chars.iter().filter_map(|c| symbol(*c)).fold(0, |m, s| m | (1u128 << s)),
    }
}

#[derive(Debug, Clone)]
enum VarPlan {
    Str(StringSampler),
    Int { lo: i64, hi: i64 },
    Bool(Option<bool>),
}

/// One DNF conjunct ready for sampling.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    vars: Vec<VarPlan>,
    /// Comparisons refined at sampling time once strings are fixed.
    cmps: Vec<(CmpOp, Arith, Arith)>,
}

fn constant(a: &Arith) -> Option<i64> {
    evaluate_arith(a, &Env::new()).ok()
}

fn tighten(lo: &mut i64, hi: &mut i64, op: CmpOp, k: i64) {
    match op {
        CmpOp::Lt => *hi = (*hi).min(k.saturating_sub(1)),
        CmpOp::Le => *hi = (*hi).min(k),
        CmpOp::Gt => *lo = (*lo).max(k.saturating_add(1)),
        CmpOp::Ge => *lo = (*lo).max(k),
        CmpOp::Eq => {
            *lo = (*lo).max(k);
            *hi = (*hi).min(k);
        }
        CmpOp::Ne => {}
    }
}

/// `(op, other side)` for atoms that isolate `target` on one side.
fn isolated<'a>(lits: &'a [(CmpOp, Arith, Arith)], target: &'a Arith) -> impl Iterator<Item = (CmpOp, &'a Arith)> + 'a {
    lits.iter().filter_map(move |(op, a, b)| {
        if a == target {
            Some((*op, b))
        } else if b == target {
            Some((mirror(*op), a))
        } else {
            None
        }
    })
}

impl Plan {
    /// Builds the plan for one conjunct; `None` when it is structurally
    /// infeasible within the domain.
    fn build(lits: &[Lit], vars: &[(String, Type)], domain: &Domain) -> Option<Plan> {
        let cmps: Vec<(CmpOp, Arith, Arith)> = lits
            .iter()
            .filter_map(|l| match l {
                Lit::Cmp(op, a, b) => Some((*op, a.clone(), b.clone())),
                _ => None,
            })
            .collect();
        for (op, a, b) in &cmps {
            if let (Some(x), Some(y)) = (constant(a), constant(b)) {
                if !op.holds(x, y) {
                    return None;
                }
            }
        }
        let mask = alphabet_mask(domain);
        let mut plans = Vec::with_capacity(vars.len());
        for (name, ty) in vars {
            plans.push(match ty {
                Type::Str => {
                    let mut dfa = Dfa::universal_over(mask);
                    for l in lits {
                        if let Lit::Member(m, pos) = l {
                            if m.var == *name {
                                let d = if *pos { (*m.dfa).clone() } else { m.dfa.complement() };
                                dfa = dfa.intersect(&d);
                            }
                        }
                    }
                    let (mut lo, mut hi) = (0i64, domain.max_str_len as i64);
                    for (op, other) in isolated(&cmps, &Arith::Len(name.clone())) {
                        if let Some(k) = constant(other) {
                            tighten(&mut lo, &mut hi, op, k);
                        }
                    }
                    if lo > hi {
                        return None;
                    }
                    let s = StringSampler::new(dfa, lo as usize, hi as usize);
                    if s.is_empty() {
                        return None;
                    }
                    VarPlan::Str(s)
                }
                Type::Int => {
                    let (mut lo, mut hi) = (domain.int_min, domain.int_max);
                    for (op, other) in isolated(&cmps, &Arith::Var(name.clone())) {
                        if let Some(k) = constant(other) {
                            tighten(&mut lo, &mut hi, op, k);
                        }
                    }
                    if lo > hi {
                        return None;
                    }
                    VarPlan::Int { lo, hi }
                }
                Type::Bool => {
                    let mut want = None;
                    for l in lits {
                        if let Lit::Bool(v, pos) = l {
                            if v == name {
                                if want.is_some_and(|w| w != *pos) {
                                    return None;
                                }
                                want = Some(*pos);
                            }
                        }
                    }
                    VarPlan::Bool(want)
                }
            });
        }
        Some(Plan { vars: plans, cmps })
    }

    /// Draws one candidate; it still has to be checked against the contract.
    pub(crate) fn sample<R: Rng>(&self, vars: &[(String, Type)], domain: &Domain, rng: &mut R) -> Option<Vec<Value>> {
        let mut env = Env::new();
        let mut out: Vec<Option<Value>> = vec![None; vars.len()];
        for (i, ((name, _), plan)) in vars.iter().zip(&self.vars).enumerate() {
            let v = match plan {
                VarPlan::Str(s) => Value::Str(s.sample(rng)?),
                VarPlan::Bool(Some(b)) => Value::Bool(*b),
                VarPlan::Bool(None) => Value::Bool(rng.random()),
                VarPlan::Int { .. } => continue,
            };
            env.bind(name.clone(), v.clone());
            out[i] = Some(v);
        }
        // Integers in order, each bounded by atoms whose other side is
        // already computable.
        for (i, ((name, _), plan)) in vars.iter().zip(&self.vars).enumerate() {
            let VarPlan::Int { lo, hi } = plan else { continue };
            let (mut lo, mut hi) = (*lo, *hi);
            let mut forbidden = Vec::new();
            for (op, other) in isolated(&self.cmps, &Arith::Var(name.clone())) {
                if let Ok(k) = evaluate_arith(other, &env) {
                    if op == CmpOp::Ne {
                        forbidden.push(k);
                    }
                    tighten(&mut lo, &mut hi, op, k);
                }
            }
            if lo > hi {
                return None;
            }
            let mut n = domain.sample_int_in(lo, hi, rng);
            if forbidden.contains(&n) {
                n = domain.sample_int_in(lo, hi, rng);
            }
            env.bind(name.clone(), Value::Int(n));
            out[i] = Some(Value::Int(n));
        }
        out.into_iter().collect()
    }
}

/// Sampling plans for every satisfiable conjunct; empty when the contract is
/// structurally unsatisfiable within the domain.
pub(crate) fn plans(c: &Contract, domain: &Domain) -> Vec<Plan> {
    let vars = c.free_vars();
    match dnf(c.surface(), true) {
        Some(terms) => terms.iter().filter_map(|t| Plan::build(t, vars, domain)).collect(),
        None => Plan::build(&[], vars, domain).into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::parse_regex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn string_sampler_respects_language_and_lengths() {
        let d = Dfa::compile(&parse_regex("Σ*.[0-9].Σ*").unwrap());
        let s = StringSampler::new(d.clone(), 6, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let w = s.sample(&mut rng).unwrap();
            assert!(d.accepts(&w) && (6..=30).contains(&w.chars().count()), "{w:?}");
        }
    }

    #[test]
    fn string_sampler_is_uniform_within_a_length() {
        let d = Dfa::compile(&parse_regex("[ab].[ab]").unwrap());
        let s = StringSampler::new(d, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = std::collections::HashMap::new();
        for _ in 0..4000 {
            *seen.entry(s.sample(&mut rng).unwrap()).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 4);
        assert!(seen.values().all(|&n| (800..1200).contains(&n)), "{seen:?}");
    }

    #[test]
    fn negated_conjunction_splits_into_disjuncts() {
        let c = Contract::parse("not (x > 1 and y > 1)").unwrap();
        assert_eq!(plans(&c, &Domain::default()).len(), 2);
        let c = Contract::parse("x > 1 and x < 1").unwrap();
        assert!(plans(&c, &Domain::default()).is_empty());
    }
}
