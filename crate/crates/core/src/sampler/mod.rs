//! Satisfying-assignment generation for contracts, with model invalidation,
//! and SMT-LIB export.

mod plan;
mod smt;

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::contract::regex::{alphabet, is_printable};
use crate::contract::Contract;
use crate::value::{ParamVector, Type, Value};

pub use smt::{export_smtlib, read_smtlib, SExpr, SmtError};

pub const DEFAULT_BUDGET: u32 = 10_000;
/// Distinct models requested before the population is completed by copies.
pub const MAX_DISTINCT_SEEDS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("contract `{0}` has no model within the sampling domain")]
    UnsatContract(String),
}

/// Bounds on the values the sampler and the search operators may produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub max_str_len: usize,
    /// Characters strings are drawn from; `None` means every printable one.
    pub alphabet: Option<Vec<char>>,
    pub int_min: i64,
    pub int_max: i64,
    /// Integers are drawn from this window around zero when it meets the
    /// feasible interval, most of the time.
    pub int_window: i64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { max_str_len: 30, alphabet: None, int_min: -1_000_000, int_max: 1_000_000, int_window: 32 }
    }
}

impl Domain {
    pub fn chars(&self) -> Vec<char> {
        match &self.alphabet {
            Some(a) => a.clone(),
            None => alphabet().collect(),
        }
    }

    pub fn random_char<R: Rng>(&self, rng: &mut R) -> char {
        match &self.alphabet {
            Some(a) => *a.choose(rng).expect("nonempty alphabet"),
            None => crate::contract::regex::symbol_char(rng.random_range(0..crate::contract::regex::ALPHABET_SIZE)),
        }
    }

    /// Geometric length (mean about 8) capped at the maximum.
    pub fn random_string<R: Rng>(&self, rng: &mut R) -> String {
        let mut len = 0;
        while len < self.max_str_len && rng.random::<f64>() >= 1.0 / 9.0 {
            len += 1;
        }
        (0..len).map(|_| self.random_char(rng)).collect()
    }

    pub fn sample_int_in<R: Rng>(&self, lo: i64, hi: i64, rng: &mut R) -> i64 {
        let (wlo, whi) = (lo.max(-self.int_window), hi.min(self.int_window));
        if wlo <= whi && (rng.random::<f64>() < 0.9 || (lo, hi) == (wlo, whi)) {
            rng.random_range(wlo..=whi)
        } else {
            rng.random_range(lo..=hi)
        }
    }

    pub fn random_value<R: Rng>(&self, ty: Type, rng: &mut R) -> Value {
        match ty {
            Type::Bool => Value::Bool(rng.random()),
            Type::Int => Value::Int(self.sample_int_in(self.int_min, self.int_max, rng)),
            Type::Str => Value::Str(self.random_string(rng)),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match v {
            Value::Bool(_) => true,
            Value::Int(n) => (self.int_min..=self.int_max).contains(n),
            Value::Str(s) => {
                s.chars().count() <= self.max_str_len
                    && match &self.alphabet {
                        Some(a) => s.chars().all(|c| a.contains(&c)),
                        None => s.chars().all(is_printable),
                    }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sample {
    Model(ParamVector),
    /// The attempt budget ran out.
    Exhausted,
    /// No model exists within the domain.
    Unsat,
}

/// Stream of pairwise distinct models of one contract.
pub struct ModelStream {
    contract: Contract,
    domain: Domain,
    plans: Vec<plan::Plan>,
    excluded: Vec<ParamVector>,
    seen: HashSet<ParamVector>,
    rng: ChaCha8Rng,
    pub budget: u32,
}

impl ModelStream {
    pub fn new(contract: Contract, domain: Domain, seed: u64) -> ModelStream {
        let plans = plan::plans(&contract, &domain);
        ModelStream {
            contract,
            domain,
            plans,
            excluded: Vec::new(),
            seen: HashSet::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn contract(&self) -> &Contract {
        &self.contract
    }

    /// Models emitted so far, in order.
    pub fn excluded(&self) -> &[ParamVector] {
        &self.excluded
    }

    pub fn next_model(&mut self) -> Sample {
        if self.plans.is_empty() {
            return Sample::Unsat;
        }
        let vars = self.contract.free_vars();
        for _ in 0..self.budget {
            let p = &self.plans[self.rng.random_range(0..self.plans.len())];
            let Some(values) = p.sample(vars, &self.domain, &mut self.rng) else { continue };
            let v = ParamVector(values);
            if self.contract.holds_for(&v) && !self.seen.contains(&v) {
                self.seen.insert(v.clone());
                self.excluded.push(v.clone());
                return Sample::Model(v);
            }
        }
        Sample::Exhausted
    }
}

/// `n` vectors for a contract population: up to [`MAX_DISTINCT_SEEDS`]
/// distinct models, then cyclic copies of them.
pub fn seed_population(c: &Contract, n: usize, seed: u64, domain: &Domain) -> Result<Vec<ParamVector>, SamplerError> {
    let mut stream = ModelStream::new(c.clone(), domain.clone(), seed);
    let mut distinct = Vec::new();
    while distinct.len() < n.min(MAX_DISTINCT_SEEDS) {
        match stream.next_model() {
            Sample::Model(v) => distinct.push(v),
            Sample::Exhausted | Sample::Unsat => break,
        }
    }
    if distinct.is_empty() {
        return Err(SamplerError::UnsatContract(c.to_string()));
    }
    Ok((0..n).map(|i| distinct[i % distinct.len()].clone()).collect())
}

#[cfg(test)]
mod tests;
