//! Contract species: populations of parameter vectors that approximate the
//! distance from an observed vector to the set of vectors satisfying a
//! call contract.

use std::collections::HashMap;

use rand::Rng;

use super::ops::{crossover_strings, mutate_string, step_toward, tournament_select};
use crate::contract::Contract;
use crate::distance::{manhattan, DistanceError};
use crate::sampler::{seed_population, Domain, SamplerError};
use crate::value::{ParamVector, Value};

/// Search parameters of one contract species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesConfig {
    pub population: usize,
    pub tournament: usize,
    pub cx_prob: f64,
    /// Probability that an offspring receives one mutation.
    pub mut_prob: f64,
    /// Share of mutations that take one edit toward the query vector instead
    /// of a random edit.
    pub directed_prob: f64,
}

impl Default for SpeciesConfig {
    fn default() -> Self {
        SpeciesConfig { population: 32, tournament: 3, cx_prob: 0.95, mut_prob: 0.9, directed_prob: 0.5 }
    }
}

/// `manhattan(v, w)` when `w` satisfies the contract, otherwise infinite
/// (`None`).
pub fn fitness_contract(c: &Contract, w: &ParamVector, v: &ParamVector) -> Result<Option<u64>, DistanceError> {
    let d = manhattan(v, w)?;
    Ok(c.holds_for(w).then_some(d))
}

fn key(f: Option<u64>) -> u64 {
    f.unwrap_or(u64::MAX)
}

#[derive(Debug, Clone)]
pub struct ContractSpecies {
    contract: Contract,
    domain: Domain,
    cfg: SpeciesConfig,
    population: Vec<ParamVector>,
    satisfies: Vec<bool>,
    cache: HashMap<ParamVector, Option<u64>>,
}

impl ContractSpecies {
    /// Seeds the population with sampled models of the contract.
    pub fn new(
        contract: Contract,
        domain: Domain,
        cfg: SpeciesConfig,
        seed: u64,
    ) -> Result<ContractSpecies, SamplerError> {
        let population = seed_population(&contract, cfg.population.max(1), seed, &domain)?;
        Ok(ContractSpecies::with_population(contract, domain, cfg, population))
    }

    pub fn with_population(
        contract: Contract,
        domain: Domain,
        cfg: SpeciesConfig,
        population: Vec<ParamVector>,
    ) -> Self {
        let satisfies = population.iter().map(|w| contract.holds_for(w)).collect();
        ContractSpecies { contract, domain, cfg, population, satisfies, cache: HashMap::new() }
    }

    pub fn contract(&self) -> &Contract {
        &self.contract
    }

    pub fn population(&self) -> &[ParamVector] {
        &self.population
    }

    /// Smallest distance from `v` to a satisfying member; `None` (infinite)
    /// when no member satisfies the contract.
    pub fn gamma_approx(&mut self, v: &ParamVector) -> Result<Option<u64>, DistanceError> {
        if v.len() != self.contract.arity() {
            return Err(DistanceError::ArityMismatch { left: self.contract.arity(), right: v.len() });
        }
        if let Some(g) = self.cache.get(v) {
            return Ok(*g);
        }
        let mut best = None;
        for (w, ok) in self.population.iter().zip(&self.satisfies) {
            if *ok {
                let d = manhattan(v, w)?;
                best = Some(best.map_or(d, |b: u64| b.min(d)));
            }
        }
        self.cache.insert(v.clone(), best);
        Ok(best)
    }

    /// One generation against the observed vector `v`: tournament selection,
    /// crossover and mutation produce offspring; parents and offspring
    /// compete and the fittest distinct vectors survive.
    pub fn evolve<R: Rng>(&mut self, v: &ParamVector, rng: &mut R) -> Result<(), DistanceError> {
        if v.len() != self.contract.arity() {
            return Err(DistanceError::ArityMismatch { left: self.contract.arity(), right: v.len() });
        }
        let n = self.population.len();
        let fit = |w: &ParamVector, ok: bool| -> Result<Option<u64>, DistanceError> {
            let d = manhattan(v, w)?;
            Ok(ok.then_some(d))
        };
        let mut scored: Vec<(u64, ParamVector, bool)> = Vec::with_capacity(2 * n);
        let mut keys = Vec::with_capacity(n);
        for (w, ok) in self.population.iter().zip(&self.satisfies) {
            let k = key(fit(w, *ok)?);
            keys.push(k);
            scored.push((k, w.clone(), *ok));
        }
        while scored.len() < 2 * n {
            let a = &self.population[tournament_select(&keys, self.cfg.tournament, rng)];
            let b = &self.population[tournament_select(&keys, self.cfg.tournament, rng)];
            let (mut x, mut y) =
                if rng.random::<f64>() < self.cfg.cx_prob { self.crossover(a, b, rng) } else { (a.clone(), b.clone()) };
            for child in [&mut x, &mut y] {
                if rng.random::<f64>() < self.cfg.mut_prob {
                    self.mutate(child, v, rng);
                }
            }
            for child in [x, y] {
                let ok = self.contract.holds_for(&child);
                scored.push((key(fit(&child, ok)?), child, ok));
            }
        }
        // Stable: parents win ties against their offspring.
        scored.sort_by_key(|(k, _, _)| *k);
        let mut next: Vec<(ParamVector, bool)> = Vec::with_capacity(n);
        for (_, w, ok) in &scored {
            if next.len() == n {
                break;
            }
            if !next.iter().any(|(u, _)| u == w) {
                next.push((w.clone(), *ok));
            }
        }
        let distinct = next.len();
        for i in distinct..n {
            next.push(next[i % distinct].clone());
        }
        (self.population, self.satisfies) = next.into_iter().unzip();
        self.cache.clear();
        Ok(())
    }

    /// Component-wise uniform crossover; string components additionally
    /// exchange tails at random cut points.
    fn crossover<R: Rng>(&self, a: &ParamVector, b: &ParamVector, rng: &mut R) -> (ParamVector, ParamVector) {
        let mut x = Vec::with_capacity(a.len());
        let mut y = Vec::with_capacity(a.len());
        for (p, q) in a.values().iter().zip(b.values()) {
            match (p, q) {
                (Value::Str(s), Value::Str(t)) if rng.random::<bool>() => {
                    let ca = rng.random_range(0..=s.chars().count());
                    let cb = rng.random_range(0..=t.chars().count());
                    let (u, w) = crossover_strings(s, t, ca, cb, self.domain.max_str_len);
                    x.push(Value::Str(u));
                    y.push(Value::Str(w));
                }
                _ if rng.random::<bool>() => {
                    x.push(q.clone());
                    y.push(p.clone());
                }
                _ => {
                    x.push(p.clone());
                    y.push(q.clone());
                }
            }
        }
        (ParamVector(x), ParamVector(y))
    }

    /// Mutates one random component, either randomly or one step toward the
    /// corresponding component of `v`.
    fn mutate<R: Rng>(&self, w: &mut ParamVector, v: &ParamVector, rng: &mut R) {
        if w.is_empty() {
            return;
        }
        let i = rng.random_range(0..w.len());
        let directed = rng.random::<f64>() < self.cfg.directed_prob;
        let d = &self.domain;
        let new = match (&w.0[i], &v.0[i]) {
            (Value::Str(s), Value::Str(t)) => {
                let stepped = if directed { step_toward(s, t, d, rng) } else { None };
                Value::Str(stepped.unwrap_or_else(|| mutate_string(s, d, rng)))
            }
            (Value::Int(n), Value::Int(m)) => {
                let next = if directed && n != m {
                    n + (m - n).signum()
                } else {
                    match rng.random_range(0..3) {
                        0 => n.saturating_add(1),
                        1 => n.saturating_sub(1),
                        _ => d.sample_int_in(d.int_min, d.int_max, rng),
                    }
                };
                Value::Int(next.clamp(d.int_min, d.int_max))
            }
            (Value::Bool(b), Value::Bool(c)) => Value::Bool(if directed { *c } else { !b }),
            (other, _) => other.clone(),
        };
        w.0[i] = new;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const C_BASE: &str = "payload ∈ Σ*.[0-9].Σ* ∧ len(payload) ≥ y";

    fn pv(s: &str, n: i64) -> ParamVector {
        ParamVector(vec![s.into(), n.into()])
    }

    #[test]
    fn contract_fitness_examples() {
        let c = Contract::parse(C_BASE).unwrap();
        let v = pv("john", 7);
        assert_eq!(fitness_contract(&c, &pv("7", 2), &v), Ok(None));
        assert_eq!(fitness_contract(&c, &pv("G?_9", 0), &v), Ok(Some(11)));
        let sat = pv("john42", 6);
        assert_eq!(fitness_contract(&c, &sat, &sat), Ok(Some(0)));
        assert!(fitness_contract(&c, &ParamVector(vec!["x".into()]), &v).is_err());
    }

    #[test]
    fn gamma_approx_examples() {
        let c = Contract::parse(C_BASE).unwrap();
        let mut s = ContractSpecies::with_population(
            c.clone(),
            Domain::default(),
            SpeciesConfig::default(),
            vec![pv("G?_9", 0), pv("john42", 6), pv("7", 2)],
        );
        assert_eq!(s.gamma_approx(&pv("john", 7)), Ok(Some(3)));
        assert_eq!(s.gamma_approx(&pv("john42", 6)), Ok(Some(0)));
        let mut bad =
            ContractSpecies::with_population(c, Domain::default(), SpeciesConfig::default(), vec![pv("7", 2)]);
        assert_eq!(bad.gamma_approx(&pv("john", 7)), Ok(None));
        assert!(bad.gamma_approx(&ParamVector(vec![])).is_err());
    }

    #[test]
    fn evolution_never_loses_the_best_member() {
        let c = Contract::parse(C_BASE).unwrap();
        let mut s = ContractSpecies::new(c, Domain::default(), SpeciesConfig::default(), 3).unwrap();
        let v = pv("john", 7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut last = s.gamma_approx(&v).unwrap().unwrap();
        for _ in 0..200 {
            s.evolve(&v, &mut rng).unwrap();
            let g = s.gamma_approx(&v).unwrap().unwrap();
            assert!(g <= last);
            last = g;
        }
        assert_eq!(last, 3);
        assert_eq!(s.population().len(), 32);
    }
}
