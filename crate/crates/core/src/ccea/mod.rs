//! Collaborative co-evolution of a test species and one contract species per
//! procedure.

mod chromo;
mod ops;
mod species;

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use chromo::{crossover_at, crossover_tests, mutate_test, ChromosomeError, Cut, GeneSpace, Label, TestChromosome};
pub use ops::{
    crossover_strings, delete_char, insert_char, modify_char, mutate_string, step_toward, tournament_select,
};
pub use species::{fitness_contract, ContractSpecies, SpeciesConfig};

use crate::sampler::{Domain, SamplerError};
use crate::sim::{
    call_graph_distances, execute_test, is_successful, target_procedures, AutModel, ExecutionTrace, SimError, VulnSpec,
};
use crate::value::ParamVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("call contract of target procedure `{procedure}` is unsatisfiable: {source}")]
    UnsatContract { procedure: String, source: SamplerError },
    #[error("the vulnerability signature matches no procedure")]
    NoTarget,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("empty execution trace")]
pub struct EmptyTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub test_population: usize,
    pub tournament: usize,
    /// Gene positions exchanged by one test crossover.
    pub crossover_positions: usize,
    pub cx_prob: f64,
    /// Per-gene mutation probability of tests.
    pub mut_prob: f64,
    pub clicks: usize,
    pub types: usize,
    pub max_generations: u64,
    pub species: SpeciesConfig,
    /// Domain of contract-species vectors; derived from the model if unset.
    pub contract_domain: Option<Domain>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            test_population: 100,
            tournament: 3,
            crossover_positions: 2,
            cx_prob: 0.95,
            mut_prob: 0.06,
            clicks: 4,
            types: 1,
            max_generations: 50_000,
            species: SpeciesConfig::default(),
            contract_domain: None,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let err = |m: &str| Err(EngineError::Config(m.to_string()));
        for (name, p) in [
            ("crossover probability", self.cx_prob),
            ("mutation probability", self.mut_prob),
            ("species crossover probability", self.species.cx_prob),
            ("species mutation probability", self.species.mut_prob),
            ("directed mutation share", self.species.directed_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(&format!("{name} {p} is outside [0, 1]"));
            }
        }
        if self.test_population == 0 || self.species.population == 0 {
            return err("population sizes must be positive");
        }
        if self.tournament == 0 || self.species.tournament == 0 {
            return err("tournament size must be positive");
        }
        let genes = self.clicks + self.types;
        if genes == 0 {
            return err("tests need at least one action");
        }
        if self.crossover_positions == 0 || self.crossover_positions > genes {
            return err(&format!("crossover positions must be in 1..={genes}"));
        }
        Ok(())
    }
}

/// Minimum call-graph distance over invoked procedures (unreachable ones
/// ignored), plus one unless the test succeeded. A trace touching no
/// procedure with a path to a target gets `ceiling`.
pub fn call_distance(
    tr: &ExecutionTrace,
    d: &[Option<u32>],
    successful: bool,
    ceiling: u64,
) -> Result<u64, EmptyTrace> {
    if tr.invocations.is_empty() {
        return Err(EmptyTrace);
    }
    Ok(match tr.invocations.iter().filter_map(|i| d[i.procedure]).min() {
        Some(m) => u64::from(m) + u64::from(!successful),
        None => ceiling,
    })
}

/// `δ − 1/(γ+1)` for unsuccessful tests, 0 for successful ones. An infinite
/// `γ` (`None`) gives no correction. `γ` is raised to at least 1 so that an
/// unsuccessful test never scores as low as `δ − 1`.
pub fn fitness_value(delta: u64, gamma: Option<u64>, successful: bool) -> f64 {
    if successful {
        return 0.0;
    }
    let correction = match gamma {
        None => 0.0,
        Some(g) => 1.0 / (g.max(1) as f64 + 1.0),
    };
    delta as f64 - correction
}

/// Everything needed to score tests against one application.
pub struct Context<'a> {
    pub model: &'a AutModel,
    pub vuln: &'a VulnSpec,
    pub distances: Vec<Option<u32>>,
    pub targets: Vec<usize>,
    /// Call distance of traces that never touch a procedure leading to a
    /// target: graph diameter plus two.
    pub ceiling: u64,
    pub space: GeneSpace,
    pub domain: Domain,
}

impl<'a> Context<'a> {
    pub fn new(model: &'a AutModel, vuln: &'a VulnSpec, domain: Option<Domain>) -> Context<'a> {
        let targets = target_procedures(model, vuln);
        let distances = call_graph_distances(model, &targets);
        let diameter = distances.iter().flatten().copied().max().unwrap_or(0);
        let text = Domain { max_str_len: model.max_input_len, ..Domain::default() };
        let domain = domain.unwrap_or_else(|| text.clone());
        Context {
            model,
            vuln,
            distances,
            targets,
            ceiling: u64::from(diameter) + 2,
            space: GeneSpace { width: model.width, height: model.height, text },
            domain,
        }
    }

    /// The call-contract vector of invocation `inv`.
    pub fn contract_vector(&self, inv: &crate::sim::Invocation) -> ParamVector {
        let p = &self.model.procedures[inv.procedure];
        ParamVector(p.contract_params.iter().map(|&i| inv.params.values()[i].clone()).collect())
    }
}

/// Score of one test with the data needed to steer the contract species.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fitness: f64,
    pub successful: bool,
    pub delta: u64,
    pub gamma: Option<u64>,
    pub trace: ExecutionTrace,
}

/// Per-procedure contract species (`None` when its contract has no model).
pub struct Species(pub Vec<Option<ContractSpecies>>);

impl Species {
    pub fn seed(ctx: &Context, cfg: &SpeciesConfig, seed: u64) -> Result<Species, EngineError> {
        let mut out = Vec::new();
        for (i, p) in ctx.model.procedures.iter().enumerate() {
            let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
            match ContractSpecies::new(p.call_contract.clone(), ctx.domain.clone(), cfg.clone(), s) {
                Ok(sp) => out.push(Some(sp)),
                Err(e) if ctx.targets.contains(&i) => {
                    return Err(EngineError::UnsatContract { procedure: p.name.clone(), source: e })
                }
                Err(_) => out.push(None),
            }
        }
        Ok(Species(out))
    }

    /// Invocation of procedure `p` in `tr` with the smallest approximate
    /// contract distance (earliest on ties), with that distance.
    fn closest(&mut self, ctx: &Context, tr: &ExecutionTrace, p: usize) -> Option<(usize, Option<u64>)> {
        let sp = self.0[p].as_mut()?;
        let mut best: Option<(usize, Option<u64>)> = None;
        for (k, inv) in tr.invocations.iter().enumerate().filter(|(_, i)| i.procedure == p) {
            let g = sp.gamma_approx(&ctx.contract_vector(inv)).expect("arity follows the contract");
            let better = match best {
                None => true,
                Some((_, b)) => g.unwrap_or(u64::MAX) < b.unwrap_or(u64::MAX),
            };
            if better {
                best = Some((k, g));
            }
        }
        best
    }
}

pub fn evaluate(ctx: &Context, species: &mut Species, t: &TestChromosome) -> Result<Evaluation, SimError> {
    let trace = execute_test(ctx.model, &t.genes)?;
    let successful = is_successful(&trace, ctx.vuln);
    let delta = call_distance(&trace, &ctx.distances, successful, ctx.ceiling).expect("entry is always invoked");
    let gamma = if successful {
        Some(0)
    } else {
        // Procedure realizing the minimum distance, first on ties.
        let argmin = trace
            .invocations
            .iter()
            .filter_map(|i| ctx.distances[i.procedure].map(|d| (d, i.procedure)))
            .min_by_key(|(d, _)| *d)
            .map(|(_, p)| p);
        argmin.and_then(|p| species.closest(ctx, &trace, p)).and_then(|(_, g)| g)
    };
    Ok(Evaluation { fitness: fitness_value(delta, gamma, successful), successful, delta, gamma, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Success,
    GenerationCap,
    /// Another worker succeeded first and the run asked to stop early.
    Cancelled,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Success => "success",
            Termination::GenerationCap => "generation-cap",
            Termination::Cancelled => "cancelled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorkerStats {
    pub seed: u64,
    /// `(generation, best fitness)` for every evaluated generation.
    pub history: Vec<(u64, f64)>,
    pub termination: Termination,
    pub best: TestChromosome,
    pub best_fitness: f64,
    pub successful_trace: Option<ExecutionTrace>,
    pub elapsed: Duration,
}

impl WorkerStats {
    pub fn generations(&self) -> u64 {
        self.history.last().map_or(0, |(g, _)| *g)
    }
}

/// One independent co-evolutionary run.
pub fn run_worker(ctx: &Context, cfg: &EngineConfig, seed: u64) -> Result<WorkerStats, EngineError> {
    run_worker_until(ctx, cfg, seed, None)
}

/// Like [`run_worker`]; stops early once `stop` is raised.
pub fn run_worker_until(
    ctx: &Context,
    cfg: &EngineConfig,
    seed: u64,
    stop: Option<&AtomicBool>,
) -> Result<WorkerStats, EngineError> {
    cfg.validate()?;
    if ctx.targets.is_empty() {
        return Err(EngineError::NoTarget);
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut species = Species::seed(ctx, &cfg.species, seed)?;
    let mut pop: Vec<TestChromosome> =
        (0..cfg.test_population).map(|_| TestChromosome::random(cfg.clicks, cfg.types, &ctx.space, &mut rng)).collect();
    let mut history = Vec::new();
    let mut generation = 0u64;
    loop {
        let evals = pop.iter().map(|t| evaluate(ctx, &mut species, t)).collect::<Result<Vec<_>, _>>()?;
        let fitness: Vec<f64> = evals.iter().map(|e| e.fitness).collect();
        let best = (0..pop.len()).fold(0, |b, i| if fitness[i] < fitness[b] { i } else { b });
        history.push((generation, fitness[best]));
        let done = if evals[best].successful {
            Some(Termination::Success)
        } else if generation >= cfg.max_generations {
            Some(Termination::GenerationCap)
        } else if stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
            Some(Termination::Cancelled)
        } else {
            None
        };
        if let Some(termination) = done {
            if termination == Termination::Success {
                if let Some(s) = stop {
                    s.store(true, Ordering::Relaxed);
                }
            }
            return Ok(WorkerStats {
                seed,
                history,
                termination,
                best_fitness: fitness[best],
                successful_trace: evals[best].successful.then(|| evals[best].trace.clone()),
                best: pop[best].clone(),
                elapsed: start.elapsed(),
            });
        }

        // Contract species evolve against the best test's parameters.
        let trace = &evals[best].trace;
        let mut invoked: Vec<usize> = trace.invocations.iter().map(|i| i.procedure).collect();
        invoked.sort_unstable();
        invoked.dedup();
        for p in invoked {
            if let Some((k, _)) = species.closest(ctx, trace, p) {
                let v = ctx.contract_vector(&trace.invocations[k]);
                if let Some(sp) = species.0[p].as_mut() {
                    sp.evolve(&v, &mut rng).expect("arity follows the contract");
                }
            }
        }

        let mut next = Vec::with_capacity(pop.len());
        next.push(pop[best].clone());
        while next.len() < pop.len() {
            let a = &pop[tournament_select(&fitness, cfg.tournament, &mut rng)];
            let b = &pop[tournament_select(&fitness, cfg.tournament, &mut rng)];
            let (x, y) = if rng.random::<f64>() < cfg.cx_prob {
                crossover_tests(a, b, cfg.crossover_positions, &ctx.space, &mut rng).expect("validated configuration")
            } else {
                (a.clone(), b.clone())
            };
            for child in [x, y] {
                if next.len() < pop.len() {
                    next.push(mutate_test(&child, cfg.mut_prob, &ctx.space, &mut rng));
                }
            }
        }
        pop = next;
        generation += 1;
    }
}

/// Runs `workers` independent workers with seeds `base_seed + i` on scoped
/// threads. With `stop_early`, the first success cancels the others.
pub fn run_workers(
    ctx: &Context,
    cfg: &EngineConfig,
    workers: usize,
    base_seed: u64,
    stop_early: bool,
) -> Vec<Result<WorkerStats, EngineError>> {
    let stop = AtomicBool::new(false);
    let stop = stop_early.then_some(&stop);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                let seed = base_seed.wrapping_add(i as u64);
                s.spawn(move || run_worker_until(ctx, cfg, seed, stop))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    })
}
