//! Property checks shared by the proptest suite and the acceptance target.
//! Each check draws its inputs from the given generator and returns a
//! description of the first violation.

use coevo::ccea::{
    call_distance, crossover_tests, evaluate, mutate_test, run_worker, Context, EngineConfig, GeneSpace, Species,
    SpeciesConfig, TestChromosome,
};
use coevo::sim::{call_graph_distances, execute_test, is_successful, target_procedures, Action, AutModel, VulnSpec};
use rand::Rng;

pub fn scw() -> (AutModel, VulnSpec) {
    (AutModel::from_toml(coevo::fixtures::SCW_MODEL).unwrap(), VulnSpec::from_toml(coevo::fixtures::SCW_VULN).unwrap())
}

const PAYLOADS: [&str; 3] = ["<script>alert(7)</script>", "<SCRIPT>alert('ab')</script>", "<script>alert(0)</ScRiPt>"];

/// A random test over the scw canvas; some typed strings are replaced by
/// near-exploit payloads so that successful tests are well represented.
pub fn random_test<R: Rng>(space: &GeneSpace, rng: &mut R) -> TestChromosome {
    let clicks = rng.random_range(1..=5);
    let types = rng.random_range(0..=2);
    let mut t = TestChromosome::random(clicks, types, space, rng);
    for g in &mut t.genes {
        if matches!(g, Action::Type(_)) && rng.random_bool(0.3) {
            *g = Action::Type(PAYLOADS[rng.random_range(0..PAYLOADS.len())].to_string());
        }
    }
    if rng.random_bool(0.2) {
        // The scripted route: focus, type, submit, confirm.
        let payload = PAYLOADS[rng.random_range(0..PAYLOADS.len())].to_string();
        t.genes = vec![
            Action::Click { x: 10, y: 10 },
            Action::Type(payload),
            Action::Click { x: 10, y: 40 },
            Action::Click { x: 10, y: 10 },
        ];
    }
    t
}

fn in_bounds(t: &TestChromosome, space: &GeneSpace) -> bool {
    t.genes.iter().all(|g| space.contains(g))
}

/// Crossover and mutation keep the label multiset and stay inside the
/// canvas and the input length bound.
pub fn operator_invariants<R: Rng>(rng: &mut R) -> Result<(), String> {
    let space =
        GeneSpace { width: 128, height: 128, text: coevo::sampler::Domain { max_str_len: 30, ..Default::default() } };
    let clicks = rng.random_range(0..=4);
    let types = rng.random_range(usize::from(clicks == 0)..=3);
    let a = TestChromosome::random(clicks, types, &space, rng);
    let b = TestChromosome::random(clicks, types, &space, rng);
    let l = rng.random_range(1..=clicks + types);
    let (x, y) = crossover_tests(&a, &b, l, &space, rng).map_err(|e| e.to_string())?;
    let m = mutate_test(&x, rng.random_range(0.0..=1.0), &space, rng);
    for c in [&x, &y, &m] {
        if c.label_counts() != (clicks, types) {
            return Err(format!("label counts changed: {c}"));
        }
        if !in_bounds(c, &space) {
            return Err(format!("gene out of bounds: {c}"));
        }
    }
    let (p, q) = crossover_tests(&a, &a, l, &space, rng).map_err(|e| e.to_string())?;
    if p != a || q != a {
        return Err(format!("crossover of identical parents changed them: {a}"));
    }
    Ok(())
}

/// φ is zero exactly for successful tests, and otherwise lies in
/// `(δ - 1, δ]`.
pub fn zero_fitness_iff_successful<R: Rng>(rng: &mut R) -> Result<(), String> {
    let (m, v) = scw();
    let ctx = Context::new(&m, &v, None);
    let mut species = Species::seed(&ctx, &SpeciesConfig::default(), rng.random()).map_err(|e| e.to_string())?;
    let t = random_test(&ctx.space, rng);
    let e = evaluate(&ctx, &mut species, &t).map_err(|e| e.to_string())?;
    let ok = is_successful(&execute_test(&m, &t.genes).map_err(|e| e.to_string())?, &v);
    if (e.fitness == 0.0) != ok {
        return Err(format!("fitness {} but successful = {ok} for {t}", e.fitness));
    }
    let d = e.delta as f64;
    if !ok && !(d - 1.0 < e.fitness && e.fitness <= d) {
        return Err(format!("fitness {} outside ({}, {d}] for {t}", e.fitness, d - 1.0));
    }
    Ok(())
}

/// Appending actions to a test extends its trace, and the minimum call-graph
/// distance over a superset of invocations can only shrink.
pub fn superset_monotonicity<R: Rng>(rng: &mut R) -> Result<(), String> {
    let (m, v) = scw();
    let ctx = Context::new(&m, &v, None);
    let d = call_graph_distances(&m, &target_procedures(&m, &v));
    let t = random_test(&ctx.space, rng);
    let extra = random_test(&ctx.space, rng);
    let short = execute_test(&m, &t.genes).map_err(|e| e.to_string())?;
    let mut genes = t.genes.clone();
    genes.extend(extra.genes);
    let long = execute_test(&m, &genes).map_err(|e| e.to_string())?;
    if !long.invocations.starts_with(&short.invocations) {
        return Err(format!("trace of {t} is not a prefix of its extension"));
    }
    let min_d = |tr| call_distance(tr, &d, true, ctx.ceiling).map_err(|e| e.to_string());
    if !short.invocations.is_empty() && min_d(&long)? > min_d(&short)? {
        return Err(format!("extension of {t} increased the minimum distance"));
    }
    Ok(())
}

/// Equal seeds give identical runs, and best-fitness curves never rise.
pub fn reproducible_and_monotone(seed: u64) -> Result<(), String> {
    let (m, v) = scw();
    let ctx = Context::new(&m, &v, None);
    let cfg = EngineConfig { test_population: 20, max_generations: 40, ..EngineConfig::default() };
    let a = run_worker(&ctx, &cfg, seed).map_err(|e| e.to_string())?;
    let b = run_worker(&ctx, &cfg, seed).map_err(|e| e.to_string())?;
    if a.history != b.history || a.best != b.best {
        return Err(format!("seed {seed} is not reproducible"));
    }
    if a.history.windows(2).any(|w| w[1].1 > w[0].1 || w[1].0 <= w[0].0) {
        return Err(format!("seed {seed}: best-fitness curve rises: {:?}", a.history));
    }
    Ok(())
}
