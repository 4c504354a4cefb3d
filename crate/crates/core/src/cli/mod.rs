//! Command-line front end: `run` searches for exploits, `replay` re-executes
//! an action script.

mod script;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use script::{format_script, parse_script, ScriptError};

use crate::ccea::{run_workers, Context, EngineConfig, EngineError, SpeciesConfig, Termination, WorkerStats};
use crate::sampler::export_smtlib;
use crate::sim::{execute_test, triggered, AutModel, ExecutionTrace, SimError, VulnSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Parser)]
#[command(name = "coevo", version, about = "Co-evolutionary exploit search for simulated web applications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a test that triggers the vulnerability.
    Run(RunConfig),
    /// Re-execute an action script and report whether it triggers.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Application model (TOML).
    #[arg(long)]
    pub aut: PathBuf,
    /// Vulnerability specification (TOML).
    #[arg(long)]
    pub vuln: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub workers: usize,
    #[arg(long = "max-gens", default_value_t = 50_000)]
    pub max_generations: u64,
    /// Test population size.
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    /// Contract population size.
    #[arg(long = "contract-pop", default_value_t = 32)]
    pub contract_pop: usize,
    #[arg(long = "cx-prob", default_value_t = 0.95)]
    pub cx_prob: f64,
    #[arg(long = "mut-prob", default_value_t = 0.06)]
    pub mut_prob: f64,
    /// Click actions per test.
    #[arg(long, default_value_t = 4)]
    pub clicks: usize,
    /// Type actions per test.
    #[arg(long, default_value_t = 1)]
    pub types: usize,
    /// Worker `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write each call contract as SMT-LIB into this directory.
    #[arg(long = "dump-smt")]
    pub dump_smt: Option<PathBuf>,
    /// Cancel the remaining workers once one succeeds.
    #[arg(long = "stop-early")]
    pub stop_early: bool,
}

impl RunConfig {
    pub fn new(aut: impl Into<PathBuf>, vuln: impl Into<PathBuf>, out: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            aut: aut.into(),
            vuln: vuln.into(),
            workers: 10,
            max_generations: 50_000,
            pop: 100,
            contract_pop: 32,
            cx_prob: 0.95,
            mut_prob: 0.06,
            clicks: 4,
            types: 1,
            seed: 0,
            out: out.into(),
            dump_smt: None,
            stop_early: false,
        }
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            test_population: self.pop,
            cx_prob: self.cx_prob,
            mut_prob: self.mut_prob,
            clicks: self.clicks,
            types: self.types,
            max_generations: self.max_generations,
            species: SpeciesConfig { population: self.contract_pop, ..SpeciesConfig::default() },
            ..EngineConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub aut: PathBuf,
    #[arg(long)]
    pub vuln: PathBuf,
    /// Action script: one `click X Y` or `type "text"` per line.
    pub script: PathBuf,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub workers: Vec<WorkerStats>,
    pub elapsed: std::time::Duration,
}

impl RunOutcome {
    pub fn any_success(&self) -> bool {
        self.workers.iter().any(|w| w.termination == Termination::Success)
    }

    pub fn total_generations(&self) -> u64 {
        self.workers.iter().map(|w| w.generations() + 1).sum()
    }

    pub fn exit_code(&self) -> i32 {
        if self.any_success() {
            0
        } else {
            1
        }
    }
}

/// Change points of the best-fitness curve plus the final generation.
pub fn digest_rows(history: &[(u64, f64)]) -> Vec<(u64, f64)> {
    let mut rows: Vec<(u64, f64)> = Vec::new();
    for &(g, f) in history {
        if rows.last().is_none_or(|&(_, prev)| f != prev) {
            rows.push((g, f));
        }
    }
    if let (Some(&last), Some(&(lg, _))) = (history.last(), rows.last()) {
        if last.0 != lg {
            rows.push(last);
        }
    }
    rows
}

fn digest_csv(history: &[(u64, f64)]) -> String {
    let mut s = String::from("X,Y\n");
    for (g, f) in digest_rows(history) {
        let _ = writeln!(s, "{g},{f}");
    }
    s
}

fn summary_text(out: &RunOutcome) -> String {
    let mut s = String::new();
    for (i, w) in out.workers.iter().enumerate() {
        let _ = writeln!(
            s,
            "worker {i} seed {} {} generations {} best {} time {:.3}s",
            w.seed,
            w.termination.as_str(),
            w.generations(),
            w.best_fitness,
            w.elapsed.as_secs_f64()
        );
    }
    let secs = out.elapsed.as_secs_f64();
    let succeeded = out.workers.iter().filter(|w| w.termination == Termination::Success).count();
    let _ = writeln!(s, "succeeded {succeeded}/{}", out.workers.len());
    let _ = writeln!(
        s,
        "wall time {secs:.3}s, {} generations, {:.1} generations/s",
        out.total_generations(),
        out.total_generations() as f64 / secs.max(1e-9)
    );
    s
}

/// Runs the search and writes digests, exploit scripts and the summary.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    if cfg.workers == 0 {
        return Err(EngineError::Config("at least one worker is required".into()).into());
    }
    let model = AutModel::load(&cfg.aut)?;
    let vuln = VulnSpec::load(&cfg.vuln)?;
    let engine = cfg.engine();
    engine.validate()?;
    let ctx = Context::new(&model, &vuln, None);
    let start = Instant::now();
    let results = run_workers(&ctx, &engine, cfg.workers, cfg.seed, cfg.stop_early);
    let elapsed = start.elapsed();
    let workers = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let outcome = RunOutcome { workers, elapsed };

    std::fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    for (i, w) in outcome.workers.iter().enumerate() {
        let p = cfg.out.join(format!("digest_test{i}.csv"));
        std::fs::write(&p, digest_csv(&w.history)).map_err(io_err(&p))?;
        if w.termination == Termination::Success {
            let p = cfg.out.join(format!("exploit_{i}.txt"));
            std::fs::write(&p, format_script(&w.best.genes)).map_err(io_err(&p))?;
        }
    }
    let p = cfg.out.join("summary");
    std::fs::write(&p, summary_text(&outcome)).map_err(io_err(&p))?;
    if let Some(dir) = &cfg.dump_smt {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for proc in &model.procedures {
            let p = dir.join(format!("{}.smt2", proc.name));
            std::fs::write(&p, export_smtlib(&proc.call_contract, &[])).map_err(io_err(&p))?;
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub trace: ExecutionTrace,
    /// `(procedure, label, sink value)` of the triggering sink.
    pub triggered: Option<(String, String, String)>,
}

impl ReplayOutcome {
    pub fn verdict(&self) -> String {
        match &self.triggered {
            Some((p, l, _)) => format!("TRIGGERED: {p} / {l}"),
            None => "NOT TRIGGERED".to_string(),
        }
    }

    pub fn report(&self) -> String {
        let mut s = self.trace.to_string();
        s.push_str(&self.verdict());
        s.push('\n');
        if let Some((_, _, v)) = &self.triggered {
            let _ = writeln!(s, "payload: {v:?}");
        }
        s
    }
}

pub fn replay_text(model: &AutModel, vuln: &VulnSpec, script: &str) -> Result<ReplayOutcome, CliError> {
    let actions = parse_script(script)?;
    let trace = execute_test(model, &actions)?;
    let triggered = triggered(&trace, vuln).map(|h| (h.procedure.clone(), h.label.clone(), h.value.clone()));
    Ok(ReplayOutcome { trace, triggered })
}

pub fn replay(args: &ReplayArgs) -> Result<ReplayOutcome, CliError> {
    let model = AutModel::load(&args.aut)?;
    let vuln = VulnSpec::load(&args.vuln)?;
    let text = std::fs::read_to_string(&args.script).map_err(io_err(&args.script))?;
    replay_text(&model, &vuln, &text)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command {
        Command::Run(cfg) => match run(&cfg) {
            Ok(out) => {
                print!("{}", summary_text(&out));
                out.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Replay(args) => match replay(&args) {
            Ok(out) => {
                print!("{}", out.report());
                if out.triggered.is_some() {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
    }
}
