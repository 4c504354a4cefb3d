//! Simulated event-based web application: model loading, action execution,
//! vulnerability detection and call-graph distances.

mod exec;
mod model;

use std::collections::VecDeque;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::contract::{Contract, ContractError};
use crate::value::{Env, Type};

pub use exec::{
    execute_test, render_template, replace_all, Action, ExecutionTrace, Invocation, SimState, Simulator, SinkHit,
};
pub use model::{AutModel, Control, ControlKind, Effect, Param, Procedure, Sink, Source, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{what} of `{procedure}`: {source}")]
    Contract { procedure: String, what: String, source: ContractError },
    #[error("`{from}` refers to undefined procedure `{target}`")]
    DanglingTarget { from: String, target: String },
    #[error("unknown action: {0}")]
    UnknownAction(String),
}

/// A sink label paired with a contract over the value reaching the sink.
#[derive(Debug, Clone)]
pub struct VulnSpec {
    pub signature: String,
    pub variable: String,
    pub contract: Contract,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVuln {
    schema_version: u32,
    signature: String,
    contract: String,
    #[serde(default = "default_variable")]
    variable: String,
}

fn default_variable() -> String {
    "x".to_string()
}

impl VulnSpec {
    pub fn new(signature: &str, variable: &str, contract: &str) -> Result<VulnSpec, SimError> {
        let decl = [(variable.to_string(), Type::Str)];
        let contract = Contract::parse_declared(contract, &decl).map_err(|e| SimError::Contract {
            procedure: signature.to_string(),
            what: "vulnerability contract".into(),
            source: e,
        })?;
        Ok(VulnSpec { signature: signature.to_string(), variable: variable.to_string(), contract })
    }

    pub fn load(path: &Path) -> Result<VulnSpec, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io { path: path.display().to_string(), message: e.to_string() })?;
        VulnSpec::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<VulnSpec, SimError> {
        let raw: RawVuln = toml::from_str(text).map_err(|e| SimError::Schema(e.message().to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(SimError::Schema(format!("unsupported schema_version {}", raw.schema_version)));
        }
        VulnSpec::new(&raw.signature, &raw.variable, &raw.contract)
    }

    /// Whether a value reaching the sink triggers the vulnerability.
    pub fn triggers(&self, value: &str) -> bool {
        let env = Env::new().with(self.variable.as_str(), value);
        self.contract.evaluate(&env).unwrap_or(false)
    }
}

/// First sink hit in `trace` that triggers `v`.
pub fn triggered<'t>(trace: &'t ExecutionTrace, v: &VulnSpec) -> Option<&'t SinkHit> {
    trace.sinks.iter().find(|s| s.label == v.signature && v.triggers(&s.value))
}

pub fn is_successful(trace: &ExecutionTrace, v: &VulnSpec) -> bool {
    triggered(trace, v).is_some()
}

/// Procedures declaring a sink labelled with the vulnerability signature.
pub fn target_procedures(m: &AutModel, v: &VulnSpec) -> Vec<usize> {
    m.procedures
        .iter()
        .enumerate()
        .filter(|(_, p)| p.sinks.iter().any(|s| s.signature == v.signature))
        .map(|(i, _)| i)
        .collect()
}

/// Successor procedures: targets of the rendered page's controls and the
/// failure redirect.
pub fn call_graph_edges(m: &AutModel) -> Vec<Vec<usize>> {
    m.procedures
        .iter()
        .map(|p| {
            let mut out: Vec<usize> = p
                .controls
                .iter()
                .filter_map(|c| match &c.kind {
                    ControlKind::Button { target } | ControlKind::Link { target, .. } => Some(*target),
                    ControlKind::TextField => None,
                })
                .chain(p.on_fail)
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}

/// Shortest call-graph distance from each procedure to any target; `None`
/// when no target is reachable.
pub fn call_graph_distances(m: &AutModel, targets: &[usize]) -> Vec<Option<u32>> {
    let edges = call_graph_edges(m);
    let mut reverse = vec![Vec::new(); edges.len()];
    for (from, succ) in edges.iter().enumerate() {
        for &to in succ {
            reverse[to].push(from);
        }
    }
    let mut dist = vec![None; edges.len()];
    let mut queue = VecDeque::new();
    for &t in targets {
        if dist[t].is_none() {
            dist[t] = Some(0);
            queue.push_back(t);
        }
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[p].expect("queued nodes have a distance");
        for &q in &reverse[p] {
            if dist[q].is_none() {
                dist[q] = Some(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests;
