//! Deterministic execution of GUI action sequences against a model.

use std::fmt;

use super::model::{AutModel, ControlKind, Effect, Source};
use super::SimError;
use crate::contract::regex::is_printable;
use crate::contract::Dfa;
use crate::value::{Env, ParamVector, Value};

/// Redirect chains longer than this stop silently.
const MAX_REDIRECT_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Click { x: u32, y: u32 },
    Type(String),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Click { x, y } => write!(f, "click({x},{y})"),
            Action::Type(s) => write!(f, "type({s:?})"),
        }
    }
}

/// One procedure call with its actual parameters, in declaration order,
/// as bound before any effect ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub procedure: usize,
    pub name: String,
    pub params: ParamVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkHit {
    /// Index into [`ExecutionTrace::invocations`].
    pub invocation: usize,
    pub procedure: String,
    pub label: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecutionTrace {
    pub invocations: Vec<Invocation>,
    pub sinks: Vec<SinkHit>,
}

impl ExecutionTrace {
    pub fn procedure_names(&self) -> Vec<&str> {
        self.invocations.iter().map(|i| i.name.as_str()).collect()
    }
}

impl fmt::Display for ExecutionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, inv) in self.invocations.iter().enumerate() {
            writeln!(f, "{i}: {}{}", inv.name, inv.params)?;
            for s in self.sinks.iter().filter(|s| s.invocation == i) {
                writeln!(f, "   sink {} <- {:?}", s.label, s.value)?;
            }
        }
        Ok(())
    }
}

/// Browser-side state of one simulated session.
#[derive(Debug, Clone)]
pub struct SimState {
    /// Procedure whose page is displayed.
    pub page: usize,
    /// Index of the focused text field on the current page.
    pub focus: Option<usize>,
    /// Text field contents, indexed like the page's controls.
    pub fields: Vec<String>,
    pub session: Env,
}

pub struct Simulator<'m> {
    model: &'m AutModel,
    pub state: SimState,
    pub trace: ExecutionTrace,
}

impl<'m> Simulator<'m> {
    /// Starts a session by invoking the entry procedure.
    pub fn start(model: &'m AutModel) -> Simulator<'m> {
        let session = model.session.iter().map(|(n, t)| (n.clone(), t.default_value())).collect();
        let mut sim = Simulator {
            model,
            state: SimState { page: model.entry, focus: None, fields: Vec::new(), session },
            trace: ExecutionTrace::default(),
        };
        sim.render(model.entry);
        sim.invoke(model.entry, &[], 0);
        sim
    }

    pub fn model(&self) -> &'m AutModel {
        self.model
    }

    pub fn apply(&mut self, action: &Action) -> Result<(), SimError> {
        match action {
            Action::Click { x, y } => {
                if *x >= self.model.width || *y >= self.model.height {
                    return Err(SimError::UnknownAction(format!("{action} is outside the canvas")));
                }
                let page = &self.model.procedures[self.state.page];
                let Some(ci) = page.controls.iter().position(|c| c.contains(*x, *y)) else {
                    return Ok(());
                };
                match &page.controls[ci].kind {
                    ControlKind::TextField => self.state.focus = Some(ci),
                    ControlKind::Button { target } => {
                        let args: Vec<(String, Value)> = page
                            .controls
                            .iter()
                            .zip(&self.state.fields)
                            .filter(|(c, _)| c.kind == ControlKind::TextField)
                            .map(|(c, v)| (c.name.clone(), Value::Str(v.clone())))
                            .collect();
                        let target = *target;
                        self.invoke(target, &args, 0);
                    }
                    ControlKind::Link { target, params } => {
                        let (target, params) = (*target, params.clone());
                        self.invoke(target, &params, 0);
                    }
                }
            }
            Action::Type(s) => {
                if let Some(ch) = s.chars().find(|c| !is_printable(*c)) {
                    return Err(SimError::UnknownAction(format!("typed text contains {ch:?}")));
                }
                if let Some(fi) = self.state.focus {
                    self.state.fields[fi] = s.chars().take(self.model.max_input_len).collect();
                }
            }
        }
        Ok(())
    }

    fn render(&mut self, proc: usize) {
        self.state.page = proc;
        self.state.focus = None;
        self.state.fields = vec![String::new(); self.model.procedures[proc].controls.len()];
    }

    fn invoke(&mut self, proc: usize, args: &[(String, Value)], depth: usize) {
        let p = &self.model.procedures[proc];
        let mut actual = Vec::with_capacity(p.params.len());
        for param in &p.params {
            let bound = match param.source {
                Source::Request => args.iter().find(|(n, _)| *n == param.name).map(|(_, v)| coerce(v, param.ty)),
                Source::Session => self.state.session.get(&param.name).cloned(),
            };
            actual.push(bound.unwrap_or_else(|| param.ty.default_value()));
        }
        let index = self.trace.invocations.len();
        self.trace.invocations.push(Invocation {
            procedure: proc,
            name: p.name.clone(),
            params: ParamVector(actual.clone()),
        });

        let mut local = self.state.session.clone();
        for (param, v) in p.params.iter().zip(actual) {
            local.bind(param.name.clone(), v);
        }
        if !p.guard.evaluate(&local).unwrap_or(false) {
            match p.on_fail {
                Some(target) if depth < MAX_REDIRECT_DEPTH => self.invoke(target, &[], depth + 1),
                _ => {}
            }
            return;
        }
        for e in &p.effects {
            match e {
                Effect::Replace { var, pattern, replacement } => {
                    if let Some(Value::Str(s)) = local.get(var) {
                        let replaced = replace_all(s, pattern, replacement);
                        local.bind(var.clone(), Value::Str(replaced));
                    }
                }
                Effect::Set { var, value } => {
                    local.bind(var.clone(), value.clone());
                }
                Effect::Store { session, from } => {
                    if let Some(v) = local.get(from).cloned() {
                        self.state.session.bind(session.clone(), v);
                    }
                }
            }
        }
        for s in &p.sinks {
            self.trace.sinks.push(SinkHit {
                invocation: index,
                procedure: p.name.clone(),
                label: s.signature.clone(),
                value: render_template(&s.template, &local),
            });
        }
        self.render(proc);
    }
}

fn coerce(v: &Value, ty: crate::value::Type) -> Value {
    use crate::value::Type;
    match (v, ty) {
        (v, t) if v.ty() == t => v.clone(),
        (Value::Str(s), Type::Int) => s.trim().parse().map(Value::Int).unwrap_or(Value::Int(0)),
        (Value::Str(s), Type::Bool) => Value::Bool(s == "true"),
        (_, t) => t.default_value(),
    }
}

/// Substitutes `${var}` placeholders; strings are inserted verbatim.
pub fn render_template(template: &str, env: &Env) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let Some(end) = after.find('}') else {
            out.push_str(&rest[start..]);
            return out;
        };
        match env.get(&after[..end]) {
            Some(Value::Str(s)) => out.push_str(s),
            Some(v) => out.push_str(&v.to_string()),
            None => {}
        }
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    out
}

/// Replaces every leftmost-longest non-empty match of `pattern`.
pub fn replace_all(s: &str, pattern: &Dfa, replacement: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        let mut state = pattern.start();
        let mut longest = None;
        for (j, c) in chars[i..].iter().enumerate() {
            let Some(sym) = crate::contract::regex::symbol(*c) else { break };
            state = pattern.step(state, sym);
            if pattern.is_accepting(state) {
                longest = Some(i + j + 1);
            }
        }
        match longest {
            Some(end) => {
                out.push_str(replacement);
                i = end;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    out
}

/// Runs `actions` from the entry page and returns the trace.
pub fn execute_test(model: &AutModel, actions: &[Action]) -> Result<ExecutionTrace, SimError> {
    let mut sim = Simulator::start(model);
    for a in actions {
        sim.apply(a)?;
    }
    Ok(sim.trace)
}
