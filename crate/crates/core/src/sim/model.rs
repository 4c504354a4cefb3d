//! Declarative application model: schema, loading and validation.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::SimError;
use crate::contract::{parse_regex, Contract, Dfa};
use crate::value::{Type, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CANVAS: u32 = 128;
pub const DEFAULT_MAX_INPUT_LEN: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawType {
    #[serde(alias = "bool")]
    Boolean,
    #[serde(alias = "int")]
    Integer,
    #[serde(alias = "str")]
    String,
}

impl From<RawType> for Type {
    fn from(t: RawType) -> Type {
        match t {
            RawType::Boolean => Type::Bool,
            RawType::Integer => Type::Int,
            RawType::String => Type::Str,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawLiteral {
    Bool(bool),
    Int(i64),
    Str(String),
}

impl From<RawLiteral> for Value {
    fn from(l: RawLiteral) -> Value {
        match l {
            RawLiteral::Bool(b) => Value::Bool(b),
            RawLiteral::Int(n) => Value::Int(n),
            RawLiteral::Str(s) => Value::Str(s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    schema_version: u32,
    entry: String,
    #[serde(default)]
    canvas: Option<RawCanvas>,
    #[serde(default)]
    max_input_len: Option<usize>,
    #[serde(default)]
    session: BTreeMap<String, RawType>,
    #[serde(default)]
    procedures: Vec<RawProcedure>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCanvas {
    width: u32,
    height: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcedure {
    name: String,
    #[serde(default)]
    params: Vec<RawParam>,
    guard: Option<String>,
    call_contract: Option<String>,
    #[serde(default)]
    effects: Vec<RawEffect>,
    on_fail: Option<String>,
    #[serde(default)]
    sinks: Vec<RawSink>,
    #[serde(default)]
    page: RawPage,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParam {
    name: String,
    #[serde(rename = "type")]
    ty: RawType,
    #[serde(default)]
    source: Source,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum RawEffect {
    Replace { var: String, pattern: String, replacement: String },
    Set { var: String, value: RawLiteral },
    Store { session: String, from: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSink {
    signature: String,
    value: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPage {
    #[serde(default)]
    controls: Vec<RawControl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    name: String,
    kind: RawKind,
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    target: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, RawLiteral>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    TextField,
    Button,
    Link,
}

/// Where a procedure parameter takes its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Submitted form fields or fixed link parameters.
    #[default]
    Request,
    /// The session variable of the same name.
    Session,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub enum Effect {
    /// Replaces every leftmost-longest non-empty match of `pattern` in a
    /// string variable.
    Replace {
        var: String,
        pattern: Arc<Dfa>,
        replacement: String,
    },
    Set {
        var: String,
        value: Value,
    },
    /// Copies a local variable into the session.
    Store {
        session: String,
        from: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sink {
    pub signature: String,
    /// Text with `${var}` placeholders.
    pub template: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlKind {
    TextField,
    /// Submits the page's text fields to `target`.
    Button {
        target: usize,
    },
    Link {
        target: usize,
        params: Vec<(String, Value)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Control {
    pub name: String,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub kind: ControlKind,
}

impl Control {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x - self.x < self.w && y >= self.y && y - self.y < self.h
    }
}

#[derive(Debug, Clone)]
pub struct Procedure {
    pub name: String,
    pub params: Vec<Param>,
    pub guard: Contract,
    pub call_contract: Contract,
    /// Positions in `params` of the call contract's free variables.
    pub contract_params: Vec<usize>,
    pub effects: Vec<Effect>,
    pub on_fail: Option<usize>,
    pub sinks: Vec<Sink>,
    pub controls: Vec<Control>,
}

/// A validated, immutable application model.
#[derive(Debug, Clone)]
pub struct AutModel {
    pub procedures: Vec<Procedure>,
    pub entry: usize,
    pub width: u32,
    pub height: u32,
    pub max_input_len: usize,
    pub session: Vec<(String, Type)>,
}

impl AutModel {
    pub fn load(path: &Path) -> Result<AutModel, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io { path: path.display().to_string(), message: e.to_string() })?;
        AutModel::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<AutModel, SimError> {
        let raw: RawModel = toml::from_str(text).map_err(|e| SimError::Schema(e.message().to_string()))?;
        build(raw)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.procedures.iter().position(|p| p.name == name)
    }

    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.procedures.iter().map(|p| p.name.as_str())
    }
}

fn contract_err(procedure: &str, what: &str, e: crate::contract::ContractError) -> SimError {
    SimError::Contract { procedure: procedure.to_string(), what: what.to_string(), source: e }
}

fn build(raw: RawModel) -> Result<AutModel, SimError> {
    if raw.schema_version != SCHEMA_VERSION {
        return Err(SimError::Schema(format!("unsupported schema_version {}", raw.schema_version)));
    }
    let (width, height) = match &raw.canvas {
        Some(c) => (c.width, c.height),
        None => (DEFAULT_CANVAS, DEFAULT_CANVAS),
    };
    if width == 0 || height == 0 {
        return Err(SimError::Schema("canvas must have positive size".into()));
    }
    let max_input_len = raw.max_input_len.unwrap_or(DEFAULT_MAX_INPUT_LEN);
    let session: Vec<(String, Type)> = raw.session.iter().map(|(k, t)| (k.clone(), Type::from(*t))).collect();

    let mut seen = HashSet::new();
    for p in &raw.procedures {
        if !seen.insert(p.name.as_str()) {
            return Err(SimError::Schema(format!("duplicate procedure `{}`", p.name)));
        }
    }
    let index = |from: &str, name: &str| -> Result<usize, SimError> {
        raw.procedures
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| SimError::DanglingTarget { from: from.to_string(), target: name.to_string() })
    };
    let entry = raw
        .procedures
        .iter()
        .position(|p| p.name == raw.entry)
        .ok_or_else(|| SimError::Schema(format!("entry procedure `{}` is not defined", raw.entry)))?;

    let mut procedures = Vec::with_capacity(raw.procedures.len());
    for rp in &raw.procedures {
        let pname = rp.name.as_str();
        let mut params: Vec<Param> = Vec::new();
        for p in &rp.params {
            if params.iter().any(|q| q.name == p.name) {
                return Err(SimError::Schema(format!("duplicate parameter `{}` in `{pname}`", p.name)));
            }
            if p.source == Source::Session && !session.iter().any(|(n, t)| *n == p.name && *t == Type::from(p.ty)) {
                return Err(SimError::Schema(format!(
                    "parameter `{}` of `{pname}` reads an undeclared or differently typed session variable",
                    p.name
                )));
            }
            params.push(Param { name: p.name.clone(), ty: p.ty.into(), source: p.source });
        }
        let param_decls: Vec<(String, Type)> = params.iter().map(|p| (p.name.clone(), p.ty)).collect();
        let mut scope = param_decls.clone();
        for (n, t) in &session {
            if !scope.iter().any(|(m, _)| m == n) {
                scope.push((n.clone(), *t));
            }
        }

        let guard = match &rp.guard {
            Some(g) => Contract::parse_declared(g, &scope).map_err(|e| contract_err(pname, "guard", e))?,
            None => Contract::always(),
        };
        let call_contract = match &rp.call_contract {
            Some(c) => {
                Contract::parse_declared(c, &param_decls).map_err(|e| contract_err(pname, "call_contract", e))?
            }
            None => Contract::always(),
        };
        let contract_params = call_contract
            .free_vars()
            .iter()
            .map(|(n, _)| params.iter().position(|p| p.name == *n).expect("declared"))
            .collect();

        let local_type = |var: &str| -> Option<Type> { scope.iter().find(|(n, _)| n == var).map(|(_, t)| *t) };
        let mut effects = Vec::new();
        for e in &rp.effects {
            effects.push(match e {
                RawEffect::Replace { var, pattern, replacement } => {
                    if local_type(var) != Some(Type::Str) {
                        return Err(SimError::Schema(format!("replace in `{pname}` targets non-string `{var}`")));
                    }
                    let r = parse_regex(pattern).map_err(|e| contract_err(pname, "replace pattern", e))?;
                    Effect::Replace {
                        var: var.clone(),
                        pattern: Arc::new(Dfa::compile(&r)),
                        replacement: replacement.clone(),
                    }
                }
                RawEffect::Set { var, value } => {
                    let value = Value::from(value.clone());
                    if local_type(var) != Some(value.ty()) {
                        return Err(SimError::Schema(format!("set in `{pname}` assigns a {} to `{var}`", value.ty())));
                    }
                    Effect::Set { var: var.clone(), value }
                }
                RawEffect::Store { session: s, from } => {
                    let st = session.iter().find(|(n, _)| n == s).map(|(_, t)| *t);
                    if st.is_none() || st != local_type(from) {
                        return Err(SimError::Schema(format!(
                            "store in `{pname}` of `{from}` into `{s}` is ill-typed"
                        )));
                    }
                    Effect::Store { session: s.clone(), from: from.clone() }
                }
            });
        }

        let mut sinks = Vec::new();
        for s in &rp.sinks {
            if !is_identifier(&s.signature) {
                return Err(SimError::Schema(format!("sink label `{}` is not an identifier", s.signature)));
            }
            for var in placeholders(&s.value)? {
                if local_type(&var).is_none() {
                    return Err(SimError::Schema(format!("sink in `{pname}` references unknown `{var}`")));
                }
            }
            sinks.push(Sink { signature: s.signature.clone(), template: s.value.clone() });
        }

        let mut controls: Vec<Control> = Vec::new();
        for c in &rp.page.controls {
            if controls.iter().any(|d| d.name == c.name) {
                return Err(SimError::Schema(format!("duplicate control `{}` on page `{pname}`", c.name)));
            }
            if c.w == 0 || c.h == 0 || c.x.saturating_add(c.w) > width || c.y.saturating_add(c.h) > height {
                return Err(SimError::Schema(format!("control `{}` on `{pname}` is outside the canvas", c.name)));
            }
            let kind = match c.kind {
                RawKind::TextField => ControlKind::TextField,
                RawKind::Button | RawKind::Link => {
                    let t = c
                        .target
                        .as_deref()
                        .ok_or_else(|| SimError::Schema(format!("control `{}` on `{pname}` has no target", c.name)))?;
                    let target = index(pname, t)?;
                    if matches!(c.kind, RawKind::Button) {
                        ControlKind::Button { target }
                    } else {
                        let tp = &raw.procedures[target].params;
                        let mut params = Vec::new();
                        for (k, v) in &c.params {
                            let v = Value::from(v.clone());
                            match tp.iter().find(|p| p.name == *k) {
                                Some(p) if Type::from(p.ty) == v.ty() => params.push((k.clone(), v)),
                                _ => {
                                    return Err(SimError::Schema(format!(
                                        "link `{}` on `{pname}` passes an ill-typed or unknown `{k}`",
                                        c.name
                                    )))
                                }
                            }
                        }
                        ControlKind::Link { target, params }
                    }
                }
            };
            controls.push(Control { name: c.name.clone(), x: c.x, y: c.y, w: c.w, h: c.h, kind });
        }

        let on_fail = rp.on_fail.as_deref().map(|t| index(pname, t)).transpose()?;
        procedures.push(Procedure {
            name: rp.name.clone(),
            params,
            guard,
            call_contract,
            contract_params,
            effects,
            on_fail,
            sinks,
            controls,
        });
    }

    Ok(AutModel { procedures, entry, width, height, max_input_len, session })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Variable names referenced as `${name}` in a sink template.
pub(crate) fn placeholders(template: &str) -> Result<Vec<String>, SimError> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find("${") {
        let after = &rest[start + 2..];
        let end =
            after.find('}').ok_or_else(|| SimError::Schema(format!("unterminated placeholder in `{template}`")))?;
        out.push(after[..end].to_string());
        rest = &after[end + 1..];
    }
    Ok(out)
}
