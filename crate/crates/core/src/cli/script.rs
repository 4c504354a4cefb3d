//! Plain-text action scripts: one `click X Y` or `type "text"` per line.
//! Inside quotes, `\"` and `\\` escape a quote and a backslash. Blank lines
//! and lines starting with `#` are ignored.

use thiserror::Error;

use crate::sim::Action;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

pub fn format_script(actions: &[Action]) -> String {
    let mut out = String::new();
    for a in actions {
        match a {
            Action::Click { x, y } => out.push_str(&format!("click {x} {y}\n")),
            Action::Type(s) => {
                out.push_str("type \"");
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        out.push('\\');
                    }
                    out.push(c);
                }
                out.push_str("\"\n");
            }
        }
    }
    out
}

fn unquote(s: &str) -> Result<String, String> {
    let inner = s
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .filter(|_| s.len() >= 2)
        .ok_or("expected a quoted string")?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                Some(e) => return Err(format!("unknown escape \\{e}")),
                None => return Err("dangling backslash".into()),
            },
            '"' => return Err("unescaped quote inside string".into()),
            c => out.push(c),
        }
    }
    Ok(out)
}

fn parse_line(line: &str) -> Result<Action, String> {
    if let Some(rest) = line.strip_prefix("click ") {
        let nums: Vec<&str> = rest.split_whitespace().collect();
        let [x, y] = nums[..] else {
            return Err("click takes two coordinates".into());
        };
        let coord = |s: &str| s.parse::<u32>().map_err(|e| format!("bad coordinate {s:?}: {e}"));
        Ok(Action::Click { x: coord(x)?, y: coord(y)? })
    } else if let Some(rest) = line.strip_prefix("type ") {
        unquote(rest.trim()).map(Action::Type)
    } else {
        Err(format!("unknown action {line:?}"))
    }
}

pub fn parse_script(text: &str) -> Result<Vec<Action>, ScriptError> {
    let mut actions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        actions.push(parse_line(line).map_err(|message| ScriptError { line: i + 1, message })?);
    }
    Ok(actions)
}
