//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! name fusion-cross-pair          (optional)
//! boxes 4
//! init (1,2)=even (3,4)=even
//! braid 2 3 ccw
//! measure 2 3
//! joint (1,2) (3,4)
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::parity::Parity;
use crate::protocol::{Direction, PairSpec, ProtocolStep, Scenario, ValidationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ValidationError),
}

fn syntax(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Syntax { line, message: message.into() }
}

fn parse_index(line: usize, token: &str) -> Result<usize, ScenarioError> {
    token.trim().parse::<usize>().map_err(|_| syntax(line, format!("expected a box number, found `{token}`")))
}

/// Parses `(a,b)` into a canonical pair.
fn parse_paren_pair(line: usize, token: &str) -> Result<PairSpec, ScenarioError> {
    let inner = token
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| syntax(line, format!("expected `(a,b)`, found `{token}`")))?;
    let (x, y) = inner.split_once(',').ok_or_else(|| syntax(line, format!("expected `(a,b)`, found `{token}`")))?;
    let (x, y) = (parse_index(line, x)?, parse_index(line, y)?);
    PairSpec::new(x, y).map_err(|e| syntax(line, e.to_string()))
}

/// Splits a line into tokens, keeping `( a , b )` groups together.
fn tokenize(body: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for ch in body.chars() {
        match ch {
            '(' => {
                depth += 1;
                current.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c if c.is_whitespace() => {}
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    // glue `(1,2) = even` written with spaces around `=`
    let mut glued: Vec<String> = Vec::with_capacity(tokens.len());
    for t in tokens {
        match glued.last_mut() {
            Some(prev) if prev.ends_with('=') || t.starts_with('=') => prev.push_str(&t),
            _ => glued.push(t),
        }
    }
    glued
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut name: Option<String> = None;
    let mut box_count: Option<usize> = None;
    let mut steps = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (keyword, rest) = match body.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (body, ""),
        };
        match keyword.to_ascii_lowercase().as_str() {
            "name" => {
                if rest.is_empty() {
                    return Err(syntax(line, "`name` needs a label"));
                }
                name = Some(rest.to_string());
            }
            "boxes" => {
                if box_count.is_some() {
                    return Err(syntax(line, "`boxes` given twice"));
                }
                let n = parse_index(line, rest)?;
                if n == 0 || n % 2 != 0 {
                    return Err(syntax(line, format!("box count must be positive and even, got {n}")));
                }
                box_count = Some(n);
            }
            "init" => {
                let mut pairs = Vec::new();
                for tok in tokenize(rest) {
                    let (p, parity) = tok
                        .split_once('=')
                        .ok_or_else(|| syntax(line, format!("expected `(a,b)=even|odd`, found `{tok}`")))?;
                    let parity: Parity = parity.parse().map_err(|e: String| syntax(line, e))?;
                    pairs.push((parse_paren_pair(line, p)?, parity));
                }
                if pairs.is_empty() {
                    return Err(syntax(line, "`init` needs at least one pair"));
                }
                steps.push(ProtocolStep::Init { pairs });
            }
            "braid" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(syntax(line, "expected `braid <a> <b> <ccw|cw>`"));
                }
                let (x, y) = (parse_index(line, toks[0])?, parse_index(line, toks[1])?);
                let direction: Direction = toks[2].parse().map_err(|e: String| syntax(line, e))?;
                let pair = PairSpec::new(x, y).map_err(|e| syntax(line, e.to_string()))?;
                steps.push(ProtocolStep::Braid { pair, direction });
            }
            "measure" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(syntax(line, "expected `measure <a> <b>`"));
                }
                let (x, y) = (parse_index(line, toks[0])?, parse_index(line, toks[1])?);
                let pair = PairSpec::new(x, y).map_err(|e| syntax(line, e.to_string()))?;
                steps.push(ProtocolStep::MeasurePair { pair });
            }
            "joint" => {
                let toks = tokenize(rest);
                if toks.len() != 2 {
                    return Err(syntax(line, "expected `joint (<a>,<b>) (<c>,<d>)`"));
                }
                steps.push(ProtocolStep::JointMeasure {
                    first: parse_paren_pair(line, &toks[0])?,
                    second: parse_paren_pair(line, &toks[1])?,
                });
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
        if box_count.is_none() && !steps.is_empty() {
            return Err(syntax(line, "`boxes` must come before the first step"));
        }
    }

    let box_count = box_count.ok_or_else(|| syntax(text.lines().count().max(1), "missing `boxes` line"))?;
    let scenario = Scenario { name: name.unwrap_or_default(), box_count, steps };
    scenario.validate()?;
    Ok(scenario)
}

pub fn render_scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    if !scenario.name.is_empty() {
        let _ = writeln!(out, "name {}", scenario.name);
    }
    let _ = writeln!(out, "boxes {}", scenario.box_count);
    for step in &scenario.steps {
        match step {
            ProtocolStep::Init { pairs } => {
                out.push_str("init");
                for (p, parity) in pairs {
                    let _ = write!(out, " {p}={parity}");
                }
                out.push('\n');
            }
            ProtocolStep::Braid { pair, direction } => {
                let _ = writeln!(out, "braid {} {} {direction}", pair.a(), pair.b());
            }
            ProtocolStep::MeasurePair { pair } => {
                let _ = writeln!(out, "measure {} {}", pair.a(), pair.b());
            }
            ProtocolStep::JointMeasure { first, second } => {
                let _ = writeln!(out, "joint {first} {second}");
            }
        }
    }
    out
}
