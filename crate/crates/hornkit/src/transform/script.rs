//! Rule histories as replayable scripts.
//!
//! One rule instance per line:
//!
//! ```text
//! define 0 - sp(X) :- X>=0, p(X).
//! unfold 3 0
//! fold 4 0,1 0
//! replace 2 X=2
//! simplify 5
//! delete-unsat
//! delete-useless
//! ```
//!
//! Replaying a script on the original program reproduces the transformed
//! program exactly, since clause identifiers are assigned deterministically.

use std::fmt;

use super::state::{ClauseId, DefId, DeleteMode, TransformState};
use super::TransformError;
use crate::syntax::{parse_clause, parse_constraint, Clause, LinearConstraint, Program};

/// An applied rule instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Define { def: DefId, parent: Option<DefId>, clause: Clause },
    Unfold { clause: ClauseId, pos: usize },
    Fold { clause: ClauseId, positions: Vec<usize>, def: DefId },
    Replace { clause: ClauseId, constraint: LinearConstraint },
    Simplify { clause: ClauseId },
    Delete(DeleteMode),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Define { def, parent, clause } => {
                let par = parent.map_or("-".to_string(), |p| p.to_string());
                write!(f, "define {def} {par} {clause}")
            }
            Step::Unfold { clause, pos } => write!(f, "unfold {clause} {pos}"),
            Step::Fold { clause, positions, def } => {
                let ps: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                write!(f, "fold {clause} {} {def}", ps.join(","))
            }
            Step::Replace { clause, constraint } => write!(f, "replace {clause} {constraint}"),
            Step::Simplify { clause } => write!(f, "simplify {clause}"),
            Step::Delete(DeleteMode::Unsat) => f.write_str("delete-unsat"),
            Step::Delete(DeleteMode::Useless) => f.write_str("delete-useless"),
        }
    }
}

/// Renders a history, one step per line.
pub fn to_script(steps: &[Step]) -> String {
    steps.iter().map(|s| format!("{s}\n")).collect()
}

fn bad(line: usize, msg: impl Into<String>) -> TransformError {
    TransformError::Script { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, s: Option<&str>) -> Result<T, TransformError> {
    s.and_then(|s| s.parse().ok()).ok_or_else(|| bad(line, "expected a number"))
}

/// Parses a script (blank lines and `%` comments are skipped).
pub fn parse_script(text: &str) -> Result<Vec<Step>, TransformError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('%') {
            continue;
        }
        let (cmd, rest) = l.split_once(' ').unwrap_or((l, ""));
        let mut words = rest.split_whitespace();
        let step = match cmd {
            "define" => {
                let def = num(line, words.next())?;
                let parent = match words.next() {
                    Some("-") => None,
                    p => Some(num(line, p)?),
                };
                let text = rest.splitn(3, ' ').nth(2).ok_or_else(|| bad(line, "missing clause"))?;
                let clause = parse_clause(text).map_err(|e| bad(line, e.to_string()))?;
                Step::Define { def, parent, clause }
            }
            "unfold" => Step::Unfold { clause: num(line, words.next())?, pos: num(line, words.next())? },
            "fold" => {
                let clause = num(line, words.next())?;
                let positions = words
                    .next()
                    .ok_or_else(|| bad(line, "missing positions"))?
                    .split(',')
                    .map(|p| num(line, Some(p)))
                    .collect::<Result<Vec<usize>, _>>()?;
                Step::Fold { clause, positions, def: num(line, words.next())? }
            }
            "replace" => {
                let clause = num(line, words.next())?;
                let text = rest.split_once(' ').map(|(_, t)| t).unwrap_or("");
                let constraint = parse_constraint(text).map_err(|e| bad(line, e.to_string()))?;
                Step::Replace { clause, constraint }
            }
            "simplify" => Step::Simplify { clause: num(line, words.next())? },
            "delete-unsat" => Step::Delete(DeleteMode::Unsat),
            "delete-useless" => Step::Delete(DeleteMode::Useless),
            other => return Err(bad(line, format!("unknown rule `{other}`"))),
        };
        out.push(step);
    }
    Ok(out)
}

impl TransformState {
    /// Applies one recorded step.
    pub fn apply(&mut self, step: &Step) -> Result<(), TransformError> {
        match step {
            Step::Define { def, parent, clause } => {
                let (got, _) = self.define(clause.clone(), *parent)?;
                if got != *def {
                    return Err(TransformError::NoSuchDefinition(*def));
                }
            }
            Step::Unfold { clause, pos } => {
                self.unfold(*clause, *pos)?;
            }
            Step::Fold { clause, positions, def } => self.fold(*clause, positions, *def)?,
            Step::Replace { clause, constraint } => self.replace(*clause, constraint.clone())?,
            Step::Simplify { clause } => self.simplify(*clause)?,
            Step::Delete(m) => self.delete(*m),
        }
        Ok(())
    }
}

/// Replays `steps` on `p` and audits the result.
pub fn replay(p: &Program, steps: &[Step]) -> Result<TransformState, TransformError> {
    let mut s = TransformState::new(p);
    for step in steps {
        s.apply(step)?;
    }
    s.audit()?;
    Ok(s)
}
