//! Satisfiability verdicts by bounded derivation search, Kleene iteration
//! or polyhedral analysis.

use serde::{Deserialize, Serialize};

use super::EngineSettings;
use crate::analyze::{check_goals, cpa_lfp};
use crate::eval::{goal_witness, kleene_lfp, td_derive, DerivationOutcome};
use crate::lin::Verdict3;
use crate::syntax::{Clause, Program};

/// How a verdict is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Top-down search for a refutation, then polyhedral analysis.
    #[default]
    Auto,
    /// Kleene iteration of the immediate-consequence operator.
    Bu,
    /// Bounded top-down derivations from each goal.
    Td,
    /// Polyhedral analysis and goal checking.
    Cpa,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Method::Auto),
            "bu" => Ok(Method::Bu),
            "td" => Ok(Method::Td),
            "cpa" => Ok(Method::Cpa),
            other => Err(format!("unknown method `{other}` (expected auto, bu, td or cpa)")),
        }
    }
}

/// A derivation of a goal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Index of the goal clause in the program.
    pub goal: usize,
    /// Constraint on the goal variables (or the body instance found
    /// bottom-up).
    pub constraint: String,
    /// Program clauses used, in order (empty for bottom-up witnesses).
    pub path: Vec<usize>,
}

/// Verdict with its evidence: a model (as constrained facts) for `sat`, a
/// witness for `unsat`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub verdict: Verdict3,
    pub model: Option<Program>,
    pub witness: Option<Witness>,
}

impl CheckResult {
    fn unknown() -> Self {
        CheckResult { verdict: Verdict3::Unknown, model: None, witness: None }
    }
}

fn top_down(p: &Program, depth: usize) -> CheckResult {
    let mut all_failed = true;
    for (idx, g) in p.goals() {
        match td_derive(p, g, depth) {
            DerivationOutcome::Successful(s) => {
                let witness = Witness { goal: idx, constraint: s.answer.to_string(), path: s.path };
                return CheckResult { verdict: Verdict3::Unsat, model: None, witness: Some(witness) };
            }
            DerivationOutcome::FinitelyFailed => {}
            DerivationOutcome::DepthExhausted { .. } => all_failed = false,
        }
    }
    if all_failed {
        CheckResult { verdict: Verdict3::Sat, model: None, witness: None }
    } else {
        CheckResult::unknown()
    }
}

fn bottom_up(p: &Program, iters: usize) -> CheckResult {
    let r = kleene_lfp(p, iters);
    if let Some((goal, k)) = goal_witness(p, &r.interpretation) {
        let witness = Witness { goal, constraint: k.to_string(), path: Vec::new() };
        return CheckResult { verdict: Verdict3::Unsat, model: None, witness: Some(witness) };
    }
    if r.converged {
        CheckResult { verdict: Verdict3::Sat, model: Some(Program::new(r.interpretation.facts().to_vec(), p.mode)), witness: None }
    } else {
        CheckResult::unknown()
    }
}

fn polyhedral(p: &Program, s: &EngineSettings) -> CheckResult {
    let r = cpa_lfp(p, &s.analysis);
    let goals: Vec<Clause> = p.goals().map(|(_, g)| g.clone()).collect();
    if r.stable && check_goals(&r.model, &goals).iter().all(|v| *v == Verdict3::Sat) {
        CheckResult { verdict: Verdict3::Sat, model: Some(r.model.to_program(p.mode)), witness: None }
    } else {
        CheckResult::unknown()
    }
}

/// Decides satisfiability of `p` with `method`. `unsat` always comes with
/// a derivation, `sat` with a finite search space or a model.
pub fn check_sat(p: &Program, method: Method, s: &EngineSettings) -> CheckResult {
    if p.goals().next().is_none() {
        return CheckResult { verdict: Verdict3::Sat, model: Some(Program::new(Vec::new(), p.mode)), witness: None };
    }
    match method {
        Method::Td => top_down(p, s.td_depth),
        Method::Bu => bottom_up(p, s.kleene_iters),
        Method::Cpa => polyhedral(p, s),
        Method::Auto => {
            let td = top_down(p, s.td_depth);
            match td.verdict {
                Verdict3::Unknown => polyhedral(p, s),
                _ => td,
            }
        }
    }
}
