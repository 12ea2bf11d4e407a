//! Constraint strengthening through the query-answer encoding.
//!
//! The polyhedral model of the answer predicate `p_a` over-approximates the
//! atoms `p(…)` used in any derivation of the goal, so conjoining it to the
//! clauses for `p` and before every call of `p` adds only consequences:
//! the result is satisfiable exactly when the input is.

use std::collections::BTreeMap;

use super::{qa_transform, single_goal, TransformError};
use crate::analyze::{cpa_lfp, AnalysisConfig};
use crate::eval::instantiate;
use crate::syntax::{Clause, LinearConstraint, Pred, Program};

#[derive(Clone, Debug)]
pub struct Strengthened {
    pub program: Program,
    /// Invariant per original predicate over `X1..Xn` (falsum when no
    /// answer can contribute to the goal).
    pub invariants: BTreeMap<Pred, LinearConstraint>,
    /// The analysis of the query-answer encoding reached a post-fixpoint;
    /// when it did not, the program is returned unchanged.
    pub stable: bool,
}

/// Query-answer transformation, polyhedral analysis, then conjunction of
/// the answer invariants into the original clauses.
pub fn strengthen(p: &Program, cfg: &AnalysisConfig) -> Result<Strengthened, TransformError> {
    let s = single_goal(p)?;
    let (q, names) = qa_transform(&s, 0)?;
    let r = cpa_lfp(&q, cfg);
    if !r.stable {
        return Ok(Strengthened { program: s, invariants: BTreeMap::new(), stable: false });
    }
    let invariants: BTreeMap<Pred, LinearConstraint> = names
        .answer
        .iter()
        .map(|(orig, ans)| (orig.clone(), r.model.get(ans).cloned().unwrap_or_else(LinearConstraint::falsum)))
        .collect();
    let clauses = s
        .clauses
        .iter()
        .map(|c| {
            let mut k = LinearConstraint::top();
            if let Some(h) = c.head.atom() {
                if let Some(d) = invariants.get(&h.pred) {
                    k.extend(&instantiate(d, &h.args));
                }
            }
            k.extend(&c.constraint);
            for a in &c.body {
                if let Some(d) = invariants.get(&a.pred) {
                    k.extend(&instantiate(d, &a.args));
                }
            }
            Clause { constraint: k, ..c.clone() }
        })
        .collect();
    Ok(Strengthened { program: Program::new(clauses, s.mode), invariants, stable: true })
}
