//! Concrete semantics: symbolic bottom-up iteration of the immediate
//! consequence operator and breadth-first top-down derivation search.
//!
//! Facts are kept over canonical argument variables `X1..Xn` so that
//! subsumption between facts of one predicate is plain entailment.

mod bottom_up;
mod interp;
mod top_down;

pub use bottom_up::{goal_witness, kleene_lfp, tp_step, LfpResult};
pub use interp::{instantiate, Interpretation};
pub use top_down::{success_set_k, td_derive, DerivationOutcome, Success};

use crate::lin::{self, Verdict3};
use crate::syntax::{Mode, LinearConstraint};

/// Satisfiable in `mode`, counting an exhausted integer budget as
/// satisfiable (the sound choice for keeping derivations alive).
pub(crate) fn maybe_sat(c: &LinearConstraint, mode: Mode) -> bool {
    lin::check(c, mode) != Verdict3::Unsat
}
