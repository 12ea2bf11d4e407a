//! Reversal of linear clause sets.
//!
//! Interchanging heads and bodies turns forward reachability from initial
//! states into backward reachability from error states and vice versa:
//! `false :- c, A` becomes the fact `A :- c`, a fact `A :- c` becomes the
//! goal `false :- c, A`, and `H :- c, B` becomes `B :- c, H`.

use super::TransformError;
use crate::syntax::{Clause, Head, Program};

/// Reverses every clause; fails on a clause with more than one body atom.
pub fn reverse(p: &Program) -> Result<Program, TransformError> {
    let mut out = Vec::with_capacity(p.len());
    for c in &p.clauses {
        if c.body.len() > 1 {
            return Err(TransformError::NonLinear(c.to_string()));
        }
        let r = match (&c.head, c.body.first()) {
            (Head::False, Some(a)) => Clause::fact(a.clone(), c.constraint.clone()),
            (Head::False, None) => c.clone(),
            (Head::Atom(h), None) => Clause::goal(c.constraint.clone(), vec![h.clone()]),
            (Head::Atom(h), Some(b)) => Clause::new(Head::Atom(b.clone()), c.constraint.clone(), vec![h.clone()]),
        };
        out.push(r);
    }
    Ok(Program::new(out, p.mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const FORWARD: &str = "
        false :- error(St), reach(St).
        reach(St) :- init(St).
        reach(St1) :- tr(St,St1), reach(St).";

    #[test]
    fn forward_reachability_becomes_backward() {
        // the transition relation is inlined as a constraint to stay linear
        let p = parse_program(
            "false :- St>=10, reach(St).
             reach(St) :- St=0.
             reach(St1) :- St1=St+1, reach(St).",
        )
        .unwrap();
        let r = reverse(&p).unwrap();
        assert_eq!(
            r.to_string(),
            "reach(St) :- St>=10.\nfalse :- St=0, reach(St).\nreach(St) :- St1=St+1, reach(St1).\n"
        );
        assert_eq!(reverse(&r).unwrap(), p);
    }

    #[test]
    fn non_linear_programs_are_rejected() {
        assert!(matches!(reverse(&parse_program(FORWARD).unwrap()), Err(TransformError::NonLinear(_))));
        assert!(reverse(&parse_program("p(X) :- q(X), r(X).").unwrap()).is_err());
    }
}
