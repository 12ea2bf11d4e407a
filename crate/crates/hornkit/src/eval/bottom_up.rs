//! Symbolic immediate-consequence operator and its Kleene iteration.

use super::interp::{instantiate, Interpretation};
use super::maybe_sat;
use crate::syntax::{Clause, LinearConstraint, Mode, Program};

/// Every satisfiable combination of facts for the body atoms of `c`, as the
/// conjoined constraint.
fn body_instances(c: &Clause, i: &Interpretation, mode: Mode) -> Vec<LinearConstraint> {
    let mut partial = vec![c.constraint.clone()];
    let last = c.body.len().saturating_sub(1);
    for (k, a) in c.body.iter().enumerate() {
        let facts: Vec<&Clause> = i.facts_for(&a.pred).collect();
        let mut next = Vec::new();
        for acc in &partial {
            for f in &facts {
                let cand = acc.and(&instantiate(&f.constraint, &a.args));
                // prune early only when more atoms follow
                if k == last || maybe_sat(&cand, mode) {
                    next.push(cand);
                }
            }
        }
        partial = next;
        if partial.is_empty() {
            break;
        }
    }
    partial.retain(|k| maybe_sat(k, mode));
    partial
}

/// One application of the immediate-consequence operator (not cumulative).
pub fn tp_step(p: &Program, i: &Interpretation) -> Interpretation {
    let mut out = Interpretation::new();
    for (_, c) in p.definite() {
        let head = c.head.atom().expect("definite clause");
        for k in body_instances(c, i, p.mode) {
            if let Some(f) = Interpretation::canonical_fact(head, &k) {
                out.insert(f);
            }
        }
    }
    out
}

/// A goal whose body is satisfiable under `i`, with the witnessing
/// constraint.
pub fn goal_witness(p: &Program, i: &Interpretation) -> Option<(usize, LinearConstraint)> {
    p.goals().find_map(|(idx, g)| body_instances(g, i, p.mode).into_iter().next().map(|k| (idx, k)))
}

/// Result of bounded Kleene iteration.
#[derive(Clone, Debug)]
pub struct LfpResult {
    pub interpretation: Interpretation,
    pub converged: bool,
    /// Iterations that added at least one fact.
    pub iterations: usize,
}

/// Iterates `I ↦ I ∪ T_P(I)` from the empty interpretation, pruning facts
/// subsumed by an existing fact of the same predicate.
pub fn kleene_lfp(p: &Program, max_iters: usize) -> LfpResult {
    let mut interp = Interpretation::new();
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        let step = tp_step(p, &interp);
        let mut added = false;
        for f in step.facts().iter().cloned() {
            added |= interp.insert(f);
        }
        if !added {
            converged = true;
            break;
        }
        iterations += 1;
    }
    LfpResult { interpretation: interp, converged, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::facts_equivalent;
    use crate::syntax::parse_program;

    const SUM_UPTO: &str = "
        false :- M>Sum, M>=0, sum_upto(M,Sum).
        sum_upto(X,R) :- R0=0, while(X,R0,R).
        while(X1,R1,R) :- X1>0, R2=R1+X1, X2=X1-1, while(X2,R2,R).
        while(X1,R1,R) :- X1=<0, R=R1.";

    const EXAMPLE: &str = ":- mode(int).
        p(X+3,X) :- X<3.
        p(X+3,Y) :- X>3, p(X,Y).";

    #[test]
    fn first_step_of_sum_upto() {
        let p = parse_program(SUM_UPTO).unwrap();
        let i = tp_step(&p, &Interpretation::new());
        assert!(facts_equivalent(&i, &parse_program("while(X,R1,R) :- X=<0, R=R1.").unwrap()));
    }

    #[test]
    fn first_step_of_example() {
        let p = parse_program(EXAMPLE).unwrap();
        let i = tp_step(&p, &Interpretation::new());
        assert!(facts_equivalent(&i, &parse_program("p(A,X) :- A=X+3, X<3.").unwrap()));
        let empty = parse_program("p(X) :- q(X).").unwrap();
        assert!(tp_step(&empty, &Interpretation::new()).is_empty());
    }

    #[test]
    fn unbounded_chain_does_not_converge() {
        let p = parse_program(SUM_UPTO).unwrap();
        let r = kleene_lfp(&p, 5);
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }

    #[test]
    fn finite_model_converges() {
        let p = parse_program("q(X) :- X=0. r(X) :- X=Y+1, q(Y). s(X) :- r(X), q(Y).").unwrap();
        let r = kleene_lfp(&p, 10);
        assert!(r.converged);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.interpretation.len(), 3);
    }

    #[test]
    fn goal_witness_fires_on_satisfiable_body() {
        let p = parse_program("p(X) :- X>0. false :- X<0, p(X). false :- X>5, p(X).").unwrap();
        let r = kleene_lfp(&p, 5);
        let (idx, _) = goal_witness(&p, &r.interpretation).unwrap();
        assert_eq!(idx, 2);
    }
}
