//! Query-answer transformation.
//!
//! For a goal `false :- c, A` every definite clause `H :- c, A1, …, An`
//! yields an answer clause `H^a :- c, H^q, A1^a, …, An^a` and, for each `j`,
//! a query clause `Aj^q :- c, H^q, A1^a, …, A(j-1)^a`. The seed
//! `A^q :- c` and the goal `false :- c, A^a` complete the encoding, whose
//! bottom-up evaluation mimics left-to-right top-down derivation from the
//! goal.

use std::collections::{BTreeMap, BTreeSet};

use super::TransformError;
use crate::syntax::{fresh_pred_exact, Atom, Clause, Head, LinearConstraint, Pred, Program};

/// Answer and query predicate names chosen for each original predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QaNames {
    pub answer: BTreeMap<Pred, Pred>,
    pub query: BTreeMap<Pred, Pred>,
}

/// Rewrites the goals of `p` into a single goal with a single 0-ary atom
/// `false :- goal.` (goal bodies become clauses for `goal`), unless `p`
/// already has exactly one goal with exactly one atom.
pub fn single_goal(p: &Program) -> Result<Program, TransformError> {
    let goals: Vec<&Clause> = p.goals().map(|(_, g)| g).collect();
    match goals.as_slice() {
        [] => return Err(TransformError::NoGoals),
        [g] if g.body.len() == 1 => return Ok(p.clone()),
        _ => {}
    }
    let w = fresh_pred_exact("goal", &p.pred_names());
    let mut out = Vec::new();
    let mut placed = false;
    for c in &p.clauses {
        if c.is_goal() {
            if !placed {
                out.push(Clause::goal(LinearConstraint::top(), vec![Atom::new(w.clone(), Vec::new())]));
                placed = true;
            }
            out.push(Clause::new(Head::Atom(Atom::new(w.clone(), Vec::new())), c.constraint.clone(), c.body.clone()));
        }
    }
    out.extend(p.clauses.iter().filter(|c| !c.is_goal()).cloned());
    Ok(Program::new(out, p.mode))
}

/// Query-answer transformation with respect to the `goal`-th goal of `p`
/// (other goals are not part of the encoding). A goal with several atoms is
/// first wrapped in a fresh 0-ary predicate.
pub fn qa_transform(p: &Program, goal: usize) -> Result<(Program, QaNames), TransformError> {
    let (_, g) = p.goals().nth(goal).ok_or(TransformError::NoSuchGoal(goal))?;
    if g.body.is_empty() {
        return Err(TransformError::EmptyGoal(goal));
    }
    let mut clauses: Vec<Clause> = p.definite().map(|(_, c)| c.clone()).collect();
    let g = if g.body.len() == 1 {
        g.clone()
    } else {
        let w = fresh_pred_exact("goal", &p.pred_names());
        let wa = Atom::new(w, Vec::new());
        clauses.push(Clause::new(Head::Atom(wa.clone()), g.constraint.clone(), g.body.clone()));
        Clause::goal(LinearConstraint::top(), vec![wa])
    };
    let inner = Program::new(clauses.clone(), p.mode);
    let mut taken: BTreeSet<String> = inner.pred_names();
    let mut names = QaNames::default();
    for (q, _) in inner.predicates() {
        let a = fresh_pred_exact(&format!("{q}_a"), &taken);
        taken.insert(a.name().to_string());
        let b = fresh_pred_exact(&format!("{q}_q"), &taken);
        taken.insert(b.name().to_string());
        names.answer.insert(q.clone(), a);
        names.query.insert(q, b);
    }
    let ans = |a: &Atom| Atom::new(names.answer[&a.pred].clone(), a.args.clone());
    let qry = |a: &Atom| Atom::new(names.query[&a.pred].clone(), a.args.clone());
    let target = &g.body[0];
    let mut out = vec![Clause::goal(g.constraint.clone(), vec![ans(target)])];
    for c in &clauses {
        let h = c.head.atom().expect("definite clause");
        let mut body = vec![qry(h)];
        body.extend(c.body.iter().map(ans));
        out.push(Clause::new(Head::Atom(ans(h)), c.constraint.clone(), body));
    }
    for c in &clauses {
        let h = c.head.atom().expect("definite clause");
        for (j, a) in c.body.iter().enumerate() {
            let mut body = vec![qry(h)];
            body.extend(c.body[..j].iter().map(ans));
            out.push(Clause::new(Head::Atom(qry(a)), c.constraint.clone(), body));
        }
    }
    out.push(Clause::fact(qry(target), g.constraint.clone()));
    Ok((Program::new(out, p.mode), names))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{facts_equivalent, programs_equivalent};
    use crate::eval::kleene_lfp;
    use crate::syntax::parse_program;

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    #[test]
    fn reproduces_the_worked_encoding() {
        let p = prog(
            ":- mode(int).
             false :- X=0, p(X).
             p(X) :- X=1.
             p(X) :- X>1, Y=X+1, p(Y).",
        );
        let (q, names) = qa_transform(&p, 0).unwrap();
        assert_eq!(names.answer[&Pred::new("p")].name(), "p_a");
        let want = prog(
            ":- mode(int).
             false :- X=0, p_a(X).
             p_a(X) :- X=1, p_q(X).
             p_a(X) :- X>1, Y=X+1, p_q(X), p_a(Y).
             p_q(Y) :- X>1, Y=X+1, p_q(X).
             p_q(X) :- X=0.",
        );
        assert_eq!(q.to_string(), want.to_string());
        let lfp = kleene_lfp(&q, 10);
        assert!(lfp.converged);
        assert!(facts_equivalent(&lfp.interpretation, &prog("p_q(X) :- X=0.")));
    }

    #[test]
    fn single_fact_program() {
        let (q, _) = qa_transform(&prog("p(X) :- X=1. false :- X=1, p(X)."), 0).unwrap();
        assert_eq!(q.len(), 3);
        assert!(programs_equivalent(&q, &prog("false :- X=1, p_a(X). p_a(X) :- X=1, p_q(X). p_q(X) :- X=1.")));
    }

    #[test]
    fn non_linear_clauses_link_queries_to_answers() {
        let p = prog("false :- p(X). p(X) :- X>0, r(Y), p(Z). r(Y) :- Y=0.");
        let (q, _) = qa_transform(&p, 0).unwrap();
        let defs = 1 + 2 + 1;
        assert_eq!(q.len(), 2 + defs);
        assert!(q.clauses.iter().any(|c| c.to_string() == "p_q(Z) :- X>0, p_q(X), r_a(Y)."));
        assert!(q.clauses.iter().any(|c| c.to_string() == "r_q(Y) :- X>0, p_q(X)."));
    }

    #[test]
    fn names_avoid_existing_predicates() {
        let (q, names) = qa_transform(&prog("false :- p(X). p(X) :- p_a(X). p_a(X) :- X=0."), 0).unwrap();
        assert_eq!(names.answer[&Pred::new("p")].name(), "p_a_1");
        assert_eq!(q.len(), 2 + 2 + 1);
    }

    #[test]
    fn goals_without_atoms_are_rejected_and_multi_atom_goals_wrapped() {
        assert!(matches!(qa_transform(&prog("false :- X>0."), 0), Err(TransformError::EmptyGoal(0))));
        let (q, _) = qa_transform(&prog("false :- X>Y, p(X), p(Y). p(X) :- X=0."), 0).unwrap();
        assert_eq!(q.clauses[0].to_string(), "false :- goal_a.");
        let s = single_goal(&prog("false :- p(X). false :- X>0, p(X), p(Y). p(X) :- X=0.")).unwrap();
        assert_eq!(s.to_string(), "false :- goal.\ngoal :- p(X).\ngoal :- X>0, p(X), p(Y).\np(X) :- X=0.\n");
    }
}
