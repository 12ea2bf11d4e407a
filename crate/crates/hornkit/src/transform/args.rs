//! Redundant argument filtering.
//!
//! [`raf`] erases argument positions that no caller inspects: at every call
//! site the argument is a variable that is otherwise unused. [`far`] erases
//! positions that no defining clause restricts: in every clause the head
//! argument is a variable that is otherwise unused. Both compute the
//! greatest set of erasable positions by iterating the syntactic condition
//! to a fixpoint, then rename every affected predicate with a numeric
//! suffix.

use std::collections::{BTreeMap, BTreeSet};

use crate::lin::{self, Verdict3};
use crate::syntax::{fresh_pred, Atom, Clause, Head, LinearConstraint, LinearTerm, Mode, Pred, Program, Var};

type Positions = BTreeSet<(Pred, usize)>;

fn all_positions(p: &Program) -> Positions {
    p.predicates().into_iter().flat_map(|(q, n)| (0..n).map(move |k| (q.clone(), k))).collect()
}

fn occurrences(args: &[LinearTerm], v: &Var) -> usize {
    args.iter().filter(|t| t.mentions(v)).count()
}

fn head_args(c: &Clause) -> &[LinearTerm] {
    c.head.atom().map_or(&[], |h| h.args.as_slice())
}

/// Drops erased positions and renames the affected predicates.
fn erase(p: &Program, erased: &Positions) -> Program {
    let mut taken = p.pred_names();
    let mut rename: BTreeMap<Pred, Pred> = BTreeMap::new();
    for (q, _) in p.predicates() {
        if erased.iter().any(|(r, _)| r == &q) {
            let n = fresh_pred(q.name(), &taken);
            taken.insert(n.name().to_string());
            rename.insert(q, n);
        }
    }
    let atom = |a: &Atom| match rename.get(&a.pred) {
        None => a.clone(),
        Some(n) => Atom::new(
            n.clone(),
            a.args.iter().enumerate().filter(|(k, _)| !erased.contains(&(a.pred.clone(), *k))).map(|(_, t)| t.clone()).collect(),
        ),
    };
    let clauses = p
        .clauses
        .iter()
        .map(|c| {
            let head = match &c.head {
                Head::False => Head::False,
                Head::Atom(h) => Head::Atom(atom(h)),
            };
            Clause::new(head, c.constraint.clone(), c.body.iter().map(atom).collect())
        })
        .collect();
    Program::new(clauses, p.mode)
}

/// Argument positions whose values no caller inspects, erased top-down.
pub fn raf(p: &Program) -> Program {
    let mut keep = all_positions(p);
    loop {
        let mut changed = false;
        for c in &p.clauses {
            let cvars = c.constraint.vars();
            let body_args: Vec<LinearTerm> = c.body.iter().flat_map(|a| a.args.iter().cloned()).collect();
            let head_ok = |v: &Var, keep: &Positions| match c.head.atom() {
                None => true,
                Some(h) => h.args.iter().enumerate().all(|(i, t)| {
                    !t.mentions(v) || (t.as_var() == Some(v) && keep.contains(&(h.pred.clone(), i)))
                }),
            };
            for a in &c.body {
                for (k, t) in a.args.iter().enumerate() {
                    let pos = (a.pred.clone(), k);
                    if !keep.contains(&pos) {
                        continue;
                    }
                    let ok = match t.as_var() {
                        Some(v) => !cvars.contains(v) && occurrences(&body_args, v) == 1 && head_ok(v, &keep),
                        None => false,
                    };
                    if !ok {
                        keep.remove(&pos);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    erase(p, &keep)
}

/// Argument positions that no defining clause restricts, erased bottom-up,
/// with [`cleanup`] before and after.
pub fn far(p: &Program) -> Program {
    let p = cleanup(p);
    let mut keep = all_positions(&p);
    loop {
        let mut changed = false;
        for c in &p.clauses {
            let Some(h) = c.head.atom() else { continue };
            let cvars = c.constraint.vars();
            for (k, t) in h.args.iter().enumerate() {
                let pos = (h.pred.clone(), k);
                if !keep.contains(&pos) {
                    continue;
                }
                let ok = match t.as_var() {
                    Some(v) => {
                        occurrences(head_args(c), v) == 1
                            && !cvars.contains(v)
                            && c.body.iter().all(|a| {
                                a.args.iter().enumerate().all(|(i, u)| !u.mentions(v) || keep.contains(&(a.pred.clone(), i)))
                            })
                    }
                    None => false,
                };
                if !ok {
                    keep.remove(&pos);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    cleanup(&erase(&p, &keep))
}

/// Removes constraint information on clause-local variables. Over the
/// rationals the constraint is projected onto the head and body-atom
/// variables; over the integers only satisfiable groups of conjuncts
/// sharing no variable with them are dropped.
pub fn cleanup(p: &Program) -> Program {
    let clauses = p
        .clauses
        .iter()
        .map(|c| {
            let iface = c.interface_vars();
            let k = match p.mode {
                Mode::Rational => lin::proj(&c.constraint, &iface),
                Mode::Integer => drop_local_components(&c.constraint, &iface),
            };
            Clause { constraint: k, ..c.clone() }
        })
        .collect();
    Program::new(clauses, p.mode)
}

fn drop_local_components(c: &LinearConstraint, iface: &BTreeSet<Var>) -> LinearConstraint {
    if c.is_falsum() {
        return c.clone();
    }
    // variables connected to the interface through shared conjuncts
    let mut reached = iface.clone();
    loop {
        let before = reached.len();
        for a in c.conjuncts() {
            if a.vars().any(|v| reached.contains(v)) {
                reached.extend(a.vars().cloned());
            }
        }
        if reached.len() == before {
            break;
        }
    }
    let (linked, local): (Vec<_>, Vec<_>) =
        c.conjuncts().iter().cloned().partition(|a| a.vars().any(|v| reached.contains(v)) || a.vars().next().is_none());
    let local = LinearConstraint::from_atoms(local);
    if local.is_top() || lin::check(&local, Mode::Integer) != Verdict3::Sat {
        return c.clone();
    }
    LinearConstraint::from_atoms(linked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    #[test]
    fn filtering_chain_reduces_to_a_propositional_program() {
        let p = prog("false :- X>0, q(X,Y). q(X,Y) :- X<Y.");
        let r = raf(&p);
        assert_eq!(r.to_string(), "false :- X>0, q1(X).\nq1(X) :- X<Y.\n");
        assert_eq!(cleanup(&r).clauses[1].to_string(), "q1(X).");
        let f = far(&r);
        assert_eq!(f.to_string(), "false :- q2.\nq2.\n");
    }

    #[test]
    fn constrained_arguments_are_kept() {
        let p = prog("false :- X>0, Y<X, q(X,Y). q(X,Y) :- X<Y.");
        assert_eq!(raf(&p), p);
        let g = prog("p(X) :- X=1. q(X,Y) :- X=Y.");
        assert_eq!(far(&g), g);
    }

    #[test]
    fn far_is_idempotent() {
        let p = prog("false :- X>0, Z=1, r(X,Z,W). r(X,Z,W) :- X>Z, s(W). s(W) :- true.");
        let once = far(&p);
        assert_eq!(once.to_string(), "false :- Z=1, X>0, r1(X,Z).\nr1(X,Z) :- Z<X, s1.\ns1.\n");
        assert_eq!(far(&once), once);
    }

    #[test]
    fn integer_cleanup_keeps_parity_information() {
        let p = prog(":- mode(int). q(X) :- X=2*Y. r(X) :- X>0, 2*Z=1.");
        let c = cleanup(&p);
        assert_eq!(c.clauses[0], p.clauses[0]);
        // an integer-unsatisfiable local group must stay
        assert_eq!(c.clauses[1], p.clauses[1]);
        let s = cleanup(&prog(":- mode(int). r(X) :- X>0, Z>3."));
        assert_eq!(s.to_string(), ":- mode(int).\nr(X) :- X>0.\n");
    }
}
