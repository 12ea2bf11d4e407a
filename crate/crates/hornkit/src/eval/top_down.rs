//! Top-down derivations: leftmost computation rule, breadth-first search over
//! clause choices, eager satisfiability checks after every rewriting.

use std::collections::BTreeSet;

use serde::Serialize;

use super::interp::Interpretation;
use crate::lin::{self, SamplePoint, Verdict3};
use crate::syntax::{rename_apart, Atom, AtomicConstraint, Clause, LinearConstraint, Mode, Program, Var};

/// A successful derivation.
#[derive(Clone, Debug, Serialize)]
pub struct Success {
    /// Final constraint projected onto the goal variables.
    #[serde(serialize_with = "crate::eval::top_down::ser_display")]
    pub answer: LinearConstraint,
    /// Indices of the program clauses used, in order.
    pub path: Vec<usize>,
    /// A model of the full final constraint.
    #[serde(skip)]
    pub sample: Option<SamplePoint>,
}

pub(crate) fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug)]
pub enum DerivationOutcome {
    Successful(Success),
    /// Every derivation fails within the bound.
    FinitelyFailed,
    /// Open derivations remain at the depth bound (or some constraint could
    /// not be decided).
    DepthExhausted { frontier: usize },
}

#[derive(Clone)]
struct Node {
    atoms: Vec<Atom>,
    constraint: LinearConstraint,
    path: Vec<usize>,
}

impl Node {
    fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.constraint.vars();
        for a in &self.atoms {
            a.collect_vars(&mut out);
        }
        out
    }
}

enum Child {
    Open(Node),
    Closed(Node, Verdict3),
}

/// All r-rewritings of the leftmost atom of `node`, with eager c-rewriting.
/// Returns the children and whether some constraint was undecided.
fn expand(p: &Program, node: &Node, goal_vars: &BTreeSet<Var>) -> (Vec<Child>, bool) {
    let mut out = Vec::new();
    let mut undecided = false;
    let (sel, rest) = node.atoms.split_first().expect("open node has atoms");
    let mut avoid = node.vars();
    avoid.extend(goal_vars.iter().cloned());
    for (idx, c) in p.defining(&sel.pred) {
        let c = rename_apart(c, &avoid);
        let head = c.head.atom().expect("defining clause");
        let mut k = node.constraint.and(&c.constraint);
        for (h, a) in head.args.iter().zip(&sel.args) {
            k.push(AtomicConstraint::eq(h, a));
        }
        let verdict = lin::check(&k, p.mode);
        if verdict == Verdict3::Unsat {
            continue;
        }
        let mut atoms = c.body.clone();
        atoms.extend(rest.iter().cloned());
        let mut path = node.path.clone();
        path.push(idx);
        if atoms.is_empty() {
            if verdict == Verdict3::Unknown {
                undecided = true;
            }
            out.push(Child::Closed(Node { atoms, constraint: k, path }, verdict));
            continue;
        }
        if p.mode == Mode::Rational {
            let mut keep = goal_vars.clone();
            for a in &atoms {
                a.collect_vars(&mut keep);
            }
            k = lin::proj(&k, &keep);
        }
        out.push(Child::Open(Node { atoms, constraint: k, path }));
    }
    (out, undecided)
}

fn success(node: Node, goal_vars: &BTreeSet<Var>, mode: Mode) -> Success {
    let sample = lin::solv(&node.constraint, mode, lin::DEFAULT_BRANCH_BUDGET).1;
    Success { answer: lin::proj(&node.constraint, goal_vars), path: node.path, sample }
}

/// Searches the derivation tree of `goal` up to `max_depth` r-rewritings.
pub fn td_derive(p: &Program, goal: &Clause, max_depth: usize) -> DerivationOutcome {
    let goal_vars = goal.vars();
    let root = Node { atoms: goal.body.clone(), constraint: goal.constraint.clone(), path: Vec::new() };
    match lin::check(&root.constraint, p.mode) {
        Verdict3::Unsat => return DerivationOutcome::FinitelyFailed,
        Verdict3::Sat if root.atoms.is_empty() => return DerivationOutcome::Successful(success(root, &goal_vars, p.mode)),
        Verdict3::Unknown if root.atoms.is_empty() => return DerivationOutcome::DepthExhausted { frontier: 1 },
        _ => {}
    }
    let mut frontier = vec![root];
    let mut undecided = false;
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for node in &frontier {
            let (children, u) = expand(p, node, &goal_vars);
            undecided |= u;
            for ch in children {
                match ch {
                    Child::Closed(n, Verdict3::Sat) => {
                        return DerivationOutcome::Successful(success(n, &goal_vars, p.mode));
                    }
                    Child::Closed(..) => {}
                    Child::Open(n) => next.push(n),
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            return if undecided { DerivationOutcome::DepthExhausted { frontier: 0 } } else { DerivationOutcome::FinitelyFailed };
        }
    }
    DerivationOutcome::DepthExhausted { frontier: frontier.len() }
}

/// Constrained facts for `pattern` from successful derivations of at most
/// `k` r-rewritings.
pub fn success_set_k(p: &Program, pattern: &Atom, k: usize) -> Interpretation {
    let goal_vars = pattern.vars();
    let mut out = Interpretation::new();
    let mut frontier = vec![Node { atoms: vec![pattern.clone()], constraint: LinearConstraint::top(), path: Vec::new() }];
    for _ in 0..k {
        let mut next = Vec::new();
        for node in &frontier {
            for ch in expand(p, node, &goal_vars).0 {
                match ch {
                    Child::Closed(n, Verdict3::Sat) => {
                        if let Some(f) = Interpretation::canonical_fact(pattern, &n.constraint) {
                            out.insert(f);
                        }
                    }
                    Child::Closed(..) => {}
                    Child::Open(n) => next.push(n),
                }
            }
        }
        frontier = next;
    }
    out
}
