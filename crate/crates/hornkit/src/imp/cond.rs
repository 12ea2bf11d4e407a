//! Boolean conditions over linear comparisons.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::term_vars;
use crate::syntax::{AtomicConstraint, LinearConstraint, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    Bool(bool),
    Cmp(AtomicConstraint),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

impl Cond {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            Cond::Bool(_) => {}
            Cond::Cmp(a) => out.extend(term_vars(a.expr())),
            Cond::Not(c) => c.collect(out),
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Cond {
        match self {
            Cond::Bool(b) => Cond::Bool(*b),
            Cond::Cmp(a) => Cond::Cmp(a.rename(map)),
            Cond::Not(c) => Cond::Not(Box::new(c.rename(map))),
            Cond::And(a, b) => Cond::And(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Cond::Or(a, b) => Cond::Or(Box::new(a.rename(map)), Box::new(b.rename(map))),
        }
    }

    /// Disjunctive normal form of the condition (`positive`) or of its
    /// negation; ground-false disjuncts are dropped.
    pub fn dnf(&self, positive: bool) -> Vec<LinearConstraint> {
        let raw = match (self, positive) {
            (Cond::Bool(b), p) => {
                if *b == p {
                    vec![LinearConstraint::top()]
                } else {
                    vec![]
                }
            }
            (Cond::Cmp(a), true) => vec![LinearConstraint::from_atoms([a.clone()])],
            (Cond::Cmp(a), false) => a.negation().into_iter().map(|n| LinearConstraint::from_atoms([n])).collect(),
            (Cond::Not(c), p) => c.dnf(!p),
            (Cond::And(a, b), true) | (Cond::Or(a, b), false) => {
                let (da, db) = (a.dnf(positive), b.dnf(positive));
                da.iter().flat_map(|x| db.iter().map(move |y| x.and(y))).collect()
            }
            (Cond::Or(a, b), true) | (Cond::And(a, b), false) => {
                let mut d = a.dnf(positive);
                d.extend(b.dnf(positive));
                d
            }
        };
        raw.into_iter().filter(|c| !c.is_falsum()).collect()
    }

    /// The condition as a single conjunction, if it is one.
    pub fn as_conjunction(&self) -> Option<LinearConstraint> {
        match self {
            Cond::Bool(true) => Some(LinearConstraint::top()),
            Cond::Bool(false) => Some(LinearConstraint::falsum()),
            Cond::Cmp(a) => Some(LinearConstraint::from_atoms([a.clone()])),
            Cond::And(a, b) => Some(a.as_conjunction()?.and(&b.as_conjunction()?)),
            _ => None,
        }
    }
}
