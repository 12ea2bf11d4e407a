//! Sets of constrained facts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lin;
use crate::syntax::{canonical_vars, AtomicConstraint, Atom, Clause, LinearConstraint, LinearTerm, Mode, Pred, Program, Var};

/// Instantiates a constraint over the canonical variables `X1..Xn` on the
/// argument terms of an atom (simultaneous substitution).
pub fn instantiate(c: &LinearConstraint, args: &[LinearTerm]) -> LinearConstraint {
    let map: BTreeMap<Var, LinearTerm> = canonical_vars(args.len()).into_iter().zip(args.iter().cloned()).collect();
    c.substitute_all(&map)
}

/// A D-interpretation given by constrained facts `p(X1,…,Xn) :- c` with `c`
/// satisfiable and mentioning only the canonical variables.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Interpretation {
    facts: Vec<Clause>,
}

impl Interpretation {
    pub fn new() -> Self {
        Interpretation::default()
    }

    /// Builds the canonical fact for `head :- c` (projecting `c` onto the
    /// head arguments); `None` when `c` is unsatisfiable.
    pub fn canonical_fact(head: &Atom, c: &LinearConstraint) -> Option<Clause> {
        let xs = canonical_vars(head.arity());
        let clash: BTreeSet<Var> = xs.iter().cloned().collect();
        let mut vars = c.vars();
        head.collect_vars(&mut vars);
        let renaming: BTreeMap<Var, Var> = if vars.is_disjoint(&clash) {
            BTreeMap::new()
        } else {
            let mut fresh = crate::syntax::Fresh::new(vars.union(&clash).cloned().collect());
            vars.intersection(&clash).map(|v| (v.clone(), fresh.var("V"))).collect()
        };
        let head = head.rename(&renaming);
        let mut full = c.rename(&renaming);
        for (x, t) in xs.iter().zip(&head.args) {
            full.push(AtomicConstraint::eq(&LinearTerm::var(x.clone()), t));
        }
        let keep: BTreeSet<Var> = xs.iter().cloned().collect();
        let p = lin::proj(&full, &keep);
        if p.is_falsum() {
            return None;
        }
        Some(Clause::fact(Atom::with_vars(head.pred.clone(), &xs), p))
    }

    pub fn facts(&self) -> &[Clause] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn facts_for<'a>(&'a self, p: &'a Pred) -> impl Iterator<Item = &'a Clause> + 'a {
        self.facts.iter().filter(move |f| f.head_pred() == Some(p))
    }

    /// Some fact of the same predicate entails `fact`.
    pub fn subsumes(&self, fact: &Clause) -> bool {
        let Some(p) = fact.head_pred() else { return false };
        self.facts_for(p).any(|g| lin::entail(&fact.constraint, &g.constraint))
    }

    /// Adds a canonical fact unless it is subsumed; reports whether it was
    /// added.
    pub fn insert(&mut self, fact: Clause) -> bool {
        if self.subsumes(&fact) {
            return false;
        }
        self.facts.push(fact);
        true
    }

    /// Every fact of `self` is subsumed by a fact of `other`.
    pub fn subsumed_by(&self, other: &Interpretation) -> bool {
        self.facts.iter().all(|f| other.subsumes(f))
    }

    /// The disjunction of fact constraints for `p`, on the canonical
    /// variables.
    pub fn disjuncts(&self, p: &Pred) -> Vec<LinearConstraint> {
        self.facts_for(p).map(|f| f.constraint.clone()).collect()
    }

    pub fn to_program(&self, mode: Mode) -> Program {
        Program::new(self.facts.clone(), mode)
    }
}

impl FromIterator<Clause> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Clause>>(iter: I) -> Self {
        let mut out = Interpretation::new();
        for f in iter {
            if let Some(h) = f.head.atom() {
                if let Some(c) = Interpretation::canonical_fact(h, &f.constraint) {
                    out.insert(c);
                }
            }
        }
        out
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.facts {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
