//! Symbolic execution state shared by both translations: source variables
//! map to linear terms over clause variables, path constraints and body
//! atoms accumulate, and clause variables are named after the source
//! variables they hold (`x` gives `X`, then `X1`, `X2`, …).

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Atom, AtomicConstraint, Fresh, LinearConstraint, LinearTerm, Pred, Var};

/// Clause-variable spelling of a source identifier.
pub(crate) fn cap(name: &str) -> String {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + cs.as_str(),
        None => "V".into(),
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Sym {
    fresh: Fresh,
    /// Capitalised source names; each may be handed out once unsuffixed.
    sources: BTreeSet<String>,
    claimed: BTreeSet<String>,
    env: BTreeMap<String, LinearTerm>,
    pub constraint: LinearConstraint,
    pub atoms: Vec<Atom>,
}

impl Sym {
    pub fn new<'a>(source_vars: impl IntoIterator<Item = &'a String>) -> Self {
        let sources: BTreeSet<String> = source_vars.into_iter().map(|v| cap(v)).collect();
        let mut fresh = Fresh::default();
        fresh.reserve_all(sources.iter().map(|s| Var::new(s)).collect::<Vec<_>>().iter());
        Sym {
            fresh,
            sources,
            claimed: BTreeSet::new(),
            env: BTreeMap::new(),
            constraint: LinearConstraint::top(),
            atoms: Vec::new(),
        }
    }

    /// A new clause variable named after `base`.
    pub fn new_var(&mut self, base: &str) -> Var {
        let b = cap(base);
        let v = Var::new(&b);
        if !self.claimed.contains(&b) && (self.sources.contains(&b) || !self.fresh.is_used(&v)) {
            self.claimed.insert(b);
            self.fresh.reserve(&v);
            v
        } else {
            let v = self.fresh.var(&b);
            self.claimed.insert(v.name().to_string());
            v
        }
    }

    /// Binds source variable `v` to a new clause variable.
    pub fn bind(&mut self, v: &str) -> Var {
        let x = self.new_var(v);
        self.env.insert(v.to_string(), LinearTerm::var(x.clone()));
        x
    }

    /// Current value of `v`; an unset variable gets an unconstrained one.
    pub fn read(&mut self, v: &str) -> LinearTerm {
        if let Some(t) = self.env.get(v) {
            return t.clone();
        }
        LinearTerm::var(self.bind(v))
    }

    pub fn eval(&mut self, t: &LinearTerm) -> LinearTerm {
        let map: BTreeMap<Var, LinearTerm> = t.vars().cloned().collect::<Vec<_>>().into_iter().map(|v| {
            let val = self.read(v.name());
            (v, val)
        }).collect();
        t.substitute_all(&map)
    }

    pub fn eval_constraint(&mut self, c: &LinearConstraint) -> LinearConstraint {
        let map: BTreeMap<Var, LinearTerm> = c.vars().into_iter().map(|v| {
            let val = self.read(v.name());
            (v, val)
        }).collect();
        c.substitute_all(&map)
    }

    pub fn assume(&mut self, c: &LinearConstraint) {
        let c = self.eval_constraint(c);
        self.constraint.extend(&c);
    }

    /// `v = t` for a source-level term `t`.
    pub fn assign(&mut self, v: &str, t: &LinearTerm) {
        let t = self.eval(t);
        self.set(v, t);
    }

    /// Binds `v` to a term over clause variables.
    pub fn set(&mut self, v: &str, t: LinearTerm) {
        self.env.insert(v.to_string(), t);
    }

    pub fn feasible(&self) -> bool {
        !self.constraint.is_falsum()
    }

    /// `t` as a clause variable: itself if it is one and not in `avoid`,
    /// otherwise a new variable equated to it.
    pub fn as_var(&mut self, t: LinearTerm, base: &str, avoid: &[Var]) -> Var {
        if let Some(v) = t.as_var() {
            if !avoid.contains(v) {
                return v.clone();
            }
        }
        let x = self.new_var(base);
        self.constraint.push(AtomicConstraint::eq(&LinearTerm::var(x.clone()), &t));
        x
    }

    /// Adds `pred(args)` with every argument turned into a variable.
    pub fn call(&mut self, pred: &Pred, args: Vec<(LinearTerm, String)>) -> Vec<Var> {
        let vars: Vec<Var> = args.into_iter().map(|(t, base)| self.as_var(t, &base, &[])).collect();
        self.atoms.push(Atom::with_vars(pred.clone(), &vars));
        vars
    }
}
