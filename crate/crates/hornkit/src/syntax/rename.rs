//! Fresh names and renaming apart.

use std::collections::{BTreeMap, BTreeSet};

use super::clause::{Clause, Pred};
use super::term::Var;

/// Source of variables that avoid a growing set of used names.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    used: BTreeSet<Var>,
}

impl Fresh {
    pub fn new(used: BTreeSet<Var>) -> Self {
        Fresh { used }
    }

    pub fn reserve(&mut self, v: &Var) {
        self.used.insert(v.clone());
    }

    pub fn reserve_all<'a, I: IntoIterator<Item = &'a Var>>(&mut self, vs: I) {
        for v in vs {
            self.reserve(v);
        }
    }

    pub fn is_used(&self, v: &Var) -> bool {
        self.used.contains(v)
    }

    /// A new variable derived from `base` (`X` gives `X1`, `X2`, …).
    pub fn var(&mut self, base: &str) -> Var {
        let v = fresh_name(base, |n| self.used.contains(&Var::new(n)));
        let v = Var::new(&v);
        self.used.insert(v.clone());
        v
    }
}

/// Strips trailing digits and appends the first free counter.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() || stem == "_" { "V" } else { stem };
    let mut k: u64 = 1;
    loop {
        let cand = format!("{stem}{k}");
        if !taken(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// A predicate name not in `taken`, derived from `base` by a numeric suffix
/// (`q` gives `q1`, `q1` gives `q2`).
pub fn fresh_pred(base: &str, taken: &BTreeSet<String>) -> Pred {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let start: u64 = base[stem.len()..].parse::<u64>().map(|n| n + 1).unwrap_or(1);
    let mut k = start;
    loop {
        let cand = format!("{stem}{k}");
        if !taken.contains(&cand) {
            return Pred::new(&cand);
        }
        k += 1;
    }
}

/// `base` itself when free, otherwise a suffixed variant.
pub fn fresh_pred_exact(base: &str, taken: &BTreeSet<String>) -> Pred {
    if taken.contains(base) {
        let mut k = 1;
        loop {
            let cand = format!("{base}_{k}");
            if !taken.contains(&cand) {
                return Pred::new(&cand);
            }
            k += 1;
        }
    }
    Pred::new(base)
}

/// Renames the variables of `c` that occur in `avoid`; the result shares no
/// variable with `avoid`.
pub fn rename_apart(c: &Clause, avoid: &BTreeSet<Var>) -> Clause {
    let vars = c.vars();
    if vars.is_disjoint(avoid) {
        return c.clone();
    }
    let mut fresh = Fresh::new(avoid.union(&vars).cloned().collect());
    let mut map = BTreeMap::new();
    for v in vars.iter().filter(|v| avoid.contains(v)) {
        map.insert(v.clone(), fresh.var(v.name()));
    }
    c.rename(&map)
}

/// Renames apart using and extending a shared `Fresh` pool, so successive
/// copies are pairwise disjoint.
pub fn rename_apart_with(c: &Clause, fresh: &mut Fresh) -> Clause {
    let mut map = BTreeMap::new();
    for v in c.vars() {
        if fresh.is_used(&v) {
            map.insert(v.clone(), fresh.var(v.name()));
        } else {
            fresh.reserve(&v);
        }
    }
    c.rename(&map)
}

/// Canonical argument variables `X1..Xn` used by models and facts.
pub fn canonical_vars(n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::new(&format!("X{i}"))).collect()
}
