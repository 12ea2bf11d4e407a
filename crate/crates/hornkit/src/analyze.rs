//! Bottom-up abstract interpretation over convex polyhedra, goal checking
//! and model verification.
//!
//! Each predicate is abstracted by one constraint over `X1..Xn` (or bottom).
//! Strongly connected components are solved callees first; inside a
//! component predicates are updated in place until nothing changes. The
//! first value of a predicate comes straight from bottom, the next
//! `widening_delay` updates join by convex hull, and later updates replace
//! the old value `a` by `a ∇ hull(a, new)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eval::{instantiate, Interpretation};
use crate::lin::{self, Verdict3};
use crate::syntax::deps::sccs;
use crate::syntax::{canonical_vars, Atom, Clause, LinearConstraint, Mode, Pred, Program};

/// One polyhedron per predicate over its canonical argument variables;
/// `None` is bottom.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct PolyModel {
    entries: BTreeMap<Pred, (usize, Option<LinearConstraint>)>,
}

/// A model entry in report form.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelEntry {
    pub predicate: String,
    pub arity: usize,
    pub constraint: String,
    pub status: String,
}

impl PolyModel {
    /// All predicates of `p` at bottom.
    pub fn bottom(p: &Program) -> Self {
        PolyModel { entries: p.predicates().into_iter().map(|(q, n)| (q, (n, None))).collect() }
    }

    pub fn get(&self, p: &Pred) -> Option<&LinearConstraint> {
        self.entries.get(p).and_then(|(_, c)| c.as_ref())
    }

    pub fn set(&mut self, p: Pred, arity: usize, c: Option<LinearConstraint>) {
        self.entries.insert(p, (arity, c));
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Pred, usize)> {
        self.entries.iter().map(|(p, (n, _))| (p, *n))
    }

    /// The non-bottom entries as constrained facts.
    pub fn to_program(&self, mode: Mode) -> Program {
        let clauses = self
            .entries
            .iter()
            .filter_map(|(p, (n, c))| c.as_ref().map(|c| Clause::fact(Atom::with_vars(p.clone(), &canonical_vars(*n)), c.clone())))
            .collect();
        Program::new(clauses, mode)
    }

    pub fn entries(&self) -> Vec<ModelEntry> {
        self.entries
            .iter()
            .map(|(p, (n, c))| ModelEntry {
                predicate: p.name().to_string(),
                arity: *n,
                constraint: c.as_ref().map_or_else(|| "false".to_string(), |c| c.to_string()),
                status: if c.is_some() { "reached" } else { "bottom" }.to_string(),
            })
            .collect()
    }

    fn disjuncts(&self, p: &Pred) -> Vec<LinearConstraint> {
        self.get(p).into_iter().cloned().collect()
    }
}

impl fmt::Display for PolyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, (n, c)) in &self.entries {
            let head = Atom::with_vars(p.clone(), &canonical_vars(*n));
            match c {
                Some(c) => writeln!(f, "{}", Clause::fact(head, c.clone()))?,
                None => writeln!(f, "{head} :- false.")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// How the images of the clauses of a predicate are joined.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Join {
    /// Fold the old value and each clause image through binary hulls.
    #[default]
    Hull,
    /// Collect all clause images first and take one n-ary hull with the old
    /// value.
    UnionThenHull,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub widening_delay: usize,
    pub join: Join,
    /// Bound on rounds per component.
    pub max_iters: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { widening_delay: 1, join: Join::Hull, max_iters: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct CpaResult {
    pub model: PolyModel,
    /// Every component reached a post-fixpoint within the round bound.
    pub stable: bool,
    /// Total rounds over all components.
    pub iterations: usize,
}

/// The body constraint of `c` with model constraints for the body atoms;
/// `None` when some body atom is at bottom.
fn body_under(c: &Clause, m: &PolyModel) -> Option<LinearConstraint> {
    let mut k = c.constraint.without_disequalities();
    for a in &c.body {
        k.extend(&instantiate(m.get(&a.pred)?, &a.args));
    }
    Some(k)
}

/// Image of one clause under the model, on the head's canonical variables.
/// In integer mode strict bounds are tightened before and after projection.
fn clause_image(c: &Clause, m: &PolyModel, mode: Mode) -> Option<LinearConstraint> {
    let mut k = body_under(c, m)?;
    let head = c.head.atom()?;
    if mode == Mode::Integer {
        k = lin::tighten_integer(&k);
    }
    let img = Interpretation::canonical_fact(head, &k)?.constraint;
    Some(if mode == Mode::Integer { lin::tighten_integer(&img) } else { img })
}

/// Polyhedral post-fixpoint of the definite clauses of `p`.
pub fn cpa_lfp(p: &Program, cfg: &AnalysisConfig) -> CpaResult {
    let mut model = PolyModel::bottom(p);
    let mut updates: BTreeMap<Pred, usize> = BTreeMap::new();
    let mut stable = true;
    let mut iterations = 0;
    for comp in sccs(p) {
        let mut rounds = 0;
        loop {
            let mut changed = false;
            for q in &comp {
                let images: Vec<LinearConstraint> = p.defining(q).filter_map(|(_, c)| clause_image(c, &model, p.mode)).collect();
                if images.is_empty() {
                    continue;
                }
                let old = model.get(q).cloned();
                let joined = match (cfg.join, &old) {
                    (Join::Hull, old) => images.iter().fold(old.clone().unwrap_or_else(LinearConstraint::falsum), |acc, c| lin::convex_hull(&acc, c)),
                    (Join::UnionThenHull, old) => {
                        let mut all = images.clone();
                        all.extend(old.iter().cloned());
                        lin::convex_hull_all(&all)
                    }
                };
                let arity = p.arity_of(q).unwrap_or(0);
                let next = match &old {
                    None => joined,
                    Some(o) => {
                        if lin::entail(&joined, o) {
                            continue;
                        }
                        let n = updates.get(q).copied().unwrap_or(0);
                        if n <= cfg.widening_delay {
                            joined
                        } else {
                            lin::widen(o, &joined)
                        }
                    }
                };
                *updates.entry(q.clone()).or_default() += 1;
                model.set(q.clone(), arity, Some(next));
                changed = true;
            }
            rounds += 1;
            iterations += 1;
            if !changed {
                break;
            }
            if rounds >= cfg.max_iters {
                stable = false;
                break;
            }
        }
    }
    CpaResult { model, stable, iterations }
}

/// Per goal: `Sat` when the model proves the goal body unsatisfiable (the
/// goal holds), `Unknown` otherwise.
pub fn check_goals(m: &PolyModel, goals: &[Clause]) -> Vec<Verdict3> {
    goals
        .iter()
        .map(|g| match body_under(g, m) {
            None => Verdict3::Sat,
            Some(k) if !lin::is_sat(&k.and(&g.constraint)) => Verdict3::Sat,
            Some(_) => Verdict3::Unknown,
        })
        .collect()
}

/// A candidate model for [`check_model`].
#[derive(Clone, Copy)]
pub enum Candidate<'a> {
    Facts(&'a Interpretation),
    Poly(&'a PolyModel),
}

impl Candidate<'_> {
    fn disjuncts(&self, p: &Pred) -> Vec<LinearConstraint> {
        match self {
            Candidate::Facts(i) => i.disjuncts(p),
            Candidate::Poly(m) => m.disjuncts(p),
        }
    }
}

/// Whether `candidate` is a model of every clause of `p` (goals included).
/// Entailment is decided over the values of the program's mode.
pub fn check_model(p: &Program, candidate: Candidate<'_>) -> bool {
    p.clauses.iter().all(|c| {
        let mut bodies = vec![c.constraint.clone()];
        for a in &c.body {
            let ds = candidate.disjuncts(&a.pred);
            bodies = bodies
                .iter()
                .flat_map(|b| ds.iter().map(move |d| b.and(&instantiate(d, &a.args))))
                .filter(lin::is_sat)
                .collect();
        }
        let heads: Vec<LinearConstraint> = match c.head.atom() {
            None => Vec::new(),
            Some(h) => candidate.disjuncts(&h.pred).iter().map(|d| instantiate(d, &h.args)).collect(),
        };
        bodies.iter().all(|b| lin::entails_disjunction_in(b, &heads, p.mode))
    })
}
