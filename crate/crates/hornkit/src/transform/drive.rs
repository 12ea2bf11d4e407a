//! Definition-driven strategies: specialisation and predicate pairing.
//!
//! Both strategies keep a table of definitions `newp(V) :- d, A1, …, Am`
//! whose body atoms follow a *pattern* (predicates, constant arguments and
//! variable sharing). A round starts from the original clauses:
//!
//! 1. every goal is folded, atom group by atom group, with a definition
//!    whose constraint the goal constraint entails;
//! 2. each definition introduced is unfolded (leftmost atom; for pairs the
//!    first and then the second atom), non-recursive atoms are unfolded
//!    further up to `max_unfold` steps, and the resulting bodies are folded
//!    in the same way;
//! 3. when no definition covers a group, either a new child definition is
//!    introduced or, if an ancestor has the same predicates, the ancestor's
//!    constraint is generalised, its descendants are discarded and the
//!    round restarts.
//!
//! Generalisation is widening of the ancestor constraint by the new one (or
//! hull first, then widening), or, in property mode, the conjunction of the
//! constraints from the clause heads that the new constraint entails (a
//! finite choice, so no ancestor generalisation is needed).
//!
//! The finished program has every definition unfolded before use, which is
//! checked by the kernel audit.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::state::{ClauseId, DefId, DeleteMode, TransformState};
use super::TransformError;
use crate::lin;
use crate::syntax::{
    canonical_vars, deps, fresh_pred, AtomicConstraint, Atom, Clause, Fresh, LinearConstraint, LinearTerm, Pred, Program,
    Rat, Var,
};

/// How a constraint is generalised when a definition would repeat.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generalisation {
    /// Widen the ancestor constraint by the new one.
    #[default]
    Widening,
    /// Convex hull at the first generalisation of a definition, widening of
    /// the hull afterwards.
    HullWidening,
    /// Keep the head constraints of the original clauses that hold.
    Properties,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpecialiseConfig {
    pub generalisation: Generalisation,
    /// Bound on unfolding steps applied to one definition.
    pub max_unfold: usize,
    pub max_defs: usize,
    pub max_rounds: usize,
}

impl Default for SpecialiseConfig {
    fn default() -> Self {
        SpecialiseConfig { generalisation: Generalisation::Widening, max_unfold: 3, max_defs: 64, max_rounds: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Slot {
    Var(usize),
    Const(Rat),
}

/// Predicates and argument shape of a definition body.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Pattern {
    atoms: Vec<(Pred, Vec<Slot>)>,
}

impl Pattern {
    fn preds(&self) -> Vec<&Pred> {
        self.atoms.iter().map(|(p, _)| p).collect()
    }

    fn slots(&self) -> impl Iterator<Item = &Slot> {
        self.atoms.iter().flat_map(|(_, s)| s.iter())
    }

    fn atoms(&self, vars: &[Var]) -> Vec<Atom> {
        self.atoms
            .iter()
            .map(|(p, slots)| {
                let args = slots
                    .iter()
                    .map(|s| match s {
                        Slot::Var(i) => LinearTerm::var(vars[*i].clone()),
                        Slot::Const(c) => LinearTerm::constant(c.clone()),
                    })
                    .collect();
                Atom::new(p.clone(), args)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Entry {
    pattern: Pattern,
    vars: Vec<Var>,
    constraint: LinearConstraint,
    parent: Option<usize>,
    generalised: usize,
    alive: bool,
}

/// A group of body atoms seen as an instance of a pattern.
struct Candidate {
    positions: Vec<usize>,
    pattern: Pattern,
    /// Term bound to each variable class.
    terms: Vec<LinearTerm>,
    /// Names for the classes, distinct and usable as definition variables.
    vars: Vec<Var>,
    /// Clause constraint projected onto `vars`.
    constraint: LinearConstraint,
}

impl Candidate {
    fn new(c: &Clause, positions: Vec<usize>) -> Candidate {
        let mut terms: Vec<LinearTerm> = Vec::new();
        let mut atoms = Vec::new();
        for &k in &positions {
            let a = &c.body[k];
            let slots = a
                .args
                .iter()
                .map(|t| match t.as_constant() {
                    Some(r) => Slot::Const(r.clone()),
                    None => Slot::Var(terms.iter().position(|u| u == t).unwrap_or_else(|| {
                        terms.push(t.clone());
                        terms.len() - 1
                    })),
                })
                .collect();
            atoms.push((a.pred.clone(), slots));
        }
        let mut fresh = Fresh::new(c.vars());
        let mut used = BTreeSet::new();
        let vars: Vec<Var> = terms
            .iter()
            .map(|t| match t.as_var() {
                Some(v) if used.insert(v.clone()) => v.clone(),
                _ => fresh.var("V"),
            })
            .collect();
        let mut full = c.constraint.clone();
        for (v, t) in vars.iter().zip(&terms) {
            if t.as_var() != Some(v) {
                full.push(AtomicConstraint::eq(&LinearTerm::var(v.clone()), t));
            }
        }
        let keep: BTreeSet<Var> = vars.iter().cloned().collect();
        Candidate { positions, pattern: Pattern { atoms }, terms, vars, constraint: lin::proj(&full, &keep) }
    }

    /// `d` (over `vars` of an entry with the same pattern) instantiated on
    /// the candidate's terms.
    fn instantiate(&self, entry_vars: &[Var], d: &LinearConstraint) -> LinearConstraint {
        let map: BTreeMap<Var, LinearTerm> = entry_vars.iter().cloned().zip(self.terms.iter().cloned()).collect();
        d.substitute_all(&map)
    }

    /// `d` renamed onto the candidate's class variables.
    fn on_vars(&self, entry_vars: &[Var], d: &LinearConstraint) -> LinearConstraint {
        let map: BTreeMap<Var, LinearTerm> =
            entry_vars.iter().cloned().zip(self.vars.iter().map(|v| LinearTerm::var(v.clone()))).collect();
        d.substitute_all(&map)
    }
}

fn pos_var(k: usize) -> Var {
    Var::new(&format!("%g{k}"))
}

/// A pattern constraint over positional variables `%g0, %g1, …`.
fn positional(p: &Pattern, vars: &[Var], c: &LinearConstraint) -> LinearConstraint {
    let mut full = c.clone();
    let mut keep = BTreeSet::new();
    for (k, s) in p.slots().enumerate() {
        let t = match s {
            Slot::Var(i) => LinearTerm::var(vars[*i].clone()),
            Slot::Const(r) => LinearTerm::constant(r.clone()),
        };
        full.push(AtomicConstraint::eq(&LinearTerm::var(pos_var(k)), &t));
        keep.insert(pos_var(k));
    }
    lin::proj(&full, &keep)
}

/// Most specific common pattern of two patterns with the same predicates,
/// with class names taken from `a` where possible.
fn common_pattern(a: &Pattern, avars: &[Var], b: &Pattern) -> (Pattern, Vec<Var>) {
    let mut keys: Vec<(Slot, Slot)> = Vec::new();
    let mut vars: Vec<Var> = Vec::new();
    let mut fresh = Fresh::new(avars.iter().cloned().collect());
    let mut used = BTreeSet::new();
    let mut atoms = Vec::new();
    for ((p, sa), (_, sb)) in a.atoms.iter().zip(&b.atoms) {
        let slots = sa
            .iter()
            .zip(sb)
            .map(|(x, y)| match (x, y) {
                (Slot::Const(c), Slot::Const(d)) if c == d => Slot::Const(c.clone()),
                _ => {
                    let key = (x.clone(), y.clone());
                    let i = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
                        let name = match x {
                            Slot::Var(i) if used.insert(avars[*i].clone()) => avars[*i].clone(),
                            _ => fresh.var("V"),
                        };
                        keys.push(key);
                        vars.push(name);
                        keys.len() - 1
                    });
                    Slot::Var(i)
                }
            })
            .collect();
        atoms.push((p.clone(), slots));
    }
    (Pattern { atoms }, vars)
}

/// Translates a positional constraint back onto pattern variables.
fn from_positional(p: &Pattern, vars: &[Var], c: &LinearConstraint) -> LinearConstraint {
    let map: BTreeMap<Var, LinearTerm> = p
        .slots()
        .enumerate()
        .map(|(k, s)| {
            let t = match s {
                Slot::Var(i) => LinearTerm::var(vars[*i].clone()),
                Slot::Const(r) => LinearTerm::constant(r.clone()),
            };
            (pos_var(k), t)
        })
        .collect();
    lin::simplify(&c.substitute_all(&map))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Grouping {
    Single,
    Pairs,
}

enum Lookup {
    Found(usize),
    Restart,
}

struct Driver<'a> {
    prog: &'a Program,
    cfg: SpecialiseConfig,
    grouping: Grouping,
    original: BTreeSet<Pred>,
    recursive: BTreeSet<Pred>,
    properties: BTreeMap<Pred, Vec<AtomicConstraint>>,
    table: Vec<Entry>,
}

/// Per round bookkeeping.
struct Round {
    state: TransformState,
    defined: BTreeMap<usize, (DefId, ClauseId)>,
    queue: VecDeque<usize>,
}

/// Constraints of clause heads over the canonical argument variables.
fn head_properties(p: &Program) -> BTreeMap<Pred, Vec<AtomicConstraint>> {
    let mut out: BTreeMap<Pred, Vec<AtomicConstraint>> = BTreeMap::new();
    for (_, c) in p.definite() {
        let h = c.head.atom().expect("definite clause");
        let xs = canonical_vars(h.arity());
        let mut map: BTreeMap<Var, LinearTerm> = BTreeMap::new();
        for (x, t) in xs.iter().zip(&h.args) {
            if let Some(v) = t.as_var() {
                map.entry(v.clone()).or_insert_with(|| LinearTerm::var(x.clone()));
            }
        }
        let props = out.entry(h.pred.clone()).or_default();
        for a in c.constraint.conjuncts() {
            if a.vars().next().is_some() && a.vars().all(|v| map.contains_key(v)) {
                let b = a.substitute_all(&map);
                if !props.contains(&b) {
                    props.push(b);
                }
            }
        }
    }
    out
}

impl<'a> Driver<'a> {
    fn new(prog: &'a Program, cfg: SpecialiseConfig, grouping: Grouping) -> Self {
        Driver {
            prog,
            cfg,
            grouping,
            original: prog.predicates().into_iter().map(|(p, _)| p).collect(),
            recursive: deps::recursive_predicates(prog),
            properties: head_properties(prog),
            table: Vec::new(),
        }
    }

    /// The first group of original-predicate atoms in the body of `c`.
    fn first_group(&self, c: &Clause) -> Option<Vec<usize>> {
        let orig: Vec<usize> = (0..c.body.len()).filter(|&k| self.original.contains(&c.body[k].pred)).collect();
        let &i = orig.first()?;
        if self.grouping == Grouping::Single || orig.len() == 1 {
            return Some(vec![i]);
        }
        let vi = c.body[i].vars();
        let j = orig[1..].iter().find(|&&j| !c.body[j].vars().is_disjoint(&vi)).copied().unwrap_or(orig[1]);
        Some(vec![i, j])
    }

    /// Property-mode constraint for a candidate.
    fn properties_of(&self, cand: &Candidate) -> LinearConstraint {
        let mut out = LinearConstraint::top();
        for a in cand.pattern.atoms(&cand.vars) {
            for prop in self.properties.get(&a.pred).into_iter().flatten() {
                let map: BTreeMap<Var, LinearTerm> = canonical_vars(a.arity()).into_iter().zip(a.args.iter().cloned()).collect();
                let inst = prop.substitute_all(&map);
                if inst.ground_truth().is_none() && lin::entails_atom(&cand.constraint, &inst) {
                    out.push(inst);
                }
            }
        }
        lin::simplify(&out)
    }

    fn ancestors(&self, current: Option<usize>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = current;
        while let Some(e) = cur {
            out.push(e);
            cur = self.table[e].parent;
        }
        out
    }

    fn push_entry(&mut self, e: Entry) -> Result<usize, TransformError> {
        if self.table.iter().filter(|e| e.alive).count() >= self.cfg.max_defs {
            return Err(TransformError::Budget { what: format!("more than {} definitions", self.cfg.max_defs), partial: Box::new(self.prog.clone()) });
        }
        self.table.push(e);
        Ok(self.table.len() - 1)
    }

    fn lookup(&mut self, c: &Clause, cand: &Candidate, current: Option<usize>) -> Result<Lookup, TransformError> {
        let same: Vec<usize> = (0..self.table.len()).filter(|&i| self.table[i].alive && self.table[i].pattern == cand.pattern).collect();
        if self.cfg.generalisation == Generalisation::Properties {
            let g = self.properties_of(cand);
            if let Some(&i) = same.iter().find(|&&i| lin::equivalent(&cand.on_vars(&self.table[i].vars, &self.table[i].constraint), &g)) {
                return Ok(Lookup::Found(i));
            }
            let e = Entry { pattern: cand.pattern.clone(), vars: cand.vars.clone(), constraint: g, parent: current, generalised: 0, alive: true };
            return Ok(Lookup::Found(self.push_entry(e)?));
        }
        // strongest covering definition
        let covering: Vec<(usize, LinearConstraint)> = same
            .iter()
            .map(|&i| (i, cand.instantiate(&self.table[i].vars, &self.table[i].constraint)))
            .filter(|(_, d)| lin::entail(&c.constraint, d))
            .collect();
        if let Some((i, _)) = covering.iter().find(|(_, d)| covering.iter().all(|(_, o)| lin::entail(d, o))).or(covering.first()) {
            return Ok(Lookup::Found(*i));
        }
        let preds = cand.pattern.preds();
        if let Some(anc) = self.ancestors(current).into_iter().find(|&a| self.table[a].pattern.preds() == preds) {
            self.generalise(anc, cand);
            return Ok(Lookup::Restart);
        }
        let e = Entry {
            pattern: cand.pattern.clone(),
            vars: cand.vars.clone(),
            constraint: lin::simplify(&cand.constraint),
            parent: current,
            generalised: 0,
            alive: true,
        };
        Ok(Lookup::Found(self.push_entry(e)?))
    }

    /// Weakens entry `anc` so that it covers `cand`, discarding its
    /// descendants.
    fn generalise(&mut self, anc: usize, cand: &Candidate) {
        let e = &self.table[anc];
        let old = positional(&e.pattern, &e.vars, &e.constraint);
        let new = positional(&cand.pattern, &cand.vars, &cand.constraint);
        let g = match self.cfg.generalisation {
            Generalisation::HullWidening if e.generalised == 0 => lin::convex_hull(&old, &new),
            Generalisation::HullWidening => lin::widen(&old, &lin::convex_hull(&old, &new)),
            _ => lin::widen(&old, &new),
        };
        let (pattern, vars) = common_pattern(&e.pattern, &e.vars, &cand.pattern);
        let constraint = from_positional(&pattern, &vars, &g);
        let e = &mut self.table[anc];
        e.pattern = pattern;
        e.vars = vars;
        e.constraint = constraint;
        e.generalised += 1;
        for i in 0..self.table.len() {
            if i != anc && self.ancestors(Some(i)).contains(&anc) {
                self.table[i].alive = false;
            }
        }
    }

    /// Introduces entry `i` in this round if needed.
    fn ensure_defined(&self, r: &mut Round, i: usize) -> Result<DefId, TransformError> {
        if let Some((d, _)) = r.defined.get(&i) {
            return Ok(*d);
        }
        let e = &self.table[i];
        let base: String = e.pattern.atoms.iter().map(|(p, _)| p.name().trim_end_matches(|c: char| c.is_ascii_digit())).collect();
        let name = fresh_pred(&base, &r.state.taken_names());
        let head = Atom::with_vars(name, &e.vars);
        let clause = Clause::fact(head, e.constraint.clone());
        let clause = Clause { body: e.pattern.atoms(&e.vars), ..clause };
        let parent = e.parent.and_then(|p| r.defined.get(&p)).map(|(d, _)| *d);
        let (d, cid) = r.state.define(clause, parent)?;
        r.defined.insert(i, (d, cid));
        r.queue.push_back(i);
        Ok(d)
    }

    /// Folds every original-predicate group of clause `cid`.
    fn fold_all(&mut self, r: &mut Round, cid: ClauseId, current: Option<usize>) -> Result<bool, TransformError> {
        loop {
            let Some(c) = r.state.clause(cid).cloned() else { return Ok(true) };
            let Some(group) = self.first_group(&c) else { return Ok(true) };
            let cand = Candidate::new(&c, group);
            match self.lookup(&c, &cand, current)? {
                Lookup::Restart => return Ok(false),
                Lookup::Found(i) => {
                    let d = self.ensure_defined(r, i)?;
                    r.state.fold(cid, &cand.positions, d)?;
                }
            }
        }
    }

    /// Leftmost original atom with a non-recursive predicate.
    fn non_recursive_atom(&self, c: &Clause) -> Option<usize> {
        c.body.iter().position(|a| self.original.contains(&a.pred) && !self.recursive.contains(&a.pred))
    }

    /// Unfolds a definition clause and returns the resulting clauses.
    fn unfold_definition(&self, r: &mut Round, cid: ClauseId, width: usize) -> Result<Vec<ClauseId>, TransformError> {
        let mut layer: Vec<(ClauseId, usize)> = r.state.unfold(cid, 0)?.into_iter().map(|i| (i, 1)).collect();
        if width == 2 {
            let mut next = Vec::new();
            for (i, _) in layer {
                let n = r.state.clause(i).expect("fresh resolvent").body.len();
                next.extend(r.state.unfold(i, n - 1)?.into_iter().map(|j| (j, 2)));
            }
            layer = next;
        }
        let mut done = Vec::new();
        while let Some((i, depth)) = layer.pop() {
            if self.grouping == Grouping::Pairs {
                r.state.simplify(i)?;
            }
            let c = r.state.clause(i).expect("live clause");
            match self.non_recursive_atom(c) {
                Some(k) if depth < self.cfg.max_unfold => {
                    layer.extend(r.state.unfold(i, k)?.into_iter().rev().map(|j| (j, depth + 1)));
                }
                _ => done.push(i),
            }
        }
        Ok(done)
    }

    /// Leftmost original atom whose predicate is a non-recursive wrapper:
    /// a single clause with body atoms.
    fn wrapper_atom(&self, c: &Clause) -> Option<usize> {
        c.body.iter().position(|a| {
            let mut defs = self.prog.defining(&a.pred);
            self.original.contains(&a.pred)
                && !self.recursive.contains(&a.pred)
                && matches!((defs.next(), defs.next()), (Some((_, d)), None) if !d.body.is_empty())
        })
    }

    /// Goal preparation for pairing: unfold wrapper atoms, then merge
    /// aliased variables.
    fn prepare_goals(&self, r: &mut Round) -> Result<(), TransformError> {
        let mut work: Vec<(ClauseId, usize)> = r.state.clauses().iter().filter(|(_, c)| c.is_goal()).map(|(i, _)| (*i, 0)).collect();
        while let Some((i, depth)) = work.pop() {
            let c = r.state.clause(i).expect("goal");
            match self.wrapper_atom(c) {
                Some(k) if depth < self.cfg.max_unfold * 4 => {
                    work.extend(r.state.unfold(i, k)?.into_iter().map(|j| (j, depth + 1)));
                }
                _ => r.state.simplify(i)?,
            }
        }
        Ok(())
    }

    /// One round; `None` when a generalisation forces a restart.
    fn round(&mut self) -> Result<Option<TransformState>, TransformError> {
        let mut r = Round { state: TransformState::new(self.prog), defined: BTreeMap::new(), queue: VecDeque::new() };
        if self.grouping == Grouping::Pairs {
            self.prepare_goals(&mut r)?;
            let paired = r.state.clauses().iter().any(|(_, c)| {
                c.is_goal() && c.body.iter().filter(|a| self.original.contains(&a.pred)).count() >= 2
            });
            if !paired {
                return Err(TransformError::NothingToPair);
            }
        }
        let goals: Vec<ClauseId> = r.state.clauses().iter().filter(|(_, c)| c.is_goal()).map(|(i, _)| *i).collect();
        for g in goals {
            if !self.fold_all(&mut r, g, None)? {
                return Ok(None);
            }
        }
        while let Some(e) = r.queue.pop_front() {
            let (_, cid) = r.defined[&e];
            let width = self.table[e].pattern.atoms.len();
            for i in self.unfold_definition(&mut r, cid, width)? {
                if !self.fold_all(&mut r, i, Some(e))? {
                    return Ok(None);
                }
            }
        }
        Ok(Some(r.state))
    }

    fn run(&mut self) -> Result<TransformState, TransformError> {
        if self.prog.goals().next().is_none() {
            return Err(TransformError::NoGoals);
        }
        for _ in 0..self.cfg.max_rounds {
            if let Some(mut s) = self.round()? {
                finish(&mut s)?;
                return Ok(s);
            }
        }
        Err(TransformError::Budget { what: format!("more than {} rounds", self.cfg.max_rounds), partial: Box::new(self.prog.clone()) })
    }
}

/// Removes clauses calling predicates without clauses, unsatisfiable and
/// unreachable clauses, then audits.
fn finish(s: &mut TransformState) -> Result<(), TransformError> {
    loop {
        let defined: BTreeSet<Pred> = s.clauses().iter().filter_map(|(_, c)| c.head_pred().cloned()).collect();
        let dead = s.clauses().iter().find_map(|(i, c)| c.body.iter().position(|a| !defined.contains(&a.pred)).map(|k| (*i, k)));
        match dead {
            Some((i, k)) => {
                s.unfold(i, k)?;
            }
            None => break,
        }
    }
    s.delete(DeleteMode::Unsat);
    s.delete(DeleteMode::Useless);
    s.audit()
}

/// Specialises `p` with respect to the constraints of its goals.
pub fn specialise(p: &Program, cfg: &SpecialiseConfig) -> Result<TransformState, TransformError> {
    Driver::new(p, *cfg, Grouping::Single).run()
}

/// Predicate pairing: goal atoms sharing variables are paired (leftmost
/// first) into conjunctive definitions, which are unfolded on both atoms
/// and folded back.
pub fn predicate_pair(p: &Program, cfg: &SpecialiseConfig) -> Result<TransformState, TransformError> {
    Driver::new(p, *cfg, Grouping::Pairs).run()
}
