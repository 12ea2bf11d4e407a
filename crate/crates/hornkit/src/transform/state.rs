//! The fold/unfold kernel.
//!
//! A [`TransformState`] holds the current clauses under stable identifiers,
//! the tree of definitions introduced so far and the history of applied
//! rules. Unfolding a definition clause marks the definition as unfolded;
//! [`TransformState::audit`] checks that every definition used for folding
//! has been unfolded, which is the side condition that makes fold/unfold
//! sequences satisfiability preserving.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use super::script::Step;
use super::TransformError;
use crate::lin::{self, Verdict3};
use crate::syntax::{
    deps, rename_apart, AtomicConstraint, Clause, Head, LinearConstraint, LinearTerm, Mode, Pred, Program, Rat, Rel,
    Var,
};

pub type ClauseId = usize;
pub type DefId = usize;

/// A definition `newp(V) :- d, A1, …, Am` with its position in the
/// definition tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefRecord {
    pub id: DefId,
    pub clause: Clause,
    pub parent: Option<DefId>,
    /// Identifier the definition clause received when introduced.
    pub clause_id: ClauseId,
}

impl DefRecord {
    pub fn pred(&self) -> &Pred {
        self.clause.head_pred().expect("definition head")
    }
}

/// Clause deletion criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeleteMode {
    /// Constraint rationally unsatisfiable.
    Unsat,
    /// Head predicate not reachable from any goal (nothing is deleted when
    /// there are no goals).
    Useless,
}

#[derive(Clone, Debug)]
pub struct TransformState {
    mode: Mode,
    clauses: Vec<(ClauseId, Clause)>,
    next_id: ClauseId,
    defs: Vec<DefRecord>,
    /// Definition clauses still present in their introduced form.
    pristine: BTreeMap<ClauseId, DefId>,
    unfolded: BTreeSet<DefId>,
    history: Vec<Step>,
}

impl TransformState {
    pub fn new(p: &Program) -> Self {
        TransformState {
            mode: p.mode,
            clauses: p.clauses.iter().cloned().enumerate().collect(),
            next_id: p.clauses.len(),
            defs: Vec::new(),
            pristine: BTreeMap::new(),
            unfolded: BTreeSet::new(),
            history: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn program(&self) -> Program {
        Program::new(self.clauses.iter().map(|(_, c)| c.clone()).collect(), self.mode)
    }

    pub fn clauses(&self) -> &[(ClauseId, Clause)] {
        &self.clauses
    }

    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.clauses.iter().find(|(i, _)| *i == id).map(|(_, c)| c)
    }

    pub fn defs(&self) -> &[DefRecord] {
        &self.defs
    }

    pub fn def(&self, id: DefId) -> Option<&DefRecord> {
        self.defs.get(id)
    }

    pub fn unfolded_defs(&self) -> &BTreeSet<DefId> {
        &self.unfolded
    }

    pub fn history(&self) -> &[Step] {
        &self.history
    }

    /// Identifiers of the clauses defining `p`, in order.
    pub fn defining(&self, p: &Pred) -> Vec<ClauseId> {
        self.clauses.iter().filter(|(_, c)| c.head_pred() == Some(p)).map(|(i, _)| *i).collect()
    }

    /// Every predicate name used so far, including removed definitions.
    pub fn taken_names(&self) -> BTreeSet<String> {
        let mut out = self.program().pred_names();
        out.extend(self.defs.iter().map(|d| d.pred().name().to_string()));
        out
    }

    fn index(&self, id: ClauseId) -> Result<usize, TransformError> {
        self.clauses.iter().position(|(i, _)| *i == id).ok_or(TransformError::NoSuchClause(id))
    }

    fn fresh_id(&mut self) -> ClauseId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Introduces a definition clause for a predicate not occurring anywhere
    /// yet. The head arguments must be distinct variables.
    pub fn define(&mut self, clause: Clause, parent: Option<DefId>) -> Result<(DefId, ClauseId), TransformError> {
        let head = clause.head.atom().ok_or(TransformError::BadDefinition("head is false".into()))?;
        if self.taken_names().contains(head.pred.name()) {
            return Err(TransformError::NotFresh(head.pred.to_string()));
        }
        if clause.body.iter().any(|a| a.pred == head.pred) {
            return Err(TransformError::NotFresh(head.pred.to_string()));
        }
        let mut seen = BTreeSet::new();
        for t in &head.args {
            match t.as_var() {
                Some(v) if seen.insert(v.clone()) => {}
                _ => return Err(TransformError::BadDefinition(format!("head argument `{t}` is not a distinct variable"))),
            }
        }
        if let Some(par) = parent {
            if par >= self.defs.len() {
                return Err(TransformError::NoSuchDefinition(par));
            }
        }
        let id = self.defs.len();
        let cid = self.fresh_id();
        self.defs.push(DefRecord { id, clause: clause.clone(), parent, clause_id: cid });
        self.pristine.insert(cid, id);
        self.clauses.push((cid, clause.clone()));
        self.history.push(Step::Define { def: id, parent, clause });
        Ok((id, cid))
    }

    /// Replaces the clause by all its resolvents on the body atom at `pos`.
    /// Resolvents with unsatisfiable constraints are dropped; with no
    /// defining clauses the clause disappears. Returns the new identifiers.
    pub fn unfold(&mut self, id: ClauseId, pos: usize) -> Result<Vec<ClauseId>, TransformError> {
        let idx = self.index(id)?;
        let c = self.clauses[idx].1.clone();
        let atom = c.body.get(pos).ok_or(TransformError::BadPosition { clause: id, pos })?.clone();
        let defining: Vec<Clause> =
            self.clauses.iter().filter(|(_, d)| d.head_pred() == Some(&atom.pred)).map(|(_, d)| d.clone()).collect();
        let mut out = Vec::new();
        for d in &defining {
            if let Some(r) = resolvent(&c, pos, d, self.mode) {
                out.push(r);
            }
        }
        let ids: Vec<ClauseId> = out.iter().map(|_| self.fresh_id()).collect();
        self.clauses.splice(idx..idx + 1, ids.iter().cloned().zip(out));
        if let Some(def) = self.pristine.remove(&id) {
            self.unfolded.insert(def);
        }
        self.history.push(Step::Unfold { clause: id, pos });
        Ok(ids)
    }

    /// Folds the body atoms at `positions` (in the order of the definition
    /// body) into the head of definition `def`. The new atom takes the place
    /// of the first folded atom.
    pub fn fold(&mut self, id: ClauseId, positions: &[usize], def: DefId) -> Result<(), TransformError> {
        let idx = self.index(id)?;
        let d = self.defs.get(def).ok_or(TransformError::NoSuchDefinition(def))?.clone();
        if self.pristine.get(&id) == Some(&def) {
            return Err(TransformError::SelfFold { clause: id, def });
        }
        let c = &self.clauses[idx].1;
        let folded = fold_clause(c, positions, &d.clause).map_err(|reason| TransformError::FoldMismatch { clause: id, def, reason })?;
        self.clauses[idx].1 = folded;
        self.pristine.remove(&id);
        self.history.push(Step::Fold { clause: id, positions: positions.to_vec(), def });
        Ok(())
    }

    /// Swaps a clause constraint for an equivalent one.
    pub fn replace(&mut self, id: ClauseId, constraint: LinearConstraint) -> Result<(), TransformError> {
        let idx = self.index(id)?;
        if !lin::equivalent(&self.clauses[idx].1.constraint, &constraint) {
            return Err(TransformError::NotEquivalent(id));
        }
        self.clauses[idx].1.constraint = constraint.clone();
        self.history.push(Step::Replace { clause: id, constraint });
        Ok(())
    }

    /// Merges variables equal in every solution of the constraint (keeping
    /// head variables and, otherwise, the one occurring first in the body
    /// atoms), then removes redundant conjuncts.
    pub fn simplify(&mut self, id: ClauseId) -> Result<(), TransformError> {
        let idx = self.index(id)?;
        self.clauses[idx].1 = merge_aliases(&self.clauses[idx].1);
        self.history.push(Step::Simplify { clause: id });
        Ok(())
    }

    pub fn delete(&mut self, mode: DeleteMode) {
        match mode {
            DeleteMode::Unsat => self.clauses.retain(|(_, c)| lin::is_sat(&c.constraint)),
            DeleteMode::Useless => {
                let p = self.program();
                if p.goals().next().is_some() {
                    let live = deps::reachable_from_goals(&p);
                    self.clauses.retain(|(_, c)| c.head_pred().map_or(true, |q| live.contains(q)));
                }
            }
        }
        self.history.push(Step::Delete(mode));
    }

    /// Every definition used for folding has been unfolded.
    pub fn audit(&self) -> Result<(), TransformError> {
        for (k, s) in self.history.iter().enumerate() {
            if let Step::Fold { def, .. } = s {
                if !self.unfolded.contains(def) {
                    return Err(TransformError::FoldedBeforeUnfolded { def: *def, step: k, entry: s.to_string() });
                }
            }
        }
        Ok(())
    }
}

/// The resolvent of `c` on its atom at `pos` with clause `d` (renamed apart).
/// `None` when the resolvent's constraint is unsatisfiable in `mode`.
pub(crate) fn resolvent(c: &Clause, pos: usize, d: &Clause, mode: Mode) -> Option<Clause> {
    let atom = &c.body[pos];
    let d = rename_apart(d, &c.vars());
    let head = d.head.atom().expect("defining clause");
    let mut subst: BTreeMap<Var, LinearTerm> = BTreeMap::new();
    let mut eqs = Vec::new();
    for (h, a) in head.args.iter().zip(&atom.args) {
        match h.as_var() {
            Some(v) if !subst.contains_key(v) => {
                subst.insert(v.clone(), a.clone());
            }
            _ => eqs.push((h.clone(), a.clone())),
        }
    }
    let d = d.substitute_all(&subst);
    let mut k = c.constraint.and(&d.constraint);
    for (h, a) in eqs {
        k.push(AtomicConstraint::eq(&h.substitute_all(&subst), &a));
    }
    let mut body = c.body[..pos].to_vec();
    body.extend(d.body);
    body.extend(c.body[pos + 1..].iter().cloned());
    let r = Clause::new(c.head.clone(), k, body);
    let k = tidy_constraint(&r, mode);
    if k.is_falsum() || (mode == Mode::Integer && lin::check(&k, mode) == Verdict3::Unsat) {
        return None;
    }
    Some(Clause { constraint: k, ..r })
}

/// Projects a clause constraint onto the head and body-atom variables
/// (rational mode) or removes redundant conjuncts (integer mode, where
/// rational projection would lose information).
pub(crate) fn tidy_constraint(c: &Clause, mode: Mode) -> LinearConstraint {
    match mode {
        Mode::Rational => lin::proj(&c.constraint, &c.interface_vars()),
        Mode::Integer => lin::simplify(&c.constraint),
    }
}

/// Folds `positions` of `c` with definition clause `def`.
pub(crate) fn fold_clause(c: &Clause, positions: &[usize], def: &Clause) -> Result<Clause, String> {
    if def.head.atom().is_none() {
        return Err("definition head is false".into());
    }
    if positions.len() != def.body.len() || positions.is_empty() {
        return Err(format!("span of {} atoms for a definition body of {}", positions.len(), def.body.len()));
    }
    let distinct: BTreeSet<usize> = positions.iter().cloned().collect();
    if distinct.len() != positions.len() || positions.iter().any(|&p| p >= c.body.len()) {
        return Err("invalid atom positions".into());
    }
    // rename the definition apart from the clause
    let def = rename_apart(def, &c.vars());
    let head = def.head.atom().expect("checked above").clone();
    let mut sigma: BTreeMap<Var, LinearTerm> = BTreeMap::new();
    for (da, &p) in def.body.iter().zip(positions) {
        let ca = &c.body[p];
        if da.pred != ca.pred || da.arity() != ca.arity() {
            return Err(format!("atom `{ca}` does not match `{da}`"));
        }
        for (dt, ct) in da.args.iter().zip(&ca.args) {
            if let Some(v) = dt.as_var() {
                match sigma.get(v) {
                    Some(t) if t != ct => return Err(format!("`{v}` bound to both `{t}` and `{ct}`")),
                    Some(_) => {}
                    None => {
                        sigma.insert(v.clone(), ct.clone());
                    }
                }
            }
        }
    }
    for (da, &p) in def.body.iter().zip(positions) {
        if da.substitute_all(&sigma) != c.body[p] {
            return Err(format!("atom `{}` is not an instance of `{da}`", c.body[p]));
        }
    }
    let head_vars = head.vars();
    for v in &head_vars {
        if !sigma.contains_key(v) {
            return Err(format!("head variable `{v}` does not occur in the definition body atoms"));
        }
    }
    // existential variables of the definition body atoms
    let mut atom_vars = BTreeSet::new();
    for a in &def.body {
        a.collect_vars(&mut atom_vars);
    }
    let existential: BTreeSet<Var> = atom_vars.difference(&head_vars).cloned().collect();
    let mut outside = BTreeSet::new();
    if let Head::Atom(h) = &c.head {
        h.collect_vars(&mut outside);
    }
    for (k, a) in c.body.iter().enumerate() {
        if !positions.contains(&k) {
            a.collect_vars(&mut outside);
        }
    }
    let mut images = BTreeSet::new();
    for v in &existential {
        let img = sigma[v].as_var().ok_or(format!("existential `{v}` bound to non-variable `{}`", sigma[v]))?;
        if !images.insert(img.clone()) || outside.contains(img) {
            return Err(format!("existential `{v}` bound to `{img}`, which is not local to the folded atoms"));
        }
        if head_vars.iter().any(|h| sigma[h].mentions(img)) {
            return Err(format!("existential image `{img}` also occurs in the new head"));
        }
    }
    // definition constraint restricted to the atom variables
    let d = lin::proj(&def.constraint, &atom_vars).substitute_all(&sigma);
    if !lin::entail(&c.constraint, &d) {
        return Err(format!("clause constraint does not entail `{d}`"));
    }
    let mut constraint = c.constraint.clone();
    let constrained: Vec<&Var> = images.iter().filter(|v| c.constraint.vars().contains(*v)).collect();
    if !constrained.is_empty() {
        let keep: BTreeSet<Var> = c.constraint.vars().difference(&images).cloned().collect();
        let rest = lin::proj(&c.constraint, &keep);
        if !lin::entail(&rest.and(&d), &c.constraint) {
            return Err("clause constraint restricts the folded existential variables beyond the definition".into());
        }
        constraint = rest;
    }
    let new_atom = head.substitute_all(&sigma);
    let first = *positions.iter().min().expect("non-empty");
    let mut body = Vec::new();
    for (k, a) in c.body.iter().enumerate() {
        if k == first {
            body.push(new_atom.clone());
        } else if !positions.contains(&k) {
            body.push(a.clone());
        }
    }
    Ok(Clause::new(c.head.clone(), constraint, body))
}

fn alias_pair(a: &AtomicConstraint) -> Option<(Var, Var)> {
    if a.rel() != Rel::Eq || !a.expr().constant_part().is_zero() {
        return None;
    }
    let parts: Vec<(&Var, &Rat)> = a.expr().coeffs().collect();
    if parts.len() != 2 || !(parts[0].1 + parts[1].1).is_zero() {
        return None;
    }
    Some((parts[0].0.clone(), parts[1].0.clone()))
}

/// Substitutes away variables the constraint forces equal to others.
pub(crate) fn merge_aliases(c: &Clause) -> Clause {
    let mut c = c.clone();
    loop {
        let head_vars = c.head.atom().map(|h| h.vars()).unwrap_or_default();
        let mut order: Vec<Var> = Vec::new();
        for a in &c.body {
            for v in a.ordered_vars() {
                if !order.contains(&v) {
                    order.push(v);
                }
            }
        }
        let rank = |v: &Var| {
            if head_vars.contains(v) {
                0
            } else {
                1 + order.iter().position(|w| w == v).unwrap_or(order.len())
            }
        };
        let orient = |x: Var, y: Var| {
            if head_vars.contains(&x) && head_vars.contains(&y) {
                None
            } else if rank(&x) <= rank(&y) {
                Some((x, y))
            } else {
                Some((y, x))
            }
        };
        let explicit = c.constraint.conjuncts().iter().find_map(|a| {
            let (x, y) = alias_pair(a)?;
            orient(x, y)
        });
        // equalities between atom arguments implied by the constraint
        let found = explicit.or_else(|| {
            order.iter().enumerate().find_map(|(i, x)| {
                order[i + 1..].iter().find_map(|y| {
                    let eq = AtomicConstraint::eq(&LinearTerm::var(x.clone()), &LinearTerm::var(y.clone()));
                    if lin::entails_atom(&c.constraint, &eq) {
                        orient(x.clone(), y.clone())
                    } else {
                        None
                    }
                })
            })
        });
        let Some((keep, gone)) = found else { break };
        let map = BTreeMap::from([(gone, LinearTerm::var(keep))]);
        c = c.substitute_all(&map);
    }
    c.constraint = lin::simplify(&c.constraint);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::programs_equivalent;
    use crate::syntax::{parse_clause, parse_constraint, parse_program};

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    #[test]
    fn unfolding_drops_unsatisfiable_resolvents() {
        let p = prog(
            ":- mode(int).
             false :- X=0, p(X,0).
             p(X,C) :- X=Y+1, p(Y,C).
             p(X,N) :- X>N.
             p(X,N) :- N>0, q(X,N).",
        );
        let mut s = TransformState::new(&p);
        let (d, cid) = s.define(parse_clause("sp(X) :- p(X,0).").unwrap(), None).unwrap();
        let ids = s.unfold(cid, 0).unwrap();
        assert_eq!(ids.len(), 2);
        assert!(s.unfolded_defs().contains(&d));
        let got = Program::new(ids.iter().map(|i| s.clause(*i).unwrap().clone()).collect(), Mode::Integer);
        assert!(programs_equivalent(&got, &prog(":- mode(int). sp(X) :- X=Y+1, p(Y,0). sp(X) :- X>0.")));
    }

    #[test]
    fn unfolding_an_undefined_atom_deletes_the_clause() {
        let mut s = TransformState::new(&prog("false :- r(X). p(X) :- X=0."));
        assert!(s.unfold(0, 0).unwrap().is_empty());
        assert_eq!(s.program().len(), 1);
        assert!(matches!(s.unfold(1, 0), Err(TransformError::BadPosition { .. })));
    }

    #[test]
    fn compound_head_arguments_become_equalities() {
        let p = prog("false :- X=8, p(X,Y). p(X+3,Y) :- X>3, p(X,Y).");
        let mut s = TransformState::new(&p);
        let ids = s.unfold(0, 0).unwrap();
        let c = s.clause(ids[0]).unwrap();
        let arg = c.body[0].args[0].as_var().unwrap().clone();
        assert!(lin::entails_atom(&c.constraint, &AtomicConstraint::eq(&LinearTerm::var(arg), &LinearTerm::int(5))));
        let mut t = TransformState::new(&prog("false :- X=5, p(X,Y). p(X+3,Y) :- X>3, p(X,Y)."));
        assert!(t.unfold(0, 0).unwrap().is_empty());
    }

    #[test]
    fn fold_reproduces_the_propagated_clause() {
        let p = prog(
            "false :- X=0, Y=0, p(X,Y,N).
             p(X,Y,N) :- X>=N, X>Y.
             p(X,Y,N) :- X<N, X1=X+1, Y1=X1+Y, p(X1,Y1,N).",
        );
        let mut s = TransformState::new(&p);
        let (d, cid) = s.define(parse_clause("sp(X,Y,N) :- X>=0, Y>=0, p(X,Y,N).").unwrap(), None).unwrap();
        let ids = s.unfold(cid, 0).unwrap();
        s.fold(ids[1], &[0], d).unwrap();
        s.fold(0, &[0], d).unwrap();
        s.delete(DeleteMode::Useless);
        s.audit().unwrap();
        let want = prog(
            "false :- X=0, Y=0, sp(X,Y,N).
             sp(X,Y,N) :- Y>=0, X>=N, X>Y.
             sp(X,Y,N) :- X>=0, Y>=0, X<N, X1=X+1, Y1=X1+Y, sp(X1,Y1,N).",
        );
        assert!(programs_equivalent(&s.program(), &want), "{}", s.program());
    }

    #[test]
    fn fold_requires_entailment() {
        let p = prog("false :- X<0, p(X). p(X) :- X=1.");
        let mut s = TransformState::new(&p);
        let (d, _) = s.define(parse_clause("q(X) :- X>=0, p(X).").unwrap(), None).unwrap();
        assert!(matches!(s.fold(0, &[0], d), Err(TransformError::FoldMismatch { .. })));
    }

    #[test]
    fn self_folding_is_rejected() {
        let p = prog("p. false :- p.");
        let mut s = TransformState::new(&p);
        let (d, cid) = s.define(parse_clause("q :- p.").unwrap(), None).unwrap();
        assert!(matches!(s.fold(cid, &[0], d), Err(TransformError::SelfFold { .. })));
        // folding another clause before unfolding the definition fails the audit
        s.fold(1, &[0], d).unwrap();
        assert!(matches!(s.audit(), Err(TransformError::FoldedBeforeUnfolded { .. })));
    }

    #[test]
    fn existential_variables_must_be_local() {
        let p = prog("false :- r(X,Z), s(Z). r(X,Y) :- X=Y. s(X) :- X=0.");
        let mut s = TransformState::new(&p);
        let (d, _) = s.define(parse_clause("t(X) :- r(X,Z).").unwrap(), None).unwrap();
        assert!(s.fold(0, &[0], d).is_err());
        let (d2, _) = s.define(parse_clause("u(X) :- r(X,Z), s(Z).").unwrap(), None).unwrap();
        s.fold(0, &[0, 1], d2).unwrap();
        assert_eq!(s.clause(0).unwrap().to_string(), "false :- u(X).");
    }

    #[test]
    fn definitions_need_fresh_predicates() {
        let mut s = TransformState::new(&prog("p(X) :- X=0."));
        assert!(matches!(s.define(parse_clause("p(X) :- X>0.").unwrap(), None), Err(TransformError::NotFresh(_))));
        assert!(s.define(parse_clause("q(X,X) :- p(X).").unwrap(), None).is_err());
    }

    #[test]
    fn replacement_requires_equivalence() {
        let mut s = TransformState::new(&prog("p(X) :- X<3, 5=X+3."));
        s.replace(0, parse_constraint("X=2").unwrap()).unwrap();
        assert_eq!(s.clause(0).unwrap().to_string(), "p(X) :- X=2.");
        s.replace(0, parse_constraint("X=2").unwrap()).unwrap();
        let mut t = TransformState::new(&prog("p(X) :- X>=0."));
        assert!(matches!(t.replace(0, parse_constraint("X>=1").unwrap()), Err(TransformError::NotEquivalent(0))));
    }

    #[test]
    fn deletion_modes() {
        let mut s = TransformState::new(&prog("false :- sp(X). sp(X) :- X>0. p(X) :- 0>0. q(X) :- X=1."));
        s.delete(DeleteMode::Unsat);
        assert_eq!(s.program().len(), 3);
        s.delete(DeleteMode::Useless);
        assert_eq!(s.program().to_string(), "false :- sp(X).\nsp(X) :- X>0.\n");
        let mut t = TransformState::new(&prog("q(X) :- X=1. r(X) :- q(X)."));
        t.delete(DeleteMode::Useless);
        assert_eq!(t.program().len(), 2);
    }

    #[test]
    fn aliases_are_merged_towards_earlier_atoms() {
        let c = parse_clause("false :- Z1>Z2, X1=X2, X2=<Y2, f(X1,Z1), g(X2,Y2,W,Z2).").unwrap();
        let m = merge_aliases(&c);
        assert_eq!(m.body[1].args[0].to_string(), "X1");
        assert!(!m.constraint.vars().contains(&Var::new("X2")));
        let h = parse_clause("p(X,Y) :- X=Y.").unwrap();
        assert_eq!(merge_aliases(&h), h);
    }
}
