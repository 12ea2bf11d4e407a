//! Equivalence of clause sets up to variable renaming, predicate renaming,
//! body-atom order and logically equivalent constraints.
//!
//! Each clause is brought into a positional form: fresh variables stand for
//! the head and body argument positions and the constraint is projected onto
//! them. Two clauses match when their predicates correspond under the
//! predicate bijection and, for some permutation of body atoms, the
//! positional constraints entail each other.

use std::collections::{BTreeMap, BTreeSet};

use crate::eval::Interpretation;
use crate::lin;
use crate::syntax::{Atom, AtomicConstraint, Clause, Head, LinearConstraint, LinearTerm, Mode, Pred, Program, Var};

/// A clause in positional form.
#[derive(Clone, Debug)]
struct Positional {
    head: Option<Pred>,
    body: Vec<Pred>,
    arities: Vec<usize>,
    head_arity: usize,
    constraint: LinearConstraint,
}

fn pos_var(slot: usize, i: usize) -> Var {
    Var::new(&format!("%a{slot}_{i}"))
}

fn positional(c: &Clause, integer: bool) -> Positional {
    let mut full = c.constraint.clone();
    let mut keep = BTreeSet::new();
    let mut bind = |slot: usize, args: &[LinearTerm], full: &mut LinearConstraint| {
        for (i, t) in args.iter().enumerate() {
            let v = pos_var(slot, i);
            full.push(AtomicConstraint::eq(&LinearTerm::var(v.clone()), t));
            keep.insert(v);
        }
    };
    if let Some(h) = c.head.atom() {
        bind(0, &h.args, &mut full);
    }
    for (j, a) in c.body.iter().enumerate() {
        bind(j + 1, &a.args, &mut full);
    }
    let mut constraint = lin::proj(&full, &keep);
    if integer {
        constraint = lin::tighten_integer(&constraint);
    }
    Positional {
        head: c.head_pred().cloned(),
        body: c.body.iter().map(|a| a.pred.clone()).collect(),
        arities: c.body.iter().map(|a| a.arity()).collect(),
        head_arity: c.head.atom().map_or(0, |a| a.arity()),
        constraint,
    }
}

/// Renames body slot `from` to `to` in positional variables.
fn permute(c: &LinearConstraint, perm: &[usize], arities: &[usize]) -> LinearConstraint {
    let mut map = BTreeMap::new();
    for (j, &to) in perm.iter().enumerate() {
        for i in 0..arities[j] {
            map.insert(pos_var(j + 1, i), pos_var(to + 1, i));
        }
    }
    c.rename(&map)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for k in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(k, n - 1);
            out.push(p);
        }
    }
    out
}

fn clause_matches(a: &Positional, b: &Positional, map: &BTreeMap<Pred, Pred>) -> bool {
    let mp = |p: &Pred| map.get(p).cloned().unwrap_or_else(|| p.clone());
    if a.head.as_ref().map(mp) != b.head || a.head_arity != b.head_arity || a.body.len() != b.body.len() {
        return false;
    }
    if a.constraint.is_falsum() || b.constraint.is_falsum() {
        return a.constraint.is_falsum() && b.constraint.is_falsum();
    }
    permutations(a.body.len()).into_iter().any(|perm| {
        let preds_ok = perm.iter().enumerate().all(|(j, &to)| mp(&a.body[j]) == b.body[to] && a.arities[j] == b.arities[to]);
        preds_ok && lin::equivalent(&permute(&a.constraint, &perm, &a.arities), &b.constraint)
    })
}

/// Finds a bijection between the clauses of `a` and `b`.
fn match_clauses(a: &[Positional], b: &[Positional], map: &BTreeMap<Pred, Pred>) -> bool {
    fn go(k: usize, a: &[Positional], b: &[Positional], used: &mut Vec<bool>, map: &BTreeMap<Pred, Pred>) -> bool {
        if k == a.len() {
            return true;
        }
        for j in 0..b.len() {
            if !used[j] && clause_matches(&a[k], &b[j], map) {
                used[j] = true;
                if go(k + 1, a, b, used, map) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    a.len() == b.len() && go(0, a, b, &mut vec![false; b.len()], map)
}

fn signature(p: &Program, q: &Pred) -> (usize, usize, usize) {
    let defs = p.defining(q).count();
    let uses = p.clauses.iter().flat_map(|c| &c.body).filter(|a| &a.pred == q).count();
    (p.arity_of(q).unwrap_or(0), defs, uses)
}

/// `a` and `b` are equal up to renaming of variables and predicates, order of
/// clauses and body atoms, and equivalence of (positional) constraints. In
/// integer mode constraints are tightened before comparison.
pub fn programs_equivalent(a: &Program, b: &Program) -> bool {
    let integer = a.mode == Mode::Integer || b.mode == Mode::Integer;
    let pa: Vec<Positional> = a.clauses.iter().map(|c| positional(c, integer)).collect();
    let pb: Vec<Positional> = b.clauses.iter().map(|c| positional(c, integer)).collect();
    let preds_a: Vec<Pred> = a.predicates().into_iter().map(|(p, _)| p).collect();
    let preds_b: Vec<Pred> = b.predicates().into_iter().map(|(p, _)| p).collect();
    if preds_a.len() != preds_b.len() {
        return false;
    }
    fn search(
        k: usize,
        preds_a: &[Pred],
        preds_b: &[Pred],
        a: &Program,
        b: &Program,
        map: &mut BTreeMap<Pred, Pred>,
        used: &mut BTreeSet<Pred>,
        pa: &[Positional],
        pb: &[Positional],
    ) -> bool {
        if k == preds_a.len() {
            return match_clauses(pa, pb, map);
        }
        let p = &preds_a[k];
        let sig = signature(a, p);
        // prefer the identity mapping
        let mut cands: Vec<&Pred> = preds_b.iter().filter(|q| !used.contains(*q) && signature(b, q) == sig).collect();
        cands.sort_by_key(|q| *q != p);
        for q in cands {
            map.insert(p.clone(), q.clone());
            used.insert(q.clone());
            if search(k + 1, preds_a, preds_b, a, b, map, used, pa, pb) {
                return true;
            }
            used.remove(q);
            map.remove(p);
        }
        false
    }
    search(0, &preds_a, &preds_b, a, b, &mut BTreeMap::new(), &mut BTreeSet::new(), &pa, &pb)
}

/// Like [`programs_equivalent`], additionally allowing the argument
/// positions of each predicate of `a` to be permuted. Gives up (returns
/// `false`) beyond `limit` permutation combinations.
pub fn programs_equivalent_up_to_argument_order(a: &Program, b: &Program, limit: usize) -> bool {
    let preds = a.predicates();
    let total = preds.iter().try_fold(1usize, |acc, (_, n)| acc.checked_mul((1..=*n).product::<usize>()));
    if total.is_none_or(|t| t > limit) {
        return programs_equivalent(a, b);
    }
    let perms: Vec<Vec<Vec<usize>>> = preds.iter().map(|(_, n)| permutations(*n)).collect();
    let mut choice = vec![0usize; preds.len()];
    loop {
        let map: BTreeMap<Pred, &[usize]> = preds.iter().zip(&choice).zip(&perms).map(|(((p, _), &k), ps)| (p.clone(), ps[k].as_slice())).collect();
        if programs_equivalent(&permute_args(a, &map), b) {
            return true;
        }
        // Advance the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return false;
            }
            choice[i] += 1;
            if choice[i] < perms[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn permute_args(p: &Program, perm: &BTreeMap<Pred, &[usize]>) -> Program {
    let atom = |a: &Atom| {
        let order = perm[&a.pred];
        Atom::new(a.pred.clone(), order.iter().map(|&i| a.args[i].clone()).collect())
    };
    let clauses = p
        .clauses
        .iter()
        .map(|c| {
            let head = match &c.head {
                Head::Atom(h) => Head::Atom(atom(h)),
                Head::False => Head::False,
            };
            Clause::new(head, c.constraint.clone(), c.body.iter().map(atom).collect())
        })
        .collect();
    Program::new(clauses, p.mode)
}

/// Per predicate, the union of the facts of `i` equals the union of the
/// facts of `expected` (checked by disjunctive entailment both ways).
pub fn facts_equivalent(i: &Interpretation, expected: &Program) -> bool {
    let want: Interpretation = expected.clauses.iter().cloned().collect();
    let preds: BTreeSet<Pred> = i.facts().iter().chain(want.facts()).filter_map(|f| f.head_pred().cloned()).collect();
    preds.iter().all(|p| {
        let got = i.disjuncts(p);
        let exp = want.disjuncts(p);
        got.iter().all(|g| lin::entails_disjunction(g, &exp)) && exp.iter().all(|e| lin::entails_disjunction(e, &got))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn p(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    #[test]
    fn renaming_and_reordering_are_ignored() {
        let a = p("false :- X=0, Y=0, sp(X,Y,N). sp(X,Y,N) :- X<N, X1=X+1, Y1=X1+Y, sp(X1,Y1,N).");
        let b = p("sp(A,B,C) :- A+1=<C+0, sp(A+1,A+B+1,C). false :- q0(0,0,M) , true.");
        let b = Program::new(
            b.clauses
                .into_iter()
                .map(|c| {
                    let s = c.to_string().replace("q0", "sp");
                    crate::syntax::parse_clause(&s).unwrap()
                })
                .collect(),
            Mode::Rational,
        );
        // X<N and X+1=<N differ over the rationals
        assert!(!programs_equivalent(&a, &b));
        let c = Program::new(b.clauses.clone(), Mode::Integer);
        assert!(programs_equivalent(&a, &c));
    }

    #[test]
    fn predicate_bijection_is_found() {
        let a = p("false :- p(X). p(X) :- X>0, q(X). q(X) :- X=1.");
        let b = p("r(Y) :- Y=1. false :- s(Z). s(Z) :- r(Z), 0<Z.");
        assert!(programs_equivalent(&a, &b));
        let c = p("r(Y) :- Y=2. false :- s(Z). s(Z) :- r(Z), 0<Z.");
        assert!(!programs_equivalent(&a, &c));
    }

    #[test]
    fn argument_order_can_be_permuted() {
        let a = p("false :- X=0, Y=1, q(X,Y,Z). q(X,Y,Z) :- X<Y, Z=X.");
        let b = p("false :- A=1, B=0, r(A,C,B). r(A,C,B) :- B<A, C=B.");
        assert!(!programs_equivalent(&a, &b));
        assert!(programs_equivalent_up_to_argument_order(&a, &b, 100));
        let c = p("false :- A=1, B=0, r(A,C,B). r(A,C,B) :- B<A, C=A.");
        assert!(!programs_equivalent_up_to_argument_order(&a, &c, 100));
        assert_eq!(permutations(3).len(), 6);
    }

    #[test]
    fn body_atom_order_is_ignored() {
        // the fact pins f, so f and g cannot trade places
        let a = p("false :- X<Y, f(X,Z), g(Y,Z). f(U,V) :- U=0.");
        let b = p("false :- g(B,C), f(A,C), A<B. f(U,V) :- U=0.");
        assert!(programs_equivalent(&a, &b));
        let c = p("false :- g(A,C), f(B,C), A<B. f(U,V) :- U=0.");
        assert!(!programs_equivalent(&a, &c));
    }
}
