//! Exact linear-arithmetic engine over rationals.
//!
//! Satisfiability is decided by Gaussian elimination of equalities followed
//! by Fourier–Motzkin elimination; a witness point is rebuilt by
//! back-substitution. Disequalities are handled by lazy case splits. Integer
//! satisfiability tightens rows and branches on fractional coordinates of the
//! rational witness, within a node budget. Entailment, projection, hull and
//! widening are always rational.

mod dense;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, Integer, One, Zero};
use serde::{Deserialize, Serialize};

use crate::syntax::{AtomicConstraint, LinearConstraint, Mode, Rat, Rel, Var};
use dense::{Columns, Kind, Row};

/// Default number of branch nodes for integer satisfiability.
pub const DEFAULT_BRANCH_BUDGET: usize = 64;

/// Three-valued satisfiability verdict.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict3 {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Verdict3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict3::Sat => "sat",
            Verdict3::Unsat => "unsat",
            Verdict3::Unknown => "unknown",
        })
    }
}

/// A valuation of the variables of a constraint.
pub type SamplePoint = BTreeMap<Var, Rat>;

/// Splits `c` into `≠`-free rows plus the disequality expressions.
fn rows_and_diseqs(c: &LinearConstraint, cols: &Columns) -> (Vec<Row>, Vec<Row>) {
    if c.is_falsum() {
        return (cols.rows(c), Vec::new());
    }
    let mut rows = Vec::new();
    let mut ne = Vec::new();
    for a in c.conjuncts() {
        if a.rel() == Rel::Ne {
            let e = AtomicConstraint::from_expr(a.expr().clone(), Rel::Eq);
            ne.push(cols.row(&e));
        } else {
            rows.push(cols.row(a));
        }
    }
    (rows, ne)
}

fn negated_strict(r: &Row) -> Row {
    Row { a: r.a.iter().map(|x| -x.clone()).collect(), c: -r.c.clone(), kind: Kind::Lt }
}

fn as_strict(r: &Row) -> Row {
    Row { a: r.a.clone(), c: r.c.clone(), kind: Kind::Lt }
}

/// Rational search with lazy disequality splitting.
fn rat_search(rows: &mut Vec<Row>, ne: &[Row], n: usize) -> Option<Vec<Rat>> {
    let x = dense::sample(rows, n)?;
    let Some(bad) = ne.iter().find(|e| e.value(&x).is_zero()) else {
        return Some(x);
    };
    for side in [as_strict(bad), negated_strict(bad)] {
        rows.push(side);
        let found = rat_search(rows, ne, n);
        rows.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Integer tightening of one row; `None` when it has no integer solution.
fn tighten(r: &Row) -> Option<Row> {
    let mut lcm = BigInt::one();
    for x in r.a.iter().chain(std::iter::once(&r.c)) {
        lcm = lcm.lcm(x.denom());
    }
    let k = Rat::from_integer(lcm);
    let a: Vec<BigInt> = r.a.iter().map(|x| (x * &k).to_integer()).collect();
    let c = (&r.c * &k).to_integer();
    let mut g = BigInt::zero();
    for x in &a {
        g = g.gcd(x);
    }
    if g.is_zero() {
        let ground = Row { a: r.a.clone(), c: Rat::from_integer(c), kind: r.kind };
        return ground.ground_ok().then_some(ground);
    }
    let a: Vec<Rat> = a.iter().map(|x| Rat::from_integer(x / &g)).collect();
    let (c, kind) = match r.kind {
        Kind::Eq => {
            if !c.is_multiple_of(&g) {
                return None;
            }
            (c / &g, Kind::Eq)
        }
        Kind::Le => (c.div_ceil(&g), Kind::Le),
        Kind::Lt => (c.div_floor(&g) + 1, Kind::Le),
    };
    Some(Row { a, c: Rat::from_integer(c), kind })
}

/// Integer search: rational witness, then branching on a fractional
/// coordinate or a violated disequality. `budget` counts branch nodes.
fn int_search(rows: &mut Vec<Row>, ne: &[Row], n: usize, budget: &mut usize) -> (Verdict3, Option<Vec<Rat>>) {
    let Some(tight) = rows.iter().map(tighten).collect::<Option<Vec<Row>>>() else {
        return (Verdict3::Unsat, None);
    };
    let Some(x) = dense::sample(&tight, n) else {
        return (Verdict3::Unsat, None);
    };
    let branches: Vec<Row> = if let Some(j) = (0..n).find(|&j| !x[j].is_integer()) {
        let mut lo = vec![Rat::zero(); n];
        lo[j] = Rat::one();
        let mut hi = vec![Rat::zero(); n];
        hi[j] = -Rat::one();
        vec![
            Row { a: lo, c: -x[j].floor(), kind: Kind::Le },
            Row { a: hi, c: x[j].ceil(), kind: Kind::Le },
        ]
    } else if let Some(bad) = ne.iter().find(|e| e.value(&x).is_zero()) {
        vec![as_strict(bad), negated_strict(bad)]
    } else {
        return (Verdict3::Sat, Some(x));
    };
    if *budget == 0 {
        return (Verdict3::Unknown, None);
    }
    *budget -= 1;
    let mut verdict = Verdict3::Unsat;
    for b in branches {
        rows.push(b);
        let (v, w) = int_search(rows, ne, n, budget);
        rows.pop();
        match v {
            Verdict3::Sat => return (v, w),
            Verdict3::Unknown => verdict = Verdict3::Unknown,
            Verdict3::Unsat => {}
        }
    }
    (verdict, None)
}

fn to_point(cols: &Columns, x: &[Rat]) -> SamplePoint {
    cols.vars.iter().cloned().zip(x.iter().cloned()).collect()
}

/// Satisfiability in the given mode with a witness point.
pub fn solv(c: &LinearConstraint, mode: Mode, budget: usize) -> (Verdict3, Option<SamplePoint>) {
    let cols = Columns::new(c.vars());
    let (mut rows, ne) = rows_and_diseqs(c, &cols);
    let n = cols.len();
    match mode {
        Mode::Rational => match rat_search(&mut rows, &ne, n) {
            Some(x) => (Verdict3::Sat, Some(to_point(&cols, &x))),
            None => (Verdict3::Unsat, None),
        },
        Mode::Integer => {
            let mut budget = budget;
            let (v, x) = int_search(&mut rows, &ne, n, &mut budget);
            (v, x.map(|x| to_point(&cols, &x)))
        }
    }
}

/// Rational satisfiability.
pub fn is_sat(c: &LinearConstraint) -> bool {
    sample(c).is_some()
}

/// A rational model of `c`, if any.
pub fn sample(c: &LinearConstraint) -> Option<SamplePoint> {
    solv(c, Mode::Rational, 0).1
}

/// Satisfiability in `mode` with the default budget.
pub fn check(c: &LinearConstraint, mode: Mode) -> Verdict3 {
    solv(c, mode, DEFAULT_BRANCH_BUDGET).0
}

/// A model of `c` that violates every disjunct of `ds`, if any.
pub fn disjunction_counterexample(c: &LinearConstraint, ds: &[LinearConstraint]) -> Option<SamplePoint> {
    let Some(first) = ds.first() else {
        return sample(c);
    };
    if first.is_falsum() {
        return disjunction_counterexample(c, &ds[1..]);
    }
    if !is_sat(c) {
        return None;
    }
    for a in first.conjuncts() {
        for n in a.negation() {
            let next = c.clone().with(n);
            if let Some(w) = disjunction_counterexample(&next, &ds[1..]) {
                return Some(w);
            }
        }
    }
    None
}

/// `c ⊨ d1 ∨ … ∨ dk` over the rationals.
pub fn entails_disjunction(c: &LinearConstraint, ds: &[LinearConstraint]) -> bool {
    disjunction_counterexample(c, ds).is_none()
}

/// `c ⊨ d1 ∨ … ∨ dk` over the values of `mode`. In integer mode each
/// candidate counterexample region is searched with the default budget; an
/// undecided region counts as a counterexample.
pub fn entails_disjunction_in(c: &LinearConstraint, ds: &[LinearConstraint], mode: Mode) -> bool {
    fn open(c: &LinearConstraint, ds: &[LinearConstraint], mode: Mode) -> bool {
        if !is_sat(c) {
            return false;
        }
        let Some(first) = ds.first() else {
            return mode == Mode::Rational || check(c, mode) != Verdict3::Unsat;
        };
        if first.is_falsum() {
            return open(c, &ds[1..], mode);
        }
        first.conjuncts().iter().any(|a| a.negation().into_iter().any(|n| open(&c.clone().with(n), &ds[1..], mode)))
    }
    !open(c, ds, mode)
}

/// Every rational model of `c1` is a model of `c2`.
pub fn entail(c1: &LinearConstraint, c2: &LinearConstraint) -> bool {
    entail_witness(c1, c2).is_none()
}

/// A model of `c1` outside `c2`, or `None` when `c1 ⊨ c2`.
pub fn entail_witness(c1: &LinearConstraint, c2: &LinearConstraint) -> Option<SamplePoint> {
    disjunction_counterexample(c1, std::slice::from_ref(c2))
}

/// `c ⊨ a` for a single atomic constraint.
pub fn entails_atom(c: &LinearConstraint, a: &AtomicConstraint) -> bool {
    a.negation().into_iter().all(|n| !is_sat(&c.clone().with(n)))
}

/// Mutual entailment.
pub fn equivalent(c1: &LinearConstraint, c2: &LinearConstraint) -> bool {
    entail(c1, c2) && entail(c2, c1)
}

/// Existential projection of `c` onto `keep`; disequalities survive only when
/// they mention kept variables alone.
pub fn proj(c: &LinearConstraint, keep: &BTreeSet<Var>) -> LinearConstraint {
    if c.is_falsum() || !is_sat(c) {
        return LinearConstraint::falsum();
    }
    let cols = Columns::new(c.vars());
    let (rows, _) = rows_and_diseqs(c, &cols);
    let drop: Vec<usize> = (0..cols.len()).filter(|&j| !keep.contains(&cols.vars[j])).collect();
    let Some(out) = dense::eliminate(&rows, &drop) else {
        return LinearConstraint::falsum();
    };
    let mut res = cols.constraint(&out);
    for a in c.conjuncts().iter().filter(|a| a.rel() == Rel::Ne) {
        if a.vars().all(|v| keep.contains(v)) {
            res.push(a.clone());
        }
    }
    simplify(&res)
}

/// Merges complementary inequality pairs `e ≤ 0 ∧ -e ≤ 0` into `e = 0`,
/// keeping the position of the first, and removes duplicates.
fn merge_pairs(c: &LinearConstraint) -> LinearConstraint {
    let cs = c.dedup();
    let conj = cs.conjuncts();
    let mut used = vec![false; conj.len()];
    let mut out = LinearConstraint::top();
    for i in 0..conj.len() {
        if used[i] {
            continue;
        }
        let a = &conj[i];
        if a.rel() == Rel::Le {
            let neg = a.expr().negated();
            if let Some(j) = (i + 1..conj.len()).find(|&j| !used[j] && conj[j].rel() == Rel::Le && *conj[j].expr() == neg) {
                used[j] = true;
                out.push(AtomicConstraint::from_expr(a.expr().clone(), Rel::Eq));
                continue;
            }
        }
        out.push(a.clone());
    }
    out.dedup()
}

/// Above this many conjuncts, [`simplify`] first drops every conjunct
/// implied by the ones kept before it, so that the full scan runs on a
/// short list.
const SIMPLIFY_PREPASS: usize = 16;

/// Equivalent constraint with duplicates merged and redundant conjuncts
/// removed by a single left-to-right scan.
pub fn simplify(c: &LinearConstraint) -> LinearConstraint {
    if c.is_falsum() || !is_sat(c) {
        return LinearConstraint::falsum();
    }
    let merged = merge_pairs(c);
    let mut keep: Vec<AtomicConstraint> = merged.conjuncts().to_vec();
    if keep.len() > SIMPLIFY_PREPASS {
        let mut kept = LinearConstraint::top();
        for a in &keep {
            if !entails_atom(&kept, a) {
                kept.push(a.clone());
            }
        }
        keep = kept.conjuncts().to_vec();
    }
    let mut i = 0;
    while i < keep.len() {
        let rest: LinearConstraint = keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a.clone()).collect();
        if entails_atom(&rest, &keep[i]) {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep.into_iter().collect()
}

/// Closure of the convex hull of two constraints. Strictness is restored for
/// a bound whose strict form both operands entail. Disequalities are
/// dropped; an unsatisfiable operand yields the other.
pub fn convex_hull(c1: &LinearConstraint, c2: &LinearConstraint) -> LinearConstraint {
    let c1 = c1.without_disequalities();
    let c2 = c2.without_disequalities();
    if !is_sat(&c1) {
        return simplify(&c2);
    }
    if !is_sat(&c2) {
        return simplify(&c1);
    }
    if entail(&c1, &c2) {
        return simplify(&c2);
    }
    if entail(&c2, &c1) {
        return simplify(&c1);
    }
    let mut vars: BTreeSet<Var> = c1.vars();
    c2.collect_vars(&mut vars);
    let n = vars.len();
    let mut cols = Columns::new(vars.iter().cloned());
    let ys: Vec<usize> = vars.iter().map(|v| cols.add(Var::new(&format!("%y_{}", v.name())))).collect();
    let lambda = cols.add(Var::new("%lambda"));
    let width = cols.len();
    let mut rows = Vec::new();
    let closed = |r: &Row| if r.kind == Kind::Lt { Kind::Le } else { r.kind };
    let base = Columns::new(vars.iter().cloned());
    // c1 on y scaled by lambda
    for r in base.rows(&c1) {
        let mut a = vec![Rat::zero(); width];
        for (i, x) in r.a.iter().enumerate() {
            a[ys[i]] = x.clone();
        }
        a[lambda] = r.c.clone();
        rows.push(Row { a, c: Rat::zero(), kind: closed(&r) });
    }
    // c2 on x - y scaled by 1 - lambda
    for r in base.rows(&c2) {
        let mut a = vec![Rat::zero(); width];
        for (i, x) in r.a.iter().enumerate() {
            a[i] = x.clone();
            a[ys[i]] = -x.clone();
        }
        a[lambda] = -r.c.clone();
        rows.push(Row { a, c: r.c.clone(), kind: closed(&r) });
    }
    let mut lo = vec![Rat::zero(); width];
    lo[lambda] = -Rat::one();
    rows.push(Row { a: lo, c: Rat::zero(), kind: Kind::Le });
    let mut hi = vec![Rat::zero(); width];
    hi[lambda] = Rat::one();
    rows.push(Row { a: hi, c: -Rat::one(), kind: Kind::Le });
    let drop: Vec<usize> = (n..width).collect();
    let out = dense::eliminate(&rows, &drop).expect("hull of satisfiable operands is satisfiable");
    let hull = cols.constraint(&out);
    let restricted: LinearConstraint = hull
        .conjuncts()
        .iter()
        .map(|a| {
            let s = a.strict();
            if a.rel() == Rel::Le && entails_atom(&c1, &s) && entails_atom(&c2, &s) {
                s
            } else {
                a.clone()
            }
        })
        .collect();
    simplify(&restricted)
}

/// Hull of finitely many constraints; `false` for none.
pub fn convex_hull_all(cs: &[LinearConstraint]) -> LinearConstraint {
    cs.iter().fold(LinearConstraint::falsum(), |acc, c| convex_hull(&acc, c))
}

/// `c1 ∇ c2`: the conjuncts of `c1` (equalities split into two inequalities)
/// entailed by `c2`. Complementary pairs that survive are printed as
/// equalities again. A `false` first operand yields `c2`.
pub fn widen(c1: &LinearConstraint, c2: &LinearConstraint) -> LinearConstraint {
    if c1.is_falsum() {
        return c2.clone();
    }
    let kept: LinearConstraint = c1
        .conjuncts()
        .iter()
        .filter(|a| a.rel() != Rel::Ne)
        .flat_map(|a| a.split_equality())
        .filter(|a| entails_atom(c2, a))
        .collect();
    merge_pairs(&kept)
}

/// The `≠`-free constraints whose union of models is the models of `c`.
pub fn split_disequalities(c: &LinearConstraint) -> Vec<LinearConstraint> {
    let mut out = vec![LinearConstraint::top()];
    if c.is_falsum() {
        return vec![LinearConstraint::falsum()];
    }
    for a in c.conjuncts() {
        if a.rel() == Rel::Ne {
            let lt = AtomicConstraint::from_expr(a.expr().clone(), Rel::Lt);
            let gt = AtomicConstraint::from_expr(a.expr().negated(), Rel::Lt);
            out = out.into_iter().flat_map(|d| [d.clone().with(lt.clone()), d.with(gt.clone())]).collect();
        } else {
            for d in out.iter_mut() {
                d.push(a.clone());
            }
        }
    }
    out
}

/// Integer tightening of every conjunct: strict bounds become non-strict,
/// coefficients are divided by their gcd with the constant rounded inward.
/// Disequalities are kept; an equality without integer solutions gives
/// `false`.
pub fn tighten_integer(c: &LinearConstraint) -> LinearConstraint {
    if c.is_falsum() {
        return c.clone();
    }
    let cols = Columns::new(c.vars());
    let mut out = LinearConstraint::top();
    for a in c.conjuncts() {
        if a.rel() == Rel::Ne {
            out.push(a.clone());
            continue;
        }
        match tighten(&cols.row(a)) {
            Some(r) => out.push(cols.atomic(&r)),
            None => return LinearConstraint::falsum(),
        }
    }
    out
}
