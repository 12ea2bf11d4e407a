//! Atomic linear relations and their conjunctions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, Integer, One, Signed, Zero};

use super::term::{write_sum, LinearTerm, Rat, Var};

/// Relation of a normalised atomic constraint `expr ⋈ 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ne,
}

/// Surface comparison operators; `>=` and `>` are stored flipped.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CmpOp {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    Ne,
}

/// `expr ⋈ 0`, kept in a canonical scale: integer coefficients and constant
/// with gcd 1, and for `=`/`≠` a positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AtomicConstraint {
    expr: LinearTerm,
    rel: Rel,
}

impl AtomicConstraint {
    /// `lhs op rhs`.
    pub fn new(lhs: &LinearTerm, op: CmpOp, rhs: &LinearTerm) -> Self {
        let (expr, rel) = match op {
            CmpOp::Eq => (lhs.minus(rhs), Rel::Eq),
            CmpOp::Le => (lhs.minus(rhs), Rel::Le),
            CmpOp::Lt => (lhs.minus(rhs), Rel::Lt),
            CmpOp::Ge => (rhs.minus(lhs), Rel::Le),
            CmpOp::Gt => (rhs.minus(lhs), Rel::Lt),
            CmpOp::Ne => (lhs.minus(rhs), Rel::Ne),
        };
        Self::from_expr(expr, rel)
    }

    /// `expr rel 0`, normalised.
    pub fn from_expr(expr: LinearTerm, rel: Rel) -> Self {
        AtomicConstraint { expr: normalise(expr, rel), rel }
    }

    pub fn eq(a: &LinearTerm, b: &LinearTerm) -> Self {
        Self::new(a, CmpOp::Eq, b)
    }

    pub fn le(a: &LinearTerm, b: &LinearTerm) -> Self {
        Self::new(a, CmpOp::Le, b)
    }

    pub fn lt(a: &LinearTerm, b: &LinearTerm) -> Self {
        Self::new(a, CmpOp::Lt, b)
    }

    pub fn ge(a: &LinearTerm, b: &LinearTerm) -> Self {
        Self::new(a, CmpOp::Ge, b)
    }

    pub fn gt(a: &LinearTerm, b: &LinearTerm) -> Self {
        Self::new(a, CmpOp::Gt, b)
    }

    pub fn expr(&self) -> &LinearTerm {
        &self.expr
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    /// Truth value when the constraint mentions no variables.
    pub fn ground_truth(&self) -> Option<bool> {
        let c = self.expr.as_constant()?;
        Some(match self.rel {
            Rel::Eq => c.is_zero(),
            Rel::Le => !c.is_positive(),
            Rel::Lt => c.is_negative(),
            Rel::Ne => !c.is_zero(),
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.expr.vars()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.expr.mentions(v)
    }

    pub fn substitute_all(&self, map: &BTreeMap<Var, LinearTerm>) -> Self {
        Self::from_expr(self.expr.substitute_all(map), self.rel)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Self {
        Self::from_expr(self.expr.rename(map), self.rel)
    }

    pub fn holds(&self, env: &BTreeMap<Var, Rat>) -> bool {
        let v = self.expr.eval(env);
        match self.rel {
            Rel::Eq => v.is_zero(),
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Ne => !v.is_zero(),
        }
    }

    /// The disjuncts of the negation (two for an equality).
    pub fn negation(&self) -> Vec<AtomicConstraint> {
        let e = &self.expr;
        match self.rel {
            Rel::Le => vec![Self::from_expr(e.negated(), Rel::Lt)],
            Rel::Lt => vec![Self::from_expr(e.negated(), Rel::Le)],
            Rel::Eq => vec![
                Self::from_expr(e.clone(), Rel::Lt),
                Self::from_expr(e.negated(), Rel::Lt),
            ],
            Rel::Ne => vec![Self::from_expr(e.clone(), Rel::Eq)],
        }
    }

    /// Equalities become the pair `e ≤ 0 ∧ -e ≤ 0`; others are unchanged.
    pub fn split_equality(&self) -> Vec<AtomicConstraint> {
        match self.rel {
            Rel::Eq => vec![
                Self::from_expr(self.expr.clone(), Rel::Le),
                Self::from_expr(self.expr.negated(), Rel::Le),
            ],
            _ => vec![self.clone()],
        }
    }

    /// Non-strict closure (`<` becomes `≤`).
    pub fn closure(&self) -> AtomicConstraint {
        match self.rel {
            Rel::Lt => AtomicConstraint { expr: self.expr.clone(), rel: Rel::Le },
            _ => self.clone(),
        }
    }

    /// Strict version of an inequality.
    pub fn strict(&self) -> AtomicConstraint {
        match self.rel {
            Rel::Le => AtomicConstraint { expr: self.expr.clone(), rel: Rel::Lt },
            _ => self.clone(),
        }
    }
}

/// Scales to integer coefficients with gcd 1; sign-normalises `=`/`≠`.
fn normalise(expr: LinearTerm, rel: Rel) -> LinearTerm {
    let mut lcm = BigInt::one();
    for (_, c) in expr.coeffs() {
        lcm = lcm.lcm(c.denom());
    }
    lcm = lcm.lcm(expr.constant_part().denom());
    let scaled = expr.scaled(&Rat::from_integer(lcm));
    let mut g = BigInt::zero();
    for (_, c) in scaled.coeffs() {
        g = g.gcd(c.numer());
    }
    g = g.gcd(scaled.constant_part().numer());
    if g.is_zero() {
        return scaled;
    }
    let mut k = Rat::from_integer(g).recip();
    if matches!(rel, Rel::Eq | Rel::Ne) {
        let lead = scaled.coeffs().next().map(|(_, c)| c.clone()).unwrap_or_else(|| scaled.constant_part().clone());
        if lead.is_negative() {
            k = -k;
        }
    }
    scaled.scaled(&k)
}

/// Split of `e = P - N + k` into positive monomials, negated negative
/// monomials and the right-hand constant `-k` (layout `P op N + (-k)`).
fn layout(e: &LinearTerm) -> (Vec<(&Var, Rat)>, Vec<(&Var, Rat)>, Rat) {
    let pos = e.coeffs().filter(|(_, c)| c.is_positive()).map(|(v, c)| (v, c.clone())).collect();
    let neg = e.coeffs().filter(|(_, c)| c.is_negative()).map(|(v, c)| (v, -c.clone())).collect();
    (pos, neg, -e.constant_part().clone())
}

impl fmt::Display for AtomicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (left, right, right_const, op) = match self.rel {
            Rel::Eq | Rel::Ne => {
                // Either orientation is valid: prefer a non-empty left side
                // with fewer terms, then a non-negative right constant.
                let neg = self.expr.negated();
                let a = layout(&self.expr);
                let b = layout(&neg);
                let score = |l: &(Vec<(&Var, Rat)>, Vec<(&Var, Rat)>, Rat)| {
                    (l.0.is_empty(), l.0.len() > l.1.len(), l.2.is_negative())
                };
                let (p, n, k) = if score(&b) < score(&a) { b } else { a };
                let op = if self.rel == Rel::Eq { "=" } else { "=\\=" };
                let p: Vec<(Var, Rat)> = p.into_iter().map(|(v, c)| (v.clone(), c)).collect();
                let n: Vec<(Var, Rat)> = n.into_iter().map(|(v, c)| (v.clone(), c)).collect();
                (p, n, k, op)
            }
            Rel::Le | Rel::Lt => {
                let (p, n, k) = layout(&self.expr);
                let p: Vec<(Var, Rat)> = p.into_iter().map(|(v, c)| (v.clone(), c)).collect();
                let n: Vec<(Var, Rat)> = n.into_iter().map(|(v, c)| (v.clone(), c)).collect();
                // `P op N-k`, or flipped `N op' P+k` when that reads better.
                if !n.is_empty() && (p.is_empty() || p.len() > n.len()) {
                    (n, p, -k, if self.rel == Rel::Le { ">=" } else { ">" })
                } else {
                    (p, n, k, if self.rel == Rel::Le { "=<" } else { "<" })
                }
            }
        };
        write_sum(f, left.iter().map(|(v, c)| (v, c)), &Rat::zero())?;
        f.write_str(op)?;
        write_sum(f, right.iter().map(|(v, c)| (v, c)), &right_const)
    }
}

impl fmt::Debug for AtomicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A conjunction of atomic constraints. The empty conjunction is `true`;
/// a dedicated marker denotes `false`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearConstraint {
    conjuncts: Vec<AtomicConstraint>,
    falsum: bool,
}

impl LinearConstraint {
    pub fn top() -> Self {
        LinearConstraint::default()
    }

    pub fn falsum() -> Self {
        LinearConstraint { conjuncts: Vec::new(), falsum: true }
    }

    pub fn from_atoms<I: IntoIterator<Item = AtomicConstraint>>(atoms: I) -> Self {
        let mut c = LinearConstraint::top();
        for a in atoms {
            c.push(a);
        }
        c
    }

    /// Adds a conjunct; ground-true conjuncts vanish, ground-false ones
    /// collapse the conjunction to the `false` marker.
    pub fn push(&mut self, a: AtomicConstraint) {
        if self.falsum {
            return;
        }
        match a.ground_truth() {
            Some(true) => {}
            Some(false) => {
                self.conjuncts.clear();
                self.falsum = true;
            }
            None => self.conjuncts.push(a),
        }
    }

    pub fn and(&self, other: &LinearConstraint) -> LinearConstraint {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn extend(&mut self, other: &LinearConstraint) {
        if other.falsum {
            self.conjuncts.clear();
            self.falsum = true;
            return;
        }
        for a in &other.conjuncts {
            self.push(a.clone());
        }
    }

    pub fn with(mut self, a: AtomicConstraint) -> LinearConstraint {
        self.push(a);
        self
    }

    pub fn is_top(&self) -> bool {
        !self.falsum && self.conjuncts.is_empty()
    }

    /// The syntactic `false` marker (not a satisfiability test).
    pub fn is_falsum(&self) -> bool {
        self.falsum
    }

    pub fn conjuncts(&self) -> &[AtomicConstraint] {
        &self.conjuncts
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for a in &self.conjuncts {
            a.expr().collect_vars(out);
        }
    }

    pub fn has_disequalities(&self) -> bool {
        self.conjuncts.iter().any(|a| a.rel() == Rel::Ne)
    }

    /// Drops `≠` conjuncts (a sound over-approximation).
    pub fn without_disequalities(&self) -> LinearConstraint {
        if self.falsum {
            return self.clone();
        }
        LinearConstraint::from_atoms(self.conjuncts.iter().filter(|a| a.rel() != Rel::Ne).cloned())
    }

    pub fn substitute_all(&self, map: &BTreeMap<Var, LinearTerm>) -> LinearConstraint {
        if self.falsum {
            return self.clone();
        }
        LinearConstraint::from_atoms(self.conjuncts.iter().map(|a| a.substitute_all(map)))
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinearConstraint {
        if self.falsum {
            return self.clone();
        }
        LinearConstraint::from_atoms(self.conjuncts.iter().map(|a| a.rename(map)))
    }

    /// Whether the assignment satisfies every conjunct.
    pub fn holds(&self, env: &BTreeMap<Var, Rat>) -> bool {
        !self.falsum && self.conjuncts.iter().all(|a| a.holds(env))
    }

    /// Removes syntactically repeated conjuncts, keeping first occurrences.
    pub fn dedup(&self) -> LinearConstraint {
        if self.falsum {
            return self.clone();
        }
        let mut seen = BTreeSet::new();
        let mut out = LinearConstraint::top();
        for a in &self.conjuncts {
            if seen.insert(format!("{:?}/{a}", a.rel())) {
                out.push(a.clone());
            }
        }
        out
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.falsum {
            return f.write_str("0=1");
        }
        if self.conjuncts.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromIterator<AtomicConstraint> for LinearConstraint {
    fn from_iter<I: IntoIterator<Item = AtomicConstraint>>(iter: I) -> Self {
        LinearConstraint::from_atoms(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::term::{rat, ratio};

    fn v(n: &str) -> LinearTerm {
        LinearTerm::var(Var::new(n))
    }

    #[test]
    fn greater_equal_is_stored_flipped() {
        let a = AtomicConstraint::ge(&v("X"), &LinearTerm::int(1));
        assert_eq!(a.rel(), Rel::Le);
        assert_eq!(a.expr().coeff(&Var::new("X")), rat(-1));
        assert_eq!(a.to_string(), "X>=1");
    }

    #[test]
    fn scaling_is_canonical() {
        let a = AtomicConstraint::le(&v("X").scaled(&rat(4)), &LinearTerm::int(6));
        let b = AtomicConstraint::le(&v("X").scaled(&ratio(2, 3)), &LinearTerm::int(1));
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "2*X=<3");
        let e1 = AtomicConstraint::eq(&v("X"), &v("Y"));
        let e2 = AtomicConstraint::eq(&v("Y"), &v("X"));
        assert_eq!(e1, e2);
    }

    #[test]
    fn conventional_layout() {
        let r = v("R");
        let rhs = v("X").plus(&v("R1"));
        assert_eq!(AtomicConstraint::ge(&r, &rhs).to_string(), "R>=R1+X");
        let e = AtomicConstraint::eq(&v("X"), &v("Y").plus(&LinearTerm::int(1)));
        assert_eq!(e.to_string(), "X=Y+1");
        assert_eq!(AtomicConstraint::lt(&v("X"), &LinearTerm::int(3)).to_string(), "X<3");
        assert_eq!(AtomicConstraint::gt(&v("M"), &v("Sum")).to_string(), "Sum<M");
    }

    #[test]
    fn ground_conjuncts_fold_away() {
        let mut c = LinearConstraint::top();
        c.push(AtomicConstraint::le(&LinearTerm::int(0), &LinearTerm::int(1)));
        assert!(c.is_top());
        c.push(AtomicConstraint::gt(&LinearTerm::int(0), &LinearTerm::int(0)));
        assert!(c.is_falsum());
        assert_eq!(c.to_string(), "0=1");
    }

    #[test]
    fn negation_of_equality_has_two_disjuncts() {
        let e = AtomicConstraint::eq(&v("X"), &LinearTerm::int(0));
        let n = e.negation();
        assert_eq!(n.len(), 2);
        let shown: Vec<String> = n.iter().map(|a| a.to_string()).collect();
        assert_eq!(shown, vec!["X<0", "X>0"]);
    }
}
