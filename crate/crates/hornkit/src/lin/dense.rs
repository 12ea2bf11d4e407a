//! Dense row representation and Fourier–Motzkin elimination.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};

use crate::syntax::{AtomicConstraint, LinearConstraint, LinearTerm, Rat, Rel, Var};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub(crate) enum Kind {
    Eq,
    Le,
    Lt,
}

/// `a·x + c ⋈ 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Row {
    pub a: Vec<Rat>,
    pub c: Rat,
    pub kind: Kind,
}

impl Row {
    pub fn is_ground(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }

    /// Truth of a ground row.
    pub fn ground_ok(&self) -> bool {
        match self.kind {
            Kind::Eq => self.c.is_zero(),
            Kind::Le => !self.c.is_positive(),
            Kind::Lt => self.c.is_negative(),
        }
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        let mut acc = self.c.clone();
        for (ai, xi) in self.a.iter().zip(x) {
            if !ai.is_zero() {
                acc += ai * xi;
            }
        }
        acc
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        let v = self.value(x);
        match self.kind {
            Kind::Eq => v.is_zero(),
            Kind::Le => !v.is_positive(),
            Kind::Lt => v.is_negative(),
        }
    }

    /// Positive rescaling so that the first non-zero coefficient is ±1.
    fn normalised(mut self) -> Row {
        if let Some(lead) = self.a.iter().find(|x| !x.is_zero()).cloned() {
            let mut k = lead.abs().recip();
            if self.kind == Kind::Eq && lead.is_negative() {
                k = -k;
            }
            for x in self.a.iter_mut() {
                *x *= &k;
            }
            self.c *= &k;
        }
        self
    }
}

/// Variables of a dense system, in column order.
#[derive(Clone, Debug, Default)]
pub(crate) struct Columns {
    pub vars: Vec<Var>,
    index: BTreeMap<Var, usize>,
}

impl Columns {
    pub fn new<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        let mut cols = Columns::default();
        for v in vars {
            cols.add(v);
        }
        cols
    }

    pub fn add(&mut self, v: Var) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        self.vars.push(v.clone());
        self.index.insert(v, self.vars.len() - 1);
        self.vars.len() - 1
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    #[cfg(test)]
    pub fn get(&self, v: &Var) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Dense row for a non-`≠` atomic constraint.
    pub fn row(&self, a: &AtomicConstraint) -> Row {
        let mut coeffs = vec![Rat::zero(); self.len()];
        for (v, c) in a.expr().coeffs() {
            coeffs[self.index[v]] = c.clone();
        }
        let kind = match a.rel() {
            Rel::Eq => Kind::Eq,
            Rel::Le => Kind::Le,
            Rel::Lt => Kind::Lt,
            Rel::Ne => panic!("disequalities must be split before building rows"),
        };
        Row { a: coeffs, c: a.expr().constant_part().clone(), kind }
    }

    pub fn term(&self, a: &[Rat], c: &Rat) -> LinearTerm {
        LinearTerm::from_parts(
            a.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (self.vars[i].clone(), x.clone())),
            c.clone(),
        )
    }

    pub fn atomic(&self, r: &Row) -> AtomicConstraint {
        let rel = match r.kind {
            Kind::Eq => Rel::Eq,
            Kind::Le => Rel::Le,
            Kind::Lt => Rel::Lt,
        };
        AtomicConstraint::from_expr(self.term(&r.a, &r.c), rel)
    }

    pub fn constraint(&self, rows: &[Row]) -> LinearConstraint {
        rows.iter().map(|r| self.atomic(r)).collect()
    }

    /// Rows for a `≠`-free constraint (the falsum marker gives `0 < 0`).
    pub fn rows(&self, c: &LinearConstraint) -> Vec<Row> {
        if c.is_falsum() {
            return vec![Row { a: vec![Rat::zero(); self.len()], c: Rat::zero(), kind: Kind::Lt }];
        }
        c.conjuncts().iter().map(|a| self.row(a)).collect()
    }
}

/// Substitutes `x_j := -(Σ_{i≠j} a_i x_i + c) / a_j` from equality `eq` into
/// `row`.
fn substitute_eq(row: &mut Row, eq: &Row, j: usize) {
    let f = &row.a[j] / &eq.a[j];
    if f.is_zero() {
        return;
    }
    for (ri, ei) in row.a.iter_mut().zip(&eq.a) {
        if !ei.is_zero() {
            *ri -= &f * ei;
        }
    }
    row.a[j] = Rat::zero();
    row.c -= &f * &eq.c;
}

/// Drops satisfied ground rows; `None` when a ground row is violated.
fn check_ground(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        if r.is_ground() {
            if !r.ground_ok() {
                return None;
            }
        } else {
            out.push(r);
        }
    }
    Some(out)
}

/// An inequality row with the indices of the input rows it combines.
#[derive(Clone, Debug)]
struct Tracked {
    row: Row,
    from: BTreeSet<usize>,
}

/// Fourier–Motzkin over inequality rows. Each derived row remembers its
/// input rows; after `k` eliminations a row combining more than `k + 1`
/// inputs is implied by the others and is dropped (Kohler's criterion),
/// which keeps the row count from exploding.
struct Fm {
    rows: Vec<Tracked>,
    eliminated: usize,
}

impl Fm {
    fn new(rows: Vec<Row>) -> Self {
        let rows = rows.into_iter().enumerate().map(|(i, row)| Tracked { row, from: BTreeSet::from([i]) }).collect();
        Fm { rows: dedup_tracked(rows), eliminated: 0 }
    }

    fn rows(&self) -> Vec<Row> {
        self.rows.iter().map(|t| t.row.clone()).collect()
    }

    /// Eliminates column `j`; `false` when a contradiction appears.
    fn step(&mut self, j: usize) -> bool {
        self.eliminated += 1;
        let limit = self.eliminated + 1;
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut out = Vec::new();
        for t in std::mem::take(&mut self.rows) {
            if t.row.a[j].is_positive() {
                pos.push(t);
            } else if t.row.a[j].is_negative() {
                neg.push(t);
            } else {
                out.push(t);
            }
        }
        for p in &pos {
            for n in &neg {
                let from: BTreeSet<usize> = p.from.union(&n.from).copied().collect();
                if from.len() > limit {
                    continue;
                }
                let kp = -n.row.a[j].clone();
                let kn = p.row.a[j].clone();
                let a: Vec<Rat> = p.row.a.iter().zip(&n.row.a).map(|(x, y)| x * &kp + y * &kn).collect();
                let c = &p.row.c * &kp + &n.row.c * &kn;
                let kind = if p.row.kind == Kind::Lt || n.row.kind == Kind::Lt { Kind::Lt } else { Kind::Le };
                out.push(Tracked { row: Row { a, c, kind }, from });
            }
        }
        let mut kept = Vec::with_capacity(out.len());
        for t in dedup_tracked(out) {
            if t.row.is_ground() {
                if !t.row.ground_ok() {
                    return false;
                }
            } else {
                kept.push(t);
            }
        }
        self.rows = kept;
        true
    }
}

/// Keeps the tightest of parallel inequality rows.
fn dedup_tracked(rows: Vec<Tracked>) -> Vec<Tracked> {
    let mut best: BTreeMap<Vec<Rat>, usize> = BTreeMap::new();
    let mut out: Vec<Tracked> = Vec::new();
    for mut t in rows {
        t.row = t.row.normalised();
        match best.get(&t.row.a) {
            None => {
                best.insert(t.row.a.clone(), out.len());
                out.push(t);
            }
            Some(&i) => {
                let cur = &out[i].row;
                if t.row.c > cur.c || (t.row.c == cur.c && t.row.kind == Kind::Lt && cur.kind != Kind::Lt) {
                    out[i] = t;
                }
            }
        }
    }
    out
}

/// Column with the cheapest elimination among `candidates`.
fn pick_column(rows: &[Row], candidates: &[usize]) -> Option<usize> {
    candidates
        .iter()
        .copied()
        .filter(|&j| rows.iter().any(|r| !r.a[j].is_zero()))
        .min_by_key(|&j| {
            let p = rows.iter().filter(|r| r.a[j].is_positive()).count();
            let n = rows.iter().filter(|r| r.a[j].is_negative()).count();
            (p * n) as isize - (p + n) as isize
        })
}

/// Eliminates the given columns: equalities by substitution, then
/// inequalities by Fourier–Motzkin. Returns `None` when infeasibility is
/// detected on the way.
pub(crate) fn eliminate(rows: &[Row], cols: &[usize]) -> Option<Vec<Row>> {
    let mut rows = check_ground(rows.to_vec())?;
    // equalities first
    loop {
        let found = rows.iter().enumerate().find_map(|(ri, r)| {
            if r.kind != Kind::Eq {
                return None;
            }
            let mut best: Option<usize> = None;
            for &j in cols {
                if !r.a[j].is_zero() && best.map_or(true, |b| r.a[j].abs() == Rat::one() && r.a[b].abs() != Rat::one()) {
                    best = Some(j);
                }
            }
            best.map(|j| (ri, j))
        });
        let Some((ri, j)) = found else { break };
        let eq = rows.remove(ri);
        for r in rows.iter_mut() {
            substitute_eq(r, &eq, j);
        }
        rows = check_ground(rows)?;
    }
    let (eqs, ineqs): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|r| r.kind == Kind::Eq);
    let mut fm = Fm::new(ineqs);
    while let Some(j) = pick_column(&fm.rows(), cols) {
        if !fm.step(j) {
            return None;
        }
    }
    let mut out = eqs;
    out.extend(fm.rows());
    Some(out)
}

/// Rational feasibility with a witness point.
///
/// The witness prefers integral coordinates where the bounds allow it, which
/// keeps branch-and-bound shallow.
pub(crate) fn sample(rows: &[Row], n: usize) -> Option<Vec<Rat>> {
    let mut rows = check_ground(rows.to_vec())?;
    let mut substs: Vec<(usize, Row)> = Vec::new();
    loop {
        let found = rows.iter().enumerate().find_map(|(ri, r)| {
            if r.kind != Kind::Eq {
                return None;
            }
            let unit = (0..n).find(|&j| r.a[j].abs() == Rat::one());
            unit.or_else(|| (0..n).find(|&j| !r.a[j].is_zero())).map(|j| (ri, j))
        });
        let Some((ri, j)) = found else { break };
        let eq = rows.remove(ri);
        for r in rows.iter_mut() {
            substitute_eq(r, &eq, j);
        }
        rows = check_ground(rows)?;
        substs.push((j, eq));
    }
    let mut stages: Vec<(usize, Vec<Row>)> = Vec::new();
    let mut fm = Fm::new(rows);
    let all: Vec<usize> = (0..n).collect();
    loop {
        let cur = fm.rows();
        let Some(j) = pick_column(&cur, &all) else { break };
        stages.push((j, cur.into_iter().filter(|r| !r.a[j].is_zero()).collect()));
        if !fm.step(j) {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); n];
    for (j, involved) in stages.iter().rev() {
        x[*j] = pick_value(involved, &x, *j);
    }
    for (j, eq) in substs.iter().rev() {
        // eq: a_j x_j + rest = 0
        let mut rest = eq.c.clone();
        for (i, ai) in eq.a.iter().enumerate() {
            if i != *j && !ai.is_zero() {
                rest += ai * &x[i];
            }
        }
        x[*j] = -rest / &eq.a[*j];
    }
    debug_assert!(rows_hold(&substs.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>(), &x));
    Some(x)
}

fn rows_hold(rows: &[Row], x: &[Rat]) -> bool {
    rows.iter().all(|r| r.holds(x))
}

/// Chooses a value for column `j` within the bounds implied by `rows` under
/// the partial assignment `x`.
fn pick_value(rows: &[Row], x: &[Rat], j: usize) -> Rat {
    let mut lo: Option<(Rat, bool)> = None;
    let mut hi: Option<(Rat, bool)> = None;
    for r in rows {
        let aj = &r.a[j];
        let mut rest = r.c.clone();
        for (i, ai) in r.a.iter().enumerate() {
            if i != j && !ai.is_zero() {
                rest += ai * &x[i];
            }
        }
        let bound = -rest / aj;
        let strict = r.kind == Kind::Lt;
        if aj.is_positive() {
            // x_j <= bound
            if hi.as_ref().map_or(true, |(h, s)| bound < *h || (bound == *h && strict && !s)) {
                hi = Some((bound, strict));
            }
        } else if lo.as_ref().map_or(true, |(l, s)| bound > *l || (bound == *l && strict && !s)) {
            lo = Some((bound, strict));
        }
    }
    let fits = |v: &Rat| {
        lo.as_ref().map_or(true, |(l, s)| if *s { v > l } else { v >= l })
            && hi.as_ref().map_or(true, |(h, s)| if *s { v < h } else { v <= h })
    };
    let zero = Rat::zero();
    if fits(&zero) {
        return zero;
    }
    let int_above = lo.as_ref().map(|(l, s)| if *s { l.floor() + Rat::one() } else { l.ceil() });
    if let Some(v) = int_above.filter(|v| fits(v)) {
        return v;
    }
    let int_below = hi.as_ref().map(|(h, s)| if *s { h.ceil() - Rat::one() } else { h.floor() });
    if let Some(v) = int_below.filter(|v| fits(v)) {
        return v;
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => {
            if l == h {
                l
            } else {
                (l + h) / Rat::from_integer(2.into())
            }
        }
        (Some((l, _)), None) => l + Rat::one(),
        (None, Some((h, _))) => h - Rat::one(),
        (None, None) => Rat::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_constraint, rat};

    fn system(text: &str) -> (Columns, Vec<Row>) {
        let c = parse_constraint(text).unwrap();
        let cols = Columns::new(c.vars());
        let rows = cols.rows(&c);
        (cols, rows)
    }

    #[test]
    fn sample_satisfies_rows() {
        let (cols, rows) = system("X<3, 5=X+3, Y>X, Y=<10");
        let x = sample(&rows, cols.len()).unwrap();
        assert!(rows.iter().all(|r| r.holds(&x)));
        assert_eq!(x[cols.get(&Var::new("X")).unwrap()], rat(2));
    }

    #[test]
    fn strict_bounds_meeting_are_infeasible() {
        let (cols, rows) = system("X>0, X<0");
        assert!(sample(&rows, cols.len()).is_none());
        let (cols, rows) = system("X>=0, X=<0");
        assert!(sample(&rows, cols.len()).is_some());
    }

    #[test]
    fn elimination_projects_chain() {
        // X=Y+1, Y>=0 projected on X gives X>=1
        let (cols, rows) = system("X=Y+1, Y>=0");
        let y = cols.get(&Var::new("Y")).unwrap();
        let out = eliminate(&rows, &[y]).unwrap();
        assert_eq!(cols.constraint(&out).to_string(), "X>=1");
    }

    #[test]
    fn dedup_keeps_tightest() {
        let (cols, rows) = system("X=<3, X<3, X=<5, 2*X=<4");
        let out = Fm::new(rows).rows();
        assert_eq!(cols.constraint(&out).to_string(), "X=<2");
    }
}
