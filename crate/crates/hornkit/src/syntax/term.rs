//! Variables, exact rationals and linear terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};

/// Exact arbitrary-precision rational number.
pub type Rat = BigRational;

/// Builds a rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Builds the rational `num/den`. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// A logical variable.
///
/// User variables start with an uppercase letter or an underscore. Names
/// starting with `%` are reserved for internal auxiliaries and can never
/// clash with parsed variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// True for reserved internal names.
    pub fn is_internal(&self) -> bool {
        self.0.starts_with('%')
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// `Σ coeff·var + constant` with no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<Var, Rat>,
    constant: Rat,
}

impl LinearTerm {
    pub fn zero() -> Self {
        LinearTerm::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn int(n: i64) -> Self {
        LinearTerm::constant(rat(n))
    }

    pub fn var(v: Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rat::one());
        LinearTerm { coeffs, constant: Rat::zero() }
    }

    /// Builds a term from `(var, coeff)` pairs, merging repeated variables.
    pub fn from_parts<I: IntoIterator<Item = (Var, Rat)>>(parts: I, constant: Rat) -> Self {
        let mut t = LinearTerm::constant(constant);
        for (v, c) in parts {
            t.add_coeff(v, c);
        }
        t
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn coeff(&self, v: &Var) -> Rat {
        self.coeffs.get(v).cloned().unwrap_or_else(Rat::zero)
    }

    /// Non-zero coefficients in canonical variable order.
    pub fn coeffs(&self) -> impl Iterator<Item = (&Var, &Rat)> {
        self.coeffs.iter()
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    /// `Some(v)` when the term is exactly `1·v`.
    pub fn as_var(&self) -> Option<&Var> {
        if self.constant.is_zero() && self.coeffs.len() == 1 {
            let (v, c) = self.coeffs.iter().next().unwrap();
            if c.is_one() {
                return Some(v);
            }
        }
        None
    }

    /// `Some(c)` when the term has no variables.
    pub fn as_constant(&self) -> Option<&Rat> {
        if self.coeffs.is_empty() {
            Some(&self.constant)
        } else {
            None
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        out.extend(self.coeffs.keys().cloned());
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn add_coeff(&mut self, v: Var, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn plus(&self, other: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_coeff(v.clone(), c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn minus(&self, other: &LinearTerm) -> LinearTerm {
        self.plus(&other.scaled(&-Rat::one()))
    }

    pub fn negated(&self) -> LinearTerm {
        self.scaled(&-Rat::one())
    }

    pub fn scaled(&self, k: &Rat) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Replaces every occurrence of `v` by `by`.
    pub fn substitute(&self, v: &Var, by: &LinearTerm) -> LinearTerm {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(v);
                rest.plus(&by.scaled(c))
            }
        }
    }

    /// Simultaneous substitution; variables outside the map are kept.
    pub fn substitute_all(&self, map: &BTreeMap<Var, LinearTerm>) -> LinearTerm {
        let mut out = LinearTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match map.get(v) {
                Some(t) => out = out.plus(&t.scaled(c)),
                None => out.add_coeff(v.clone(), c.clone()),
            }
        }
        out
    }

    /// Variable-for-variable renaming.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinearTerm {
        let mut out = LinearTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            let nv = map.get(v).cloned().unwrap_or_else(|| v.clone());
            out.add_coeff(nv, c.clone());
        }
        out
    }

    /// Evaluates under an assignment; unassigned variables count as zero.
    pub fn eval(&self, env: &BTreeMap<Var, Rat>) -> Rat {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            if let Some(x) = env.get(v) {
                acc += c * x;
            }
        }
        acc
    }
}

impl fmt::Debug for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Writes `|c|` in the concrete syntax (`3`, `1/2`).
pub(crate) fn write_abs_rat(f: &mut fmt::Formatter<'_>, c: &Rat) -> fmt::Result {
    let a = c.abs();
    if a.is_integer() {
        write!(f, "{}", a.numer())
    } else {
        write!(f, "{}/{}", a.numer(), a.denom())
    }
}

/// Writes a signed sum of `(coeff, var)` monomials and a constant.
pub(crate) fn write_sum<'a, I>(f: &mut fmt::Formatter<'_>, monomials: I, constant: &Rat) -> fmt::Result
where
    I: IntoIterator<Item = (&'a Var, &'a Rat)>,
{
    let mut first = true;
    for (v, c) in monomials {
        if c.is_negative() {
            f.write_str("-")?;
        } else if !first {
            f.write_str("+")?;
        }
        if !c.abs().is_one() {
            write_abs_rat(f, c)?;
            f.write_str("*")?;
        }
        write!(f, "{v}")?;
        first = false;
    }
    if first {
        if constant.is_negative() {
            f.write_str("-")?;
        }
        write_abs_rat(f, constant)
    } else if !constant.is_zero() {
        f.write_str(if constant.is_negative() { "-" } else { "+" })?;
        write_abs_rat(f, constant)
    } else {
        Ok(())
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, self.coeffs.iter(), &self.constant)
    }
}
