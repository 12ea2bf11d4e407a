//! Atoms, clauses and programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::constraint::LinearConstraint;
use super::term::{LinearTerm, Var};

/// A predicate symbol (lowercase identifier).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pred(Arc<str>);

impl Pred {
    pub fn new(name: &str) -> Self {
        Pred(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Pred {
    fn from(s: &str) -> Self {
        Pred::new(s)
    }
}

/// `p(t1,…,tn)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<LinearTerm>,
}

impl Atom {
    pub fn new(pred: impl Into<Pred>, args: Vec<LinearTerm>) -> Self {
        Atom { pred: pred.into(), args }
    }

    /// An atom whose arguments are the given variables.
    pub fn with_vars(pred: impl Into<Pred>, vars: &[Var]) -> Self {
        Atom::new(pred, vars.iter().cloned().map(LinearTerm::var).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for a in &self.args {
            a.collect_vars(out);
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Distinct variables in order of first occurrence.
    pub fn ordered_vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in &self.args {
            for v in a.vars() {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn substitute_all(&self, map: &BTreeMap<Var, LinearTerm>) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.substitute_all(map)).collect() }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.rename(map)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Clause head: an atom or `false`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Head {
    False,
    Atom(Atom),
}

impl Head {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Head::False => None,
            Head::Atom(a) => Some(a),
        }
    }

    pub fn pred(&self) -> Option<&Pred> {
        self.atom().map(|a| &a.pred)
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::False => f.write_str("false"),
            Head::Atom(a) => write!(f, "{a}"),
        }
    }
}

/// `H :- c, A1, …, An.`
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Head,
    pub constraint: LinearConstraint,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Head, constraint: LinearConstraint, body: Vec<Atom>) -> Self {
        Clause { head, constraint, body }
    }

    pub fn fact(head: Atom, constraint: LinearConstraint) -> Self {
        Clause::new(Head::Atom(head), constraint, Vec::new())
    }

    pub fn goal(constraint: LinearConstraint, body: Vec<Atom>) -> Self {
        Clause::new(Head::False, constraint, body)
    }

    pub fn is_goal(&self) -> bool {
        matches!(self.head, Head::False)
    }

    pub fn is_fact(&self) -> bool {
        !self.is_goal() && self.body.is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.body.len() <= 1
    }

    pub fn head_pred(&self) -> Option<&Pred> {
        self.head.pred()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        if let Head::Atom(a) = &self.head {
            a.collect_vars(&mut out);
        }
        self.constraint.collect_vars(&mut out);
        for a in &self.body {
            a.collect_vars(&mut out);
        }
        out
    }

    /// Variables of the head and of the body atoms (not of the constraint).
    pub fn interface_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        if let Head::Atom(a) = &self.head {
            a.collect_vars(&mut out);
        }
        for a in &self.body {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn substitute_all(&self, map: &BTreeMap<Var, LinearTerm>) -> Clause {
        Clause {
            head: match &self.head {
                Head::False => Head::False,
                Head::Atom(a) => Head::Atom(a.substitute_all(map)),
            },
            constraint: self.constraint.substitute_all(map),
            body: self.body.iter().map(|a| a.substitute_all(map)).collect(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Clause {
        Clause {
            head: match &self.head {
                Head::False => Head::False,
                Head::Atom(a) => Head::Atom(a.rename(map)),
            },
            constraint: self.constraint.rename(map),
            body: self.body.iter().map(|a| a.rename(map)).collect(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let has_constraint = !self.constraint.is_top();
        if has_constraint || !self.body.is_empty() {
            f.write_str(" :- ")?;
            let mut first = true;
            if has_constraint {
                write!(f, "{}", self.constraint)?;
                first = false;
            }
            for a in &self.body {
                if !first {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
                first = false;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Constraint domain of a program.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Rational,
    Integer,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rational => "rat",
            Mode::Integer => "int",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rat" | "rational" => Ok(Mode::Rational),
            "int" | "integer" => Ok(Mode::Integer),
            other => Err(format!("unknown mode `{other}` (expected rat or int)")),
        }
    }
}

/// A finite set of clauses over one constraint domain.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub mode: Mode,
}

impl Program {
    pub fn new(clauses: Vec<Clause>, mode: Mode) -> Self {
        Program { clauses, mode }
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn goals(&self) -> impl Iterator<Item = (usize, &Clause)> {
        self.clauses.iter().enumerate().filter(|(_, c)| c.is_goal())
    }

    pub fn definite(&self) -> impl Iterator<Item = (usize, &Clause)> {
        self.clauses.iter().enumerate().filter(|(_, c)| !c.is_goal())
    }

    /// Clauses whose head predicate is `p`, with their indices.
    pub fn defining<'a>(&'a self, p: &'a Pred) -> impl Iterator<Item = (usize, &'a Clause)> + 'a {
        self.clauses.iter().enumerate().filter(move |(_, c)| c.head_pred() == Some(p))
    }

    /// Every predicate with its arity, in order of first occurrence.
    pub fn predicates(&self) -> Vec<(Pred, usize)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in &self.clauses {
            for a in c.head.atom().into_iter().chain(c.body.iter()) {
                if seen.insert(a.pred.clone()) {
                    out.push((a.pred.clone(), a.arity()));
                }
            }
        }
        out
    }

    pub fn arity_of(&self, p: &Pred) -> Option<usize> {
        self.clauses
            .iter()
            .flat_map(|c| c.head.atom().into_iter().chain(c.body.iter()))
            .find(|a| &a.pred == p)
            .map(|a| a.arity())
    }

    pub fn pred_names(&self) -> BTreeSet<String> {
        self.predicates().into_iter().map(|(p, _)| p.name().to_string()).collect()
    }

    pub fn all_linear(&self) -> bool {
        self.clauses.iter().all(Clause::is_linear)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mode == Mode::Integer {
            writeln!(f, ":- mode(int).")?;
        }
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
