//! Abstract syntax. Expressions are [`LinearTerm`]s whose variables are the
//! source identifiers.

use std::collections::BTreeSet;

use super::cond::Cond;
use crate::syntax::{LinearConstraint, LinearTerm, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    /// `v = e;` (also `int v = e;`, `v += e;`, `v++;`, …).
    Assign { var: String, expr: LinearTerm },
    /// `v = f(e, …);`
    Call { var: String, func: String, args: Vec<LinearTerm> },
    If { cond: Cond, then: Vec<Stmt>, els: Vec<Stmt> },
    While { cond: Cond, body: Vec<Stmt> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<String>,
    /// Declared locals, in declaration order.
    pub locals: Vec<String>,
    pub body: Vec<Stmt>,
    /// The expression of the single trailing `return`.
    pub ret: LinearTerm,
}

impl Function {
    /// Parameters followed by locals.
    pub fn variables(&self) -> Vec<String> {
        self.params.iter().chain(&self.locals).cloned().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ImpProgram {
    pub functions: Vec<Function>,
}

impl ImpProgram {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Functions that can reach themselves through calls.
    pub fn recursive_functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in &self.functions {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<String> = callees(&f.body).into_iter().collect();
            while let Some(g) = stack.pop() {
                if g == f.name {
                    out.insert(f.name.clone());
                    break;
                }
                if seen.insert(g.clone()) {
                    if let Some(gf) = self.function(&g) {
                        stack.extend(callees(&gf.body));
                    }
                }
            }
        }
        out
    }
}

/// `v = f(args)` as requested by an entry pragma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub var: String,
    pub func: String,
    pub args: Vec<LinearTerm>,
}

impl Entry {
    pub fn as_stmt(&self) -> Stmt {
        Stmt::Call { var: self.var.clone(), func: self.func.clone(), args: self.args.clone() }
    }
}

/// Pre/postcondition over the pragma variables and the entry calls run in
/// sequence between them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleSpec {
    pub pre: LinearConstraint,
    pub post: LinearConstraint,
    pub entries: Vec<Entry>,
}

impl TripleSpec {
    /// Disjuncts of the negated postcondition; empty when the postcondition
    /// is `true`.
    pub fn negated_post(&self) -> Vec<LinearConstraint> {
        if self.post.is_falsum() {
            return vec![LinearConstraint::top()];
        }
        let mut out = Vec::new();
        for a in self.post.conjuncts() {
            for n in a.negation() {
                out.push(LinearConstraint::from_atoms([n]));
            }
        }
        out
    }
}

pub(crate) fn callees(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk(stmts, &mut |s| {
        if let Stmt::Call { func, .. } = s {
            out.insert(func.clone());
        }
    });
    out
}

/// Variables assigned anywhere in `stmts`.
pub(crate) fn assigned(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk(stmts, &mut |s| match s {
        Stmt::Assign { var, .. } | Stmt::Call { var, .. } => {
            out.insert(var.clone());
        }
        _ => {}
    });
    out
}

fn walk(stmts: &[Stmt], f: &mut impl FnMut(&Stmt)) {
    for s in stmts {
        f(s);
        match s {
            Stmt::If { then, els, .. } => {
                walk(then, f);
                walk(els, f);
            }
            Stmt::While { body, .. } => walk(body, f),
            _ => {}
        }
    }
}

pub(crate) fn term_vars(t: &LinearTerm) -> impl Iterator<Item = String> + '_ {
    t.vars().map(|v: &Var| v.name().to_string())
}

/// Variables live before `stmts` given those live after.
pub(crate) fn live_before(stmts: &[Stmt], after: &BTreeSet<String>) -> BTreeSet<String> {
    let mut live = after.clone();
    for s in stmts.iter().rev() {
        live = live_before_stmt(s, &live);
    }
    live
}

fn live_before_stmt(s: &Stmt, after: &BTreeSet<String>) -> BTreeSet<String> {
    match s {
        Stmt::Assign { var, expr } => {
            let mut l = after.clone();
            l.remove(var);
            l.extend(term_vars(expr));
            l
        }
        Stmt::Call { var, args, .. } => {
            let mut l = after.clone();
            l.remove(var);
            for a in args {
                l.extend(term_vars(a));
            }
            l
        }
        Stmt::If { cond, then, els } => {
            let mut l = live_before(then, after);
            l.extend(live_before(els, after));
            l.extend(cond.vars());
            l
        }
        Stmt::While { cond, body } => loop_head_live(cond, body, after),
    }
}

/// Variables live at the head of `while (cond) body` given those live after
/// the loop.
pub(crate) fn loop_head_live(cond: &Cond, body: &[Stmt], after: &BTreeSet<String>) -> BTreeSet<String> {
    let mut head: BTreeSet<String> = after.iter().cloned().chain(cond.vars()).collect();
    loop {
        let mut next = head.clone();
        next.extend(live_before(body, &head));
        if next == head {
            return head;
        }
        head = next;
    }
}
