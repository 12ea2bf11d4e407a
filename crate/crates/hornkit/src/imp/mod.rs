//! A small C-like imperative language and its translation into verification
//! conditions.
//!
//! Programs are integer functions built from assignments, calls, `if`/`else`
//! and `while`, ending in a single `return`. A correctness triple is attached
//! through pragma comments (`// pre:`, `// post:`, `// entry: v = f(args);`).
//!
//! - [`parse_imp`]: source text to [`ImpProgram`] and [`TripleSpec`]
//! - [`translate_bigstep`]: one predicate per function (inputs and result)
//!   and per loop (live variables and outputs); the goal conjoins the
//!   precondition, the negated postcondition and the entry calls
//! - [`translate_reach`]: linear clauses for backward reachability of the
//!   error state from the entry, with one predicate per cut point (entry and
//!   loop heads) carrying the live variables
//!
//! Expressions are linear: products need a constant factor, division does
//! not exist. Generated clauses are in integer mode.

mod ast;
mod bigstep;
mod cond;
mod names;
mod parse;
mod reach;

pub use ast::{Entry, Function, ImpProgram, Stmt, TripleSpec};
pub use bigstep::translate_bigstep;
pub use cond::Cond;
pub use parse::parse_imp;
pub use reach::translate_reach;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImpError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: non-linear expression")]
    NonLinear { line: usize },
    #[error("line {line}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, name: String },
    #[error("line {line}: unknown function `{name}`")]
    UnknownFunction { line: usize, name: String },
    #[error("line {line}: `{name}` expects {expected} arguments, got {found}")]
    Arity { line: usize, name: String, expected: usize, found: usize },
    #[error("function `{0}` is defined twice")]
    DuplicateFunction(String),
    #[error("{0} must be a conjunction of comparisons")]
    NotConjunctive(&'static str),
    #[error("recursive function `{0}` cannot be inlined into linear clauses")]
    Recursive(String),
}

#[cfg(test)]
pub(crate) mod run {
    //! Concrete interpreter used as an oracle by the translation tests.

    use std::collections::BTreeMap;

    use super::{Cond, ImpProgram, Stmt};
    use crate::syntax::{rat, LinearTerm, Rat, Var};

    type Env = BTreeMap<Var, Rat>;

    fn holds(c: &Cond, env: &Env) -> bool {
        match c {
            Cond::Bool(b) => *b,
            Cond::Cmp(a) => a.holds(env),
            Cond::Not(c) => !holds(c, env),
            Cond::And(a, b) => holds(a, env) && holds(b, env),
            Cond::Or(a, b) => holds(a, env) || holds(b, env),
        }
    }

    fn value(t: &LinearTerm, env: &Env) -> Rat {
        // Unset locals read as zero.
        let full: Env = t.vars().map(|v| (v.clone(), env.get(v).cloned().unwrap_or_else(|| rat(0)))).collect();
        t.eval(&full)
    }

    fn exec(p: &ImpProgram, stmts: &[Stmt], env: &mut Env, fuel: &mut usize) -> Option<()> {
        for s in stmts {
            *fuel = fuel.checked_sub(1)?;
            match s {
                Stmt::Assign { var, expr } => {
                    let v = value(expr, env);
                    env.insert(Var::new(var), v);
                }
                Stmt::Call { var, func, args } => {
                    let vals: Vec<Rat> = args.iter().map(|a| value(a, env)).collect();
                    let r = call(p, func, &vals, fuel)?;
                    env.insert(Var::new(var), r);
                }
                Stmt::If { cond, then, els } => {
                    let arm = if holds(cond, env) { then } else { els };
                    exec(p, arm, env, fuel)?;
                }
                Stmt::While { cond, body } => {
                    while holds(cond, env) {
                        *fuel = fuel.checked_sub(1)?;
                        exec(p, body, env, fuel)?;
                    }
                }
            }
        }
        Some(())
    }

    /// Result of `f(args)`, or `None` when `fuel` statements do not suffice.
    pub fn call(p: &ImpProgram, f: &str, args: &[Rat], fuel: &mut usize) -> Option<Rat> {
        let f = p.function(f)?;
        let mut env: Env = f.params.iter().map(|x| Var::new(x)).zip(args.iter().cloned()).collect();
        exec(p, &f.body, &mut env, fuel)?;
        Some(value(&f.ret, &env))
    }
}
