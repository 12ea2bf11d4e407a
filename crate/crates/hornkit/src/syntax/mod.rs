//! Clause representation: linear terms and constraints, atoms, clauses and
//! programs, together with parsing, printing, renaming and dependency
//! queries.

mod clause;
mod constraint;
pub mod deps;
mod parse;
mod rename;
mod term;

pub use clause::{Atom, Clause, Head, Mode, Pred, Program};
pub use constraint::{AtomicConstraint, CmpOp, LinearConstraint, Rel};
pub use deps::{dependency_relation, DepNode};
pub use parse::{parse_clause, parse_constraint, parse_program, parse_term, ParseError};
pub use rename::{canonical_vars, fresh_name, fresh_pred, fresh_pred_exact, rename_apart, rename_apart_with, Fresh};
pub use term::{rat, ratio, LinearTerm, Rat, Var};

/// Prints a program in the clause notation (same as its `Display`).
pub fn print_program(p: &Program) -> String {
    p.to_string()
}
