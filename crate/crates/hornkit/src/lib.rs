//! Constrained Horn clauses over linear rational and integer arithmetic.
//!
//! - [`syntax`]: clause representation, parser, printer, renaming, dependencies
//! - [`lin`]: exact linear-arithmetic engine (satisfiability, entailment,
//!   projection, convex hull, widening)
//! - [`eval`]: immediate-consequence operator, Kleene iteration and bounded
//!   top-down derivations
//! - [`analyze`]: polyhedral abstract interpretation and model checking
//! - [`equiv`]: clause-set equivalence up to renaming
//! - [`transform`]: fold/unfold kernel and satisfiability-preserving
//!   transformations (specialisation, pairing, query-answer, reversal,
//!   argument filtering, strengthening)
//! - [`imp`]: a small imperative language and its verification conditions
//! - [`pipeline`]: composable transformation pipelines with verdict reports

pub mod analyze;
pub mod equiv;
pub mod eval;
pub mod imp;
pub mod lin;
pub mod pipeline;
pub mod syntax;
pub mod transform;
