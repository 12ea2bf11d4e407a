//! Satisfiability-preserving clause transformations.
//!
//! - [`TransformState`]: the definition/unfold/fold/delete/replace kernel
//!   with a replayable history and the unfolded-before-folded audit
//! - [`specialise`] and [`predicate_pair`]: definition-driven strategies
//!   with constraint generalisation against ancestor definitions
//! - [`qa_transform`], [`reverse`]: query-answer and reversal encodings
//! - [`raf`], [`far`], [`cleanup`]: redundant argument filtering
//! - [`strengthen`]: conjoin invariants inferred on the query-answer encoding

mod args;
mod drive;
mod qa;
mod reverse;
mod script;
mod state;
mod strengthen;

pub use args::{cleanup, far, raf};
pub use drive::{predicate_pair, specialise, Generalisation, SpecialiseConfig};
pub use qa::{qa_transform, single_goal, QaNames};
pub use reverse::reverse;
pub use script::{parse_script, replay, to_script, Step};
pub use state::{ClauseId, DefId, DefRecord, DeleteMode, TransformState};
pub use strengthen::{strengthen, Strengthened};

use thiserror::Error;

use crate::syntax::Program;

#[derive(Debug, Error, Clone)]
pub enum TransformError {
    #[error("no clause with identifier {0}")]
    NoSuchClause(ClauseId),
    #[error("no definition with identifier {0}")]
    NoSuchDefinition(DefId),
    #[error("clause {clause} has no body atom at position {pos}")]
    BadPosition { clause: ClauseId, pos: usize },
    #[error("predicate `{0}` is not fresh")]
    NotFresh(String),
    #[error("malformed definition: {0}")]
    BadDefinition(String),
    #[error("cannot fold clause {clause} with definition {def}: {reason}")]
    FoldMismatch { clause: ClauseId, def: DefId, reason: String },
    #[error("clause {clause} is definition {def} itself")]
    SelfFold { clause: ClauseId, def: DefId },
    #[error("definition {def} used for folding (step {step}: `{entry}`) was never unfolded")]
    FoldedBeforeUnfolded { def: DefId, step: usize, entry: String },
    #[error("replacement constraint for clause {0} is not equivalent")]
    NotEquivalent(ClauseId),
    #[error("clause {0} is not linear")]
    NonLinear(String),
    #[error("goal {0} has no body atom")]
    EmptyGoal(usize),
    #[error("no goal with index {0}")]
    NoSuchGoal(usize),
    #[error("program has no goal")]
    NoGoals,
    #[error("goal needs at least two body atoms to pair")]
    NothingToPair,
    #[error("budget exhausted: {what}")]
    Budget { what: String, partial: Box<Program> },
    #[error("script line {line}: {msg}")]
    Script { line: usize, msg: String },
}
