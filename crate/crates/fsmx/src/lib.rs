//! Extraction of guarded finite-state machines from collection-backed Java
//! API implementations, by predicate abstraction and SAT-based model
//! enumeration.

pub mod catalog;
pub mod config;
pub mod diff;
pub mod emit;
pub mod encoder;
pub mod formula;
pub mod fsm;
pub mod par;
pub mod predicate;
pub mod sat;
pub mod source;

pub use config::{load_plan, ConfigFile, Plan};
pub use formula::Formula;
pub use fsm::{AbstractState, Analyzer, AnalyzerOptions, Fsm, Guard, StateSpace};
pub use predicate::{Context, IndexedVar, Predicate, StepAtom};
pub use source::ApiUnitModel;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Source(#[from] source::SourceError),
    #[error(transparent)]
    Symbol(#[from] predicate::SymbolError),
    #[error(transparent)]
    Catalog(#[from] catalog::CatalogError),
    #[error(transparent)]
    Solver(#[from] sat::SolverError),
    #[error(transparent)]
    States(#[from] fsm::StateSpaceError),
    #[error(transparent)]
    Oracle(#[from] fsm::OracleError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Doc(#[from] emit::DocError),
    #[error(transparent)]
    Diff(#[from] diff::DiffError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this failure: 1 for configuration and usage
    /// problems, 2 for analysis failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
