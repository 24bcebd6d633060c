//! A query engine for unsorted flat-file tables whose search step is an exact
//! state-vector simulation of factorized quantum search.
//!
//! Values are digitized into base-4 labels ([`digitizer`]), loaded into a
//! simulated memory ([`qram`]) and located one letter per oracle query
//! ([`quantum`]). Duplicate values are indexed through auxiliary files
//! ([`storage`]), and SELECT filters are split into simple queries whose
//! results are combined by set algebra ([`planner`]).

pub mod digitizer;
pub mod fixtures;
pub mod metrics;
pub mod planner;
pub mod qram;
pub mod quantum;
pub mod query;
pub mod storage;
pub mod value;

use thiserror::Error;

pub use digitizer::{Codec, OrderPolicy};
pub use planner::{Planner, QueryResult, SearchOptions};
pub use quantum::{factorized_search, Label};
pub use storage::{Schema, Table};
pub use value::{Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input, failed query or missing data.
    User,
    /// An invariant of the engine itself was violated.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] query::ParseError),
    #[error(transparent)]
    Bind(#[from] query::BindError),
    #[error(transparent)]
    Storage(#[from] storage::StorageError),
    #[error(transparent)]
    Plan(#[from] planner::PlanError),
    #[error(transparent)]
    Digitize(#[from] digitizer::DigitizeError),
    #[error(transparent)]
    Quantum(#[from] quantum::QuantumError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use planner::PlanError;
        use storage::StorageError;
        match self {
            Error::Plan(PlanError::Consistency(_) | PlanError::Quantum(_) | PlanError::Qram(_)) => {
                ErrorKind::Internal
            }
            Error::Storage(StorageError::Corrupt(_)) => ErrorKind::Internal,
            Error::Quantum(_) => ErrorKind::Internal,
            _ => ErrorKind::User,
        }
    }
}

/// Parses, binds and runs one SELECT against `table`.
pub fn execute(table: &Table, sql: &str, opts: SearchOptions) -> Result<QueryResult, Error> {
    let stmt = query::parse(sql)?;
    let bound = query::bind(&stmt, table.name(), table.schema())?;
    Ok(Planner::with_options(table, opts).select(&bound)?)
}
