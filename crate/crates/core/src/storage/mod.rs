//! Main files, auxiliary files, and their maintenance under DML.
//!
//! A table is one main file holding every record, padded to `4^n` cells,
//! plus for each searchable common property a stack of auxiliary files. An
//! auxiliary file is a `(value, main address)` list whose values are
//! pairwise distinct, so it can be digitized like a key column. A value that
//! occurs `j` times occupies auxiliary files `1..=j`.

mod persist;
mod schema;
mod table;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::digitizer::DigitizeError;

pub use persist::table_dir;
pub use schema::{Domain, PropertySpec, Role, Schema};
pub use table::{AuxEntry, AuxFile, Record, Table, MAIN_FILE_ID};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("no record with key {0}")]
    NotFound(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("value {value} is outside the domain of `{property}`")]
    Domain { property: String, value: String },
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("corrupt table data: {0}")]
    Corrupt(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Digitize(#[from] DigitizeError),
}
