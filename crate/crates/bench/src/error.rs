use std::path::PathBuf;

use lowrank_core::missingness::MechanismKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(
        "rank {rank}, missing proportion {missing_prop}, {mechanism}, replication {rep}: {source}"
    )]
    Cell {
        rank: usize,
        missing_prop: f64,
        mechanism: MechanismKind,
        rep: usize,
        #[source]
        source: lowrank_core::Error,
    },
}

impl BenchError {
    /// Process exit status: 2 for configuration and input problems, 3 for
    /// numerical failures inside a replication.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Cell {
                source: lowrank_core::Error::Numerical(_),
                ..
            } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
