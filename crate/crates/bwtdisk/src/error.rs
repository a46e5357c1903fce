use std::io;

use bwtdisk_core::block::BlockError;
use bwtdisk_core::codec::DecodeError;
use bwtdisk_core::oracle::OracleError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("corrupt data: {0}")]
    Corrupt(String),
    #[error("memory budget of {budget} bytes holds fewer than two {width}-byte records")]
    BudgetTooSmall { budget: usize, width: usize },
    #[error("list ranking: {0}")]
    ListRank(String),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }
}
