//! External-memory construction of the Burrows-Wheeler transform, suffix
//! array, Psi array and sampled positions, plus BWT inversion, with every
//! large structure kept in sequentially scanned files.

pub mod build;
pub mod error;
pub mod extsort;
pub mod invert;
pub mod format;
pub mod ledger;
pub mod listrank;
pub mod store;
pub mod stream;

pub use error::{Error, Result};
