//! Allocation-only building blocks for lightweight, scan-based construction
//! of the Burrows-Wheeler transform, suffix array, Ψ array and sampled
//! inverse suffix array.
//!
//! Nothing in this crate performs I/O. The pass drivers in the `bwtdisk`
//! crate feed these routines from sequential streams; every routine here
//! consumes its inputs in one direction and keeps at most one text block
//! resident.
//!
//! Conventions: the text is extended with a conceptual sentinel that is
//! strictly smaller than every byte ([`SENTINEL`]). Positions and ranks are
//! 0-based throughout.
#![no_std]

extern crate alloc;

pub mod bits;
pub mod block;
pub mod codec;
pub mod lf;
pub mod merge;
pub mod oracle;
pub mod rank;
pub mod sais;

mod symbol;

pub use symbol::{sym, Symbol, ALPHABET, SENTINEL};
