//! Lattice-surgery scheduling for multi-target C-Phase circuits on
//! patch-based surface-code layouts.

pub mod circuit;
pub mod cycles;
pub mod error;
pub mod exec;
pub mod grouping;
pub mod harness;
pub mod cost;
pub mod layout;
pub mod oracle;
pub mod rotation;
pub mod routing;
pub mod schedule;

pub use cycles::Cycles;
pub use error::{Error, Result};
