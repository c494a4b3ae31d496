//! Compact MILP formulations for the Steiner travelling salesman problem and
//! its variants, together with a small LP/MILP solver and exact brute-force
//! oracles used to cross-check them.

pub mod analysis;
pub mod bnb;
pub mod error;
pub mod formulations;
pub mod instance;
pub mod lp;
pub mod milp;
pub mod oracle;
pub mod solve;

pub use error::{Error, Result};
