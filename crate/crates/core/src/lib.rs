//! Learning flat assumption-based argumentation frameworks under brave
//! stable semantics.

pub mod cli;
pub mod encoding;
pub mod error;
pub mod learner;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod syntax;
pub mod transform;

pub use error::{Error, Result};
