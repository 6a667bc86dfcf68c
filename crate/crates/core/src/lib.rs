//! Adaptive and non-adaptive first-order methods on least-squares
//! classification, with closed-form oracles for the solutions they reach.

pub mod error;
pub mod experiment;
pub mod io;
pub mod lsq;
pub mod optim;
pub mod oracle;
pub mod train;
pub mod tune;

pub use error::{Error, ErrorCategory, Result};
