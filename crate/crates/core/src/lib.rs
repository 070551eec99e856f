//! Fuzzy Datalog with existential rules under t-norm conjunction.

pub mod chase;
pub mod cli;
pub mod degrees;
pub mod lang;
pub mod model;
pub mod oracle;
pub mod reason;
