//! Command-line front end for the probabilistic points-to analyzer: reports,
//! the interpreter driver and the soundness harness.

pub mod check;
pub mod commands;
pub mod fuzz;
pub mod init;
pub mod report;
