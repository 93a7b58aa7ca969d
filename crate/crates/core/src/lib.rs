//! Probabilistic points-to analysis for a small fork-join imperative
//! language.
//!
//! * [`lang`]: syntax tree, parser, pretty-printer.
//! * [`pts`]: the points-to domain (supports, masses, the weighted join).
//! * [`interp`]: a reference interpreter over weighted states that
//!   enumerates every thread serialization.
//! * [`analyzer`]: the flow-sensitive analysis itself.

pub mod analyzer;
pub mod interp;
pub mod lang;
pub mod prob;
pub mod pts;

pub use prob::Prob;
