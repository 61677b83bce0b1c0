//! Library surface of the experiment runner (used by the binary and the
//! test suite).

pub mod config;
pub mod experiments;
