//! Command implementations and the benchmark sweep behind the `zk-podi`
//! binary, exposed as a library so integration tests can drive them
//! directly.

pub mod bench;
pub mod commands;
