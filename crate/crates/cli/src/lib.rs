//! Command implementations behind the `dcpf` binary.

pub mod commands;
pub mod report;
