//! File formats, thread-pool execution, and subcommand plumbing behind the
//! `rtgb` binary. Exposed as a library so integration tests can exercise
//! the format round-trips directly.

pub mod commands;
pub mod exec;
pub mod formats;
