//! Command implementations and the HTTP session service behind the
//! `vibrogrid` binary.

pub mod commands;
pub mod server;
