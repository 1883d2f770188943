//! HTTP session service and the `agora` command-line front end.

pub mod api;
pub mod cli;
pub mod config;
