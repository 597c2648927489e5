//! Command line, file outputs and the home-wire/1 episode server.

pub mod bench;
pub mod cli;
pub mod client;
pub mod config;
pub mod output;
pub mod server;
pub mod wire;

pub use home_core;
