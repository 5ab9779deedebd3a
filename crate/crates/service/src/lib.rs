//! Command-line and HTTP front ends for the `sam-prior` library.
//!
//! Both front ends call the same functions in [`commands`], so a config run
//! through `sam-prior simulate` and through `POST /v1/simulate` yields the same
//! JSON bytes.

pub mod cli;
pub mod commands;
pub mod jobs;
pub mod server;

pub use cli::{exit_code, run, Cli};
pub use server::{router, AppState};
