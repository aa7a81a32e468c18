//! Library half of the `coreset` command: configuration, file formats and
//! the subcommand implementations.

pub mod commands;
pub mod config;
pub mod io;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const ERROR: u8 = 1;
    pub const OVER_BUDGET: u8 = 2;
}
