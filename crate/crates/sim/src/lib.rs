//! Driver for the `nsch-core` solver: configuration files, initial data,
//! the time loop, output files and the command line.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod profiles;
pub mod run;

pub use config::Config;
pub use error::{SimError, SimResult};
