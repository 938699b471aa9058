//! Batch front end for `volterra-exec`: reads a key-value config, runs
//! one of the solve, sweep, compare or mc modes and writes CSV files.

pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{parse_config, Entries, Mode, RunConfig};
pub use error::{ConfigError, RunError};
pub use run::run;
