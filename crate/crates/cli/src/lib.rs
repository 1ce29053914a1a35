//! File formats, renderers and the `pidkit` command line.

pub mod app;
pub mod builtin;
pub mod error;
pub mod formats;
pub mod render;

pub use app::run;
pub use error::{CliError, CliResult};
