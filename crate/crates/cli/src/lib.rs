//! Command-line front end for the GSD-MA simulator: single runs, sweeps,
//! protocol comparisons, the analytical model and SVG charts.

pub mod analyze;
pub mod cli;
pub mod compare;
pub mod error;
pub mod plot;
pub mod results;
pub mod summary;
pub mod sweep;

pub use cli::main_with;
pub use error::CliError;
