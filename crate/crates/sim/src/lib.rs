//! Monte Carlo BER sweeps, file formats and the `hcm` command-line tool,
//! built on `hcm-core`.

pub mod cli;
pub mod compare;
pub mod config;
pub mod formats;
pub mod presets;
pub mod sweep;
