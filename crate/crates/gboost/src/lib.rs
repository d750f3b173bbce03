//! File formats, evaluation sweeps and the `gboost` command-line driver on top
//! of [`gboost_core`].

pub mod atomic;
pub mod config;
pub mod sweep;
pub mod text;

pub use config::{read_cases, read_pairs, ConfigError};
pub use sweep::{sweep, CellOutcome, SweepCell, SweepError, SweepGrid};
pub use text::{
    format_weight, read_fst, read_symbols, write_diff, write_fst, write_symbols, TextError, Weights,
};
