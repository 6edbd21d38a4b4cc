//! File formats, dataset loaders and the experiment harness built on
//! [`mcomplete_core`].

pub mod bench;
pub mod clock;
pub mod config_file;
pub mod error;
pub mod formats;
pub mod movielens;

pub use error::{Error, Result};
