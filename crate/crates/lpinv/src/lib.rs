//! Matrix files, experiment drivers and the acceptance suite for
//! [`lpinv_core`].

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod plot;
pub mod stats;
pub mod verify;

pub use error::{AppError, AppResult};
