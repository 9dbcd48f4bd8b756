pub mod cluster;
pub mod config;
pub mod curve;
pub mod error;
pub mod infotheory;
pub mod ingest;
pub mod major_factor;
pub mod pipeline;
pub mod stats;
pub mod synthetic;
pub mod table;

pub use error::{Error, Result};
