pub mod cli;
pub mod dm;
pub mod ecdf;
pub mod error;
pub mod experiments;
pub mod forecast;
pub mod identification;
pub mod measures;
pub mod models;
pub mod numerics;
pub mod report;
pub mod scoring;
pub mod series;

pub use error::{Error, Result};
