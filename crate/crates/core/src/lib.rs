pub mod breakeven;
pub mod breakflow;
pub mod error;
pub mod grid;
pub mod io;
pub mod ladder;
pub mod metrics;
pub mod parallel;
pub mod pipeline;
pub mod scaling;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
