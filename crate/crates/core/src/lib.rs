pub mod data;
pub mod delay;
pub mod env;
pub mod error;
pub mod experiment;
pub mod metacub;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod rng;
pub mod types;

pub use error::{Error, Result};
