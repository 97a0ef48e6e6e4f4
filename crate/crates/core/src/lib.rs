pub mod ansatz;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod pencils;
pub mod qps;
pub mod rng;
pub mod simulator;
pub mod vqge;

pub use error::{Error, Result};
