pub mod cli;
pub mod cocycle;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod gulliver;
pub mod smfourier;
pub mod spectral;
pub mod xray;

pub use error::{Error, Result};
