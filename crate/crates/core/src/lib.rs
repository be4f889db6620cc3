pub mod error;
pub mod fourier;
pub mod frames;
pub mod linalg;
pub mod measures;
pub mod packing;
pub mod rational;

pub use error::{Error, Result};
