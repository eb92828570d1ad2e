pub mod analysis;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod reservoir;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
