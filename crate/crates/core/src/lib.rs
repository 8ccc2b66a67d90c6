pub mod accretive;
pub mod banach;
pub mod error;
pub mod evolution;
pub mod majorant;
mod parallel;
pub mod picard;
pub mod semigroup;

pub use error::{Error, Result};
