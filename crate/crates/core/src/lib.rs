pub mod charts;
pub mod error;
pub mod global_fields;
pub mod groebner;
pub mod lie;
pub mod lifting;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod symbolic;

pub use error::{Error, Result};
