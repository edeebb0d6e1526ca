pub mod bf_theory;
pub mod error;
pub mod extraction;
pub mod forms;
pub mod geometry;
pub mod higher_group;
pub mod lie_core;
pub mod quadrature;
pub mod transgression;
pub mod transport;

pub use error::{Error, Result};
