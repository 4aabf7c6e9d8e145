pub mod cli;
pub mod error;
pub mod exact;
pub mod lattice_density;
mod linalg;
pub mod lorkahler;
pub mod perigeo;
pub mod posgrass;
pub mod quadspace;
pub mod sample;
pub mod torusmod;

pub use error::{Error, Result};
