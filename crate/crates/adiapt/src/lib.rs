pub mod adiabatic;
pub mod config;
pub mod dvr;
pub mod effective;
pub mod error;
pub mod exact;
pub mod models;
pub mod numerics;
pub mod oscillator;
pub mod radial;

pub use error::{Error, Result};
pub use numerics::{HermitianMatrix, QuadratureRule};
