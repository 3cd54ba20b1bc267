//! Finite-difference solvers and a priori estimate checks for a first-order
//! mean-field game system on a periodic box: a backward Hamilton-Jacobi-Bellman
//! equation coupled to a forward Fokker-Planck equation through a nonlocal
//! power-type coupling.

pub mod error;
pub mod estimates;
pub mod exponents;
pub mod grid;
pub mod fp;
pub mod hjb;
pub mod mfg;
pub mod model;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
