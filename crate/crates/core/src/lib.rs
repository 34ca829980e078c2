//! Finite-dimensional verification of calibrated geometric structures on flat
//! tori: Calabi-Yau and Kähler-Einstein structures, their orbit and symbol
//! complexes, special Lagrangian subtori and the dimension bookkeeping of
//! their moduli.

pub mod checks;
pub mod corpus;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod orbit;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod slag;
pub mod structures;
pub mod torus;
pub mod tuple;

pub use error::{Error, Result};
