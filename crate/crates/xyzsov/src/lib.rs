//! Numerical workbench for the open XYZ spin-1/2 chain with non-diagonal boundaries:
//! elliptic functions, the eight-vertex reflection algebra, separation-of-variables
//! bases, spectrum and Bethe equations, scalar-product formulas and the
//! trigonometric limit.

pub mod basis;
pub mod campaign;
pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod registry;
pub mod scalar;
pub mod sov;
pub mod spectrum;
pub mod trig;
pub mod vertex;

pub use error::{Error, Result};
pub use linalg::C;
