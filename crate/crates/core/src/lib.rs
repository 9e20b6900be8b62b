//! Numerical laboratory for a counterexample in comonotone trigonometric
//! approximation: a periodic function whose best comonotone approximation
//! error is not controlled by `omega_k(f'; 1/n) / n` for `k > 3`.

pub mod cli;
pub mod construction;
pub mod error;
pub mod jackson;
pub mod numerics;
pub mod shapeapprox;
pub mod smoothness;
pub mod trig;

pub use error::{Error, Result};
