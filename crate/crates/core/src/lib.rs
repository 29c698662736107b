//! Linear collective surrogates for the affine-parametric diffusion problem
//! `-(a(y) u')' = f` on `(0, 1)` with `a(y) = abar + sum_j y_j psi_j`.

pub mod colloc;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod fem1d;
pub mod multiindex;
pub mod legendre;
pub mod surrogate;
pub mod taylor;
pub mod verify;

pub use error::{Error, Result};
