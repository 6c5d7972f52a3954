//! Correlation-picture dynamics of open quantum systems.
//!
//! A joint state is split into the product of its marginals plus a
//! correlation operator. The correlation is generated from the product by a
//! (generally non-Hermitian) parent operator, and with it the reduced
//! dynamics of the system takes an exact Lindblad-like form. The crate
//! builds that generator, its short-time Markovian and weak-correlation
//! approximations, and the reference solvers used to judge them.

pub mod correlation;
pub mod error;
pub mod linalg;
pub mod models;
pub mod random;
pub mod solvers;
pub mod ull;

pub use error::{Error, Result};
pub use linalg::{BipartiteDims, ComplexMatrix, C64};
