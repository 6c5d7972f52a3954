//! Concrete system-bath models with closed-form reference dynamics.

pub mod damped_ho;
pub mod dephasing;
pub mod jc;
pub mod quadrature;
pub mod spectral;

pub use damped_ho::{BathTruncation, DampedHoParams};
pub use dephasing::{DephasingEquation, DephasingMethod, DephasingParams};
pub use jc::{JcCoefficients, JcParams};
pub use spectral::{SpectralDensity, SpectralKind};
