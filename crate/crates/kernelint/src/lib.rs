//! Function-measure kernels, self-integrals over Riemann systems, and Monte
//! Carlo checks of stochastic integrals for jointly Gaussian pairs `(Z, M)`.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod interval;
pub mod kernels;
pub mod measures;
pub mod numeric;
pub mod quadrature;
pub mod riemann;
pub mod selfint;
pub mod tensorprod;

pub use catalog::{make_kernel, KernelSpec};
pub use error::{Error, Result};
pub use interval::Interval;
pub use kernels::{IncrementKernel, KernelHandle, Psi2, SecondOrderKernel};
pub use measures::{Measure1D, Measure2D};
pub use riemann::{PartitionScheme, RiemannSystem, TagRule};
pub use selfint::{SelfIntegralReport, Verdict};
