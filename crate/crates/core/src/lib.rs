//! Numerical toolkit for the inhomogeneous incompressible Euler equation on
//! the periodic square `[0, 2π)²`.
//!
//! * [`spectral`] / [`field`]: grid, fields, Fourier operators, dealiasing.
//! * [`elliptic`]: `∇·(a∇φ) = f` with a spectrally preconditioned CG solver.
//! * [`hodge`]: weighted Leray/Hodge projectors and the weighted Biot–Savart law.
//! * [`eulerian`]: pressure-free vorticity solver (RK4) and the Picard scheme.
//! * [`taylor`]: time-Taylor series of the Lagrangian displacement.
//! * [`majorant`]: majorant polynomial and its radius bound.
//! * [`diagnostics`]: energy, level-set vorticity, identity residuals,
//!   second fundamental form, curvature, and Lagrangian/Eulerian comparison.
//! * [`presets`]: initial conditions.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod eulerian;
pub mod field;
pub mod hodge;
pub mod majorant;
pub mod presets;
pub mod spectral;
pub mod taylor;

pub use elliptic::{DensityField, EllipticSolveReport, EllipticSolver};
pub use error::{Error, Result};
pub use field::{Grid, ScalarField, VectorField};
pub use spectral::{Axis, Spectral, SpectralCoeffs};
