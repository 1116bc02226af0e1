//! Message-passing and proximal splitting solvers for
//!
//! ```text
//! min_x ½‖y - Ax‖² + λ Σ_k f((Kx)_k)
//! ```
//!
//! with `f = |·|, K = I` (lasso) or `f = ‖·‖₂` per site, `K = ∇` on a
//! periodic grid (isotropic total variation).
//!
//! Module map:
//!
//! * [`operators`]: dense feature matrices, the periodic gradient and the
//!   Laplacian spectrum.
//! * [`prox`]: soft and group-soft thresholding with averaged derivatives.
//! * [`fastpath`]: Woodbury and FFT x-updates and the variance formulas.
//! * [`solvers`]: ISTA, AMP, VAMP (separable and TV), ADMM and PRS.
//! * [`datagen`]: synthetic designs, Shepp–Logan phantom, Radon matrix.
//! * [`bench`]: experiment configs, trace CSV, SVG plots, binary matrices.
//!
//! The `parallel` feature (on by default) runs the dense kernels on rayon's
//! pool; without it everything is sequential.

pub mod bench;
pub mod datagen;
pub mod error;
pub mod fastpath;
pub mod fft;
pub mod linalg;
pub mod operators;
pub mod prox;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
pub use operators::{laplacian_spectrum, DenseMap, GradientOperator, GridShape, LinearMap};
pub use solvers::{Algorithm, Budget, Penalty, Problem, SolverOptions};
pub use trace::{Trace, TraceRow};
