//! Stable Gaussian radial-basis-function interpolation in the flat limit.
//!
//! Gaussians `exp(-ε²(x-c)²)` become numerically indistinguishable as `ε → 0`,
//! and the plain collocation system ("RBF-Direct") turns singular long before
//! the interpolant itself degrades. This crate re-expands the Gaussians in a
//! HermiteGF basis derived from the Hermite generating function, which keeps
//! the ill-conditioning out of the linear solve.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`linalg`] | dense LU, Householder QR, triangular solves, condition numbers |
//! | [`basis`] | Hermite recurrences, HermiteGF matrices, expansion matrices `B`, `C`, `D`, `D̃` |
//! | [`interp1d`] | RBF-Direct, HermiteGF (`M = N`) and HermiteGF-QR (`M > N`) fits |
//! | [`tensor`] | mode-wise tensor-product interpolation |
//! | [`hagedorn`] | anisotropic Gaussians via the HagedornGF expansion |
//! | [`grids`] | Chebyshev, uniform and Halton nodes; test functions |
//! | [`experiments`] | reproducible numerical studies emitting CSV tables |
//!
//! ```
//! use hermitegf::grids::{chebyshev_nodes, uniform_nodes};
//! use hermitegf::interp1d::fit_hermitegf;
//!
//! let x = chebyshev_nodes(20, [-1.0, 1.0]).unwrap();
//! let f: Vec<f64> = x.iter().map(|t| (3.0 * t).cos()).collect();
//! // ε = 0.01 is far into the flat limit; γ = 3 puts γL in the good range.
//! let model = fit_hermitegf(&x, &f, 3.0, 0.01, [-1.0, 1.0]).unwrap();
//! let xe = uniform_nodes(5, [-1.0, 1.0]).unwrap();
//! for (s, t) in model.evaluate(&xe).unwrap().iter().zip(&xe) {
//!     assert!((s - (3.0 * t).cos()).abs() < 1e-8);
//! }
//! ```

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

pub mod basis;
pub mod experiments;
pub mod grids;
pub mod hagedorn;
pub mod interp1d;
pub mod linalg;
pub mod tensor;

pub use basis::HermiteGFBasis;
pub use interp1d::{Interpolant1D, Method, Metric};
pub use linalg::DenseMatrix;
pub use tensor::{NdTensor, TensorInterpolant};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Basis(#[from] basis::BasisError),
    #[error(transparent)]
    Grid(#[from] grids::GridError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(
        "HermiteGF collocation matrix is singular (pivot {pivot:e} at step {index}, gamma*L = {gamma_l}); try a larger gamma"
    )]
    SingularHermite {
        gamma_l: f64,
        pivot: f64,
        index: usize,
    },
    #[error("QR triangular factor is rank deficient at column {index}; centers may coincide or N is too large")]
    RankDeficient { index: usize },
    #[error("collocation matrix in dimension {dim} is singular: {source}")]
    SingularDimension {
        dim: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(
        "anisotropic collocation matrix is singular (pivot {pivot:e}); use fewer nodes or a larger domain"
    )]
    SingularAniso { pivot: f64 },
    #[error("invalid shape matrix: {0}")]
    ShapeMatrix(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    /// True for singular or overflowing systems, as opposed to bad input or configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Linalg(e) => matches!(
                e,
                linalg::LinalgError::Singular { .. }
                    | linalg::LinalgError::SingularTriangular { .. }
                    | linalg::LinalgError::NonFinite { .. }
            ),
            Error::Basis(e) => matches!(e, basis::BasisError::Overflow { .. }),
            Error::SingularHermite { .. }
            | Error::RankDeficient { .. }
            | Error::SingularDimension { .. }
            | Error::SingularAniso { .. } => true,
            _ => false,
        }
    }

    /// True when a collocation system could not be solved.
    pub fn is_singular(&self) -> bool {
        match self {
            Error::Linalg(e) => matches!(
                e,
                linalg::LinalgError::Singular { .. }
                    | linalg::LinalgError::SingularTriangular { .. }
            ),
            Error::SingularHermite { .. }
            | Error::RankDeficient { .. }
            | Error::SingularDimension { .. }
            | Error::SingularAniso { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Wall-clock time spent forming matrices and solving systems during a fit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub build_s: f64,
    pub solve_s: f64,
}

impl PhaseTimes {
    pub fn new(build: Duration, solve: Duration) -> Self {
        Self {
            build_s: build.as_secs_f64(),
            solve_s: solve.as_secs_f64(),
        }
    }
}

impl std::ops::AddAssign for PhaseTimes {
    fn add_assign(&mut self, rhs: Self) {
        self.build_s += rhs.build_s;
        self.solve_s += rhs.solve_s;
    }
}
