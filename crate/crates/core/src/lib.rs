//! Solvers for symmetric positive definite solutions of nonlinear matrix
//! equations (CARE, DARE, and `X + AᵀX⁻¹A = Q`), built around rank-one
//! subspace descent on the SPD manifold.
//!
//! The iterate, its Cholesky factor, its inverse (where needed), and all
//! problem-specific intermediates are maintained by rank-one updates, so a
//! solver iteration costs O(n²) arithmetic. A coordinate-descent baseline on
//! the Burer–Monteiro factorization `X = YYᵀ` is provided for comparison,
//! along with instance generation and an experiment runner.
//!
//! Modules:
//! - [`densela`]: dense symmetric linear-algebra kernels and Matrix Market I/O
//! - [`manifold`]: the SPD iterate state and the rank-one geodesic update
//! - [`problems`]: residual/gradient/line-search oracles for CARE, DARE, NME
//! - [`solver`]: the rank-one subspace descent main loop (`r1rsd`)
//! - [`bmfc`]: the factorized coordinate-descent baseline
//! - [`bench`]: instance generation, experiment orchestration, scaling fits

pub mod bench;
pub mod bmfc;
pub mod densela;
pub mod error;
pub mod manifold;
pub mod problems;
pub mod solver;

pub use densela::{DenseMatrix, LowerTriangular};
pub use error::{Error, Result};
pub use manifold::{DirectionEstimate, SpdState};
pub use problems::{ProblemInstance, ProblemKind, ProblemWorkspace};
pub use solver::{SolveReport, SolverConfig, StepStrategy, Termination};
