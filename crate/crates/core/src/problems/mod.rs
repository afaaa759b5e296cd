//! The three equation oracles.
//!
//! Each problem exposes the same five-operation surface — initialize,
//! residual value, gradient-vector product, a 1-D line-search objective
//! along the current rank-one direction, and a commit that advances every
//! maintained intermediate — so the solver and the baseline are
//! problem-agnostic. All per-iteration work is O(n²); the only O(n³) steps
//! are workspace initialization, the periodic drift refresh, and the dense
//! verification oracle [`ProblemInstance::dense_residual`].
//!
//! Residual conventions (`f(X) = ‖M(X)‖_F²` throughout):
//! - CARE: `M(X) = XGX − AᵀX − XA − H`
//! - DARE: `M(X) = X − AᵀX(I + GX)⁻¹A − Q`
//! - NME:  `M(X) = X + AᵀX⁻¹A − Q`

mod care;
mod dare;
mod line;
mod nme;

pub use care::{CareInstance, CareWorkspace};
pub use dare::{DareInstance, DareWorkspace};
pub use line::{solve_cubic, LineObjective};
pub use nme::{NmeInstance, NmeWorkspace};

use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::manifold::{DirectionEstimate, SpdState};
use serde::{Deserialize, Serialize};

/// Which matrix equation an instance encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Care,
    Dare,
    Nme,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::Care => "care",
            ProblemKind::Dare => "dare",
            ProblemKind::Nme => "nme",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "care" => Ok(ProblemKind::Care),
            "dare" => Ok(ProblemKind::Dare),
            "nme" => Ok(ProblemKind::Nme),
            other => Err(Error::InvalidInput(format!("unknown problem kind {other:?}"))),
        }
    }
}

/// Immutable coefficient matrices of one equation.
#[derive(Clone, Debug)]
pub enum ProblemInstance {
    Care(CareInstance),
    Dare(DareInstance),
    Nme(NmeInstance),
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::Care(_) => ProblemKind::Care,
            ProblemInstance::Dare(_) => ProblemKind::Dare,
            ProblemInstance::Nme(_) => ProblemKind::Nme,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ProblemInstance::Care(c) => c.n(),
            ProblemInstance::Dare(d) => d.n(),
            ProblemInstance::Nme(m) => m.n(),
        }
    }

    /// The initialization the experiments use: the identity for CARE,
    /// `X = Q` for DARE and NME.
    pub fn default_x0(&self) -> DenseMatrix {
        match self {
            ProblemInstance::Care(c) => DenseMatrix::identity(c.n()),
            ProblemInstance::Dare(d) => d.q.clone(),
            ProblemInstance::Nme(m) => m.q.clone(),
        }
    }

    /// Evaluate the defining equation residual from scratch and return its
    /// squared Frobenius norm. O(n³); the independent verification path.
    pub fn dense_residual(&self, x: &DenseMatrix) -> Result<f64> {
        match self {
            ProblemInstance::Care(c) => Ok(c.dense_residual_matrix(x).frob_norm_sq()),
            ProblemInstance::Dare(d) => Ok(d.dense_residual_matrix(x)?.frob_norm_sq()),
            ProblemInstance::Nme(m) => Ok(m.dense_residual_matrix(x)?.frob_norm_sq()),
        }
    }

    /// Build the workspace: SPD state plus every maintained intermediate,
    /// by direct dense evaluation (O(n³), once).
    pub fn init_workspace<'a>(
        &'a self,
        x0: &DenseMatrix,
    ) -> Result<Box<dyn ProblemWorkspace + 'a>> {
        if x0.n_rows() != self.n() || x0.n_cols() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "initial iterate {}x{} for an n = {} instance",
                x0.n_rows(),
                x0.n_cols(),
                self.n()
            )));
        }
        match self {
            ProblemInstance::Care(c) => Ok(Box::new(CareWorkspace::init(c, x0)?)),
            ProblemInstance::Dare(d) => Ok(Box::new(DareWorkspace::init(d, x0)?)),
            ProblemInstance::Nme(m) => Ok(Box::new(NmeWorkspace::init(m, x0)?)),
        }
    }
}

/// Per-problem maintained state: residual value, gradient-vector product,
/// line-search objective, and the O(n²) commit.
pub trait ProblemWorkspace {
    fn kind(&self) -> ProblemKind;

    fn dim(&self) -> usize;

    fn state(&self) -> &SpdState;

    /// Cached `f = ‖M(X)‖_F²`, advanced incrementally at each commit.
    fn residual_value(&self) -> f64;

    /// `grad f(X)·v` using only matrix-vector products against stored
    /// intermediates; strictly O(n²).
    fn grad_apply(&self, v: &[f64]) -> Vec<f64>;

    /// Closed-form `φ(α) = f(X + α·vvᵀ)` for `v = B·dir.y`, assembled from
    /// O(n²) precomputed scalars; O(1) per evaluation afterwards.
    fn line_search_objective(&self, dir: &DirectionEstimate) -> LineObjective;

    /// Advance `X`, `B`, the inverse (where maintained), and every
    /// workspace intermediate with rank-one formulas; update the cached
    /// residual via the closed-form `φ(alpha)`; increment the counter.
    fn commit_update(&mut self, dir: &DirectionEstimate, alpha: f64) -> Result<()>;

    /// Recompute the factor and all intermediates densely from the current
    /// `X`. O(n³); bounds accumulated drift.
    fn refresh(&mut self) -> Result<()>;

    /// Number of committed updates so far.
    fn committed(&self) -> u64;

    /// Relative errors of every maintained quantity against a dense
    /// recomputation, as `(name, relative_error)` pairs. O(n³).
    fn drift_report(&self) -> Result<Vec<(&'static str, f64)>>;
}

pub(crate) fn check_symmetric(name: &str, m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{name} must be square")));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite(name.to_string()));
    }
    let asym = m.asymmetry();
    if asym > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "{name} is not symmetric (relative asymmetry {asym:e})"
        )));
    }
    Ok(())
}

pub(crate) fn check_square(name: &str, m: &DenseMatrix, n: usize) -> Result<()> {
    if m.n_rows() != n || m.n_cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {n}x{n}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite(name.to_string()));
    }
    Ok(())
}

/// Relative difference used by all drift reports.
pub(crate) fn rel_err(maintained: &DenseMatrix, dense: &DenseMatrix) -> f64 {
    let mut d = maintained.clone();
    d.add_scaled(-1.0, dense);
    d.frob_norm() / (1.0 + dense.frob_norm())
}
