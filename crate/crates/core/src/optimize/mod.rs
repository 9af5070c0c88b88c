//! Surrogate Hessian line-search engine.
//!
//! The pipeline: minimize a cheap noiseless surrogate, take its
//! finite-difference Hessian at the minimum, keep the well-conditioned
//! eigendirections, size a search window per direction by Monte Carlo
//! resampling of noisy polynomial fits on the surrogate, then iterate
//! parallel noisy line searches on the expensive cost. Each iteration
//! costs 1 + (M-1)*N_dir evaluations: the center is measured once and
//! shared by every direction's grid.
//!
//! The Powell direction-set method is implemented alongside as the
//! comparison baseline, metered by the same evaluator.

mod bootstrap;
mod hessian;
mod linesearch;
mod minimize;
mod polyfit;
mod window;

pub use bootstrap::{bootstrap_energy_uncertainty, DEFAULT_ENERGY_BOOTSTRAP};
pub use hessian::{default_hessian_step, finite_difference_hessian, select_directions};
pub use linesearch::{
    line_search_iteration, run_line_search, run_surrogate_line_search, SurrogateSearchOutput,
    SurrogateSearchSettings,
};
pub use minimize::{fd_gradient, powell_minimize, surrogate_minimize, PowellResult, PowellSettings};
pub use polyfit::{fit_polynomial_minimum, PolyFitMinimum};
pub use window::{optimize_windows, WindowTarget};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::NoiseError;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("{0}")]
    Domain(String),
    #[error("cost evaluation failed: {0}")]
    Evaluation(String),
    #[error("optimizer hit its iteration cap; best value {best_value}")]
    NonConvergence { best: Vec<f64>, best_value: f64 },
    #[error("every search direction was dropped")]
    EmptyDirections,
    #[error(
        "no (width, noise) grid point meets the parameter-error target; \
         attainable frontier (width, error): {frontier:?}"
    )]
    InfeasibleWindow { frontier: Vec<(f64, f64)> },
    #[error("fitted polynomial has no interior minimum; edge argmin at {edge}")]
    WindowEdge { edge: f64 },
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<OptimizeError>,
    },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

impl OptimizeError {
    pub(crate) fn tag(stage: &'static str) -> impl FnOnce(OptimizeError) -> OptimizeError {
        move |e| OptimizeError::Stage { stage, source: Box::new(e) }
    }
}

/// Finite-difference Hessian with its spectral decomposition,
/// eigenvalues sorted descending.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HessianResult<R: Real> {
    pub matrix: DMatrix<R>,
    pub eigenvalues: Vec<R>,
    /// Columns aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<R>,
    pub fd_step: R,
}

/// Why an eigendirection was excluded from the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    NearZero,
    Negative,
    TruncatedByRank,
}

/// The retained mutually-conjugate search directions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConjugateDirections<R: Real> {
    /// n_params x n_dir; column d is the unit direction vector.
    pub directions: DMatrix<R>,
    pub kept_eigenvalues: Vec<R>,
    /// Indices into the originating eigenvalue list.
    pub kept_indices: Vec<usize>,
    pub dropped: Vec<(usize, DropReason)>,
}

impl<R: Real> ConjugateDirections<R> {
    pub fn n_dirs(&self) -> usize {
        self.kept_eigenvalues.len()
    }

    pub fn n_params(&self) -> usize {
        self.directions.nrows()
    }

    pub fn direction(&self, d: usize) -> Vec<R> {
        self.directions.column(d).iter().copied().collect()
    }
}

/// Per-direction search windows plus the common sampling-noise level the
/// window optimizer certified for them.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SearchWindow<R: Real> {
    /// Half-width W_d per direction, parameter units.
    pub half_widths: Vec<R>,
    /// Parameter-error target each direction was sized for.
    pub targets: Vec<R>,
    /// Largest admissible noise per direction.
    pub per_direction_delta_e: Vec<R>,
    /// Noise level admissible for every direction simultaneously.
    pub delta_e: R,
    /// Points per direction grid (odd; center shared at offset 0).
    pub m_points: usize,
    /// Polynomial fit degree (2, 3, or 4).
    pub degree: usize,
}

impl<R: Real> SearchWindow<R> {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !matches!(self.degree, 2 | 3 | 4) {
            return Err(OptimizeError::Domain(format!(
                "fit degree must be 2, 3, or 4, got {}",
                self.degree
            )));
        }
        if self.m_points % 2 == 0 || self.m_points < self.degree + 2 {
            return Err(OptimizeError::Domain(format!(
                "grid size must be odd and >= degree+2, got M={} for degree {}",
                self.m_points, self.degree
            )));
        }
        if self.half_widths.iter().any(|w| *w <= R::zero()) {
            return Err(OptimizeError::Domain("window half-widths must be > 0".into()));
        }
        Ok(())
    }
}

/// One fitted line minimum inside an iteration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FittedMin<R: Real> {
    pub x_min: R,
    pub sigma_xmin: R,
    /// True when the fit had no interior minimum and the window edge was
    /// taken instead (next iteration re-centers there).
    pub at_edge: bool,
}

/// Record of a single line-search iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct IterationRecord<R: Real> {
    /// Center the iteration measured (before the update).
    pub center: Vec<R>,
    pub new_center: Vec<R>,
    /// Measured energy at `center` (shared grid point at offset 0).
    pub energy: R,
    pub sigma: R,
    pub minima: Vec<FittedMin<R>>,
    pub n_calls: u64,
}

/// Full line-search history.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LineSearchRun<R: Real> {
    pub iterations: Vec<IterationRecord<R>>,
    pub final_center: Vec<R>,
    pub converged: bool,
    pub total_calls: u64,
}

/// Direction-update schedule within one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    /// All directions fitted against one shared center measurement,
    /// then applied together: 1 + (M-1)*N_dir calls per iteration.
    #[default]
    Simultaneous,
    /// Directions processed one at a time, re-measuring the center:
    /// M*N_dir calls per iteration.
    Sequential,
}

/// Stopping rule and schedule for the noisy line-search loop.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LineSearchSettings<R: Real> {
    pub max_iters: usize,
    /// Deterministic floor for the |dE| convergence test (used when the
    /// measured sigmas are zero, e.g. noiseless runs).
    pub energy_tol: R,
    pub mode: UpdateMode,
}

impl<R: Real> Default for LineSearchSettings<R> {
    fn default() -> Self {
        Self { max_iters: 10, energy_tol: R::zero(), mode: UpdateMode::Simultaneous }
    }
}

/// Closure-backed evaluator model for exercising the noisy loop against
/// analytic costs in unit tests.
#[cfg(test)]
pub(crate) mod testmodel {
    use crate::noise::{EnergyModel, NoiseError};
    use crate::pauli::PauliHamiltonian;

    pub(crate) struct AnalyticModel<F> {
        f: F,
        n: usize,
        h: PauliHamiltonian<f64>,
    }

    impl<F: Fn(&[f64]) -> f64 + Sync> AnalyticModel<F> {
        pub(crate) fn new(n: usize, f: F) -> Self {
            Self { f, n, h: PauliHamiltonian::new(1) }
        }
    }

    impl<F: Fn(&[f64]) -> f64 + Sync> EnergyModel<f64> for AnalyticModel<F> {
        fn n_params(&self) -> usize {
            self.n
        }

        fn energy(&self, params: &[f64]) -> Result<f64, NoiseError> {
            Ok((self.f)(params))
        }

        fn term_expectations(&self, _params: &[f64]) -> Result<Vec<f64>, NoiseError> {
            Ok(Vec::new())
        }

        fn hamiltonian(&self) -> &PauliHamiltonian<f64> {
            &self.h
        }
    }
}

pub(crate) fn check_finite<R: Real>(v: R, what: &str) -> Result<R, OptimizeError> {
    if v.as_f64().is_finite() {
        Ok(v)
    } else {
        Err(OptimizeError::Evaluation(format!("{what} returned a non-finite value")))
    }
}
