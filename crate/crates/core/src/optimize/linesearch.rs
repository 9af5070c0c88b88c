//! The noisy line-search loop: parallel per-direction scans fitted by
//! low-order polynomials, plus the composition that runs every stage from
//! surrogate minimization through the final noisy iterations.

use serde::{Deserialize, Serialize};

use super::hessian::{default_hessian_step, finite_difference_hessian, select_directions};
use super::minimize::surrogate_minimize;
use super::polyfit::fit_polynomial_minimum;
use super::window::{offset_grid, optimize_windows, WindowTarget};
use super::{
    ConjugateDirections, FittedMin, HessianResult, IterationRecord, LineSearchRun,
    LineSearchSettings, OptimizeError, SearchWindow, UpdateMode,
};
use crate::noise::{CountedEvaluator, Measured};
use crate::scalar::Real;

fn fit_direction<R: Real>(
    xs: &[R],
    ys: &[R],
    sigmas: &[R],
    degree: usize,
) -> Result<FittedMin<R>, OptimizeError> {
    match fit_polynomial_minimum(xs, ys, sigmas, degree) {
        Ok(f) => Ok(FittedMin {
            x_min: f.x_min,
            sigma_xmin: f.sigma_xmin,
            at_edge: false,
        }),
        // No interior minimum: take the better window edge and let the next
        // iteration re-center there.
        Err(OptimizeError::WindowEdge { edge }) => Ok(FittedMin {
            x_min: R::of(edge),
            sigma_xmin: R::zero(),
            at_edge: true,
        }),
        Err(e) => Err(e),
    }
}

fn shifted<R: Real>(center: &[R], dir: &[R], s: R) -> Vec<R> {
    center
        .iter()
        .zip(dir)
        .map(|(&c, &v)| c + s * v)
        .collect()
}

/// One iteration of the noisy search: scan every direction's window, fit
/// each scan, and move the center to the combination of fitted minima.
///
/// In [`UpdateMode::Simultaneous`] the center point is measured once and
/// shared by all direction grids (1 + (M-1)*N_dir evaluations); in
/// [`UpdateMode::Sequential`] each direction re-measures its own center
/// after the previous direction's move (M*N_dir evaluations).
pub fn line_search_iteration<R: Real>(
    evaluator: &CountedEvaluator<'_, R>,
    center: &[R],
    dirs: &ConjugateDirections<R>,
    window: &SearchWindow<R>,
    mode: UpdateMode,
) -> Result<IterationRecord<R>, OptimizeError> {
    window.validate()?;
    let n_dir = dirs.n_dirs();
    if window.half_widths.len() != n_dir {
        return Err(OptimizeError::Domain(format!(
            "window has {} widths but there are {} directions",
            window.half_widths.len(),
            n_dir
        )));
    }
    if center.len() != dirs.n_params() {
        return Err(OptimizeError::Domain(format!(
            "center has {} parameters but directions have {}",
            center.len(),
            dirs.n_params()
        )));
    }
    let m = window.m_points;
    let mid = (m - 1) / 2;
    let calls_before = evaluator.calls();
    let grids: Vec<Vec<R>> = window
        .half_widths
        .iter()
        .map(|&w| offset_grid(w, m))
        .collect();

    let mut minima = Vec::with_capacity(n_dir);
    let mut new_center;
    let center_meas: Measured<R>;
    match mode {
        UpdateMode::Simultaneous => {
            let mut points = Vec::with_capacity(1 + (m - 1) * n_dir);
            points.push(center.to_vec());
            for d in 0..n_dir {
                let v = dirs.direction(d);
                for (j, &s) in grids[d].iter().enumerate() {
                    if j != mid {
                        points.push(shifted(center, &v, s));
                    }
                }
            }
            let measured = evaluator.evaluate_batch(&points)?;
            center_meas = measured[0];
            let mut idx = 1;
            for grid in &grids {
                let mut ys = Vec::with_capacity(m);
                let mut sigmas = Vec::with_capacity(m);
                for j in 0..m {
                    let p = if j == mid {
                        center_meas
                    } else {
                        idx += 1;
                        measured[idx - 1]
                    };
                    ys.push(p.energy);
                    sigmas.push(p.sigma);
                }
                minima.push(fit_direction(grid, &ys, &sigmas, window.degree)?);
            }
            new_center = center.to_vec();
            for (d, fm) in minima.iter().enumerate() {
                let v = dirs.direction(d);
                for (c, &vi) in new_center.iter_mut().zip(&v) {
                    *c += fm.x_min * vi;
                }
            }
        }
        UpdateMode::Sequential => {
            new_center = center.to_vec();
            let mut first: Option<Measured<R>> = None;
            for (d, grid) in grids.iter().enumerate() {
                let v = dirs.direction(d);
                let points: Vec<Vec<R>> =
                    grid.iter().map(|&s| shifted(&new_center, &v, s)).collect();
                let measured = evaluator.evaluate_batch(&points)?;
                if first.is_none() {
                    first = Some(measured[mid]);
                }
                let ys: Vec<R> = measured.iter().map(|p| p.energy).collect();
                let sigmas: Vec<R> = measured.iter().map(|p| p.sigma).collect();
                let fm = fit_direction(grid, &ys, &sigmas, window.degree)?;
                for (c, &vi) in new_center.iter_mut().zip(&v) {
                    *c += fm.x_min * vi;
                }
                minima.push(fm);
            }
            center_meas = first.expect("at least one direction");
        }
    }
    Ok(IterationRecord {
        center: center.to_vec(),
        new_center,
        energy: center_meas.energy,
        sigma: center_meas.sigma,
        minima,
        n_calls: evaluator.calls() - calls_before,
    })
}

/// Iterate [`line_search_iteration`] from `x0` until the measured center
/// energy settles (|dE| below max(2 sigma_diff, energy_tol) on two
/// consecutive checks) or `max_iters` is reached.
pub fn run_line_search<R: Real>(
    evaluator: &CountedEvaluator<'_, R>,
    x0: &[R],
    dirs: &ConjugateDirections<R>,
    window: &SearchWindow<R>,
    settings: &LineSearchSettings<R>,
) -> Result<LineSearchRun<R>, OptimizeError> {
    let start_calls = evaluator.calls();
    let mut center = x0.to_vec();
    let mut iterations: Vec<IterationRecord<R>> = Vec::new();
    let mut quiet_checks = 0usize;
    let mut converged = false;
    for _ in 0..settings.max_iters.max(1) {
        let rec = line_search_iteration(evaluator, &center, dirs, window, settings.mode)?;
        center = rec.new_center.clone();
        if let Some(prev) = iterations.last() {
            let sigma_diff = (rec.sigma * rec.sigma + prev.sigma * prev.sigma).sqrt();
            let threshold = (R::of(2.0) * sigma_diff).max(settings.energy_tol);
            if (rec.energy - prev.energy).abs() < threshold {
                quiet_checks += 1;
            } else {
                quiet_checks = 0;
            }
        }
        iterations.push(rec);
        if quiet_checks >= 2 {
            converged = true;
            break;
        }
    }
    Ok(LineSearchRun {
        iterations,
        final_center: center,
        converged,
        total_calls: evaluator.calls() - start_calls,
    })
}

/// Knobs for the full pipeline. `m_points` and `degree` default to a
/// 7-point grid with a quartic fit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SurrogateSearchSettings<R: Real> {
    /// Gradient infinity-norm tolerance for the surrogate minimization.
    pub surrogate_tol: R,
    /// Finite-difference step; scaled default when absent.
    pub hessian_step: Option<R>,
    pub drop_tol: R,
    pub keep_top: Option<usize>,
    pub target: WindowTarget<R>,
    pub m_points: usize,
    pub degree: usize,
    pub window_seed: u64,
    pub line: LineSearchSettings<R>,
}

impl<R: Real> SurrogateSearchSettings<R> {
    pub fn new(target: WindowTarget<R>) -> Self {
        Self {
            surrogate_tol: R::of(1e-6),
            hessian_step: None,
            drop_tol: R::of(1e-3),
            keep_top: None,
            target,
            m_points: 7,
            degree: 4,
            window_seed: 0,
            line: LineSearchSettings::default(),
        }
    }
}

/// Everything the pipeline produced, stage by stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SurrogateSearchOutput<R: Real> {
    /// Surrogate minimum the search started from.
    pub x_star: Vec<R>,
    pub hessian: HessianResult<R>,
    pub directions: ConjugateDirections<R>,
    pub window: SearchWindow<R>,
    pub run: LineSearchRun<R>,
}

/// Run the whole pipeline: minimize the surrogate, take its Hessian there,
/// keep the well-conditioned eigendirections, size the windows, then drive
/// the noisy evaluator. The Hessian and windows are computed once and held
/// fixed across the noisy iterations. Errors are tagged with the stage
/// that raised them.
pub fn run_surrogate_line_search<R: Real>(
    mut surrogate_cost: impl FnMut(&[R]) -> Result<R, OptimizeError>,
    evaluator: &CountedEvaluator<'_, R>,
    x0: &[R],
    settings: &SurrogateSearchSettings<R>,
) -> Result<SurrogateSearchOutput<R>, OptimizeError> {
    let x_star = surrogate_minimize(&mut surrogate_cost, x0, settings.surrogate_tol)
        .map_err(OptimizeError::tag("surrogate"))?;
    let step = settings
        .hessian_step
        .unwrap_or_else(|| default_hessian_step(&x_star));
    let hessian = finite_difference_hessian(&mut surrogate_cost, &x_star, step)
        .map_err(OptimizeError::tag("hessian"))?;
    let directions = select_directions(&hessian, settings.drop_tol, settings.keep_top)
        .map_err(OptimizeError::tag("directions"))?;
    let window = optimize_windows(
        &mut surrogate_cost,
        &x_star,
        &directions,
        settings.target,
        settings.m_points,
        settings.degree,
        settings.window_seed,
    )
    .map_err(OptimizeError::tag("windows"))?;
    let run = run_line_search(evaluator, &x_star, &directions, &window, &settings.line)
        .map_err(OptimizeError::tag("linesearch"))?;
    Ok(SurrogateSearchOutput {
        x_star,
        hessian,
        directions,
        window,
        run,
    })
}
