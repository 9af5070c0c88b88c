//! Window sizing against the noiseless surrogate.
//!
//! For each conjugate direction the optimizer scans a (half-width, noise)
//! grid: at every width it resamples synthetic noisy line scans, refits
//! them, and measures how far the fitted minimizers stray from the true
//! surrogate minimum. The widest noise level whose parameter error stays
//! within the target is certified for that direction. The same standard
//! normal draws are reused across noise levels (scaled by each dE), which
//! keeps the error curve monotone in dE and the certified level sharp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::polyfit::clamped_fit_minimum;
use super::{check_finite, ConjugateDirections, OptimizeError, SearchWindow};
use crate::scalar::Real;

const N_WIDTHS: usize = 12;
// Widths below a few targets are degenerate: any fit, however noisy, stays
// within the window and so "meets" the target without carrying signal.
const WIDTH_LO_FACTOR: f64 = 3.0;
const WIDTH_HI_FACTOR: f64 = 300.0;
const N_NOISE_LEVELS: usize = 10;
const NOISE_LO_FACTOR: f64 = 0.05;
const NOISE_HI_FACTOR: f64 = 500.0;
const N_RESAMPLES: usize = 200;

/// What the window optimizer should hold per direction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[serde(bound = "")]
pub enum WindowTarget<R: Real> {
    /// Cap on |fitted minimizer - true minimizer| + its spread, parameter
    /// units, applied to every direction.
    ParamError(R),
    /// Total energy-error budget; converted per direction d to a parameter
    /// target sqrt(2 (budget / N_dir) / lambda_d) through its curvature.
    EnergyError(R),
}

fn golden_section_min<R: Real>(
    g: &mut impl FnMut(R) -> Result<R, OptimizeError>,
    mut a: R,
    mut b: R,
) -> Result<R, OptimizeError> {
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let tol = (b - a) * R::of(1e-10);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    for _ in 0..120 {
        if b - a <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2)?;
        }
    }
    Ok((a + b) * R::of(0.5))
}

fn log_spaced<R: Real>(lo: R, hi: R, n: usize) -> Vec<R> {
    let llo = lo.as_f64().ln();
    let lhi = hi.as_f64().ln();
    (0..n)
        .map(|i| R::of((llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp()))
        .collect()
}

/// Uniform M-point grid of offsets over [-w, w]; the center point sits at
/// index (M-1)/2 with offset exactly 0.
pub(crate) fn offset_grid<R: Real>(w: R, m: usize) -> Vec<R> {
    let span = R::of(2.0) * w / R::of((m - 1) as f64);
    (0..m)
        .map(|j| {
            if 2 * j + 1 == m {
                R::zero()
            } else {
                -w + span * R::of(j as f64)
            }
        })
        .collect()
}

/// Size the per-direction windows and certify a sampling-noise level.
///
/// `surrogate_cost` must be noiseless and cheap; it is evaluated on the
/// line grids and inside a golden-section search for each direction's true
/// 1-D minimizer. `x_star` is the surrogate minimum the windows are
/// centered on. The resampling noise is seeded from `seed`, so the result
/// is deterministic for fixed inputs.
pub fn optimize_windows<R: Real>(
    mut surrogate_cost: impl FnMut(&[R]) -> Result<R, OptimizeError>,
    x_star: &[R],
    dirs: &ConjugateDirections<R>,
    target: WindowTarget<R>,
    m_points: usize,
    degree: usize,
    seed: u64,
) -> Result<SearchWindow<R>, OptimizeError> {
    if x_star.len() != dirs.n_params() {
        return Err(OptimizeError::Domain(format!(
            "center has {} parameters but directions have {}",
            x_star.len(),
            dirs.n_params()
        )));
    }
    if !matches!(degree, 2 | 3 | 4) {
        return Err(OptimizeError::Domain(format!(
            "fit degree must be 2, 3, or 4, got {degree}"
        )));
    }
    if m_points % 2 == 0 || m_points < degree + 2 {
        return Err(OptimizeError::Domain(format!(
            "grid size must be odd and >= degree+2, got M={m_points} for degree {degree}"
        )));
    }
    let n_dir = dirs.n_dirs();
    let budget_per_dir = match target {
        WindowTarget::ParamError(t) | WindowTarget::EnergyError(t) => {
            if t <= R::zero() {
                return Err(OptimizeError::Domain(format!(
                    "window target must be > 0, got {}",
                    t.as_f64()
                )));
            }
            t / R::of(n_dir as f64)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut half_widths = Vec::with_capacity(n_dir);
    let mut targets = Vec::with_capacity(n_dir);
    let mut per_direction_delta_e = Vec::with_capacity(n_dir);
    let mut probe = x_star.to_vec();
    let mut z = vec![R::zero(); N_RESAMPLES * m_points];
    let mut ys_noisy = vec![R::zero(); m_points];
    let mut mins = Vec::with_capacity(N_RESAMPLES);

    for d in 0..n_dir {
        let v = dirs.direction(d);
        let lambda = dirs.kept_eigenvalues[d];
        let dtheta = match target {
            WindowTarget::ParamError(t) => t,
            WindowTarget::EnergyError(_) => {
                (R::of(2.0) * budget_per_dir / lambda).sqrt()
            }
        };
        let mut line = |s: R, probe: &mut Vec<R>| -> Result<R, OptimizeError> {
            for (i, p) in probe.iter_mut().enumerate() {
                *p = x_star[i] + s * v[i];
            }
            check_finite(surrogate_cost(&probe[..])?, "window surrogate probe")
        };
        let widths = log_spaced(
            R::of(WIDTH_LO_FACTOR) * dtheta,
            R::of(WIDTH_HI_FACTOR) * dtheta,
            N_WIDTHS,
        );
        let noise_levels = log_spaced(
            R::of(NOISE_LO_FACTOR) * lambda * dtheta * dtheta,
            R::of(NOISE_HI_FACTOR) * lambda * dtheta * dtheta,
            N_NOISE_LEVELS,
        );
        // (delta_e, width) of the best admissible grid point so far.
        let mut best: Option<(R, R)> = None;
        let mut frontier: Vec<(f64, f64)> = Vec::with_capacity(N_WIDTHS);
        for &w in &widths {
            let xs = offset_grid(w, m_points);
            let mut ys_true = Vec::with_capacity(m_points);
            for &s in &xs {
                ys_true.push(line(s, &mut probe)?);
            }
            let x_true = golden_section_min(&mut |s| line(s, &mut probe), -w, w)?;
            for zi in z.iter_mut() {
                let draw: f64 = rng.sample(StandardNormal);
                *zi = R::of(draw);
            }
            let mut attainable = R::of(f64::INFINITY);
            for &de in &noise_levels {
                mins.clear();
                for k in 0..N_RESAMPLES {
                    for j in 0..m_points {
                        ys_noisy[j] = ys_true[j] + de * z[k * m_points + j];
                    }
                    mins.push(clamped_fit_minimum(&xs, &ys_noisy, degree)?);
                }
                let nk = R::of(N_RESAMPLES as f64);
                let mean = mins.iter().copied().sum::<R>() / nk;
                let var = mins
                    .iter()
                    .map(|&m| (m - mean) * (m - mean))
                    .sum::<R>()
                    / (nk - R::one());
                let err = (mean - x_true).abs() + var.sqrt();
                attainable = attainable.min(err);
                if err <= dtheta {
                    let better = match best {
                        None => true,
                        Some((bde, bw)) => de > bde || (de == bde && w > bw),
                    };
                    if better {
                        best = Some((de, w));
                    }
                }
            }
            frontier.push((w.as_f64(), attainable.as_f64()));
        }
        let (de, w) = best.ok_or(OptimizeError::InfeasibleWindow { frontier })?;
        half_widths.push(w);
        targets.push(dtheta);
        per_direction_delta_e.push(de);
    }
    let delta_e = per_direction_delta_e
        .iter()
        .copied()
        .fold(R::of(f64::INFINITY), |m, v| m.min(v));
    let window = SearchWindow {
        half_widths,
        targets,
        per_direction_delta_e,
        delta_e,
        m_points,
        degree,
    };
    window.validate()?;
    Ok(window)
}
