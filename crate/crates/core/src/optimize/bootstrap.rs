//! Error bars on the per-iteration energies: the fitted minima carry
//! bootstrap uncertainties, and this propagates them through the cost at
//! the recombined center.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_finite, ConjugateDirections, LineSearchRun, OptimizeError};
use crate::scalar::Real;

pub const DEFAULT_ENERGY_BOOTSTRAP: usize = 200;

/// Per-iteration energy uncertainty.
///
/// For each iteration the fitted minima are resampled from
/// N(x_min_d, sigma_xmin_d), recombined into a center through the search
/// directions, and re-evaluated; the standard deviation over `b` resamples
/// is that iteration's sigma_E. Iterations whose sigmas are all zero cost
/// no evaluations and report exactly zero.
pub fn bootstrap_energy_uncertainty<R: Real>(
    run: &LineSearchRun<R>,
    dirs: &ConjugateDirections<R>,
    mut cost: impl FnMut(&[R]) -> Result<R, OptimizeError>,
    b: usize,
    seed: u64,
) -> Result<Vec<R>, OptimizeError> {
    if b < 2 {
        return Err(OptimizeError::Domain(format!(
            "bootstrap needs at least 2 resamples, got {b}"
        )));
    }
    let n_dir = dirs.n_dirs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(run.iterations.len());
    let mut probe = vec![R::zero(); dirs.n_params()];
    for (it, rec) in run.iterations.iter().enumerate() {
        if rec.minima.len() != n_dir {
            return Err(OptimizeError::Domain(format!(
                "iteration {it} has {} fitted minima but there are {n_dir} directions",
                rec.minima.len()
            )));
        }
        if rec.center.len() != dirs.n_params() {
            return Err(OptimizeError::Domain(format!(
                "iteration {it} center has {} parameters but directions have {}",
                rec.center.len(),
                dirs.n_params()
            )));
        }
        if rec.minima.iter().all(|m| m.sigma_xmin == R::zero()) {
            out.push(R::zero());
            continue;
        }
        let mut energies = Vec::with_capacity(b);
        for _ in 0..b {
            probe.copy_from_slice(&rec.center);
            for (d, fm) in rec.minima.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                let x = fm.x_min + fm.sigma_xmin * R::of(z);
                let v = dirs.direction(d);
                for (p, &vi) in probe.iter_mut().zip(&v) {
                    *p += x * vi;
                }
            }
            energies.push(check_finite(cost(&probe[..])?, "bootstrap energy")?);
        }
        let nb = R::of(b as f64);
        let mean = energies.iter().copied().sum::<R>() / nb;
        let var = energies
            .iter()
            .map(|&e| (e - mean) * (e - mean))
            .sum::<R>()
            / (nb - R::one());
        out.push(var.sqrt());
    }
    Ok(out)
}
