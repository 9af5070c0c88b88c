//! Weighted polynomial fits for the 1-D line searches.
//!
//! Offsets are normalized to t = x / max|x| before building the Vandermonde
//! system so narrow windows stay well conditioned, and the minimizer is
//! mapped back to parameter units afterwards.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::OptimizeError;
use crate::scalar::Real;

const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x626f_6f74;

/// Result of a 1-D polynomial line-search fit.
#[derive(Clone, Debug)]
pub struct PolyFitMinimum<R: Real> {
    /// Minimizer in the same units as the input offsets.
    pub x_min: R,
    /// Fitted value at `x_min`.
    pub e_min: R,
    /// Bootstrap standard deviation of `x_min` (0 when every sigma is 0).
    pub sigma_xmin: R,
    /// Coefficients in the normalized variable t = x / scale, low order first.
    pub coefficients: Vec<R>,
    pub scale: R,
    pub degree: usize,
}

impl<R: Real> PolyFitMinimum<R> {
    pub fn evaluate(&self, x: R) -> R {
        horner(&self.coefficients, x / self.scale)
    }
}

fn horner<R: Real>(coeffs: &[R], t: R) -> R {
    coeffs.iter().rev().fold(R::zero(), |acc, &c| acc * t + c)
}

fn wls_fit<R: Real>(
    ts: &[R],
    ys: &[R],
    sqrt_w: &[R],
    degree: usize,
) -> Result<Vec<R>, OptimizeError> {
    let n = ts.len();
    let mut a = DMatrix::<R>::zeros(n, degree + 1);
    let mut b = DVector::<R>::zeros(n);
    for i in 0..n {
        let mut tj = R::one();
        for j in 0..=degree {
            a[(i, j)] = sqrt_w[i] * tj;
            tj *= ts[i];
        }
        b[i] = sqrt_w[i] * ys[i];
    }
    let svd = a.svd(true, true);
    let c = svd
        .solve(&b, R::of(1e-12))
        .map_err(|e| OptimizeError::Domain(format!("polynomial fit failed: {e}")))?;
    Ok(c.iter().copied().collect())
}

/// Real roots of p'(t) for coefficients of p, low order first.
fn derivative_roots<R: Real>(coeffs: &[R]) -> Vec<R> {
    let mut d: Vec<R> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * R::of(j as f64))
        .collect();
    // Trim leading coefficients that vanished relative to the largest one,
    // so a quartic fit of quadratic data degrades to the linear-root case.
    let max_abs = d.iter().fold(R::zero(), |m, &v| m.max(v.abs()));
    if max_abs == R::zero() {
        return Vec::new();
    }
    while d.len() > 1 {
        let last = d.last().copied().expect("nonempty");
        if last.abs() > R::of(1e-12) * max_abs {
            break;
        }
        d.pop();
    }
    match d.len() {
        0 | 1 => Vec::new(),
        2 => vec![-d[0] / d[1]],
        3 => {
            let disc = d[1] * d[1] - R::of(4.0) * d[2] * d[0];
            if disc < R::zero() {
                Vec::new()
            } else {
                let s = disc.sqrt();
                let two = R::of(2.0);
                vec![(-d[1] + s) / (two * d[2]), (-d[1] - s) / (two * d[2])]
            }
        }
        4 => {
            // Cubic: eigenvalues of the companion matrix of the monic form.
            let a0 = d[0] / d[3];
            let a1 = d[1] / d[3];
            let a2 = d[2] / d[3];
            let companion = DMatrix::<R>::from_row_slice(
                3,
                3,
                &[
                    R::zero(),
                    R::zero(),
                    -a0,
                    R::one(),
                    R::zero(),
                    -a1,
                    R::zero(),
                    R::one(),
                    -a2,
                ],
            );
            let eig = companion.complex_eigenvalues();
            eig.iter()
                .filter(|z| z.im.abs() <= R::of(1e-8) * (R::one() + z.re.abs()))
                .map(|z| z.re)
                .collect()
        }
        _ => unreachable!("degree capped at 4"),
    }
}

fn second_derivative<R: Real>(coeffs: &[R], t: R) -> R {
    let mut acc = R::zero();
    let mut tp = R::one();
    for (j, &c) in coeffs.iter().enumerate().skip(2) {
        acc += c * R::of((j * (j - 1)) as f64) * tp;
        tp *= t;
    }
    acc
}

/// Interior minimum of the fitted polynomial in t-units: a stationary point
/// with positive curvature inside [-1, 1], nearest the window center when
/// there are several.
fn interior_minimum<R: Real>(coeffs: &[R]) -> Option<R> {
    let pad = R::of(1e-9);
    let mut candidates: Vec<R> = derivative_roots(coeffs)
        .into_iter()
        .filter(|&t| t.abs() <= R::one() + pad)
        .map(|t| t.max(-R::one()).min(R::one()))
        .filter(|&t| second_derivative(coeffs, t) > R::zero())
        .collect();
    candidates.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite roots"));
    candidates.first().copied()
}

fn edge_argmin<R: Real>(coeffs: &[R]) -> R {
    if horner(coeffs, -R::one()) <= horner(coeffs, R::one()) {
        -R::one()
    } else {
        R::one()
    }
}

/// Minimizer of an unweighted fit in offset units, clamped to the nearer
/// window edge when the fit has no interior minimum. Resampling loops use
/// this directly so they never pay for a nested bootstrap.
pub(crate) fn clamped_fit_minimum<R: Real>(
    xs: &[R],
    ys: &[R],
    degree: usize,
) -> Result<R, OptimizeError> {
    let scale = xs.iter().fold(R::zero(), |m, &v| m.max(v.abs()));
    if scale <= R::zero() {
        return Err(OptimizeError::Domain(
            "fit offsets span a zero-width window".into(),
        ));
    }
    let ts: Vec<R> = xs.iter().map(|&x| x / scale).collect();
    let coeffs = wls_fit(&ts, ys, &vec![R::one(); ts.len()], degree)?;
    Ok(interior_minimum(&coeffs).unwrap_or_else(|| edge_argmin(&coeffs)) * scale)
}

/// Fit a degree-2/3/4 polynomial to `(xs, ys)` by weighted least squares
/// (weights 1/sigma^2 when every sigma is positive, uniform otherwise) and
/// locate its interior minimum.
///
/// The minimizer uncertainty comes from a fixed-seed parametric bootstrap:
/// the fitted points are re-noised with the reported sigmas, refitted, and
/// the spread of the re-fitted minimizers (edge-clamped when a resample has
/// no interior minimum) is reported as `sigma_xmin`.
///
/// When the fit itself has no interior minimum the window edge with the
/// lower fitted value is reported through [`OptimizeError::WindowEdge`].
pub fn fit_polynomial_minimum<R: Real>(
    xs: &[R],
    ys: &[R],
    sigmas: &[R],
    degree: usize,
) -> Result<PolyFitMinimum<R>, OptimizeError> {
    if !matches!(degree, 2 | 3 | 4) {
        return Err(OptimizeError::Domain(format!(
            "fit degree must be 2, 3, or 4, got {degree}"
        )));
    }
    let n = xs.len();
    if ys.len() != n || sigmas.len() != n {
        return Err(OptimizeError::Domain(format!(
            "mismatched fit inputs: {n} offsets, {} values, {} sigmas",
            ys.len(),
            sigmas.len()
        )));
    }
    if n < degree + 1 {
        return Err(OptimizeError::Domain(format!(
            "degree-{degree} fit needs at least {} points, got {n}",
            degree + 1
        )));
    }
    if sigmas.iter().any(|s| *s < R::zero()) {
        return Err(OptimizeError::Domain("negative sigma in fit input".into()));
    }
    let scale = xs.iter().fold(R::zero(), |m, &v| m.max(v.abs()));
    if scale <= R::zero() {
        return Err(OptimizeError::Domain(
            "fit offsets span a zero-width window".into(),
        ));
    }
    let ts: Vec<R> = xs.iter().map(|&x| x / scale).collect();
    let weighted = sigmas.iter().all(|s| *s > R::zero());
    let sqrt_w: Vec<R> = if weighted {
        sigmas.iter().map(|&s| R::one() / s).collect()
    } else {
        vec![R::one(); n]
    };

    let coeffs = wls_fit(&ts, ys, &sqrt_w, degree)?;
    let t_min = match interior_minimum(&coeffs) {
        Some(t) => t,
        None => {
            let edge = edge_argmin(&coeffs) * scale;
            return Err(OptimizeError::WindowEdge { edge: edge.as_f64() });
        }
    };

    let all_zero = sigmas.iter().all(|s| *s == R::zero());
    let sigma_xmin = if all_zero {
        R::zero()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
        let mut mins: Vec<R> = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut ys_b = vec![R::zero(); n];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for i in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                ys_b[i] = ys[i] + sigmas[i] * R::of(z);
            }
            let cb = wls_fit(&ts, &ys_b, &sqrt_w, degree)?;
            mins.push(interior_minimum(&cb).unwrap_or_else(|| edge_argmin(&cb)));
        }
        let b = R::of(mins.len() as f64);
        let mean = mins.iter().copied().sum::<R>() / b;
        let var = mins
            .iter()
            .map(|&t| (t - mean) * (t - mean))
            .sum::<R>()
            / (b - R::one());
        var.sqrt() * scale
    };

    Ok(PolyFitMinimum {
        x_min: t_min * scale,
        e_min: horner(&coeffs, t_min),
        sigma_xmin,
        coefficients: coeffs,
        scale,
        degree,
    })
}
