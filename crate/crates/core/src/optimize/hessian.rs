//! Finite-difference Hessian of the surrogate and the conjugate-direction
//! selection that feeds the line search.

use nalgebra::DMatrix;

use super::{check_finite, ConjugateDirections, DropReason, HessianResult, OptimizeError};
use crate::scalar::Real;

/// Default step: 1e-3 scaled by the point's infinity norm.
pub fn default_hessian_step<R: Real>(x: &[R]) -> R {
    let scale = x.iter().fold(R::one(), |m, &v| m.max(v.abs()));
    R::of(1e-3) * scale
}

/// Central second differences
/// H_kl = [f(x+h_k+h_l) - f(x+h_k-h_l) - f(x-h_k+h_l) + f(x-h_k-h_l)] / 4h^2,
/// symmetrized and eigen-decomposed (eigenvalues descending).
pub fn finite_difference_hessian<R: Real>(
    mut cost: impl FnMut(&[R]) -> Result<R, OptimizeError>,
    x: &[R],
    step: R,
) -> Result<HessianResult<R>, OptimizeError> {
    if step <= R::zero() {
        return Err(OptimizeError::Domain(format!(
            "hessian step must be > 0, got {}",
            step.as_f64()
        )));
    }
    let n = x.len();
    let f0 = check_finite(cost(x)?, "hessian center")?;
    let mut probe = x.to_vec();
    let mut eval = |probe: &mut Vec<R>, k: usize, sk: R, l: usize, sl: R| {
        probe[k] += sk * step;
        probe[l] += sl * step;
        let f = check_finite(cost(&probe[..])?, "hessian probe");
        probe[k] = x[k];
        probe[l] = x[l];
        f
    };
    let denom = R::of(4.0) * step * step;
    let mut h = DMatrix::<R>::zeros(n, n);
    for k in 0..n {
        // Diagonal: f(x+2h) - 2 f(x) + f(x-2h) over (2h)^2/... same 4h^2.
        let fpp = eval(&mut probe, k, R::of(2.0), k, R::zero())?;
        let fmm = eval(&mut probe, k, R::of(-2.0), k, R::zero())?;
        h[(k, k)] = (fpp - f0 - f0 + fmm) / denom;
        for l in 0..k {
            let fpp = eval(&mut probe, k, R::one(), l, R::one())?;
            let fpm = eval(&mut probe, k, R::one(), l, -R::one())?;
            let fmp = eval(&mut probe, k, -R::one(), l, R::one())?;
            let fmm = eval(&mut probe, k, -R::one(), l, -R::one())?;
            let v = (fpp - fpm - fmp + fmm) / denom;
            h[(k, l)] = v;
            h[(l, k)] = v;
        }
    }
    let sym = (&h + h.transpose()) * R::of(0.5);
    let eig = sym.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<R> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::<R>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(HessianResult { matrix: sym, eigenvalues, eigenvectors, fd_step: step })
}

/// Keep the well-conditioned descent directions: drop negatives and
/// near-zeros below `drop_tol`, then optionally truncate to the
/// `keep_top` steepest.
pub fn select_directions<R: Real>(
    h: &HessianResult<R>,
    drop_tol: R,
    keep_top: Option<usize>,
) -> Result<ConjugateDirections<R>, OptimizeError> {
    let n = h.eigenvalues.len();
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped: Vec<(usize, DropReason)> = Vec::new();
    for (i, &ev) in h.eigenvalues.iter().enumerate() {
        if ev < R::zero() {
            dropped.push((i, DropReason::Negative));
        } else if ev < drop_tol {
            dropped.push((i, DropReason::NearZero));
        } else {
            kept.push(i);
        }
    }
    if let Some(top) = keep_top {
        // Eigenvalues are descending, so the steepest are the first kept.
        while kept.len() > top {
            let idx = kept.pop().expect("nonempty");
            dropped.push((idx, DropReason::TruncatedByRank));
        }
    }
    if kept.is_empty() {
        return Err(OptimizeError::EmptyDirections);
    }
    dropped.sort_by_key(|&(i, _)| i);
    let mut directions = DMatrix::<R>::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        directions.set_column(col, &h.eigenvectors.column(i));
    }
    let kept_eigenvalues = kept.iter().map(|&i| h.eigenvalues[i]).collect();
    Ok(ConjugateDirections {
        directions,
        kept_eigenvalues,
        kept_indices: kept,
        dropped,
    })
}
