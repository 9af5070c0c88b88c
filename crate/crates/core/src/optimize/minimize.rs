//! Derivative-free-ish minimizers: BFGS with finite-difference gradients
//! for the noiseless surrogate, and the Powell direction-set baseline.

use nalgebra::{DMatrix, DVector};

use super::{check_finite, ConjugateDirections, OptimizeError};
use crate::scalar::Real;

/// Central-difference gradient, step scaled per coordinate.
pub fn fd_gradient<R: Real>(
    cost: &mut dyn FnMut(&[R]) -> Result<R, OptimizeError>,
    x: &[R],
) -> Result<Vec<R>, OptimizeError> {
    // cbrt(eps) balances truncation against rounding for central diffs.
    let base = R::of(f64::EPSILON.cbrt());
    let mut g = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = base * R::one().max(x[i].abs());
        probe[i] = x[i] + h;
        let fp = check_finite(cost(&probe)?, "gradient probe")?;
        probe[i] = x[i] - h;
        let fm = check_finite(cost(&probe)?, "gradient probe")?;
        probe[i] = x[i];
        g.push((fp - fm) / (h + h));
    }
    Ok(g)
}

fn inf_norm<R: Real>(v: &[R]) -> R {
    v.iter().fold(R::zero(), |m, &x| m.max(x.abs()))
}

/// Quasi-Newton (BFGS) minimization with finite-difference gradients and
/// Armijo backtracking. Returns when the gradient infinity-norm drops to
/// `tol`; the iteration cap surfaces as a non-convergence error carrying
/// the best point seen.
///
/// Two guards keep the iteration sane on surrogates whose truncation makes
/// the landscape locally jagged: proposed steps are capped in norm so a
/// noise-corrupted curvature model cannot fling the iterate across the
/// (periodic) landscape, and a run of backtracking collapses with no real
/// progress ends the search at the best point seen instead of grinding
/// through the full iteration budget.
pub fn surrogate_minimize<R: Real>(
    mut cost: impl FnMut(&[R]) -> Result<R, OptimizeError>,
    x0: &[R],
    tol: R,
) -> Result<Vec<R>, OptimizeError> {
    let n = x0.len();
    if n == 0 {
        return Err(OptimizeError::Domain("empty parameter vector".into()));
    }
    let max_iters = 500 * n;
    let max_step = R::of(0.5);
    let mut x = DVector::from_column_slice(x0);
    let mut fx = check_finite(cost(x.as_slice())?, "cost")?;
    let mut g = DVector::from_vec(fd_gradient(&mut cost, x.as_slice())?);
    let mut h_inv = DMatrix::<R>::identity(n, n);
    let mut best = (x.clone(), fx);
    let mut stalled = 0u32;

    for _ in 0..max_iters {
        if inf_norm(g.as_slice()) <= tol {
            return Ok(x.as_slice().to_vec());
        }
        let mut d = -(&h_inv * &g);
        let mut slope = d.dot(&g);
        if slope >= R::zero() {
            // Stale curvature model; restart from steepest descent.
            h_inv = DMatrix::identity(n, n);
            d = -g.clone();
            slope = d.dot(&g);
        }
        let d_norm = d.norm();
        if d_norm > max_step {
            let shrink = max_step / d_norm;
            d *= shrink;
            slope *= shrink;
        }
        // Armijo backtracking.
        let c1 = R::of(1e-4);
        let mut t = R::one();
        let t_min = R::of(1e-16);
        let mut x_new = &x + &d * t;
        let mut f_new = check_finite(cost(x_new.as_slice())?, "cost")?;
        while f_new > fx + c1 * t * slope && t > t_min {
            t *= R::of(0.5);
            x_new = &x + &d * t;
            f_new = check_finite(cost(x_new.as_slice())?, "cost")?;
        }
        if t <= t_min {
            // No descent even at tiny steps: flat or kinked along d.
            break;
        }
        let improve = (fx - f_new).abs() / fx.abs().max(R::one());
        if t <= R::of(1e-6) && improve <= R::of(1e-10) {
            // Descent only survives at collapsed steps and the value barely
            // moves: the differentiable model has failed, not the tolerance.
            stalled += 1;
            if stalled >= 8 {
                break;
            }
        } else {
            stalled = 0;
        }
        let g_new = DVector::from_vec(fd_gradient(&mut cost, x_new.as_slice())?);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > R::of(1e-12) * s.norm() * y.norm() {
            // Standard BFGS inverse update.
            let rho = R::one() / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            let shy = &s * (&hy.transpose() * rho);
            h_inv = h_inv - (&shy + &shy.transpose())
                + &s * s.transpose() * (rho * rho * yhy + rho);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if fx < best.1 {
            best = (x.clone(), fx);
        }
    }
    if inf_norm(g.as_slice()) <= tol {
        return Ok(x.as_slice().to_vec());
    }
    Err(OptimizeError::NonConvergence {
        best: best.0.iter().map(|v| v.as_f64()).collect(),
        best_value: best.1.as_f64(),
    })
}

/// Bracket a 1-D minimum by golden-ratio expansion from (0, step).
fn bracket<R: Real>(
    phi: &mut dyn FnMut(R) -> Result<R, OptimizeError>,
    step: R,
) -> Result<(R, R, R, R, R, R), OptimizeError> {
    let gold = R::of(1.618_033_988_749_895);
    let mut a = R::zero();
    let mut b = step;
    let mut fa = phi(a)?;
    let mut fb = phi(b)?;
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + gold * (b - a);
    let mut fc = phi(c)?;
    let mut guard = 0;
    while fb >= fc {
        let d = c + gold * (c - b);
        let fd = phi(d)?;
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = d;
        fc = fd;
        guard += 1;
        if guard > 200 {
            return Err(OptimizeError::Evaluation(
                "line-search bracketing ran away (cost unbounded below?)".into(),
            ));
        }
    }
    Ok((a, b, c, fa, fb, fc))
}

/// Brent's parabolic-interpolation line minimum on a bracketed triple.
fn brent<R: Real>(
    phi: &mut dyn FnMut(R) -> Result<R, OptimizeError>,
    a0: R,
    b0: R,
    xtol: R,
) -> Result<(R, R), OptimizeError> {
    let cgold = R::of(0.381_966_011_250_105);
    let (mut a, mut b) = if a0 < b0 { (a0, b0) } else { (b0, a0) };
    let mut x = a + cgold * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = phi(x)?;
    let mut fw = fx;
    let mut fv = fx;
    let mut d = R::zero();
    let mut e = R::zero();
    for _ in 0..100 {
        let xm = (a + b) * R::of(0.5);
        let tol1 = xtol * x.abs() + R::of(1e-12);
        let tol2 = tol1 + tol1;
        if (x - xm).abs() <= tol2 - (b - a) * R::of(0.5) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // Parabola through x, w, v.
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = (q - r) * R::of(2.0);
            if q > R::zero() {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (q * e_old * R::of(0.5)).abs()
                && p > q * (a - x)
                && p < q * (b - x)
            {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= R::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = phi(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}

/// Minimize along `x + t*dir`, returning the step and its value.
fn line_minimize<R: Real>(
    cost: &mut dyn FnMut(&[R]) -> Result<R, OptimizeError>,
    x: &[R],
    dir: &[R],
    step: R,
    xtol: R,
) -> Result<(R, R), OptimizeError> {
    let mut probe = x.to_vec();
    let mut phi = |t: R| -> Result<R, OptimizeError> {
        for (p, (&xi, &di)) in probe.iter_mut().zip(x.iter().zip(dir)) {
            *p = xi + t * di;
        }
        check_finite(cost(&probe)?, "line cost")
    };
    let (a, b, c, _fa, fb, _fc) = bracket(&mut phi, step)?;
    let (lo, hi) = (a.min(c), a.max(c));
    let (t, ft) = brent(&mut phi, lo, hi, xtol)?;
    if ft <= fb {
        Ok((t, ft))
    } else {
        Ok((b, fb))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PowellSettings<R: Real> {
    /// Relative function-decrease termination (the classic 2|df| test).
    pub ftol: R,
    /// Line-minimization x tolerance.
    pub line_xtol: R,
    /// First bracketing step along each direction.
    pub initial_step: R,
    pub max_cycles: usize,
}

impl<R: Real> Default for PowellSettings<R> {
    fn default() -> Self {
        Self {
            ftol: R::of(1e-8),
            line_xtol: R::of(1e-6),
            initial_step: R::of(0.1),
            max_cycles: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PowellResult<R: Real> {
    pub x: Vec<R>,
    pub value: R,
    pub cycles: usize,
    pub converged: bool,
}

/// Powell's direction-set method, seeded with the conjugate directions.
/// Every cost call goes through the caller's function, so an evaluator
/// wrapper sees the complete call count.
pub fn powell_minimize<R: Real>(
    mut cost: impl FnMut(&[R]) -> Result<R, OptimizeError>,
    x0: &[R],
    initial_dirs: &ConjugateDirections<R>,
    settings: PowellSettings<R>,
) -> Result<PowellResult<R>, OptimizeError> {
    let n = x0.len();
    if initial_dirs.n_params() != n {
        return Err(OptimizeError::Domain(format!(
            "direction set spans {} parameters, point has {n}",
            initial_dirs.n_params()
        )));
    }
    let mut dirs: Vec<Vec<R>> =
        (0..initial_dirs.n_dirs()).map(|d| initial_dirs.direction(d)).collect();
    let mut x = x0.to_vec();
    let mut fx = check_finite(cost(&x)?, "cost")?;
    let two = R::of(2.0);

    for cycle in 0..settings.max_cycles {
        let x_start = x.clone();
        let f_start = fx;
        let mut biggest_drop = R::zero();
        let mut biggest_idx = 0;
        for (i, dir) in dirs.iter().enumerate() {
            let f_before = fx;
            let (t, ft) =
                line_minimize(&mut cost, &x, dir, settings.initial_step, settings.line_xtol)?;
            if ft < fx {
                for (xi, di) in x.iter_mut().zip(dir) {
                    *xi += t * *di;
                }
                fx = ft;
            }
            if f_before - fx > biggest_drop {
                biggest_drop = f_before - fx;
                biggest_idx = i;
            }
        }
        // Numerical-Recipes relative decrease test.
        if two * (f_start - fx) <= settings.ftol * (f_start.abs() + fx.abs()) + R::of(1e-300)
        {
            return Ok(PowellResult { x, value: fx, cycles: cycle + 1, converged: true });
        }
        // Direction replacement: try the net displacement of the cycle.
        let net: Vec<R> = x.iter().zip(&x_start).map(|(&a, &b)| a - b).collect();
        let net_norm = net.iter().map(|&v| v * v).sum::<R>().sqrt();
        if net_norm > R::zero() {
            let mut extrap = x.clone();
            for (e, d) in extrap.iter_mut().zip(&net) {
                *e += *d;
            }
            let f_e = check_finite(cost(&extrap)?, "cost")?;
            if f_e < f_start {
                let t1 = two * (f_start - two * fx + f_e)
                    * (f_start - fx - biggest_drop)
                    * (f_start - fx - biggest_drop);
                let t2 = biggest_drop * (f_start - f_e) * (f_start - f_e);
                if t1 < t2 {
                    let unit: Vec<R> = net.iter().map(|&v| v / net_norm).collect();
                    let (t, ft) = line_minimize(
                        &mut cost,
                        &x,
                        &unit,
                        settings.initial_step,
                        settings.line_xtol,
                    )?;
                    if ft < fx {
                        for (xi, di) in x.iter_mut().zip(&unit) {
                            *xi += t * *di;
                        }
                        fx = ft;
                    }
                    dirs[biggest_idx] = unit;
                }
            }
        }
    }
    Err(OptimizeError::NonConvergence {
        best: x.iter().map(|v| v.as_f64()).collect(),
        best_value: fx.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn quadratic_bowl(center: &[f64]) -> impl Fn(&[f64]) -> Result<f64, OptimizeError> + '_ {
        move |x: &[f64]| {
            let mut f = 0.0;
            for (i, (&xi, &ci)) in x.iter().zip(center).enumerate() {
                f += (1.0 + i as f64) * (xi - ci) * (xi - ci);
            }
            Ok(f)
        }
    }

    #[test]
    fn bfgs_solves_quadratic_bowl() {
        let center = [0.3, -1.2, 2.0];
        let x = surrogate_minimize(quadratic_bowl(&center), &[0.0; 3], 1e-10).unwrap();
        for (a, b) in x.iter().zip(&center) {
            assert!((a - b).abs() < 1e-8, "{x:?}");
        }
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let rosen = |x: &[f64]| {
            Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
        };
        let x = surrogate_minimize(rosen, &[-1.2, 1.0], 1e-9).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn gradient_matches_analytic() {
        let mut f = |x: &[f64]| Ok(x[0] * x[0] * 3.0 + x[1] * 2.0);
        let g = fd_gradient(&mut f, &[1.5, -4.0]).unwrap();
        assert!((g[0] - 9.0).abs() < 1e-7);
        assert!((g[1] - 2.0).abs() < 1e-7);
    }

    fn axis_dirs(n: usize) -> ConjugateDirections<f64> {
        ConjugateDirections {
            directions: DMatrix::identity(n, n),
            kept_eigenvalues: vec![1.0; n],
            kept_indices: (0..n).collect(),
            dropped: vec![],
        }
    }

    #[test]
    fn powell_solves_quadratic_bowl() {
        let center = [0.5, -0.25];
        let res = powell_minimize(
            quadratic_bowl(&center),
            &[2.0, 2.0],
            &axis_dirs(2),
            PowellSettings::default(),
        )
        .unwrap();
        assert!(res.converged);
        for (a, b) in res.x.iter().zip(&center) {
            assert!((a - b).abs() < 1e-5, "{:?}", res.x);
        }
    }

    #[test]
    fn powell_solves_rosenbrock() {
        let rosen = |x: &[f64]| {
            Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
        };
        let res = powell_minimize(
            rosen,
            &[-1.2, 1.0],
            &axis_dirs(2),
            PowellSettings { ftol: 1e-12, ..PowellSettings::default() },
        )
        .unwrap();
        assert!((res.x[0] - 1.0).abs() < 1e-4 && (res.x[1] - 1.0).abs() < 1e-4, "{:?}", res.x);
    }

    #[test]
    fn nonconvergence_carries_best_point() {
        // One-cycle cap on Rosenbrock cannot converge.
        let rosen = |x: &[f64]| {
            Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
        };
        let err = powell_minimize(
            rosen,
            &[-1.2, 1.0],
            &axis_dirs(2),
            PowellSettings { max_cycles: 1, ..PowellSettings::default() },
        )
        .unwrap_err();
        match err {
            OptimizeError::NonConvergence { best, best_value } => {
                assert_eq!(best.len(), 2);
                assert!(best_value < 24.2); // initial value
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
