//! Jordan-Wigner mapping of the molecular Hamiltonian onto Pauli strings,
//! used to size measurement groupings and shot budgets for molecular runs.
//!
//! Spin orbital p-sigma maps to qubit p + sigma * n_orb (alpha block first),
//! matching the fermionic ordering used by the sparse determinant simulator,
//! so basis index bits line up between the two representations.

use std::collections::HashMap;

use super::{ChemError, MolecularIntegrals};
use crate::pauli::{Axis, PauliHamiltonian, PauliString};
use crate::scalar::{Complex, Real};

/// Single-qubit Pauli product a*b = i^k c.
fn mul_axis(a: Axis, b: Axis) -> (u8, Axis) {
    use Axis::*;
    match (a, b) {
        (I, x) => (0, x),
        (x, I) => (0, x),
        (X, X) | (Y, Y) | (Z, Z) => (0, I),
        (X, Y) => (1, Z),
        (Y, X) => (3, Z),
        (Y, Z) => (1, X),
        (Z, Y) => (3, X),
        (Z, X) => (1, Y),
        (X, Z) => (3, Y),
    }
}

#[derive(Clone)]
struct Term<R: Real> {
    axes: Vec<Axis>,
    coeff: Complex<R>,
}

fn mul_terms<R: Real>(a: &Term<R>, b: &Term<R>) -> Term<R> {
    let mut axes = Vec::with_capacity(a.axes.len());
    let mut phase = 0u8;
    for (&x, &y) in a.axes.iter().zip(&b.axes) {
        let (k, c) = mul_axis(x, y);
        phase = (phase + k) & 3;
        axes.push(c);
    }
    Term { axes, coeff: a.coeff * b.coeff * crate::scalar::i_pow::<R>(phase) }
}

/// Ladder operator as a two-term Pauli sum:
/// a_g = Z_{<g} (X_g + i Y_g)/2, dagger flips the Y sign.
fn ladder<R: Real>(n_qubits: usize, g: usize, dagger: bool) -> [Term<R>; 2] {
    let half = R::of(0.5);
    let mut x_axes = vec![Axis::I; n_qubits];
    let mut y_axes = vec![Axis::I; n_qubits];
    for q in 0..g {
        x_axes[q] = Axis::Z;
        y_axes[q] = Axis::Z;
    }
    x_axes[g] = Axis::X;
    y_axes[g] = Axis::Y;
    let y_coeff = if dagger { -half } else { half };
    [
        Term { axes: x_axes, coeff: Complex::new(half, R::zero()) },
        Term { axes: y_axes, coeff: Complex::new(R::zero(), y_coeff) },
    ]
}

fn accumulate<R: Real>(
    acc: &mut HashMap<Vec<Axis>, Complex<R>>,
    ops: &[[Term<R>; 2]],
    scale: R,
) {
    // Expand the product of two-term factors.
    let mut partial = vec![Term {
        axes: vec![Axis::I; ops[0][0].axes.len()],
        coeff: Complex::new(scale, R::zero()),
    }];
    for op in ops {
        let mut next = Vec::with_capacity(partial.len() * 2);
        for p in &partial {
            for t in op {
                next.push(mul_terms(p, t));
            }
        }
        partial = next;
    }
    for t in partial {
        *acc.entry(t.axes).or_insert_with(|| Complex::new(R::zero(), R::zero())) += t.coeff;
    }
}

/// Map the second-quantized Hamiltonian onto 2*n_orb qubits.
pub fn jordan_wigner<R: Real>(
    m: &MolecularIntegrals<R>,
) -> Result<PauliHamiltonian<R>, ChemError> {
    let n = m.n_orb();
    if n > 32 {
        return Err(ChemError::TooManyOrbitals { n_orb: n, max: 32 });
    }
    let nq = 2 * n;
    let qubit = |orb: usize, spin: usize| orb + spin * n;
    let mut acc: HashMap<Vec<Axis>, Complex<R>> = HashMap::new();
    acc.insert(vec![Axis::I; nq], Complex::new(m.e_core(), R::zero()));

    for p in 0..n {
        for q in 0..n {
            let h = m.h1(p, q);
            if h == R::zero() {
                continue;
            }
            for spin in 0..2 {
                accumulate(
                    &mut acc,
                    &[
                        ladder::<R>(nq, qubit(p, spin), true),
                        ladder::<R>(nq, qubit(q, spin), false),
                    ],
                    h,
                );
            }
        }
    }
    let half = R::of(0.5);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = m.eri(p, q, r, s);
                    if v == R::zero() {
                        continue;
                    }
                    // (pq|rs) a+_ps a+_rt a_st a_qs summed over spins.
                    for sp in 0..2 {
                        for tau in 0..2 {
                            accumulate(
                                &mut acc,
                                &[
                                    ladder::<R>(nq, qubit(p, sp), true),
                                    ladder::<R>(nq, qubit(r, tau), true),
                                    ladder::<R>(nq, qubit(s, tau), false),
                                    ladder::<R>(nq, qubit(q, sp), false),
                                ],
                                half * v,
                            );
                        }
                    }
                }
            }
        }
    }

    let drop = R::of(1e-12);
    let imag_tol = R::of(1e-10);
    let mut keys: Vec<Vec<Axis>> = acc.keys().cloned().collect();
    keys.sort();
    let mut h = PauliHamiltonian::new(nq);
    for axes in keys {
        let c = acc[&axes];
        if c.im.abs() > imag_tol {
            return Err(ChemError::ImaginaryResidual(c.im.as_f64()));
        }
        if c.re.abs() < drop {
            continue;
        }
        let string = PauliString::new(axes).expect("nonzero qubit count");
        h.push(c.re, string).expect("consistent qubit count");
    }
    Ok(h)
}
