//! Matrix-product-state simulator with a capped bond dimension.
//!
//! Site tensors are rank three, indexed `[left bond, physical (2), right
//! bond]`, kept in mixed-canonical form around an orthogonality center.
//! Two-site gates contract the neighboring tensors, apply the 4x4 unitary,
//! and split back with an SVD truncated to the bond cap; the discarded
//! spectral weight of every split is recorded and the kept spectrum is
//! renormalized so the state stays normalized.
//!
//! The periodic wrap bond of the ring ansatz is handled by swap-routing
//! site 0 next to site n-1, applying the gate, and swapping back. Swaps are
//! ordinary two-site gates, so at small bond caps they contribute their own
//! truncation error; that error is part of the surrogate model.

use ndarray::Array3;
use nalgebra::DMatrix;
use thiserror::Error;

use crate::circuit::{
    entangler_unitary, swap_gate, transpose_qubit_roles, CircuitError, EntanglerAnsatz, Gate4,
};
use crate::pauli::{Axis, PauliError, PauliHamiltonian, PauliString};
use crate::scalar::{Complex, Real};
use crate::statevector::{StateVector, StateVectorError};

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("mps needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("bond cap must be at least 1")]
    ZeroBondCap,
    #[error("site index {index} out of range for {n_sites} sites")]
    SiteOutOfRange { index: usize, n_sites: usize },
    #[error("gate geometry ({0}, {1}) not supported on an open chain with wrap routing")]
    UnsupportedGeometry(usize, usize),
    #[error("operator acts on {found} qubits, state has {expected}")]
    QubitCountMismatch { expected: usize, found: usize },
    #[error("svd failed to converge during a two-site split")]
    SvdFailure,
    #[error("expectation value has non-negligible imaginary part {0:e}")]
    ImaginaryResidual(f64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    StateVector(#[from] StateVectorError),
}

/// Matrix product state over qubits (physical dimension 2).
#[derive(Clone, Debug)]
pub struct MpsState<R: Real> {
    tensors: Vec<Array3<Complex<R>>>,
    max_bond: usize,
    threshold: R,
    center: usize,
    gate_discards: Vec<R>,
}

/// Default relative singular-value cutoff.
pub fn default_threshold<R: Real>() -> R {
    R::of(1e-12)
}

/// One-sided Jacobi SVD, descending singular values.
///
/// The general-purpose complex SVD of the linear-algebra crate can misfactor
/// small well-conditioned blocks by ~1e-4, which corrupts the state without
/// tripping the discard accounting. Jacobi sweeps cost more but are accurate
/// to machine precision, and the blocks here are never larger than a few
/// hundred rows.
fn jacobi_svd<R: Real>(
    m: &DMatrix<Complex<R>>,
) -> Result<(DMatrix<Complex<R>>, Vec<R>, DMatrix<Complex<R>>), MpsError> {
    let (p, q) = m.shape();
    if p < q {
        // Orthogonalize the tall orientation, then swap factor roles.
        let (u, s, vt) = jacobi_svd(&m.adjoint())?;
        return Ok((vt.adjoint(), s, u.adjoint()));
    }
    let mut a = m.clone();
    let mut v = DMatrix::<Complex<R>>::identity(q, q);
    let eps = R::default_epsilon();
    // Rounding reintroduces column correlations of a few ulps per sweep, so
    // the stop threshold has to sit above that floor or the sweeps cycle.
    let cos_tol = eps * R::of(16.0).max(R::of(8.0) * R::of(p as f64).sqrt());
    let mut converged = false;
    let mut worst = R::zero();
    for _ in 0..60 {
        let mut rotated = false;
        worst = R::zero();
        // Columns at rounding scale relative to the largest are numerically
        // zero; rotating against them chases garbage at O(1) cosine forever
        // on rank-deficient blocks.
        let mut big = R::zero();
        for k in 0..q {
            let nk = a.column(k).iter().map(|x| x.norm_sqr()).fold(R::zero(), |s, x| s + x);
            big = big.max(nk);
        }
        let tiny = big * eps * eps * R::of(64.0);
        for i in 0..q {
            for j in (i + 1)..q {
                let mut aii = R::zero();
                let mut ajj = R::zero();
                let mut aij = Complex::new(R::zero(), R::zero());
                for r in 0..p {
                    aii += a[(r, i)].norm_sqr();
                    ajj += a[(r, j)].norm_sqr();
                    aij += a[(r, i)].conj() * a[(r, j)];
                }
                if aii <= tiny || ajj <= tiny {
                    continue;
                }
                let g = aij.norm_sqr().sqrt();
                let scale = (aii * ajj).sqrt();
                let cosine = g / scale;
                if cosine <= cos_tol {
                    continue;
                }
                worst = worst.max(cosine);
                rotated = true;
                // Unitary phase-folded Jacobi rotation zeroing the (i, j)
                // entry of the column Gram matrix.
                let phase_conj = aij.conj() / Complex::new(g, R::zero());
                let tau = (ajj - aii) / (R::of(2.0) * g);
                let sign = if tau >= R::zero() { R::one() } else { -R::one() };
                let t = sign / (tau.abs() + (R::one() + tau * tau).sqrt());
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                let cs = Complex::new(c, R::zero());
                let sn = Complex::new(s, R::zero());
                for r in 0..p {
                    let x = a[(r, i)];
                    let y = a[(r, j)] * phase_conj;
                    a[(r, i)] = cs * x - sn * y;
                    a[(r, j)] = sn * x + cs * y;
                }
                for r in 0..q {
                    let x = v[(r, i)];
                    let y = v[(r, j)] * phase_conj;
                    v[(r, i)] = cs * x - sn * y;
                    v[(r, j)] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    // A tail state orthogonal to well below the truncation threshold is a
    // valid factorization even if the sweep counter ran out.
    if !converged && worst > R::of(1e-10) {
        return Err(MpsError::SvdFailure);
    }
    let norms: Vec<R> = (0..q)
        .map(|k| a.column(k).iter().map(|x| x.norm_sqr()).fold(R::zero(), |s, x| s + x).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let mut u = DMatrix::<Complex<R>>::zeros(p, q);
    let mut vt = DMatrix::<Complex<R>>::zeros(q, q);
    let mut sv = Vec::with_capacity(q);
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        sv.push(s);
        if s > R::zero() {
            let inv = Complex::new(R::one() / s, R::zero());
            for r in 0..p {
                u[(r, k)] = a[(r, src)] * inv;
            }
        }
        for r in 0..q {
            vt[(k, r)] = v[(r, src)].conj();
        }
    }
    Ok((u, sv, vt))
}

impl<R: Real> MpsState<R> {
    /// The |0...0> product state with all bonds of dimension 1.
    pub fn zero_state(n_sites: usize, max_bond: usize, threshold: R) -> Result<Self, MpsError> {
        if n_sites < 2 {
            return Err(MpsError::TooFewSites(n_sites));
        }
        if max_bond == 0 {
            return Err(MpsError::ZeroBondCap);
        }
        let zero = Complex::new(R::zero(), R::zero());
        let one = Complex::new(R::one(), R::zero());
        let tensors = (0..n_sites)
            .map(|_| {
                let mut t = Array3::from_elem((1, 2, 1), zero);
                t[(0, 0, 0)] = one;
                t
            })
            .collect();
        Ok(Self {
            tensors,
            max_bond,
            threshold,
            center: 0,
            gate_discards: Vec::new(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn max_bond(&self) -> usize {
        self.max_bond
    }

    /// Largest bond dimension currently present.
    pub fn current_bond(&self) -> usize {
        self.tensors
            .iter()
            .map(|t| t.shape()[2])
            .max()
            .unwrap_or(1)
    }

    /// Relative spectral weight discarded by each two-site split so far.
    pub fn gate_discards(&self) -> &[R] {
        &self.gate_discards
    }

    /// Total discarded weight accumulated over all splits.
    pub fn discarded_weight(&self) -> R {
        self.gate_discards.iter().copied().sum()
    }

    fn left_dim(&self, site: usize) -> usize {
        self.tensors[site].shape()[0]
    }

    fn right_dim(&self, site: usize) -> usize {
        self.tensors[site].shape()[2]
    }

    /// QR-push the center one site to the right.
    fn push_center_right(&mut self) {
        let s = self.center;
        let (l, _, r) = (self.left_dim(s), 2, self.right_dim(s));
        let mut m = DMatrix::from_element(l * 2, r, Complex::new(R::zero(), R::zero()));
        for il in 0..l {
            for p in 0..2 {
                for ir in 0..r {
                    m[(il * 2 + p, ir)] = self.tensors[s][(il, p, ir)];
                }
            }
        }
        let qr = m.qr();
        let q = qr.q();
        let rm = qr.r();
        let k = q.ncols();
        let mut t = Array3::from_elem((l, 2, k), Complex::new(R::zero(), R::zero()));
        for il in 0..l {
            for p in 0..2 {
                for ik in 0..k {
                    t[(il, p, ik)] = q[(il * 2 + p, ik)];
                }
            }
        }
        self.tensors[s] = t;
        // Absorb R into the next tensor.
        let nxt = s + 1;
        let (l2, r2) = (self.left_dim(nxt), self.right_dim(nxt));
        debug_assert_eq!(l2, r);
        let mut t2 = Array3::from_elem((k, 2, r2), Complex::new(R::zero(), R::zero()));
        for ik in 0..k {
            for p in 0..2 {
                for ir in 0..r2 {
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for il in 0..l2 {
                        acc += rm[(ik, il)] * self.tensors[nxt][(il, p, ir)];
                    }
                    t2[(ik, p, ir)] = acc;
                }
            }
        }
        self.tensors[nxt] = t2;
        self.center = nxt;
    }

    /// QR-push the center one site to the left.
    fn push_center_left(&mut self) {
        let s = self.center;
        let (l, _, r) = (self.left_dim(s), 2, self.right_dim(s));
        // M is (l, 2r); we need M = L * Q with orthonormal rows of Q, which
        // is the thin QR of the adjoint.
        let mut mh = DMatrix::from_element(2 * r, l, Complex::new(R::zero(), R::zero()));
        for il in 0..l {
            for p in 0..2 {
                for ir in 0..r {
                    mh[(p * r + ir, il)] = self.tensors[s][(il, p, ir)].conj();
                }
            }
        }
        let qr = mh.qr();
        let q = qr.q();
        let rm = qr.r();
        let k = q.ncols();
        let mut t = Array3::from_elem((k, 2, r), Complex::new(R::zero(), R::zero()));
        for ik in 0..k {
            for p in 0..2 {
                for ir in 0..r {
                    t[(ik, p, ir)] = q[(p * r + ir, ik)].conj();
                }
            }
        }
        self.tensors[s] = t;
        let prv = s - 1;
        let (l2, r2) = (self.left_dim(prv), self.right_dim(prv));
        debug_assert_eq!(r2, l);
        let mut t2 = Array3::from_elem((l2, 2, k), Complex::new(R::zero(), R::zero()));
        for il in 0..l2 {
            for p in 0..2 {
                for ik in 0..k {
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for ir in 0..r2 {
                        // M = R^H Q^H: the factor absorbed leftward is R^H.
                        acc += self.tensors[prv][(il, p, ir)] * rm[(ik, ir)].conj();
                    }
                    t2[(il, p, ik)] = acc;
                }
            }
        }
        self.tensors[prv] = t2;
        self.center = prv;
    }

    fn move_center_to(&mut self, site: usize) {
        while self.center < site {
            self.push_center_right();
        }
        while self.center > site {
            self.push_center_left();
        }
    }

    /// Apply a two-qubit gate on adjacent sites `(site, site+1)` with the
    /// first gate index acting on `site`. Splits back with a truncated SVD.
    pub fn apply_two_site_gate(&mut self, site: usize, u: &Gate4<R>) -> Result<(), MpsError> {
        let n = self.n_sites();
        if site + 1 >= n {
            return Err(MpsError::SiteOutOfRange { index: site + 1, n_sites: n });
        }
        self.move_center_to(site);
        let (l, r) = (self.left_dim(site), self.right_dim(site + 1));
        let k_mid = self.right_dim(site);
        // Theta[l, p1, p2, r], then gate, then reshape to (l p1) x (p2 r).
        let zero = Complex::new(R::zero(), R::zero());
        let mut m = DMatrix::from_element(2 * l, 2 * r, zero);
        for il in 0..l {
            for ir in 0..r {
                let mut theta = [[zero; 2]; 2];
                for p1 in 0..2 {
                    for p2 in 0..2 {
                        let mut acc = zero;
                        for km in 0..k_mid {
                            acc += self.tensors[site][(il, p1, km)]
                                * self.tensors[site + 1][(km, p2, ir)];
                        }
                        theta[p1][p2] = acc;
                    }
                }
                for q1 in 0..2 {
                    for q2 in 0..2 {
                        let mut acc = zero;
                        for p1 in 0..2 {
                            for p2 in 0..2 {
                                acc += u[q1 * 2 + q2][p1 * 2 + p2] * theta[p1][p2];
                            }
                        }
                        m[(il * 2 + q1, q2 * r + ir)] = acc;
                    }
                }
            }
        }
        let (su, sv, vt) = jacobi_svd(&m)?;
        // Relative cutoff against the largest singular value, then the cap.
        let smax = sv[0];
        let mut keep = sv
            .iter()
            .take_while(|&&s| s > self.threshold * smax)
            .count()
            .max(1);
        keep = keep.min(self.max_bond);
        let total: R = sv.iter().map(|&s| s * s).sum();
        let kept: R = sv.iter().take(keep).map(|&s| s * s).sum();
        let discarded = if total > R::zero() {
            (total - kept) / total
        } else {
            R::zero()
        };
        self.gate_discards.push(discarded);
        let scale = kept.sqrt();
        let mut t1 = Array3::from_elem((l, 2, keep), zero);
        for il in 0..l {
            for p in 0..2 {
                for ik in 0..keep {
                    t1[(il, p, ik)] = su[(il * 2 + p, ik)];
                }
            }
        }
        let mut t2 = Array3::from_elem((keep, 2, r), zero);
        for ik in 0..keep {
            let s_norm = Complex::new(sv[ik] / scale, R::zero());
            for p in 0..2 {
                for ir in 0..r {
                    t2[(ik, p, ir)] = s_norm * vt[(ik, p * r + ir)];
                }
            }
        }
        self.tensors[site] = t1;
        self.tensors[site + 1] = t2;
        self.center = site + 1;
        Ok(())
    }

    /// Apply a gate on a ring bond. Adjacent bonds map directly; the wrap
    /// bond `(n-1, 0)` is swap-routed: site 0 travels next to site n-1,
    /// the gate acts, and the swaps are undone.
    pub fn apply_gate_ring(
        &mut self,
        i: usize,
        j: usize,
        u: &Gate4<R>,
    ) -> Result<(), MpsError> {
        let n = self.n_sites();
        if i >= n || j >= n {
            return Err(MpsError::SiteOutOfRange { index: i.max(j), n_sites: n });
        }
        if j == i + 1 {
            return self.apply_two_site_gate(i, u);
        }
        if i == j + 1 {
            return self.apply_two_site_gate(j, &transpose_qubit_roles(u));
        }
        if i == n - 1 && j == 0 {
            let sw = swap_gate::<R>();
            for s in 0..n - 2 {
                self.apply_two_site_gate(s, &sw)?;
            }
            // Position n-2 now holds qubit 0, the gate's second index.
            self.apply_two_site_gate(n - 2, &transpose_qubit_roles(u))?;
            for s in (0..n - 2).rev() {
                self.apply_two_site_gate(s, &sw)?;
            }
            return Ok(());
        }
        Err(MpsError::UnsupportedGeometry(i, j))
    }

    /// Squared norm via full transfer contraction (gauge-independent).
    pub fn norm_sqr(&self) -> R {
        let id = local_axis_matrix::<R>(Axis::I);
        self.transfer_value(|_| id).re
    }

    pub fn norm(&self) -> R {
        self.norm_sqr().sqrt()
    }

    /// Expectation value of a Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<R, MpsError> {
        if p.n_qubits() != self.n_sites() {
            return Err(MpsError::QubitCountMismatch {
                expected: self.n_sites(),
                found: p.n_qubits(),
            });
        }
        let v = self.transfer_value(|s| local_axis_matrix::<R>(p.axis(s)));
        let scale = R::one().max(v.re.abs());
        if v.im.abs() > R::of(1e-9) * scale {
            return Err(MpsError::ImaginaryResidual(v.im.as_f64()));
        }
        Ok(v.re)
    }

    /// Energy `sum_i a_i <P_i>`.
    pub fn expectation(&self, h: &PauliHamiltonian<R>) -> Result<R, MpsError> {
        let mut e = R::zero();
        for term in h.terms() {
            e += term.coeff * self.pauli_expectation(&term.string)?;
        }
        Ok(e)
    }

    /// Contract `<psi| prod_s O_s |psi>` for site-local operators.
    fn transfer_value(&self, op: impl Fn(usize) -> [[Complex<R>; 2]; 2]) -> Complex<R> {
        let zero = Complex::new(R::zero(), R::zero());
        let one = Complex::new(R::one(), R::zero());
        // boundary[l_bra, l_ket]
        let mut boundary = DMatrix::from_element(1, 1, one);
        for (s, t) in self.tensors.iter().enumerate() {
            let o = op(s);
            let (l, r) = (t.shape()[0], t.shape()[2]);
            let mut next = DMatrix::from_element(r, r, zero);
            // tmp[l_bra, p_ket, r_ket] = sum_l boundary[l_bra, l] t[l, p, r]
            let lb = boundary.nrows();
            let mut tmp = vec![zero; lb * 2 * r];
            for ilb in 0..lb {
                for p in 0..2 {
                    for ir in 0..r {
                        let mut acc = zero;
                        for il in 0..l {
                            acc += boundary[(ilb, il)] * t[(il, p, ir)];
                        }
                        tmp[(ilb * 2 + p) * r + ir] = acc;
                    }
                }
            }
            // apply O on the ket physical index, contract with conj(bra).
            for irb in 0..r {
                for ir in 0..r {
                    let mut acc = zero;
                    for ilb in 0..lb {
                        for q in 0..2 {
                            let mut op_row = zero;
                            for p in 0..2 {
                                op_row += o[q][p] * tmp[(ilb * 2 + p) * r + ir];
                            }
                            acc += t[(ilb, q, irb)].conj() * op_row;
                        }
                    }
                    next[(irb, ir)] = acc;
                }
            }
            boundary = next;
        }
        boundary[(0, 0)]
    }

    /// Dense contraction into a statevector (small systems, debugging).
    pub fn to_statevector(&self) -> Result<StateVector<R>, MpsError> {
        let n = self.n_sites();
        let zero = Complex::new(R::zero(), R::zero());
        let mut amps = vec![zero; 1usize << n];
        // walk[l] over basis prefixes; qubit s is bit s of the index.
        let mut stack: Vec<(usize, usize, Vec<Complex<R>>)> =
            vec![(0, 0, vec![Complex::new(R::one(), R::zero())])];
        while let Some((site, prefix, bond)) = stack.pop() {
            if site == n {
                amps[prefix] = bond[0];
                continue;
            }
            let t = &self.tensors[site];
            let (l, r) = (t.shape()[0], t.shape()[2]);
            debug_assert_eq!(l, bond.len());
            for p in 0..2 {
                let mut next = vec![zero; r];
                for ir in 0..r {
                    let mut acc = zero;
                    for il in 0..l {
                        acc += bond[il] * t[(il, p, ir)];
                    }
                    next[ir] = acc;
                }
                stack.push((site + 1, prefix | (p << site), next));
            }
        }
        Ok(StateVector::from_amplitudes(n, amps)?)
    }
}

fn local_axis_matrix<R: Real>(a: Axis) -> [[Complex<R>; 2]; 2] {
    let zero = Complex::new(R::zero(), R::zero());
    let one = Complex::new(R::one(), R::zero());
    let i = Complex::new(R::zero(), R::one());
    match a {
        Axis::I => [[one, zero], [zero, one]],
        Axis::X => [[zero, one], [one, zero]],
        Axis::Y => [[zero, -i], [i, zero]],
        Axis::Z => [[one, zero], [zero, -one]],
    }
}

/// Build the ring-ansatz state at a given bond cap.
pub fn prepare_ansatz_state<R: Real>(
    ansatz: &EntanglerAnsatz,
    params: &[R],
    max_bond: usize,
    threshold: R,
) -> Result<MpsState<R>, MpsError> {
    ansatz.check_params(params)?;
    let mut state = MpsState::zero_state(ansatz.n_sites, max_bond, threshold)?;
    for (i, j, layer) in ansatz.gate_sequence() {
        let u = entangler_unitary(params[layer], ansatz.sign);
        state.apply_gate_ring(i, j, &u)?;
    }
    Ok(state)
}

/// Ansatz energy at a bond cap; also reports the cumulative discarded
/// weight of the circuit as a crude error proxy.
pub fn ansatz_energy<R: Real>(
    ansatz: &EntanglerAnsatz,
    params: &[R],
    h: &PauliHamiltonian<R>,
    max_bond: usize,
    threshold: R,
) -> Result<(R, R), MpsError> {
    let state = prepare_ansatz_state(ansatz, params, max_bond, threshold)?;
    let e = state.expectation(h)?;
    Ok((e, state.discarded_weight()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GeneratorSign;
    use crate::pauli::build_ising_hamiltonian;

    #[test]
    fn product_state_norm_and_energy() {
        let n = 6;
        let psi = MpsState::<f64>::zero_state(n, 4, default_threshold()).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let h = build_ising_hamiltonian::<f64>(n, 1.0, 0.9, 0.4).unwrap();
        let e = psi.expectation(&h).unwrap();
        assert!((e - 1.9 * n as f64).abs() < 1e-12);
    }

    #[test]
    fn norm_stays_one_after_every_gate() {
        let ansatz = EntanglerAnsatz::new(6, GeneratorSign::Minus).unwrap();
        let params = [0.4, -0.9, 0.25, 0.7];
        let mut state = MpsState::<f64>::zero_state(6, 2, default_threshold()).unwrap();
        for (i, j, layer) in ansatz.gate_sequence() {
            let u = entangler_unitary(params[layer], ansatz.sign);
            state.apply_gate_ring(i, j, &u).unwrap();
            assert!((state.norm() - 1.0).abs() < 1e-8, "after gate on ({i},{j})");
        }
        // A bond cap of 2 on this circuit must actually truncate.
        assert!(state.discarded_weight() > 0.0);
    }

    #[test]
    fn full_bond_matches_statevector() {
        let n = 6;
        let ansatz = EntanglerAnsatz::new(n, GeneratorSign::Minus).unwrap();
        let params = [0.3, -0.8, 0.2, 0.6];
        let mps = prepare_ansatz_state::<f64>(&ansatz, &params, 64, default_threshold()).unwrap();
        let sv = crate::statevector::prepare_ansatz_state::<f64>(&ansatz, &params).unwrap();
        let dense = mps.to_statevector().unwrap();
        let overlap = dense.inner(&sv).norm();
        assert!((overlap - 1.0).abs() < 1e-10, "overlap {overlap}");
        let h = build_ising_hamiltonian::<f64>(n, 1.0, 0.9, 0.4).unwrap();
        let em = mps.expectation(&h).unwrap();
        let es = sv.expectation(&h).unwrap();
        assert!((em - es).abs() < 1e-10);
        assert!(mps.discarded_weight() < 1e-20);
    }

    #[test]
    fn truncation_is_recorded_and_normalized() {
        let n = 8;
        let ansatz = EntanglerAnsatz::new(n, GeneratorSign::Minus).unwrap();
        let params = [0.5, -1.1, 0.8, 0.9];
        let tight = prepare_ansatz_state::<f64>(&ansatz, &params, 2, default_threshold()).unwrap();
        assert!((tight.norm() - 1.0).abs() < 1e-8);
        assert!(tight.discarded_weight() > 1e-8);
        let loose = prepare_ansatz_state::<f64>(&ansatz, &params, 64, default_threshold()).unwrap();
        assert!(loose.discarded_weight() < tight.discarded_weight());
    }

    #[test]
    fn geometry_guards() {
        let mut psi = MpsState::<f64>::zero_state(6, 4, default_threshold()).unwrap();
        let u = entangler_unitary(0.2, GeneratorSign::Minus);
        assert!(psi.apply_gate_ring(1, 2, &u).is_ok());
        assert!(psi.apply_gate_ring(2, 1, &u).is_ok());
        assert!(psi.apply_gate_ring(5, 0, &u).is_ok());
        assert!(psi.apply_gate_ring(0, 3, &u).is_err());
        assert!(psi.apply_gate_ring(0, 6, &u).is_err());
    }
}
