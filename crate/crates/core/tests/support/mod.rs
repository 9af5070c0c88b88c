//! Dense-matrix oracles shared by the integration tests.
//!
//! Everything here recomputes quantities along an independent route: Pauli
//! sums become explicit Kronecker products, fermionic operators act on
//! occupation bitstrings with explicit parity signs, and matrix exponentials
//! go through scaling-and-squaring Taylor summation. None of it touches the
//! mask, strided-gate, or Slater-Condon code paths under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use vqsls_core::chem::MolecularIntegrals;
use vqsls_core::circuit::{entangler_unitary, EntanglerAnsatz, Gate4};
use vqsls_core::noise::{EnergyModel, NoiseError};
use vqsls_core::optimize::ConjugateDirections;
use vqsls_core::pauli::{Axis, PauliHamiltonian, PauliString};
use vqsls_core::sws::{Determinant, Spin, UccFactor};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn axis_matrix(a: Axis) -> CMat {
    let z = c(0.0, 0.0);
    let entries = match a {
        Axis::I => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
        Axis::X => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        Axis::Y => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        Axis::Z => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
    };
    CMat::from_row_slice(2, 2, &entries)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Dense matrix of a Pauli string with qubit 0 as the least significant bit
/// of the basis index: op(q_{n-1}) (x) ... (x) op(q_0).
pub fn pauli_string_matrix(p: &PauliString) -> CMat {
    let mut m = CMat::identity(1, 1);
    for q in (0..p.n_qubits()).rev() {
        m = kron(&m, &axis_matrix(p.axis(q)));
    }
    m
}

pub fn hamiltonian_matrix(h: &PauliHamiltonian<f64>) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut m = CMat::zeros(dim, dim);
    for t in h.terms() {
        m += pauli_string_matrix(&t.string) * c(t.coeff, 0.0);
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &RMat, b: &RMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn matrices_commute(a: &CMat, b: &CMat, tol: f64) -> bool {
    let comm = a * b - b * a;
    comm.iter().map(|x| x.norm()).fold(0.0, f64::max) <= tol
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling-and-squaring over a plain Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm = one_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let t = a / c(2f64.powi(squarings as i32), 0.0);
    let mut sum = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=60u32 {
        term = (&term * &t) / c(k as f64, 0.0);
        sum += &term;
        if one_norm(&term) < 1e-18 * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn expm_real(a: &RMat) -> RMat {
    let n = a.nrows();
    let ac = CMat::from_fn(n, n, |i, j| c(a[(i, j)], 0.0));
    let e = expm(&ac);
    RMat::from_fn(n, n, |i, j| {
        assert!(e[(i, j)].im.abs() < 1e-12, "real expm picked up an imaginary part");
        e[(i, j)].re
    })
}

pub fn gate_matrix(u: &Gate4<f64>) -> CMat {
    CMat::from_fn(4, 4, |i, j| u[i][j])
}

/// Embed a two-qubit gate on qubits (i, j) into the full register, i being
/// the most significant index of the 4x4 basis.
pub fn embed_gate(u: &Gate4<f64>, i: usize, j: usize, n_qubits: usize) -> CMat {
    assert!(i != j && i < n_qubits && j < n_qubits);
    let dim = 1usize << n_qubits;
    let mut m = CMat::zeros(dim, dim);
    for z in 0..dim {
        let col = ((z >> i) & 1) << 1 | ((z >> j) & 1);
        for bi in 0..2usize {
            for bj in 0..2usize {
                let row = bi << 1 | bj;
                let zt = (z & !((1 << i) | (1 << j))) | (bi << i) | (bj << j);
                m[(zt, z)] += u[row][col];
            }
        }
    }
    m
}

/// Ansatz state built gate by gate from full embedded matrices applied to
/// |0...0>, bypassing the strided in-place update.
pub fn dense_ansatz_state(ansatz: &EntanglerAnsatz, params: &[f64]) -> CVec {
    let dim = 1usize << ansatz.n_sites;
    let mut v = CVec::zeros(dim);
    v[0] = c(1.0, 0.0);
    for (i, j, layer) in ansatz.gate_sequence() {
        let u = entangler_unitary(params[layer], ansatz.sign);
        v = embed_gate(&u, i, j, ansatz.n_sites) * v;
    }
    v
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Uniform double in [-1, 1) from a splitmix64 stream.
pub fn unit_double(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
}

/// Lowest eigenvalue of a Hermitian matrix by block power iteration on the
/// spectrum-reversing shift c*I - H, with a Rayleigh-Ritz extraction and an
/// explicit residual stop. The block absorbs near-degenerate ground pairs
/// that would stall a single-vector iteration.
pub fn ground_energy_power_iteration(h: &CMat, tol: f64) -> f64 {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let shift = (0..n)
        .map(|i| h.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let b = CMat::identity(n, n) * c(shift, 0.0) - h;
    let block = 4.min(n);
    let mut seed = 0x5eed_cafe_f00du64;
    let mut q = CMat::from_fn(n, block, |_, _| {
        c(unit_double(&mut seed), unit_double(&mut seed))
    });
    q = nalgebra::linalg::QR::new(q).q();
    for _ in 0..20_000 {
        for _ in 0..10 {
            q = nalgebra::linalg::QR::new(&b * q).q();
        }
        let s = q.adjoint() * h * &q;
        let s = (&s + s.adjoint()) * c(0.5, 0.0);
        let eig = s.symmetric_eigen();
        let (k, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let y = &q * eig.eigenvectors.column(k);
        let residual = (h * &y - &y * c(theta, 0.0)).norm();
        if residual <= tol * theta.abs().max(1.0) {
            return theta;
        }
    }
    panic!("power iteration failed to reach the requested residual");
}

const FERMION_MAX_SPIN_ORBITALS: usize = 12;

fn parity_sign(z: u64, g: usize) -> f64 {
    if (z & ((1 << g) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn annihilate(z: u64, g: usize) -> Option<(u64, f64)> {
    if z & (1 << g) == 0 {
        None
    } else {
        Some((z ^ (1 << g), parity_sign(z, g)))
    }
}

pub fn create(z: u64, g: usize) -> Option<(u64, f64)> {
    if z & (1 << g) != 0 {
        None
    } else {
        Some((z ^ (1 << g), parity_sign(z, g)))
    }
}

fn apply_ladder_chain(z: u64, ann: &[usize], cre: &[usize]) -> Option<(u64, f64)> {
    let mut state = (z, 1.0);
    for &g in ann {
        let (w, s) = annihilate(state.0, g)?;
        state = (w, state.1 * s);
    }
    for &g in cre {
        let (w, s) = create(state.0, g)?;
        state = (w, state.1 * s);
    }
    Some(state)
}

/// Dense second-quantized Hamiltonian in the occupation basis, bit g of the
/// index being spin orbital g with the alpha block in the low n_orb bits:
///
///   H = e_core + sum_{s,pq} h_pq c+_ps c_qs
///     + 1/2 sum_{st,pqrs} (pq|rs) c+_ps c+_rt c_st c_qs
///
/// built from explicit bitstring ladder operators, no Pauli algebra and no
/// Slater-Condon rules involved.
pub fn fermionic_hamiltonian_matrix(m: &MolecularIntegrals<f64>) -> RMat {
    let n_orb = m.n_orb();
    let n_so = 2 * n_orb;
    assert!(n_so <= FERMION_MAX_SPIN_ORBITALS, "oracle limited to small registers");
    let dim = 1usize << n_so;
    let mut h = RMat::identity(dim, dim) * m.e_core();
    for z in 0..dim as u64 {
        for sigma in 0..2usize {
            for p in 0..n_orb {
                for q in 0..n_orb {
                    let hpq = m.h1(p, q);
                    if hpq == 0.0 {
                        continue;
                    }
                    let gq = q + sigma * n_orb;
                    let gp = p + sigma * n_orb;
                    if let Some((w, s)) = apply_ladder_chain(z, &[gq], &[gp]) {
                        h[(w as usize, z as usize)] += hpq * s;
                    }
                }
            }
        }
        for sigma in 0..2usize {
            for tau in 0..2usize {
                for p in 0..n_orb {
                    for q in 0..n_orb {
                        for r in 0..n_orb {
                            for s_orb in 0..n_orb {
                                let v = m.eri(p, q, r, s_orb);
                                if v == 0.0 {
                                    continue;
                                }
                                let gp = p + sigma * n_orb;
                                let gq = q + sigma * n_orb;
                                let gr = r + tau * n_orb;
                                let gs = s_orb + tau * n_orb;
                                // c+_p c+_r c_s c_q applied rightmost first
                                let chain = annihilate(z, gq)
                                    .and_then(|(w, s1)| {
                                        annihilate(w, gs).map(|(w2, s2)| (w2, s1 * s2))
                                    })
                                    .and_then(|(w, s1)| {
                                        create(w, gr).map(|(w2, s2)| (w2, s1 * s2))
                                    })
                                    .and_then(|(w, s1)| {
                                        create(w, gp).map(|(w2, s2)| (w2, s1 * s2))
                                    });
                                if let Some((w, sgn)) = chain {
                                    h[(w as usize, z as usize)] += 0.5 * v * sgn;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

pub fn real_to_complex(m: &RMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| c(m[(i, j)], 0.0))
}

/// Basis indices of the fixed (n_alpha, n_beta) particle sector.
pub fn sector_indices(n_orb: usize, n_alpha: usize, n_beta: usize) -> Vec<usize> {
    let dim = 1usize << (2 * n_orb);
    let alpha_mask = (1u64 << n_orb) - 1;
    (0..dim)
        .filter(|&z| {
            let z = z as u64;
            (z & alpha_mask).count_ones() as usize == n_alpha
                && (z >> n_orb).count_ones() as usize == n_beta
        })
        .collect()
}

/// FCI ground energy: exact diagonalization of the dense second-quantized
/// Hamiltonian restricted to one particle sector.
pub fn fci_ground_energy(m: &MolecularIntegrals<f64>, n_alpha: usize, n_beta: usize) -> f64 {
    let h = fermionic_hamiltonian_matrix(m);
    let idx = sector_indices(m.n_orb(), n_alpha, n_beta);
    let k = idx.len();
    let sub = RMat::from_fn(k, k, |i, j| h[(idx[i], idx[j])]);
    sub.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn spin_orbital(p: usize, s: Spin, n_orb: usize) -> usize {
    match s {
        Spin::Alpha => p,
        Spin::Beta => p + n_orb,
    }
}

/// Dense matrix of the excitation operator E = c+_{v0} c+_{v1} c_{o1} c_{o0}
/// of one product factor (singles drop the second channel).
pub fn excitation_matrix(f: &UccFactor, n_orb: usize) -> RMat {
    let n_so = 2 * n_orb;
    let dim = 1usize << n_so;
    let ann: Vec<usize> = f.occ.iter().map(|&(p, s)| spin_orbital(p, s, n_orb)).collect();
    let cre: Vec<usize> = f
        .virt
        .iter()
        .rev()
        .map(|&(p, s)| spin_orbital(p, s, n_orb))
        .collect();
    let mut e = RMat::zeros(dim, dim);
    for z in 0..dim as u64 {
        if let Some((w, s)) = apply_ladder_chain(z, &ann, &cre) {
            e[(w as usize, z as usize)] += s;
        }
    }
    e
}

/// Full-space product state exp(t_K K_K) ... exp(t_1 K_1) |ref> with
/// K = E - E^T, evaluated by dense exponentials.
pub fn dense_ucc_state(
    n_orb: usize,
    n_elec: usize,
    factors: &[UccFactor],
    params: &[f64],
) -> RVec {
    let dim = 1usize << (2 * n_orb);
    let reference = Determinant::closed_shell_reference(n_elec).unwrap();
    let mut v = RVec::zeros(dim);
    v[reference.basis_index(n_orb) as usize] = 1.0;
    for f in factors {
        let e = excitation_matrix(f, n_orb);
        let k = &e - e.transpose();
        v = expm_real(&(k * params[f.param_index])) * v;
    }
    v
}

/// Closed-shell single-determinant energy from the textbook formula.
pub fn rhf_energy(m: &MolecularIntegrals<f64>) -> f64 {
    let n_occ = m.n_elec() / 2;
    let mut e = m.e_core();
    for i in 0..n_occ {
        e += 2.0 * m.h1(i, i);
    }
    for i in 0..n_occ {
        for j in 0..n_occ {
            e += 2.0 * m.eri(i, i, j, j) - m.eri(i, j, j, i);
        }
    }
    e
}

/// Independent MP2: explicit orbital-energy and amplitude loops, returning
/// (eps, t2 keyed (i, j, a, b) over occ x occ x virt x virt, e_corr).
/// Degenerate denominators below `threshold` are skipped.
#[allow(clippy::type_complexity)]
pub fn mp2_explicit(
    m: &MolecularIntegrals<f64>,
    threshold: f64,
) -> (Vec<f64>, std::collections::BTreeMap<(usize, usize, usize, usize), f64>, f64) {
    let n_orb = m.n_orb();
    let n_occ = m.n_elec() / 2;
    let mut eps = vec![0.0; n_orb];
    for p in 0..n_orb {
        let mut e = m.h1(p, p);
        for i in 0..n_occ {
            e += 2.0 * m.eri(p, p, i, i) - m.eri(p, i, i, p);
        }
        eps[p] = e;
    }
    let mut t2 = std::collections::BTreeMap::new();
    let mut e_corr = 0.0;
    for i in 0..n_occ {
        for j in 0..n_occ {
            for a in n_occ..n_orb {
                for b in n_occ..n_orb {
                    let denom = eps[i] + eps[j] - eps[a] - eps[b];
                    if denom.abs() < threshold {
                        continue;
                    }
                    let t = m.eri(i, a, j, b) / denom;
                    t2.insert((i, j, a, b), t);
                    e_corr += t * (2.0 * m.eri(i, a, j, b) - m.eri(i, b, j, a));
                }
            }
        }
    }
    (eps, t2, e_corr)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Closure-backed energy model for driving the evaluator/line-search stack
/// on analytic costs. The attached Hamiltonian is an empty placeholder, so
/// only noise modes that never consult it (none/gaussian) are meaningful.
pub struct ClosureModel<F> {
    f: F,
    n: usize,
    h: PauliHamiltonian<f64>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> ClosureModel<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { f, n, h: PauliHamiltonian::new(1) }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> EnergyModel<f64> for ClosureModel<F> {
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

pub fn axis_directions(eigenvalues: &[f64]) -> ConjugateDirections<f64> {
    let n = eigenvalues.len();
    ConjugateDirections {
        directions: DMatrix::identity(n, n),
        kept_eigenvalues: eigenvalues.to_vec(),
        kept_indices: (0..n).collect(),
        dropped: Vec::new(),
    }
}
