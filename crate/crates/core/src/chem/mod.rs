//! Molecular integrals: FCIDUMP io, Fock diagonal, and the MP2 doubles
//! guess used to order and seed the UCCSD factors.
//!
//! Two-body integrals are chemist-notation (pq|rs), stored once per 8-fold
//! symmetry orbit and expanded on access. Only closed-shell restricted
//! references are supported; the occupied space is the lowest n_elec/2
//! spatial orbitals.

mod fcidump;
mod qubits;

pub use fcidump::{parse_fcidump, write_fcidump};
pub use qubits::jordan_wigner;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum ChemError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("orbital index {index} out of range for {n_orb} orbitals")]
    OrbitalOutOfRange { index: usize, n_orb: usize },
    #[error("closed-shell restricted reference required (n_elec={n_elec}, ms2={ms2})")]
    ClosedShellRequired { n_elec: usize, ms2: i32 },
    #[error("{n_orb} spatial orbitals exceed the {max} supported by the qubit mapping")]
    TooManyOrbitals { n_orb: usize, max: usize },
    #[error("qubit hamiltonian has imaginary residual {0:e}")]
    ImaginaryResidual(f64),
}

/// One- and two-body integrals of a molecular Hamiltonian in a fixed
/// orthonormal orbital basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MolecularIntegrals<R: Real> {
    n_orb: usize,
    n_elec: usize,
    ms2: i32,
    orbsym: Vec<u32>,
    e_core: R,
    h1: Vec<R>,
    eri: Vec<R>,
}

fn pair_index(p: usize, q: usize) -> usize {
    let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
    hi * (hi + 1) / 2 + lo
}

impl<R: Real> MolecularIntegrals<R> {
    pub fn new(n_orb: usize, n_elec: usize, ms2: i32, orbsym: Vec<u32>) -> Self {
        assert!(n_orb >= 1 && n_orb <= 64, "orbital count out of range");
        assert!(n_elec <= 2 * n_orb, "more electrons than spin orbitals");
        let orbsym = if orbsym.is_empty() { vec![1; n_orb] } else { orbsym };
        assert_eq!(orbsym.len(), n_orb, "one irrep label per orbital");
        let n_pair = n_orb * (n_orb + 1) / 2;
        Self {
            n_orb,
            n_elec,
            ms2,
            orbsym,
            e_core: R::zero(),
            h1: vec![R::zero(); n_orb * n_orb],
            eri: vec![R::zero(); n_pair * (n_pair + 1) / 2],
        }
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn n_elec(&self) -> usize {
        self.n_elec
    }

    pub fn ms2(&self) -> i32 {
        self.ms2
    }

    pub fn orbsym(&self) -> &[u32] {
        &self.orbsym
    }

    pub fn e_core(&self) -> R {
        self.e_core
    }

    pub fn set_e_core(&mut self, value: R) {
        self.e_core = value;
    }

    fn check_orb(&self, p: usize) -> Result<(), ChemError> {
        if p >= self.n_orb {
            Err(ChemError::OrbitalOutOfRange { index: p, n_orb: self.n_orb })
        } else {
            Ok(())
        }
    }

    pub fn h1(&self, p: usize, q: usize) -> R {
        self.h1[p * self.n_orb + q]
    }

    /// Store h_pq; the symmetric partner is written too.
    pub fn set_h1(&mut self, p: usize, q: usize, value: R) -> Result<(), ChemError> {
        self.check_orb(p)?;
        self.check_orb(q)?;
        self.h1[p * self.n_orb + q] = value;
        self.h1[q * self.n_orb + p] = value;
        Ok(())
    }

    /// Chemist-notation (pq|rs), expanded from canonical storage.
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> R {
        let pq = pair_index(p, q);
        let rs = pair_index(r, s);
        self.eri[pair_index(pq, rs)]
    }

    pub fn set_eri(
        &mut self,
        p: usize,
        q: usize,
        r: usize,
        s: usize,
        value: R,
    ) -> Result<(), ChemError> {
        for &x in &[p, q, r, s] {
            self.check_orb(x)?;
        }
        let pq = pair_index(p, q);
        let rs = pair_index(r, s);
        self.eri[pair_index(pq, rs)] = value;
        Ok(())
    }

    fn require_closed_shell(&self) -> Result<usize, ChemError> {
        if self.n_elec % 2 != 0 || self.ms2 != 0 {
            return Err(ChemError::ClosedShellRequired {
                n_elec: self.n_elec,
                ms2: self.ms2,
            });
        }
        Ok(self.n_elec / 2)
    }

    /// Diagonal Fock matrix elements over the closed-shell reference:
    /// eps_p = h_pp + sum_i 2(pp|ii) - (pi|ip).
    pub fn fock_diagonal(&self) -> Result<Vec<R>, ChemError> {
        let n_occ = self.require_closed_shell()?;
        let two = R::of(2.0);
        Ok((0..self.n_orb)
            .map(|p| {
                let mut eps = self.h1(p, p);
                for i in 0..n_occ {
                    eps += two * self.eri(p, p, i, i) - self.eri(p, i, i, p);
                }
                eps
            })
            .collect())
    }

    /// Restricted Hartree-Fock energy of the reference determinant.
    pub fn reference_energy(&self) -> Result<R, ChemError> {
        let n_occ = self.require_closed_shell()?;
        let two = R::of(2.0);
        let mut e = self.e_core;
        for i in 0..n_occ {
            e += two * self.h1(i, i);
            for j in 0..n_occ {
                e += two * self.eri(i, i, j, j) - self.eri(i, j, j, i);
            }
        }
        Ok(e)
    }
}

/// MP2 doubles amplitudes keyed by (i, j, a, b) with i, j occupied and
/// a, b virtual, all as absolute orbital indices. Singles start at zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Mp2Guess<R: Real> {
    pub n_orb: usize,
    pub n_occ: usize,
    pub fock_diag: Vec<R>,
    pub t2: BTreeMap<(usize, usize, usize, usize), R>,
    /// Keys whose denominator fell below the degeneracy threshold and were
    /// skipped rather than regularized.
    pub skipped: Vec<(usize, usize, usize, usize)>,
}

/// Denominators smaller than this are treated as degenerate and skipped.
pub const MP2_DEGENERACY_THRESHOLD: f64 = 1e-8;

/// First-order doubles guess t2(i,j,a,b) = (ia|jb) / (e_i + e_j - e_a - e_b).
pub fn mp2_amplitudes<R: Real>(m: &MolecularIntegrals<R>) -> Result<Mp2Guess<R>, ChemError> {
    let n_occ = m.require_closed_shell()?;
    let fock = m.fock_diagonal()?;
    let mut t2 = BTreeMap::new();
    let mut skipped = Vec::new();
    let thresh = R::of(MP2_DEGENERACY_THRESHOLD);
    for i in 0..n_occ {
        for j in 0..n_occ {
            for a in n_occ..m.n_orb {
                for b in n_occ..m.n_orb {
                    let denom = fock[i] + fock[j] - fock[a] - fock[b];
                    if denom.abs() < thresh {
                        skipped.push((i, j, a, b));
                        continue;
                    }
                    let amp = m.eri(i, a, j, b) / denom;
                    if amp != R::zero() {
                        t2.insert((i, j, a, b), amp);
                    }
                }
            }
        }
    }
    Ok(Mp2Guess { n_orb: m.n_orb, n_occ, fock_diag: fock, t2, skipped })
}

impl<R: Real> Mp2Guess<R> {
    pub fn t2(&self, i: usize, j: usize, a: usize, b: usize) -> R {
        self.t2.get(&(i, j, a, b)).copied().unwrap_or_else(R::zero)
    }
}

/// MP2 correlation energy sum_ijab t2(i,j,a,b) [2(ia|jb) - (ib|ja)].
pub fn mp2_correlation_energy<R: Real>(
    guess: &Mp2Guess<R>,
    m: &MolecularIntegrals<R>,
) -> R {
    let two = R::of(2.0);
    let mut e = R::zero();
    for (&(i, j, a, b), &t) in &guess.t2 {
        e += t * (two * m.eri(i, a, j, b) - m.eri(i, b, j, a));
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> MolecularIntegrals<f64> {
        // Rough H2/STO-3G-like values in the MO basis.
        let mut m = MolecularIntegrals::new(2, 2, 0, vec![1, 5]);
        m.set_e_core(0.713_776);
        m.set_h1(0, 0, -1.252_477).unwrap();
        m.set_h1(1, 1, -0.475_934).unwrap();
        m.set_eri(0, 0, 0, 0, 0.674_493).unwrap();
        m.set_eri(0, 0, 1, 1, 0.663_472).unwrap();
        m.set_eri(1, 1, 1, 1, 0.697_397).unwrap();
        m.set_eri(0, 1, 0, 1, 0.181_287).unwrap();
        m
    }

    #[test]
    fn eri_eightfold_symmetry() {
        let m = toy();
        let v = m.eri(0, 1, 0, 1);
        assert!(v != 0.0);
        for &(p, q, r, s) in &[
            (0, 1, 0, 1),
            (1, 0, 0, 1),
            (0, 1, 1, 0),
            (1, 0, 1, 0),
            (0, 1, 0, 1),
            (0, 1, 1, 0),
            (1, 0, 0, 1),
            (1, 0, 1, 0),
        ] {
            assert_eq!(m.eri(p, q, r, s), v);
        }
        // (pq|rs) = (rs|pq)
        assert_eq!(m.eri(0, 0, 1, 1), m.eri(1, 1, 0, 0));
    }

    #[test]
    fn fock_diagonal_closed_shell() {
        let m = toy();
        let eps = m.fock_diagonal().unwrap();
        let e0 = m.h1(0, 0) + 2.0 * m.eri(0, 0, 0, 0) - m.eri(0, 0, 0, 0);
        let e1 = m.h1(1, 1) + 2.0 * m.eri(1, 1, 0, 0) - m.eri(1, 0, 0, 1);
        assert!((eps[0] - e0).abs() < 1e-14);
        assert!((eps[1] - e1).abs() < 1e-14);
    }

    #[test]
    fn fock_rejects_open_shell() {
        let m = MolecularIntegrals::<f64>::new(2, 1, 1, vec![]);
        assert!(matches!(
            m.fock_diagonal(),
            Err(ChemError::ClosedShellRequired { .. })
        ));
    }

    #[test]
    fn mp2_single_amplitude_formula() {
        let m = toy();
        let guess = mp2_amplitudes(&m).unwrap();
        assert_eq!(guess.t2.len(), 1);
        let eps = m.fock_diagonal().unwrap();
        let expect = m.eri(0, 1, 0, 1) / (2.0 * eps[0] - 2.0 * eps[1]);
        assert!((guess.t2(0, 0, 1, 1) - expect).abs() < 1e-14);
        assert!(guess.skipped.is_empty());
        let corr = mp2_correlation_energy(&guess, &m);
        assert!(corr < 0.0);
    }

    #[test]
    fn mp2_zero_eri_gives_empty_guess() {
        let mut m = MolecularIntegrals::<f64>::new(3, 2, 0, vec![]);
        m.set_h1(0, 0, -1.0).unwrap();
        m.set_h1(1, 1, -0.3).unwrap();
        m.set_h1(2, 2, 0.2).unwrap();
        let guess = mp2_amplitudes(&m).unwrap();
        assert!(guess.t2.is_empty());
        assert_eq!(mp2_correlation_energy(&guess, &m), 0.0);
    }

    #[test]
    fn degenerate_denominators_are_reported() {
        let mut m = MolecularIntegrals::<f64>::new(2, 2, 0, vec![]);
        // The exchange term feeds (01|01) back into eps_1, so offset the
        // diagonal by exactly that much; dyadic values keep the denominator
        // an exact zero in floating point.
        m.set_h1(0, 0, -1.0).unwrap();
        m.set_h1(1, 1, -0.875).unwrap();
        m.set_eri(0, 1, 0, 1, 0.125).unwrap();
        let guess = mp2_amplitudes(&m).unwrap();
        assert!(guess.t2.is_empty());
        assert_eq!(guess.skipped, vec![(0, 0, 1, 1)]);
    }

    #[test]
    fn reference_energy_formula() {
        let m = toy();
        let e = m.reference_energy().unwrap();
        let expect = m.e_core() + 2.0 * m.h1(0, 0) + 2.0 * m.eri(0, 0, 0, 0)
            - m.eri(0, 0, 0, 0);
        assert!((e - expect).abs() < 1e-14);
    }
}
