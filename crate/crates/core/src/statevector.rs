//! Dense statevector simulator.
//!
//! Serves as the noiseless high-accuracy evaluator for spin problems and as
//! the reference implementation the tensor-network path is tested against.
//! Qubit `k` is bit `k` of the basis index (little-endian); two-qubit gates
//! are applied as strided in-place updates on the four amplitudes of each
//! `(b_i, b_j)` subspace, never as full `2^n x 2^n` matrices.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::circuit::{entangler_unitary, CircuitError, EntanglerAnsatz, Gate4, GeneratorSign};
use crate::pauli::{PauliError, PauliHamiltonian, PauliString};
use crate::scalar::{i_pow, Complex, Real};

/// Hard cap for strided simulation (amplitude storage).
pub const MAX_QUBITS: usize = 26;
/// Hard cap for the dense eigensolver path.
pub const MAX_DENSE_QUBITS: usize = 16;

#[derive(Debug, Error)]
pub enum StateVectorError {
    #[error("statevector simulation supports up to {MAX_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("dense diagonalization supports up to {MAX_DENSE_QUBITS} qubits, got {0}")]
    DenseTooLarge(usize),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    DuplicateQubit(usize),
    #[error("operator acts on {found} qubits, state has {expected}")]
    QubitCountMismatch { expected: usize, found: usize },
    #[error("amplitude vector has length {found}, expected {expected}")]
    BadAmplitudeCount { expected: usize, found: usize },
    #[error("expectation value has non-negligible imaginary part {0:e}")]
    ImaginaryResidual(f64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Complex amplitudes over the computational basis of `n_qubits` qubits.
#[derive(Clone, Debug)]
pub struct StateVector<R: Real> {
    n_qubits: usize,
    amps: Vec<Complex<R>>,
}

impl<R: Real> StateVector<R> {
    /// The |0...0> product state.
    pub fn zero_state(n_qubits: usize) -> Result<Self, StateVectorError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(StateVectorError::TooManyQubits(n_qubits));
        }
        let mut amps = vec![Complex::new(R::zero(), R::zero()); 1 << n_qubits];
        amps[0] = Complex::new(R::one(), R::zero());
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(
        n_qubits: usize,
        amps: Vec<Complex<R>>,
    ) -> Result<Self, StateVectorError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(StateVectorError::TooManyQubits(n_qubits));
        }
        if amps.len() != 1 << n_qubits {
            return Err(StateVectorError::BadAmplitudeCount {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amps
    }

    pub fn norm(&self) -> R {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(R::zero(), |acc, x| acc + x)
            .sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex<R> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(R::zero(), R::zero()), |acc, x| acc + x)
    }

    fn check_qubit(&self, q: usize) -> Result<(), StateVectorError> {
        if q >= self.n_qubits {
            return Err(StateVectorError::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Apply a two-qubit gate on qubits `(i, j)`, `i` the most significant
    /// index of the 4x4 basis. Strided update of amplitude quadruples.
    pub fn apply_gate(
        &mut self,
        i: usize,
        j: usize,
        u: &Gate4<R>,
    ) -> Result<(), StateVectorError> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(StateVectorError::DuplicateQubit(i));
        }
        let bi = 1usize << i;
        let bj = 1usize << j;
        let dim = self.amps.len();
        let mut z = 0usize;
        while z < dim {
            if z & (bi | bj) == 0 {
                let idx = [z, z | bj, z | bi, z | bi | bj];
                let old = [
                    self.amps[idx[0]],
                    self.amps[idx[1]],
                    self.amps[idx[2]],
                    self.amps[idx[3]],
                ];
                for r in 0..4 {
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for c in 0..4 {
                        acc += u[r][c] * old[c];
                    }
                    self.amps[idx[r]] = acc;
                }
            }
            z += 1;
        }
        Ok(())
    }

    /// Apply the hardware-efficient entangler `exp(-i theta G)` on `(i, j)`.
    pub fn apply_entangler(
        &mut self,
        i: usize,
        j: usize,
        theta: R,
        sign: GeneratorSign,
    ) -> Result<(), StateVectorError> {
        let u = entangler_unitary(theta, sign);
        self.apply_gate(i, j, &u)
    }

    /// Expectation value of a single Pauli string; the result must be real
    /// up to numerical noise and an imaginary residual above 1e-9 of the
    /// term magnitude is reported as an error.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<R, StateVectorError> {
        if p.n_qubits() != self.n_qubits {
            return Err(StateVectorError::QubitCountMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        let masks = p.masks()?;
        let mut acc = Complex::new(R::zero(), R::zero());
        for (z, amp) in self.amps.iter().enumerate() {
            let phase: Complex<R> = i_pow(masks.phase_exponent(z as u64));
            let target = self.amps[masks.flipped(z as u64) as usize];
            acc += target.conj() * phase * *amp;
        }
        let scale = R::one().max(acc.re.abs());
        if acc.im.abs() > R::of(1e-9) * scale {
            return Err(StateVectorError::ImaginaryResidual(acc.im.as_f64()));
        }
        Ok(acc.re)
    }

    /// Energy `sum_i a_i <P_i>`.
    pub fn expectation(&self, h: &PauliHamiltonian<R>) -> Result<R, StateVectorError> {
        let mut e = R::zero();
        for term in h.terms() {
            e += term.coeff * self.pauli_expectation(&term.string)?;
        }
        Ok(e)
    }

    /// Raw little-endian dump: per amplitude, real then imaginary part as
    /// f64. Debugging interface shared with the tensor-network simulator.
    pub fn dump_amplitudes(&self, w: &mut impl Write) -> std::io::Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.as_f64().to_le_bytes())?;
            w.write_all(&a.im.as_f64().to_le_bytes())?;
        }
        Ok(())
    }
}

/// Build the ansatz state from |0...0>.
pub fn prepare_ansatz_state<R: Real>(
    ansatz: &EntanglerAnsatz,
    params: &[R],
) -> Result<StateVector<R>, StateVectorError> {
    ansatz.check_params(params)?;
    let mut state = StateVector::zero_state(ansatz.n_sites)?;
    for (i, j, layer) in ansatz.gate_sequence() {
        state.apply_entangler(i, j, params[layer], ansatz.sign)?;
    }
    Ok(state)
}

/// Ansatz energy at the given angles.
pub fn ansatz_energy<R: Real>(
    ansatz: &EntanglerAnsatz,
    params: &[R],
    h: &PauliHamiltonian<R>,
) -> Result<R, StateVectorError> {
    prepare_ansatz_state(ansatz, params)?.expectation(h)
}

/// Lowest eigenvalue of the dense Hamiltonian matrix.
///
/// The matrix is assembled column by column from the basis action of each
/// term, then diagonalized; memory is the limiting factor, hence the qubit
/// cap.
pub fn exact_ground_energy<R: Real>(h: &PauliHamiltonian<R>) -> Result<R, StateVectorError> {
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(StateVectorError::DenseTooLarge(n));
    }
    let dim = 1usize << n;
    let zero = Complex::new(R::zero(), R::zero());
    let mut mat = DMatrix::from_element(dim, dim, zero);
    for term in h.terms() {
        let masks = term.string.masks()?;
        let coeff = Complex::new(term.coeff, R::zero());
        for z in 0..dim {
            let phase: Complex<R> = i_pow(masks.phase_exponent(z as u64));
            let target = masks.flipped(z as u64) as usize;
            mat[(target, z)] += coeff * phase;
        }
    }
    let eig = SymmetricEigen::new(mat);
    let min = eig
        .eigenvalues
        .iter()
        .fold(None::<R>, |acc, &v| Some(acc.map_or(v, |m| m.min(v))))
        .expect("non-empty spectrum");
    Ok(min)
}
