//! Pauli strings and weighted Pauli-sum Hamiltonians.
//!
//! A [`PauliString`] stores one axis per qubit. Hamiltonians are plain term
//! lists; nothing here assumes a particular simulator backend, so the same
//! types serve the statevector, tensor-network, and sparse-wavefunction
//! paths as well as the measurement-grouping analysis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum PauliError {
    #[error("pauli string must have at least one qubit")]
    EmptyString,
    #[error("axis character '{0}' is not one of I, X, Y, Z")]
    BadAxisChar(char),
    #[error("term acts on {found} qubits but the hamiltonian is on {expected}")]
    QubitCountMismatch { expected: usize, found: usize },
    #[error("hamiltonian text, line {line}: {msg}")]
    ParseText { line: usize, msg: String },
    #[error("basis masks need n_qubits <= 64, got {0}")]
    TooManyQubits(usize),
    #[error("ising chain needs at least 3 sites, got {0}")]
    ChainTooShort(usize),
}

/// Single-qubit Pauli axis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn as_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self, PauliError> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Axis::I),
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            other => Err(PauliError::BadAxisChar(other)),
        }
    }

    /// True when the two single-qubit operators anticommute.
    #[inline]
    pub fn anticommutes(self, other: Axis) -> bool {
        self != Axis::I && other != Axis::I && self != other
    }
}

/// Fixed-length string of Pauli axes, one per qubit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct PauliString {
    axes: Vec<Axis>,
}

/// Precomputed occupation-basis action of a string (qubits <= 64).
///
/// `P |z> = i^(n_y + 2*popcount(z & zy_mask)) |z ^ x_mask>`.
#[derive(Clone, Copy, Debug)]
pub struct PauliMasks {
    pub x_mask: u64,
    pub zy_mask: u64,
    pub n_y: u8,
}

impl PauliMasks {
    #[inline]
    pub fn flipped(&self, basis: u64) -> u64 {
        basis ^ self.x_mask
    }

    /// Exponent of `i` in the phase picked up on basis state `basis`, mod 4.
    #[inline]
    pub fn phase_exponent(&self, basis: u64) -> u8 {
        (self.n_y as u32).wrapping_add(2 * (basis & self.zy_mask).count_ones()) as u8 & 3
    }
}

impl PauliString {
    pub fn new(axes: Vec<Axis>) -> Result<Self, PauliError> {
        if axes.is_empty() {
            return Err(PauliError::EmptyString);
        }
        Ok(Self { axes })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { axes: vec![Axis::I; n_qubits] }
    }

    /// Identity string with the listed axes placed on specific qubits.
    pub fn from_ops(n_qubits: usize, ops: &[(usize, Axis)]) -> Self {
        let mut axes = vec![Axis::I; n_qubits];
        for &(q, a) in ops {
            axes[q] = a;
        }
        Self { axes }
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    #[inline]
    pub fn axis(&self, qubit: usize) -> Axis {
        self.axes[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&a| a == Axis::I)
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.axes.iter().filter(|&&a| a != Axis::I).count()
    }

    /// Full commutation test: strings commute iff the number of positions
    /// where both act with different non-identity axes is even.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(
            self.n_qubits(),
            other.n_qubits(),
            "commutation test needs equal qubit counts"
        );
        let anti = self
            .axes
            .iter()
            .zip(&other.axes)
            .filter(|(&a, &b)| a.anticommutes(b))
            .count();
        anti % 2 == 0
    }

    /// Occupation-basis masks; only available up to 64 qubits.
    pub fn masks(&self) -> Result<PauliMasks, PauliError> {
        let n = self.n_qubits();
        if n > 64 {
            return Err(PauliError::TooManyQubits(n));
        }
        let mut x_mask = 0u64;
        let mut zy_mask = 0u64;
        let mut n_y = 0u32;
        for (k, &a) in self.axes.iter().enumerate() {
            match a {
                Axis::I => {}
                Axis::X => x_mask |= 1 << k,
                Axis::Y => {
                    x_mask |= 1 << k;
                    zy_mask |= 1 << k;
                    n_y += 1;
                }
                Axis::Z => zy_mask |= 1 << k,
            }
        }
        Ok(PauliMasks { x_mask, zy_mask, n_y: (n_y & 3) as u8 })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, PauliError> {
        let axes = s
            .chars()
            .map(Axis::from_char)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(axes)
    }
}

/// One weighted term of a Pauli-sum Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PauliTerm<R: Real> {
    pub coeff: R,
    pub string: PauliString,
}

/// Weighted sum of Pauli strings on a fixed qubit count.
///
/// Terms keep their construction order; duplicate strings are allowed and
/// are treated as separate summands.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PauliHamiltonian<R: Real> {
    n_qubits: usize,
    terms: Vec<PauliTerm<R>>,
}

impl<R: Real> PauliHamiltonian<R> {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = PauliTerm<R>>,
    ) -> Result<Self, PauliError> {
        let mut h = Self::new(n_qubits);
        for t in terms {
            h.push(t.coeff, t.string)?;
        }
        Ok(h)
    }

    pub fn push(&mut self, coeff: R, string: PauliString) -> Result<(), PauliError> {
        if string.n_qubits() != self.n_qubits {
            return Err(PauliError::QubitCountMismatch {
                expected: self.n_qubits,
                found: string.n_qubits(),
            });
        }
        self.terms.push(PauliTerm { coeff, string });
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[PauliTerm<R>] {
        &self.terms
    }

    /// Sum of the coefficients of identity terms (the constant part).
    pub fn identity_coefficient(&self) -> R {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coeff)
            .sum()
    }

    /// Indices of the non-identity terms, in term order.
    pub fn non_identity_indices(&self) -> Vec<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.string.is_identity())
            .map(|(i, _)| i)
            .collect()
    }

    /// One `coefficient<TAB>axes` line per term; `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} qubits, {} terms\n", self.n_qubits, self.terms.len()));
        for t in &self.terms {
            out.push_str(&format!("{}\t{}\n", t.coeff.as_f64(), t.string));
        }
        out
    }

    /// Inverse of [`to_text`]; tolerant of arbitrary whitespace between the
    /// two fields. Reports 1-based line numbers on failure.
    pub fn from_text(text: &str) -> Result<Self, PauliError> {
        let mut terms: Vec<PauliTerm<R>> = Vec::new();
        let mut n_qubits = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let coeff_s = fields.next().ok_or_else(|| PauliError::ParseText {
                line,
                msg: "missing coefficient".into(),
            })?;
            let axes_s = fields.next().ok_or_else(|| PauliError::ParseText {
                line,
                msg: "missing axes field".into(),
            })?;
            if fields.next().is_some() {
                return Err(PauliError::ParseText { line, msg: "trailing fields".into() });
            }
            let coeff: f64 = coeff_s.parse().map_err(|e| PauliError::ParseText {
                line,
                msg: format!("bad coefficient '{coeff_s}': {e}"),
            })?;
            let string: PauliString = axes_s.parse().map_err(|e| PauliError::ParseText {
                line,
                msg: format!("bad axes '{axes_s}': {e}"),
            })?;
            match n_qubits {
                None => n_qubits = Some(string.n_qubits()),
                Some(n) if n != string.n_qubits() => {
                    return Err(PauliError::ParseText {
                        line,
                        msg: format!("axes length {} != {}", string.n_qubits(), n),
                    })
                }
                _ => {}
            }
            terms.push(PauliTerm { coeff: R::of(coeff), string });
        }
        let n = n_qubits.ok_or(PauliError::ParseText { line: 0, msg: "no terms".into() })?;
        Self::from_terms(n, terms)
    }
}

/// Transverse-field Ising chain with first- and second-neighbor ZZ couplings
/// on a periodic ring:
/// `H = j1 * sum Z_i Z_{i+1} + j2 * sum Z_i Z_{i+2} + ht * sum X_i`.
///
/// Emits exactly `3 * n_sites` terms in coupling order. For rings shorter
/// than 5 sites some ZZ strings coincide; they are kept as separate terms.
pub fn build_ising_hamiltonian<R: Real>(
    n_sites: usize,
    j1: R,
    j2: R,
    ht: R,
) -> Result<PauliHamiltonian<R>, PauliError> {
    if n_sites < 3 {
        return Err(PauliError::ChainTooShort(n_sites));
    }
    let mut h = PauliHamiltonian::new(n_sites);
    for i in 0..n_sites {
        let j = (i + 1) % n_sites;
        h.push(j1, PauliString::from_ops(n_sites, &[(i, Axis::Z), (j, Axis::Z)]))?;
    }
    for i in 0..n_sites {
        let j = (i + 2) % n_sites;
        h.push(j2, PauliString::from_ops(n_sites, &[(i, Axis::Z), (j, Axis::Z)]))?;
    }
    for i in 0..n_sites {
        h.push(ht, PauliString::from_ops(n_sites, &[(i, Axis::X)]))?;
    }
    Ok(h)
}
