//! Hardware-efficient entangler circuit shared by the statevector and
//! tensor-network simulators.
//!
//! The two-site gate is `U_{i,j}(theta) = exp(-i theta G)` with generator
//! `G = sigma^y_i sigma^z_j + sigma^z_i sigma^y_j` (plus form) or
//! `G = sigma^y_i sigma^z_j - sigma^z_i sigma^y_j` (minus form). Because the
//! two generator halves commute and square to the identity, the exponential
//! has the closed form
//! `U = cos^2(t) I - i sin(t)cos(t) G -+ sin^2(t) XX`
//! (minus sign for the plus form, plus sign for the minus form).
//!
//! The full ansatz is four layers on a periodic ring of even length: an
//! even-bond layer, an odd-bond layer (including the wrap bond n-1,0), and
//! the same two layers again, with one shared angle per layer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Complex, Real};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("entangler ring needs an even site count >= 4, got {0}")]
    BadSiteCount(usize),
    #[error("ansatz takes {expected} parameters, got {found}")]
    BadParameterCount { expected: usize, found: usize },
    #[error("unknown generator sign '{0}', expected 'plus' or 'minus'")]
    BadSign(String),
}

/// Relative sign between the two generator halves.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorSign {
    Plus,
    #[default]
    Minus,
}

impl fmt::Display for GeneratorSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSign::Plus => write!(f, "plus"),
            GeneratorSign::Minus => write!(f, "minus"),
        }
    }
}

impl FromStr for GeneratorSign {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, CircuitError> {
        match s {
            "plus" => Ok(GeneratorSign::Plus),
            "minus" => Ok(GeneratorSign::Minus),
            other => Err(CircuitError::BadSign(other.into())),
        }
    }
}

/// Dense 4x4 two-qubit gate in the basis |b_i b_j> = (00, 01, 10, 11),
/// first index most significant.
pub type Gate4<R> = [[Complex<R>; 4]; 4];

/// Generator matrix `G` for the chosen sign, basis as in [`Gate4`].
pub fn entangler_generator<R: Real>(sign: GeneratorSign) -> Gate4<R> {
    let o = || Complex::new(R::zero(), R::zero());
    let i = |s: f64| Complex::new(R::zero(), R::of(s));
    // sigma^y x sigma^z and sigma^z x sigma^y in the computational basis.
    let yz: Gate4<R> = [
        [o(), o(), i(-1.0), o()],
        [o(), o(), o(), i(1.0)],
        [i(1.0), o(), o(), o()],
        [o(), i(-1.0), o(), o()],
    ];
    let zy: Gate4<R> = [
        [o(), i(-1.0), o(), o()],
        [i(1.0), o(), o(), o()],
        [o(), o(), o(), i(1.0)],
        [o(), o(), i(-1.0), o()],
    ];
    let s = match sign {
        GeneratorSign::Plus => R::one(),
        GeneratorSign::Minus => -R::one(),
    };
    let mut g = [[o(); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            g[r][c] = yz[r][c] + zy[r][c] * Complex::new(s, R::zero());
        }
    }
    g
}

/// Closed-form `exp(-i theta G)` for the entangler generator.
pub fn entangler_unitary<R: Real>(theta: R, sign: GeneratorSign) -> Gate4<R> {
    let g = entangler_generator::<R>(sign);
    let (s, c) = (theta.sin(), theta.cos());
    let cc = c * c;
    let sc = s * c;
    let ss = s * s;
    // XX carries sign +1 for the minus-form generator and -1 for the plus
    // form; see module docs.
    let xx_sign = match sign {
        GeneratorSign::Plus => -ss,
        GeneratorSign::Minus => ss,
    };
    let zero = Complex::new(R::zero(), R::zero());
    let mut u = [[zero; 4]; 4];
    let xx = [(0usize, 3usize), (1, 2), (2, 1), (3, 0)];
    for r in 0..4 {
        u[r][r] = Complex::new(cc, R::zero());
        for c in 0..4 {
            u[r][c] += g[r][c] * Complex::new(R::zero(), -sc);
        }
    }
    for (r, c) in xx {
        u[r][c] += Complex::new(xx_sign, R::zero());
    }
    u
}

/// Standard SWAP gate.
pub fn swap_gate<R: Real>() -> Gate4<R> {
    let o = Complex::new(R::zero(), R::zero());
    let l = Complex::new(R::one(), R::zero());
    [
        [l, o, o, o],
        [o, o, l, o],
        [o, l, o, o],
        [o, o, o, l],
    ]
}

/// Gate with the roles of the two qubits exchanged:
/// `U'[(b1 b2), (c1 c2)] = U[(b2 b1), (c2 c1)]`.
pub fn transpose_qubit_roles<R: Real>(u: &Gate4<R>) -> Gate4<R> {
    let perm = [0usize, 2, 1, 3];
    let mut out = *u;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = u[perm[r]][perm[c]];
        }
    }
    out
}

/// Four-layer entangler ansatz on a periodic ring of even length.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EntanglerAnsatz {
    pub n_sites: usize,
    pub sign: GeneratorSign,
}

/// Number of variational parameters (one shared angle per layer).
pub const ANSATZ_LAYERS: usize = 4;

impl EntanglerAnsatz {
    pub fn new(n_sites: usize, sign: GeneratorSign) -> Result<Self, CircuitError> {
        if n_sites < 4 || n_sites % 2 != 0 {
            return Err(CircuitError::BadSiteCount(n_sites));
        }
        Ok(Self { n_sites, sign })
    }

    pub fn n_params(&self) -> usize {
        ANSATZ_LAYERS
    }

    /// Bond list of one layer. Even layers touch (0,1), (2,3), ...; odd
    /// layers touch (1,2), (3,4), ..., (n-1, 0) with the periodic wrap last.
    pub fn layer_bonds(&self, layer: usize) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        if layer % 2 == 0 {
            (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect()
        } else {
            (0..n / 2).map(|i| (2 * i + 1, (2 * i + 2) % n)).collect()
        }
    }

    /// Gate sequence of the whole circuit as (site_i, site_j, layer_index),
    /// in application order.
    pub fn gate_sequence(&self) -> Vec<(usize, usize, usize)> {
        (0..ANSATZ_LAYERS)
            .flat_map(|layer| {
                self.layer_bonds(layer)
                    .into_iter()
                    .map(move |(i, j)| (i, j, layer))
            })
            .collect()
    }

    pub fn check_params<R: Real>(&self, params: &[R]) -> Result<(), CircuitError> {
        if params.len() != ANSATZ_LAYERS {
            return Err(CircuitError::BadParameterCount {
                expected: ANSATZ_LAYERS,
                found: params.len(),
            });
        }
        Ok(())
    }
}
