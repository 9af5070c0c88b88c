//! Measurement grouping and shot-count estimation for Pauli-sum Hamiltonians.
//!
//! Grouping uses sorted insertion under the full commutation test: terms are
//! visited in descending coefficient magnitude and each joins the first
//! existing family it commutes with entirely. The shot-count ratio `r_hat`
//! quantifies how much simultaneous measurement of a family reduces the
//! total shot budget relative to measuring every term separately.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::PauliHamiltonian;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum GroupingError {
    #[error("coefficient and variance sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("per-term variance must be nonnegative, got {0}")]
    NegativeVariance(f64),
    #[error("target accuracy epsilon must be positive, got {0}")]
    BadEpsilon(f64),
}

/// Partition of a Hamiltonian's non-identity terms into mutually commuting
/// families. Group entries are indices into the source term list; identity
/// terms are excluded.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MeasurementGrouping<R: Real> {
    groups: Vec<Vec<usize>>,
    r_hat: R,
}

impl<R: Real> MeasurementGrouping<R> {
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Shot-reduction factor estimated at grouping time.
    pub fn r_hat(&self) -> R {
        self.r_hat
    }
}

/// Sorted-insertion grouping: non-identity terms ordered by descending
/// `|coeff|` (ties broken lexicographically on the axes string) are inserted
/// into the first family whose members all commute with the candidate.
pub fn sorted_insertion<R: Real>(h: &PauliHamiltonian<R>) -> MeasurementGrouping<R> {
    let mut order = h.non_identity_indices();
    order.sort_by(|&a, &b| {
        let ca = h.terms()[a].coeff.abs();
        let cb = h.terms()[b].coeff.abs();
        cb.partial_cmp(&ca)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| h.terms()[a].string.cmp(&h.terms()[b].string))
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'insert: for idx in order {
        let cand = &h.terms()[idx].string;
        for group in groups.iter_mut() {
            if group.iter().all(|&m| cand.commutes_with(&h.terms()[m].string)) {
                group.push(idx);
                continue 'insert;
            }
        }
        groups.push(vec![idx]);
    }
    let mut grouping = MeasurementGrouping { groups, r_hat: R::one() };
    grouping.r_hat = r_hat(&grouping, h);
    grouping
}

/// Shot-reduction factor of a grouping:
/// `r_hat = [sum_k sum_l |a_kl| / sum_k sqrt(sum_l a_kl^2)]^2`.
///
/// Always >= 1; equals 1 exactly when every group is a singleton.
pub fn r_hat<R: Real>(grouping: &MeasurementGrouping<R>, h: &PauliHamiltonian<R>) -> R {
    let mut num = R::zero();
    let mut den = R::zero();
    for group in &grouping.groups {
        let mut abs_sum = R::zero();
        let mut sq_sum = R::zero();
        for &idx in group {
            let a = h.terms()[idx].coeff;
            abs_sum += a.abs();
            sq_sum += a * a;
        }
        num += abs_sum;
        // Singletons contribute |a| exactly so that r_hat == 1 is exact.
        den += if group.len() == 1 { abs_sum } else { sq_sum.sqrt() };
    }
    if den == R::zero() {
        return R::one();
    }
    let ratio = num / den;
    ratio * ratio
}

/// Shot count for measuring every term separately to accuracy `epsilon`:
/// `(sum_i |a_i| sqrt(var_i))^2 / epsilon^2`.
///
/// `variances` are per-term Pauli variances in the target state, aligned
/// with `coeffs`; the identity term must be excluded by the caller.
pub fn shots_ungrouped<R: Real>(
    coeffs: &[R],
    variances: &[R],
    epsilon: R,
) -> Result<R, GroupingError> {
    if coeffs.len() != variances.len() {
        return Err(GroupingError::LengthMismatch(coeffs.len(), variances.len()));
    }
    if epsilon <= R::zero() {
        return Err(GroupingError::BadEpsilon(epsilon.as_f64()));
    }
    let mut s = R::zero();
    for (&a, &v) in coeffs.iter().zip(variances) {
        if v < R::zero() {
            return Err(GroupingError::NegativeVariance(v.as_f64()));
        }
        s += a.abs() * v.sqrt();
    }
    Ok(s * s / (epsilon * epsilon))
}
