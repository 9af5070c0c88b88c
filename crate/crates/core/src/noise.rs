//! Noisy energy evaluators with call accounting.
//!
//! Every evaluation draws its randomness from a counter-based generator
//! keyed by (seed, call index), so a batch gives bit-identical results no
//! matter how many threads execute it or in which order.
//!
//! Shot noise uses a central-limit model: per measurement group the exact
//! mean and variance are computed from the simulator state and a Gaussian
//! estimate is drawn with the group's shot allocation. This keeps the
//! variance budget of a real shot-sampled estimator without simulating
//! basis-rotated counts.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::EntanglerAnsatz;
use crate::grouping::{r_hat, shots_ungrouped, sorted_insertion, MeasurementGrouping};
use crate::mps;
use crate::pauli::PauliHamiltonian;
use crate::scalar::{i_pow, Complex, Real};
use crate::statevector;
use crate::sws::{self, SparseWavefunction, UccAnsatz};
use crate::chem::MolecularIntegrals;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("noise sigma must be >= 0, got {0}")]
    BadSigma(f64),
    #[error("shot count must be >= 1")]
    BadShotCount,
    #[error("depolarizing probability must lie in [0, 1), got {0}")]
    BadDepolarizing(f64),
    #[error("epsilon must be > 0")]
    BadEpsilon,
    #[error("bootstrap/batch size must be >= 2")]
    BadSampleCount,
    #[error("expected {expected} parameters, got {found}")]
    ParamCountMismatch { expected: usize, found: usize },
    #[error("model evaluation failed: {0}")]
    Model(String),
}

/// How per-term measurement variance is estimated from ⟨P⟩.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceFormula {
    /// 1 - ⟨P⟩², the variance of a ±1 observable.
    #[default]
    Exact,
    /// 1 - ⟨P⟩, as printed in some shot-budget write-ups; estimation only.
    Linear,
}

impl VarianceFormula {
    pub fn variance<R: Real>(self, expectation: R) -> R {
        let v = match self {
            VarianceFormula::Exact => R::one() - expectation * expectation,
            VarianceFormula::Linear => R::one() - expectation,
        };
        v.max(R::zero())
    }
}

/// Energy-level noise applied on top of a deterministic simulator.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound = "")]
pub enum NoiseSpec<R: Real> {
    None,
    Gaussian {
        sigma: R,
    },
    Shots {
        n_shots: u64,
        #[serde(default)]
        variance_formula: VarianceFormula,
    },
    Depolarizing {
        p: R,
        /// Apply the inverse global rescale after damping (mitigated mode).
        #[serde(default)]
        rescale: bool,
    },
}

impl<R: Real> Default for NoiseSpec<R> {
    fn default() -> Self {
        NoiseSpec::None
    }
}

impl<R: Real> NoiseSpec<R> {
    pub fn validate(&self) -> Result<(), NoiseError> {
        match self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::Gaussian { sigma } => {
                if *sigma < R::zero() {
                    Err(NoiseError::BadSigma(sigma.as_f64()))
                } else {
                    Ok(())
                }
            }
            NoiseSpec::Shots { n_shots, .. } => {
                if *n_shots == 0 {
                    Err(NoiseError::BadShotCount)
                } else {
                    Ok(())
                }
            }
            NoiseSpec::Depolarizing { p, .. } => {
                if *p < R::zero() || *p >= R::one() {
                    Err(NoiseError::BadDepolarizing(p.as_f64()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// A noisy estimate: the measured energy and its one-sigma uncertainty.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Measured<R: Real> {
    pub energy: R,
    pub sigma: R,
}

/// Deterministic simulator backend an evaluator wraps.
pub trait EnergyModel<R: Real>: Sync {
    fn n_params(&self) -> usize;
    fn energy(&self, params: &[R]) -> Result<R, NoiseError>;
    /// Expectation of every Hamiltonian term (aligned with `hamiltonian`).
    fn term_expectations(&self, params: &[R]) -> Result<Vec<R>, NoiseError>;
    /// Qubit-space Hamiltonian used for grouping and shot budgets.
    fn hamiltonian(&self) -> &PauliHamiltonian<R>;
}

/// Dense statevector backend for the ring ansatz.
pub struct StateVectorModel<R: Real> {
    pub ansatz: EntanglerAnsatz,
    pub hamiltonian: PauliHamiltonian<R>,
}

impl<R: Real> EnergyModel<R> for StateVectorModel<R> {
    fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    fn energy(&self, params: &[R]) -> Result<R, NoiseError> {
        statevector::ansatz_energy(&self.ansatz, params, &self.hamiltonian)
            .map_err(|e| NoiseError::Model(e.to_string()))
    }

    fn term_expectations(&self, params: &[R]) -> Result<Vec<R>, NoiseError> {
        let state = statevector::prepare_ansatz_state(&self.ansatz, params)
            .map_err(|e| NoiseError::Model(e.to_string()))?;
        self.hamiltonian
            .terms()
            .iter()
            .map(|t| {
                state
                    .pauli_expectation(&t.string)
                    .map_err(|e| NoiseError::Model(e.to_string()))
            })
            .collect()
    }

    fn hamiltonian(&self) -> &PauliHamiltonian<R> {
        &self.hamiltonian
    }
}

/// Bond-capped MPS backend for the ring ansatz (the cheap surrogate).
pub struct MpsModel<R: Real> {
    pub ansatz: EntanglerAnsatz,
    pub hamiltonian: PauliHamiltonian<R>,
    pub max_bond: usize,
    pub threshold: R,
}

impl<R: Real> MpsModel<R> {
    fn state(&self, params: &[R]) -> Result<mps::MpsState<R>, NoiseError> {
        mps::prepare_ansatz_state(&self.ansatz, params, self.max_bond, self.threshold)
            .map_err(|e| NoiseError::Model(e.to_string()))
    }
}

impl<R: Real> EnergyModel<R> for MpsModel<R> {
    fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    fn energy(&self, params: &[R]) -> Result<R, NoiseError> {
        let state = self.state(params)?;
        state
            .expectation(&self.hamiltonian)
            .map_err(|e| NoiseError::Model(e.to_string()))
    }

    fn term_expectations(&self, params: &[R]) -> Result<Vec<R>, NoiseError> {
        let state = self.state(params)?;
        self.hamiltonian
            .terms()
            .iter()
            .map(|t| {
                state
                    .pauli_expectation(&t.string)
                    .map_err(|e| NoiseError::Model(e.to_string()))
            })
            .collect()
    }

    fn hamiltonian(&self) -> &PauliHamiltonian<R> {
        &self.hamiltonian
    }
}

/// Sparse-determinant UCCSD backend; term expectations go through the
/// qubit-space image of the molecular Hamiltonian.
pub struct SwsModel<R: Real> {
    pub ansatz: UccAnsatz<R>,
    pub integrals: MolecularIntegrals<R>,
    qubit_hamiltonian: PauliHamiltonian<R>,
}

impl<R: Real> SwsModel<R> {
    pub fn new(
        ansatz: UccAnsatz<R>,
        integrals: MolecularIntegrals<R>,
    ) -> Result<Self, NoiseError> {
        let qubit_hamiltonian = crate::chem::jordan_wigner(&integrals)
            .map_err(|e| NoiseError::Model(e.to_string()))?;
        Ok(Self { ansatz, integrals, qubit_hamiltonian })
    }

    fn state(&self, params: &[R]) -> Result<SparseWavefunction<R>, NoiseError> {
        self.ansatz
            .prepare_state(params)
            .map_err(|e| NoiseError::Model(e.to_string()))
    }
}

/// ⟨psi|P|psi⟩ for a sparse real-amplitude wavefunction over 2·n_orb
/// qubits (alpha block low bits).
pub fn sparse_pauli_expectation<R: Real>(
    psi: &SparseWavefunction<R>,
    p: &crate::pauli::PauliString,
) -> Result<R, NoiseError> {
    let n_orb = psi.n_orb();
    if p.n_qubits() != 2 * n_orb {
        return Err(NoiseError::Model(format!(
            "pauli string on {} qubits, state spans {}",
            p.n_qubits(),
            2 * n_orb
        )));
    }
    let masks = p.masks().map_err(|e| NoiseError::Model(e.to_string()))?;
    let orb_mask = if n_orb == 64 { u64::MAX } else { (1u64 << n_orb) - 1 };
    let mut acc = Complex::new(R::zero(), R::zero());
    for (d, &a) in psi.iter() {
        let z = d.basis_index(n_orb);
        let z2 = masks.flipped(z);
        let partner = crate::sws::Determinant {
            alpha: z2 & orb_mask,
            beta: z2 >> n_orb,
        };
        let a2 = psi.amplitude(&partner);
        if a2 != R::zero() {
            acc += i_pow::<R>(masks.phase_exponent(z)) * Complex::new(a * a2, R::zero());
        }
    }
    let scale = R::one().max(acc.re.abs());
    if acc.im.abs() > R::of(1e-9) * scale {
        return Err(NoiseError::Model(format!(
            "imaginary residual {:e} in pauli expectation",
            acc.im.as_f64()
        )));
    }
    Ok(acc.re)
}

impl<R: Real> EnergyModel<R> for SwsModel<R> {
    fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    fn energy(&self, params: &[R]) -> Result<R, NoiseError> {
        let psi = self.state(params)?;
        sws::energy(&psi, &self.integrals).map_err(|e| NoiseError::Model(e.to_string()))
    }

    fn term_expectations(&self, params: &[R]) -> Result<Vec<R>, NoiseError> {
        let psi = self.state(params)?;
        self.qubit_hamiltonian
            .terms()
            .iter()
            .map(|t| sparse_pauli_expectation(&psi, &t.string))
            .collect()
    }

    fn hamiltonian(&self) -> &PauliHamiltonian<R> {
        &self.qubit_hamiltonian
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EvalRecord {
    pub call_index: u64,
    pub params_hash: u64,
    pub energy: f64,
    pub sigma: f64,
}

/// Wraps a model with a noise spec, an atomic call counter, and an
/// evaluation log. Randomness is keyed by (seed, call index) only.
pub struct CountedEvaluator<'a, R: Real> {
    model: &'a dyn EnergyModel<R>,
    noise: NoiseSpec<R>,
    grouping: Option<MeasurementGrouping<R>>,
    seed: u64,
    counter: AtomicU64,
    log: Mutex<Vec<EvalRecord>>,
}

fn hash_params<R: Real>(params: &[R]) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in params {
        p.as_f64().to_bits().hash(&mut h);
    }
    h.finish()
}

impl<'a, R: Real> CountedEvaluator<'a, R> {
    pub fn new(
        model: &'a dyn EnergyModel<R>,
        noise: NoiseSpec<R>,
        seed: u64,
    ) -> Result<Self, NoiseError> {
        noise.validate()?;
        let grouping = match &noise {
            NoiseSpec::Shots { .. } => Some(sorted_insertion(model.hamiltonian())),
            _ => None,
        };
        Ok(Self {
            model,
            noise,
            grouping,
            seed,
            counter: AtomicU64::new(0),
            log: Mutex::new(Vec::new()),
        })
    }

    pub fn calls(&self) -> u64 {
        self.counter.load(Ordering::SeqCst)
    }

    /// Resume support: continue call indices from a previous run.
    pub fn set_calls(&self, calls: u64) {
        self.counter.store(calls, Ordering::SeqCst);
    }

    pub fn noise(&self) -> &NoiseSpec<R> {
        &self.noise
    }

    pub fn model(&self) -> &dyn EnergyModel<R> {
        self.model
    }

    /// The noise floor of a single evaluation, when state-independent.
    pub fn nominal_sigma(&self) -> R {
        match &self.noise {
            NoiseSpec::Gaussian { sigma } => *sigma,
            _ => R::zero(),
        }
    }

    pub fn evaluate(&self, params: &[R]) -> Result<Measured<R>, NoiseError> {
        let idx = self.counter.fetch_add(1, Ordering::SeqCst);
        let m = self.evaluate_at(params, idx)?;
        self.push_log(idx, params, m);
        Ok(m)
    }

    /// Evaluate a batch with pre-assigned contiguous call indices; safe to
    /// run on any rayon pool, output independent of the schedule.
    pub fn evaluate_batch(&self, points: &[Vec<R>]) -> Result<Vec<Measured<R>>, NoiseError> {
        let start = self.counter.fetch_add(points.len() as u64, Ordering::SeqCst);
        let results: Vec<Result<Measured<R>, NoiseError>> = points
            .par_iter()
            .enumerate()
            .map(|(k, p)| self.evaluate_at(p, start + k as u64))
            .collect();
        let mut out = Vec::with_capacity(points.len());
        for (k, r) in results.into_iter().enumerate() {
            let m = r?;
            self.push_log(start + k as u64, &points[k], m);
            out.push(m);
        }
        Ok(out)
    }

    fn push_log(&self, idx: u64, params: &[R], m: Measured<R>) {
        self.log.lock().expect("log lock").push(EvalRecord {
            call_index: idx,
            params_hash: hash_params(params),
            energy: m.energy.as_f64(),
            sigma: m.sigma.as_f64(),
        });
    }

    /// CSV dump `call_index,params_hash,energy,sigma`, sorted by index.
    pub fn log_csv(&self) -> String {
        let mut rows = self.log.lock().expect("log lock").clone();
        rows.sort_by_key(|r| r.call_index);
        let mut out = String::from("call_index,params_hash,energy,sigma\n");
        for r in rows {
            out.push_str(&format!(
                "{},{:016x},{:.17e},{:.17e}\n",
                r.call_index, r.params_hash, r.energy, r.sigma
            ));
        }
        out
    }

    fn rng_for(&self, call_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(call_index);
        rng
    }

    fn evaluate_at(&self, params: &[R], call_index: u64) -> Result<Measured<R>, NoiseError> {
        if params.len() != self.model.n_params() {
            return Err(NoiseError::ParamCountMismatch {
                expected: self.model.n_params(),
                found: params.len(),
            });
        }
        match &self.noise {
            NoiseSpec::None => {
                let e = self.model.energy(params)?;
                Ok(Measured { energy: e, sigma: R::zero() })
            }
            NoiseSpec::Gaussian { sigma } => {
                let e = self.model.energy(params)?;
                let mut rng = self.rng_for(call_index);
                let draw: f64 = rng.sample(rand_distr::StandardNormal);
                Ok(Measured { energy: e + *sigma * R::of(draw), sigma: *sigma })
            }
            NoiseSpec::Shots { n_shots, variance_formula } => {
                let h = self.model.hamiltonian();
                let exps = self.model.term_expectations(params)?;
                let grouping = self.grouping.as_ref().expect("grouping prepared for shots");
                let mut rng = self.rng_for(call_index);
                sample_grouped_energy(
                    h,
                    &exps,
                    grouping,
                    *n_shots,
                    *variance_formula,
                    &mut rng,
                )
            }
            NoiseSpec::Depolarizing { p, rescale } => {
                let e = self.model.energy(params)?;
                let c_i = self.model.hamiltonian().identity_coefficient();
                let traceless = e - c_i;
                let damped = (R::one() - *p) * traceless;
                let traceless_out = if *rescale { damped / (R::one() - *p) } else { damped };
                Ok(Measured { energy: c_i + traceless_out, sigma: R::zero() })
            }
        }
    }
}

/// CLT shot sampler: per group draw Normal(mu_k, sqrt(Var_k / n_k)) with
/// shots allocated proportional to sqrt(sum_l a_kl^2), floored at one.
fn sample_grouped_energy<R: Real>(
    h: &PauliHamiltonian<R>,
    exps: &[R],
    grouping: &MeasurementGrouping<R>,
    n_shots: u64,
    formula: VarianceFormula,
    rng: &mut ChaCha8Rng,
) -> Result<Measured<R>, NoiseError> {
    let terms = h.terms();
    let mut weights = Vec::with_capacity(grouping.n_groups());
    for group in grouping.groups() {
        let w: R = group.iter().map(|&l| terms[l].coeff * terms[l].coeff).sum();
        weights.push(w.sqrt());
    }
    let total_w: R = weights.iter().copied().sum();
    let mut energy = h.identity_coefficient();
    let mut var_total = R::zero();
    for (k, group) in grouping.groups().iter().enumerate() {
        let mut mu = R::zero();
        let mut var = R::zero();
        for &l in group {
            mu += terms[l].coeff * exps[l];
            var += terms[l].coeff * terms[l].coeff * formula.variance(exps[l]);
        }
        let share = if total_w > R::zero() {
            (weights[k] / total_w * R::of(n_shots as f64)).round().as_f64() as i64
        } else {
            0
        };
        let n_k = if share < 1 {
            log::warn!("group {k} allocated 0 shots, flooring at 1");
            1
        } else {
            share as u64
        };
        let group_var = var / R::of(n_k as f64);
        var_total += group_var;
        if group_var > R::zero() {
            let draw: f64 = rng.sample(rand_distr::StandardNormal);
            energy += mu + group_var.sqrt() * R::of(draw);
        } else {
            energy += mu;
        }
    }
    Ok(Measured { energy, sigma: var_total.sqrt() })
}

/// Shot budget report for one Hamiltonian/state pair at accuracy epsilon.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ShotEstimate<R: Real> {
    pub n_ungrouped: R,
    pub r_hat: R,
    pub n_shots: R,
}

/// Compose the ungrouped shot bound with the grouping gain:
/// n_shots = n_ungrouped / r_hat.
pub fn estimate_required_shots<R: Real>(
    h: &PauliHamiltonian<R>,
    exps: &[R],
    epsilon: R,
    formula: VarianceFormula,
) -> Result<ShotEstimate<R>, NoiseError> {
    if epsilon <= R::zero() {
        return Err(NoiseError::BadEpsilon);
    }
    let idx = h.non_identity_indices();
    let terms = h.terms();
    let coeffs: Vec<R> = idx.iter().map(|&i| terms[i].coeff).collect();
    let vars: Vec<R> = idx.iter().map(|&i| formula.variance(exps[i])).collect();
    let n_ungrouped = shots_ungrouped(&coeffs, &vars, epsilon)
        .map_err(|e| NoiseError::Model(e.to_string()))?;
    let grouping = sorted_insertion(h);
    let r = r_hat(&grouping, h);
    Ok(ShotEstimate { n_ungrouped, r_hat: r, n_shots: n_ungrouped / r })
}
