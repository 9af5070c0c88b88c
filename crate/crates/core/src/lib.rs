//! Surrogate-assisted line-search optimization of variational quantum
//! circuits.
//!
//! The crate bundles the pieces of the workflow: Pauli-sum Hamiltonians and
//! measurement grouping, spin and molecular simulators at several accuracy
//! tiers (dense statevector, bond-capped matrix product states, sparse
//! determinant wavefunctions), synthetic noise models with exact call
//! counting, and the surrogate Hessian line-search optimizer with a Powell
//! baseline.
//!
//! Everything numerical is generic over the scalar type through
//! [`scalar::Real`]; the `*64` aliases below fix `f64` for ordinary use.

pub mod chem;
pub mod checkpoint;
pub mod circuit;
pub mod grouping;
pub mod mps;
pub mod noise;
pub mod optimize;
pub mod pauli;
pub mod scalar;
pub mod statevector;
pub mod sws;

pub use scalar::Real;

pub type PauliHamiltonian64 = pauli::PauliHamiltonian<f64>;
pub type PauliTerm64 = pauli::PauliTerm<f64>;
pub type MeasurementGrouping64 = grouping::MeasurementGrouping<f64>;
pub type StateVector64 = statevector::StateVector<f64>;
pub type MpsState64 = mps::MpsState<f64>;
pub type MolecularIntegrals64 = chem::MolecularIntegrals<f64>;
pub type Mp2Guess64 = chem::Mp2Guess<f64>;
pub type SparseWavefunction64 = sws::SparseWavefunction<f64>;
pub type UccAnsatz64 = sws::UccAnsatz<f64>;
pub type NoiseSpec64 = noise::NoiseSpec<f64>;
pub type HessianResult64 = optimize::HessianResult<f64>;
pub type ConjugateDirections64 = optimize::ConjugateDirections<f64>;
pub type SearchWindow64 = optimize::SearchWindow<f64>;
pub type LineSearchRun64 = optimize::LineSearchRun<f64>;
