//! Pauli algebra, circuit, grouping, and spin-chain simulator checks against
//! dense Kronecker-product oracles.

mod support;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use support::*;
use vqsls_core::circuit::{entangler_generator, entangler_unitary, EntanglerAnsatz, GeneratorSign};
use vqsls_core::pauli::{build_ising_hamiltonian, Axis, PauliHamiltonian, PauliString};
use vqsls_core::statevector::{exact_ground_energy, prepare_ansatz_state, StateVector};

fn axis_strategy() -> impl Strategy<Value = Axis> {
    prop::sample::select(vec![Axis::I, Axis::X, Axis::Y, Axis::Z])
}

fn string_pair_strategy() -> impl Strategy<Value = (PauliString, PauliString)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(axis_strategy(), n),
            prop::collection::vec(axis_strategy(), n),
        )
            .prop_map(|(a, b)| (PauliString::new(a).unwrap(), PauliString::new(b).unwrap()))
    })
}

proptest! {
    #[test]
    fn commutation_matches_dense_commutator((a, b) in string_pair_strategy()) {
        let ma = pauli_string_matrix(&a);
        let mb = pauli_string_matrix(&b);
        prop_assert_eq!(a.commutes_with(&b), matrices_commute(&ma, &mb, 1e-12));
    }

    #[test]
    fn strings_square_to_identity(axes in prop::collection::vec(axis_strategy(), 1..=5)) {
        let p = PauliString::new(axes).unwrap();
        let m = pauli_string_matrix(&p);
        let sq = &m * &m;
        let id = CMat::identity(m.nrows(), m.ncols());
        prop_assert!(max_abs_diff(&sq, &id) < 1e-12);
    }

    #[test]
    fn mask_action_matches_dense_matrix(axes in prop::collection::vec(axis_strategy(), 1..=5)) {
        let p = PauliString::new(axes).unwrap();
        let masks = p.masks().unwrap();
        let m = pauli_string_matrix(&p);
        let dim = 1usize << p.n_qubits();
        for z in 0..dim as u64 {
            let row = masks.flipped(z) as usize;
            let phase = Complex64::i().powu(masks.phase_exponent(z) as u32);
            for r in 0..dim {
                let expected = if r == row { phase } else { Complex64::new(0.0, 0.0) };
                prop_assert!((m[(r, z as usize)] - expected).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn commutation_agrees_on_named_pairs() {
    let xx = PauliString::from_text_pair("XX");
    let zz = PauliString::from_text_pair("ZZ");
    let x = PauliString::from_text_pair("XI");
    let z = PauliString::from_text_pair("ZI");
    assert!(xx.commutes_with(&zz));
    assert!(matrices_commute(
        &pauli_string_matrix(&xx),
        &pauli_string_matrix(&zz),
        1e-12
    ));
    assert!(!x.commutes_with(&z));
    assert!(!matrices_commute(
        &pauli_string_matrix(&x),
        &pauli_string_matrix(&z),
        1e-12
    ));
}

trait FromTextPair {
    fn from_text_pair(s: &str) -> PauliString;
}

impl FromTextPair for PauliString {
    fn from_text_pair(s: &str) -> PauliString {
        let axes: Vec<Axis> = s.chars().map(|c| Axis::from_char(c).unwrap()).collect();
        PauliString::new(axes).unwrap()
    }
}

#[test]
fn ising_ground_energy_matches_dense_diagonalization() {
    let h = build_ising_hamiltonian::<f64>(6, 1.0, 0.9, 0.4).unwrap();
    let m = hamiltonian_matrix(&h);
    let hermitian = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let oracle = hermitian
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let found = exact_ground_energy(&h).unwrap();
    assert!(
        (found - oracle).abs() < 1e-9,
        "ground energy {found} vs dense oracle {oracle}"
    );
}

#[test]
fn ising_ground_energy_matches_power_iteration() {
    let h = build_ising_hamiltonian::<f64>(8, 1.0, 0.9, 0.4).unwrap();
    let oracle = ground_energy_power_iteration(&hamiltonian_matrix(&h), 1e-11);
    let found = exact_ground_energy(&h).unwrap();
    assert!(
        (found - oracle).abs() < 1e-9,
        "ground energy {found} vs power iteration {oracle}"
    );
}

#[test]
fn entangler_matches_matrix_exponential() {
    let mut seed = 0x0f1e_2d3c_4b5a_6978u64;
    for sign in [GeneratorSign::Plus, GeneratorSign::Minus] {
        for theta in [std::f64::consts::PI, 0.3, -1.7, 2.4, 0.0] {
            let g = gate_matrix(&entangler_generator::<f64>(sign));
            let oracle = expm(&(g * Complex64::new(0.0, -theta)));
            let u = gate_matrix(&entangler_unitary(theta, sign));
            assert!(
                max_abs_diff(&u, &oracle) < 1e-12,
                "sign {sign:?} theta {theta}: closed form deviates from exponential"
            );

            // Same check through the simulator's strided two-qubit update.
            let raw: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(unit_double(&mut seed), unit_double(&mut seed)))
                .collect();
            let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let amps: Vec<Complex64> = raw.iter().map(|a| a / norm).collect();
            let mut sv = StateVector::from_amplitudes(2, amps.clone()).unwrap();
            sv.apply_entangler(1, 0, theta, sign).unwrap();
            let dense = &oracle * DVector::from_vec(amps);
            for (a, b) in sv.amplitudes().iter().zip(dense.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn ansatz_state_matches_gate_by_gate_dense_oracle() {
    let params = [0.31, -0.72, 1.13, 0.44];
    for sign in [GeneratorSign::Plus, GeneratorSign::Minus] {
        let ansatz = EntanglerAnsatz::new(4, sign).unwrap();
        let state = prepare_ansatz_state(&ansatz, &params).unwrap();
        let oracle = dense_ansatz_state(&ansatz, &params);
        for (a, b) in state.amplitudes().iter().zip(oracle.iter()) {
            assert!(
                (a - b).norm() < 1e-12,
                "strided and dense circuit applications disagree"
            );
        }
    }
}

#[test]
fn expectation_matches_dense_quadratic_form() {
    let n = 6;
    let dim = 1usize << n;
    let mut seed = 0xabcd_ef01_2345_6789u64;
    let h = build_ising_hamiltonian::<f64>(n, 1.0, 0.9, 0.4).unwrap();
    let m = hamiltonian_matrix(&h);
    for _ in 0..5 {
        let raw: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(unit_double(&mut seed), unit_double(&mut seed)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = raw.iter().map(|a| a / norm).collect();
        let sv = StateVector::from_amplitudes(n, amps.clone()).unwrap();
        let v = DVector::from_vec(amps);
        let oracle = (v.adjoint() * &m * &v)[(0, 0)].re;
        let found = sv.expectation(&h).unwrap();
        assert!(
            (found - oracle).abs() < 1e-10,
            "expectation {found} vs quadratic form {oracle}"
        );
    }
}

mod grouping_checks {
    use super::*;
    use vqsls_core::grouping::sorted_insertion;

    fn hamiltonian_strategy() -> impl Strategy<Value = PauliHamiltonian<f64>> {
        (2usize..=5)
            .prop_flat_map(|n| {
                prop::collection::vec(
                    (prop::collection::vec(axis_strategy(), n), -2.0..2.0f64),
                    1..12,
                )
            })
            .prop_map(|terms| {
                let n = terms[0].0.len();
                let mut h = PauliHamiltonian::new(n);
                for (axes, coeff) in terms {
                    h.push(coeff, PauliString::new(axes).unwrap()).unwrap();
                }
                h
            })
    }

    proptest! {
        #[test]
        fn groups_partition_and_commute(h in hamiltonian_strategy()) {
            let g = sorted_insertion(&h);
            let mut seen: Vec<usize> = g.groups().iter().flatten().copied().collect();
            seen.sort_unstable();
            let mut expected = h.non_identity_indices();
            expected.sort_unstable();
            prop_assert_eq!(seen, expected, "groups must partition the non-identity terms");

            for group in g.groups() {
                for (a, &ia) in group.iter().enumerate() {
                    for &ib in &group[a + 1..] {
                        let ma = pauli_string_matrix(&h.terms()[ia].string);
                        let mb = pauli_string_matrix(&h.terms()[ib].string);
                        prop_assert!(
                            matrices_commute(&ma, &mb, 1e-12),
                            "terms {} and {} share a group but do not commute", ia, ib
                        );
                    }
                }
            }
            if !h.non_identity_indices().is_empty() {
                prop_assert!(g.r_hat() >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn sorted_insertion_splits_anticommuting_terms() {
        let mut h = PauliHamiltonian::new(2);
        h.push(1.0, PauliString::from_text_pair("ZZ")).unwrap();
        h.push(0.5, PauliString::from_text_pair("XX")).unwrap();
        h.push(0.3, PauliString::from_text_pair("XI")).unwrap();
        let g = sorted_insertion(&h);
        assert_eq!(g.groups(), &[vec![0, 1], vec![2]]);
    }
}
