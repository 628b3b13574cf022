mod common;

use bpde_core::evolution::{apply_evolution, build_second_order_step, Backend, TrotterPlan};
use bpde_core::integrals::synth_random_hamiltonian;
use bpde_core::oracle::{eigh, exact_evolve};
use bpde_core::qubit::{jordan_wigner, Pauli, PauliString, DEFAULT_PRUNE_CUTOFF};
use bpde_core::state::{Circuit, Executor};
use bpde_core::{QubitHamiltonian, StateVector};
use common::{max_abs, random_qubit_hamiltonian};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn evolve(h: &QubitHamiltonian, s0: &StateVector, t: f64, m: usize, backend: Backend) -> StateVector {
    let mut s = s0.clone();
    apply_evolution(&mut s, h, &TrotterPlan::new(h, t, m), backend, &Executor::sequential()).unwrap();
    s
}

/// Columns are the circuit applied to each basis state.
fn circuit_unitary(c: &Circuit, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_circuit(c).unwrap();
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    u
}

fn exact_unitary(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let (e, v) = eigh(h).unwrap();
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        e.len(),
        e.iter().map(|x| Complex64::from_polar(1.0, -x * t)),
    ));
    &v * phases * v.adjoint()
}

#[test]
fn commuting_terms_slice_is_exact() {
    let h = QubitHamiltonian::new(
        2,
        [(0.3, PauliString::single(0, Pauli::Z)), (-0.7, PauliString::single(1, Pauli::Z))],
    );
    for backend in [Backend::Gate, Backend::Fused] {
        let u = circuit_unitary(&build_second_order_step(&h, 0.37, backend), 2);
        assert!(max_abs(&(u - exact_unitary(&h.to_dense(), 0.37))) < 1e-13);
    }
}

#[test]
fn slice_error_is_third_order() {
    let h = QubitHamiltonian::new(
        1,
        [(1.0, PauliString::single(0, Pauli::X)), (1.0, PauliString::single(0, Pauli::Z))],
    );
    let err = |tau: f64| {
        let u = circuit_unitary(&build_second_order_step(&h, tau, Backend::Fused), 1);
        max_abs(&(u - exact_unitary(&h.to_dense(), tau)))
    };
    let ratio = err(0.1) / err(0.05);
    assert!((7.0..=9.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn diagonal_hamiltonian_is_exact_for_any_slicing() {
    let ints = synth_random_hamiltonian(4, 3, 0.0);
    let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
    assert!(h.is_diagonal());
    let s0 = StateVector::random(4, 1).unwrap();
    let exact = exact_evolve(&s0, &h.to_dense(), 2.3).unwrap();
    for m in [1, 2, 7, 50] {
        for backend in [Backend::Gate, Backend::Fused] {
            assert!(evolve(&h, &s0, 2.3, m, backend).max_abs_diff(&exact) < 1e-12);
        }
    }
}

#[test]
fn six_qubit_fidelity_and_second_order_scaling() {
    let ints = synth_random_hamiltonian(6, 11, 2.0);
    let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
    let s0 = StateVector::random(6, 2).unwrap();
    let exact = exact_evolve(&s0, &h.to_dense(), 1.0).unwrap();
    let s100 = evolve(&h, &s0, 1.0, 100, Backend::Fused);
    let fidelity = exact.inner(&s100).norm_sqr();
    assert!(fidelity >= 1.0 - 1e-4, "fidelity {fidelity}");
    let ratio = s100.distance(&exact) / evolve(&h, &s0, 1.0, 200, Backend::Fused).distance(&exact);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn fine_slicing_converges_to_exact_evolution() {
    let ints = synth_random_hamiltonian(4, 5, 3.0);
    let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
    let s0 = StateVector::random(4, 9).unwrap();
    let exact = exact_evolve(&s0, &h.to_dense(), 1.5).unwrap();
    let trotter = evolve(&h, &s0, 1.5, 10_000, Backend::Fused);
    assert!(trotter.max_abs_diff(&exact) < 1e-6);
}

#[test]
fn norm_survives_a_thousand_slices() {
    let h = random_qubit_hamiltonian(4, 5, 12);
    let s = evolve(&h, &StateVector::random(5, 4).unwrap(), 50.0, 1000, Backend::Gate);
    assert!((s.norm_sqr() - 1.0).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gate_and_fused_backends_agree(seed in any::<u64>(), n in 1usize..=10, terms in 1usize..6, t in 0.0f64..3.0, m in 1usize..4) {
        let h = random_qubit_hamiltonian(seed, n, terms);
        let s0 = StateVector::random(n, seed).unwrap();
        let gate = evolve(&h, &s0, t, m, Backend::Gate);
        let fused = evolve(&h, &s0, t, m, Backend::Fused);
        prop_assert!(gate.max_abs_diff(&fused) < 1e-10);
    }
}

#[test]
fn identity_offset_contributes_global_phase() {
    let h = QubitHamiltonian::new(2, [(0.8, PauliString::identity())]);
    let s0 = StateVector::random(2, 0).unwrap();
    for backend in [Backend::Gate, Backend::Fused] {
        let s = evolve(&h, &s0, 1.25, 3, backend);
        let overlap = s0.inner(&s);
        assert!((overlap - Complex64::from_polar(1.0, -0.8 * 1.25)).norm() < 1e-12);
    }
}
