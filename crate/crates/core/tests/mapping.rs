mod common;

use std::collections::HashSet;

use bpde_core::integrals::{parse_integral_file, synth_random_hamiltonian, write_integral_file};
use bpde_core::oracle::{eigh, fermionic_dense};
use bpde_core::qubit::{determinant_expectation, jordan_wigner, Determinant, DEFAULT_PRUNE_CUTOFF};
use common::max_abs;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn qubit_and_fermion_matrices_agree(n in 1usize..=5, seed in any::<u64>(), dd in prop::sample::select(vec![0.0, 0.5, 1.0, 4.0, 20.0])) {
        let ints = synth_random_hamiltonian(n, seed, dd);
        let qubit = jordan_wigner(&ints, 0.0).unwrap().to_dense();
        let fermion = fermionic_dense(&ints).unwrap();
        prop_assert!(fermion.hermiticity_defect() < 1e-10);
        prop_assert!(max_abs(&(qubit - &fermion.matrix)) < 1e-10);
    }

    #[test]
    fn expectation_matches_dense_diagonal(n in 1usize..=5, seed in any::<u64>()) {
        let ints = synth_random_hamiltonian(n, seed, 2.0);
        let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
        let dense = fermionic_dense(&ints).unwrap();
        for bits in 0..1u64 << n {
            let d = Determinant::new(bits, n);
            let e = determinant_expectation(&h, &d).unwrap();
            prop_assert!((e - dense.matrix[(bits as usize, bits as usize)].re).abs() < 1e-10);
        }
    }

    #[test]
    fn stored_terms_are_merged_and_above_cutoff(n in 1usize..=5, seed in any::<u64>(), cutoff in 0.0f64..0.05) {
        let ints = synth_random_hamiltonian(n, seed, 5.0);
        let h = jordan_wigner(&ints, cutoff).unwrap();
        let mut seen = HashSet::new();
        for (w, s) in h.terms() {
            prop_assert!(w.is_finite() && w.abs() >= cutoff);
            prop_assert!(seen.insert(*s));
            prop_assert!(s.max_qubit().is_none_or(|q| q < n));
        }
    }

    #[test]
    fn parsed_instances_give_hermitian_matrices(n in 1usize..=4, seed in any::<u64>()) {
        let text = write_integral_file(&synth_random_hamiltonian(n, seed, 1.0));
        let ints = parse_integral_file(&text).unwrap();
        prop_assert!(fermionic_dense(&ints).unwrap().hermiticity_defect() < 1e-10);
    }
}

/// Dropping terms of weight below the cutoff moves each eigenvalue by at most the
/// spectral norm of the dropped part, which is bounded by their count times the cutoff.
#[test]
fn pruning_obeys_weyl_bound() {
    let mut total_dropped = 0;
    for seed in 0..20u64 {
        let n = 3 + (seed % 3) as usize;
        let ints = synth_random_hamiltonian(n, seed, 40.0);
        let full = jordan_wigner(&ints, 0.0).unwrap();
        for cutoff in [1e-4, 1e-3, 5e-3] {
            let pruned = jordan_wigner(&ints, cutoff).unwrap();
            let dropped = full.len() - pruned.len();
            total_dropped += dropped;
            let (a, _) = eigh(&full.to_dense()).unwrap();
            let (b, _) = eigh(&pruned.to_dense()).unwrap();
            let shift = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(
                shift <= dropped as f64 * cutoff + 1e-12,
                "seed {seed} cutoff {cutoff}: shift {shift} with {dropped} dropped"
            );
        }
    }
    assert!(total_dropped > 0);
}
