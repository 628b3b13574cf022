#![allow(dead_code)]

use bpde_core::integrals::{synth_random_hamiltonian, SpinOrbitalIntegrals};
use bpde_core::qubit::{Pauli, PauliString};
use bpde_core::{Determinant, QubitHamiltonian};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Orbital energies plus density-density couplings: diagonal in the occupation basis.
pub fn diagonal_instance(seed: u64) -> (SpinOrbitalIntegrals, Determinant, Determinant) {
    let n = 3 + (seed % 3) as usize;
    let mut ints = synth_random_hamiltonian(n, seed, 0.0);
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xd1a6);
    for p in 0..n {
        for q in (p + 1)..n {
            let j = c(rng.random_range(0.0..0.3), 0.0);
            ints.set_h2(p, q, p, q, j);
            ints.set_h2(q, p, q, p, j);
        }
    }
    let occ = n / 2;
    let d0 = Determinant::from_occupied(&(0..occ).collect::<Vec<_>>(), n);
    let mut excited: Vec<usize> = (0..occ - 1).collect();
    excited.push(occ + (seed as usize % (n - occ)));
    (ints, d0, Determinant::from_occupied(&excited, n))
}

pub fn random_pauli(rng: &mut ChaCha20Rng, n: usize) -> PauliString {
    loop {
        let ops: Vec<(usize, Pauli)> = (0..n)
            .filter_map(|q| match rng.random_range(0..4) {
                1 => Some((q, Pauli::X)),
                2 => Some((q, Pauli::Y)),
                3 => Some((q, Pauli::Z)),
                _ => None,
            })
            .collect();
        if !ops.is_empty() {
            return PauliString::from_ops(&ops);
        }
    }
}

/// A few random non-identity strings plus an identity offset.
pub fn random_qubit_hamiltonian(seed: u64, n: usize, terms: usize) -> QubitHamiltonian {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut list = vec![(rng.random_range(-1.0..1.0), PauliString::identity())];
    for _ in 0..terms {
        list.push((rng.random_range(-1.0..1.0), random_pauli(&mut rng, n)));
    }
    QubitHamiltonian::new(n, list)
}

pub fn max_abs(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
