//! Hartree is the internal unit; wavenumbers appear only in reports.

/// cm^-1 per Hartree.
pub const HARTREE_TO_CM1: f64 = 219474.6313632;

pub fn hartree_to_cm1(e: f64) -> f64 {
    e * HARTREE_TO_CM1
}

pub fn cm1_to_hartree(k: f64) -> f64 {
    k / HARTREE_TO_CM1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_hartree() {
        assert!((hartree_to_cm1(0.5) - 109737.31568).abs() < 5e-6);
    }

    #[test]
    fn round_trip() {
        for e in [1e-6, 0.0371, 0.5, 1.0, 12.75, -3.2] {
            let back = cm1_to_hartree(hartree_to_cm1(e));
            assert!(((back - e) / e).abs() < 1e-12);
        }
    }
}
