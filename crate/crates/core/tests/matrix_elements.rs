use dfock_core::displaced::{
    amplitude_factor, displacement_operator, matrix_element, matrix_element_closed, MatrixElementTable,
};
use dfock_core::fock::Truncation;
use dfock_core::protocol::BFactors;
use dfock_core::C64;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn polar(r: f64, theta: f64) -> C64 {
    C64::from_polar(r, theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_are_orthonormal(r in 0.0f64..=1.0, theta in 0.0f64..TAU) {
        let table = MatrixElementTable::new(polar(r, theta), 40);
        prop_assert!(table.orthonormality_defect(15) < 1e-9);
    }

    #[test]
    fn closed_rows_match_general_formula(r in 0.0f64..=1.0, theta in 0.0f64..TAU, l in 0usize..4, m in 0usize..=30) {
        let a = polar(r, theta);
        let closed = matrix_element_closed(l, m, a).unwrap();
        let general = matrix_element(l, m, a);
        prop_assert!((closed - general).norm() < 1e-12, "{closed} vs {general}");
    }

    #[test]
    fn phase_covariance(alpha in 0.01f64..1.0, phi in 0.0f64..TAU, k in 0usize..6, m in 0usize..12) {
        let unit = -C64::from_polar(1.0, phi);
        let lhs = matrix_element(k, m, unit * alpha);
        let rhs = unit.powi(m as i32 - k as i32) * matrix_element(k, m, C64::new(alpha, 0.0));
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }
}

/// `F c_ln` against `<n| exp(alpha a^+ - conj(alpha) a) |l>` built by the
/// matrix exponential on a generous truncation.
fn oracle_gap(alpha: C64, max_index: usize, cutoff: usize) -> f64 {
    let d = displacement_operator(alpha, Truncation::new(cutoff).unwrap());
    let f = (-alpha.norm_sqr() / 2.0).exp();
    let mut worst: f64 = 0.0;
    for l in 0..=max_index {
        for n in 0..=max_index {
            let exact = d.matrix()[(n, l)];
            worst = worst.max((exact - matrix_element(l, n, alpha) * f).norm());
        }
    }
    worst
}

#[test]
fn matches_matrix_exponential() {
    for a in [0.1, 0.3, 0.7, 1.0] {
        assert!(oracle_gap(C64::new(a, 0.0), 10, 60) < 1e-8, "alpha = {a}");
    }
    assert!(oracle_gap(C64::new(0.7, 0.1), 27, 60) < 1e-8);
}

#[test]
fn tabulated_and_direct_agree() {
    let a = C64::new(0.45, -0.2);
    let table = MatrixElementTable::new(a, 30);
    for l in 0..30 {
        for n in 0..30 {
            assert!((table.get(l, n) - matrix_element(l, n, a)).norm() < 1e-13);
        }
    }
}

#[test]
fn two_term_factor_tracks_the_one_photon_amplitude_factor() {
    // 1/alpha and A_1 = (1 - alpha^2)/alpha differ by a relative alpha^2.
    for beta in [0.005, 0.02, 0.05] {
        let b = BFactors::new(beta, 0.999).unwrap();
        let a1 = amplitude_factor(0, 1, 1, C64::new(b.alpha, 0.0)).unwrap().norm();
        let gap = (b.b01 - a1).abs() / a1;
        assert!(gap < 5e-3, "beta = {beta}: {gap}");
        assert!((gap - b.alpha * b.alpha / (1.0 - b.alpha * b.alpha)).abs() < 1e-12);
    }
}
