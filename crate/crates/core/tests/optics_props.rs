use dfock_core::displaced::displaced_number_state;
use dfock_core::fock::DEFAULT_CUTOFF_FLOOR;
use dfock_core::fock::{number_state, Truncation};
use dfock_core::optics::{
    bs_unitary, front_end_fidelity, htbs_displacement_check, interior_unitarity_defect, BeamSplitterSpec,
};
use dfock_core::protocol::{run_finite, QubitSpec, DEFAULT_M_MAX};
use dfock_core::{CMatrix, C64};
use proptest::prelude::*;

fn balanced_qubit() -> QubitSpec {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    QubitSpec::new(0, 1, h, h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn photon_number_is_conserved(t in 0.01f64..=1.0, d0 in 2usize..9, d1 in 2usize..9) {
        let op = bs_unitary(BeamSplitterSpec::from_transmittance(t).unwrap(), (d0, d1));
        for m1 in 0..d0 {
            for m2 in 0..d1 {
                for n1 in 0..d0 {
                    for n2 in 0..d1 {
                        if m1 + m2 != n1 + n2 {
                            prop_assert_eq!(op.element((m1, m2), (n1, n2)), C64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reversed_splitter_undoes_it(t in 0.01f64..=1.0) {
        let spec = BeamSplitterSpec::from_transmittance(t).unwrap();
        let fwd = bs_unitary(spec, (12, 12));
        let back = bs_unitary(spec.inverse(), (12, 12));
        prop_assert!(interior_unitarity_defect(&fwd, 11) < 1e-9);
        for (a, b) in fwd.blocks().iter().zip(back.blocks()) {
            let total = a.basis[0].0 + a.basis[0].1;
            if total > 11 {
                continue;
            }
            let prod = b.matrix.matmul(&a.matrix);
            prop_assert!(prod.max_abs_diff(&CMatrix::identity(a.basis.len())) < 1e-9);
        }
    }
}

#[test]
fn front_end_improves_with_transmittance() {
    let q = balanced_qubit();
    let values: Vec<f64> = [0.9, 0.95, 0.99, 0.999].iter().map(|&t| front_end_fidelity(&q, 0.2, t).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{values:?}");
    assert!(values[3] > 0.99);
}

#[test]
fn front_end_estimate_tracks_the_full_overlap() {
    let q = balanced_qubit();
    for t in [0.95, 0.99] {
        let estimate = front_end_fidelity(&q, 0.2, t).unwrap();
        let run = run_finite(&q, 0.2, t, DEFAULT_CUTOFF_FLOOR, DEFAULT_M_MAX).unwrap();
        assert!((estimate - run.state_fidelity).abs() < 2e-2, "t = {t}: {estimate} vs {}", run.state_fidelity);
    }
}

#[test]
fn strong_coherent_state_displaces_the_partner() {
    let tr = Truncation::new(12).unwrap();
    let one = number_state(1, tr).unwrap();
    assert!(htbs_displacement_check(10.0, &one, 0.999).unwrap() > 0.99);
    let cat_like = displaced_number_state(0, C64::new(0.3, 0.0), tr).unwrap();
    let loose = htbs_displacement_check(2.0, &cat_like, 0.9).unwrap();
    let tight = htbs_displacement_check(2.0, &cat_like, 0.99).unwrap();
    assert!(tight > loose);
}
