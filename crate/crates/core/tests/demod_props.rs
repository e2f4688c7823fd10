use dfock_core::demod::{
    coherent_demodulate, coherent_simulation, higher_order, make_am_qubit, solve_gammas, swap_demodulate,
    swap_simulation, teleport_am, AmBranch, AmQubit, Strategy,
};
use dfock_core::protocol::{ChannelSpec, QubitSpec};
use proptest::prelude::*;

const MAGNITUDES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
const BRANCHES: [AmBranch; 2] = [AmBranch::K, AmBranch::N];

fn am(a1: f64, branch: AmBranch, alpha: f64) -> AmQubit {
    make_am_qubit(&QubitSpec::from_magnitude(0, 1, a1).unwrap(), branch, alpha).unwrap()
}

#[test]
fn swap_closed_forms_are_exact() {
    for i in 1..=8 {
        let alpha = 0.1 * i as f64;
        for a1 in MAGNITUDES {
            for branch in BRANCHES {
                let a = am(a1, branch, alpha);
                let closed = swap_demodulate(&a).unwrap().probability;
                let sim = swap_simulation(&a).unwrap();
                assert!((closed - sim.probability).abs() < 1e-9, "{alpha} {a1} {branch:?}");
                assert!(sim.fidelity.is_nan() || (sim.fidelity - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn two_dominant_outcomes_carry_most_mass() {
    let ch = ChannelSpec::for_basis(1.0, 0, 1).unwrap();
    for alpha in [0.02, 0.05, 0.1, 0.15, 0.2] {
        for a1 in MAGNITUDES {
            for branch in BRANCHES {
                let t = teleport_am(&am(a1, branch, alpha), &ch, 1).unwrap();
                let mass: f64 = t.outcomes.iter().map(|o| o.probability).sum();
                assert!(mass >= 1.0 - 10.0 * alpha * alpha);
            }
        }
    }
    let t = teleport_am(&am(0.5, AmBranch::K, 0.05), &ch, 1).unwrap();
    assert!(t.outcomes.iter().map(|o| o.probability).sum::<f64>() >= 0.99);
}

#[test]
fn coherent_closed_form_tracks_simulation() {
    for alpha in [0.05, 0.1, 0.2, 0.3] {
        for a1 in MAGNITUDES {
            for branch in BRANCHES {
                let a = am(a1, branch, alpha);
                let closed = coherent_demodulate(&a).unwrap().probability;
                let sim = coherent_simulation(&a).unwrap();
                assert!(
                    (closed - sim.probability).abs() < 2e-2,
                    "{alpha} {a1} {branch:?}: {closed} vs {}",
                    sim.probability
                );
                // On the n-branch the splitter leaks the rail photon with amplitude
                // r, far above the displacement d ~ alpha^2 it stands in for, so
                // only the k-branch state is clean.
                if branch == AmBranch::K {
                    assert!(sim.fidelity > 0.99, "{alpha} {a1}: {}", sim.fidelity);
                }
            }
        }
    }
}

#[test]
fn n_branch_third_outcome_is_second_order() {
    // Near |a1| = 1 the n-branch modulation scales the norm by 1/alpha^2, so
    // the m = 2 term of the coherent variant is of order alpha^2 and not alpha^4.
    let alpha = 0.02;
    let a = am(1.0, AmBranch::N, alpha);
    let extra = higher_order(&a, Strategy::Coherent).unwrap() - coherent_demodulate(&a).unwrap().probability;
    let g4 = solve_gammas(alpha).unwrap().gamma4.powi(2);
    let expected = (-alpha * alpha).exp() * a.normalization.powi(2) * alpha.powi(4) / 2.0 * (-g4).exp() * g4;
    assert!((extra - expected).abs() < 1e-12);
    assert!(extra > 1e-5);
    let k = am(1.0, AmBranch::K, alpha);
    let k_extra = higher_order(&k, Strategy::Coherent).unwrap() - coherent_demodulate(&k).unwrap().probability;
    assert!(k_extra < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn higher_order_never_loses(alpha in 0.01f64..0.95, a1 in 0.0f64..=1.0, n_branch in any::<bool>()) {
        let branch = if n_branch { AmBranch::N } else { AmBranch::K };
        let a = am(a1, branch, alpha);
        prop_assert!(higher_order(&a, Strategy::Coherent).unwrap() >= coherent_demodulate(&a).unwrap().probability);
        prop_assert!(higher_order(&a, Strategy::Swap).unwrap() >= swap_demodulate(&a).unwrap().probability);
    }

    #[test]
    fn gamma_conditions_hold(alpha in 0.01f64..0.99) {
        let r = solve_gammas(alpha).unwrap().condition_residuals(alpha).unwrap();
        prop_assert!(r[0] < 1e-9 && r[1] < 1e-9);
    }

    #[test]
    fn swap_is_exact_anywhere(alpha in 0.05f64..0.9, a1 in 0.0f64..=1.0, n_branch in any::<bool>()) {
        let branch = if n_branch { AmBranch::N } else { AmBranch::K };
        let a = am(a1, branch, alpha);
        let p = swap_demodulate(&a).unwrap().probability;
        prop_assert!((p - swap_simulation(&a).unwrap().probability).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&p));
    }
}

#[test]
fn coherent_efficiency_family() {
    let values: Vec<f64> =
        (1..=8).map(|i| coherent_demodulate(&am(0.5, AmBranch::K, 0.1 * i as f64)).unwrap().probability).collect();
    assert!(values[..6].windows(2).all(|w| w[1] > w[0]), "{values:?}");
    assert!(values[7] < values[6]);
}
