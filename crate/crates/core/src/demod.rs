//! Amplitude-modulated (AM) qubits and the two ways Bob can strip the known
//! factor off them: interaction with a strong coherent state on a highly
//! transmissive splitter, or a swap with a prepared auxiliary photon.
//!
//! The closed-form probabilities here are for the `(k, n) = (0, 1)` qubit,
//! where `A_0 = -alpha` and `A_1 = (1 - alpha^2) / alpha`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::displaced::{amplitude_factor, displaced_number_state, matrix_element};
use crate::error::{Error, Result};
use crate::fock::{
    apply_operator, number_state, partial_trace, project_mode, tensor_vectors, ProjectorSpec, Truncation,
    DEFAULT_CUTOFF_FLOOR,
};
use crate::linalg::{C64, ONE, ZERO};
use crate::optics::{bs_unitary, BeamSplitterSpec};
use crate::protocol::{fidelity_mixed, success_probability, ChannelSpec, DualRail, QubitSpec};
use crate::roots::bisect;

/// Which amplitude factor was divided out in advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmBranch {
    /// `a1` scaled by `1 / A_k`; the outcome `m = k` returns the original.
    K,
    /// `a1` scaled by `1 / A_n`; the outcome `m = n` returns the original.
    N,
}

impl AmBranch {
    fn outcome(self, qubit: &QubitSpec) -> usize {
        match self {
            AmBranch::K => qubit.k,
            AmBranch::N => qubit.n,
        }
    }

    /// The other dominant outcome, whose state is handed to demodulation.
    fn partner(self, qubit: &QubitSpec) -> usize {
        match self {
            AmBranch::K => qubit.n,
            AmBranch::N => qubit.k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Coherent,
    Swap,
}

/// `N (a0 |k> + factor a1 |n>)` with `N = (1 + (|factor|^2 - 1)|a1|^2)^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmQubit {
    pub base: QubitSpec,
    pub branch: AmBranch,
    pub alpha: f64,
    pub factor: C64,
    pub normalization: f64,
}

/// `(1 + (|x|^2 - 1)|a1|^2)^{-1/2}`, the norm fix for `(a0, x a1)`.
pub fn modulated_normalization(x: C64, a1: C64) -> f64 {
    1.0 / (1.0 + (x.norm_sqr() - 1.0) * a1.norm_sqr()).sqrt()
}

impl AmQubit {
    /// Qubit with `a1` multiplied by an arbitrary known `factor`.
    pub fn with_factor(base: QubitSpec, branch: AmBranch, alpha: f64, factor: C64) -> Self {
        let normalization = modulated_normalization(factor, base.a1);
        AmQubit { base, branch, alpha, factor, normalization }
    }

    /// The normalized amplitudes on `(|k>, |n>)`.
    pub fn amplitudes(&self) -> DualRail {
        [self.base.a0 * self.normalization, self.base.a1 * self.factor * self.normalization]
    }

    /// The modulated state as a plain qubit that can be teleported.
    pub fn as_qubit(&self) -> Result<QubitSpec> {
        let [a0, a1] = self.amplitudes();
        QubitSpec::normalizing(self.base.k, self.base.n, a0, a1)
    }
}

/// Prepares `a0 |k> + A^-1 a1 |n>` with `A = A_k` or `A_n` at `alpha`, so that
/// teleporting it and landing on that outcome hands Bob the original qubit.
pub fn make_am_qubit(qubit: &QubitSpec, branch: AmBranch, alpha: f64) -> Result<AmQubit> {
    let m = branch.outcome(qubit);
    let a = amplitude_factor(qubit.k, qubit.n, m, C64::new(alpha, 0.0))?;
    if a.norm() == 0.0 {
        return Err(Error::SingularFactor { k: qubit.n, m });
    }
    Ok(AmQubit::with_factor(*qubit, branch, alpha, ONE / a))
}

/// Teleporting an AM qubit: outcome `m` leaves `(a0, A_m * factor * a1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmOutcome {
    pub m: usize,
    pub probability: f64,
    /// `A_m * factor`; one on the recovering outcome.
    pub factor: C64,
    pub normalization: f64,
    pub recovered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmTeleport {
    pub outcomes: Vec<AmOutcome>,
}

impl AmTeleport {
    /// Probability that Bob receives the original qubit directly.
    pub fn original_probability(&self) -> f64 {
        self.outcomes.iter().filter(|o| o.recovered).map(|o| o.probability).sum()
    }

    pub fn outcome(&self, m: usize) -> Option<&AmOutcome> {
        self.outcomes.iter().find(|o| o.m == m)
    }
}

/// Outcome table for teleporting `am` through channel `ch`, `m = 0..=m_max`.
/// Each probability is `F^2 |c_km|^2 N_AM^2 / N_m^2` times the cat weight.
pub fn teleport_am(am: &AmQubit, ch: &ChannelSpec, m_max: usize) -> Result<AmTeleport> {
    let q = am.as_qubit()?;
    let a = C64::new(am.alpha, 0.0);
    let target = am.branch.outcome(&am.base);
    let mut outcomes = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let probability = success_probability(&q, m, am.alpha, ch)?;
        let factor = match amplitude_factor(am.base.k, am.base.n, m, a) {
            Ok(x) => x * am.factor,
            Err(_) => C64::new(f64::INFINITY, 0.0),
        };
        let normalization = if factor.is_finite() { modulated_normalization(factor, am.base.a1) } else { 0.0 };
        outcomes.push(AmOutcome { m, probability, factor, normalization, recovered: m == target });
    }
    Ok(AmTeleport { outcomes })
}

/// Displacement parameters used by the demodulation formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gammas {
    /// Positive root of `gamma^2 + c gamma - 1 = 0`, `c = (1 - alpha^2)/alpha^2`.
    pub gamma1: f64,
    /// The negative root of the same quadratic; reported, not used.
    pub gamma1_discarded: f64,
    /// `alpha^2 / (1 - alpha^2)`.
    pub gamma2: f64,
    /// `-alpha^2 (1 - alpha^2) / (2 - alpha^2)`.
    pub gamma3: f64,
    /// `-(1 - alpha^2) / (2 - alpha^2)`.
    pub gamma4: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("demodulation parameters need 0 < alpha < 1"))
    }
}

pub fn solve_gammas(alpha: f64) -> Result<Gammas> {
    check_alpha(alpha)?;
    let a2 = alpha * alpha;
    let c = (1.0 - a2) / a2;
    // g^2 + c g - 1 is -1 at 0 and 1/c^2 at 1/c.
    let gamma1 = bisect(|g| g * g + c * g - 1.0, 0.0, 1.0 / c, 1e-15)?;
    Ok(Gammas {
        gamma1,
        gamma1_discarded: -c - gamma1,
        gamma2: a2 / (1.0 - a2),
        gamma3: -a2 * (1.0 - a2) / (2.0 - a2),
        gamma4: -(1.0 - a2) / (2.0 - a2),
    })
}

impl Gammas {
    /// Displacement Bob applies to his rail for each branch: the k-branch
    /// residual is cleaned on a one-photon click with `d = -gamma1`, the
    /// n-branch residual on vacuum with `d = gamma2`.
    pub fn displacement(&self, branch: AmBranch) -> f64 {
        match branch {
            AmBranch::K => -self.gamma1,
            AmBranch::N => self.gamma2,
        }
    }

    /// `|A_1/A_0 * c_01(d)/c_11(d) - 1|` and `|A_0/A_1 * c_00(d)/c_10(d) - 1|`
    /// at the displacements above.
    pub fn condition_residuals(&self, alpha: f64) -> Result<[f64; 2]> {
        let a = C64::new(alpha, 0.0);
        let a0 = amplitude_factor(0, 1, 0, a)?;
        let a1 = amplitude_factor(0, 1, 1, a)?;
        let d1 = C64::new(self.displacement(AmBranch::K), 0.0);
        let d2 = C64::new(self.displacement(AmBranch::N), 0.0);
        let r1 = a1 / a0 * matrix_element(0, 1, d1) / matrix_element(1, 1, d1);
        let r2 = a0 / a1 * matrix_element(0, 0, d2) / matrix_element(1, 0, d2);
        Ok([(r1 - ONE).norm(), (r2 - ONE).norm()])
    }
}

/// Demodulation of the residual left by the partner outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodOutcome {
    pub strategy: Strategy,
    pub branch: AmBranch,
    /// Overall closed-form probability that Bob ends with the original qubit.
    pub probability: f64,
    /// Probability that demodulating the partner residual succeeds.
    pub demod_success: f64,
    /// State left when coherent demodulation fails; swapping leaves nothing.
    pub residual: Option<AmQubit>,
    pub gammas: Option<Gammas>,
}

/// Numerical cross-check of a demodulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemodSimulation {
    /// `P_original + P_partner * demod_success`.
    pub probability: f64,
    pub demod_success: f64,
    /// Fidelity of the recovered state to the original qubit.
    pub fidelity: f64,
}

fn check_base(am: &AmQubit) -> Result<()> {
    if (am.base.k, am.base.n) == (0, 1) {
        Ok(())
    } else {
        Err(Error::InvalidBasis { k: am.base.k, n: am.base.n })
    }
}

/// `e^{-alpha^2} N_AM^2` for the k-branch and `e^{-alpha^2} alpha^2 N_AM^2` for
/// the n-branch.
fn prefactor(am: &AmQubit) -> f64 {
    let a2 = am.alpha * am.alpha;
    let base = (-a2).exp() * am.normalization * am.normalization;
    match am.branch {
        AmBranch::K => base,
        AmBranch::N => base * a2,
    }
}

/// Factor carried by the partner residual.
fn partner_factor(am: &AmQubit) -> Result<C64> {
    let m = am.branch.partner(&am.base);
    Ok(amplitude_factor(am.base.k, am.base.n, m, C64::new(am.alpha, 0.0))? * am.factor)
}

fn teleport_split(am: &AmQubit) -> Result<(f64, f64)> {
    let ch = ChannelSpec::for_basis(1.0, am.base.k, am.base.n)?;
    let table = teleport_am(am, &ch, am.base.n)?;
    let original = table.original_probability();
    let partner = table.outcome(am.branch.partner(&am.base)).map_or(0.0, |o| o.probability);
    Ok((original, partner))
}

/// Coherent demodulation: Bob displaces the rail of his photon by `d` and
/// counts photons there. The closed form is
/// `e^{-a^2} N^2 (1 + e^{-g1^2} a^2 ((1 - g1^2)^2 + g1^2))` for the k-branch and
/// `e^{-a^2} a^2 N^2 (1 + e^{-g2^2} g2^2 / a^2)` for the n-branch.
pub fn coherent_demodulate(am: &AmQubit) -> Result<DemodOutcome> {
    check_base(am)?;
    let g = solve_gammas(am.alpha)?;
    let a2 = am.alpha * am.alpha;
    let bracket = match am.branch {
        AmBranch::K => {
            let g1 = g.gamma1 * g.gamma1;
            1.0 + (-g1).exp() * a2 * ((1.0 - g1).powi(2) + g1)
        }
        AmBranch::N => {
            let g2 = g.gamma2 * g.gamma2;
            1.0 + (-g2).exp() * g2 / a2
        }
    };
    let d = C64::new(g.displacement(am.branch), 0.0);
    let x = partner_factor(am)?;
    let (success_m, fail_m) = match am.branch {
        AmBranch::K => (1, 0),
        AmBranch::N => (0, 1),
    };
    let demod_success = displaced_click_probability(am.base.a0, x * am.base.a1, d, success_m);
    let fail_factor = x / amplitude_factor(0, 1, fail_m, d)?;
    Ok(DemodOutcome {
        strategy: Strategy::Coherent,
        branch: am.branch,
        probability: prefactor(am) * bracket,
        demod_success,
        residual: Some(AmQubit::with_factor(am.base, am.branch, am.alpha, fail_factor)),
        gammas: Some(g),
    })
}

/// Probability of `m` photons on the `|1>`-carrying rail after displacing it
/// by `d`, for the dual-rail state `(b0 |01> + b1 |10>)` normalized.
fn displaced_click_probability(b0: C64, b1: C64, d: C64, m: usize) -> f64 {
    let f2 = (-d.norm_sqr()).exp();
    let norm = b0.norm_sqr() + b1.norm_sqr();
    f2 * ((b0 * matrix_element(1, m, d)).norm_sqr() + (b1 * matrix_element(0, m, d)).norm_sqr()) / norm
}

/// Transmittance of the splitter standing in for an ideal displacement.
pub const SURROGATE_TRANSMITTANCE: f64 = 0.999;

/// Runs coherent demodulation of the partner residual through the Fock-space
/// machinery: an ancilla coherent state of amplitude `-d / r` meets the rail
/// on a splitter of transmittance [`SURROGATE_TRANSMITTANCE`], the rail is
/// counted, and the ancilla is traced out.
pub fn coherent_simulation(am: &AmQubit) -> Result<DemodSimulation> {
    check_base(am)?;
    let g = solve_gammas(am.alpha)?;
    let d = g.displacement(am.branch);
    let success_m = match am.branch {
        AmBranch::K => 1,
        AmBranch::N => 0,
    };
    let x = partner_factor(am)?;
    let spec = BeamSplitterSpec::from_transmittance(SURROGATE_TRANSMITTANCE)?;
    let beta = -d / spec.r();
    let tr_anc = Truncation::adaptive(beta.abs() + 1.0, DEFAULT_CUTOFF_FLOOR);
    let tr_rail = Truncation::new(DEFAULT_CUTOFF_FLOOR)?;
    let two = Truncation::new(2)?;
    let ancilla = displaced_number_state(0, C64::new(beta, 0.0), tr_anc)?;
    let norm = modulated_normalization(x, am.base.a1);
    let b0 = am.base.a0 * norm;
    let b1 = x * am.base.a1 * norm;
    // Modes: ancilla, rail 3 (photon for the b1 term), rail 4 (photon for b0).
    let state = tensor_vectors(&[&ancilla, &number_state(0, two)?, &number_state(1, tr_rail)?])?
        .scale(b0)
        .add(&tensor_vectors(&[&ancilla, &number_state(1, two)?, &number_state(0, tr_rail)?])?.scale(b1))?;
    let mixed = apply_operator(&state, &bs_unitary(spec, (tr_anc.cutoff(), tr_rail.cutoff())), &[0, 2])?;
    let branch = project_mode(&mixed, 2, ProjectorSpec::Number(success_m))?;
    let rho = partial_trace(&branch.state, &[1])?;
    let fidelity = fidelity_mixed(rho.matrix(), &[am.base.a0, am.base.a1]);
    let (original, partner) = teleport_split(am)?;
    Ok(DemodSimulation {
        probability: original + partner * branch.probability,
        demod_success: branch.probability,
        fidelity,
    })
}

/// Swap demodulation: the residual `(a0, x a1)` is joined with the auxiliary
/// `N'(x |0> + |1>)` and projected onto the even-parity pair `|00>, |11>`,
/// which leaves `x (a0 |00> + a1 |11>)`; measuring the auxiliary in the `+-`
/// basis then hands over the original qubit, up to a `Z` on the `-` result.
/// The closed form is
/// `e^{-a^2} N^2 (1 + a^2 (1 - a^2)^2 / (a^4 + (1 - a^2)^2))` (k-branch) and
/// `e^{-a^2} a^2 N^2 (1 + a^2 / (a^4 + (1 - a^2)^2))` (n-branch).
pub fn swap_demodulate(am: &AmQubit) -> Result<DemodOutcome> {
    check_base(am)?;
    let a2 = am.alpha * am.alpha;
    let b2 = (1.0 - a2) * (1.0 - a2);
    let bracket = match am.branch {
        AmBranch::K => 1.0 + a2 * b2 / (a2 * a2 + b2),
        AmBranch::N => 1.0 + a2 / (a2 * a2 + b2),
    };
    let x = partner_factor(am)?;
    let n = modulated_normalization(x, am.base.a1);
    let n_aux2 = 1.0 / (x.norm_sqr() + 1.0);
    Ok(DemodOutcome {
        strategy: Strategy::Swap,
        branch: am.branch,
        probability: prefactor(am) * bracket,
        demod_success: x.norm_sqr() * n * n * n_aux2,
        residual: None,
        gammas: None,
    })
}

/// Success probability and recovered-state fidelity of the swap for a
/// residual `(a0, x a1)`, by explicit 4-dimensional linear algebra.
pub fn swap_projection(a0: C64, a1: C64, x: C64) -> (f64, f64) {
    let n = modulated_normalization(x, a1);
    let am = [a0 * n, x * a1 * n];
    let n_aux = 1.0 / (x.norm_sqr() + 1.0).sqrt();
    let aux = [x * n_aux, C64::new(n_aux, 0.0)];
    // |am> (x) |aux> in the order |00>, |01>, |10>, |11>.
    let joint = [am[0] * aux[0], am[0] * aux[1], am[1] * aux[0], am[1] * aux[1]];
    let even = [joint[0], ZERO, ZERO, joint[3]];
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut probability = 0.0;
    let mut fidelity = 0.0;
    for sign in [1.0, -1.0] {
        // <+-|_aux applied to the second qubit, then Z^(outcome) on the first.
        let v = [even[0] * h + even[1] * h * sign, (even[2] * h + even[3] * h * sign) * sign];
        let p = v[0].norm_sqr() + v[1].norm_sqr();
        probability += p;
        if p > 0.0 {
            fidelity += p * crate::protocol::fidelity2(&v, &[a0, a1]);
        }
    }
    let fidelity = if probability > 0.0 { fidelity / probability } else { f64::NAN };
    (probability, fidelity)
}

/// The swap demodulation run through [`swap_projection`].
pub fn swap_simulation(am: &AmQubit) -> Result<DemodSimulation> {
    check_base(am)?;
    let x = partner_factor(am)?;
    let (p, fidelity) = swap_projection(am.base.a0, am.base.a1, x);
    let (original, partner) = teleport_split(am)?;
    Ok(DemodSimulation { probability: original + partner * p, demod_success: p, fidelity })
}

/// Probabilities that also credit the outcome `m = 2` (a third classical bit).
pub fn higher_order(am: &AmQubit, strategy: Strategy) -> Result<f64> {
    check_base(am)?;
    let a2 = am.alpha * am.alpha;
    let bracket = match (strategy, am.branch) {
        (Strategy::Coherent, AmBranch::K) => {
            let g = solve_gammas(am.alpha)?;
            let (g1, g3) = (g.gamma1 * g.gamma1, g.gamma3 * g.gamma3);
            1.0 + (-g1).exp() * a2 * ((1.0 - g1).powi(2) + g1) + (-g3).exp() * a2 * a2 / 2.0 * ((1.0 - g3).powi(2) + g3)
        }
        (Strategy::Coherent, AmBranch::N) => {
            let g = solve_gammas(am.alpha)?;
            let (g2, g4) = (g.gamma2 * g.gamma2, g.gamma4 * g.gamma4);
            1.0 + (-g2).exp() * g2 / a2 + (-g4).exp() * a2 / 2.0 * g4
        }
        (Strategy::Swap, AmBranch::K) => {
            let b = (1.0 - a2).powi(2);
            let c = (2.0 - a2).powi(2);
            1.0 + a2 * b / (a2 * a2 + b) + a2 * a2 / 2.0 * c / (c + a2 * a2)
        }
        (Strategy::Swap, AmBranch::N) => {
            check_alpha(am.alpha)?;
            let b = (1.0 - a2).powi(2);
            let c = (2.0 - a2).powi(2);
            1.0 + a2 / (a2 * a2 + b) + a2 / 2.0 * c / (b + c)
        }
    };
    Ok(prefactor(am) * bracket)
}

/// Real `alpha` in `[lo, hi]` where `|A_m^{(kn)}(alpha)| = 1`, the point at
/// which outcome `m` hands over the original qubit without modulation.
pub fn unit_factor_alpha(k: usize, n: usize, m: usize, lo: f64, hi: f64) -> Result<f64> {
    let mut failure = None;
    let root = bisect(
        |a| match amplitude_factor(k, n, m, C64::new(a, 0.0)) {
            Ok(f) => f.norm() - 1.0,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-14,
    );
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

/// Ways of combining teleportation and demodulation probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Combination {
    /// Direct teleportation followed by demodulation of both AM outcomes:
    /// `p1 P_k + p2 P_n`.
    Direct { p1: f64, p_k: f64, p2: f64, p_n: f64 },
    /// A pre-modulated qubit: `P_original + p_demod P_partner`.
    Prepared { p_original: f64, p_demod: f64, p_partner: f64 },
    /// Modulation done by Alice with probabilities `q_k`, `q_n`:
    /// `q_k P_t1 + q_n P_t2`.
    AlicePrepared { q_k: f64, p_t1: f64, q_n: f64, p_t2: f64 },
}

pub fn combined_probability(c: Combination) -> Result<f64> {
    let check = |p: f64| {
        if (-1e-12..=1.0 + 1e-9).contains(&p) {
            Ok(p)
        } else {
            Err(Error::Probability(p))
        }
    };
    let value = match c {
        Combination::Direct { p1, p_k, p2, p_n } => check(p1)? * check(p_k)? + check(p2)? * check(p_n)?,
        Combination::Prepared { p_original, p_demod, p_partner } => {
            check(p_original)? + check(p_demod)? * check(p_partner)?
        }
        Combination::AlicePrepared { q_k, p_t1, q_n, p_t2 } => check(q_k)? * check(p_t1)? + check(q_n)? * check(p_t2)?,
    };
    check(value)
}
