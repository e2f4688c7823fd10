//! The teleportation protocol proper: a qubit `a0|k> + a1|n>` in mode 2 is
//! mixed with the coherent half of a hybrid channel
//! `(|0,-beta>_1 |01>_34 + |0,e^{i phi} beta>_1 |10>_34) / sqrt(2)`,
//! Alice measures the cat-state parity of mode 1 and the photon number of
//! mode 2, and Bob undoes a known phase pattern with a Hadamard on his
//! dual-rail photon. What Bob ends up with is the qubit with `a1` scaled by
//! `A_m = c_nm / c_km`.
//!
//! Dual-rail states are stored as `[amp(|01>), amp(|10>)]`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::displaced::{
    amplitude_factor, cat_normalization, cat_state, displaced_number_state, CatSign, CatState, MatrixElementTable,
};
use crate::error::{Error, Result};
use crate::fock::{
    apply_operator, contract_mode, number_state, partial_trace, project_mode, tensor_vectors, FockVector,
    MultiModeState, Parity, ProjectorSpec, Truncation,
};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::optics::{bs_unitary, BeamSplitterSpec};

/// `[amp(|01>), amp(|10>)]`.
pub type DualRail = [C64; 2];

/// Outcomes `m = 0..=DEFAULT_M_MAX` are reported individually; the rest are
/// pooled into a residual.
pub const DEFAULT_M_MAX: usize = 12;

const NORM_TOLERANCE: f64 = 1e-12;

/// The qubit `a0 |k> + a1 |n>` with `k < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    pub k: usize,
    pub n: usize,
    pub a0: C64,
    pub a1: C64,
}

impl QubitSpec {
    pub fn new(k: usize, n: usize, a0: C64, a1: C64) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidBasis { k, n });
        }
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(norm));
        }
        Ok(QubitSpec { k, n, a0, a1 })
    }

    /// Rescales `(a0, a1)` to unit norm.
    pub fn normalizing(k: usize, n: usize, a0: C64, a1: C64) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Self::new(k, n, a0 / norm, a1 / norm)
    }

    /// Real amplitudes with `|a1| = a1_abs` and `a0 = sqrt(1 - a1_abs^2)`.
    pub fn from_magnitude(k: usize, n: usize, a1_abs: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a1_abs) {
            return Err(Error::Probability(a1_abs));
        }
        let a0 = (1.0 - a1_abs * a1_abs).max(0.0).sqrt();
        Self::new(k, n, C64::new(a0, 0.0), C64::new(a1_abs, 0.0))
    }

    pub fn vector(&self, truncation: Truncation) -> Result<FockVector> {
        let mut amps = alloc::vec![ZERO; truncation.cutoff()];
        if self.n >= truncation.cutoff() {
            return Err(Error::OutOfRange { index: self.n, cutoff: truncation.cutoff() });
        }
        amps[self.k] = self.a0;
        amps[self.n] = self.a1;
        FockVector::from_amplitudes(truncation, amps)
    }

    fn difference_is_odd(&self) -> bool {
        (self.n - self.k) % 2 == 1
    }
}

/// Coherent amplitude `beta` and relative phase `phi` of the hybrid channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub beta: f64,
    pub phi: f64,
}

impl ChannelSpec {
    pub fn new(beta: f64, phi: f64) -> Result<Self> {
        if beta < 0.0 || !beta.is_finite() || !phi.is_finite() {
            return Err(Error::Domain("channel amplitude must be finite and non-negative"));
        }
        Ok(ChannelSpec { beta, phi })
    }

    /// Channel whose phase is the one [`phase_for_basis`] picks for `(k, n)`.
    pub fn for_basis(beta: f64, k: usize, n: usize) -> Result<Self> {
        Self::new(beta, phase_for_basis(k, n)?.phi)
    }

    /// `g = -e^{i phi}`, the factor picked up per photon by the second branch.
    pub fn phase_unit(&self) -> C64 {
        -C64::from_polar(1.0, self.phi)
    }

    /// Whether `g^(k-n) = -1`, the condition that lets the Hadamard undo the
    /// controlled phase for this basis.
    pub fn matches(&self, k: usize, n: usize) -> bool {
        (self.phase_unit().powi(k as i32 - n as i32) + ONE).norm() < 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseChoice {
    pub phi: f64,
    /// `(-e^{i phi})^(k-n) = -1` to `1e-12`.
    pub satisfies_condition: bool,
}

/// `0` for odd `n - k`, `pi/2` for `n - k = 4l + 2`, `pi/(4l)` for `n - k = 4l`.
pub fn phase_for_basis(k: usize, n: usize) -> Result<PhaseChoice> {
    if k >= n {
        return Err(Error::InvalidBasis { k, n });
    }
    let d = n - k;
    let phi = if d % 2 == 1 {
        0.0
    } else if d % 4 == 2 {
        FRAC_PI_2
    } else {
        PI / d as f64
    };
    let g = -C64::from_polar(1.0, phi);
    let satisfies_condition = (g.powi(-(d as i32)) + ONE).norm() < 1e-12;
    Ok(PhaseChoice { phi, satisfies_condition })
}

/// The channel on modes `(1, 3, 4)` with dims `(cutoff, 2, 2)`.
pub fn build_hybrid_channel(ch: &ChannelSpec, truncation: Truncation) -> Result<MultiModeState> {
    let rail = Truncation::new(2)?;
    let (zero, one) = (number_state(0, rail)?, number_state(1, rail)?);
    let left = displaced_number_state(0, C64::new(-ch.beta, 0.0), truncation)?;
    let right = displaced_number_state(0, C64::from_polar(ch.beta, ch.phi), truncation)?;
    let a = tensor_vectors(&[&left, &zero, &one])?;
    let b = tensor_vectors(&[&right, &one, &zero])?;
    Ok(a.add(&b)?.scale(C64::new(FRAC_1_SQRT_2, 0.0)))
}

/// Mode cutoffs for a run: mode 1 holds displaced states near `beta`, mode 2
/// near `alpha`, each carrying up to `n` extra photons.
fn cutoffs(qubit: &QubitSpec, alpha: f64, beta: f64, floor: usize, m_max: usize) -> (Truncation, Truncation) {
    let spread = ((qubit.n + 1) as f64).sqrt();
    let c1 = Truncation::adaptive(beta + spread, floor);
    let c2 = Truncation::adaptive(alpha + spread, floor.max(m_max + 6));
    (c1, c2)
}

/// The state after mixing in the `t -> 1` limit, built from its expansion
/// `F/sqrt(2) sum_m [ |0,-beta> u_m |01> + |0,e^{i phi} beta> g^(m-k) v_m |10> ] |m>`
/// with `u_m = a0 c_km + a1 c_nm`, `v_m = a0 c_km + g^(k-n) a1 c_nm`,
/// `g = -e^{i phi}`. Mode order is `(1, 2, 3, 4)`.
pub fn ideal_state(
    qubit: &QubitSpec,
    alpha: f64,
    ch: &ChannelSpec,
    tr1: Truncation,
    tr2: Truncation,
) -> Result<MultiModeState> {
    let a = C64::new(alpha, 0.0);
    // Both displaced basis states must fit in mode 2.
    displaced_number_state(qubit.k, a, tr2)?;
    displaced_number_state(qubit.n, a, tr2)?;
    let left = displaced_number_state(0, C64::new(-ch.beta, 0.0), tr1)?;
    let right = displaced_number_state(0, C64::from_polar(ch.beta, ch.phi), tr1)?;
    let c2 = tr2.cutoff();
    let table = MatrixElementTable::new(a, c2.max(qubit.n + 1));
    let f = (-0.5 * alpha * alpha).exp() * FRAC_1_SQRT_2;
    let g = ch.phase_unit();
    let swap = g.powi(qubit.k as i32 - qubit.n as i32);
    let dims = alloc::vec![tr1.cutoff(), c2, 2, 2];
    let mut amps = alloc::vec![ZERO; tr1.cutoff() * c2 * 4];
    for m in 0..c2 {
        let ck = table.get(qubit.k, m) * qubit.a0;
        let cn = table.get(qubit.n, m) * qubit.a1;
        let u = (ck + cn) * f;
        let v = g.powi(m as i32 - qubit.k as i32) * (ck + swap * cn) * f;
        for n1 in 0..tr1.cutoff() {
            let base = (n1 * c2 + m) * 4;
            amps[base + 1] = left.amplitudes()[n1] * u;
            amps[base + 2] = right.amplitudes()[n1] * v;
        }
    }
    MultiModeState::new(dims, amps)
}

/// One `(j, m)` outcome: `j = 0` for the `Psi_{+phi}` cat, `j = 1` for
/// `Psi_{-phi}`; `m` photons in mode 2.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub j: usize,
    pub m: usize,
    pub probability: f64,
    pub bob_raw: DualRail,
    pub bob_corrected: DualRail,
    /// `N_m (a0 |01> + A_m a1 |10>)`.
    pub am_reference: DualRail,
    /// `|<am_reference|bob_corrected>|^2`; NaN for a branch of zero weight.
    pub fidelity: f64,
    /// `|c_km|` fell below the singular threshold so `A_m` is undefined.
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealRun {
    pub records: Vec<OutcomeRecord>,
    /// Total weight of the outcomes with `m > m_max` inside the truncation.
    pub residual_probability: f64,
    /// `<Psi_i|Psi_j>` of the two cats used for the mode-1 measurement.
    pub gram: [[C64; 2]; 2],
}

impl IdealRun {
    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(|r| r.probability).sum::<f64>() + self.residual_probability
    }

    /// `sum_j P(j, m)`.
    pub fn probability_of(&self, m: usize) -> f64 {
        self.records.iter().filter(|r| r.m == m).map(|r| r.probability).sum()
    }
}

struct CatPair {
    cats: [CatState; 2],
    gram: [[C64; 2]; 2],
    inverse: [[C64; 2]; 2],
}

impl CatPair {
    fn new(ch: &ChannelSpec, tr: Truncation) -> Result<Self> {
        let cats = [cat_state(ch.beta, ch.phi, CatSign::Plus, tr)?, cat_state(ch.beta, ch.phi, CatSign::Minus, tr)?];
        let mut gram = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                gram[i][j] = cats[i].overlap(&cats[j])?;
            }
        }
        let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
        if det.norm() < 1e-14 {
            return Err(Error::Domain("cat states are linearly dependent"));
        }
        let inverse = [[gram[1][1] / det, -gram[0][1] / det], [-gram[1][0] / det, gram[0][0] / det]];
        Ok(CatPair { cats, gram, inverse })
    }

    /// Splits a state whose mode 0 lies in the span of the cats into the
    /// coefficients `y_j` of `sum_j |Psi_j> (x) y_j`.
    fn decompose(&self, state: &MultiModeState) -> Result<[DualRail; 2]> {
        let w0 = dual_rail_of(&contract_mode(state, 0, &self.cats[0].vector)?);
        let w1 = dual_rail_of(&contract_mode(state, 0, &self.cats[1].vector)?);
        let mut y = [[ZERO; 2]; 2];
        for (j, yj) in y.iter_mut().enumerate() {
            for r in 0..2 {
                yj[r] = self.inverse[j][0] * w0[r] + self.inverse[j][1] * w1[r];
            }
        }
        Ok(y)
    }
}

/// Reads `(amp(|01>), amp(|10>))` from a state over two rails.
fn dual_rail_of(state: &MultiModeState) -> DualRail {
    [state.amplitude(&[0, 1]), state.amplitude(&[1, 0])]
}

/// 2x2 block of a rail density matrix (dims `(2, 2)`) on `|01>, |10>`.
fn dual_rail_block(rho: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| rho[(i + 1, j + 1)])
}

pub fn hadamard() -> CMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_major(2, 2, alloc::vec![h, h, h, -h])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::diagonal(&[ONE, -ONE])
}

/// `Z e^{i phi/2} R_Z(phi) = diag(1, -e^{i phi})` on `(|01>, |10>)`.
pub fn phase_gate(phi: f64) -> CMatrix {
    CMatrix::diagonal(&[ONE, -C64::from_polar(1.0, phi)])
}

/// Bob's fix-up for outcome `(j, m)`: Alice's measurement leaves him with
/// `G^(m-k+j) H |Psi_m>` where `G` is [`phase_gate`], so he applies
/// `H G^-(m-k+j)`. At `phi = 0` this is `H Z^(m-k+j)`.
pub fn bob_correction(j: usize, m: usize, k: usize, phi: f64) -> CMatrix {
    let e = m as i32 - k as i32 + j as i32;
    let g = -C64::from_polar(1.0, phi);
    hadamard().matmul(&CMatrix::diagonal(&[ONE, g.powi(-e)]))
}

pub fn apply2(u: &CMatrix, v: &DualRail) -> DualRail {
    let w = u.apply(v);
    [w[0], w[1]]
}

pub fn normalize2(v: &DualRail) -> Option<DualRail> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n == 0.0 {
        None
    } else {
        Some([v[0] / n, v[1] / n])
    }
}

/// `|<a|b>|^2 / (|a|^2 |b|^2)`.
pub fn fidelity2(a: &DualRail, b: &DualRail) -> f64 {
    let ov = a[0].conj() * b[0] + a[1].conj() * b[1];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    ov.norm_sqr() / (na * nb)
}

/// `<v|rho|v> / (tr(rho) |v|^2)`.
pub fn fidelity_mixed(rho: &CMatrix, v: &DualRail) -> f64 {
    let w = rho.apply(v);
    let num = (v[0].conj() * w[0] + v[1].conj() * w[1]).re;
    num / (rho.trace().re * (v[0].norm_sqr() + v[1].norm_sqr()))
}

/// `N_m (a0 |01> + A_m a1 |10>)`, computed as the normalized `(a0 c_km, a1 c_nm)`
/// so that it stays defined where `c_km` vanishes.
pub fn am_reference(qubit: &QubitSpec, m: usize, alpha: f64) -> DualRail {
    let a = C64::new(alpha, 0.0);
    let v = [
        qubit.a0 * crate::displaced::matrix_element(qubit.k, m, a),
        qubit.a1 * crate::displaced::matrix_element(qubit.n, m, a),
    ];
    normalize2(&v).unwrap_or([ZERO, ZERO])
}

fn check_phase(qubit: &QubitSpec, ch: &ChannelSpec) -> Result<()> {
    if ch.matches(qubit.k, qubit.n) {
        Ok(())
    } else {
        Err(Error::Domain("channel phase does not satisfy the basis condition"))
    }
}

/// Runs the `t -> 1` protocol and reports every outcome with `m <= m_max`.
///
/// Mode 1 is decomposed on the two cats through their Gram matrix. For odd
/// `n - k` (`phi = 0`) the cats are orthogonal and this is an ordinary
/// projective parity measurement; for even `n - k` they overlap and the
/// branch weights no longer sum to one.
pub fn run_ideal(qubit: &QubitSpec, alpha: f64, ch: &ChannelSpec, floor: usize, m_max: usize) -> Result<IdealRun> {
    check_phase(qubit, ch)?;
    let (tr1, tr2) = cutoffs(qubit, alpha, ch.beta, floor, m_max);
    let delta = ideal_state(qubit, alpha, ch, tr1, tr2)?;
    let cats = CatPair::new(ch, tr1)?;
    let mut records = Vec::with_capacity(2 * (m_max + 1));
    let mut residual = 0.0;
    for m in 0..tr2.cutoff() {
        let slice = project_mode(&delta, 1, ProjectorSpec::Number(m))?.state;
        let y = cats.decompose(&slice)?;
        if m > m_max {
            residual += y.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum::<f64>();
            continue;
        }
        let reference = am_reference(qubit, m, alpha);
        let singular = amplitude_factor(qubit.k, qubit.n, m, C64::new(alpha, 0.0)).is_err();
        for (j, yj) in y.iter().enumerate() {
            let probability = yj[0].norm_sqr() + yj[1].norm_sqr();
            let (bob_raw, bob_corrected, fidelity) = match normalize2(yj) {
                Some(raw) => {
                    let fixed = apply2(&bob_correction(j, m, qubit.k, ch.phi), &raw);
                    (raw, fixed, fidelity2(&reference, &fixed))
                }
                None => ([ZERO; 2], [ZERO; 2], f64::NAN),
            };
            records.push(OutcomeRecord {
                j,
                m,
                probability,
                bob_raw,
                bob_corrected,
                am_reference: reference,
                fidelity,
                singular,
            });
        }
    }
    Ok(IdealRun { records, residual_probability: residual, gram: cats.gram })
}

/// One `(j, m)` outcome of the finite-transmittance run. Bob's state is mixed
/// in general because mode 1 is traced out after the parity measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRecord {
    pub j: usize,
    pub m: usize,
    pub probability: f64,
    /// Normalized 2x2 density matrix on `(|01>, |10>)`.
    pub bob: CMatrix,
    pub bob_corrected: CMatrix,
    pub am_reference: DualRail,
    /// `<am_reference|bob_corrected|am_reference>`.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRun {
    pub beta: f64,
    pub records: Vec<FiniteRecord>,
    pub residual_probability: f64,
    /// `|<Delta_ideal|Delta_real>|^2` of the full four-mode states.
    pub state_fidelity: f64,
}

impl FiniteRun {
    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(|r| r.probability).sum::<f64>() + self.residual_probability
    }

    pub fn record(&self, j: usize, m: usize) -> Option<&FiniteRecord> {
        self.records.iter().find(|r| r.j == j && r.m == m)
    }
}

/// The protocol through an actual beam splitter of transmittance `t < 1`.
/// The channel amplitude is `beta = alpha t / r`, which grows without bound
/// as `t -> 1`; the mode-1 cutoff grows with it.
pub fn run_finite(qubit: &QubitSpec, alpha: f64, t: f64, floor: usize, m_max: usize) -> Result<FiniteRun> {
    let spec = BeamSplitterSpec::from_transmittance(t)?;
    if spec.r() == 0.0 {
        return Err(Error::Domain("finite run needs t < 1"));
    }
    let beta = alpha * t / spec.r();
    let ch = ChannelSpec::for_basis(beta, qubit.k, qubit.n)?;
    let (tr1, tr2) = cutoffs(qubit, alpha, beta, floor, m_max);
    let rail = Truncation::new(2)?;
    let (zero, one) = (number_state(0, rail)?, number_state(1, rail)?);
    let left = displaced_number_state(0, C64::new(-beta, 0.0), tr1)?;
    let right = displaced_number_state(0, C64::from_polar(beta, ch.phi), tr1)?;
    let q = qubit.vector(tr2)?;
    let input = tensor_vectors(&[&left, &q, &zero, &one])?
        .add(&tensor_vectors(&[&right, &q, &one, &zero])?)?
        .scale(C64::new(FRAC_1_SQRT_2, 0.0));
    let real = apply_operator(&input, &bs_unitary(spec, (tr1.cutoff(), tr2.cutoff())), &[0, 1])?;
    let state_fidelity = ideal_state(qubit, alpha, &ch, tr1, tr2)?.fidelity(&real)?;

    let cats = if qubit.difference_is_odd() { None } else { Some(CatPair::new(&ch, tr1)?) };
    let mut records = Vec::new();
    let mut residual = 0.0;
    for m in 0..tr2.cutoff() {
        let slice = project_mode(&real, 1, ProjectorSpec::Number(m))?.state;
        let branches: [(f64, CMatrix); 2] = match &cats {
            None => {
                let mut out = [(0.0, CMatrix::zeros(2, 2)), (0.0, CMatrix::zeros(2, 2))];
                for (j, parity) in [Parity::Even, Parity::Odd].into_iter().enumerate() {
                    let b = project_mode(&slice, 0, ProjectorSpec::Parity(parity))?;
                    let rho = partial_trace(&b.state, &[1, 2])?;
                    out[j] = (b.probability, dual_rail_block(rho.matrix()));
                }
                out
            }
            Some(cats) => {
                let y = cats.decompose(&slice)?;
                let pure = |v: &DualRail| CMatrix::from_fn(2, 2, |a, b| v[a] * v[b].conj());
                [
                    (y[0][0].norm_sqr() + y[0][1].norm_sqr(), pure(&y[0])),
                    (y[1][0].norm_sqr() + y[1][1].norm_sqr(), pure(&y[1])),
                ]
            }
        };
        if m > m_max {
            residual += branches[0].0 + branches[1].0;
            continue;
        }
        let reference = am_reference(qubit, m, alpha);
        for (j, (probability, rho)) in branches.into_iter().enumerate() {
            let tr = rho.trace().re;
            let bob = if tr > 0.0 { rho.scale(C64::new(1.0 / tr, 0.0)) } else { rho };
            let u = bob_correction(j, m, qubit.k, ch.phi);
            let bob_corrected = u.matmul(&bob).matmul(&u.adjoint());
            let fidelity = if tr > 0.0 { fidelity_mixed(&bob_corrected, &reference) } else { f64::NAN };
            records.push(FiniteRecord { j, m, probability, bob, bob_corrected, am_reference: reference, fidelity });
        }
    }
    Ok(FiniteRun { beta, records, residual_probability: residual, state_fidelity })
}

/// `1/|N_{+phi}|^2 + 1/|N_{-phi}|^2` over `|1 + e^{i phi}|^2`; equal to one at
/// `phi = 0`, above one when the cats overlap.
pub fn cat_weight(ch: &ChannelSpec) -> Result<f64> {
    let den = (ONE + C64::from_polar(1.0, ch.phi)).norm_sqr();
    if den < 1e-24 {
        return Err(Error::Domain("channel phase pi leaves no cat decomposition"));
    }
    let inv = |s| cat_normalization(ch.beta, ch.phi, s).map_or(0.0, |n| 1.0 / (n * n));
    Ok((inv(CatSign::Plus) + inv(CatSign::Minus)) / den)
}

/// `P_m = F^2 (|a0 c_km|^2 + |a1 c_nm|^2) K` with `K` from [`cat_weight`].
///
/// This is `F^2 |c_km|^2 / N_m^2` times the cat weight, written so that it
/// stays finite where `c_km = 0`. Exact for odd `n - k`; for even `n - k` it
/// is the weight of the non-orthogonal cat decomposition and is meaningful
/// only for small `beta`.
pub fn success_probability(qubit: &QubitSpec, m: usize, alpha: f64, ch: &ChannelSpec) -> Result<f64> {
    let a = C64::new(alpha, 0.0);
    let ck = crate::displaced::matrix_element(qubit.k, m, a);
    let cn = crate::displaced::matrix_element(qubit.n, m, a);
    let f2 = (-alpha * alpha).exp();
    Ok(f2 * ((qubit.a0 * ck).norm_sqr() + (qubit.a1 * cn).norm_sqr()) * cat_weight(ch)?)
}

/// `P_k + P_n`, the weight of the two outcomes that dominate for small `alpha`.
pub fn two_outcome_mass(qubit: &QubitSpec, alpha: f64, ch: &ChannelSpec) -> Result<f64> {
    Ok(success_probability(qubit, qubit.k, alpha, ch)? + success_probability(qubit, qubit.n, alpha, ch)?)
}

/// Bob's state before he hears from Alice, three ways.
#[derive(Debug, Clone, PartialEq)]
pub struct BobDensity {
    /// `sum_{j,m} P(j,m) |raw><raw|` over every outcome inside the truncation.
    pub branch_assembled: CMatrix,
    /// Reduced state of the full ideal state on modes 3 and 4.
    pub partial_trace: CMatrix,
    pub closed_form: CMatrix,
}

/// Unconditioned dual-rail state for a `(0, 1)` qubit and `phi = 0`.
pub fn bob_density_matrix(qubit: &QubitSpec, alpha: f64, ch: &ChannelSpec, floor: usize) -> Result<BobDensity> {
    if (qubit.k, qubit.n) != (0, 1) {
        return Err(Error::InvalidBasis { k: qubit.k, n: qubit.n });
    }
    if ch.phi != 0.0 {
        return Err(Error::Domain("unconditioned state is tabulated for phi = 0"));
    }
    let (tr1, tr2) = cutoffs(qubit, alpha, ch.beta, floor, 0);
    let run = run_ideal(qubit, alpha, ch, floor, tr2.cutoff() - 1)?;
    let mut branch_assembled = CMatrix::zeros(2, 2);
    for r in &run.records {
        let v = r.bob_raw;
        branch_assembled = branch_assembled.add(&CMatrix::from_fn(2, 2, |a, b| v[a] * v[b].conj() * r.probability));
    }
    let delta = ideal_state(qubit, alpha, ch, tr1, tr2)?;
    let partial = dual_rail_block(partial_trace(&delta, &[2, 3])?.matrix());
    Ok(BobDensity {
        branch_assembled,
        partial_trace: partial,
        closed_form: bob_density_closed_form(qubit, alpha, ch.beta),
    })
}

/// `rho = I/2 + e^{-2 beta^2} e^{-2 alpha^2} / 2 (x |01><10| + conj(x) |10><01|)`
/// with `x = |a0|^2 + (1 - 4 alpha^2)|a1|^2 - 2 alpha conj(a0) a1 + 2 alpha a0 conj(a1)`.
pub fn bob_density_closed_form(qubit: &QubitSpec, alpha: f64, beta: f64) -> CMatrix {
    let (a0, a1) = (qubit.a0, qubit.a1);
    let x = a0.norm_sqr() + (1.0 - 4.0 * alpha * alpha) * a1.norm_sqr() - a0.conj() * a1 * (2.0 * alpha)
        + a0 * a1.conj() * (2.0 * alpha);
    let off = x * (0.5 * (-2.0 * beta * beta).exp() * (-2.0 * alpha * alpha).exp());
    let half = C64::new(0.5, 0.0);
    CMatrix::from_row_major(2, 2, alloc::vec![half, off, off.conj(), half])
}

/// Distortion factors of the two-term expansion, where the coherent
/// components are replaced by `|0> -+ beta |1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BFactors {
    /// `1 / alpha`.
    pub b01: f64,
    /// `r / (beta t)`.
    pub b10: f64,
    /// `beta r / t`.
    pub alpha: f64,
}

impl BFactors {
    pub fn new(beta: f64, t: f64) -> Result<Self> {
        let spec = BeamSplitterSpec::from_transmittance(t)?;
        if beta.is_nan() || beta <= 0.0 || spec.r() == 0.0 {
            return Err(Error::Domain("two-term model needs beta > 0 and t < 1"));
        }
        let alpha = beta * spec.r() / t;
        Ok(BFactors { b01: 1.0 / alpha, b10: spec.r() / (beta * t), alpha })
    }
}

/// Largest `beta` for which the two-term expansion is treated as reliable.
pub const SMALL_BETA_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplifiedModel {
    pub factors: BFactors,
    /// Corrected Bob state after `|01>_12` (one photon in mode 2).
    pub state_01: DualRail,
    /// Corrected Bob state after `|10>_12` (one photon in mode 1).
    pub state_10: DualRail,
    /// Unnormalized weights of the two outcomes.
    pub weight_01: f64,
    pub weight_10: f64,
    /// `beta` is above [`SMALL_BETA_LIMIT`].
    pub outside_small_beta: bool,
}

/// Two-term model for a `(0, 1)` qubit: the channel is
/// `(|0> - beta|1>)|01> + (|0> + beta|1>)|10>`, mixed with the qubit on the
/// splitter and measured on the single-photon outcomes of modes 1 and 2.
/// Outcome `|01>_12` is corrected with `H Z` (as `m = 1, j = 0`) and
/// `|10>_12` with `H Z` (as `m = 0, j = 1`); the results are
/// `a0|01> + (1/alpha) a1|10>` and `a0|01> - r/(beta t) a1|10>`.
pub fn simplified_model(qubit: &QubitSpec, beta: f64, t: f64) -> Result<SimplifiedModel> {
    if (qubit.k, qubit.n) != (0, 1) {
        return Err(Error::InvalidBasis { k: qubit.k, n: qubit.n });
    }
    let factors = BFactors::new(beta, t)?;
    let spec = BeamSplitterSpec::from_transmittance(t)?;
    let tr = Truncation::new(3)?;
    let rail = Truncation::new(2)?;
    let (zero, one) = (number_state(0, rail)?, number_state(1, rail)?);
    let b = C64::new(beta, 0.0);
    let minus = FockVector::from_amplitudes(tr, alloc::vec![ONE, -b, ZERO])?;
    let plus = FockVector::from_amplitudes(tr, alloc::vec![ONE, b, ZERO])?;
    let q = qubit.vector(tr)?;
    let input = tensor_vectors(&[&minus, &q, &zero, &one])?.add(&tensor_vectors(&[&plus, &q, &one, &zero])?)?;
    let out = apply_operator(&input, &bs_unitary(spec, (3, 3)), &[0, 1])?;
    let outcome = |n1: usize, n2: usize| -> Result<DualRail> {
        let s = project_mode(&out, 0, ProjectorSpec::Number(n1))?.state;
        let s = project_mode(&s, 0, ProjectorSpec::Number(n2))?.state;
        Ok(dual_rail_of(&s))
    };
    let raw01 = outcome(0, 1)?;
    let raw10 = outcome(1, 0)?;
    let fix = hadamard().matmul(&pauli_z());
    let weight = |v: &DualRail| v[0].norm_sqr() + v[1].norm_sqr();
    let state_01 = normalize2(&apply2(&fix, &raw01)).ok_or(Error::ZeroVector)?;
    let state_10 = normalize2(&apply2(&fix, &raw10)).ok_or(Error::ZeroVector)?;
    Ok(SimplifiedModel {
        factors,
        state_01,
        state_10,
        weight_01: weight(&raw01),
        weight_10: weight(&raw10),
        outside_small_beta: beta > SMALL_BETA_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_CUTOFF_FLOOR;

    fn qubit(k: usize, n: usize, a1: f64) -> QubitSpec {
        QubitSpec::from_magnitude(k, n, a1).unwrap()
    }

    #[test]
    fn qubit_validation() {
        assert_eq!(QubitSpec::new(1, 1, ONE, ZERO), Err(Error::InvalidBasis { k: 1, n: 1 }));
        assert!(matches!(QubitSpec::new(0, 1, ONE, ONE), Err(Error::Unnormalized(_))));
        let q = QubitSpec::normalizing(0, 1, ONE, ONE).unwrap();
        assert!((q.a0.re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn phases() {
        assert_eq!(phase_for_basis(0, 1).unwrap().phi, 0.0);
        assert_eq!(phase_for_basis(0, 2).unwrap().phi, FRAC_PI_2);
        assert_eq!(phase_for_basis(1, 2).unwrap().phi, 0.0);
        let p = phase_for_basis(0, 4).unwrap();
        assert!((p.phi - PI / 4.0).abs() < 1e-15);
        for (k, n) in [(0, 1), (0, 2), (0, 3), (0, 4), (1, 9), (2, 10), (0, 6)] {
            assert!(phase_for_basis(k, n).unwrap().satisfies_condition, "({k},{n})");
        }
        assert!(phase_for_basis(2, 1).is_err());
    }

    #[test]
    fn channel_states() {
        let tr = Truncation::new(30).unwrap();
        let s = build_hybrid_channel(&ChannelSpec::new(0.8, 0.0).unwrap(), tr).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        let s = build_hybrid_channel(&ChannelSpec::new(0.0, 0.0).unwrap(), tr).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!((s.amplitude(&[0, 0, 1]) - h).norm() < 1e-15);
        assert!((s.amplitude(&[0, 1, 0]) - h).norm() < 1e-15);
        // Entanglement of the rails grows with beta towards one bit.
        let entropy = |beta: f64| {
            let tr = Truncation::adaptive(beta, DEFAULT_CUTOFF_FLOOR);
            let s = build_hybrid_channel(&ChannelSpec::new(beta, 0.0).unwrap(), tr).unwrap();
            partial_trace(&s, &[1, 2]).unwrap().entropy_bits()
        };
        let (small, large) = (entropy(0.2), entropy(2.0));
        assert!(small < large && (large - 1.0).abs() < 1e-6, "{small} {large}");
    }

    #[test]
    fn corrections() {
        let h = hadamard();
        assert!(bob_correction(0, 0, 0, 0.0).max_abs_diff(&h) < 1e-15);
        assert!(bob_correction(1, 0, 0, 0.0).max_abs_diff(&h.matmul(&pauli_z())) < 1e-15);
        assert!(bob_correction(0, 3, 1, 0.0).max_abs_diff(&h) < 1e-15);
        for (j, m, k, phi) in [(0, 5, 0, 0.3), (1, 0, 2, FRAC_PI_2), (1, 7, 3, 1.1)] {
            let u = bob_correction(j, m, k, phi);
            assert!(u.adjoint().matmul(&u).max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn closed_form_success_probabilities() {
        let ch = ChannelSpec::for_basis(0.8, 0, 1).unwrap();
        let p0 = success_probability(&qubit(0, 1, 0.0), 0, 0.2, &ch).unwrap();
        assert!((p0 - (-0.04f64).exp()).abs() < 1e-15);
        let p1 = success_probability(&qubit(0, 1, 1.0), 1, 0.2, &ch).unwrap();
        assert!((p1 - (-0.04f64).exp() * 0.04 * 23.04).abs() < 1e-14);
        assert!((p1 - 0.88546).abs() < 1e-5);
        let m0 = two_outcome_mass(&qubit(0, 1, 0.0), 0.2, &ch).unwrap();
        assert!((m0 - 0.9992).abs() < 1e-4);
        let m1 = two_outcome_mass(&qubit(0, 1, 1.0), 0.2, &ch).unwrap();
        assert!((m1 - 0.9239).abs() < 1e-3);
        let tiny = two_outcome_mass(&qubit(1, 2, 0.6), 1e-4, &ChannelSpec::for_basis(0.8, 1, 2).unwrap()).unwrap();
        assert!((tiny - 1.0).abs() < 1e-7);
    }

    #[test]
    fn run_with_vacuum_amplitude_only() {
        let q = qubit(0, 1, 0.0);
        let ch = ChannelSpec::for_basis(0.8, 0, 1).unwrap();
        let run = run_ideal(&q, 0.2, &ch, DEFAULT_CUTOFF_FLOOR, DEFAULT_M_MAX).unwrap();
        for r in &run.records {
            assert!(fidelity2(&r.bob_corrected, &[ONE, ZERO]) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn run_rejects_mismatched_phase() {
        let q = qubit(0, 2, 0.5);
        assert!(run_ideal(&q, 0.2, &ChannelSpec::new(0.8, 0.0).unwrap(), 25, 12).is_err());
    }

    #[test]
    fn unconditioned_bob_state() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let q = QubitSpec::new(0, 1, h, h).unwrap();
        let ch = ChannelSpec::new(0.4, 0.0).unwrap();
        let b = bob_density_matrix(&q, 0.2, &ch, DEFAULT_CUTOFF_FLOOR).unwrap();
        assert!(b.branch_assembled.max_abs_diff(&b.closed_form) < 1e-3);
        assert!(b.partial_trace.max_abs_diff(&b.closed_form) < 1e-10);
        assert!((b.branch_assembled.trace().re - 1.0).abs() < 1e-10);
        assert!(b.branch_assembled.hermiticity_defect() < 1e-12);
        let wide = bob_density_matrix(&q, 2.0, &ChannelSpec::new(2.0, 0.0).unwrap(), DEFAULT_CUTOFF_FLOOR).unwrap();
        assert!(wide.branch_assembled[(0, 1)].norm() < 1e-6);
    }

    #[test]
    fn simplified_model_factors() {
        let q = qubit(0, 1, 0.6);
        let m = simplified_model(&q, 0.1, 0.99).unwrap();
        let r = (1.0f64 - 0.99 * 0.99).sqrt();
        assert!((m.factors.alpha - 0.1 * r / 0.99).abs() < 1e-12);
        assert!((m.factors.b01 - 1.0 / m.factors.alpha).abs() < 1e-9);
        assert!((m.factors.b10 - r / (0.1 * 0.99)).abs() < 1e-12);
        // a0|01> + B01 a1|10> and a0|01> - B10 a1|10>.
        let s01 = [q.a0, q.a1 * m.factors.b01];
        let s10 = [q.a0, -q.a1 * m.factors.b10];
        assert!(fidelity2(&m.state_01, &s01) > 1.0 - 1e-12);
        assert!(fidelity2(&m.state_10, &s10) > 1.0 - 1e-12);
        let vac = simplified_model(&qubit(0, 1, 0.0), 0.1, 0.99).unwrap();
        assert!(fidelity2(&vac.state_01, &[ONE, ZERO]) > 1.0 - 1e-15);
        assert!(fidelity2(&vac.state_10, &[ONE, ZERO]) > 1.0 - 1e-15);
        assert!(simplified_model(&q, 0.5, 0.99).unwrap().outside_small_beta);
    }
}
