//! Two-mode beam splitters on truncated Fock spaces and the highly
//! transmissive limit in which mixing with a strong coherent state acts as a
//! displacement on the other port.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::displaced::{displaced_number_state, displacement_from_elements, matrix_element, overlap_factor};
use crate::error::{Error, Result};
use crate::fock::{
    apply_operator, tensor_vectors, FockVector, OperatorBlock, Truncation, TwoModeOperator, DEFAULT_CUTOFF_FLOOR,
};
use crate::linalg::{CMatrix, C64};
use crate::protocol::QubitSpec;
use crate::special::{ln_binomial, ln_factorials, ln_pow};

/// Mode transformation `a1 -> t a1 - r a2`, `a2 -> r a1 + t a2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    t: f64,
    r: f64,
}

impl BeamSplitterSpec {
    /// Accepts any sign of `r` so that the inverse splitter can be expressed;
    /// `t` must lie in `(0, 1]` and `t^2 + r^2 = 1` to `1e-12`.
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) || (t * t + r * r - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidBeamSplitter { t, r });
        }
        Ok(BeamSplitterSpec { t, r })
    }

    pub fn from_transmittance(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidBeamSplitter { t, r: f64::NAN });
        }
        Self::new(t, (1.0 - t * t).max(0.0).sqrt())
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The splitter with `r -> -r`, which undoes this one.
    pub fn inverse(&self) -> Self {
        BeamSplitterSpec { t: self.t, r: -self.r }
    }
}

/// Fock-space lift of the splitter on modes with cutoffs `dims`.
///
/// `U |n1, n2> = (t a1^+ - r a2^+)^n1 (r a1^+ + t a2^+)^n2 |0,0> / sqrt(n1! n2!)`,
/// which gives
/// `<m1,m2|U|n1,n2> = sqrt(m1! m2! / (n1! n2!)) sum_i C(n1,i) C(n2,m1-i)
///  t^i (-r)^(n1-i) r^(m1-i) t^(n2-m1+i)`.
/// Each block collects the kets of one total photon number that fit in the
/// window; amplitude leaving the window is dropped.
pub fn bs_unitary(spec: BeamSplitterSpec, dims: (usize, usize)) -> TwoModeOperator {
    let (d0, d1) = dims;
    let top = d0 + d1 - 2;
    let lf = ln_factorials(top);
    let ln_t = spec.t.ln();
    let ln_r = spec.r.abs().ln();
    let r_negative = spec.r < 0.0;
    let mut blocks = Vec::with_capacity(top + 1);
    for total in 0..=top {
        let basis: Vec<(usize, usize)> =
            (total.saturating_sub(d1 - 1)..=total.min(d0 - 1)).map(|a| (a, total - a)).collect();
        let matrix = CMatrix::from_fn(basis.len(), basis.len(), |row, col| {
            let (m1, m2) = basis[row];
            let (n1, n2) = basis[col];
            let norm = 0.5 * ((lf[m1] - lf[n1]) + (lf[m2] - lf[n2]));
            let lo = m1.saturating_sub(n2);
            let hi = n1.min(m1);
            let mut sum = 0.0;
            for i in lo..=hi {
                let r_power = n1 - i + m1 - i;
                let ln_mag = ln_binomial(&lf, n1, i)
                    + ln_binomial(&lf, n2, m1 - i)
                    + ln_pow(ln_t, i + n2 + i - m1)
                    + ln_pow(ln_r, r_power)
                    + norm;
                let mut negative = (n1 - i) % 2 == 1;
                if r_negative && r_power % 2 == 1 {
                    negative = !negative;
                }
                let term = ln_mag.exp();
                sum += if negative { -term } else { term };
            }
            C64::new(sum, 0.0)
        });
        blocks.push(OperatorBlock { basis, matrix });
    }
    TwoModeOperator::from_blocks(dims, blocks).expect("blocks lie inside the window")
}

/// `|<psi_ideal|psi_real>|^2` for a coherent state `|beta>` mixed with
/// `target` on a splitter of transmittance `t`, where the ideal outcome keeps
/// `|beta>` in mode 1 and displaces the target by `-alpha`, `alpha = beta r / t`.
pub fn htbs_displacement_check(beta: f64, target: &FockVector, t: f64) -> Result<f64> {
    let spec = BeamSplitterSpec::from_transmittance(t)?;
    let tr1 = Truncation::adaptive(beta, DEFAULT_CUTOFF_FLOOR);
    let tr2 = target.truncation();
    let coherent = displaced_number_state(0, C64::new(beta, 0.0), tr1)?;
    let input = tensor_vectors(&[&coherent, target])?;
    let real = apply_operator(&input, &bs_unitary(spec, (tr1.cutoff(), tr2.cutoff())), &[0, 1])?;
    let alpha = beta * spec.r() / spec.t();
    let shifted = displacement_from_elements(C64::new(-alpha, 0.0), tr2).apply(target)?;
    let ideal = tensor_vectors(&[&coherent, &shifted])?;
    ideal.fidelity(&real)
}

/// Estimate of the overlap between the finite-`t` front end and its `t = 1`
/// limit for a `(0, 1)` qubit:
/// `F^4 exp(-beta^2 (1 - 1/t)^2) / 4 * (sum_m t^m |f_m(-alpha)|^2 + sum_m t^m |f_m(alpha)|^2)^2`
/// with `f_m(x) = a0 c_0m(x) + a1 c_1m(x)` and `beta = alpha t / r`.
pub fn front_end_fidelity(qubit: &QubitSpec, alpha: f64, t: f64) -> Result<f64> {
    if (qubit.k, qubit.n) != (0, 1) {
        return Err(Error::InvalidBasis { k: qubit.k, n: qubit.n });
    }
    let spec = BeamSplitterSpec::from_transmittance(t)?;
    let damping = if spec.r() == 0.0 {
        1.0
    } else {
        let beta = alpha * t / spec.r();
        (-(beta * (1.0 - 1.0 / t)).powi(2)).exp()
    };
    let terms = Truncation::adaptive(alpha, 60).cutoff();
    let f = |x: f64, m: usize| {
        let x = C64::new(x, 0.0);
        qubit.a0 * matrix_element(0, m, x) + qubit.a1 * matrix_element(1, m, x)
    };
    let mut sum = 0.0;
    let mut tm = 1.0;
    for m in 0..terms {
        sum += tm * (f(-alpha, m).norm_sqr() + f(alpha, m).norm_sqr());
        tm *= t;
    }
    let f4 = overlap_factor(C64::new(alpha, 0.0)).powi(4);
    Ok(f4 * damping / 4.0 * sum * sum)
}

/// Maximum `|<U^dagger U - I>|` over the blocks whose total photon number is
/// at most `max_total`; those blocks are complete inside the window.
pub fn interior_unitarity_defect(op: &TwoModeOperator, max_total: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for b in op.blocks() {
        let total = b.basis.first().map(|(x, y)| x + y).unwrap_or(0);
        if total > max_total {
            continue;
        }
        let n = b.basis.len();
        let prod = b.matrix.adjoint().matmul(&b.matrix);
        worst = worst.max(prod.max_abs_diff(&CMatrix::identity(n)));
    }
    worst
}
