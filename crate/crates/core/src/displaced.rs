//! Displaced number states `|l, alpha> = D(alpha)|l>` and the expansion
//! coefficients `c_ln(alpha)` defined by `|l, alpha> = F sum_n c_ln(alpha) |n>`
//! with `F = exp(-|alpha|^2 / 2)`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{FockVector, SingleModeOperator, Truncation};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::special::{factorial, ln_binomial, ln_factorials};

/// Tail mass tolerated by [`displaced_number_state`].
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Magnitude below which `c_km` is treated as zero in amplitude factors.
pub const SINGULAR_THRESHOLD: f64 = 1e-14;

/// `F = exp(-|alpha|^2 / 2)`.
pub fn overlap_factor(alpha: C64) -> f64 {
    (-0.5 * alpha.norm_sqr()).exp()
}

/// `c_ln(alpha)` from the finite alternating sum
/// `alpha^(n-l) / sqrt(l! n!) * sum_k (-1)^k C(l,k) |alpha|^(2k) n!/(n-l+k)!`.
///
/// Terms whose falling factorial `n (n-1) ... (n-l+k+1)` vanishes are dropped;
/// for the survivors `alpha^(n-l) |alpha|^(2k)` has non-negative total degree,
/// so the sum stays finite for `n < l` and at `alpha = 0`.
pub fn matrix_element(l: usize, n: usize, alpha: C64) -> C64 {
    let table = ln_factorials(l.max(n));
    element_with_table(&table, l, n, alpha)
}

fn element_with_table(lf: &[f64], l: usize, n: usize, alpha: C64) -> C64 {
    let r = alpha.norm();
    if r == 0.0 {
        return if l == n { ONE } else { ZERO };
    }
    let ln_r = r.ln();
    let half = 0.5 * (lf[l] + lf[n]);
    let mut sum = 0.0;
    for k in 0..=l {
        let len = l - k;
        if len > n {
            continue;
        }
        let degree = (2 * k + n) as f64 - l as f64;
        let ln_ff = lf[n] - lf[n - len];
        let mag = (ln_binomial(lf, l, k) + ln_ff - half + degree * ln_r).exp();
        if k % 2 == 0 {
            sum += mag;
        } else {
            sum -= mag;
        }
    }
    C64::from_polar(sum, (n as f64 - l as f64) * alpha.arg())
}

/// Explicit rows `l = 0..=3` of the coefficient table, written out as
/// polynomials in `m` and `|alpha|^2`.
pub fn matrix_element_closed(l: usize, m: usize, alpha: C64) -> Result<C64> {
    if l > 3 {
        return Err(Error::UnsupportedRow(l));
    }
    if alpha == ZERO {
        return Ok(if l == m { ONE } else { ZERO });
    }
    let x = alpha.norm_sqr();
    let mf = m as f64;
    let poly = match l {
        0 => 1.0,
        1 => mf - x,
        2 => mf * (mf - 1.0) - 2.0 * mf * x + x * x,
        _ => mf * (mf - 1.0) * (mf - 2.0) - 3.0 * mf * (mf - 1.0) * x + 3.0 * mf * x * x - x * x * x,
    };
    let prefactor = alpha.powi(m as i32 - l as i32) / (factorial(m).sqrt() * factorial(l).sqrt());
    Ok(prefactor * poly)
}

/// `c_ln(alpha)` for `l, n < cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElementTable {
    alpha: C64,
    values: CMatrix,
}

impl MatrixElementTable {
    pub fn new(alpha: C64, cutoff: usize) -> Self {
        let lf = ln_factorials(cutoff.max(1));
        let values = CMatrix::from_fn(cutoff, cutoff, |l, n| element_with_table(&lf, l, n, alpha));
        MatrixElementTable { alpha, values }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn cutoff(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, l: usize, n: usize) -> C64 {
        self.values[(l, n)]
    }

    /// `max |F^2 sum_n conj(c_ln) c_kn - delta_lk|` over `l, k <= max_index`.
    pub fn orthonormality_defect(&self, max_index: usize) -> f64 {
        let f2 = overlap_factor(self.alpha).powi(2);
        let cutoff = self.cutoff();
        let mut worst: f64 = 0.0;
        for l in 0..=max_index.min(cutoff - 1) {
            for k in 0..=max_index.min(cutoff - 1) {
                let s: C64 = (0..cutoff).map(|n| self.get(l, n).conj() * self.get(k, n)).sum();
                let delta = if l == k { 1.0 } else { 0.0 };
                worst = worst.max((s * f2 - delta).norm());
            }
        }
        worst
    }
}

/// `|l, alpha>` in the given truncation, rejected when more than
/// [`TAIL_TOLERANCE`] of its mass falls past the cutoff.
pub fn displaced_number_state(l: usize, alpha: C64, truncation: Truncation) -> Result<FockVector> {
    let cutoff = truncation.cutoff();
    if l >= cutoff {
        return Err(Error::OutOfRange { index: l, cutoff });
    }
    let f = overlap_factor(alpha);
    let lf = ln_factorials(cutoff.max(l));
    let amplitudes: Vec<C64> = (0..cutoff).map(|n| element_with_table(&lf, l, n, alpha) * f).collect();
    let kept: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let mass = 1.0 - kept;
    if mass > TAIL_TOLERANCE {
        return Err(Error::TailMass { mass, required_cutoff: required_cutoff(l, alpha) });
    }
    FockVector::from_amplitudes(truncation, amplitudes)
}

/// Smallest cutoff for which `|l, alpha>` loses less than [`TAIL_TOLERANCE`].
pub fn required_cutoff(l: usize, alpha: C64) -> usize {
    let f2 = overlap_factor(alpha).powi(2);
    let limit = l + 64 + (alpha.norm_sqr() * 4.0) as usize + 64 * (alpha.norm() as usize + 1);
    let lf = ln_factorials(limit.max(l));
    let mut kept = 0.0;
    for n in 0..limit {
        kept += element_with_table(&lf, l, n, alpha).norm_sqr() * f2;
        if n >= l && 1.0 - kept <= TAIL_TOLERANCE {
            return n + 1;
        }
    }
    limit
}

/// `D(alpha) = exp(alpha a^dagger - conj(alpha) a)` by exponentiating the
/// truncated tridiagonal generator. Entries near the cutoff carry truncation
/// error; the interior is accurate when the cutoff follows the tail rule.
pub fn displacement_operator(alpha: C64, truncation: Truncation) -> SingleModeOperator {
    let n = truncation.cutoff();
    let mut gen = CMatrix::zeros(n, n);
    for k in 0..n.saturating_sub(1) {
        let s = ((k + 1) as f64).sqrt();
        gen[(k + 1, k)] = alpha * s;
        gen[(k, k + 1)] = -alpha.conj() * s;
    }
    SingleModeOperator::new(truncation, gen.expm()).expect("generator matches truncation")
}

/// `D(alpha)` assembled column by column from `F c_ln(alpha)`.
pub fn displacement_from_elements(alpha: C64, truncation: Truncation) -> SingleModeOperator {
    let table = MatrixElementTable::new(alpha, truncation.cutoff());
    let f = overlap_factor(alpha);
    let m = CMatrix::from_fn(truncation.cutoff(), truncation.cutoff(), |n, l| table.get(l, n) * f);
    SingleModeOperator::new(truncation, m).expect("table matches truncation")
}

/// `A_m^(kn)(alpha) = c_nm(alpha) / c_km(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeFactor {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub alpha: C64,
    pub value: C64,
}

impl AmplitudeFactor {
    pub fn new(k: usize, n: usize, m: usize, alpha: C64) -> Result<Self> {
        let value = amplitude_factor(k, n, m, alpha)?;
        Ok(AmplitudeFactor { k, n, m, alpha, value })
    }
}

pub fn amplitude_factor(k: usize, n: usize, m: usize, alpha: C64) -> Result<C64> {
    if k == n {
        return Ok(ONE);
    }
    let den = matrix_element(k, m, alpha);
    if den.norm() <= SINGULAR_THRESHOLD {
        return Err(Error::SingularFactor { k, m });
    }
    Ok(matrix_element(n, m, alpha) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatSign {
    Plus,
    Minus,
}

/// Superpositions of `|0, -beta>` and `|0, e^{i phi} beta>`:
/// plus: `N (|0,-beta> + e^{-i phi} |0, e^{i phi} beta>)`,
/// minus: `N (|0,-beta> - |0, e^{i phi} beta>)`.
/// At `phi = 0` these are the even and odd cats.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState {
    pub beta: f64,
    pub phi: f64,
    pub sign: CatSign,
    /// Closed-form normalization `N_{+phi}` or `N_{-phi}`.
    pub normalization: f64,
    pub vector: FockVector,
}

/// `<0, -beta | 0, e^{i phi} beta> = exp(-beta^2 (1 + e^{i phi}))`.
pub fn component_overlap(beta: f64, phi: f64) -> C64 {
    (-(ONE + C64::from_polar(1.0, phi)) * beta * beta).exp()
}

/// Closed-form `N_{+phi}` or `N_{-phi}`; `None` when the superposition vanishes.
pub fn cat_normalization(beta: f64, phi: f64, sign: CatSign) -> Option<f64> {
    let ov = component_overlap(beta, phi);
    let inv_sq = match sign {
        CatSign::Plus => 2.0 + 2.0 * (C64::from_polar(1.0, -phi) * ov).re,
        CatSign::Minus => 2.0 - 2.0 * ov.re,
    };
    if inv_sq < 1e-24 {
        None
    } else {
        Some(1.0 / inv_sq.sqrt())
    }
}

/// `N_{+-} = (2 (1 +- exp(-2 beta^2)))^{-1/2}` of the even and odd cats.
pub fn even_odd_normalization(beta: f64, sign: CatSign) -> f64 {
    let e = (-2.0 * beta * beta).exp();
    match sign {
        CatSign::Plus => 1.0 / (2.0 * (1.0 + e)).sqrt(),
        CatSign::Minus => 1.0 / (2.0 * (1.0 - e)).sqrt(),
    }
}

pub fn cat_state(beta: f64, phi: f64, sign: CatSign, truncation: Truncation) -> Result<CatState> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Domain("cat amplitude beta must be non-negative"));
    }
    let normalization = cat_normalization(beta, phi, sign).ok_or(Error::ZeroVector)?;
    let left = displaced_number_state(0, C64::new(-beta, 0.0), truncation)?;
    let right = displaced_number_state(0, C64::from_polar(beta, phi), truncation)?;
    let coeff = match sign {
        CatSign::Plus => C64::from_polar(1.0, -phi),
        CatSign::Minus => -ONE,
    };
    let vector = left.add(&right.scale(coeff))?.scale(C64::new(normalization, 0.0));
    Ok(CatState { beta, phi, sign, normalization, vector })
}

impl CatState {
    /// `<self|other>` of the truncated vectors.
    pub fn overlap(&self, other: &CatState) -> Result<C64> {
        self.vector.inner(&other.vector)
    }
}
