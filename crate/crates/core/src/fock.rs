//! Truncated photon-number spaces for one to four bosonic modes.
//!
//! Multi-mode amplitudes are stored row-major: the first mode varies slowest.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ONE, ZERO};

/// Smallest cutoff handed out by [`Truncation::adaptive`] unless overridden.
pub const DEFAULT_CUTOFF_FLOOR: usize = 25;

pub const MAX_MODES: usize = 4;

/// Per-mode basis `|0>, ..., |cutoff - 1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Truncation {
    cutoff: usize,
}

impl Truncation {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff(cutoff));
        }
        Ok(Truncation { cutoff })
    }

    /// Cutoff large enough that a coherent or displaced state of amplitude
    /// `|amplitude|` leaves less than `1e-12` of its mass outside:
    /// `|a|^2 + 10 sqrt(|a|^2 + 1) + 15`, never below `floor`.
    pub fn adaptive(amplitude: f64, floor: usize) -> Self {
        let a2 = amplitude * amplitude;
        let needed = (a2 + 10.0 * (a2 + 1.0).sqrt() + 15.0).ceil() as usize;
        Truncation { cutoff: needed.max(floor).max(1) }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}

/// Amplitudes of a single mode over a truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    truncation: Truncation,
    amplitudes: Vec<C64>,
}

impl FockVector {
    pub fn zeros(truncation: Truncation) -> Self {
        FockVector { truncation, amplitudes: vec![ZERO; truncation.cutoff] }
    }

    pub fn from_amplitudes(truncation: Truncation, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != truncation.cutoff {
            return Err(Error::TruncationMismatch { expected: truncation.cutoff, found: amplitudes.len() });
        }
        Ok(FockVector { truncation, amplitudes })
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < 1e-12
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < 1e-300 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        FockVector { truncation: self.truncation, amplitudes: self.amplitudes.iter().map(|a| a * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(self.truncation, other.truncation)?;
        Ok(FockVector {
            truncation: self.truncation,
            amplitudes: self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_same(self.truncation, other.truncation)?;
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    /// Squared norm carried by the basis states `|from>, |from + 1>, ...`.
    pub fn tail_mass(&self, from: usize) -> f64 {
        self.amplitudes.iter().skip(from).map(|z| z.norm_sqr()).sum()
    }
}

/// Basis ket `|n>`.
pub fn number_state(n: usize, truncation: Truncation) -> Result<FockVector> {
    if n >= truncation.cutoff {
        return Err(Error::OutOfRange { index: n, cutoff: truncation.cutoff });
    }
    let mut v = FockVector::zeros(truncation);
    v.amplitudes[n] = ONE;
    Ok(v)
}

fn check_same(a: Truncation, b: Truncation) -> Result<()> {
    if a != b {
        return Err(Error::TruncationMismatch { expected: a.cutoff, found: b.cutoff });
    }
    Ok(())
}

/// Pure state of one to four modes.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl MultiModeState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_MODES {
            return Err(Error::UnsupportedArity(dims.len()));
        }
        if let Some(&bad) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidCutoff(bad));
        }
        let expected: usize = dims.iter().product();
        if amplitudes.len() != expected {
            return Err(Error::TruncationMismatch { expected, found: amplitudes.len() });
        }
        Ok(MultiModeState { dims, amplitudes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mode_count(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn truncation(&self, mode: usize) -> Result<Truncation> {
        self.check_mode(mode)?;
        Truncation::new(self.dims[mode])
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < 1e-300 {
            return Err(Error::ZeroProbability(n));
        }
        Ok(self.scale(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        MultiModeState { dims: self.dims.clone(), amplitudes: self.amplitudes.iter().map(|a| a * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(MultiModeState {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_dims(other)?;
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let ov = self.inner(other)?;
        Ok(ov.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn amplitude(&self, index: &[usize]) -> C64 {
        let strides = strides(&self.dims);
        self.amplitudes[index.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Reorders modes so that new mode `i` is old mode `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = [false; MAX_MODES];
        if order.len() != n {
            return Err(Error::UnsupportedArity(order.len()));
        }
        for &m in order {
            if m >= n || seen[m] {
                return Err(Error::ModeOutOfRange { mode: m, modes: n });
            }
            seen[m] = true;
        }
        let old_strides = strides(&self.dims);
        let dims: Vec<usize> = order.iter().map(|&m| self.dims[m]).collect();
        let offsets = offsets(&self.dims, &old_strides, order);
        let amplitudes = offsets.iter().map(|&o| self.amplitudes[o]).collect();
        Ok(MultiModeState { dims, amplitudes })
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            return Err(Error::ModeOutOfRange { mode, modes: self.dims.len() });
        }
        Ok(())
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dims.len() != other.dims.len() {
            return Err(Error::UnsupportedArity(other.dims.len()));
        }
        for (a, b) in self.dims.iter().zip(&other.dims) {
            if a != b {
                return Err(Error::TruncationMismatch { expected: *a, found: *b });
            }
        }
        Ok(())
    }
}

impl From<FockVector> for MultiModeState {
    fn from(v: FockVector) -> Self {
        MultiModeState { dims: vec![v.truncation.cutoff], amplitudes: v.amplitudes }
    }
}

impl From<&FockVector> for MultiModeState {
    fn from(v: &FockVector) -> Self {
        MultiModeState { dims: vec![v.truncation.cutoff], amplitudes: v.amplitudes.clone() }
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over `modes`, enumerated row-major in the
/// given mode order.
pub(crate) fn offsets(dims: &[usize], strides: &[usize], modes: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &m in modes {
        let mut next = Vec::with_capacity(out.len() * dims[m]);
        for base in &out {
            for k in 0..dims[m] {
                next.push(base + k * strides[m]);
            }
        }
        out = next;
    }
    out
}

fn complement(n: usize, modes: &[usize]) -> Vec<usize> {
    (0..n).filter(|m| !modes.contains(m)).collect()
}

/// Outer product in declared order.
pub fn tensor(states: &[&MultiModeState]) -> Result<MultiModeState> {
    let modes: usize = states.iter().map(|s| s.mode_count()).sum();
    if states.is_empty() || modes > MAX_MODES {
        return Err(Error::UnsupportedArity(modes));
    }
    let mut dims = Vec::with_capacity(modes);
    let mut amplitudes = vec![ONE];
    for s in states {
        dims.extend_from_slice(&s.dims);
        let mut next = Vec::with_capacity(amplitudes.len() * s.amplitudes.len());
        for a in &amplitudes {
            for b in &s.amplitudes {
                next.push(a * b);
            }
        }
        amplitudes = next;
    }
    MultiModeState::new(dims, amplitudes)
}

/// Convenience wrapper over [`tensor`] for single-mode factors.
pub fn tensor_vectors(vectors: &[&FockVector]) -> Result<MultiModeState> {
    let states: Vec<MultiModeState> = vectors.iter().map(|v| MultiModeState::from(*v)).collect();
    let refs: Vec<&MultiModeState> = states.iter().collect();
    tensor(&refs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeOperator {
    truncation: Truncation,
    matrix: CMatrix,
}

impl SingleModeOperator {
    pub fn new(truncation: Truncation, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != truncation.cutoff || matrix.cols() != truncation.cutoff {
            return Err(Error::TruncationMismatch {
                expected: truncation.cutoff,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(SingleModeOperator { truncation, matrix })
    }

    pub fn identity(truncation: Truncation) -> Self {
        SingleModeOperator { truncation, matrix: CMatrix::identity(truncation.cutoff) }
    }

    /// Photon-number parity `diag((-1)^n)`.
    pub fn parity(truncation: Truncation) -> Self {
        let diag: Vec<C64> = (0..truncation.cutoff).map(|n| if n % 2 == 0 { ONE } else { -ONE }).collect();
        SingleModeOperator { truncation, matrix: CMatrix::diagonal(&diag) }
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same(self.truncation, other.truncation)?;
        Ok(SingleModeOperator { truncation: self.truncation, matrix: self.matrix.matmul(&other.matrix) })
    }

    pub fn adjoint(&self) -> Self {
        SingleModeOperator { truncation: self.truncation, matrix: self.matrix.adjoint() }
    }

    /// `max |(U^dagger U - I)_{ij}|` over the leading `interior x interior`
    /// block. Rows near the cutoff feel the truncation and are left out.
    pub fn unitarity_defect(&self, interior: usize) -> f64 {
        let n = interior.min(self.truncation.cutoff);
        let prod = self.matrix.adjoint().matmul(&self.matrix);
        prod.leading_block(n).max_abs_diff(&CMatrix::identity(n))
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        check_same(self.truncation, v.truncation)?;
        Ok(FockVector { truncation: self.truncation, amplitudes: self.matrix.apply(&v.amplitudes) })
    }
}

/// Block of a two-mode operator acting on the span of `basis` kets `|a, b>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    pub basis: Vec<(usize, usize)>,
    pub matrix: CMatrix,
}

/// Operator on two modes, stored as a direct sum of blocks. Kets that belong
/// to no block are annihilated.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeOperator {
    dims: (usize, usize),
    blocks: Vec<OperatorBlock>,
}

impl TwoModeOperator {
    pub fn from_dense(dims: (usize, usize), matrix: CMatrix) -> Result<Self> {
        let n = dims.0 * dims.1;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::TruncationMismatch { expected: n, found: matrix.rows() });
        }
        let basis = (0..dims.0).flat_map(|a| (0..dims.1).map(move |b| (a, b))).collect();
        Ok(TwoModeOperator { dims, blocks: vec![OperatorBlock { basis, matrix }] })
    }

    pub fn from_blocks(dims: (usize, usize), blocks: Vec<OperatorBlock>) -> Result<Self> {
        for b in &blocks {
            if b.matrix.rows() != b.basis.len() || b.matrix.cols() != b.basis.len() {
                return Err(Error::TruncationMismatch { expected: b.basis.len(), found: b.matrix.rows() });
            }
            if let Some(&(x, y)) = b.basis.iter().find(|(x, y)| *x >= dims.0 || *y >= dims.1) {
                return Err(Error::OutOfRange { index: x.max(y), cutoff: dims.0.min(dims.1) });
            }
        }
        Ok(TwoModeOperator { dims, blocks })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn blocks(&self) -> &[OperatorBlock] {
        &self.blocks
    }

    /// `<out|U|inp>`.
    pub fn element(&self, out: (usize, usize), inp: (usize, usize)) -> C64 {
        for b in &self.blocks {
            let i = b.basis.iter().position(|&k| k == out);
            let j = b.basis.iter().position(|&k| k == inp);
            match (i, j) {
                (Some(i), Some(j)) => return b.matrix[(i, j)],
                (None, None) => continue,
                _ => return ZERO,
            }
        }
        ZERO
    }

    /// Dense `d0*d1` square matrix in row-major pair order.
    pub fn to_dense(&self) -> CMatrix {
        let n = self.dims.0 * self.dims.1;
        let mut m = CMatrix::zeros(n, n);
        for b in &self.blocks {
            for (i, &(a0, a1)) in b.basis.iter().enumerate() {
                for (j, &(b0, b1)) in b.basis.iter().enumerate() {
                    m[(a0 * self.dims.1 + a1, b0 * self.dims.1 + b1)] = b.matrix[(i, j)];
                }
            }
        }
        m
    }

    /// Acts on a row-major pair vector of length `d0 * d1`.
    pub fn apply_pair(&self, v: &[C64]) -> Vec<C64> {
        let d1 = self.dims.1;
        let mut out = vec![ZERO; v.len()];
        let mut local = Vec::new();
        for b in &self.blocks {
            local.clear();
            local.extend(b.basis.iter().map(|&(x, y)| v[x * d1 + y]));
            if local.iter().all(|z| *z == ZERO) {
                continue;
            }
            for (i, &(x, y)) in b.basis.iter().enumerate() {
                let mut acc = ZERO;
                for (j, z) in local.iter().enumerate() {
                    acc += b.matrix[(i, j)] * z;
                }
                out[x * d1 + y] += acc;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub enum OperatorRef<'a> {
    Single(&'a SingleModeOperator),
    Two(&'a TwoModeOperator),
}

impl<'a> From<&'a SingleModeOperator> for OperatorRef<'a> {
    fn from(op: &'a SingleModeOperator) -> Self {
        OperatorRef::Single(op)
    }
}

impl<'a> From<&'a TwoModeOperator> for OperatorRef<'a> {
    fn from(op: &'a TwoModeOperator) -> Self {
        OperatorRef::Two(op)
    }
}

/// Applies `op` to the listed target modes, leaving the others untouched.
pub fn apply_operator<'a>(
    state: &MultiModeState,
    op: impl Into<OperatorRef<'a>>,
    targets: &[usize],
) -> Result<MultiModeState> {
    let op = op.into();
    let n = state.mode_count();
    for &m in targets {
        state.check_mode(m)?;
    }
    let st = strides(&state.dims);
    let mut out = vec![ZERO; state.amplitudes.len()];
    match op {
        OperatorRef::Single(op) => {
            let [mode] = targets else {
                return Err(Error::UnsupportedArity(targets.len()));
            };
            let d = state.dims[*mode];
            check_same(op.truncation, Truncation::new(d)?)?;
            let rest = complement(n, &[*mode]);
            let mut local = vec![ZERO; d];
            for base in offsets(&state.dims, &st, &rest) {
                for (k, l) in local.iter_mut().enumerate() {
                    *l = state.amplitudes[base + k * st[*mode]];
                }
                for (k, z) in op.matrix.apply(&local).into_iter().enumerate() {
                    out[base + k * st[*mode]] = z;
                }
            }
        }
        OperatorRef::Two(op) => {
            let [a, b] = targets else {
                return Err(Error::UnsupportedArity(targets.len()));
            };
            if a == b {
                return Err(Error::ModeOutOfRange { mode: *b, modes: n });
            }
            check_same(Truncation::new(op.dims.0)?, Truncation::new(state.dims[*a])?)?;
            check_same(Truncation::new(op.dims.1)?, Truncation::new(state.dims[*b])?)?;
            let rest = complement(n, &[*a, *b]);
            let pair = offsets(&state.dims, &st, &[*a, *b]);
            let mut local = vec![ZERO; pair.len()];
            for base in offsets(&state.dims, &st, &rest) {
                for (l, p) in local.iter_mut().zip(&pair) {
                    *l = state.amplitudes[base + p];
                }
                for (z, p) in op.apply_pair(&local).into_iter().zip(&pair) {
                    out[base + p] = z;
                }
            }
        }
    }
    Ok(MultiModeState { dims: state.dims.clone(), amplitudes: out })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Click {
    Click,
    NoClick,
}

/// Projector applied to one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorSpec {
    /// `|m><m|`; the measured mode is removed from the state.
    Number(usize),
    /// Even or odd photon numbers; the mode is kept.
    Parity(Parity),
    /// Vacuum (no click) or anything else (click); the mode is kept.
    OnOff(Click),
}

impl ProjectorSpec {
    fn keeps(&self, n: usize) -> bool {
        match *self {
            ProjectorSpec::Number(m) => n == m,
            ProjectorSpec::Parity(Parity::Even) => n.is_multiple_of(2),
            ProjectorSpec::Parity(Parity::Odd) => n % 2 == 1,
            ProjectorSpec::OnOff(Click::NoClick) => n == 0,
            ProjectorSpec::OnOff(Click::Click) => n > 0,
        }
    }
}

/// Unnormalized post-measurement state together with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub state: MultiModeState,
}

impl Branch {
    pub fn renormalized(&self) -> Result<MultiModeState> {
        if self.probability < 1e-300 {
            return Err(Error::ZeroProbability(self.probability));
        }
        Ok(self.state.scale(C64::new(1.0 / self.probability.sqrt(), 0.0)))
    }
}

pub fn project_mode(state: &MultiModeState, mode: usize, spec: ProjectorSpec) -> Result<Branch> {
    state.check_mode(mode)?;
    let st = strides(&state.dims);
    match spec {
        ProjectorSpec::Number(m) => {
            if m >= state.dims[mode] {
                return Err(Error::OutOfRange { index: m, cutoff: state.dims[mode] });
            }
            if state.mode_count() == 1 {
                return Err(Error::UnsupportedArity(0));
            }
            let rest = complement(state.mode_count(), &[mode]);
            let amplitudes: Vec<C64> = offsets(&state.dims, &st, &rest)
                .into_iter()
                .map(|base| state.amplitudes[base + m * st[mode]])
                .collect();
            let dims = rest.iter().map(|&r| state.dims[r]).collect();
            let state = MultiModeState { dims, amplitudes };
            Ok(Branch { probability: state.norm_sqr(), state })
        }
        _ => {
            let d = state.dims[mode];
            let amplitudes = state
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, z)| if spec.keeps((i / st[mode]) % d) { *z } else { ZERO })
                .collect();
            let state = MultiModeState { dims: state.dims.clone(), amplitudes };
            Ok(Branch { probability: state.norm_sqr(), state })
        }
    }
}

/// Applies the bra `<v|` to `mode`, removing it.
pub fn contract_mode(state: &MultiModeState, mode: usize, bra: &FockVector) -> Result<MultiModeState> {
    state.check_mode(mode)?;
    check_same(Truncation::new(state.dims[mode])?, bra.truncation)?;
    if state.mode_count() == 1 {
        return Err(Error::UnsupportedArity(0));
    }
    let st = strides(&state.dims);
    let rest = complement(state.mode_count(), &[mode]);
    let amplitudes = offsets(&state.dims, &st, &rest)
        .into_iter()
        .map(|base| {
            bra.amplitudes.iter().enumerate().map(|(k, b)| b.conj() * state.amplitudes[base + k * st[mode]]).sum()
        })
        .collect();
    let dims = rest.iter().map(|&r| state.dims[r]).collect();
    Ok(MultiModeState { dims, amplitudes })
}

/// Projects `mode` onto the normalized vector `v` and removes it.
pub fn project_onto(state: &MultiModeState, mode: usize, v: &FockVector) -> Result<Branch> {
    let v = v.normalized()?;
    let state = contract_mode(state, mode, &v)?;
    Ok(Branch { probability: state.norm_sqr(), state })
}

/// Density matrix over the joint basis of a set of modes, row-major in
/// ascending mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let n: usize = dims.iter().product();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::TruncationMismatch { expected: n, found: matrix.rows() });
        }
        Ok(DensityMatrix { dims, matrix })
    }

    /// `|v><v|` for a pure state vector.
    pub fn pure(dims: Vec<usize>, v: &[C64]) -> Result<Self> {
        let m = CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj());
        Self::new(dims, m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.eigenvalues().into_iter().filter(|&p| p > 1e-15).map(|p| -p * p.log2()).sum()
    }

    /// `<v|rho|v>`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        linalg::inner(v, &self.matrix.apply(v))
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        DensityMatrix { dims: self.dims.clone(), matrix: u.matmul(&self.matrix).matmul(&u.adjoint()) }
    }
}

pub fn partial_trace(state: &MultiModeState, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &m in &keep {
        state.check_mode(m)?;
    }
    let st = strides(&state.dims);
    let kept = offsets(&state.dims, &st, &keep);
    let traced = offsets(&state.dims, &st, &complement(state.mode_count(), &keep));
    let matrix = CMatrix::from_fn(kept.len(), kept.len(), |i, j| {
        traced.iter().map(|t| state.amplitudes[kept[i] + t] * state.amplitudes[kept[j] + t].conj()).sum()
    });
    let dims = keep.iter().map(|&m| state.dims[m]).collect();
    Ok(DensityMatrix { dims, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(c: usize) -> Truncation {
        Truncation::new(c).unwrap()
    }

    #[test]
    fn number_state_basis() {
        let v = number_state(0, tr(4)).unwrap();
        assert_eq!(v.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let v = number_state(3, tr(4)).unwrap();
        assert_eq!(v.amplitudes(), &[ZERO, ZERO, ZERO, ONE]);
        assert_eq!(number_state(4, tr(4)), Err(Error::OutOfRange { index: 4, cutoff: 4 }));
        assert_eq!(Truncation::new(0), Err(Error::InvalidCutoff(0)));
    }

    #[test]
    fn adaptive_cutoff_floor() {
        assert_eq!(Truncation::adaptive(0.0, DEFAULT_CUTOFF_FLOOR).cutoff(), 25);
        assert_eq!(Truncation::adaptive(0.0, 40).cutoff(), 40);
        // 0.04 + 10 sqrt(1.04) + 15 = 25.198
        assert_eq!(Truncation::adaptive(0.2, DEFAULT_CUTOFF_FLOOR).cutoff(), 26);
        // 100 + 10 sqrt(101) + 15 = 215.5
        assert_eq!(Truncation::adaptive(10.0, DEFAULT_CUTOFF_FLOOR).cutoff(), 216);
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = tensor_vectors(&[&number_state(0, tr(3)).unwrap(), &number_state(1, tr(2)).unwrap()]).unwrap();
        assert_eq!(s.dims(), &[3, 2]);
        assert_eq!(s.amplitude(&[0, 1]), ONE);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_rejects_five_modes() {
        let v: MultiModeState = number_state(0, tr(2)).unwrap().into();
        let err = tensor(&[&v, &v, &v, &v, &v]).unwrap_err();
        assert_eq!(err, Error::UnsupportedArity(5));
    }

    #[test]
    fn phase_gate_on_one_photon() {
        let s: MultiModeState = number_state(1, tr(3)).unwrap().into();
        let z = SingleModeOperator::parity(tr(3));
        let out = apply_operator(&s, &z, &[0]).unwrap();
        assert_eq!(out.amplitudes(), &[ZERO, -ONE, ZERO]);
        let id = SingleModeOperator::identity(tr(3));
        assert_eq!(apply_operator(&s, &id, &[0]).unwrap(), s);
    }

    #[test]
    fn apply_operator_errors() {
        let s: MultiModeState = number_state(1, tr(3)).unwrap().into();
        let z = SingleModeOperator::parity(tr(4));
        assert!(matches!(apply_operator(&s, &z, &[0]), Err(Error::TruncationMismatch { .. })));
        assert!(matches!(apply_operator(&s, &z, &[1]), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn number_projection_removes_mode() {
        let s = tensor_vectors(&[&number_state(0, tr(3)).unwrap(), &number_state(1, tr(3)).unwrap()]).unwrap();
        let b = project_mode(&s, 1, ProjectorSpec::Number(1)).unwrap();
        assert!((b.probability - 1.0).abs() < 1e-15);
        assert_eq!(b.state, number_state(0, tr(3)).unwrap().into());
        let b0 = project_mode(&s, 1, ProjectorSpec::Number(0)).unwrap();
        assert_eq!(b0.probability, 0.0);
        assert_eq!(b0.renormalized(), Err(Error::ZeroProbability(0.0)));
    }

    #[test]
    fn bell_like_state_traces_to_half_identity() {
        let h = 1.0 / 2f64.sqrt();
        let s = MultiModeState::new(vec![2, 2], vec![ZERO, C64::new(h, 0.0), C64::new(h, 0.0), ZERO]).unwrap();
        let rho = partial_trace(&s, &[1]).unwrap();
        assert!(rho.matrix().max_abs_diff(&CMatrix::identity(2).scale(C64::new(0.5, 0.0))) < 1e-15);
        assert!((rho.entropy_bits() - 1.0).abs() < 1e-12);
        assert_eq!(partial_trace(&s, &[]), Err(Error::EmptyKeepSet));
    }

    #[test]
    fn permute_modes() {
        let s = tensor_vectors(&[&number_state(2, tr(3)).unwrap(), &number_state(1, tr(2)).unwrap()]).unwrap();
        let p = s.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[2, 3]);
        assert_eq!(p.amplitude(&[1, 2]), ONE);
    }

    #[test]
    fn dense_two_mode_swap() {
        // SWAP on two qubit-sized modes.
        let mut m = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                m[(b * 2 + a, a * 2 + b)] = ONE;
            }
        }
        let op = TwoModeOperator::from_dense((2, 2), m).unwrap();
        let s = tensor_vectors(&[&number_state(1, tr(2)).unwrap(), &number_state(0, tr(2)).unwrap()]).unwrap();
        let out = apply_operator(&s, &op, &[0, 1]).unwrap();
        assert_eq!(out.amplitude(&[0, 1]), ONE);
        assert_eq!(op.element((0, 1), (1, 0)), ONE);
    }
}
