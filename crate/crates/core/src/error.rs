use core::fmt;

/// Failures reported by the state, formula and protocol routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A truncation must keep at least the vacuum.
    InvalidCutoff(usize),
    /// A photon number does not fit inside the truncation.
    OutOfRange {
        index: usize,
        cutoff: usize,
    },
    /// Two operands were built on different truncations.
    TruncationMismatch {
        expected: usize,
        found: usize,
    },
    /// Only one to four modes are supported.
    UnsupportedArity(usize),
    ModeOutOfRange {
        mode: usize,
        modes: usize,
    },
    /// Renormalization of a branch whose probability is numerically zero.
    ZeroProbability(f64),
    EmptyKeepSet,
    /// The state leaks more than the allowed mass past the cutoff.
    TailMass {
        mass: f64,
        required_cutoff: usize,
    },
    /// Closed-form rows exist only for l <= 3.
    UnsupportedRow(usize),
    /// The denominator of an amplitude factor vanishes.
    SingularFactor {
        k: usize,
        m: usize,
    },
    ZeroVector,
    /// Qubit basis numbers must satisfy k < n.
    InvalidBasis {
        k: usize,
        n: usize,
    },
    /// Qubit amplitudes are not normalized.
    Unnormalized(f64),
    InvalidBeamSplitter {
        t: f64,
        r: f64,
    },
    /// A parameter lies outside the domain of a formula.
    Domain(&'static str),
    /// A probability argument lies outside [0, 1].
    Probability(f64),
    NoConvergence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCutoff(c) => write!(f, "cutoff must be at least 1, got {c}"),
            Error::OutOfRange { index, cutoff } => {
                write!(f, "photon number {index} out of range for cutoff {cutoff}")
            }
            Error::TruncationMismatch { expected, found } => {
                write!(f, "truncation mismatch: expected cutoff {expected}, found {found}")
            }
            Error::UnsupportedArity(n) => write!(f, "unsupported mode count {n} (1 to 4 allowed)"),
            Error::ModeOutOfRange { mode, modes } => {
                write!(f, "mode index {mode} out of range for a {modes}-mode state")
            }
            Error::ZeroProbability(p) => {
                write!(f, "cannot renormalize a branch with probability {p:e}")
            }
            Error::EmptyKeepSet => write!(f, "partial trace needs at least one kept mode"),
            Error::TailMass { mass, required_cutoff } => {
                write!(f, "tail mass {mass:e} beyond cutoff; a cutoff of at least {required_cutoff} is required")
            }
            Error::UnsupportedRow(l) => write!(f, "no closed-form row for l = {l} (l <= 3)"),
            Error::SingularFactor { k, m } => {
                write!(f, "amplitude factor singular: c_{{{k}{m}}} vanishes")
            }
            Error::ZeroVector => write!(f, "state vector vanishes"),
            Error::InvalidBasis { k, n } => write!(f, "invalid qubit basis ({k}, {n}): need k < n"),
            Error::Unnormalized(norm) => {
                write!(f, "qubit amplitudes have squared norm {norm}, expected 1")
            }
            Error::InvalidBeamSplitter { t, r } => {
                write!(f, "invalid beam splitter t = {t}, r = {r}: need t in (0, 1] and t^2 + r^2 = 1")
            }
            Error::Domain(what) => write!(f, "numeric domain error: {what}"),
            Error::Probability(p) => write!(f, "probability {p} outside [0, 1]"),
            Error::NoConvergence => write!(f, "root finder did not converge"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
