//! Parameter sweeps and table export on top of `dfock-core`.
//!
//! The binary in `main.rs` is a thin clap layer; everything it prints or
//! writes is produced here so the integration tests can call it directly.

pub mod commands;
pub mod figures;
pub mod table;

use std::fmt;

/// A bad argument value that clap cannot catch on its own. Maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Name of the environment variable that replaces the truncation floor.
pub const CUTOFF_ENV: &str = "DFOCK_DEFAULT_CUTOFF";

/// Truncation floor: `--cutoff` wins, then the environment, then the
/// library default.
pub fn cutoff_floor(flag: Option<usize>, env: Option<&str>) -> anyhow::Result<usize> {
    let floor = match (flag, env) {
        (Some(c), _) => c,
        (None, Some(v)) => {
            v.trim().parse().map_err(|_| usage(format!("{CUTOFF_ENV} must be a positive integer, got {v:?}")))?
        }
        (None, None) => dfock_core::fock::DEFAULT_CUTOFF_FLOOR,
    };
    if floor < 2 {
        return Err(usage(format!("cutoff must be at least 2, got {floor}")));
    }
    Ok(floor)
}

/// Exit status for an error: 2 for usage problems, 3 for numeric domain
/// failures, 1 for anything else (I/O).
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use dfock_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::InvalidBasis { .. } | E::Unnormalized(_) | E::InvalidBeamSplitter { .. } | E::InvalidCutoff(_)) => 2,
        Some(_) => 3,
        None => 1,
    }
}
