#![no_std]
//! Truncated Fock-space simulation of hybrid teleportation, where a qubit
//! encoded in two displaced number states is moved onto a dual-rail photonic
//! qubit through a beam splitter, a photon-number measurement and a cat-state
//! basis measurement.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod demod;
pub mod displaced;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod optics;
pub mod protocol;
pub mod roots;
pub mod special;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
