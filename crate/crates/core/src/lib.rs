//! Compiler and exact simulator for globally driven dual-species Rydberg
//! wires with superatom devices.
//!
//! The pipeline runs lattice -> basis -> engine -> designer -> primitives ->
//! compiler -> verify. Every stage is deterministic given its inputs and seed.

pub mod basis;
pub mod compiler;
pub mod designer;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod primitives;
pub mod su2;
pub mod verify;

use serde::{Deserialize, Serialize};

pub use basis::{
    enumerate_basis, fidelity, initial_state, Configuration, SparseState, SuperatomEncoding,
};
pub use error::{Error, Result};
pub use lattice::{Arrangement, BlockadeGraph, Mode, Species};

/// Toolkit version string embedded in every emitted artifact.
pub const TOOLKIT_VERSION: &str = concat!("globaldrive ", env!("CARGO_PKG_VERSION"));

/// Provenance block written into JSON outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub toolkit: String,
    pub config_hash: String,
}

impl Stamp {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self {
            toolkit: TOOLKIT_VERSION.to_string(),
            config_hash: config_hash.into(),
        }
    }
}

/// Hex SHA-256 of a canonical serialization.
pub fn config_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
