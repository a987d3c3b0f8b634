//! Preparation of spin-S valence-bond-solid states on qubits: spin operators,
//! lattices, a statevector simulator, circuit builders, MPS preparation and
//! resource analysis.

pub mod analysis;
pub mod circuits;
pub mod error;
pub mod lattice;
pub mod mpsprep;
pub mod spinops;
pub mod statesim;

pub use error::{Result, VbsError};
