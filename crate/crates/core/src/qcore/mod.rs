//! Statevectors, Pauli operators, spectra, and mixed-state ensembles.
//!
//! Conventions used throughout the crate:
//! - qubit `q` is bit `q` of the basis index (qubit 0 is the least
//!   significant bit), so a ket written `|1101>` is basis index 13;
//! - `|0>` is the sigma_z = +1 eigenstate;
//! - lattice site `k` (1-based in the physics) lives on qubit `k - 1`.

mod ensemble;
mod pauli;
mod spectrum;
mod state;

pub use ensemble::DensityEnsemble;
pub use pauli::{CompiledPauliSum, Pauli, PauliString, PauliSum, DENSE_QUBIT_CAP};
pub use spectrum::Spectrum;
pub use state::{C64, StateVector};
