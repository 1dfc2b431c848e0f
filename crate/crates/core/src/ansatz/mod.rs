//! Circuit primitives: operator pools, the adaptive ansatz, modified Givens
//! chains, diagonal phase unitaries, and two-qubit depth accounting.

mod adapt;
mod depth;
mod givens;
mod pool;

pub use adapt::{AdaptAnsatz, AnsatzLayer};
pub use depth::{DepthModel, Variant};
pub use givens::{
    amplitudes_from_angles, angles_from_amplitudes, chain_steps, diagonal_phase_unitary,
    givens_chain, DiagonalUnitary, GivensStep,
};
pub use pool::{pauli_pool, pool_hash, qeb_pool, PoolOperator};
pub(crate) use pool::hex_digest;
