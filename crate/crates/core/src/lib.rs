//! Classical simulator for subspace-trained time evolution on spin chains.
//!
//! The pipeline has three stages:
//!
//! 1. [`tepid`] trains a basis-change circuit that diagonalizes a spin-chain
//!    Hamiltonian inside a low-energy (or symmetry) subspace, by minimizing the
//!    free energy of a rank-`m` ensemble with an adaptively grown ansatz.
//! 2. [`times`] reuses that circuit for real-time evolution at fixed depth,
//!    either by re-preparing phased initial states (variant I) or by
//!    sandwiching diagonal phases between the circuit and its inverse
//!    (variant II), together with closed-form fidelity predictions.
//! 3. [`baselines`] and [`bench`] provide exact and Trotter references and the
//!    experiment runners that emit traces for the three studies (six-site
//!    superposition sweep, magnon wave packet, energy transport).
//!
//! [`qcore`] holds the statevector/Pauli machinery, [`models`] the Hamiltonian
//! builders, and [`ansatz`] the operator pools, Givens chains, and depth
//! accounting shared by the stages.

pub mod ansatz;
pub mod baselines;
pub mod bench;
mod error;
pub mod models;
pub mod opt;
pub mod qcore;
pub mod tepid;
pub mod times;

pub use error::{Error, Result};
