use super::pauli::PauliSum;
use super::state::StateVector;
use crate::{Error, Result};

const WEIGHT_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-8;

/// Rank-`m` mixed state `rho = sum_k w_k |psi_k><psi_k|` with orthonormal
/// `psi_k`. Weights are validated to be a probability distribution.
#[derive(Debug, Clone)]
pub struct DensityEnsemble {
    weights: Vec<f64>,
    states: Vec<StateVector>,
}

impl DensityEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                actual: states.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < -WEIGHT_TOL) || (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::BadWeights { sum });
        }
        let dim = states[0].dim();
        let mut max_dev = 0.0f64;
        for (i, a) in states.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: a.dim(),
                });
            }
            for (j, b) in states.iter().enumerate().skip(i) {
                let g = a.inner(b)?;
                let want = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((g - num_complex::Complex64::new(want, 0.0)).norm());
            }
        }
        if max_dev > ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation: max_dev });
        }
        Ok(Self { weights, states })
    }

    /// Uniform-weight ensemble over computational basis states.
    pub fn from_basis_labels(n_qubits: usize, labels: &[usize], weights: Vec<f64>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &l in labels {
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel { label: l });
            }
        }
        let states = labels
            .iter()
            .map(|&l| StateVector::basis_state(n_qubits, l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights, states)
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &StateVector {
        &self.states[k]
    }

    /// Von Neumann entropy `-sum w ln w` (natural log; `0 ln 0 = 0`).
    pub fn entropy(&self) -> f64 {
        self.weights
            .iter()
            .map(|&w| if w > 1e-300 { -w * w.ln() } else { 0.0 })
            .sum()
    }

    pub fn average_energy(&self, h: &PauliSum) -> Result<f64> {
        let mut e = 0.0;
        for (w, s) in self.weights.iter().zip(&self.states) {
            e += w * h.expectation(s)?;
        }
        Ok(e)
    }

    /// `F = Tr(rho H) - S / beta`. Requires `beta > 0`.
    pub fn free_energy(&self, h: &PauliSum, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        Ok(self.average_energy(h)? - self.entropy() / beta)
    }
}
