use serde::{Deserialize, Serialize};

use super::pool::PoolOperator;
use crate::qcore::StateVector;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzLayer {
    pub op: PoolOperator,
    pub theta: f64,
}

/// Adaptively grown ansatz `V_A = exp(theta_L g_L) ... exp(theta_1 g_1)`:
/// layer 1 is applied first, newly pushed layers act last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptAnsatz {
    n_qubits: usize,
    layers: Vec<AnsatzLayer>,
}

impl AdaptAnsatz {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            layers: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[AnsatzLayer] {
        &self.layers
    }

    pub fn push(&mut self, op: PoolOperator, theta: f64) {
        assert_eq!(op.n_qubits(), self.n_qubits);
        self.layers.push(AnsatzLayer { op, theta });
    }

    pub fn pop(&mut self) -> Option<PoolOperator> {
        self.layers.pop().map(|l| l.op)
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.theta).collect()
    }

    pub fn set_thetas(&mut self, thetas: &[f64]) -> Result<()> {
        if thetas.len() != self.layers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layers.len(),
                actual: thetas.len(),
            });
        }
        for (l, t) in self.layers.iter_mut().zip(thetas) {
            l.theta = *t;
        }
        Ok(())
    }

    pub fn apply(&self, psi: &StateVector, dagger: bool) -> Result<StateVector> {
        if psi.dim() != 1 << self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                actual: psi.dim(),
            });
        }
        let mut state = psi.clone();
        if dagger {
            for l in self.layers.iter().rev() {
                state = l.op.apply_rotation(-l.theta, &state)?;
            }
        } else {
            for l in &self.layers {
                state = l.op.apply_rotation(l.theta, &state)?;
            }
        }
        Ok(state)
    }

    /// All intermediate states of the forward pass:
    /// `[psi, U_1 psi, U_2 U_1 psi, ..., V_A psi]` (length `L + 1`).
    /// The gradient backward pass in the trainer consumes these.
    pub fn forward_states(&self, psi: &StateVector) -> Result<Vec<StateVector>> {
        let mut states = Vec::with_capacity(self.layers.len() + 1);
        states.push(psi.clone());
        for l in &self.layers {
            let next = l.op.apply_rotation(l.theta, states.last().unwrap())?;
            states.push(next);
        }
        Ok(states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::qeb_pool;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn empty_ansatz_is_identity() {
        let a = AdaptAnsatz::new(3);
        let psi = StateVector::basis_state(3, 5).unwrap();
        let out = a.apply(&psi, false).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn apply_then_dagger_returns_original() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let pool = qeb_pool(4);
        let mut a = AdaptAnsatz::new(4);
        a.push(pool[0].clone(), 0.31);
        a.push(pool[7].clone(), -1.2);
        a.push(pool[2].clone(), 0.77);
        let psi = StateVector::random(4, &mut rng);
        let there = a.apply(&psi, false).unwrap();
        let back = a.apply(&there, true).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-10);
        assert!((there.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layer_order_is_first_pushed_first_applied() {
        let pool = qeb_pool(2);
        let mut a = AdaptAnsatz::new(2);
        // one layer: rotate |01> fully to |10>; then push a second layer that
        // rotates |10> back by -pi/2. Composition must round-trip only if the
        // order is first-pushed-first-applied.
        a.push(pool[0].clone(), std::f64::consts::FRAC_PI_2);
        a.push(pool[0].clone(), -std::f64::consts::FRAC_PI_2);
        let psi = StateVector::basis_state(2, 1).unwrap();
        let out = a.apply(&psi, false).unwrap();
        assert!((out.amplitude(1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_states_has_all_prefixes() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let pool = qeb_pool(3);
        let mut a = AdaptAnsatz::new(3);
        a.push(pool[1].clone(), 0.4);
        a.push(pool[2].clone(), 0.9);
        let psi = StateVector::random(3, &mut rng);
        let states = a.forward_states(&psi).unwrap();
        assert_eq!(states.len(), 3);
        assert!((states[2].amplitudes() - a.apply(&psi, false).unwrap().amplitudes()).norm() < 1e-13);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = AdaptAnsatz::new(3);
        let psi = StateVector::zero_state(4);
        assert!(matches!(
            a.apply(&psi, false),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn serialization_round_trips() {
        let pool = qeb_pool(4);
        let mut a = AdaptAnsatz::new(4);
        a.push(pool[4].clone(), 1.25);
        let json = serde_json::to_string(&a).unwrap();
        let b: AdaptAnsatz = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);
    }
}
