use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = Complex64;

/// Pure state on `n_qubits` qubits, stored as a dense amplitude vector of
/// length `2^n_qubits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: DVector<C64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0).expect("index 0 is always in range")
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::LabelOutOfRange { label: index, dim });
        }
        let mut amps = DVector::from_element(dim, C64::new(0.0, 0.0));
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: amps.len(),
            });
        }
        Ok(Self {
            n_qubits,
            amps: DVector::from_vec(amps),
        })
    }

    pub(crate) fn from_dvector(n_qubits: usize, amps: DVector<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    /// Haar-ish random state: normalized vector of complex standard normals.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let amps = DVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self { n_qubits, amps }.normalized()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps /= C64::new(n, 0.0);
        }
        self
    }

    /// `<self|other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Fixes the global phase so the largest-magnitude amplitude is real and
    /// positive; ties broken by the lowest index. Used when serializing or
    /// comparing states where the phase is meaningless.
    pub fn phase_gauged(mut self) -> Self {
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            let m = a.norm_sqr();
            if m > best_mag + 1e-30 {
                best_mag = m;
                best = i;
            }
        }
        let a = self.amps[best];
        if a.norm() > 0.0 {
            let phase = a / a.norm();
            self.amps /= phase;
        }
        self
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.amps *= c;
        self
    }

    pub fn add_scaled(&mut self, c: C64, other: &Self) {
        self.amps.axpy(c, &other.amps, C64::new(1.0, 0.0));
    }

    /// `<sigma_z>` on `qubit`.
    pub fn sigma_z_expectation(&self, qubit: usize) -> f64 {
        let mut acc = 0.0;
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b >> qubit) & 1 == 0 { 1.0 } else { -1.0 };
            acc += sign * a.norm_sqr();
        }
        acc
    }
}
