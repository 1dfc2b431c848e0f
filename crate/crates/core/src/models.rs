//! Spin-chain Hamiltonians and the initial states used in the studies.
//!
//! Sites are 1-based in the physics (`k = 1..N_s`) and live on qubit `k - 1`.

use serde::{Deserialize, Serialize};

use crate::qcore::{C64, Pauli, PauliString, PauliSum, Spectrum, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPattern {
    /// No longitudinal field; `h_z` must be zero.
    None,
    /// `h_z sum_k sigma_k^z`
    Uniform,
    /// `h_z sum_k (-1)^k sigma_k^z`
    Staggered,
}

/// Heisenberg XXZ family:
/// `sum_bonds (XX + YY + J_z ZZ) + field`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzSpec {
    pub n_sites: usize,
    pub j_z: f64,
    pub h_z: f64,
    pub boundary: Boundary,
    pub field: FieldPattern,
}

impl XxzSpec {
    /// Six-site open chain, `J_z = 1.5`, no field.
    pub fn six_site_study() -> Self {
        Self {
            n_sites: 6,
            j_z: 1.5,
            h_z: 0.0,
            boundary: Boundary::Open,
            field: FieldPattern::None,
        }
    }

    /// Open chain with a uniform longitudinal field.
    pub fn longitudinal(n_sites: usize, j_z: f64, h_z: f64) -> Self {
        Self {
            n_sites,
            j_z,
            h_z,
            boundary: Boundary::Open,
            field: FieldPattern::Uniform,
        }
    }

    /// Periodic ring with a staggered longitudinal field.
    pub fn staggered_ring(n_sites: usize, j_z: f64, h_z: f64) -> Self {
        Self {
            n_sites,
            j_z,
            h_z,
            boundary: Boundary::Periodic,
            field: FieldPattern::Staggered,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least two sites, got {}",
                self.n_sites
            )));
        }
        if self.field == FieldPattern::None && self.h_z != 0.0 {
            return Err(Error::InvalidModel(
                "h_z is nonzero but the field pattern is 'none'".into(),
            ));
        }
        Ok(())
    }

    pub fn n_bonds(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n_sites - 1,
            Boundary::Periodic => self.n_sites,
        }
    }

    pub(crate) fn field_sign(&self, site: usize) -> f64 {
        match self.field {
            FieldPattern::None => 0.0,
            FieldPattern::Uniform => 1.0,
            FieldPattern::Staggered => {
                if site % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn hamiltonian(&self) -> Result<PauliSum> {
        self.validate()?;
        let n = self.n_sites;
        let mut h = PauliSum::new(n);
        for k in 1..=self.n_bonds() {
            let a = k - 1;
            let b = k % n;
            for (p, c) in [(Pauli::X, 1.0), (Pauli::Y, 1.0), (Pauli::Z, self.j_z)] {
                h.add_term(c, PauliString::identity(n).with(a, p).with(b, p));
            }
        }
        if self.field != FieldPattern::None && self.h_z != 0.0 {
            for k in 1..=n {
                h.add_term(
                    self.h_z * self.field_sign(k),
                    PauliString::single(n, k - 1, Pauli::Z),
                );
            }
        }
        Ok(h)
    }

    /// On-site energy density `H_k`: the bond starting at site `k` (periodic
    /// wrap) plus this site's field term. For open chains the last site has no
    /// outgoing bond and contributes only its field term. The densities
    /// always sum to the full Hamiltonian.
    pub fn energy_density(&self, site: usize) -> Result<PauliSum> {
        self.validate()?;
        let n = self.n_sites;
        if site < 1 || site > n {
            return Err(Error::InvalidArgument(format!(
                "site {site} out of range 1..={n}"
            )));
        }
        let mut h = PauliSum::new(n);
        if site <= self.n_bonds() {
            let a = site - 1;
            let b = site % n;
            for (p, c) in [(Pauli::X, 1.0), (Pauli::Y, 1.0), (Pauli::Z, self.j_z)] {
                h.add_term(c, PauliString::identity(n).with(a, p).with(b, p));
            }
        }
        if self.field != FieldPattern::None && self.h_z != 0.0 {
            h.add_term(
                self.h_z * self.field_sign(site),
                PauliString::single(n, site - 1, Pauli::Z),
            );
        }
        Ok(h)
    }
}

/// `S_z = sum_j sigma_j^z`.
pub fn total_sz(n_sites: usize) -> PauliSum {
    let mut s = PauliSum::new(n_sites);
    for q in 0..n_sites {
        s.add_term(1.0, PauliString::single(n_sites, q, Pauli::Z));
    }
    s
}

/// Computational labels of the single-magnon basis `sigma_j^x |0...0>`,
/// ordered by site: label for site `j` is the bitstring with only bit
/// `j - 1` set.
pub fn magnon_labels(n_sites: usize) -> Vec<usize> {
    (1..=n_sites).map(|j| 1usize << (j - 1)).collect()
}

/// Gaussian single-magnon wave packet centered at `center` (a 1-based site)
/// with width parameter `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub center: f64,
    pub lambda: f64,
}

impl WavePacketSpec {
    pub fn state(&self, n_sites: usize) -> Result<StateVector> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wave packet width must be positive, got {}",
                self.lambda
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_sites];
        for j in 1..=n_sites {
            let d = j as f64 - self.center;
            amps[1 << (j - 1)] = C64::new((-0.5 * self.lambda * self.lambda * d * d).exp(), 0.0);
        }
        Ok(StateVector::from_amplitudes(n_sites, amps)?.normalized())
    }
}

/// Gaussian-profile bond perturbation. The couplings follow the normal
/// density `J_k = amplitude / (sigma sqrt(2 pi)) * exp(-(k - center)^2 / (2
/// sigma^2))`; `amplitude = 1` is the standard profile, `amplitude = 0`
/// switches the perturbation off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub center: f64,
    pub sigma: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

impl PerturbationSpec {
    pub fn coupling(&self, bond: usize) -> f64 {
        let d = bond as f64 - self.center;
        self.amplitude / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
            * (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// `delta H = sum_k J_k (XX + YY + ZZ + (-1)^k sigma_k^z)` over the bonds
    /// of `base`.
    pub fn delta_hamiltonian(&self, base: &XxzSpec) -> Result<PauliSum> {
        base.validate()?;
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "perturbation width must be positive, got {}",
                self.sigma
            )));
        }
        let n = base.n_sites;
        let mut dh = PauliSum::new(n);
        for k in 1..=base.n_bonds() {
            let jk = self.coupling(k);
            let a = k - 1;
            let b = k % n;
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                dh.add_term(jk, PauliString::identity(n).with(a, p).with(b, p));
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            dh.add_term(jk * sign, PauliString::single(n, a, Pauli::Z));
        }
        Ok(dh)
    }
}

const GROUND_GAP_TOL: f64 = 1e-10;

/// Ground state of `H_base + delta H`, computed exactly. Errors if the
/// perturbed ground state is degenerate (the "the" ground state would be
/// ill-defined). Intended for the transport setup, so `base` must be the
/// staggered periodic model.
pub fn build_perturbed_ground_state(
    base: &XxzSpec,
    pert: &PerturbationSpec,
) -> Result<StateVector> {
    if base.boundary != Boundary::Periodic || base.field != FieldPattern::Staggered {
        return Err(Error::InvalidModel(
            "perturbed ground state is defined for the staggered periodic model".into(),
        ));
    }
    let mut hg = base.hamiltonian()?;
    hg.add_scaled(1.0, &pert.delta_hamiltonian(base)?);
    let s = Spectrum::eigendecompose(&hg)?;
    let gap = s.energies()[1] - s.energies()[0];
    if gap < GROUND_GAP_TOL {
        return Err(Error::DegenerateGroundState { gap });
    }
    Ok(s.eigenvector(0).phase_gauged())
}
