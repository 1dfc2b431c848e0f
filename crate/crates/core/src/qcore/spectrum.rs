use nalgebra::{DMatrix, DVector};
use nalgebra::linalg::SymmetricEigen;

use super::pauli::PauliSum;
use super::state::{C64, StateVector};
use crate::{Error, Result};

/// Full eigendecomposition of a Hermitian operator, eigenvalues ascending.
/// Serves as the exact-evolution oracle for everything else in the crate.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n_qubits: usize,
    energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]`.
    vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn eigendecompose(h: &PauliSum) -> Result<Self> {
        Self::from_dense(h.n_qubits(), h.dense_matrix()?)
    }

    pub fn eigendecompose_capped(h: &PauliSum, cap: usize) -> Result<Self> {
        Self::from_dense(h.n_qubits(), h.dense_matrix_capped(cap)?)
    }

    pub fn from_dense(n_qubits: usize, m: DMatrix<C64>) -> Result<Self> {
        let scale = m.norm().max(1.0);
        let dev = (&m - m.adjoint()).norm();
        if dev > 1e-12 * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let dim = m.nrows();
        let eig = SymmetricEigen::new(m.clone());
        // The QR iteration leaves eigenpair residuals around 1e-8 at this
        // size; one more pass on the (near-diagonal) projected matrix pushes
        // them to machine precision.
        let projected = eig.eigenvectors.adjoint() * &m * &eig.eigenvectors;
        let hermitized = (&projected + projected.adjoint()).scale(0.5);
        let refine = SymmetricEigen::new(hermitized);
        let values = refine.eigenvalues;
        let basis = eig.eigenvectors * refine.eigenvectors;
        // nalgebra does not order the eigenvalues; sort ascending and carry
        // the eigenvector columns along.
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let energies: Vec<f64> = order.iter().map(|&k| values[k]).collect();
        let mut vectors = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &basis.column(src));
        }
        Ok(Self {
            n_qubits,
            energies,
            vectors,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_dvector(self.n_qubits, self.vectors.column(k).into_owned())
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    /// `exp(-i H t) |psi>` via the eigenbasis.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let mut coeffs: DVector<C64> = self.vectors.adjoint() * psi.amplitudes();
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -self.energies[k] * t);
        }
        Ok(StateVector::from_dvector(self.n_qubits, &self.vectors * coeffs))
    }

    /// `<psi_k | psi>` for every eigenvector.
    pub fn overlaps(&self, psi: &StateVector) -> Result<Vec<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let c = self.vectors.adjoint() * psi.amplitudes();
        Ok(c.iter().copied().collect())
    }

    /// Groups indices whose eigenvalues agree within `tol` (contiguous runs in
    /// the sorted order). Used to treat degenerate eigenspaces as one block.
    pub fn degenerate_groups(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.energies[k] - self.energies[k - 1] > tol {
                groups.push(start..k);
                start = k;
            }
        }
        groups
    }

    /// Squared norm of the projection of `psi` onto the eigenspace containing
    /// eigenvalue index `k` (the whole degenerate block, not the single
    /// column, so the value is basis-independent).
    pub fn eigenspace_weight(&self, k: usize, psi: &StateVector, tol: f64) -> Result<f64> {
        let group = self
            .degenerate_groups(tol)
            .into_iter()
            .find(|g| g.contains(&k))
            .expect("every index belongs to a group");
        let mut w = 0.0;
        for j in group {
            w += self.eigenvector(j).inner(psi)?.norm_sqr();
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Boundary, FieldPattern, XxzSpec};
    use crate::qcore::{Pauli, PauliString};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn xxz6() -> PauliSum {
        XxzSpec {
            n_sites: 6,
            j_z: 1.5,
            h_z: 0.0,
            boundary: Boundary::Open,
            field: FieldPattern::None,
        }
        .hamiltonian()
        .unwrap()
    }

    #[test]
    fn two_site_heisenberg_spectrum_is_minus3_1_1_1() {
        let h = XxzSpec {
            n_sites: 2,
            j_z: 1.0,
            h_z: 0.0,
            boundary: Boundary::Open,
            field: FieldPattern::None,
        }
        .hamiltonian()
        .unwrap();
        let s = Spectrum::eigendecompose(&h).unwrap();
        let expect = [-3.0, 1.0, 1.0, 1.0];
        for (e, x) in s.energies().iter().zip(expect) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn xxz6_lowest_energies_match_frozen_values() {
        // Frozen from an independent dense eigensolver run on the 64x64 matrix.
        let s = Spectrum::eigendecompose(&xxz6()).unwrap();
        let expect = [
            -11.70934356357300,
            -9.95511685201133,
            -9.15319418796863,
            -9.15319418796860,
            -7.01360250437891,
            -6.56119052932892,
        ];
        for (k, x) in expect.iter().enumerate() {
            assert!(
                (s.energies()[k] - x).abs() < 1e-9,
                "E_{k}: {} vs {x}",
                s.energies()[k]
            );
        }
    }

    #[test]
    fn spectral_reconstruction_and_orthonormality() {
        let h = xxz6();
        let m = h.dense_matrix().unwrap();
        let s = Spectrum::eigendecompose(&h).unwrap();
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(
            s.dim(),
            s.energies().iter().map(|e| C64::new(*e, 0.0)),
        ));
        let recon = s.vectors() * lam * s.vectors().adjoint();
        assert!((&m - recon).norm() < 1e-10, "V Lambda V^dag must reproduce H");
        let gram = s.vectors().adjoint() * s.vectors();
        let eye = DMatrix::<C64>::identity(s.dim(), s.dim());
        assert!((gram - eye).norm() < 1e-10);
    }

    #[test]
    fn eigenvalues_are_sorted_ascending() {
        let s = Spectrum::eigendecompose(&xxz6()).unwrap();
        for w in s.energies().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = DMatrix::from_element(2, 2, C64::new(0.0, 0.0));
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            Spectrum::from_dense(1, m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn evolve_preserves_norm_and_matches_taylor_short_time() {
        let h = xxz6();
        let s = Spectrum::eigendecompose(&h).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let psi = StateVector::random(6, &mut rng);
        let t = 1e-5;
        let evolved = s.evolve(&psi, t).unwrap();
        assert!((evolved.norm() - 1.0).abs() < 1e-12);
        // first order in t: |psi> - i t H |psi>
        let mut taylor = psi.clone();
        taylor.add_scaled(C64::new(0.0, -t), &h.apply(&psi).unwrap());
        let diff = (evolved.amplitudes() - taylor.amplitudes()).norm();
        assert!(diff < 1e-8, "short-time expansion deviation {diff}");
    }

    #[test]
    fn evolve_at_time_zero_is_identity() {
        let s = Spectrum::eigendecompose(&xxz6()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let psi = StateVector::random(6, &mut rng);
        let out = s.evolve(&psi, 0.0).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn evolve_composes_over_time() {
        let s = Spectrum::eigendecompose(&xxz6()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let psi = StateVector::random(6, &mut rng);
        let a = s.evolve(&s.evolve(&psi, 0.7).unwrap(), 0.9).unwrap();
        let b = s.evolve(&psi, 1.6).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-11);
    }

    #[test]
    fn degenerate_groups_find_the_xxz_pair() {
        let s = Spectrum::eigendecompose(&xxz6()).unwrap();
        let groups = s.degenerate_groups(1e-8);
        let g = groups.iter().find(|g| g.contains(&2)).unwrap();
        assert_eq!(*g, 2..4, "E_3 and E_4 are a degenerate pair");
    }

    #[test]
    fn single_z_spectrum() {
        let h = PauliSum::new(1).with_term(1.0, PauliString::single(1, 0, Pauli::Z));
        let s = Spectrum::eigendecompose(&h).unwrap();
        assert!((s.energies()[0] + 1.0).abs() < 1e-14);
        assert!((s.energies()[1] - 1.0).abs() < 1e-14);
        // |1> is the -1 eigenstate
        assert!(s.eigenvector(0).amplitude(1).norm() > 0.999);
    }
}
