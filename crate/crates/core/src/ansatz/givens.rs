use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::qcore::StateVector;
use crate::{Error, Result};

/// Modified Givens rotation `G^(k,k+1)(theta, phi)
///   = exp(i theta P) exp(i phi gamma) exp(-i theta P)`
/// with `gamma = i|c_k><c_k+1| - i|c_k+1><c_k|` and `P = |c_k><c_k|`.
/// On the ordered pair `(c_k, c_{k+1})` this is the 2x2 block
/// `[[cos phi, -e^{i theta} sin phi], [e^{-i theta} sin phi, cos phi]]`
/// and the identity elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GivensStep {
    /// `(c_k, c_{k+1})`: basis labels the rotation mixes.
    pub pair: (usize, usize),
    /// `phi`: rotation angle from the hyperspherical map.
    pub rotation: f64,
    /// `theta`: phase conjugated in via `P`.
    pub phase: f64,
}

impl GivensStep {
    pub fn apply(&self, psi: &mut StateVector) -> Result<()> {
        let dim = psi.dim();
        let (ck, ck1) = self.pair;
        if ck >= dim {
            return Err(Error::LabelOutOfRange { label: ck, dim });
        }
        if ck1 >= dim {
            return Err(Error::LabelOutOfRange { label: ck1, dim });
        }
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let up = C64::from_polar(1.0, self.phase);
        let a = psi.amplitude(ck);
        let b = psi.amplitude(ck1);
        psi.amplitudes_mut()[ck] = c * a - s * up * b;
        psi.amplitudes_mut()[ck1] = s * up.conj() * a + c * b;
        Ok(())
    }
}

/// Applies the chain `G^(m-1,m) ... G^(1,2)` to `psi0` (step k = 1 first).
pub fn givens_chain(steps: &[GivensStep], psi0: &StateVector) -> Result<StateVector> {
    let mut psi = psi0.clone();
    for step in steps {
        step.apply(&mut psi)?;
    }
    Ok(psi)
}

/// Assembles the step list for the label chain `c_1 .. c_m` from the angle
/// schedules: step `k` mixes `(c_k, c_{k+1})` with rotation `phi_k` and phase
/// `theta_{k+1}` (`theta_1` is pinned to zero and never enters a step).
pub fn chain_steps(labels: &[usize], phi: &[f64], theta: &[f64]) -> Vec<GivensStep> {
    assert_eq!(phi.len() + 1, labels.len());
    assert_eq!(theta.len(), labels.len());
    (0..phi.len())
        .map(|i| GivensStep {
            pair: (labels[i], labels[i + 1]),
            rotation: phi[i],
            phase: theta[i + 1],
        })
        .collect()
}

/// Inverts the hyperspherical amplitude map and builds the phase schedule for
/// the time-evolved chain target `sum_k rhat_k e^{i xi_k(t)} |c_k>` with
/// `xi_k(t) = (zeta_k - zeta_1) - (E_k - E_1) t`.
///
/// `r` holds nonnegative magnitudes (renormalized internally, so the caller
/// may pass unnormalized projections); `zeta` the coefficient phases;
/// `energies` the subspace energies. Returns `(phi, theta)` with `phi` of
/// length `m - 1` and `theta` of length `m`, `theta[0] = 0`.
///
/// Boundary handling: a zero prefix of `r` forces `phi = pi/2` there (all
/// weight passed down the chain); a zero suffix gives trailing `phi = 0`.
pub fn angles_from_amplitudes(
    r: &[f64],
    zeta: &[f64],
    energies: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = r.len();
    if m == 0 {
        return Err(Error::ZeroAmplitudes);
    }
    if zeta.len() != m || energies.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: zeta.len().min(energies.len()),
        });
    }
    if let Some(bad) = r.iter().find(|x| **x < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude magnitudes must be nonnegative, got {bad}"
        )));
    }
    let total: f64 = r.iter().map(|x| x * x).sum();
    if total <= 0.0 {
        return Err(Error::ZeroAmplitudes);
    }
    let scale = total.sqrt();
    // tail[j] = norm of (rhat_j, ..., rhat_m); computed backwards.
    let mut tails = vec![0.0f64; m + 1];
    for j in (0..m).rev() {
        let rj = r[j] / scale;
        tails[j] = (tails[j + 1] * tails[j + 1] + rj * rj).sqrt();
    }
    let phi: Vec<f64> = (0..m - 1)
        .map(|j| f64::atan2(tails[j + 1], r[j] / scale))
        .collect();
    let xi: Vec<f64> = (0..m)
        .map(|k| (zeta[k] - zeta[0]) - (energies[k] - energies[0]) * t)
        .collect();
    let mut theta = vec![0.0f64; m];
    for k in 1..m {
        theta[k] = xi[k - 1] - xi[k];
    }
    Ok((phi, theta))
}

/// Forward hyperspherical map: amplitudes realized by a rotation schedule,
/// `a_j = (prod_{k<j} sin phi_k) cos phi_j`, last entry all-sines.
pub fn amplitudes_from_angles(phi: &[f64]) -> Vec<f64> {
    let m = phi.len() + 1;
    let mut amps = Vec::with_capacity(m);
    let mut sines = 1.0;
    for &p in phi {
        amps.push(sines * p.cos());
        sines *= p.sin();
    }
    amps.push(sines);
    amps
}

/// Diagonal unitary `D(t) = sum_k e^{-i E_k t} |c_k><c_k| + identity on every
/// unlisted basis state` (their effective energy is zero).
#[derive(Debug, Clone)]
pub struct DiagonalUnitary {
    diag: Vec<C64>,
}

pub fn diagonal_phase_unitary(
    n_qubits: usize,
    labels: &[usize],
    energies: &[f64],
    t: f64,
) -> Result<DiagonalUnitary> {
    if labels.len() != energies.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: energies.len(),
        });
    }
    let dim = 1usize << n_qubits;
    let mut diag = vec![C64::new(1.0, 0.0); dim];
    let mut seen = std::collections::HashSet::new();
    for (&l, &e) in labels.iter().zip(energies) {
        if l >= dim {
            return Err(Error::LabelOutOfRange { label: l, dim });
        }
        if !seen.insert(l) {
            return Err(Error::DuplicateLabel { label: l });
        }
        diag[l] = C64::from_polar(1.0, -e * t);
    }
    Ok(DiagonalUnitary { diag })
}

impl DiagonalUnitary {
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.diag.len() {
            return Err(Error::DimensionMismatch {
                expected: self.diag.len(),
                actual: psi.dim(),
            });
        }
        let mut out = psi.clone();
        for (i, d) in self.diag.iter().enumerate() {
            out.amplitudes_mut()[i] *= d;
        }
        Ok(out)
    }

    pub fn phase(&self, index: usize) -> C64 {
        self.diag[index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn step_matrix(step: &GivensStep, dim: usize) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for col in 0..dim {
            let mut e = StateVector::basis_state(dim.trailing_zeros() as usize, col).unwrap();
            step.apply(&mut e).unwrap();
            for row in 0..dim {
                m[(row, col)] = e.amplitude(row);
            }
        }
        m
    }

    #[test]
    fn realized_step_is_unitary_and_local() {
        let step = GivensStep {
            pair: (3, 5),
            rotation: 0.83,
            phase: -1.91,
        };
        let m = step_matrix(&step, 8);
        let eye = DMatrix::<C64>::identity(8, 8);
        assert!((&m * m.adjoint() - &eye).norm() < 1e-12);
        for i in 0..8 {
            if i == 3 || i == 5 {
                continue;
            }
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn no_steps_leaves_c1_unchanged() {
        let psi = StateVector::basis_state(3, 6).unwrap();
        let out = givens_chain(&[], &psi).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn half_turn_moves_all_weight_to_c2() {
        let psi = StateVector::basis_state(3, 2).unwrap();
        let step = GivensStep {
            pair: (2, 5),
            rotation: std::f64::consts::FRAC_PI_2,
            phase: 0.0,
        };
        let out = givens_chain(&[step], &psi).unwrap();
        assert!((out.amplitude(5) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(out.amplitude(2).norm() < 1e-15);
    }

    #[test]
    fn out_of_range_label_is_an_error() {
        let psi = StateVector::zero_state(2);
        let step = GivensStep {
            pair: (0, 4),
            rotation: 0.3,
            phase: 0.0,
        };
        assert!(matches!(
            givens_chain(&[step], &psi),
            Err(Error::LabelOutOfRange { label: 4, dim: 4 })
        ));
    }

    #[test]
    fn uniform_target_round_trip() {
        let m = 5;
        let labels = [1usize, 2, 4, 8, 16];
        let r = vec![1.0 / (m as f64).sqrt(); m];
        let zeros = vec![0.0; m];
        let (phi, theta) = angles_from_amplitudes(&r, &zeros, &zeros, 0.0).unwrap();
        let steps = chain_steps(&labels, &phi, &theta);
        let psi0 = StateVector::basis_state(5, labels[0]).unwrap();
        let out = givens_chain(&steps, &psi0).unwrap();
        for &l in &labels {
            assert!((out.amplitude(l) - C64::new(1.0 / (m as f64).sqrt(), 0.0)).norm() < 1e-12);
        }
        let on_labels: f64 = labels.iter().map(|&l| out.amplitude(l).norm_sqr()).sum();
        assert!((on_labels - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_round_trip_with_phases_and_time() {
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let labels = [21usize, 42, 10, 18, 20];
        for _ in 0..20 {
            let m = labels.len();
            let r: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let zeta: Vec<f64> = (0..m)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let energies: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let t = rng.gen_range(0.0..10.0);
            let (phi, theta) = angles_from_amplitudes(&r, &zeta, &energies, t).unwrap();
            let steps = chain_steps(&labels, &phi, &theta);
            let psi0 = StateVector::basis_state(6, labels[0]).unwrap();
            let out = givens_chain(&steps, &psi0).unwrap();
            let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (k, &l) in labels.iter().enumerate() {
                let xi = (zeta[k] - zeta[0]) - (energies[k] - energies[0]) * t;
                let want = C64::from_polar(r[k] / norm, xi);
                assert!(
                    (out.amplitude(l) - want).norm() < 1e-12,
                    "k={k}: {} vs {want}",
                    out.amplitude(l)
                );
            }
        }
    }

    #[test]
    fn chain_has_no_support_off_the_labels() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let labels = [3usize, 9, 12, 17];
        let r: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
        let zeros = vec![0.0; 4];
        let (phi, theta) = angles_from_amplitudes(&r, &zeros, &zeros, 0.0).unwrap();
        let steps = chain_steps(&labels, &phi, &theta);
        let psi0 = StateVector::basis_state(5, labels[0]).unwrap();
        let out = givens_chain(&steps, &psi0).unwrap();
        for b in 0..32 {
            if !labels.contains(&b) {
                assert!(out.amplitude(b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn amplitude_map_inverse_on_the_open_simplex() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for m in [2usize, 3, 5, 8] {
            let r: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
            let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let zeros = vec![0.0; m];
            let (phi, _) = angles_from_amplitudes(&r, &zeros, &zeros, 0.0).unwrap();
            let back = amplitudes_from_angles(&phi);
            for (a, b) in back.iter().zip(&r) {
                assert!((a - b / norm).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_cases_of_the_inverse_map() {
        // all weight on c_1: every phi = 0
        let (phi, theta) = angles_from_amplitudes(
            &[1.0, 0.0, 0.0],
            &[0.0; 3],
            &[0.0; 3],
            0.0,
        )
        .unwrap();
        assert!(phi.iter().all(|p| p.abs() < 1e-15));
        assert!(theta.iter().all(|t| t.abs() < 1e-15));
        // zero prefix: phi_1 = pi/2 pushes all weight down the chain
        let (phi, _) = angles_from_amplitudes(&[0.0, 1.0], &[0.0; 2], &[0.0; 2], 0.0).unwrap();
        assert!((phi[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // zero everywhere is undefined
        assert!(matches!(
            angles_from_amplitudes(&[0.0, 0.0], &[0.0; 2], &[0.0; 2], 0.0),
            Err(Error::ZeroAmplitudes)
        ));
        // negative magnitudes rejected
        assert!(angles_from_amplitudes(&[0.5, -0.5], &[0.0; 2], &[0.0; 2], 0.0).is_err());
    }

    #[test]
    fn unnormalized_input_is_renormalized() {
        let (phi_a, _) =
            angles_from_amplitudes(&[0.3, 0.4], &[0.0; 2], &[0.0; 2], 0.0).unwrap();
        let (phi_b, _) =
            angles_from_amplitudes(&[0.6, 0.8], &[0.0; 2], &[0.0; 2], 0.0).unwrap();
        assert!((phi_a[0] - phi_b[0]).abs() < 1e-14);
    }

    #[test]
    fn diagonal_unitary_basics() {
        // t = 0 is the identity
        let d = diagonal_phase_unitary(3, &[1, 5], &[2.0, -3.0], 0.0).unwrap();
        for i in 0..8 {
            assert!((d.phase(i) - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
        // one label at E = pi, t = 1 flips only that sign
        let d = diagonal_phase_unitary(2, &[2], &[std::f64::consts::PI], 1.0).unwrap();
        assert!((d.phase(2) + C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((d.phase(0) - C64::new(1.0, 0.0)).norm() < 1e-15);
        // group property D(t) D(-t) = 1
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let psi = StateVector::random(3, &mut rng);
        let fwd = diagonal_phase_unitary(3, &[0, 3, 6], &[1.1, -0.4, 2.2], 0.77).unwrap();
        let bwd = diagonal_phase_unitary(3, &[0, 3, 6], &[1.1, -0.4, 2.2], -0.77).unwrap();
        let round = bwd.apply(&fwd.apply(&psi).unwrap()).unwrap();
        assert!((round.amplitudes() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn diagonal_unitary_rejects_duplicates() {
        assert!(matches!(
            diagonal_phase_unitary(3, &[1, 1], &[0.5, 0.5], 1.0),
            Err(Error::DuplicateLabel { label: 1 })
        ));
    }
}
