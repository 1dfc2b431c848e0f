//! Fixed-depth real-time evolution in the trained eigenbasis.
//!
//! Variant I rebuilds the chain-prepared superposition `sum_k rhat_k
//! e^{i xi_k(t)} |c_k>` for every requested time and pushes it through `V_A`
//! once. Variant II conjugates a diagonal phase unitary with `V_A` and needs
//! no knowledge of the initial state's coefficients. Both draw their phases
//! from the model's energy gaps, never from absolute energies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{
    amplitudes_from_angles, angles_from_amplitudes, chain_steps, diagonal_phase_unitary,
    givens_chain, Variant,
};
use crate::opt::{minimize, BfgsOptions};
use crate::qcore::{C64, Spectrum, StateVector};
use crate::tepid::TrainedSubspaceModel;
use crate::{Error, Result};

const STATE_TOL: f64 = 1e-10;

/// An initial state resolved into the trained eigenbasis: coefficients
/// `alpha_k` on the subspace slots plus the weight that fell outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenbasisState {
    /// Hash of the model the coefficients were fitted against.
    pub model_hash: String,
    pub alphas: Vec<C64>,
    /// `1 - sum |alpha_k|^2`, the out-of-subspace weight.
    pub residual_norm_sq: f64,
}

impl EigenbasisState {
    pub fn new(model_hash: String, alphas: Vec<C64>, residual_norm_sq: f64) -> Result<Self> {
        let total: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
        if (total + residual_norm_sq - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized {
                norm: (total + residual_norm_sq).sqrt(),
            });
        }
        Ok(Self {
            model_hash,
            alphas,
            residual_norm_sq,
        })
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn in_subspace_weight(&self) -> f64 {
        1.0 - self.residual_norm_sq
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindOptions {
    /// Independent optimizer starts; the first is seeded from the direct
    /// projection, the rest from random angles.
    pub restarts: usize,
    pub seed: u64,
    /// Reject the fit if the converged residual exceeds this.
    pub max_residual: Option<f64>,
    pub opt: BfgsOptions,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 11,
            max_residual: None,
            opt: BfgsOptions {
                max_iters: 400,
                grad_tol: 1e-12,
            },
        }
    }
}

/// Complex chain amplitudes for parameters `x = [phi..., xi_2..xi_m]`.
fn chain_amplitudes(m: usize, x: &[f64]) -> Vec<C64> {
    let mags = amplitudes_from_angles(&x[..m - 1]);
    (0..m)
        .map(|k| {
            let xi = if k == 0 { 0.0 } else { x[m - 1 + k - 1] };
            C64::from_polar(1.0, xi) * mags[k]
        })
        .collect()
}

/// Infidelity `C = 1 - |<y|chain(x)>|^2` and its gradient. `y` holds the
/// conjugated targets `<c_k|V_A^dag|psi0>` in slot order.
fn chain_cost(m: usize, y: &[C64], x: &[f64], grad: &mut [f64]) -> f64 {
    let phi = &x[..m - 1];
    let amps = chain_amplitudes(m, x);
    let w: C64 = y.iter().zip(&amps).map(|(yk, ak)| yk.conj() * ak).sum();
    // d|w|^2/dp = 2 Re(conj(w) dw/dp)
    for j in 0..m - 1 {
        let mut dw = C64::new(0.0, 0.0);
        for k in j..m {
            let mut dmag = 1.0;
            for (i, &p) in phi.iter().enumerate().take(k) {
                dmag *= if i == j { p.cos() } else { p.sin() };
            }
            if k < m - 1 {
                dmag *= if k == j { -phi[k].sin() } else { phi[k].cos() };
            }
            let xi = if k == 0 { 0.0 } else { x[m - 1 + k - 1] };
            dw += y[k].conj() * C64::from_polar(1.0, xi) * dmag;
        }
        grad[j] = -2.0 * (w.conj() * dw).re;
    }
    for k in 1..m {
        let dw = y[k].conj() * amps[k] * C64::new(0.0, 1.0);
        grad[m - 1 + k - 1] = -2.0 * (w.conj() * dw).re;
    }
    1.0 - w.norm_sqr()
}

/// Fits the chain parametrization to `psi0` by minimizing the preparation
/// infidelity, then inverts the converged amplitudes to coefficients. The
/// global phase is fixed by making the largest coefficient real positive.
pub fn find_coefficients(
    psi0: &StateVector,
    model: &TrainedSubspaceModel,
    opts: &FindOptions,
) -> Result<EigenbasisState> {
    let y_full = model.apply_basis_change(psi0, true)?;
    let m = model.m();
    let y: Vec<C64> = model
        .basis_labels
        .iter()
        .map(|&l| y_full.amplitude(l))
        .collect();
    let n_params = 2 * (m - 1);
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut best_x = vec![0.0; n_params];
    let mut best_c = f64::INFINITY;
    let restarts = opts.restarts.max(1);
    for r in 0..restarts {
        let x0 = if r == 0 {
            projection_start(&y).unwrap_or_else(|| vec![0.0; n_params])
        } else {
            let mut x = vec![0.0; n_params];
            for v in x.iter_mut().take(m - 1) {
                *v = rng.gen_range(0.0..std::f64::consts::PI);
            }
            for v in x.iter_mut().skip(m - 1) {
                *v = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            }
            x
        };
        let out = minimize(|x, g| chain_cost(m, &y, x, g), &x0, &opts.opt);
        if out.value < best_c {
            best_c = out.value;
            best_x = out.x;
        }
    }
    let residual = best_c.clamp(0.0, 1.0);
    if let Some(limit) = opts.max_residual {
        if residual > limit {
            return Err(Error::ResidualTooLarge { residual, limit });
        }
    }
    let scale = (1.0 - residual).max(0.0).sqrt();
    let mut alphas: Vec<C64> = chain_amplitudes(m, &best_x)
        .into_iter()
        .map(|a| a * scale)
        .collect();
    // the converged chain state matches psi0's projection only up to a global
    // phase; reuse the fitted overlap to undo it before gauging
    let overlap: C64 = y
        .iter()
        .zip(&alphas)
        .map(|(yk, ak)| yk.conj() * ak)
        .sum();
    if overlap.norm() > 1e-15 {
        let undo = (overlap / overlap.norm()).conj();
        for a in alphas.iter_mut() {
            *a *= undo;
        }
    }
    let gauge_idx = (0..m)
        .max_by(|&a, &b| alphas[a].norm().total_cmp(&alphas[b].norm()))
        .unwrap();
    let mag = alphas[gauge_idx].norm();
    if mag > 1e-15 {
        let phase = (alphas[gauge_idx] / mag).conj();
        for a in alphas.iter_mut() {
            *a *= phase;
        }
        alphas[gauge_idx] = C64::new(alphas[gauge_idx].re.abs(), 0.0);
    }
    EigenbasisState::new(model.model_hash(), alphas, residual)
}

/// Start the optimizer at the direct projection, expressed in chain
/// parameters. Returns `None` when the projection carries no weight.
fn projection_start(y: &[C64]) -> Option<Vec<f64>> {
    let m = y.len();
    let r: Vec<f64> = y.iter().map(|c| c.norm()).collect();
    let zeta: Vec<f64> = y.iter().map(|c| c.arg()).collect();
    let zeros = vec![0.0; m];
    let (phi, theta) = angles_from_amplitudes(&r, &zeta, &zeros, 0.0).ok()?;
    let mut x = phi;
    let mut xi = 0.0;
    for th in theta.into_iter().skip(1) {
        xi -= th;
        x.push(xi);
    }
    Some(x)
}

fn check_hash(state: &EigenbasisState, model: &TrainedSubspaceModel) -> Result<()> {
    if state.model_hash != model.model_hash() {
        return Err(Error::InvalidArgument(
            "coefficients were fitted against a different model".into(),
        ));
    }
    Ok(())
}

/// Variant I: prepare the renormalized superposition with time-dependent
/// chain phases, then apply the basis change once.
pub fn evolve_times_i(
    state: &EigenbasisState,
    model: &TrainedSubspaceModel,
    t: f64,
) -> Result<StateVector> {
    check_hash(state, model)?;
    let r: Vec<f64> = state.alphas.iter().map(|a| a.norm()).collect();
    let zeta: Vec<f64> = state.alphas.iter().map(|a| a.arg()).collect();
    let (phi, theta) = angles_from_amplitudes(&r, &zeta, &model.delta_energies, t)?;
    let steps = chain_steps(&model.basis_labels, &phi, &theta);
    let start = StateVector::basis_state(model.n_qubits, model.basis_labels[0])?;
    let chi = givens_chain(&steps, &start)?;
    model.apply_basis_change(&chi, false)
}

/// Variant II: conjugate the diagonal phase unitary with the basis change.
/// Basis states outside the label set pick up no phase.
pub fn evolve_times_ii(
    psi0: &StateVector,
    model: &TrainedSubspaceModel,
    t: f64,
) -> Result<StateVector> {
    let y = model.apply_basis_change(psi0, true)?;
    let d = diagonal_phase_unitary(
        model.n_qubits,
        &model.basis_labels,
        &model.delta_energies,
        t,
    )?;
    let z = d.apply(&y)?;
    model.apply_basis_change(&z, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryTerm {
    /// Out-of-subspace population of one eigenlevel.
    pub weight: f64,
    /// Gap to the reference (lowest trained) level.
    pub frequency: f64,
}

/// Closed-form fidelity law. Variant I is flat at `constant_part^2`; variant
/// II beats against the out-of-subspace levels:
/// `F(t) = |W + sum_j w_j e^{-i omega_j t}|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityPrediction {
    pub variant: Variant,
    /// In-subspace weight `W = sum_{k in S} |alpha_k|^2`.
    pub constant_part: f64,
    pub oscillatory_terms: Vec<OscillatoryTerm>,
}

impl FidelityPrediction {
    pub fn evaluate(&self, t: f64) -> f64 {
        match self.variant {
            Variant::TimesI => self.constant_part * self.constant_part,
            Variant::TimesII => {
                let mut acc = C64::new(self.constant_part, 0.0);
                for term in &self.oscillatory_terms {
                    acc += C64::from_polar(term.weight, -term.frequency * t);
                }
                acc.norm_sqr()
            }
        }
    }

    pub fn evaluate_grid(&self, t_grid: &[f64]) -> Vec<f64> {
        t_grid.iter().map(|&t| self.evaluate(t)).collect()
    }
}

/// Builds the fidelity law for `psi0` from the oracle spectrum. Eigenlevels
/// are grouped by degeneracy; a level counts as inside the subspace through
/// the trained state assigned to its group, so partially captured degenerate
/// groups split cleanly into a constant part and a beating remainder.
pub fn predict_fidelity(
    psi0: &StateVector,
    model: &TrainedSubspaceModel,
    spectrum: &Spectrum,
    variant: Variant,
) -> Result<FidelityPrediction> {
    let groups = spectrum.degenerate_groups(1e-9);
    let subspace = model.subspace_states()?;
    let mut group_of_slot = Vec::with_capacity(subspace.len());
    for u in &subspace {
        let ov = spectrum.overlaps(u)?;
        let g_best = (0..groups.len())
            .max_by(|&a, &b| {
                let wa: f64 = groups[a].clone().map(|j| ov[j].norm_sqr()).sum();
                let wb: f64 = groups[b].clone().map(|j| ov[j].norm_sqr()).sum();
                wa.total_cmp(&wb)
            })
            .expect("spectrum has at least one level");
        group_of_slot.push(g_best);
    }
    let beta = spectrum.overlaps(psi0)?;
    let mut in_weight = vec![0.0f64; groups.len()];
    let mut constant_part = 0.0;
    for (u, &g) in subspace.iter().zip(&group_of_slot) {
        let w = psi0.inner(u)?.norm_sqr();
        in_weight[g] += w;
        constant_part += w;
    }
    let e_ref = spectrum.energies()[groups[group_of_slot[0]].start];
    let mut oscillatory_terms = Vec::new();
    if variant == Variant::TimesII {
        for (g, range) in groups.iter().enumerate() {
            let pop: f64 = range.clone().map(|j| beta[j].norm_sqr()).sum();
            let out = (pop - in_weight[g]).max(0.0);
            if out > 1e-14 {
                oscillatory_terms.push(OscillatoryTerm {
                    weight: out,
                    frequency: spectrum.energies()[range.start] - e_ref,
                });
            }
        }
    }
    Ok(FidelityPrediction {
        variant,
        constant_part,
        oscillatory_terms,
    })
}

/// Fidelity credited to a variant-I run at one grid point. The preparation
/// only captures the in-subspace weight of the initial state, so the raw
/// overlap with the oracle state is scaled down by that weight.
pub fn weighted_fidelity_i(
    state: &EigenbasisState,
    simulated: &StateVector,
    oracle: &StateVector,
) -> Result<f64> {
    Ok(state.in_subspace_weight() * simulated.fidelity(oracle)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Boundary, FieldPattern, XxzSpec};
    use crate::qcore::PauliSum;
    use crate::tepid::{train, TepidConfig};
    use std::sync::OnceLock;

    fn xxz4() -> PauliSum {
        XxzSpec {
            n_sites: 4,
            j_z: 1.5,
            h_z: 0.0,
            boundary: Boundary::Open,
            field: FieldPattern::None,
        }
        .hamiltonian()
        .unwrap()
    }

    fn trained_m3() -> &'static TrainedSubspaceModel {
        static MODEL: OnceLock<TrainedSubspaceModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            let mut cfg = TepidConfig::new(3, 2.0);
            cfg.grad_tolerance = 1e-7;
            train(&xxz4(), &cfg).unwrap()
        })
    }

    fn oracle_m3() -> &'static TrainedSubspaceModel {
        static MODEL: OnceLock<TrainedSubspaceModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            TrainedSubspaceModel::oracle_exact(&xxz4(), &[5, 10, 6], 2.0).unwrap()
        })
    }

    #[test]
    fn one_hot_input_recovers_one_hot_coefficients() {
        let model = trained_m3();
        let states = model.subspace_states().unwrap();
        let fit = find_coefficients(&states[2], model, &FindOptions::default()).unwrap();
        assert!(fit.residual_norm_sq < 1e-8, "residual {}", fit.residual_norm_sq);
        assert!((fit.alphas[2].re - 1.0).abs() < 1e-6);
        assert!(fit.alphas[2].im.abs() < 1e-10);
        assert!(fit.alphas[0].norm() < 1e-6);
        assert!(fit.alphas[1].norm() < 1e-6);
    }

    #[test]
    fn known_projection_recovers_residual_and_alphas() {
        let model = oracle_m3();
        let spec = Spectrum::eigendecompose(&xxz4()).unwrap();
        // 0.8 of the weight on the first three levels, 0.2 on the fifth
        let coeffs = [
            C64::from_polar(0.6, 0.3),
            C64::from_polar(0.5, -1.1),
            C64::from_polar((0.8f64 - 0.61).sqrt(), 2.0),
        ];
        let mut psi = StateVector::zero_state(4).scaled(C64::new(0.0, 0.0));
        for (k, c) in coeffs.iter().enumerate() {
            psi.add_scaled(*c, &spec.eigenvector(k));
        }
        psi.add_scaled(C64::new(0.2f64.sqrt(), 0.0), &spec.eigenvector(5));
        let psi = psi.normalized();
        let fit = find_coefficients(&psi, model, &FindOptions::default()).unwrap();
        assert!(
            (fit.residual_norm_sq - 0.2).abs() < 1e-6,
            "residual {}",
            fit.residual_norm_sq
        );
        // compare against the projection in the same gauge
        let mut expect: Vec<C64> = coeffs.to_vec();
        let phase = (expect[0] / expect[0].norm()).conj();
        for e in expect.iter_mut() {
            *e *= phase;
        }
        for (a, e) in fit.alphas.iter().zip(&expect) {
            assert!((a - e).norm() < 1e-6, "alpha {a} vs {e}");
        }
    }

    #[test]
    fn residual_limit_is_enforced() {
        let model = oracle_m3();
        let spec = Spectrum::eigendecompose(&xxz4()).unwrap();
        let opts = FindOptions {
            max_residual: Some(0.5),
            ..Default::default()
        };
        match find_coefficients(&spec.eigenvector(9), model, &opts) {
            Err(Error::ResidualTooLarge { residual, limit }) => {
                assert!(residual > 0.9);
                assert_eq!(limit, 0.5);
            }
            other => panic!("expected residual error, got {other:?}"),
        }
    }

    #[test]
    fn variant_i_at_zero_matches_projection() {
        let model = oracle_m3();
        let spec = Spectrum::eigendecompose(&xxz4()).unwrap();
        let mut psi = StateVector::zero_state(4).scaled(C64::new(0.0, 0.0));
        psi.add_scaled(C64::new(0.7, 0.1), &spec.eigenvector(0));
        psi.add_scaled(C64::new(-0.4, 0.3), &spec.eigenvector(2));
        psi.add_scaled(C64::new(0.2, 0.0), &spec.eigenvector(7));
        let psi = psi.normalized();
        let fit = find_coefficients(&psi, model, &FindOptions::default()).unwrap();
        let out = evolve_times_i(&fit, model, 0.0).unwrap();
        // normalized projection of psi onto the subspace
        let mut proj = StateVector::zero_state(4).scaled(C64::new(0.0, 0.0));
        for k in [0usize, 2] {
            let v = spec.eigenvector(k);
            proj.add_scaled(v.inner(&psi).unwrap(), &v);
        }
        let proj = proj.normalized();
        assert!((out.fidelity(&proj).unwrap() - 1.0).abs() < 1e-10);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_state_stays_put_under_variant_i() {
        let model = trained_m3();
        let states = model.subspace_states().unwrap();
        let fit = find_coefficients(&states[1], model, &FindOptions::default()).unwrap();
        let spec = Spectrum::eigendecompose(&xxz4()).unwrap();
        let f0 = evolve_times_i(&fit, model, 0.0)
            .unwrap()
            .fidelity(&spec.evolve(&states[1], 0.0).unwrap())
            .unwrap();
        for t in [3.0, 17.0, 100.0] {
            let sim = evolve_times_i(&fit, model, t).unwrap();
            let ex = spec.evolve(&states[1], t).unwrap();
            let f = sim.fidelity(&ex).unwrap();
            assert!((f - f0).abs() < 1e-8, "t={t}: {f} vs {f0}");
        }
    }

    #[test]
    fn variant_ii_at_zero_is_identity() {
        let model = trained_m3();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let psi = StateVector::random(4, &mut rng);
        let out = evolve_times_ii(&psi, model, 0.0).unwrap();
        assert!((out.fidelity(&psi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn variants_agree_on_subspace_states() {
        let model = trained_m3();
        let states = model.subspace_states().unwrap();
        let mut psi = states[0].clone().scaled(C64::new(0.5, 0.2));
        psi.add_scaled(C64::new(-0.3, 0.6), &states[1]);
        psi.add_scaled(C64::new(0.1, -0.4), &states[2]);
        let psi = psi.normalized();
        let fit = find_coefficients(&psi, model, &FindOptions::default()).unwrap();
        assert!(fit.residual_norm_sq < 1e-9);
        for t in [0.0, 0.7, 4.2, 19.0] {
            let a = evolve_times_i(&fit, model, t).unwrap();
            let b = evolve_times_ii(&psi, model, t).unwrap();
            assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn variant_ii_composes() {
        let model = trained_m3();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let psi = StateVector::random(4, &mut rng);
        let step = evolve_times_ii(
            &evolve_times_ii(&psi, model, 1.3).unwrap(),
            model,
            2.4,
        )
        .unwrap();
        let direct = evolve_times_ii(&psi, model, 3.7).unwrap();
        assert!((step.fidelity(&direct).unwrap() - 1.0).abs() < 1e-10);
        let diff: f64 = (step.amplitudes() - direct.amplitudes()).norm();
        assert!(diff < 1e-10, "statevector mismatch {diff}");
    }

    #[test]
    fn energy_shift_leaves_evolution_unchanged() {
        let model = trained_m3();
        let mut shifted = model.clone();
        for e in shifted.energies.iter_mut() {
            *e += 17.3;
        }
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let psi = StateVector::random(4, &mut rng);
        for t in [0.9, 6.5] {
            let a = evolve_times_ii(&psi, model, t).unwrap();
            let b = evolve_times_ii(&psi, &shifted, t).unwrap();
            assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_model_is_rejected() {
        let model = trained_m3();
        let other = oracle_m3();
        let states = model.subspace_states().unwrap();
        let fit = find_coefficients(&states[0], model, &FindOptions::default()).unwrap();
        assert!(matches!(
            evolve_times_i(&fit, other, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn predictions_match_simulation_with_oracle_basis_change() {
        let h = xxz4();
        let model = oracle_m3();
        let spec = Spectrum::eigendecompose(&h).unwrap();
        let t_grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for _ in 0..5 {
            let psi = StateVector::random(4, &mut rng);
            let fit = find_coefficients(&psi, model, &FindOptions::default()).unwrap();
            let pred_i = predict_fidelity(&psi, model, &spec, Variant::TimesI).unwrap();
            let pred_ii = predict_fidelity(&psi, model, &spec, Variant::TimesII).unwrap();
            assert!(pred_i.oscillatory_terms.is_empty());
            for &t in &t_grid {
                let oracle = spec.evolve(&psi, t).unwrap();
                let sim_i = evolve_times_i(&fit, model, t).unwrap();
                let f_i = weighted_fidelity_i(&fit, &sim_i, &oracle).unwrap();
                assert!(
                    (f_i - pred_i.evaluate(t)).abs() < 1e-10,
                    "variant i at t={t}: {f_i} vs {}",
                    pred_i.evaluate(t)
                );
                let sim_ii = evolve_times_ii(&psi, model, t).unwrap();
                let f_ii = sim_ii.fidelity(&oracle).unwrap();
                assert!(
                    (f_ii - pred_ii.evaluate(t)).abs() < 1e-10,
                    "variant ii at t={t}: {f_ii} vs {}",
                    pred_ii.evaluate(t)
                );
            }
        }
    }

    #[test]
    fn fully_captured_state_predicts_unit_fidelity() {
        let model = oracle_m3();
        let spec = Spectrum::eigendecompose(&xxz4()).unwrap();
        let mut psi = StateVector::zero_state(4).scaled(C64::new(0.0, 0.0));
        psi.add_scaled(C64::new(0.6, 0.0), &spec.eigenvector(0));
        psi.add_scaled(C64::new(0.0, 0.8), &spec.eigenvector(1));
        let psi = psi.normalized();
        for variant in [Variant::TimesI, Variant::TimesII] {
            let pred = predict_fidelity(&psi, model, &spec, variant).unwrap();
            for t in [0.0, 1.5, 12.0] {
                assert!((pred.evaluate(t) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn state_invariant_is_checked() {
        assert!(matches!(
            EigenbasisState::new("x".into(), vec![C64::new(1.0, 0.0)], 0.5),
            Err(Error::NotNormalized { .. })
        ));
    }
}
