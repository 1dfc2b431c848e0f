//! Free-energy training of the subspace-diagonalizing circuit.
//!
//! A rank-`m` ensemble of computational basis states is pushed through an
//! adaptively grown ansatz `V_A`; minimizing `F = sum_k mu_k E_k(theta)
//! - S(mu)/beta` jointly over the rotation angles and the ensemble weights
//! drives `V_A |c_k>` toward the `m` lowest eigenstates reachable from the
//! chosen basis, and the converged weights encode the energy gaps
//! `Delta E_k = ln(mu_1 / mu_k) / beta`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::{pauli_pool, pool_hash, qeb_pool, AdaptAnsatz, DepthModel, PoolOperator, Variant};
use crate::opt::{minimize, BfgsOptions};
use crate::qcore::{C64, CompiledPauliSum, DensityEnsemble, PauliSum, Spectrum, StateVector};
use crate::{Error, Result};

/// Oracle diagnostics are attached when the problem is small enough to
/// eigendecompose on the side.
const DIAGNOSTIC_QUBIT_CAP: usize = 10;
const DEGENERACY_TOL: f64 = 1e-9;
/// Bounded number of stall-escape kicks per training run.
const MAX_STALL_KICKS: usize = 12;
/// Pool curvature below this counts as a usable second-order descent
/// direction; comfortably above BFGS convergence noise, far below the
/// energy-gap scale of a genuine direction.
const CURV_TOLERANCE: f64 = 1e-4;
/// Curvature-guided growths attempted per stall before falling back to kicks.
const MAX_CURV_TRIES: usize = 8;
/// Starting displacement for a curvature-guided layer. The new layer sits at
/// a point where the first derivative vanishes, so BFGS needs a nonzero
/// offset to feel the downhill quadratic.
const CURV_SEED: f64 = 0.1;
/// Ratio of the fixed geometric weight schedule used while optimizing the
/// angles. Letting the ensemble weights float during training is
/// counterproductive twice over: the conditional-Boltzmann weights collapse
/// exponentially for any slot whose energy lags (that slot then contributes
/// no gradient and never recovers), and whenever two slot energies agree the
/// optimal weights become equal, which turns "right subspace, slots still
/// mixed inside it" into a genuine local minimum of the joint objective.
/// A fixed strictly descending schedule avoids both while leaving the optimum
/// unchanged: any such ensemble is minimized exactly by the sorted
/// eigenbasis. The reported weights are re-derived from the converged slot
/// energies, where the minimization over weights has a closed form.
const TRAIN_WEIGHT_RATIO: f64 = 0.9;

/// `w_k ~ ratio^k`, normalized; the fixed training ensemble.
fn fixed_train_weights(m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|k| TRAIN_WEIGHT_RATIO.powi(k as i32)).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    /// Qubit excitations (S_z preserving).
    Qeb,
    /// Generic odd-Y Pauli strings of weight <= 3.
    Pauli,
}

impl PoolKind {
    pub fn build(&self, n_qubits: usize) -> Vec<PoolOperator> {
        match self {
            PoolKind::Qeb => qeb_pool(n_qubits),
            PoolKind::Pauli => pauli_pool(n_qubits),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TepidConfig {
    pub beta: f64,
    pub m: usize,
    /// Computational basis labels for the ensemble. `None` picks the `m`
    /// lowest-diagonal basis states of the Hamiltonian (ties by index).
    pub basis_labels: Option<Vec<usize>>,
    pub pool: PoolKind,
    /// ADAPT stops once every pool gradient magnitude is below this.
    pub grad_tolerance: f64,
    pub max_layers: usize,
    /// Inner BFGS iteration budget per growth cycle.
    pub opt_max_iters: usize,
    /// Inner BFGS gradient tolerance.
    pub opt_grad_tol: f64,
    /// Scale of the random parameter kick used when the pool scan stalls.
    /// Every pool gradient vanishes identically on an exact eigenstate, and
    /// symmetric ensembles (degenerate labels, equal weights) cancel slot by
    /// slot, so the scan can report convergence at a saddle. A kicked growth
    /// cycle is kept only if it lowers the free energy, otherwise the
    /// parameters are restored; 0 disables the escape.
    pub jitter: f64,
    /// Seeds the kick RNG; recorded in the trained model.
    pub seed: u64,
}

impl TepidConfig {
    pub fn new(m: usize, beta: f64) -> Self {
        Self {
            beta,
            m,
            basis_labels: None,
            pool: PoolKind::Qeb,
            grad_tolerance: 1e-5,
            max_layers: 240,
            opt_max_iters: 700,
            opt_grad_tol: 1e-9,
            jitter: 0.05,
            seed: 7,
        }
    }
}

/// How `V_A` is realized: the trained circuit, or an explicit unitary used
/// when substituting the exact eigenbasis for validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChange {
    Ansatz(AdaptAnsatz),
    Exact(DenseUnitary),
}

/// Explicit unitary stored column-major; column `b` is the image of `|b>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseUnitary {
    dim: usize,
    /// Row-major `(re, im)` pairs; kept plain for serialization.
    data: Vec<(f64, f64)>,
}

impl DenseUnitary {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push((m[(r, c)].re, m[(r, c)].im));
            }
        }
        Self { dim, data }
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            let (re, im) = self.data[r * self.dim + c];
            C64::new(re, im)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDiagnostics {
    /// Squared overlap of each trained state with the oracle eigenspace
    /// nearest in energy, slot by slot.
    pub eigenstate_fidelities: Vec<f64>,
    /// Oracle eigenvalue matched to each slot.
    pub oracle_energies: Vec<f64>,
    pub free_energy_history: Vec<f64>,
    pub max_gradient_history: Vec<f64>,
    pub selected_labels: Vec<String>,
}

/// Converged output of [`train`]: the basis change plus everything measured
/// from the ensemble. Slots are sorted by descending weight, so index 0 is
/// the ground slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSubspaceModel {
    pub n_qubits: usize,
    pub beta: f64,
    pub basis_labels: Vec<usize>,
    pub weights: Vec<f64>,
    /// `E_1 + Delta E_k`: the anchor energy is the one direct expectation
    /// value, the gaps come from the weights.
    pub energies: Vec<f64>,
    pub delta_energies: Vec<f64>,
    pub free_energy: f64,
    pub basis_change: BasisChange,
    pub pool_hash: String,
    pub converged: bool,
    pub max_pool_gradient: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub diagnostics: Option<TrainingDiagnostics>,
}

impl TrainedSubspaceModel {
    pub fn m(&self) -> usize {
        self.basis_labels.len()
    }

    pub fn n_adapt(&self) -> usize {
        match &self.basis_change {
            BasisChange::Ansatz(a) => a.n_layers(),
            BasisChange::Exact(_) => 0,
        }
    }

    pub fn apply_basis_change(&self, psi: &StateVector, dagger: bool) -> Result<StateVector> {
        match &self.basis_change {
            BasisChange::Ansatz(a) => a.apply(psi, dagger),
            BasisChange::Exact(u) => {
                let m = u.to_matrix();
                if psi.dim() != m.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: m.nrows(),
                        actual: psi.dim(),
                    });
                }
                let amps = if dagger {
                    m.adjoint() * psi.amplitudes()
                } else {
                    &m * psi.amplitudes()
                };
                Ok(StateVector::from_amplitudes(
                    self.n_qubits,
                    amps.iter().copied().collect(),
                )?)
            }
        }
    }

    /// `V_A |c_k>` for every slot: the trained approximations of the
    /// subspace eigenstates.
    pub fn subspace_states(&self) -> Result<Vec<StateVector>> {
        self.basis_labels
            .iter()
            .map(|&l| {
                let c = StateVector::basis_state(self.n_qubits, l)?;
                self.apply_basis_change(&c, false)
            })
            .collect()
    }

    pub fn depth_model(&self, n_sites: usize, variant: Variant) -> DepthModel {
        DepthModel {
            m: self.m(),
            n_sites,
            n_adapt: self.n_adapt(),
            variant,
        }
    }

    /// Content hash over the serialized model.
    pub fn model_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("model serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        crate::ansatz::hex_digest(&h.finalize())
    }

    pub fn save_json(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load_json(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Validation stand-in: the basis change is the exact eigenbasis of `h`
    /// (eigenvector `k` pinned to `labels[k]`, arbitrary-but-unitary action
    /// elsewhere) and the weights are the exact Boltzmann distribution.
    pub fn oracle_exact(h: &PauliSum, labels: &[usize], beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        let spec = Spectrum::eigendecompose(h)?;
        let dim = spec.dim();
        validate_labels(labels, dim)?;
        let m = labels.len();
        let mut u = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        let mut filled = vec![false; dim];
        for (k, &l) in labels.iter().enumerate() {
            u.set_column(l, &spec.vectors().column(k));
            filled[l] = true;
        }
        // Complete the unitary: Gram-Schmidt the standard basis against the
        // pinned columns, assigning survivors to the unfilled slots in order.
        let mut accepted: Vec<DVector<C64>> = labels
            .iter()
            .enumerate()
            .map(|(k, _)| spec.vectors().column(k).into_owned())
            .collect();
        let mut open: Vec<usize> = (0..dim).filter(|&c| !filled[c]).collect();
        let mut open_iter = open.drain(..);
        for cand in 0..dim {
            let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
            v[cand] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for a in &accepted {
                    let overlap = a.dotc(&v);
                    v -= a * overlap;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                v /= C64::new(norm, 0.0);
                if let Some(col) = open_iter.next() {
                    u.set_column(col, &v);
                    accepted.push(v);
                } else {
                    break;
                }
            }
        }
        let e0 = spec.energies()[0];
        let boltz: Vec<f64> = (0..m)
            .map(|k| (-beta * (spec.energies()[k] - e0)).exp())
            .collect();
        let z: f64 = boltz.iter().sum();
        let weights: Vec<f64> = boltz.iter().map(|b| b / z).collect();
        let energies: Vec<f64> = spec.energies()[..m].to_vec();
        let delta: Vec<f64> = energies.iter().map(|e| e - energies[0]).collect();
        let mut free_energy = 0.0;
        for (w, e) in weights.iter().zip(&energies) {
            free_energy += w * e + w * w.ln() / beta;
        }
        Ok(Self {
            n_qubits: h.n_qubits(),
            beta,
            basis_labels: labels.to_vec(),
            weights,
            energies,
            delta_energies: delta,
            free_energy,
            basis_change: BasisChange::Exact(DenseUnitary::from_matrix(&u)),
            pool_hash: "oracle".into(),
            converged: true,
            max_pool_gradient: 0.0,
            seed: 0,
            warnings: Vec::new(),
            diagnostics: None,
        })
    }
}

/// `Delta E_k = ln(w_1 / w_k) / beta` relative to the first (largest) weight.
pub fn extract_gaps(weights: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    if weights.is_empty() {
        return Err(Error::InvalidArgument("no weights".into()));
    }
    let w1 = weights[0];
    let mut gaps = Vec::with_capacity(weights.len());
    for (k, &w) in weights.iter().enumerate() {
        if w < 1e-300 {
            return Err(Error::VanishingWeight { index: k });
        }
        if w > w1 * (1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "weights must be nonincreasing: w_{} = {w} exceeds w_1 = {w1}",
                k + 1
            )));
        }
        gaps.push((w1 / w).ln() / beta);
    }
    Ok(gaps)
}

/// Outcome of one ADAPT pool scan.
#[derive(Debug, Clone)]
pub enum AdaptSelection {
    /// Every pool gradient is below tolerance.
    Converged { max_gradient: f64 },
    Chosen {
        index: usize,
        gradient: f64,
        max_gradient: f64,
    },
}

/// Scans the pool for the operator with the largest `|dF/dtheta|` at
/// `theta = 0` when appended after the current ansatz. The ensemble holds the
/// computational basis states and the current weights; ties in the scan keep
/// the earliest pool index.
pub fn adapt_step(
    h: &PauliSum,
    ensemble: &DensityEnsemble,
    ansatz: &AdaptAnsatz,
    pool: &[PoolOperator],
    grad_tolerance: f64,
) -> Result<AdaptSelection> {
    let mut evolved = Vec::with_capacity(ensemble.rank());
    let mut h_evolved = Vec::with_capacity(ensemble.rank());
    for s in ensemble.states() {
        let v = ansatz.apply(s, false)?;
        h_evolved.push(h.apply(&v)?);
        evolved.push(v);
    }
    let mut best: Option<(usize, f64)> = None;
    let mut max_abs = 0.0f64;
    for (i, op) in pool.iter().enumerate() {
        let mut grad = 0.0;
        for ((w, v), hv) in ensemble.weights().iter().zip(&evolved).zip(&h_evolved) {
            let gv = op.apply_generator(v)?;
            grad += 2.0 * w * hv.inner(&gv)?.re;
        }
        let a = grad.abs();
        if a > max_abs {
            max_abs = a;
            best = Some((i, grad));
        }
    }
    match best {
        Some((index, gradient)) if max_abs >= grad_tolerance => Ok(AdaptSelection::Chosen {
            index,
            gradient,
            max_gradient: max_abs,
        }),
        _ => Ok(AdaptSelection::Converged { max_gradient: max_abs }),
    }
}

/// The `m` basis states with the lowest diagonal Hamiltonian matrix elements,
/// optionally restricted to bitstrings of a fixed popcount (symmetry sector).
/// Ties break toward the smaller index.
pub fn lowest_diagonal_labels(
    h: &PauliSum,
    m: usize,
    bit_weight: Option<u32>,
) -> Result<Vec<usize>> {
    let dim = h.dim();
    let mut entries: Vec<(f64, usize)> = Vec::new();
    for b in 0..dim {
        if let Some(w) = bit_weight {
            if (b as u64).count_ones() != w {
                continue;
            }
        }
        let mut e = 0.0;
        for (c, s) in h.terms() {
            let (row, f) = s.map_basis(b);
            if row == b {
                e += c * f.re;
            }
        }
        entries.push((e, b));
    }
    if entries.len() < m {
        return Err(Error::InvalidArgument(format!(
            "sector holds {} states, need {m}",
            entries.len()
        )));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(entries[..m].iter().map(|(_, b)| *b).collect())
}

fn validate_labels(labels: &[usize], dim: usize) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for &l in labels {
        if l >= dim {
            return Err(Error::LabelOutOfRange { label: l, dim });
        }
        if !seen.insert(l) {
            return Err(Error::DuplicateLabel { label: l });
        }
    }
    Ok(())
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|w| (w - mx).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Shared scratch for the objective evaluation.
struct Workspace {
    compiled_h: CompiledPauliSum,
    compiled_pool: Vec<CompiledPauliSum>,
    dim: usize,
    t1: DVector<C64>,
    t2: DVector<C64>,
}

impl Workspace {
    fn rotate(&mut self, op_idx: usize, theta: f64, psi: &DVector<C64>) -> DVector<C64> {
        let p = &self.compiled_pool[op_idx];
        p.apply_into(psi, &mut self.t1);
        p.apply_into(&self.t1, &mut self.t2);
        let mut out = psi.clone();
        out.axpy(C64::new(0.0, theta.sin()), &self.t1, C64::new(1.0, 0.0));
        out.axpy(C64::new(theta.cos() - 1.0, 0.0), &self.t2, C64::new(1.0, 0.0));
        out
    }

    /// `i P |psi>` into a fresh vector.
    fn generator(&mut self, op_idx: usize, psi: &DVector<C64>) -> DVector<C64> {
        self.compiled_pool[op_idx].apply_into(psi, &mut self.t1);
        self.t1.map(|x| C64::new(0.0, 1.0) * x)
    }
}

/// Training free energy and its gradient in the layer angles, at fixed
/// ensemble weights. Returns the per-slot energies as a side product.
#[allow(clippy::too_many_arguments)]
fn free_energy_and_grad(
    ws: &mut Workspace,
    op_indices: &[usize],
    basis: &[DVector<C64>],
    beta: f64,
    weights: &[f64],
    thetas: &[f64],
    grad: &mut [f64],
    energies_out: &mut [f64],
) -> f64 {
    let layers = op_indices.len();
    let m = basis.len();

    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut free = 0.0;
    for k in 0..m {
        // forward pass
        let mut states = Vec::with_capacity(layers + 1);
        states.push(basis[k].clone());
        for (j, &op) in op_indices.iter().enumerate() {
            let next = ws.rotate(op, thetas[j], states.last().unwrap());
            states.push(next);
        }
        let psi = states.last().unwrap();
        let mut hpsi = DVector::from_element(ws.dim, C64::new(0.0, 0.0));
        ws.compiled_h.apply_into(psi, &mut hpsi);
        let e = psi.dotc(&hpsi).re;
        energies_out[k] = e;
        free += weights[k] * e + weights[k] * safe_ln(weights[k]) / beta;
        // backward pass: lambda_j = (U_{j+1}..U_L)^dag H psi
        let mut lambda = hpsi;
        for j in (0..layers).rev() {
            let gs = ws.generator(op_indices[j], &states[j + 1]);
            grad[j] += weights[k] * 2.0 * lambda.dotc(&gs).re;
            if j > 0 {
                lambda = ws.rotate(op_indices[j], -thetas[j], &lambda);
            }
        }
    }
    free
}

fn safe_ln(w: f64) -> f64 {
    if w > 1e-300 {
        w.ln()
    } else {
        // weight numerically zero; its mu ln mu contribution is zero and the
        // gradient factor mu_k kills the q_k term, so the value is moot
        0.0
    }
}

/// Forward-only objective evaluation, no gradient.
fn ensemble_free_energy(
    ws: &mut Workspace,
    op_indices: &[usize],
    basis: &[DVector<C64>],
    beta: f64,
    weights: &[f64],
    thetas: &[f64],
) -> f64 {
    let mut free = 0.0;
    for (k, b) in basis.iter().enumerate() {
        let mut s = b.clone();
        for (j, &op) in op_indices.iter().enumerate() {
            s = ws.rotate(op, thetas[j], &s);
        }
        let mut hs = DVector::from_element(ws.dim, C64::new(0.0, 0.0));
        ws.compiled_h.apply_into(&s, &mut hs);
        let e = s.dotc(&hs).re;
        free += weights[k] * e + weights[k] * safe_ln(weights[k]) / beta;
    }
    free
}

/// Second derivative of the objective along each pool direction at
/// `theta = 0`, appended after the current circuit. Every pool generator
/// satisfies `P^3 = P`, so for the rotation `exp(i theta P)` the curvature of
/// slot `k` reduces to `2 (<P psi|H|P psi> - Re <H psi|P^2 psi>)`. A negative
/// entry at a point where all first derivatives vanish is a descent
/// direction the gradient scan cannot see.
fn pool_curvatures(
    ws: &mut Workspace,
    op_indices: &[usize],
    thetas: &[f64],
    basis: &[DVector<C64>],
    weights: &[f64],
) -> Vec<f64> {
    let n_ops = ws.compiled_pool.len();
    let zero = C64::new(0.0, 0.0);
    let mut curv = vec![0.0f64; n_ops];
    let mut p_psi = DVector::from_element(ws.dim, zero);
    let mut h_p = DVector::from_element(ws.dim, zero);
    let mut p2_psi = DVector::from_element(ws.dim, zero);
    for (k, b) in basis.iter().enumerate() {
        let mut psi = b.clone();
        for (j, &op) in op_indices.iter().enumerate() {
            psi = ws.rotate(op, thetas[j], &psi);
        }
        let mut h_psi = DVector::from_element(ws.dim, zero);
        ws.compiled_h.apply_into(&psi, &mut h_psi);
        for (idx, c) in curv.iter_mut().enumerate() {
            ws.compiled_pool[idx].apply_into(&psi, &mut p_psi);
            ws.compiled_h.apply_into(&p_psi, &mut h_p);
            ws.compiled_pool[idx].apply_into(&p_psi, &mut p2_psi);
            let t = p_psi.dotc(&h_p).re - h_psi.dotc(&p2_psi).re;
            *c += weights[k] * 2.0 * t;
        }
    }
    curv
}

/// Runs TEPID-ADAPT. On hitting `max_layers` without pool-gradient
/// convergence the partial model is returned inside the error.
pub fn train(h: &PauliSum, cfg: &TepidConfig) -> Result<TrainedSubspaceModel> {
    if !(cfg.beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "inverse temperature must be positive, got {}",
            cfg.beta
        )));
    }
    if cfg.m == 0 {
        return Err(Error::InvalidArgument("subspace rank m must be >= 1".into()));
    }
    let n = h.n_qubits();
    let dim = 1usize << n;
    let labels = match &cfg.basis_labels {
        Some(l) => {
            if l.len() != cfg.m {
                return Err(Error::DimensionMismatch {
                    expected: cfg.m,
                    actual: l.len(),
                });
            }
            l.clone()
        }
        None => lowest_diagonal_labels(h, cfg.m, None)?,
    };
    validate_labels(&labels, dim)?;

    let pool = cfg.pool.build(n);
    let phash = pool_hash(&pool);
    let mut ws = Workspace {
        compiled_h: h.compile()?,
        compiled_pool: pool
            .iter()
            .map(|op| op.generator().compile())
            .collect::<Result<_>>()?,
        dim,
        t1: DVector::from_element(dim, C64::new(0.0, 0.0)),
        t2: DVector::from_element(dim, C64::new(0.0, 0.0)),
    };
    let basis: Vec<DVector<C64>> = labels
        .iter()
        .map(|&l| StateVector::basis_state(n, l).map(|s| s.amplitudes().clone()))
        .collect::<Result<_>>()?;
    let basis_states: Vec<StateVector> = labels
        .iter()
        .map(|&l| StateVector::basis_state(n, l))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut ansatz = AdaptAnsatz::new(n);
    let mut op_indices: Vec<usize> = Vec::new();
    let mut thetas: Vec<f64> = Vec::new();
    let w_train = fixed_train_weights(cfg.m);
    let mut logits_free: Vec<f64> = vec![0.0; cfg.m - 1];
    let mut fe_history = Vec::new();
    let mut grad_history = Vec::new();
    let mut selected = Vec::new();
    let mut energies = vec![0.0f64; cfg.m];
    let mut final_max_grad;

    // Closed-form readout of the converged weights: the exact minimizer of F
    // over mu at fixed theta is the Boltzmann distribution of the measured
    // slot energies. Used when packaging, not during training.
    fn refresh_logits(
        ws: &mut Workspace,
        op_indices: &[usize],
        thetas: &[f64],
        basis: &[DVector<C64>],
        beta: f64,
        logits_free: &mut [f64],
        energies: &mut [f64],
    ) {
        for (k, b) in basis.iter().enumerate() {
            let mut s = b.clone();
            for (j, &op) in op_indices.iter().enumerate() {
                s = ws.rotate(op, thetas[j], &s);
            }
            let mut hs = DVector::from_element(s.len(), C64::new(0.0, 0.0));
            ws.compiled_h.apply_into(&s, &mut hs);
            energies[k] = s.dotc(&hs).re;
        }
        for k in 1..basis.len() {
            logits_free[k - 1] = -beta * (energies[k] - energies[0]);
        }
    }

    let mut kicks_used = 0usize;
    // angles, free energy, and pool gradient saved before a stall escape,
    // restored if the escaped cycle fails to improve on them
    let mut pending_rescue: Option<(Vec<f64>, f64, f64)> = None;
    // ops already grown and rolled back at the current stall
    let mut stall_tried: std::collections::HashSet<usize> = std::collections::HashSet::new();
    let mut curv_trials = 0usize;

    loop {
        let ensemble = DensityEnsemble::new(w_train.clone(), basis_states.clone())?;
        ansatz.set_thetas(&thetas)?;
        let sel = adapt_step(h, &ensemble, &ansatz, &pool, cfg.grad_tolerance)?;
        match sel {
            AdaptSelection::Converged { max_gradient } => {
                let budget_left = op_indices.len() < cfg.max_layers;
                let mut grown = false;
                if budget_left && curv_trials < MAX_CURV_TRIES {
                    // second-order rescue: the scan can flatline in a trough
                    // where some pool direction still has negative curvature;
                    // grow the steepest such direction with a small offset so
                    // the optimizer can roll off the flat point
                    let curv = pool_curvatures(&mut ws, &op_indices, &thetas, &basis, &w_train);
                    let cand = curv
                        .iter()
                        .enumerate()
                        .filter(|(i, &c)| c < -CURV_TOLERANCE && !stall_tried.contains(i))
                        .min_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, _)| i);
                    if let Some(index) = cand {
                        curv_trials += 1;
                        if pending_rescue.is_none() {
                            let f_now = ensemble_free_energy(
                                &mut ws, &op_indices, &basis, cfg.beta, &w_train, &thetas,
                            );
                            pending_rescue = Some((thetas.clone(), f_now, max_gradient));
                        }
                        grad_history.push(max_gradient);
                        op_indices.push(index);
                        selected.push(pool[index].label.clone());
                        // the quadratic descends both ways; seed the side the
                        // higher orders favor
                        let mut t_try = thetas.clone();
                        t_try.push(CURV_SEED);
                        let f_pos = ensemble_free_energy(
                            &mut ws, &op_indices, &basis, cfg.beta, &w_train, &t_try,
                        );
                        *t_try.last_mut().unwrap() = -CURV_SEED;
                        let f_neg = ensemble_free_energy(
                            &mut ws, &op_indices, &basis, cfg.beta, &w_train, &t_try,
                        );
                        let seed = if f_pos <= f_neg { CURV_SEED } else { -CURV_SEED };
                        thetas.push(seed);
                        ansatz.push(pool[index].clone(), seed);
                        grown = true;
                    }
                }
                if !grown {
                    let kickable =
                        cfg.jitter > 0.0 && kicks_used < MAX_STALL_KICKS && !thetas.is_empty();
                    if kickable && budget_left {
                        // basin hopping: escalate the kick amplitude while
                        // the stall persists, so late kicks can hop between
                        // basins rather than just rattling inside this one
                        let scale = (cfg.jitter * 1.6f64.powi(kicks_used as i32)).min(1.0);
                        kicks_used += 1;
                        if pending_rescue.is_none() {
                            let f_now = ensemble_free_energy(
                                &mut ws, &op_indices, &basis, cfg.beta, &w_train, &thetas,
                            );
                            pending_rescue = Some((thetas.clone(), f_now, max_gradient));
                        }
                        for t in thetas.iter_mut() {
                            *t += scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
                        }
                        continue;
                    }
                    if let Some((t_saved, _, g_saved)) = pending_rescue.take() {
                        thetas = t_saved;
                        final_max_grad = g_saved;
                    } else {
                        final_max_grad = max_gradient;
                    }
                    grad_history.push(final_max_grad);
                    break;
                }
            }
            AdaptSelection::Chosen {
                index,
                max_gradient,
                ..
            } => {
                if op_indices.len() >= cfg.max_layers {
                    if let Some((t_saved, _, g_saved)) = pending_rescue.take() {
                        // the pre-escape point had already converged; finish
                        // there instead of reporting a budget violation
                        thetas = t_saved;
                        final_max_grad = g_saved;
                        grad_history.push(final_max_grad);
                        break;
                    }
                    grad_history.push(max_gradient);
                    final_max_grad = max_gradient;
                    ansatz.set_thetas(&thetas)?;
                    refresh_logits(
                        &mut ws,
                        &op_indices,
                        &thetas,
                        &basis,
                        cfg.beta,
                        &mut logits_free,
                        &mut energies,
                    );
                    let model = package_model(
                        h, cfg, &labels, &ansatz, &logits_free, &energies, &phash, false,
                        final_max_grad, fe_history, grad_history, selected,
                    )?;
                    return Err(Error::MaxLayersReached {
                        max_layers: cfg.max_layers,
                        max_gradient: final_max_grad,
                        model: Box::new(model),
                    });
                }
                grad_history.push(max_gradient);
                final_max_grad = max_gradient;
                op_indices.push(index);
                selected.push(pool[index].label.clone());
                thetas.push(0.0);
                ansatz.push(pool[index].clone(), 0.0);
            }
        }

        let op_idx = op_indices.clone();
        let basis_ref = &basis;
        let ws_ref = &mut ws;
        let w_ref = &w_train;
        let mut energies_buf = vec![0.0f64; cfg.m];
        let outcome = minimize(
            |x, grad| {
                free_energy_and_grad(
                    ws_ref,
                    &op_idx,
                    basis_ref,
                    cfg.beta,
                    w_ref,
                    x,
                    grad,
                    &mut energies_buf,
                )
            },
            &thetas,
            &BfgsOptions {
                max_iters: cfg.opt_max_iters,
                grad_tol: cfg.opt_grad_tol,
            },
        );
        if let Some((t_saved, f_saved, _)) = pending_rescue.take() {
            if outcome.value < f_saved - 1e-10 {
                thetas = outcome.x;
                fe_history.push(outcome.value);
                stall_tried.clear();
                curv_trials = 0;
            } else {
                // the escape did not find a lower basin; roll the growth back
                stall_tried.insert(*op_indices.last().unwrap());
                op_indices.pop();
                selected.pop();
                ansatz.pop();
                thetas = t_saved;
            }
        } else {
            thetas = outcome.x;
            if let Some(prev) = fe_history.last() {
                debug_assert!(
                    outcome.value <= prev + 1e-9,
                    "free energy must not increase: {} -> {}",
                    prev,
                    outcome.value
                );
            }
            fe_history.push(outcome.value);
            stall_tried.clear();
            curv_trials = 0;
        }
    }

    ansatz.set_thetas(&thetas)?;
    refresh_logits(
        &mut ws,
        &op_indices,
        &thetas,
        &basis,
        cfg.beta,
        &mut logits_free,
        &mut energies,
    );
    package_model(
        h, cfg, &labels, &ansatz, &logits_free, &energies, &phash, true, final_max_grad,
        fe_history, grad_history, selected,
    )
}

#[allow(clippy::too_many_arguments)]
fn package_model(
    h: &PauliSum,
    cfg: &TepidConfig,
    labels: &[usize],
    ansatz: &AdaptAnsatz,
    logits_free: &[f64],
    energies_raw: &[f64],
    phash: &str,
    converged: bool,
    max_pool_gradient: f64,
    fe_history: Vec<f64>,
    grad_history: Vec<f64>,
    selected: Vec<String>,
) -> Result<TrainedSubspaceModel> {
    let m = labels.len();
    let mut logits = vec![0.0; m];
    logits[1..].copy_from_slice(logits_free);
    let mu = softmax(&logits);
    // sort slots by descending weight (stable: equal weights keep label order)
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]));
    let weights: Vec<f64> = order.iter().map(|&k| mu[k]).collect();
    let sorted_labels: Vec<usize> = order.iter().map(|&k| labels[k]).collect();
    let delta = extract_gaps(&weights, cfg.beta)?;
    let e1 = energies_raw[order[0]];
    let energies: Vec<f64> = delta.iter().map(|d| e1 + d).collect();
    let free_energy = weights
        .iter()
        .zip(order.iter().map(|&k| energies_raw[k]))
        .map(|(w, e)| w * e + w * safe_ln(*w) / cfg.beta)
        .sum::<f64>();

    let mut warnings = Vec::new();
    let mut diagnostics = None;
    if h.n_qubits() <= DIAGNOSTIC_QUBIT_CAP {
        let spec = Spectrum::eigendecompose(h)?;
        if m < spec.dim() {
            let boundary = spec.energies()[m] - spec.energies()[m - 1];
            if boundary.abs() < DEGENERACY_TOL {
                warnings.push(format!(
                    "target subspace boundary is degenerate: E_{m} and E_{} agree within {boundary:.2e}; \
                     the trained subspace is one of many equivalent minimizers",
                    m + 1
                ));
            }
        }
        let mut fids = Vec::with_capacity(m);
        let mut oracle_e = Vec::with_capacity(m);
        for (slot, &k) in order.iter().enumerate() {
            let c = StateVector::basis_state(h.n_qubits(), labels[k])?;
            let trained = ansatz.apply(&c, false)?;
            // nearest oracle level to this slot's energy
            let e = energies[slot];
            let nearest = (0..spec.dim())
                .min_by(|&a, &b| {
                    (spec.energies()[a] - e)
                        .abs()
                        .total_cmp(&(spec.energies()[b] - e).abs())
                })
                .unwrap();
            fids.push(spec.eigenspace_weight(nearest, &trained, DEGENERACY_TOL)?);
            oracle_e.push(spec.energies()[nearest]);
        }
        diagnostics = Some(TrainingDiagnostics {
            eigenstate_fidelities: fids,
            oracle_energies: oracle_e,
            free_energy_history: fe_history,
            max_gradient_history: grad_history,
            selected_labels: selected,
        });
    }

    Ok(TrainedSubspaceModel {
        n_qubits: h.n_qubits(),
        beta: cfg.beta,
        basis_labels: sorted_labels,
        weights,
        energies,
        delta_energies: delta,
        free_energy,
        basis_change: BasisChange::Ansatz(ansatz.clone()),
        pool_hash: phash.to_string(),
        converged,
        max_pool_gradient,
        seed: cfg.seed,
        warnings,
        diagnostics,
    })
}
