//! First-order Trotter evolution with odd/even/field splitting, plus the
//! exact-evolution wrapper used as the comparison oracle.
//!
//! The step count is chosen by depth matching: each Trotter step costs a
//! fixed number of two-qubit layers (three per nonempty bond partition, the
//! field factor is diagonal and free), and the budget is whatever the
//! competing fixed-depth circuit spends in total.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::models::{FieldPattern, XxzSpec};
use crate::qcore::{C64, Pauli, PauliString, PauliSum, Spectrum, StateVector};
use crate::{Error, Result};

/// Two-qubit layers per nonempty bond partition: one layer per Pauli flavor
/// (XX, YY, ZZ) since the bonds inside a partition touch disjoint qubit pairs
/// on a chain.
const LAYERS_PER_PARTITION: usize = 3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub h_odd: PauliSum,
    pub h_even: PauliSum,
    pub h_field: PauliSum,
    pub dt: f64,
    pub n_steps: usize,
    pub depth_per_step: usize,
}

fn partition(spec: &XxzSpec) -> Result<(PauliSum, PauliSum, PauliSum)> {
    spec.validate()?;
    let n = spec.n_sites;
    let mut h_odd = PauliSum::new(n);
    let mut h_even = PauliSum::new(n);
    for k in 1..=spec.n_bonds() {
        let a = k - 1;
        let b = k % n;
        let target = if k % 2 == 1 { &mut h_odd } else { &mut h_even };
        for (p, c) in [(Pauli::X, 1.0), (Pauli::Y, 1.0), (Pauli::Z, spec.j_z)] {
            target.add_term(c, PauliString::identity(n).with(a, p).with(b, p));
        }
    }
    let mut h_field = PauliSum::new(n);
    if spec.field != FieldPattern::None && spec.h_z != 0.0 {
        for k in 1..=n {
            h_field.add_term(
                spec.h_z * spec.field_sign(k),
                PauliString::single(n, k - 1, Pauli::Z),
            );
        }
    }
    Ok((h_odd, h_even, h_field))
}

fn step_depth(h_odd: &PauliSum, h_even: &PauliSum) -> usize {
    let mut partitions = 0;
    if !h_odd.terms().is_empty() {
        partitions += 1;
    }
    if !h_even.terms().is_empty() {
        partitions += 1;
    }
    LAYERS_PER_PARTITION * partitions
}

/// Picks the largest step count whose total two-qubit depth stays within
/// `target_depth`, then spreads `total_time` evenly across the steps.
pub fn plan_trotter(spec: &XxzSpec, total_time: f64, target_depth: usize) -> Result<TrotterPlan> {
    let (h_odd, h_even, h_field) = partition(spec)?;
    let depth_per_step = step_depth(&h_odd, &h_even);
    if depth_per_step == 0 {
        return Err(Error::InvalidModel(
            "model has no bond terms to trotterize".into(),
        ));
    }
    let n_steps = target_depth / depth_per_step;
    if n_steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "depth budget {target_depth} is below one step ({depth_per_step})"
        )));
    }
    Ok(TrotterPlan {
        h_odd,
        h_even,
        h_field,
        dt: total_time / n_steps as f64,
        n_steps,
        depth_per_step,
    })
}

/// Plan with an explicit step count, for step-size studies.
pub fn plan_trotter_steps(spec: &XxzSpec, total_time: f64, n_steps: usize) -> Result<TrotterPlan> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let (h_odd, h_even, h_field) = partition(spec)?;
    let depth_per_step = step_depth(&h_odd, &h_even);
    Ok(TrotterPlan {
        h_odd,
        h_even,
        h_field,
        dt: total_time / n_steps as f64,
        n_steps,
        depth_per_step,
    })
}

impl TrotterPlan {
    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn total_depth(&self) -> usize {
        self.depth_per_step * self.n_steps
    }

    /// The recombined Hamiltonian, for completeness checks and oracles.
    pub fn full_hamiltonian(&self) -> PauliSum {
        let mut h = self.h_odd.clone();
        h.add_scaled(1.0, &self.h_even);
        h.add_scaled(1.0, &self.h_field);
        h
    }
}

/// One exactly exponentiated connected component of a partition, applied as a
/// dense gate on its support qubits.
struct ComponentGate {
    qubits: Vec<usize>,
    u: DMatrix<C64>,
}

fn spread(small: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((small >> j) & 1) << q))
}

fn gather(full: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((full >> q) & 1) << j))
}

/// Splits `h` into support-connected components and exponentiates each one
/// exactly as a small dense matrix. Inside a bond partition the components
/// are single bonds (or short clusters where a ring wraps onto itself), so
/// the eigenproblems stay tiny and every symmetry of a component is inherited
/// by its factor at machine precision.
fn component_gates(h: &PauliSum, dt: f64) -> Vec<ComponentGate> {
    let n = h.n_qubits();
    let mut comps: Vec<(usize, Vec<(f64, PauliString)>)> = Vec::new();
    for (c, s) in h.terms() {
        let mut mask = 0usize;
        for q in 0..n {
            if s.op(q) != Pauli::I {
                mask |= 1 << q;
            }
        }
        let mut acc = (mask, vec![(*c, s.clone())]);
        let mut rest = Vec::with_capacity(comps.len());
        for comp in comps {
            if comp.0 & acc.0 != 0 {
                acc.0 |= comp.0;
                acc.1.extend(comp.1);
            } else {
                rest.push(comp);
            }
        }
        rest.push(acc);
        comps = rest;
    }
    comps
        .into_iter()
        .map(|(mask, terms)| {
            let qubits: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
            let sd = 1usize << qubits.len();
            let mut small = DMatrix::from_element(sd, sd, C64::new(0.0, 0.0));
            for col in 0..sd {
                let full = spread(col, &qubits);
                for (c, s) in &terms {
                    let (row, f) = s.map_basis(full);
                    debug_assert_eq!(row & !mask, 0, "term acts outside its component");
                    small[(gather(row, &qubits), col)] += f * *c;
                }
            }
            let eig = nalgebra::linalg::SymmetricEigen::new(small);
            let mut phases = DMatrix::from_element(sd, sd, C64::new(0.0, 0.0));
            for k in 0..sd {
                phases[(k, k)] = C64::from_polar(1.0, -eig.eigenvalues[k] * dt);
            }
            ComponentGate {
                qubits,
                u: &eig.eigenvectors * phases * eig.eigenvectors.adjoint(),
            }
        })
        .collect()
}

fn apply_gate(gate: &ComponentGate, v: &mut DVector<C64>) {
    let sd = 1usize << gate.qubits.len();
    let mask = gate.qubits.iter().fold(0usize, |m, &q| m | (1 << q));
    let mut idx = vec![0usize; sd];
    let mut w = vec![C64::new(0.0, 0.0); sd];
    for base in 0..v.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, slot) in idx.iter_mut().enumerate() {
            *slot = base | spread(s, &gate.qubits);
        }
        for (r, out) in w.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..sd {
                acc += gate.u[(r, c)] * v[idx[c]];
            }
            *out = acc;
        }
        for (s, out) in w.iter().enumerate() {
            v[idx[s]] = *out;
        }
    }
}

/// Diagonal phases of the field factor (all terms are Z strings).
fn field_phases(h: &PauliSum, dim: usize, dt: f64) -> Vec<C64> {
    (0..dim)
        .map(|b| {
            let mut e = 0.0;
            for (c, s) in h.terms() {
                let (row, f) = s.map_basis(b);
                debug_assert_eq!(row, b, "field partition must be diagonal");
                e += c * f.re;
            }
            C64::from_polar(1.0, -e * dt)
        })
        .collect()
}

/// Runs the plan: each step applies `e^{-iH_o dt} e^{-iH_e dt} e^{-iH_z dt}`,
/// rightmost factor first. Returns the state after every step, with the
/// initial state at index 0.
pub fn evolve_trotter(plan: &TrotterPlan, psi0: &StateVector) -> Result<Vec<StateVector>> {
    let n = plan.h_odd.n_qubits();
    let dim = plan.h_odd.dim();
    if psi0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: psi0.dim(),
        });
    }
    let odd_gates = component_gates(&plan.h_odd, plan.dt);
    let even_gates = component_gates(&plan.h_even, plan.dt);
    let phases = field_phases(&plan.h_field, dim, plan.dt);
    let mut trace = Vec::with_capacity(plan.n_steps + 1);
    trace.push(psi0.clone());
    let mut v: DVector<C64> = psi0.amplitudes().clone();
    for _ in 0..plan.n_steps {
        for (a, p) in v.iter_mut().zip(&phases) {
            *a *= p;
        }
        for g in &even_gates {
            apply_gate(g, &mut v);
        }
        for g in &odd_gates {
            apply_gate(g, &mut v);
        }
        trace.push(StateVector::from_dvector(n, v.clone()));
    }
    Ok(trace)
}

/// Exact states on a time grid, evolved in the oracle eigenbasis.
pub fn exact_trace(
    spectrum: &Spectrum,
    psi0: &StateVector,
    t_grid: &[f64],
) -> Result<Vec<StateVector>> {
    t_grid.iter().map(|&t| spectrum.evolve(psi0, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Boundary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn xxz4() -> XxzSpec {
        XxzSpec {
            n_sites: 4,
            j_z: 1.5,
            h_z: 0.0,
            boundary: Boundary::Open,
            field: FieldPattern::None,
        }
    }

    #[test]
    fn partition_recombines_exactly() {
        for spec in [
            XxzSpec::staggered_ring(5, 1.2, 0.3),
            XxzSpec::longitudinal(4, -0.8, 0.1),
            XxzSpec::six_site_study(),
        ] {
            let h = spec.hamiltonian().unwrap();
            let plan = plan_trotter_steps(&spec, 1.0, 1).unwrap();
            let lhs = plan.full_hamiltonian().dense_matrix().unwrap();
            let rhs = h.dense_matrix().unwrap();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn depth_matching_reproduces_step_counts() {
        let magnon = XxzSpec::longitudinal(7, -1.5, 0.25);
        let plan = plan_trotter(&magnon, 10.0, 413).unwrap();
        assert_eq!(plan.depth_per_step, 6);
        assert_eq!(plan.n_steps, 68);
        assert!((plan.dt - 0.147).abs() < 1e-3);
        assert!((plan.total_time() - 10.0).abs() < 1e-12);

        let transport = XxzSpec::staggered_ring(7, 1.5, 0.5);
        let plan = plan_trotter(&transport, 10.0, 1534).unwrap();
        assert_eq!(plan.depth_per_step, 6);
        assert_eq!(plan.n_steps, 255);
    }

    #[test]
    fn depth_budget_below_one_step_is_rejected() {
        assert!(matches!(
            plan_trotter(&xxz4(), 1.0, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn commuting_partition_is_exact_at_any_step_size() {
        let n = 3;
        let zz = |a: usize, b: usize, c: f64| {
            PauliSum::new(n).with_term(c, PauliString::identity(n).with(a, Pauli::Z).with(b, Pauli::Z))
        };
        let plan = TrotterPlan {
            h_odd: zz(0, 1, 0.7),
            h_even: zz(1, 2, -0.3),
            h_field: PauliSum::new(n)
                .with_term(0.2, PauliString::single(n, 0, Pauli::Z))
                .with_term(-0.5, PauliString::single(n, 2, Pauli::Z)),
            dt: 0.9,
            n_steps: 3,
            depth_per_step: 6,
        };
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let psi = StateVector::random(n, &mut rng);
        let trace = evolve_trotter(&plan, &psi).unwrap();
        let spec = Spectrum::eigendecompose(&plan.full_hamiltonian()).unwrap();
        let exact = spec.evolve(&psi, plan.total_time()).unwrap();
        let f = trace.last().unwrap().fidelity(&exact).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_single_step_is_near_identity() {
        let plan = plan_trotter_steps(&xxz4(), 1e-6, 1).unwrap();
        let psi = StateVector::basis_state(4, 5).unwrap();
        let trace = evolve_trotter(&plan, &psi).unwrap();
        let diff = (trace[1].amplitudes() - psi.amplitudes()).norm();
        assert!(diff < 1e-5, "moved by {diff}");
    }

    #[test]
    fn many_steps_converge_to_oracle() {
        let spec_model = xxz4();
        let h = spec_model.hamiltonian().unwrap();
        let plan = plan_trotter_steps(&spec_model, 10.0, 10_000).unwrap();
        let psi = StateVector::basis_state(4, 5).unwrap();
        let trace = evolve_trotter(&plan, &psi).unwrap();
        let oracle = Spectrum::eigendecompose(&h)
            .unwrap()
            .evolve(&psi, 10.0)
            .unwrap();
        let f = trace.last().unwrap().fidelity(&oracle).unwrap();
        assert!(f > 1.0 - 1e-5, "fidelity {f}");
    }

    #[test]
    fn norm_and_sz_are_preserved_along_the_trace() {
        let spec_model = XxzSpec::staggered_ring(6, 1.5, 0.5);
        let plan = plan_trotter_steps(&spec_model, 5.0, 40).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let psi = StateVector::random(6, &mut rng);
        let sz = crate::models::total_sz(6);
        let sz0 = sz.expectation(&psi).unwrap();
        for (k, state) in evolve_trotter(&plan, &psi).unwrap().iter().enumerate() {
            assert!((state.norm() - 1.0).abs() < 1e-12);
            let drift = (sz.expectation(state).unwrap() - sz0).abs();
            assert!(drift < 1e-10, "step {k}: S_z drift {drift:.3e}");
        }
    }

    #[test]
    fn splitting_error_per_state_halves_with_the_step() {
        let spec_model = xxz4();
        let h = spec_model.hamiltonian().unwrap();
        let oracle = Spectrum::eigendecompose(&h).unwrap();
        let psi = StateVector::basis_state(4, 5).unwrap();
        let exact = oracle.evolve(&psi, 2.0).unwrap();
        let err_at = |steps: usize| {
            let plan = plan_trotter_steps(&spec_model, 2.0, steps).unwrap();
            let out = evolve_trotter(&plan, &psi).unwrap();
            (out.last().unwrap().amplitudes() - exact.amplitudes()).norm()
        };
        let mut prev = err_at(64);
        for steps in [128, 256, 512] {
            let cur = err_at(steps);
            let ratio = prev / cur;
            assert!(
                (1.7..=2.6).contains(&ratio),
                "norm error ratio {ratio} at {steps} steps"
            );
            prev = cur;
        }
    }

    #[test]
    fn exact_trace_matches_spectrum_evolve() {
        let h = xxz4().hamiltonian().unwrap();
        let spec = Spectrum::eigendecompose(&h).unwrap();
        let psi = StateVector::basis_state(4, 3).unwrap();
        let grid = [0.0, 0.5, 1.5];
        let trace = exact_trace(&spec, &psi, &grid).unwrap();
        assert_eq!(trace.len(), 3);
        for (s, &t) in trace.iter().zip(&grid) {
            let direct = spec.evolve(&psi, t).unwrap();
            assert!((s.fidelity(&direct).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
