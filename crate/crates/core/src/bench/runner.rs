//! Experiment orchestration: train (or reuse) the subspace model, build the
//! family's initial state, evolve with every requested method on a shared
//! time grid, measure, and package the traces.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::ansatz::Variant;
use crate::baselines::{evolve_trotter, plan_trotter, TrotterPlan};
use crate::bench::config::{ExperimentConfig, ExperimentKind};
use crate::bench::emit::{DepthReport, EvolutionResult, Provenance};
use crate::models::{magnon_labels, total_sz, XxzSpec};
use crate::qcore::{C64, PauliSum, Spectrum, StateVector};
use crate::tepid::{lowest_diagonal_labels, train, TepidConfig, TrainedSubspaceModel};
use crate::times::{
    evolve_times_i, evolve_times_ii, find_coefficients, predict_fidelity, weighted_fidelity_i,
    EigenbasisState, FindOptions,
};
use crate::{Error, Result};

/// Eigenstates spanned by the Fig. 3 initial-state families.
const FIG3_SUPPORT: usize = 5;

/// Trains the model for `(cfg.model, tepid)` or loads it from the cache
/// directory when an identical run was already stored there.
pub fn train_or_load(
    model_spec: &XxzSpec,
    tepid: &TepidConfig,
    cache_dir: Option<&std::path::Path>,
) -> Result<TrainedSubspaceModel> {
    let key = {
        let mut h = Sha256::new();
        h.update(serde_json::to_string(model_spec)?.as_bytes());
        h.update(serde_json::to_string(tepid)?.as_bytes());
        crate::ansatz::hex_digest(&h.finalize())
    };
    let cached = cache_dir.map(|d| d.join(format!("model_{}.json", &key[..16])));
    if let Some(path) = &cached {
        if path.exists() {
            return TrainedSubspaceModel::load_json(path);
        }
    }
    let h = model_spec.hamiltonian()?;
    let model = train(&h, tepid)?;
    if let Some(path) = &cached {
        std::fs::create_dir_all(path.parent().unwrap())?;
        model.save_json(path)?;
    }
    Ok(model)
}

/// Initial state for a Fig. 3 family, built on the oracle eigenvectors.
pub fn fig3_initial_state(
    kind: ExperimentKind,
    spectrum: &Spectrum,
    seed: u64,
) -> Result<StateVector> {
    let n = spectrum.n_qubits();
    let mut psi = StateVector::zero_state(n).scaled(C64::new(0.0, 0.0));
    match kind {
        ExperimentKind::Fig3Uniform => {
            let a = C64::new(1.0 / (FIG3_SUPPORT as f64).sqrt(), 0.0);
            for k in 0..FIG3_SUPPORT {
                psi.add_scaled(a, &spectrum.eigenvector(k));
            }
        }
        ExperimentKind::Fig3RandomA | ExperimentKind::Fig3RandomB => {
            let salt = if kind == ExperimentKind::Fig3RandomA {
                0xA
            } else {
                0xB
            };
            let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(salt));
            for k in 0..FIG3_SUPPORT {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                psi.add_scaled(C64::new(re, im), &spectrum.eigenvector(k));
            }
        }
        ExperimentKind::Fig3Boltzmann => {
            for k in 0..spectrum.dim() {
                let a = (-spectrum.energies()[k] / 2.0).exp();
                psi.add_scaled(C64::new(a, 0.0), &spectrum.eigenvector(k));
            }
        }
        other => {
            return Err(Error::Config(format!(
                "{} is not a fig3 family",
                other.slug()
            )))
        }
    }
    Ok(psi.normalized())
}

fn prediction_budget(model: &TrainedSubspaceModel) -> f64 {
    let training_infidelity: f64 = model
        .diagnostics
        .as_ref()
        .map(|d| d.eigenstate_fidelities.iter().map(|f| 1.0 - f).sum())
        .unwrap_or(1e-3);
    10.0 * training_infidelity + 1e-8
}

fn find_options(seed: u64) -> FindOptions {
    FindOptions {
        seed,
        ..FindOptions::default()
    }
}

struct MethodTraces {
    fidelity: BTreeMap<String, Vec<f64>>,
    predicted: BTreeMap<String, Vec<f64>>,
    observables: BTreeMap<String, Vec<Vec<f64>>>,
}

impl MethodTraces {
    fn new() -> Self {
        Self {
            fidelity: BTreeMap::new(),
            predicted: BTreeMap::new(),
            observables: BTreeMap::new(),
        }
    }
}

/// Runs one Fig. 3 family: for every trained rank in the sweep, fidelity
/// traces for the configured variants plus their closed-form predictions.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Vec<EvolutionResult>> {
    cfg.validate()?;
    let h = cfg.model.hamiltonian()?;
    let spectrum = Spectrum::eigendecompose(&h)?;
    let psi0 = fig3_initial_state(cfg.experiment, &spectrum, cfg.seed)?;
    let t_grid = cfg.t_grid();
    let oracle: Vec<StateVector> = t_grid
        .iter()
        .map(|&t| spectrum.evolve(&psi0, t))
        .collect::<Result<_>>()?;
    let mut results = Vec::new();
    for &m in &cfg.m_sweep {
        let model = train_or_load(
            &cfg.model,
            &cfg.tepid_config(m, None),
            cfg.cache_dir.as_deref(),
        )?;
        let fit = find_coefficients(&psi0, &model, &find_options(cfg.seed))?;
        let mut traces = MethodTraces::new();
        let mut depth = DepthReport {
            m,
            n_adapt: model.n_adapt(),
            ..DepthReport::default()
        };
        for &variant in &cfg.variants {
            let key = variant.to_string();
            let sim = simulate_fidelity(&model, &fit, &psi0, &t_grid, &oracle, variant)?;
            traces.fidelity.insert(key.clone(), sim);
            let pred = predict_fidelity(&psi0, &model, &spectrum, variant)?;
            traces.predicted.insert(key, pred.evaluate_grid(&t_grid));
            let d = model.depth_model(cfg.model.n_sites, variant).two_qubit_depth();
            match variant {
                Variant::TimesI => depth.times_i = Some(d),
                Variant::TimesII => depth.times_ii = Some(d),
            }
        }
        results.push(EvolutionResult {
            name: format!("{}_m{m}", cfg.experiment.slug()),
            t_grid: t_grid.clone(),
            fidelity: traces.fidelity,
            predicted: traces.predicted,
            observables: traces.observables,
            observable_label: None,
            depth,
            provenance: Provenance {
                config_hash: cfg.hash(),
                model_hash: model.model_hash(),
                seed: cfg.seed,
                prediction_budget: prediction_budget(&model),
            },
        });
    }
    Ok(results)
}

fn simulate_fidelity(
    model: &TrainedSubspaceModel,
    fit: &EigenbasisState,
    psi0: &StateVector,
    t_grid: &[f64],
    oracle: &[StateVector],
    variant: Variant,
) -> Result<Vec<f64>> {
    t_grid
        .iter()
        .zip(oracle)
        .map(|(&t, ex)| match variant {
            Variant::TimesI => {
                let sim = evolve_times_i(fit, model, t)?;
                weighted_fidelity_i(fit, &sim, ex)
            }
            Variant::TimesII => evolve_times_ii(psi0, model, t)?.fidelity(ex),
        })
        .collect()
}

fn trotter_grid(plan: &TrotterPlan) -> Vec<f64> {
    (0..=plan.n_steps).map(|k| k as f64 * plan.dt).collect()
}

fn sz_deficit_rows(states: &[StateVector], n_sites: usize) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|s| {
            (0..n_sites)
                .map(|q| 1.0 - s.sigma_z_expectation(q))
                .collect()
        })
        .collect()
}

fn energy_rows(states: &[StateVector], densities: &[PauliSum]) -> Result<Vec<Vec<f64>>> {
    states
        .iter()
        .map(|s| densities.iter().map(|h| h.expectation(s)).collect())
        .collect()
}

/// Magnon wave-packet study: single-flip sector training, variant-I
/// evolution, depth-matched Trotter, per-site magnetization deficits.
pub fn run_wavepacket(cfg: &ExperimentConfig) -> Result<EvolutionResult> {
    cfg.validate()?;
    let packet = cfg
        .wave_packet
        .ok_or_else(|| Error::Config("missing wave_packet table".into()))?;
    let n = cfg.model.n_sites;
    let h = cfg.model.hamiltonian()?;
    let spectrum = Spectrum::eigendecompose(&h)?;
    let psi0 = packet.state(n)?;
    let m = cfg.m_sweep[0];
    if m > magnon_labels(n).len() {
        return Err(Error::Config(format!(
            "rank {m} exceeds the {n}-state magnon sector"
        )));
    }
    let labels = lowest_diagonal_labels(&h, m, Some(1))?;
    let model = train_or_load(
        &cfg.model,
        &cfg.tepid_config(m, Some(labels)),
        cfg.cache_dir.as_deref(),
    )?;
    let depth_i = model
        .depth_model(n, Variant::TimesI)
        .two_qubit_depth();
    let plan = plan_trotter(&cfg.model, cfg.t_max, depth_i)?;
    let t_grid = trotter_grid(&plan);
    let oracle: Vec<StateVector> = t_grid
        .iter()
        .map(|&t| spectrum.evolve(&psi0, t))
        .collect::<Result<_>>()?;
    let fit = find_coefficients(&psi0, &model, &find_options(cfg.seed))?;
    let times_i: Vec<StateVector> = t_grid
        .iter()
        .map(|&t| evolve_times_i(&fit, &model, t))
        .collect::<Result<_>>()?;
    let trotter = evolve_trotter(&plan, &psi0)?;

    let mut traces = MethodTraces::new();
    traces.fidelity.insert(
        "times_i".into(),
        times_i
            .iter()
            .zip(&oracle)
            .map(|(s, ex)| weighted_fidelity_i(&fit, s, ex))
            .collect::<Result<_>>()?,
    );
    traces.fidelity.insert(
        "trotter".into(),
        trotter
            .iter()
            .zip(&oracle)
            .map(|(s, ex)| s.fidelity(ex))
            .collect::<Result<_>>()?,
    );
    let pred = predict_fidelity(&psi0, &model, &spectrum, Variant::TimesI)?;
    traces
        .predicted
        .insert("times_i".into(), pred.evaluate_grid(&t_grid));
    traces
        .observables
        .insert("oracle".into(), sz_deficit_rows(&oracle, n));
    traces
        .observables
        .insert("times_i".into(), sz_deficit_rows(&times_i, n));
    traces
        .observables
        .insert("trotter".into(), sz_deficit_rows(&trotter, n));

    Ok(EvolutionResult {
        name: format!("{}_m{m}", cfg.experiment.slug()),
        t_grid,
        fidelity: traces.fidelity,
        predicted: traces.predicted,
        observables: traces.observables,
        observable_label: Some("one_minus_sz".into()),
        depth: DepthReport {
            m,
            n_adapt: model.n_adapt(),
            times_i: Some(depth_i),
            times_ii: None,
            trotter_steps: Some(plan.n_steps),
            trotter_depth_per_step: Some(plan.depth_per_step),
        },
        provenance: Provenance {
            config_hash: cfg.hash(),
            model_hash: model.model_hash(),
            seed: cfg.seed,
            prediction_budget: prediction_budget(&model),
        },
    })
}

/// Staggered-field transport study: symmetry-sector training, variant-II
/// evolution of the perturbed ground state, per-site energy densities.
pub fn run_transport(cfg: &ExperimentConfig) -> Result<EvolutionResult> {
    cfg.validate()?;
    let pert = cfg
        .perturbation
        .ok_or_else(|| Error::Config("missing perturbation table".into()))?;
    let n = cfg.model.n_sites;
    let h = cfg.model.hamiltonian()?;
    let spectrum = Spectrum::eigendecompose(&h)?;
    let psi0 = crate::models::build_perturbed_ground_state(&cfg.model, &pert)?;
    // train inside the initial state's magnetization sector
    let sz = total_sz(n).expectation(&psi0)?;
    let flips = ((n as f64 - sz) / 2.0).round() as u32;
    let m = cfg.m_sweep[0];
    let labels = lowest_diagonal_labels(&h, m, Some(flips))?;
    let model = train_or_load(
        &cfg.model,
        &cfg.tepid_config(m, Some(labels)),
        cfg.cache_dir.as_deref(),
    )?;
    let depth_ii = model.depth_model(n, Variant::TimesII).two_qubit_depth();
    let plan = plan_trotter(&cfg.model, cfg.t_max, depth_ii)?;
    let t_grid = trotter_grid(&plan);
    let oracle: Vec<StateVector> = t_grid
        .iter()
        .map(|&t| spectrum.evolve(&psi0, t))
        .collect::<Result<_>>()?;
    let times_ii: Vec<StateVector> = t_grid
        .iter()
        .map(|&t| evolve_times_ii(&psi0, &model, t))
        .collect::<Result<_>>()?;
    let trotter = evolve_trotter(&plan, &psi0)?;
    let densities: Vec<PauliSum> = (1..=n)
        .map(|k| cfg.model.energy_density(k))
        .collect::<Result<_>>()?;

    let mut traces = MethodTraces::new();
    traces.fidelity.insert(
        "times_ii".into(),
        times_ii
            .iter()
            .zip(&oracle)
            .map(|(s, ex)| s.fidelity(ex))
            .collect::<Result<_>>()?,
    );
    traces.fidelity.insert(
        "trotter".into(),
        trotter
            .iter()
            .zip(&oracle)
            .map(|(s, ex)| s.fidelity(ex))
            .collect::<Result<_>>()?,
    );
    let pred = predict_fidelity(&psi0, &model, &spectrum, Variant::TimesII)?;
    traces
        .predicted
        .insert("times_ii".into(), pred.evaluate_grid(&t_grid));
    traces
        .observables
        .insert("oracle".into(), energy_rows(&oracle, &densities)?);
    traces
        .observables
        .insert("times_ii".into(), energy_rows(&times_ii, &densities)?);
    traces
        .observables
        .insert("trotter".into(), energy_rows(&trotter, &densities)?);

    Ok(EvolutionResult {
        name: format!("{}_m{m}", cfg.experiment.slug()),
        t_grid,
        fidelity: traces.fidelity,
        predicted: traces.predicted,
        observables: traces.observables,
        observable_label: Some("energy_density".into()),
        depth: DepthReport {
            m,
            n_adapt: model.n_adapt(),
            times_i: None,
            times_ii: Some(depth_ii),
            trotter_steps: Some(plan.n_steps),
            trotter_depth_per_step: Some(plan.depth_per_step),
        },
        provenance: Provenance {
            config_hash: cfg.hash(),
            model_hash: model.model_hash(),
            seed: cfg.seed,
            prediction_budget: prediction_budget(&model),
        },
    })
}

/// Dispatch on the configured experiment kind.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<EvolutionResult>> {
    match cfg.experiment {
        ExperimentKind::Fig3RandomA
        | ExperimentKind::Fig3RandomB
        | ExperimentKind::Fig3Uniform
        | ExperimentKind::Fig3Boltzmann => run_fig3(cfg),
        ExperimentKind::Wavepacket => Ok(vec![run_wavepacket(cfg)?]),
        ExperimentKind::Transport => Ok(vec![run_transport(cfg)?]),
        ExperimentKind::Custom => Err(Error::Config(
            "custom experiments are driven through the train/evolve/predict subcommands".into(),
        )),
    }
}
