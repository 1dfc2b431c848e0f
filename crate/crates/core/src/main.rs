//! Command-line front end: train subspace models, evolve states with the
//! trained circuit or the baselines, and reproduce the bundled experiments.
//!
//! Every subcommand prints a one-line JSON summary on stdout; failures print
//! `{"error": "..."}` on stderr and exit nonzero.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use times_adapt::ansatz::Variant;
use times_adapt::baselines::{evolve_trotter, plan_trotter, plan_trotter_steps};
use times_adapt::bench::{self, ExperimentConfig, ExperimentKind};
use times_adapt::qcore::{Spectrum, StateVector};
use times_adapt::tepid::{train, TrainedSubspaceModel};
use times_adapt::times::{evolve_times_i, evolve_times_ii, find_coefficients, predict_fidelity, FindOptions};
use times_adapt::{Error, Result};

#[derive(Parser)]
#[command(name = "times-adapt", version, about = "Subspace-trained fixed-depth time evolution for spin chains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a built-in experiment preset as TOML
    Preset {
        #[arg(long, value_enum)]
        experiment: KindArg,
        /// destination file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a subspace model for the configured Hamiltonian
    Train {
        #[arg(long)]
        config: PathBuf,
        /// ensemble rank; defaults to the first entry of the config's m_sweep
        #[arg(short, long)]
        m: Option<usize>,
        /// explicit computational-basis labels, e.g. 5,10,6
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a state with a trained model at a single time
    Evolve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// initial state JSON (array of [re, im] pairs)
        #[arg(long)]
        state: PathBuf,
        #[arg(short, long)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a state exactly via dense diagonalization
    Exact {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(short, long)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a state with a first-order Trotter product formula
    Trotter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(short, long)]
        t: f64,
        #[arg(long, conflicts_with = "depth")]
        steps: Option<usize>,
        /// pick the step count from a two-qubit-layer budget instead
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form fidelity prediction on a time grid (CSV)
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// grid as start:stop:count
        #[arg(long, default_value = "0:10:201")]
        t_grid: String,
        /// destination CSV; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Superposition-family fidelity sweep on the six-site chain
    Fig3 {
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Magnon wave-packet study on the longitudinal-field chain
    Wavepacket {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Energy-transport study on the staggered-field ring
    Transport {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// experiment TOML; defaults to the built-in preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory for CSV traces and manifest.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// directory for trained-model reuse between runs
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    I,
    Ii,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::I => Variant::TimesI,
            VariantArg::Ii => Variant::TimesII,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KindArg {
    Fig3RandomA,
    Fig3RandomB,
    Fig3Uniform,
    Fig3Boltzmann,
    Wavepacket,
    Transport,
    Custom,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Fig3RandomA => ExperimentKind::Fig3RandomA,
            KindArg::Fig3RandomB => ExperimentKind::Fig3RandomB,
            KindArg::Fig3Uniform => ExperimentKind::Fig3Uniform,
            KindArg::Fig3Boltzmann => ExperimentKind::Fig3Boltzmann,
            KindArg::Wavepacket => ExperimentKind::Wavepacket,
            KindArg::Transport => ExperimentKind::Transport,
            KindArg::Custom => ExperimentKind::Custom,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum FamilyArg {
    RandomA,
    RandomB,
    Uniform,
    Boltzmann,
}

impl From<FamilyArg> for ExperimentKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::RandomA => ExperimentKind::Fig3RandomA,
            FamilyArg::RandomB => ExperimentKind::Fig3RandomB,
            FamilyArg::Uniform => ExperimentKind::Fig3Uniform,
            FamilyArg::Boltzmann => ExperimentKind::Fig3Boltzmann,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.cmd) {
        eprintln!("{}", json!({ "error": e.to_string() }));
        std::process::exit(1);
    }
}

fn read_state(path: &Path) -> Result<StateVector> {
    bench::state_from_json(&std::fs::read_to_string(path)?)
}

fn write_state(path: &Path, psi: &StateVector) -> Result<()> {
    Ok(std::fs::write(path, bench::state_to_json(psi))?)
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("grid must be start:stop:count, got {text}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count < 2 || !(stop > start) {
        return Err(bad());
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// Loads the run config (file or preset) and applies command-line overrides.
fn resolve_config(kind: ExperimentKind, run: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &run.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(kind),
    };
    if run.config.is_none() {
        cfg.experiment = kind;
    }
    if let Some(out) = &run.out {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(cache) = &run.cache_dir {
        cfg.cache_dir = Some(cache.clone());
    }
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(cfg: &ExperimentConfig) -> Result<()> {
    let results = bench::run(cfg)?;
    let out_dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.experiment.slug()));
    let manifest = bench::emit(cfg, &results, &out_dir)?;
    println!(
        "{}",
        json!({ "manifest": manifest, "results": results.len() })
    );
    Ok(())
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Preset { experiment, out } => {
            let text = ExperimentConfig::preset(experiment.into()).to_toml();
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    println!("{}", json!({ "out": path }));
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Cmd::Train { config, m, labels, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let m = m.unwrap_or_else(|| cfg.m_sweep.first().copied().unwrap_or(1));
            let h = cfg.model.hamiltonian()?;
            let model = train(&h, &cfg.tepid_config(m, labels))?;
            model.save_json(&out)?;
            println!(
                "{}",
                json!({
                    "out": out,
                    "m": model.m(),
                    "n_adapt": model.n_adapt(),
                    "free_energy": model.free_energy,
                    "energies": model.energies,
                    "converged": model.converged,
                    "max_pool_gradient": model.max_pool_gradient,
                })
            );
            Ok(())
        }
        Cmd::Evolve { model, variant, state, t, out } => {
            let model = TrainedSubspaceModel::load_json(&model)?;
            let psi0 = read_state(&state)?;
            let mut summary = json!({ "out": out, "t": t });
            let evolved = match variant {
                VariantArg::I => {
                    let fit = find_coefficients(&psi0, &model, &FindOptions::default())?;
                    summary["in_subspace_weight"] = json!(fit.in_subspace_weight());
                    summary["residual_norm_sq"] = json!(fit.residual_norm_sq);
                    evolve_times_i(&fit, &model, t)?
                }
                VariantArg::Ii => evolve_times_ii(&psi0, &model, t)?,
            };
            write_state(&out, &evolved)?;
            println!("{summary}");
            Ok(())
        }
        Cmd::Exact { config, state, t, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let spectrum = Spectrum::eigendecompose(&cfg.model.hamiltonian()?)?;
            let evolved = spectrum.evolve(&read_state(&state)?, t)?;
            write_state(&out, &evolved)?;
            println!("{}", json!({ "out": out, "t": t }));
            Ok(())
        }
        Cmd::Trotter { config, state, t, steps, depth, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let plan = match (steps, depth) {
                (Some(n), None) => plan_trotter_steps(&cfg.model, t, n)?,
                (None, Some(d)) => plan_trotter(&cfg.model, t, d)?,
                _ => {
                    return Err(Error::Config(
                        "pass exactly one of --steps or --depth".into(),
                    ))
                }
            };
            let trace = evolve_trotter(&plan, &read_state(&state)?)?;
            write_state(&out, trace.last().expect("trace includes t=0"))?;
            println!(
                "{}",
                json!({
                    "out": out,
                    "t": t,
                    "n_steps": plan.n_steps,
                    "dt": plan.dt,
                    "depth_per_step": plan.depth_per_step,
                })
            );
            Ok(())
        }
        Cmd::Predict { model, config, state, variant, t_grid, out } => {
            let model = TrainedSubspaceModel::load_json(&model)?;
            let cfg = ExperimentConfig::load(&config)?;
            let spectrum = Spectrum::eigendecompose(&cfg.model.hamiltonian()?)?;
            let psi0 = read_state(&state)?;
            let grid = parse_grid(&t_grid)?;
            let prediction = predict_fidelity(&psi0, &model, &spectrum, variant.into())?;
            let mut text = String::from("t,predicted_fidelity\n");
            for (t, f) in grid.iter().zip(prediction.evaluate_grid(&grid)) {
                text.push_str(&format!("{t},{f}\n"));
            }
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    println!("{}", json!({ "out": path, "points": grid.len() }));
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Cmd::Fig3 { family, run } => {
            let kind = family
                .map(ExperimentKind::from)
                .unwrap_or(ExperimentKind::Fig3Uniform);
            let mut cfg = resolve_config(kind, &run)?;
            if let Some(f) = family {
                cfg.experiment = f.into();
            }
            if !matches!(
                cfg.experiment,
                ExperimentKind::Fig3RandomA
                    | ExperimentKind::Fig3RandomB
                    | ExperimentKind::Fig3Uniform
                    | ExperimentKind::Fig3Boltzmann
            ) {
                return Err(Error::Config(format!(
                    "config describes {}, not a fig3 family",
                    cfg.experiment.slug()
                )));
            }
            run_experiment(&cfg)
        }
        Cmd::Wavepacket { run } => {
            let cfg = resolve_config(ExperimentKind::Wavepacket, &run)?;
            if cfg.experiment != ExperimentKind::Wavepacket {
                return Err(Error::Config(format!(
                    "config describes {}, not the wavepacket study",
                    cfg.experiment.slug()
                )));
            }
            run_experiment(&cfg)
        }
        Cmd::Transport { run } => {
            let cfg = resolve_config(ExperimentKind::Transport, &run)?;
            if cfg.experiment != ExperimentKind::Transport {
                return Err(Error::Config(format!(
                    "config describes {}, not the transport study",
                    cfg.experiment.slug()
                )));
            }
            run_experiment(&cfg)
        }
    }
}
