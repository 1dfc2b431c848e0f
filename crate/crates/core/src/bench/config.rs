//! Experiment configuration: which study to run, on which model, with which
//! training and grid knobs. Serialized as TOML for the CLI and embedded into
//! every emitted manifest for provenance.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::Variant;
use crate::models::{PerturbationSpec, WavePacketSpec, XxzSpec};
use crate::tepid::{PoolKind, TepidConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig3RandomA,
    Fig3RandomB,
    Fig3Uniform,
    Fig3Boltzmann,
    Wavepacket,
    Transport,
    Custom,
}

impl ExperimentKind {
    pub fn slug(&self) -> &'static str {
        match self {
            ExperimentKind::Fig3RandomA => "fig3_random_a",
            ExperimentKind::Fig3RandomB => "fig3_random_b",
            ExperimentKind::Fig3Uniform => "fig3_uniform",
            ExperimentKind::Fig3Boltzmann => "fig3_boltzmann",
            ExperimentKind::Wavepacket => "wavepacket",
            ExperimentKind::Transport => "transport",
            ExperimentKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelOverride {
    pub m: usize,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: XxzSpec,
    pub beta: f64,
    pub pool: PoolKind,
    pub grad_tolerance: f64,
    pub max_layers: usize,
    /// Subspace ranks to train, one result per entry.
    pub m_sweep: Vec<usize>,
    pub variants: Vec<Variant>,
    pub t_max: f64,
    /// Grid resolution. Depth-matched experiments ignore it and sample at
    /// the Trotter step times so every method shares the same instants.
    pub n_points: usize,
    pub seed: u64,
    #[serde(default)]
    pub wave_packet: Option<WavePacketSpec>,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    /// Explicit training basis labels per rank. Sweep entries without an
    /// override fall back to lowest-diagonal selection.
    #[serde(default)]
    pub basis_labels: Vec<LabelOverride>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            model: XxzSpec::six_site_study(),
            beta: 2.0,
            pool: PoolKind::Pauli,
            grad_tolerance: 1e-5,
            max_layers: 240,
            m_sweep: (1..=5).collect(),
            variants: vec![Variant::TimesI, Variant::TimesII],
            t_max: 10.0,
            n_points: 201,
            seed: 17,
            wave_packet: None,
            perturbation: None,
            basis_labels: Vec::new(),
            out_dir: None,
            cache_dir: None,
        };
        match kind {
            ExperimentKind::Fig3RandomA
            | ExperimentKind::Fig3RandomB
            | ExperimentKind::Fig3Uniform
            | ExperimentKind::Fig3Boltzmann => Self {
                // the six-site rank-5 target spans magnetization sectors
                // {0, 0, +1, -1, 0}; plain lowest-diagonal selection stacks
                // the tied labels into a single sector and the fifth slot
                // then settles on the wrong level
                basis_labels: vec![LabelOverride {
                    m: 5,
                    labels: vec![21, 42, 10, 18, 37],
                }],
                ..base
            },
            ExperimentKind::Custom => base,
            ExperimentKind::Wavepacket => Self {
                model: XxzSpec::longitudinal(7, -1.5, 0.25),
                pool: PoolKind::Qeb,
                m_sweep: vec![7],
                variants: vec![Variant::TimesI],
                wave_packet: Some(WavePacketSpec {
                    center: 4.0,
                    lambda: 1.0,
                }),
                ..base
            },
            ExperimentKind::Transport => Self {
                model: XxzSpec::staggered_ring(7, 1.5, 0.5),
                pool: PoolKind::Qeb,
                m_sweep: vec![4],
                variants: vec![Variant::TimesII],
                perturbation: Some(PerturbationSpec {
                    center: 4.0,
                    sigma: 1.0,
                    amplitude: 1.0,
                }),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Config(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Config("need at least two grid points".into()));
        }
        if self.m_sweep.is_empty() || self.m_sweep.iter().any(|&m| m == 0) {
            return Err(Error::Config("m_sweep entries must be >= 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        for o in &self.basis_labels {
            if o.labels.len() != o.m {
                return Err(Error::Config(format!(
                    "label override for m={} lists {} labels",
                    o.m,
                    o.labels.len()
                )));
            }
        }
        match self.experiment {
            ExperimentKind::Wavepacket if self.wave_packet.is_none() => {
                Err(Error::Config("wavepacket experiment needs a wave_packet table".into()))
            }
            ExperimentKind::Transport if self.perturbation.is_none() => {
                Err(Error::Config("transport experiment needs a perturbation table".into()))
            }
            _ => Ok(()),
        }
    }

    /// Evenly spaced grid over `[0, t_max]`, endpoints included.
    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| self.t_max * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn tepid_config(&self, m: usize, basis_labels: Option<Vec<usize>>) -> TepidConfig {
        let mut cfg = TepidConfig::new(m, self.beta);
        cfg.pool = self.pool;
        cfg.grad_tolerance = self.grad_tolerance;
        cfg.max_layers = self.max_layers;
        cfg.seed = self.seed;
        cfg.basis_labels = basis_labels.or_else(|| self.labels_for(m));
        cfg
    }

    /// Configured label override for rank `m`, if any.
    pub fn labels_for(&self, m: usize) -> Option<Vec<usize>> {
        self.basis_labels
            .iter()
            .find(|o| o.m == m)
            .map(|o| o.labels.clone())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        crate::ansatz::hex_digest(&h.finalize())
    }
}
