//! Experiment configuration: one JSON document with the sections `problem`,
//! `init`, `engine`, `bisection` and `sweep`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bisect::BisectionConfig;
use crate::engine::GpConfig;
use crate::error::{GpError, Result};
use crate::init::{InitConfig, InitMethod};
use crate::problems::ProblemFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// 50 runs per trial, 30 repetitions, 1500 runs for n_fe.
    Paper,
    /// 20 runs per trial, 5 repetitions, 100 runs for n_fe.
    Desk,
}

/// Height range of the initial population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HeightPlan {
    Fixed {
        lo: usize,
        hi: usize,
    },
    /// Centered on the height of a full tree with `leaves_per_m * m` leaves.
    Leaves {
        leaves_per_m: f64,
        spread: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitPlan {
    pub method: InitMethod,
    #[serde(default)]
    pub q: Option<f64>,
    pub heights: HeightPlan,
}

impl InitPlan {
    /// Nominal height `h_k` and the ramp range for problem size `m`.
    pub fn heights_for(&self, m: usize) -> (usize, usize, usize) {
        match self.heights {
            HeightPlan::Fixed { lo, hi } => ((lo + hi) / 2, lo, hi),
            HeightPlan::Leaves {
                leaves_per_m,
                spread,
            } => {
                let target = (leaves_per_m * m as f64).max(2.0);
                let hk = (target.log2().ceil() as usize).max(1);
                (hk, hk.saturating_sub(spread).max(1), hk + spread)
            }
        }
    }

    pub fn init_for(&self, m: usize) -> InitConfig {
        let (_, lo, hi) = self.heights_for(m);
        if self.method.is_ramped() {
            InitConfig::ramped(self.method, self.q, lo, hi)
        } else {
            InitConfig::new(self.method, self.q, hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSection {
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub elite_fraction: f64,
    pub max_nodes: usize,
    pub max_generations: usize,
    pub stall_generations: Option<usize>,
    pub function_point_bias: Option<f64>,
}

impl Default for EngineSection {
    fn default() -> Self {
        let g = GpConfig::new(2, InitConfig::new(InitMethod::Grow, None, 1));
        Self {
            tournament_size: g.tournament_size,
            crossover_prob: g.crossover_prob,
            elite_fraction: g.elite_fraction,
            max_nodes: g.max_nodes,
            max_generations: g.max_generations,
            stall_generations: g.stall_generations,
            function_point_bias: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub m_values: Vec<usize>,
    /// Independent runs at the measured minimal size used for `n_fe`.
    pub n_fe_runs: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            m_values: vec![4, 8, 16],
            n_fe_runs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemFamily,
    pub init: InitPlan,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub bisection: BisectionConfig,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    /// Defaults used by the bundled experiments.
    pub fn preset(problem: ProblemFamily, scale: Scale) -> Self {
        let (init, m_values) = match problem {
            ProblemFamily::Order => (
                InitPlan {
                    method: InitMethod::RampedHalfHalf,
                    q: Some(0.1),
                    heights: HeightPlan::Leaves {
                        leaves_per_m: 2.0,
                        spread: 1,
                    },
                },
                vec![4, 8, 16],
            ),
            ProblemFamily::Loud => (
                InitPlan {
                    method: InitMethod::RampedHalfHalf,
                    q: None,
                    heights: HeightPlan::Fixed { lo: 2, hi: 7 },
                },
                vec![8, 16, 32],
            ),
            ProblemFamily::Onoff { .. } => (
                InitPlan {
                    method: InitMethod::RampedHalfHalf,
                    q: Some(0.1),
                    heights: HeightPlan::Leaves {
                        leaves_per_m: 1.0,
                        spread: 1,
                    },
                },
                vec![128],
            ),
        };
        let mut cfg = Self {
            problem,
            init,
            engine: EngineSection::default(),
            bisection: BisectionConfig::default(),
            sweep: SweepSection {
                m_values,
                n_fe_runs: 100,
            },
        };
        cfg.apply_scale(scale);
        cfg
    }

    pub fn apply_scale(&mut self, scale: Scale) {
        let (runs, reps, nfe) = match scale {
            Scale::Paper => (50, 30, 1500),
            Scale::Desk => (20, 5, 100),
        };
        self.bisection.runs_per_trial = runs;
        self.bisection.repetitions = reps;
        self.sweep.n_fe_runs = nfe;
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| GpError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.bisection.validate()?;
        if let HeightPlan::Fixed { lo, hi } = self.init.heights {
            if lo < 1 || lo > hi {
                return Err(GpError::Config(format!("bad height range [{lo}, {hi}]")));
            }
        }
        if let HeightPlan::Leaves { leaves_per_m, .. } = self.init.heights {
            if !(leaves_per_m > 0.0) {
                return Err(GpError::Config("leaves_per_m must be > 0".into()));
            }
        }
        if self.sweep.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GpError::Config(
                "sweep m values must be strictly ascending".into(),
            ));
        }
        self.gp_config(self.sweep.m_values.first().copied().unwrap_or(4), 2)
            .validate()
    }

    /// Engine configuration for problem size `m` and population `n`.
    pub fn gp_config(&self, m: usize, n: usize) -> GpConfig {
        let e = &self.engine;
        let mut g = GpConfig::new(n, self.init.init_for(m));
        g.tournament_size = e.tournament_size;
        g.crossover_prob = e.crossover_prob;
        g.elite_fraction = e.elite_fraction;
        g.max_nodes = e.max_nodes;
        g.max_generations = e.max_generations;
        g.stall_generations = e.stall_generations;
        g.function_point_bias = e.function_point_bias;
        g
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}
