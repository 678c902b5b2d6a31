//! Experiment configuration: one JSON document, one block per subcommand.
//!
//! There are no silent defaults. Required parameters must appear in the
//! config (or as a flag) or the command aborts before doing any work, and
//! every value a simulation actually used — including the documented
//! defaults for optional knobs — is echoed into its manifest or summary.
//! Unknown keys are rejected so a typo cannot quietly fall back to anything.

use crate::{CliError, Common, EXIT_IO, EXIT_VALIDATION};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base RNG seed for simulation commands (flag `--seed`).
    pub base_seed: Option<u64>,
    /// Number of independent replicas (flag `--replicas`).
    pub replicas: Option<u32>,
    /// Directory output files are written into (flag `--out`).
    pub output_dir: Option<PathBuf>,
    pub stationary: Option<StationaryBlock>,
    pub density: Option<DensityBlock>,
    pub bellman: Option<BellmanBlock>,
    pub brw: Option<BrwBlock>,
    pub analyze: Option<AnalyzeBlock>,
}

/// Ladder with an exogenous imitation distribution `q`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryBlock {
    pub m: usize,
    pub a: f64,
    /// Imitation success probabilities `q_1, …, q_m`; must sum to 1.
    pub q: Vec<f64>,
}

/// Imitation of the best practice: stationary profiles for each `q_m`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityBlock {
    pub m: usize,
    pub a: f64,
    /// Frontier imitation success probabilities to sweep.
    pub q_m_values: Vec<f64>,
}

/// Leapfrog value iteration. With `q_m` present the solver also closes the
/// loop with the stationary density map and reports the self-consistent
/// support.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellmanBlock {
    pub a: f64,
    pub lambda: f64,
    pub beta0: f64,
    pub cost: f64,
    /// Frontier level of the value grid.
    pub m: i64,
    /// Lowest level of the value grid.
    pub j_min: i64,
    /// Sup-norm tolerance for value iteration (default 1e-10; echoed).
    pub tol: Option<f64>,
    /// Frontier imitation success probability; presence selects the coupled
    /// solver.
    pub q_m: Option<f64>,
    /// Outer-iteration cap for the coupled solver (default 64; echoed).
    pub max_outer: Option<usize>,
}

/// Selection rule, e.g. `{"keep_top_n": 10000}` or `{"window_l": 20}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyBlock {
    /// Keep the `N` highest firms after every step.
    KeepTopN(u64),
    /// Keep firms within `L` levels of the leader after every step.
    WindowL(u32),
}

impl From<PolicyBlock> for qladder::brw::CullPolicy {
    fn from(p: PolicyBlock) -> Self {
        match p {
            PolicyBlock::KeepTopN(n) => qladder::brw::CullPolicy::KeepTopN(n),
            PolicyBlock::WindowL(l) => qladder::brw::CullPolicy::WindowL(l),
        }
    }
}

/// Branching-random-walk simulation.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrwBlock {
    pub a: f64,
    pub mu: f64,
    pub policy: PolicyBlock,
    pub steps: u64,
    /// Ladder level of the initial cohort (default 0; echoed).
    pub initial_level: Option<i64>,
    /// Firms in the initial cohort (default 1; echoed).
    pub initial_count: Option<u64>,
    /// Steps between profile snapshots, 0 disables (default 0; echoed;
    /// flag `--snapshot-every`).
    pub snapshot_every: Option<u64>,
}

/// Post-processing of one or more `brw` output directories.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeBlock {
    /// Output directories of previous `brw` invocations.
    pub runs: Vec<PathBuf>,
    /// Trajectory steps discarded before the velocity fit.
    pub burn_in: usize,
    /// Leading snapshots discarded per replica before profile averaging
    /// (default 0; echoed).
    pub snapshot_burn_in: Option<usize>,
    /// Fit window `[z_lo, z_hi]` for the front decay slope; default is the
    /// central half of the mean support (echoed).
    pub fit_window: Option<(f64, f64)>,
}

/// Config merged with command-line overrides.
#[derive(Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    seed: Option<u64>,
    replicas: Option<u32>,
    out: Option<PathBuf>,
    snapshot_every: Option<u64>,
}

impl Resolved {
    pub fn load(common: &Common) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(&common.config).map_err(|e| {
            CliError::io(format!(
                "cannot read config {}: {e}",
                common.config.display()
            ))
        })?;
        let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
            // Malformed JSON is an I/O-class failure; a well-formed document
            // with bad or missing fields is a validation failure.
            let code = match e.classify() {
                serde_json::error::Category::Data => EXIT_VALIDATION,
                _ => EXIT_IO,
            };
            CliError {
                code,
                message: format!("invalid config {}: {e}", common.config.display()),
            }
        })?;
        Ok(Self {
            config,
            seed: common.seed,
            replicas: common.replicas,
            out: common.out.clone(),
            snapshot_every: common.snapshot_every,
        })
    }

    pub fn output_dir(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .or(self.config.output_dir.as_deref())
            .ok_or_else(|| {
                CliError::validation(
                    "no output directory: set \"output_dir\" in the config or pass --out",
                )
            })
    }

    pub fn base_seed(&self) -> Result<u64, CliError> {
        self.seed.or(self.config.base_seed).ok_or_else(|| {
            CliError::validation("no RNG seed: set \"base_seed\" in the config or pass --seed")
        })
    }

    pub fn replica_count(&self) -> Result<u32, CliError> {
        let n = self.replicas.or(self.config.replicas).ok_or_else(|| {
            CliError::validation(
                "no replica count: set \"replicas\" in the config or pass --replicas",
            )
        })?;
        if n == 0 {
            return Err(CliError::validation("replicas must be at least 1"));
        }
        Ok(n)
    }

    pub fn snapshot_every(&self, block: &BrwBlock) -> u64 {
        self.snapshot_every.or(block.snapshot_every).unwrap_or(0)
    }
}

/// Fetch a command's config block or abort with a pointer at the missing key.
pub fn require_block<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    block.as_ref().ok_or_else(|| {
        CliError::validation(format!("config has no \"{name}\" block, nothing to run"))
    })
}
