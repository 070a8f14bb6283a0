//! Run configuration files.
//!
//! A config is one JSON document. Unknown keys are rejected, and every
//! command-line flag overrides the matching key.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use setchain::models::parse_kernel;
use setchain::{
    ConstraintFamily, DppModel, Init, IsingChainModel, ModularModel, RunOptions, SamplerKind, SetModel, Subset,
};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SETCHAIN_OUT_DIR";

fn default_beta() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Kernel from a whitespace-separated matrix file (relative to the
    /// config file) or inline rows.
    Dpp {
        kernel_file: Option<PathBuf>,
        kernel: Option<Vec<Vec<f64>>>,
        #[serde(default = "default_beta")]
        beta: f64,
    },
    /// Kernel `Q diag(eigenvalues) Qᵀ` with a seeded random rotation.
    DppSpectrum {
        eigenvalues: Vec<f64>,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_beta")]
        beta: f64,
    },
    /// Chain Ising model; either explicit `weights` (length n − 1) or `n`
    /// with seeded uniform weights.
    Ising {
        n: Option<usize>,
        weights: Option<Vec<f64>>,
        weights_seed: Option<u64>,
        #[serde(default = "default_beta")]
        beta: f64,
        delta: f64,
    },
    Modular {
        weights: Vec<f64>,
        #[serde(default = "default_beta")]
        beta: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    None,
    UniformBase { k: usize },
    UniformRank { k: usize },
    /// 1-based part label of every element.
    PartitionBase { part_of: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Random,
    Greedy,
    Empty,
    /// 1-based labels.
    Explicit(Vec<usize>),
}

impl std::str::FromStr for InitSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "random" => Ok(InitSpec::Random),
            "greedy" => Ok(InitSpec::Greedy),
            "empty" => Ok(InitSpec::Empty),
            other => Err(CliError::Config(format!("unknown init {other:?}; expected random, greedy or empty"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub constraint: Option<ConstraintSpec>,
    pub sampler: Option<String>,
    pub num_chains: Option<usize>,
    pub steps: Option<u64>,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
    pub seed: Option<u64>,
    pub init: Option<InitSpec>,
    pub incremental: Option<bool>,
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: cannot read config: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn build_model(&self) -> CliResult<Model> {
        let model = match &self.model {
            ModelSpec::Dpp { kernel_file, kernel, beta } => {
                let matrix = match (kernel_file, kernel) {
                    (Some(path), None) => {
                        let path = self.base_dir.join(path);
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                        parse_kernel(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
                    }
                    (None, Some(rows)) => {
                        return Ok(Model::Dpp(DppModel::from_rows(rows, *beta)?));
                    }
                    _ => return Err(CliError::Config("dpp model needs exactly one of kernel_file or kernel".into())),
                };
                Model::Dpp(DppModel::new(matrix, *beta)?)
            }
            ModelSpec::DppSpectrum { eigenvalues, seed, beta } => {
                Model::Dpp(DppModel::from_spectrum(eigenvalues, *seed, *beta)?)
            }
            ModelSpec::Ising { n, weights, weights_seed, beta, delta } => match (weights, n) {
                (Some(w), n) => {
                    let size = w.len() + 1;
                    if n.is_some_and(|n| n != size) || weights_seed.is_some() {
                        return Err(CliError::Config("ising: give either weights or n with weights_seed".into()));
                    }
                    Model::Ising(IsingChainModel::new(size, w.clone(), *delta, *beta)?)
                }
                (None, Some(n)) => {
                    Model::Ising(IsingChainModel::with_random_weights(*n, weights_seed.unwrap_or(0), *delta, *beta)?)
                }
                (None, None) => return Err(CliError::Config("ising model needs weights or n".into())),
            },
            ModelSpec::Modular { weights, beta } => Model::Modular(ModularModel::new(weights.clone(), *beta)?),
        };
        Ok(model)
    }

    pub fn build_constraint(&self, n: usize) -> CliResult<ConstraintFamily> {
        let c = match self.constraint.as_ref().unwrap_or(&ConstraintSpec::None) {
            ConstraintSpec::None => ConstraintFamily::unconstrained(n)?,
            ConstraintSpec::UniformBase { k } => ConstraintFamily::uniform_base(n, *k)?,
            ConstraintSpec::UniformRank { k } => ConstraintFamily::uniform_rank(n, *k)?,
            ConstraintSpec::PartitionBase { part_of } => {
                if part_of.len() != n {
                    return Err(CliError::Config(format!("part_of has {} labels for {n} elements", part_of.len())));
                }
                ConstraintFamily::partition_base(part_of)?
            }
        };
        Ok(c)
    }

    /// The configured sampler, or the one matching the constraint.
    pub fn sampler(&self, c: &ConstraintFamily) -> CliResult<SamplerKind> {
        match &self.sampler {
            Some(s) => Ok(s.parse()?),
            None => Ok(default_sampler(c)),
        }
    }

    pub fn run_options(&self, kind: SamplerKind, n: usize) -> CliResult<RunOptions> {
        let init = match self.init.clone() {
            Some(InitSpec::Random) => Init::Random,
            Some(InitSpec::Greedy) => Init::Greedy,
            Some(InitSpec::Empty) => Init::Empty,
            Some(InitSpec::Explicit(labels)) => Init::Explicit(Subset::from_one_based(n, &labels)?),
            None if kind == SamplerKind::SrMix => Init::Empty,
            None => Init::Random,
        };
        let opts = RunOptions {
            num_chains: self.num_chains.unwrap_or(10),
            steps: self.steps.unwrap_or(10_000),
            seed: self.seed.unwrap_or(0),
            init,
            burn_in: self.burn_in.unwrap_or(0),
            thin: self.thin.unwrap_or(1),
            incremental: self.incremental.unwrap_or(false),
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(default_output_dir)
    }
}

pub fn default_sampler(c: &ConstraintFamily) -> SamplerKind {
    match c {
        ConstraintFamily::Unconstrained { .. } => SamplerKind::SrMix,
        ConstraintFamily::UniformRank { .. } => SamplerKind::AddDelete,
        _ => SamplerKind::Exchange,
    }
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

/// A model built from a config.
#[derive(Debug, Clone)]
pub enum Model {
    Dpp(DppModel),
    Ising(IsingChainModel),
    Modular(ModularModel),
}

impl Model {
    pub fn as_dyn(&self) -> &dyn SetModel {
        match self {
            Model::Dpp(m) => m,
            Model::Ising(m) => m,
            Model::Modular(m) => m,
        }
    }

    pub fn n(&self) -> usize {
        self.as_dyn().ground().len()
    }
}
