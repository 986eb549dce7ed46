use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, SyntheticSpec};
use crate::delay::{BetaParams, DelayKernel};
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelOptions};
use crate::policy::{PolicyParams, POLICY_KEYS};
use crate::types::{Regime, ResourceId};

pub const SCHEMA: &str = "metacub-experiment/1";

/// Label of the single kernel cell run under the immediate regime.
pub const IMMEDIATE_KERNEL: &str = "immediate";

/// A delay kernel as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum KernelSpec {
    Beta { alpha: f64, beta: f64 },
    Mixture { mixture: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl KernelSpec {
    pub fn build(&self, horizon: usize, resource: ResourceId) -> Result<DelayKernel> {
        match self {
            KernelSpec::Beta { alpha, beta } => DelayKernel::from_beta(BetaParams::new(*alpha, *beta)?, horizon, resource),
            KernelSpec::Mixture { mixture } => {
                let parts = mixture
                    .iter()
                    .map(|c| Ok((c.weight, BetaParams::new(c.alpha, c.beta)?)))
                    .collect::<Result<Vec<_>>>()?;
                DelayKernel::mixture(&parts, horizon, resource)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceConfig {
    pub budget: usize,
    pub cooldown_support: Vec<usize>,
    /// Kernel per family name, e.g. `type-i` and `type-ii`.
    pub kernels: BTreeMap<String, KernelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    pub schema: DatasetSchema,
}

/// Where the population comes from. Exactly one must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub csv: Option<CsvSource>,
    /// Share of each group used to fit the offline model; the rest form the
    /// simulated population.
    #[serde(default = "half")]
    pub train_fraction: f64,
}

fn half() -> f64 {
    0.5
}

fn default_noise() -> f64 {
    0.1
}

/// The full experiment grid and everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub output_dir: PathBuf,
    pub horizon: usize,
    pub cohort_length: usize,
    pub seeds: Vec<u64>,
    pub policies: Vec<String>,
    pub regimes: Vec<Regime>,
    /// Kernel families run under the delayed regime.
    pub kernel_families: Vec<String>,
    pub model: ModelKind,
    /// Parallel grid cells; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    #[serde(default)]
    pub reset_budget_per_cohort: bool,
    #[serde(default)]
    pub model_options: ModelOptions,
    #[serde(default)]
    pub policy: PolicyParams,
    pub dataset: DatasetConfig,
    pub resources: Vec<ResourceConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Parse and validate; relative dataset and output paths resolve
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(csv) = cfg.dataset.csv.as_mut() {
            if csv.path.is_relative() {
                csv.path = base.join(&csv.path);
            }
        }
        let problems = cfg.problems();
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() { Ok(()) } else { Err(Error::Config(problems.join("; "))) }
    }

    /// Every validation problem, so a bad config is reported in one pass.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(msg);
            }
        };
        check(self.schema == SCHEMA, format!("schema must be {SCHEMA:?}, found {:?}", self.schema));
        check(!self.seeds.is_empty(), "seeds must be nonempty".into());
        check(self.cohort_length >= 1, "cohort_length must be at least 1".into());
        check(self.horizon >= self.cohort_length, "horizon must be at least cohort_length".into());
        check(!self.policies.is_empty(), "at least one policy is required".into());
        for p in &self.policies {
            check(POLICY_KEYS.contains(&p.as_str()), format!("unknown policy {p:?}; known: {}", POLICY_KEYS.join(", ")));
        }
        check(!has_duplicates(&self.policies), "policies are listed twice".into());
        check(!has_duplicates(&self.seeds), "seeds are listed twice".into());
        check(!self.regimes.is_empty(), "at least one regime is required".into());
        check(!has_duplicates(&self.regimes), "regimes are listed twice".into());
        if self.regimes.contains(&Regime::Delayed) {
            check(!self.kernel_families.is_empty(), "the delayed regime needs kernel families".into());
        }
        check(!has_duplicates(&self.kernel_families), "kernel families are listed twice".into());
        check(
            !self.kernel_families.iter().any(|f| f == IMMEDIATE_KERNEL),
            format!("{IMMEDIATE_KERNEL:?} is reserved for the immediate regime"),
        );
        check(self.noise_sd >= 0.0 && self.noise_sd.is_finite(), "noise_sd must be finite and non-negative".into());
        check(!self.resources.is_empty(), "at least one resource is required".into());
        for (r, res) in self.resources.iter().enumerate() {
            check(!res.cooldown_support.is_empty(), format!("resource {r} has an empty cooldown support"));
            check(res.cooldown_support.iter().all(|&c| c >= 1), format!("resource {r} has a cooldown below 1"));
            for fam in &self.kernel_families {
                match res.kernels.get(fam) {
                    None => check(false, format!("resource {r} has no kernel for family {fam:?}")),
                    Some(k) => {
                        if let Err(e) = k.build(self.horizon.max(1), r) {
                            check(false, format!("resource {r}, family {fam:?}: {e}"));
                        }
                    }
                }
            }
        }
        let d = &self.dataset;
        check(d.train_fraction > 0.0 && d.train_fraction < 1.0, "train_fraction must lie in (0, 1)".into());
        match (&d.synthetic, &d.csv) {
            (Some(s), None) => {
                if let Err(e) = s.validate() {
                    check(false, format!("dataset.synthetic: {e}"));
                }
                check(
                    s.n_resources == self.resources.len(),
                    format!("dataset.synthetic has {} resources, config has {}", s.n_resources, self.resources.len()),
                );
            }
            (None, Some(c)) => {
                if let Err(e) = c.schema.validate() {
                    check(false, format!("dataset.csv.schema: {e}"));
                }
            }
            _ => check(false, "set exactly one of dataset.synthetic and dataset.csv".into()),
        }
        if let Err(e) = self.model_options.validate() {
            check(false, format!("model_options: {e}"));
        }
        if let Err(e) = self.policy.validate() {
            check(false, format!("policy: {e}"));
        }
        out
    }

    /// Grid cells in canonical order: regime, then kernel family.
    pub fn cells(&self) -> Vec<(Regime, String)> {
        let mut regimes = self.regimes.clone();
        regimes.sort();
        let mut out = Vec::new();
        for r in regimes {
            match r {
                Regime::Immediate => out.push((r, IMMEDIATE_KERNEL.to_string())),
                Regime::Delayed => {
                    let mut fams = self.kernel_families.clone();
                    fams.sort();
                    out.extend(fams.into_iter().map(|f| (r, f)));
                }
            }
        }
        out
    }

    /// Kernels for one grid cell.
    pub fn kernels(&self, regime: Regime, family: &str) -> Result<Vec<DelayKernel>> {
        self.resources
            .iter()
            .enumerate()
            .map(|(r, res)| match regime {
                Regime::Immediate => DelayKernel::immediate(self.horizon, r),
                Regime::Delayed => res
                    .kernels
                    .get(family)
                    .ok_or_else(|| Error::Config(format!("resource {r} has no kernel for family {family:?}")))?
                    .build(self.horizon, r),
            })
            .collect()
    }

    /// Worker count after the `METACUB_WORKERS` override.
    pub fn effective_workers(&self) -> usize {
        std::env::var("METACUB_WORKERS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(self.workers)
    }
}

fn has_duplicates<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().any(|(j, x)| xs[..j].contains(x))
}
