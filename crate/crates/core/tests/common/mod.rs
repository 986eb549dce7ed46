#![allow(dead_code)]

use std::path::Path;

use metacub::delay::DelayKernel;
use metacub::env::{CohortSchedule, EnvOptions, Environment, IndividualRecord, ResourceSpec};
use metacub::experiment::ExperimentConfig;

/// One cohort covering the whole horizon, immediate kernels.
pub fn single_cohort_env(
    individuals: Vec<IndividualRecord>,
    budgets: &[usize],
    cooldown: usize,
    horizon: usize,
    noise_sd: f64,
) -> Environment {
    let ids: Vec<usize> = (0..individuals.len()).collect();
    let schedule = CohortSchedule::from_cohorts(vec![ids], horizon, horizon).unwrap();
    let resources = budgets
        .iter()
        .enumerate()
        .map(|(r, &b)| ResourceSpec {
            id: r,
            budget: b,
            kernel: DelayKernel::immediate(horizon, r).unwrap(),
            cooldown_support: vec![cooldown],
        })
        .collect();
    Environment::new(individuals, resources, schedule, EnvOptions { noise_sd, reset_budget_per_cohort: false }).unwrap()
}

pub fn person(id: usize, group: usize, features: Vec<f64>, true_means: Vec<f64>) -> IndividualRecord {
    IndividualRecord { id, group, features, true_means }
}

/// Small synthetic experiment writing to `out`.
pub fn small_config(out: &Path, policies: &[&str], seeds: &[u64], horizon: usize) -> ExperimentConfig {
    let policies = policies.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(", ");
    let seeds = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
    let text = format!(
        r#"
schema = "metacub-experiment/1"
output_dir = {out:?}
horizon = {horizon}
cohort_length = {cohort}
seeds = [{seeds}]
policies = [{policies}]
regimes = ["immediate", "delayed"]
kernel_families = ["peaked"]
model = "logistic"

[dataset.synthetic]
n_individuals = 60
n_groups = 2
n_features = 3
n_resources = 2

[[resources]]
budget = 8
cooldown_support = [1, 2]
kernels.peaked = {{ alpha = 2.0, beta = 5.0 }}

[[resources]]
budget = 8
cooldown_support = [1]
kernels.peaked = {{ alpha = 1.0, beta = 1.0 }}
"#,
        out = out.display().to_string(),
        cohort = horizon.div_ceil(2),
    );
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    cfg.validate().unwrap();
    cfg
}

/// Path of the desk-scale preset shipped with the repository.
pub fn desk_config_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml")
}
