use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DataRow, Dataset, DatasetSchema, GroupMap, OutcomeKind};
use crate::error::{Error, Result};
use crate::model::sigmoid;
use crate::rng::substream;

/// Parameters of a synthetic population.
///
/// True means are `sigmoid(w_{k,r}·x + c_{k,r})` for binary outcomes and
/// `w_{k,r}·x + c_{k,r} + q·(x_0² - 1)` for continuous ones, with
/// `w_{k,r} = w_r + h·u_{k,r}` and `w_r`, `u_{k,r}` standard normal scaled
/// by `weight_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_individuals: usize,
    pub n_groups: usize,
    pub n_features: usize,
    pub n_resources: usize,
    #[serde(default = "default_kind")]
    pub outcome_kind: OutcomeKind,
    /// Offsets `c_{k,r}`, one row per group. Empty means all zero.
    #[serde(default)]
    pub effects: Vec<Vec<f64>>,
    #[serde(default = "default_weight_scale")]
    pub weight_scale: f64,
    /// Spread `h` of group-specific weights around the per-resource weights.
    #[serde(default)]
    pub weight_heterogeneity: f64,
    /// Quadratic coefficient `q` of continuous outcomes.
    #[serde(default)]
    pub quadratic: f64,
    /// Gaussian noise on continuous historical outcomes. Binary outcomes
    /// are Bernoulli draws of the true mean.
    #[serde(default)]
    pub noise_sd: f64,
    /// Append `K - 1` group indicator columns after the normal features.
    #[serde(default = "yes")]
    pub group_indicators: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_kind() -> OutcomeKind {
    OutcomeKind::Binary
}

fn default_weight_scale() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [self.n_individuals, self.n_groups, self.n_features, self.n_resources];
        if counts.contains(&0) {
            return Err(Error::Config("synthetic counts must all be at least 1".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config("noise_sd must be finite and non-negative".into()));
        }
        for (name, v) in [("weight_scale", self.weight_scale), ("weight_heterogeneity", self.weight_heterogeneity)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and non-negative")));
            }
        }
        if !self.quadratic.is_finite() {
            return Err(Error::Config("quadratic must be finite".into()));
        }
        if !self.effects.is_empty()
            && (self.effects.len() != self.n_groups
                || self.effects.iter().any(|row| row.len() != self.n_resources || row.iter().any(|c| !c.is_finite())))
        {
            return Err(Error::Config(format!(
                "effects must be a finite {} x {} matrix",
                self.n_groups, self.n_resources
            )));
        }
        Ok(())
    }

    pub fn effect(&self, k: usize, r: usize) -> f64 {
        self.effects.get(k).map_or(0.0, |row| row[r])
    }

    /// Width of the generated feature vectors.
    pub fn dim(&self) -> usize {
        self.n_features + if self.group_indicators { self.n_groups - 1 } else { 0 }
    }

    pub fn schema(&self) -> DatasetSchema {
        let mut feature_columns: Vec<String> = (0..self.n_features).map(|j| format!("x{j}")).collect();
        if self.group_indicators {
            feature_columns.extend((1..self.n_groups).map(|k| format!("is_g{k}")));
        }
        DatasetSchema {
            id_column: "id".into(),
            group_column: "group".into(),
            outcome_column: "outcome".into(),
            feature_columns,
            resource_column: Some("resource".into()),
            outcome_kind: self.outcome_kind,
        }
    }
}

/// A generated dataset with the true mean of every row under every resource.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: Dataset,
    /// `truth[j][r]`: true mean outcome of row `j` under resource `r`.
    pub truth: Vec<Vec<f64>>,
}

fn group_label(k: usize, width: usize) -> String {
    format!("g{k:0width$}")
}

/// Draw a population. Groups are balanced; each row's historical resource
/// is uniform and its outcome is drawn around the true mean.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = substream(spec.seed, "synthetic");
    let (k_n, r_n, d) = (spec.n_groups, spec.n_resources, spec.n_features);
    let normal = |rng: &mut crate::rng::SimRng| -> f64 { StandardNormal.sample(rng) };
    let shared: Vec<Vec<f64>> =
        (0..r_n).map(|_| (0..d).map(|_| spec.weight_scale * normal(&mut rng)).collect()).collect();
    let weights: Vec<Vec<Vec<f64>>> = (0..k_n)
        .map(|_| {
            shared
                .iter()
                .map(|w| w.iter().map(|&w| w + spec.weight_heterogeneity * spec.weight_scale * normal(&mut rng)).collect())
                .collect()
        })
        .collect();

    let mut groups: Vec<usize> = (0..spec.n_individuals).map(|j| j % k_n).collect();
    groups.shuffle(&mut rng);
    let width = (k_n - 1).to_string().len();
    let labels: Vec<String> = (0..k_n).map(|k| group_label(k, width)).collect();
    let id_width = spec.n_individuals.to_string().len();

    let mut rows = Vec::with_capacity(spec.n_individuals);
    let mut truth = Vec::with_capacity(spec.n_individuals);
    for (j, &k) in groups.iter().enumerate() {
        let x: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let means: Vec<f64> = (0..r_n)
            .map(|r| {
                let lin: f64 = weights[k][r].iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() + spec.effect(k, r);
                match spec.outcome_kind {
                    OutcomeKind::Binary => sigmoid(lin),
                    OutcomeKind::Continuous => lin + spec.quadratic * (x[0] * x[0] - 1.0),
                }
            })
            .collect();
        let resource = rng.random_range(0..r_n);
        let outcome = match spec.outcome_kind {
            OutcomeKind::Binary => f64::from(u8::from(rng.random::<f64>() < means[resource])),
            OutcomeKind::Continuous => means[resource] + spec.noise_sd * normal(&mut rng),
        };
        let mut features = x;
        if spec.group_indicators {
            features.extend((1..k_n).map(|g| f64::from(u8::from(g == k))));
        }
        rows.push(DataRow { id: format!("{j:0id_width$}"), group: k, resource, features, outcome });
        truth.push(means);
    }
    let groups = GroupMap::from_labels(labels.iter().map(String::as_str));
    Ok(SyntheticData { dataset: Dataset { schema: spec.schema(), groups, rows }, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{read_csv_from, write_csv_to};
    use crate::model::{ModelKind, ModelOptions, OutcomeModel};

    fn spec(kind: OutcomeKind) -> SyntheticSpec {
        SyntheticSpec {
            n_individuals: 400,
            n_groups: 3,
            n_features: 4,
            n_resources: 2,
            outcome_kind: kind,
            effects: vec![],
            weight_scale: 0.5,
            weight_heterogeneity: 0.0,
            quadratic: 0.0,
            noise_sd: 0.0,
            group_indicators: true,
            seed: 11,
        }
    }

    #[test]
    fn determinism() {
        let a = generate_synthetic(&spec(OutcomeKind::Binary)).unwrap();
        let b = generate_synthetic(&spec(OutcomeKind::Binary)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&SyntheticSpec { seed: 12, ..spec(OutcomeKind::Binary) }).unwrap();
        assert_ne!(a.dataset.rows, c.dataset.rows);
    }

    #[test]
    fn noise_free_linear_truth_is_recovered() {
        let s = SyntheticSpec { effects: vec![vec![0.0, 1.0], vec![0.5, 0.0], vec![-0.5, 0.2]], ..spec(OutcomeKind::Continuous) };
        let data = generate_synthetic(&s).unwrap();
        for r in 0..2 {
            let rows: Vec<_> = data.dataset.rows.iter().zip(&data.truth).filter(|(row, _)| row.resource == r).collect();
            let xs: Vec<Vec<f64>> = rows.iter().map(|(row, _)| row.features.clone()).collect();
            let ys: Vec<f64> = rows.iter().map(|(row, _)| row.outcome).collect();
            let opts = ModelOptions { ridge_lambda: 1e-9, ..ModelOptions::default() };
            let m = OutcomeModel::fit(&xs, &ys, ModelKind::Ridge, &opts).unwrap();
            for (row, truth) in data.dataset.rows.iter().zip(&data.truth) {
                assert!((m.predict(&row.features).unwrap() - truth[r]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn planted_cell_dominates() {
        let mut effects = vec![vec![-1.0; 2]; 3];
        effects[2][1] = 0.0;
        let s = SyntheticSpec { effects, n_individuals: 3000, ..spec(OutcomeKind::Binary) };
        let data = generate_synthetic(&s).unwrap();
        let mut sums = vec![vec![0.0; 2]; 3];
        let mut n = [0.0; 3];
        for (row, truth) in data.dataset.rows.iter().zip(&data.truth) {
            n[row.group] += 1.0;
            for r in 0..2 {
                sums[row.group][r] += truth[r];
            }
        }
        let planted = sums[2][1] / n[2];
        for k in 0..3 {
            for r in 0..2 {
                if (k, r) != (2, 1) {
                    assert!(planted > sums[k][r] / n[k], "cell ({k},{r})");
                }
            }
        }
    }

    #[test]
    fn groups_are_balanced_and_indicated() {
        let data = generate_synthetic(&spec(OutcomeKind::Binary)).unwrap();
        let mut n = [0; 3];
        for row in &data.dataset.rows {
            n[row.group] += 1;
            assert_eq!(row.features.len(), 6);
            assert_eq!(row.features[4], f64::from(u8::from(row.group == 1)));
            assert_eq!(row.features[5], f64::from(u8::from(row.group == 2)));
            assert!(row.outcome == 0.0 || row.outcome == 1.0);
        }
        assert_eq!(n, [134, 133, 133]);
    }

    #[test]
    fn csv_round_trip_is_exact_after_formatting() {
        let s = SyntheticSpec { n_individuals: 50, ..spec(OutcomeKind::Continuous) };
        let data = generate_synthetic(&SyntheticSpec { noise_sd: 0.3, ..s }).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &data.dataset).unwrap();
        let (back, _) = read_csv_from(buf.as_slice(), &data.dataset.schema, None).unwrap();
        let mut again = Vec::new();
        write_csv_to(&mut again, &back).unwrap();
        assert_eq!(buf, again);
        for (a, b) in data.dataset.rows.iter().zip(&back.rows) {
            assert_eq!((a.group, a.resource, &a.id), (b.group, b.resource, &b.id));
            for (x, y) in a.features.iter().zip(&b.features) {
                assert_eq!(format!("{x:.8e}").parse::<f64>().unwrap(), *y);
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(SyntheticSpec { n_groups: 0, ..spec(OutcomeKind::Binary) }.validate().is_err());
        assert!(SyntheticSpec { noise_sd: -1.0, ..spec(OutcomeKind::Binary) }.validate().is_err());
        assert!(SyntheticSpec { effects: vec![vec![0.0]], ..spec(OutcomeKind::Binary) }.validate().is_err());
    }
}
