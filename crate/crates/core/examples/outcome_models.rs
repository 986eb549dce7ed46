//! The three outcome model kinds on one synthetic dataset: held-out error
//! against the outcome variance, and the exploration width each reports.
//! Ridge and logistic share the feature Gram matrix, so their widths agree;
//! the MLP falls back to a count bonus.

use metacub::data::{generate_synthetic, split, OutcomeKind, Standardization, SyntheticSpec};
use metacub::model::{ModelKind, ModelOptions, PredictorBank, TrainingRow};
use metacub::rng::substream;

fn main() -> metacub::Result<()> {
    let spec = SyntheticSpec {
        n_individuals: 600,
        n_groups: 3,
        n_features: 4,
        n_resources: 2,
        outcome_kind: OutcomeKind::Continuous,
        effects: vec![],
        weight_scale: 0.5,
        weight_heterogeneity: 0.2,
        quadratic: 0.3,
        noise_sd: 0.1,
        group_indicators: true,
        seed: 5,
    };
    let data = generate_synthetic(&spec)?;
    let (mut train, mut test, _) = split(&data.dataset, 0.7, &mut substream(5, "split"))?;
    let stats = Standardization::fit(&train.rows)?;
    stats.apply(&mut train.rows);
    stats.apply(&mut test.rows);
    let rows = |d: &metacub::data::Dataset| -> Vec<TrainingRow> {
        d.rows.iter().map(|r| TrainingRow { features: r.features.clone(), resource: r.resource, outcome: r.outcome }).collect()
    };
    let (train_rows, test_rows) = (rows(&train), rows(&test));

    for kind in [ModelKind::Ridge, ModelKind::Logistic, ModelKind::Mlp] {
        let opts = ModelOptions { mlp_epochs: 1500, ..Default::default() };
        // Logistic needs outcomes in [0, 1]; squash them for that model only.
        let squash = |rs: &[TrainingRow]| -> Vec<TrainingRow> {
            rs.iter().map(|r| TrainingRow { outcome: 1.0 / (1.0 + (-r.outcome).exp()), ..r.clone() }).collect()
        };
        let (fit_rows, eval_rows) = if kind == ModelKind::Logistic {
            (squash(&train_rows), squash(&test_rows))
        } else {
            (train_rows.clone(), test_rows.clone())
        };
        let bank = PredictorBank::fit(&fit_rows, 2, kind, &opts)?;
        let mean = eval_rows.iter().map(|r| r.outcome).sum::<f64>() / eval_rows.len() as f64;
        let var = eval_rows.iter().map(|r| (r.outcome - mean).powi(2)).sum::<f64>() / eval_rows.len() as f64;
        let mut se = 0.0;
        for r in &eval_rows {
            let e = bank.predict(&r.features, r.resource)? - r.outcome;
            se += e * e;
        }
        let x = &eval_rows[0].features;
        println!(
            "{kind:<8} held-out MSE {:.4} (outcome variance {:.4})  width at a test context {:.4}",
            se / eval_rows.len() as f64,
            var,
            bank.uncertainty(x, 0, 3, 100)
        );
    }
    Ok(())
}
