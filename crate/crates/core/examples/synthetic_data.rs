//! Synthetic populations: generate with a planted group effect, split
//! stratified by group, standardize with training statistics and write the
//! CSV that `metacub synth` would produce.

use metacub::data::{generate_synthetic, split, write_csv, OutcomeKind, Standardization, SyntheticSpec};
use metacub::rng::substream;

fn main() -> metacub::Result<()> {
    let spec = SyntheticSpec {
        n_individuals: 400,
        n_groups: 4,
        n_features: 6,
        n_resources: 2,
        outcome_kind: OutcomeKind::Binary,
        effects: vec![vec![-0.5, -0.5], vec![-0.5, -0.5], vec![-0.5, 0.5], vec![-0.5, -0.5]],
        weight_scale: 0.5,
        weight_heterogeneity: 0.0,
        quadratic: 0.0,
        noise_sd: 0.0,
        group_indicators: true,
        seed: 0,
    };
    let data = generate_synthetic(&spec)?;
    let d = &data.dataset;
    println!("{} rows, {} features, groups {:?}", d.rows.len(), d.n_features(), (0..d.groups.len()).map(|k| d.groups.label(k)).collect::<Vec<_>>());
    for k in 0..spec.n_groups {
        let members: Vec<usize> = (0..d.rows.len()).filter(|&j| d.rows[j].group == k).collect();
        let mean = |r: usize| members.iter().map(|&j| data.truth[j][r]).sum::<f64>() / members.len() as f64;
        println!("group {k}: true mean outcome {:.3} under resource 0, {:.3} under resource 1", mean(0), mean(1));
    }

    let (mut train, mut eval, report) = split(d, 0.5, &mut substream(0, "split"))?;
    let stats = Standardization::fit(&train.rows)?;
    stats.apply(&mut train.rows);
    stats.apply(&mut eval.rows);
    println!("split: {} train, {} simulated, singleton groups {:?}", train.rows.len(), eval.rows.len(), report.singleton_groups);

    let out = std::env::temp_dir().join("metacub_synthetic.csv");
    write_csv(&out, d)?;
    println!("wrote {}", out.display());
    Ok(())
}
