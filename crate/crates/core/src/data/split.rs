use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{rows_by_group, Dataset};
use crate::error::{param, Result};
use crate::types::GroupId;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitReport {
    /// Groups with a single member, kept in the training split only.
    pub singleton_groups: Vec<GroupId>,
}

/// Group-stratified split. Each group of size `n ≥ 2` sends
/// `round(fraction·n)`, clamped to `[1, n-1]`, rows to training, so every
/// such group appears in both splits. Row order within each split follows
/// the original file order.
pub fn split<R: Rng + ?Sized>(data: &Dataset, fraction: f64, rng: &mut R) -> Result<(Dataset, Dataset, SplitReport)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(param(format!("train fraction must lie in (0, 1), got {fraction}")));
    }
    let mut train_idx = Vec::new();
    let mut report = SplitReport::default();
    for (k, mut members) in rows_by_group(&data.rows) {
        let n = members.len();
        if n == 1 {
            report.singleton_groups.push(k);
            train_idx.push(members[0]);
            continue;
        }
        let n_train = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
        members.shuffle(rng);
        train_idx.extend_from_slice(&members[..n_train]);
    }
    let mut in_train = vec![false; data.rows.len()];
    for j in train_idx {
        in_train[j] = true;
    }
    let pick = |want: bool| Dataset {
        schema: data.schema.clone(),
        groups: data.groups.clone(),
        rows: data.rows.iter().zip(&in_train).filter(|(_, &t)| t == want).map(|(r, _)| r.clone()).collect(),
    };
    Ok((pick(true), pick(false), report))
}
