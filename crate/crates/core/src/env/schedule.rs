use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::types::{IndividualId, Round};

/// Partition of the horizon into contiguous blocks of `L` rounds, each with
/// its own disjoint set of eligible individuals.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSchedule {
    block_length: usize,
    horizon: usize,
    cohorts: Vec<Vec<IndividualId>>,
    cohort_of: Vec<Option<usize>>,
}

impl CohortSchedule {
    /// Shuffle `individuals` and deal them into `ceil(T/L)` cohorts whose
    /// sizes differ by at most one. Each cohort is stored sorted.
    pub fn build<R: Rng + ?Sized>(
        individuals: &[IndividualId],
        block_length: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if block_length == 0 || horizon == 0 {
            return Err(Error::Config("block length and horizon must be at least 1".into()));
        }
        let h = horizon.div_ceil(block_length);
        if individuals.len() < h {
            return Err(Error::Config(format!(
                "{} individuals cannot fill {h} cohorts",
                individuals.len()
            )));
        }
        let mut ids = individuals.to_vec();
        ids.shuffle(rng);
        let base = ids.len() / h;
        let extra = ids.len() % h;
        let mut cohorts = Vec::with_capacity(h);
        let mut start = 0;
        for c in 0..h {
            let size = base + usize::from(c < extra);
            let mut members = ids[start..start + size].to_vec();
            members.sort_unstable();
            cohorts.push(members);
            start += size;
        }
        Self::from_cohorts(cohorts, block_length, horizon)
    }

    /// Schedule from explicit cohorts (checked for disjointness and count).
    pub fn from_cohorts(cohorts: Vec<Vec<IndividualId>>, block_length: usize, horizon: usize) -> Result<Self> {
        if block_length == 0 || horizon == 0 {
            return Err(Error::Config("block length and horizon must be at least 1".into()));
        }
        if cohorts.len() != horizon.div_ceil(block_length) {
            return Err(Error::Config(format!(
                "expected {} cohorts, got {}",
                horizon.div_ceil(block_length),
                cohorts.len()
            )));
        }
        let max_id = cohorts.iter().flatten().copied().max().map_or(0, |m| m + 1);
        let mut cohort_of = vec![None; max_id];
        for (c, members) in cohorts.iter().enumerate() {
            for &i in members {
                if cohort_of[i].replace(c).is_some() {
                    return Err(Error::Config(format!("individual {i} appears in two cohorts")));
                }
            }
        }
        Ok(Self { block_length, horizon, cohorts, cohort_of })
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_cohorts(&self) -> usize {
        self.cohorts.len()
    }

    pub fn cohorts(&self) -> &[Vec<IndividualId>] {
        &self.cohorts
    }

    /// Zero-based cohort active at round `t`.
    pub fn cohort_at(&self, t: Round) -> usize {
        (t.max(1) - 1) / self.block_length
    }

    /// Inclusive round window `[(h)L+1, min((h+1)L, T)]` of zero-based cohort `h`.
    pub fn window(&self, h: usize) -> (Round, Round) {
        (h * self.block_length + 1, ((h + 1) * self.block_length).min(self.horizon))
    }

    pub fn is_cohort_start(&self, t: Round) -> bool {
        (t - 1).is_multiple_of(self.block_length)
    }

    pub fn active(&self, t: Round) -> &[IndividualId] {
        &self.cohorts[self.cohort_at(t)]
    }

    pub fn cohort_of(&self, i: IndividualId) -> Option<usize> {
        self.cohort_of.get(i).copied().flatten()
    }

    /// Whether `i` may act at round `t`.
    pub fn is_active(&self, i: IndividualId, t: Round) -> bool {
        t >= 1 && t <= self.horizon && self.cohort_of(i) == Some(self.cohort_at(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sizes(n: usize, l: usize, t: usize) -> Vec<usize> {
        let ids: Vec<usize> = (0..n).collect();
        let s = CohortSchedule::build(&ids, l, t, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        s.cohorts().iter().map(Vec::len).collect()
    }

    #[test]
    fn cohort_sizes() {
        assert_eq!(sizes(10, 5, 10), vec![5, 5]);
        assert_eq!(sizes(10, 4, 10), vec![4, 3, 3]);
        assert_eq!(sizes(7, 10, 10), vec![7]);
    }

    #[test]
    fn windows_and_activity() {
        let ids: Vec<usize> = (0..10).collect();
        let s = CohortSchedule::build(&ids, 4, 10, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(s.window(0), (1, 4));
        assert_eq!(s.window(2), (9, 10));
        assert!(s.is_cohort_start(5) && !s.is_cohort_start(6));
        let i = s.cohorts()[1][0];
        assert!(!s.is_active(i, 4) && s.is_active(i, 5) && s.is_active(i, 8) && !s.is_active(i, 9));
        let mut all: Vec<usize> = s.cohorts().concat();
        all.sort_unstable();
        assert_eq!(all, ids);
    }

    #[test]
    fn too_few_individuals() {
        let ids = [0, 1];
        let err = CohortSchedule::build(&ids, 1, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn overlapping_cohorts_rejected() {
        assert!(CohortSchedule::from_cohorts(vec![vec![0, 1], vec![1]], 1, 2).is_err());
    }
}
