use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::PhysicalParams;
use crate::record::TrajectoryRecord;

/// Half-open interval [lo, hi) of final positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

impl Region {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornStatistics {
    pub regions: Vec<Region>,
    pub counts: Vec<usize>,
    /// Fraction of collapsed trajectories ending in each region.
    pub fractions: Vec<f64>,
    /// Binomial standard error √(f(1 − f)/N).
    pub std_errors: Vec<f64>,
    pub n_collapsed: usize,
    pub n_not_collapsed: usize,
    pub var_threshold: f64,
}

/// Collapsed if the final Var(q) is below 4× the attractor variance.
pub fn collapse_threshold(params: &PhysicalParams) -> f64 {
    4.0 * params.asymptotic_var_q()
}

/// Region frequencies of final ⟨q⟩ over collapsed trajectories.
pub fn born_statistics(
    records: &[TrajectoryRecord],
    regions: &[Region],
    params: &PhysicalParams,
) -> Result<BornStatistics> {
    let finals: Vec<(f64, f64)> = records
        .iter()
        .map(|r| match (r.q_mean.last(), r.var_q.last()) {
            (Some(&m), Some(&v)) => Ok((m, v)),
            _ => Err(Error::LengthMismatch {
                expected: 1,
                actual: 0,
            }),
        })
        .collect::<Result<_>>()?;
    Ok(born_statistics_from_finals(&finals, regions, collapse_threshold(params)))
}

/// As [`born_statistics`], from (final mean, final variance) pairs.
pub fn born_statistics_from_finals(
    finals: &[(f64, f64)],
    regions: &[Region],
    var_threshold: f64,
) -> BornStatistics {
    let mut counts = vec![0usize; regions.len()];
    let mut n_collapsed = 0;
    for &(m, v) in finals {
        if !(v < var_threshold) {
            continue;
        }
        n_collapsed += 1;
        for (c, r) in counts.iter_mut().zip(regions) {
            if r.contains(m) {
                *c += 1;
            }
        }
    }
    let n = n_collapsed.max(1) as f64;
    let fractions: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let std_errors = fractions.iter().map(|f| (f * (1.0 - f) / n).sqrt()).collect();
    BornStatistics {
        regions: regions.to_vec(),
        counts,
        fractions,
        std_errors,
        n_collapsed,
        n_not_collapsed: finals.len() - n_collapsed,
        var_threshold,
    }
}
