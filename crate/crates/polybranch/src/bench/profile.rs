//! Performance profiles: for each approach, the fraction of instances on
//! which its metric stays within a factor `tau` of the best approach.

use crate::bench::metrics::{RunRow, TIME_FLOOR};

/// Step function `tau -> rho` for one approach, emitted at every breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub approach: String,
    pub points: Vec<(f64, f64)>,
}

/// Metric backing a profile matrix built from report rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMetric {
    Time,
    Gap,
    Pace,
}

impl ProfileMetric {
    pub fn parse(name: &str) -> Option<ProfileMetric> {
        match name {
            "time" => Some(ProfileMetric::Time),
            "gap" => Some(ProfileMetric::Gap),
            "pace" => Some(ProfileMetric::Pace),
            _ => None,
        }
    }

    /// Positive matrix entry for one row; unsolved/missing turn into `+inf`.
    /// Gaps are floored at the solve threshold so fully solved instances
    /// compare as equal rather than by sub-tolerance noise.
    fn value(self, row: &RunRow) -> f64 {
        match self {
            ProfileMetric::Time => {
                if row.solved {
                    row.time_s.max(TIME_FLOOR)
                } else {
                    f64::INFINITY
                }
            }
            ProfileMetric::Gap => row.gap.map(|g| g.max(1e-3)).unwrap_or(f64::INFINITY),
            ProfileMetric::Pace => row.pace,
        }
    }
}

/// Profile curves from a positive metric matrix (`matrix[instance][approach]`,
/// `+inf` marking missing entries). Ratios are taken against the per-instance
/// best; every approach's curve is emitted on the shared breakpoint grid.
pub fn performance_profile(approaches: &[String], matrix: &[Vec<f64>]) -> Vec<ProfileCurve> {
    let num_instances = matrix.len();
    let num_approaches = approaches.len();
    let mut ratios = vec![vec![f64::INFINITY; num_approaches]; num_instances];
    for (i, row) in matrix.iter().enumerate() {
        assert_eq!(row.len(), num_approaches, "ragged profile matrix");
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            continue; // nobody produced a finite value; never within any tau
        }
        for (a, &v) in row.iter().enumerate() {
            ratios[i][a] = v / best;
        }
    }

    let mut breakpoints: Vec<f64> = ratios
        .iter()
        .flat_map(|r| r.iter().copied())
        .filter(|v| v.is_finite())
        .collect();
    breakpoints.push(1.0);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    approaches
        .iter()
        .enumerate()
        .map(|(a, approach)| {
            let points = breakpoints
                .iter()
                .map(|&tau| {
                    let hits = ratios.iter().filter(|r| r[a] <= tau).count();
                    (tau, hits as f64 / num_instances.max(1) as f64)
                })
                .collect();
            ProfileCurve { approach: approach.clone(), points }
        })
        .collect()
}

/// Builds the metric matrix from a complete report and profiles it.
pub fn profile_report(rows: &[RunRow], metric: ProfileMetric) -> Vec<ProfileCurve> {
    let mut approaches: Vec<String> = rows.iter().map(|r| r.approach.clone()).collect();
    approaches.sort();
    approaches.dedup();
    let mut instances: Vec<String> = rows.iter().map(|r| r.instance.clone()).collect();
    instances.sort();
    instances.dedup();
    let matrix: Vec<Vec<f64>> = instances
        .iter()
        .map(|i| {
            approaches
                .iter()
                .map(|a| {
                    rows.iter()
                        .find(|r| &r.instance == i && &r.approach == a)
                        .map(|r| metric.value(r))
                        .unwrap_or(f64::INFINITY)
                })
                .collect()
        })
        .collect();
    performance_profile(&approaches, &matrix)
}
