//! Benchmark metrics: per-run rows, shifted geometric means, and the
//! aggregation protocol with its per-metric exclusion rules.
//!
//! Aggregation works on a complete (instance x approach) grid. Each metric
//! drops a different slice of instances before averaging:
//! * Gap drops instances where any approach has no gap or all solved it;
//! * Time drops instances solved by everyone under 5 seconds or by no one;
//! * Pace drops instances solved by everyone under 5 seconds;
//! * Nodes (geometric and arithmetic) keeps only instances solved by all.
//!
//! Per-metric instance counts are reported next to the column; they are the
//! parenthesized counts in the usual solver-comparison tables.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::engine::SolveResult;

/// Threshold below which a run counts as trivially fast for the exclusions.
pub const FAST_SOLVE_SECONDS: f64 = 5.0;
/// Runs report at least this much time in the Time column.
pub const TIME_FLOOR: f64 = 0.01;
/// Shift applied inside the Gap geometric mean (equals the solve threshold).
pub const GAP_SHIFT: f64 = 1e-3;
/// Pace reported when a run never improved its lower bound.
pub const PACE_CAP: f64 = 1e7;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("geometric mean of an empty slice")]
    EmptyInput,
    #[error("inconsistent rows: {0}")]
    InconsistentRows(String),
}

/// One (instance, approach) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub instance: String,
    pub approach: String,
    pub solved: bool,
    /// Relative optimality gap at termination; `None` without an incumbent.
    pub gap: Option<f64>,
    /// Wall seconds, or the node count for deterministic runs.
    pub time_s: f64,
    pub pace: f64,
    pub nodes: u64,
    /// Path of the trace payload backing this row, when one was written.
    /// Not serialized into reports.
    pub trace_ref: Option<String>,
}

impl RunRow {
    pub fn from_result(instance: &str, approach: &str, result: &SolveResult) -> RunRow {
        RunRow {
            instance: instance.to_string(),
            approach: approach.to_string(),
            solved: result.solved(),
            gap: result.rel_gap(),
            time_s: result.time_measure(),
            pace: result.pace(),
            nodes: result.nodes_explored,
            trace_ref: None,
        }
    }
}

/// Seconds (or nodes, for deterministic runs) per unit of lower-bound
/// improvement; capped at [`PACE_CAP`] when the bound never moved.
pub fn pace_lb(result: &SolveResult) -> f64 {
    result.pace()
}

/// Shifted geometric mean: `exp(mean(ln(v + shift))) - shift`.
pub fn geo_mean(values: &[f64], shift: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let log_sum: f64 = values.iter().map(|&v| (v + shift).ln()).sum();
    Ok((log_sum / values.len() as f64).exp() - shift)
}

/// One aggregated column: how many instances survived its exclusions and the
/// per-approach mean over them (`None` when nothing survived).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricColumn {
    pub count: usize,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub approaches: Vec<String>,
    pub total_instances: usize,
    pub solved: Vec<usize>,
    pub gap: MetricColumn,
    pub time: MetricColumn,
    pub pace: MetricColumn,
    pub nodes_geo: MetricColumn,
    pub nodes_mean: MetricColumn,
    /// Shift applied inside the Gap geometric mean, flagged so numbers are
    /// not silently compared against unshifted means elsewhere.
    pub gap_shift: f64,
}

impl fmt::Display for MetricTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name_width = self.approaches.iter().map(|a| a.len()).max().unwrap_or(8).max(8);
        writeln!(
            f,
            "{:<name_width$}  {:>12}  {:>12}  {:>12}  {:>12}  {:>12}  {:>12}",
            "approach",
            format!("Solved({})", self.total_instances),
            format!("Gap({})", self.gap.count),
            format!("Time({})", self.time.count),
            format!("Pace({})", self.pace.count),
            format!("Nodes({})", self.nodes_geo.count),
            format!("MeanNd({})", self.nodes_mean.count),
        )?;
        let cell = |v: &Option<f64>| match v {
            Some(x) => format!("{x:.4}"),
            None => "-".to_string(),
        };
        for (i, approach) in self.approaches.iter().enumerate() {
            writeln!(
                f,
                "{:<name_width$}  {:>12}  {:>12}  {:>12}  {:>12}  {:>12}  {:>12}",
                approach,
                self.solved[i],
                cell(&self.gap.values[i]),
                cell(&self.time.values[i]),
                cell(&self.pace.values[i]),
                cell(&self.nodes_geo.values[i]),
                cell(&self.nodes_mean.values[i]),
            )?;
        }
        write!(f, "(gap geometric mean shifted by {})", self.gap_shift)
    }
}

/// Aggregates a complete grid of rows into the metric table.
pub fn aggregate(rows: &[RunRow]) -> Result<MetricTable, MetricsError> {
    let mut approaches: Vec<String> = rows.iter().map(|r| r.approach.clone()).collect();
    approaches.sort();
    approaches.dedup();
    let mut instances: Vec<String> = rows.iter().map(|r| r.instance.clone()).collect();
    instances.sort();
    instances.dedup();

    let mut grid: BTreeMap<(&str, &str), &RunRow> = BTreeMap::new();
    for row in rows {
        if grid.insert((row.instance.as_str(), row.approach.as_str()), row).is_some() {
            return Err(MetricsError::InconsistentRows(format!(
                "duplicate row for ({}, {})",
                row.instance, row.approach
            )));
        }
    }
    for instance in &instances {
        for approach in &approaches {
            if !grid.contains_key(&(instance.as_str(), approach.as_str())) {
                return Err(MetricsError::InconsistentRows(format!(
                    "missing row for ({instance}, {approach})"
                )));
            }
        }
    }
    let row = |i: &str, a: &str| grid[&(i, a)];

    let solved: Vec<usize> = approaches
        .iter()
        .map(|a| instances.iter().filter(|i| row(i, a).solved).count())
        .collect();

    let all = |instance: &str, pred: &dyn Fn(&RunRow) -> bool| {
        approaches.iter().all(|a| pred(row(instance, a)))
    };
    let any = |instance: &str, pred: &dyn Fn(&RunRow) -> bool| {
        approaches.iter().any(|a| pred(row(instance, a)))
    };

    let fast = |r: &RunRow| r.solved && r.time_s < FAST_SOLVE_SECONDS;

    let gap_set: Vec<&String> = instances
        .iter()
        .filter(|i| !any(i, &|r| r.gap.is_none()) && !all(i, &|r| r.solved))
        .collect();
    let time_set: Vec<&String> = instances
        .iter()
        .filter(|i| !all(i, &fast) && any(i, &|r| r.solved))
        .collect();
    let pace_set: Vec<&String> =
        instances.iter().filter(|i| !all(i, &fast)).collect();
    let nodes_set: Vec<&String> =
        instances.iter().filter(|i| all(i, &|r| r.solved)).collect();

    let column = |set: &[&String], value: &dyn Fn(&RunRow) -> f64, shift: f64| MetricColumn {
        count: set.len(),
        values: approaches
            .iter()
            .map(|a| {
                let vals: Vec<f64> = set.iter().map(|i| value(row(i, a))).collect();
                geo_mean(&vals, shift).ok()
            })
            .collect(),
    };

    let gap = column(&gap_set, &|r| r.gap.expect("gap exclusions keep gaps present"), GAP_SHIFT);
    let time = column(&time_set, &|r| r.time_s.max(TIME_FLOOR), 0.0);
    let pace = column(&pace_set, &|r| r.pace, 0.0);
    let nodes_geo = column(&nodes_set, &|r| r.nodes as f64, 0.0);
    let nodes_mean = MetricColumn {
        count: nodes_set.len(),
        values: approaches
            .iter()
            .map(|a| {
                if nodes_set.is_empty() {
                    None
                } else {
                    let sum: f64 = nodes_set.iter().map(|i| row(i, a).nodes as f64).sum();
                    Some(sum / nodes_set.len() as f64)
                }
            })
            .collect(),
    };

    Ok(MetricTable {
        approaches,
        total_instances: instances.len(),
        solved,
        gap,
        time,
        pace,
        nodes_geo,
        nodes_mean,
        gap_shift: GAP_SHIFT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(
        instance: &str,
        approach: &str,
        solved: bool,
        gap: Option<f64>,
        time_s: f64,
        pace: f64,
        nodes: u64,
    ) -> RunRow {
        RunRow {
            instance: instance.into(),
            approach: approach.into(),
            solved,
            gap,
            time_s,
            pace,
            nodes,
            trace_ref: None,
        }
    }

    #[test]
    fn geo_mean_examples() {
        assert!((geo_mean(&[1.0, 4.0], 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(geo_mean(&[0.0, 0.0], 0.001).unwrap().abs() < 1e-15);
        assert!((geo_mean(&[7.25], 0.3).unwrap() - 7.25).abs() < 1e-12);
        assert_eq!(geo_mean(&[], 0.0), Err(MetricsError::EmptyInput));
    }

    fn result_with_trace(wall_time: f64, first_lb: f64, final_lb: f64) -> SolveResult {
        SolveResult {
            status: crate::engine::SolveStatus::Optimal,
            best_lb: final_lb,
            best_ub: final_lb,
            incumbent: None,
            nodes_explored: 1,
            probe_lp_solves: 0,
            wall_time,
            lb_trace: vec![(0.0, first_lb), (wall_time, final_lb)],
            node_log: vec![],
            policy_label: "test",
            deterministic: false,
            failure: None,
        }
    }

    #[test]
    fn pace_examples() {
        // 2s run improving the bound from -0.5 to -0.25
        assert!((pace_lb(&result_with_trace(2.0, -0.5, -0.25)) - 8.0).abs() < 1e-12);

        // no improvement over a 600s run: capped
        assert_eq!(pace_lb(&result_with_trace(600.0, -0.5, -0.5)), PACE_CAP);

        // instant half-unit improvement
        assert!((pace_lb(&result_with_trace(0.01, -0.5, 0.0)) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn all_fast_instances_empty_time_and_pace() {
        // 3 instances, 2 approaches, everything solved under 5 seconds.
        let mut rows = Vec::new();
        for i in ["a", "b", "c"] {
            for ap in ["p", "q"] {
                rows.push(row(i, ap, true, Some(0.0), 1.0, 0.5, 10));
            }
        }
        let table = aggregate(&rows).unwrap();
        assert_eq!(table.time.count, 0);
        assert_eq!(table.pace.count, 0);
        assert_eq!(table.nodes_geo.count, 3);
        assert_eq!(table.gap.count, 0); // everything solved -> gap excluded too
        assert!(table.time.values.iter().all(Option::is_none));
    }

    #[test]
    fn missing_gap_excludes_instance_for_everyone() {
        let rows = vec![
            row("a", "p", false, None, 600.0, 9.0, 100),
            row("a", "q", false, Some(0.5), 600.0, 7.0, 120),
            row("b", "p", false, Some(0.2), 600.0, 8.0, 90),
            row("b", "q", false, Some(0.3), 600.0, 6.0, 80),
        ];
        let table = aggregate(&rows).unwrap();
        assert_eq!(table.gap.count, 1); // only instance b survives
        let p = table.approaches.iter().position(|a| a == "p").unwrap();
        let q = table.approaches.iter().position(|a| a == "q").unwrap();
        assert!((table.gap.values[p].unwrap() - 0.2).abs() < 1e-9);
        assert!((table.gap.values[q].unwrap() - 0.3).abs() < 1e-9);
        assert_eq!(table.solved, vec![0, 0]);
        assert_eq!(table.nodes_geo.count, 0);
    }

    #[test]
    fn synthetic_static_expert_dominates_pace() {
        // The static expert's row per instance is the pace-minimum of the
        // rules' rows, so its pace geo-mean can never exceed any rule's.
        let mut rows = Vec::new();
        let paces = [[8.0, 4.0], [3.0, 6.0], [9.0, 7.0]];
        for (k, inst) in ["a", "b", "c"].iter().enumerate() {
            rows.push(row(inst, "r1", true, Some(0.0), 30.0, paces[k][0], 50));
            rows.push(row(inst, "r2", true, Some(0.0), 30.0, paces[k][1], 60));
            let best = paces[k][0].min(paces[k][1]);
            rows.push(row(inst, "static", true, Some(0.0), 30.0, best, 55));
        }
        let table = aggregate(&rows).unwrap();
        let idx = |name: &str| table.approaches.iter().position(|a| a == name).unwrap();
        let static_pace = table.pace.values[idx("static")].unwrap();
        assert!(static_pace <= table.pace.values[idx("r1")].unwrap() + 1e-12);
        assert!(static_pace <= table.pace.values[idx("r2")].unwrap() + 1e-12);
        assert_eq!(table.pace.count, 3);
    }

    #[test]
    fn incomplete_grid_rejected() {
        let rows = vec![
            row("a", "p", true, Some(0.0), 1.0, 1.0, 1),
            row("a", "q", true, Some(0.0), 1.0, 1.0, 1),
            row("b", "p", true, Some(0.0), 1.0, 1.0, 1),
        ];
        assert!(matches!(aggregate(&rows), Err(MetricsError::InconsistentRows(_))));
    }

    #[test]
    fn time_floor_applies() {
        let rows = vec![
            row("a", "p", true, Some(0.0), 0.001, 1.0, 1),
            row("a", "q", false, Some(0.1), 600.0, 9.0, 500),
        ];
        let table = aggregate(&rows).unwrap();
        let p = table.approaches.iter().position(|a| a == "p").unwrap();
        // not all-fast (q unsolved), someone solved it -> included, floored
        assert_eq!(table.time.count, 1);
        assert!((table.time.values[p].unwrap() - TIME_FLOOR).abs() < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        #[derive(Debug, Clone)]
        struct Cell {
            solved: bool,
            gap: Option<f64>,
            time_s: f64,
            pace: f64,
            nodes: u64,
        }

        fn cell_strategy() -> impl Strategy<Value = Cell> {
            (
                any::<bool>(),
                proptest::option::of(0.0f64..2.0),
                0.1f64..700.0,
                0.01f64..100.0,
                1u64..5000,
            )
                .prop_map(|(solved, gap, time_s, pace, nodes)| Cell {
                    solved: solved && gap.is_some(),
                    gap,
                    time_s,
                    pace,
                    nodes,
                })
        }

        fn grid_strategy() -> impl Strategy<Value = Vec<Vec<Cell>>> {
            (2usize..5, 2usize..6).prop_flat_map(|(num_app, num_inst)| {
                proptest::collection::vec(
                    proptest::collection::vec(cell_strategy(), num_app),
                    num_inst,
                )
            })
        }

        fn rows_of(grid: &[Vec<Cell>]) -> Vec<RunRow> {
            grid.iter()
                .enumerate()
                .flat_map(|(i, cells)| {
                    cells.iter().enumerate().map(move |(a, c)| RunRow {
                        instance: format!("i{i}"),
                        approach: format!("a{a}"),
                        solved: c.solved,
                        gap: c.gap,
                        time_s: c.time_s,
                        pace: c.pace,
                        nodes: c.nodes,
                        trace_ref: None,
                    })
                })
                .collect()
        }

        proptest! {
            // Per-metric counts equal an independently re-derived
            // total-minus-excluded on arbitrary grids.
            #[test]
            fn exclusion_counts_match_brute_force(grid in grid_strategy()) {
                let rows = rows_of(&grid);
                let table = aggregate(&rows).unwrap();
                let total = grid.len();

                let mut gap_excluded = 0;
                let mut time_excluded = 0;
                let mut pace_excluded = 0;
                let mut nodes_excluded = 0;
                for cells in &grid {
                    let any_missing_gap = cells.iter().any(|c| c.gap.is_none());
                    let all_solved = cells.iter().all(|c| c.solved);
                    let all_fast =
                        cells.iter().all(|c| c.solved && c.time_s < FAST_SOLVE_SECONDS);
                    let none_solved = cells.iter().all(|c| !c.solved);
                    if any_missing_gap || all_solved {
                        gap_excluded += 1;
                    }
                    if all_fast || none_solved {
                        time_excluded += 1;
                    }
                    if all_fast {
                        pace_excluded += 1;
                    }
                    if !all_solved {
                        nodes_excluded += 1;
                    }
                }
                prop_assert_eq!(table.gap.count, total - gap_excluded);
                prop_assert_eq!(table.time.count, total - time_excluded);
                prop_assert_eq!(table.pace.count, total - pace_excluded);
                prop_assert_eq!(table.nodes_geo.count, total - nodes_excluded);
                prop_assert_eq!(table.nodes_mean.count, table.nodes_geo.count);
            }

            // A synthetic static-expert row set built from per-instance pace
            // minima dominates every rule in the aggregated Pace column.
            #[test]
            fn synthetic_expert_dominates_every_rule(grid in grid_strategy()) {
                let mut rows = rows_of(&grid);
                for (i, cells) in grid.iter().enumerate() {
                    let best = cells
                        .iter()
                        .min_by(|a, b| a.pace.total_cmp(&b.pace))
                        .unwrap();
                    rows.push(RunRow {
                        instance: format!("i{i}"),
                        approach: "zz_expert".into(),
                        solved: best.solved,
                        gap: best.gap,
                        time_s: best.time_s,
                        pace: best.pace,
                        nodes: best.nodes,
                        trace_ref: None,
                    });
                }
                let table = aggregate(&rows).unwrap();
                let expert = table.approaches.iter().position(|a| a == "zz_expert").unwrap();
                if let Some(expert_pace) = table.pace.values[expert] {
                    for (a, value) in table.pace.values.iter().enumerate() {
                        if a != expert {
                            prop_assert!(expert_pace <= value.unwrap() + 1e-9);
                        }
                    }
                }
            }
        }
    }
}
