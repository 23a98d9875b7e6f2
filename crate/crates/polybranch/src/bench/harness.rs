//! The benchmark harness: approach tokens, the two-phase run schedule, and
//! deterministic row assembly.
//!
//! Approach tokens:
//! * the six rule labels (`dual`, `range`, `eigen`, `dual_rel`, `range_rel`,
//!   `eigen_rel`),
//! * `orule_s` — per-instance best rule, synthesized from the rule runs,
//! * `brule_d_opt` / `brule_d_fix[@rule]` — per-node rule expert,
//! * `bvar_d_opt[:tau]` / `bvar_d_fix[@rule][:tau]` — per-node variable
//!   expert with a tie threshold.
//!
//! `_opt` falls back to the instance's best rule (which forces the full rule
//! portfolio to run first); `_fix` falls back to a fixed rule, `range_rel`
//! unless overridden with `@rule`.

use rayon::prelude::*;
use thiserror::Error;

use crate::bench::metrics::RunRow;
use crate::engine::{solve, EngineConfig, SolveResult, SolveStatus};
use crate::poly::POProblem;
use crate::rules::{
    orule_select, run_expert, ExpertConfig, ExpertKind, FallbackSpec, FixedRulePolicy, RuleId,
    SelectionMetric,
};

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("unknown approach `{0}`")]
    UnknownApproach(String),
    #[error("bad tie threshold in `{0}`")]
    BadTau(String),
    #[error("no approaches requested")]
    NoApproaches,
    #[error("no instances found")]
    NoInstances,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproachKind {
    Fixed(RuleId),
    ORuleS,
    BRule { fallback: FallbackSpec },
    BVar { fallback: FallbackSpec, tau: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproachSpec {
    pub token: String,
    pub kind: ApproachKind,
}

impl ApproachSpec {
    pub fn needs_portfolio(&self) -> bool {
        matches!(
            self.kind,
            ApproachKind::ORuleS
                | ApproachKind::BRule { fallback: FallbackSpec::Orule }
                | ApproachKind::BVar { fallback: FallbackSpec::Orule, .. }
        )
    }
}

pub fn parse_approach(token: &str) -> Result<ApproachSpec, HarnessError> {
    let spec = |kind| ApproachSpec { token: token.to_string(), kind };
    if let Ok(rule) = RuleId::parse(token) {
        return Ok(spec(ApproachKind::Fixed(rule)));
    }
    if token == "orule_s" {
        return Ok(spec(ApproachKind::ORuleS));
    }

    // bvar tokens may end with `:tau`
    let (head, tau) = match token.split_once(':') {
        Some((head, tau_str)) => {
            let tau: f64 = tau_str
                .parse()
                .map_err(|_| HarnessError::BadTau(token.to_string()))?;
            if tau.is_nan() || tau < 0.0 {
                return Err(HarnessError::BadTau(token.to_string()));
            }
            (head, tau)
        }
        None => (token, 0.0),
    };
    let fallback_of = |rest: &str| -> Result<FallbackSpec, HarnessError> {
        match rest.strip_prefix('@') {
            None if rest.is_empty() => Ok(FallbackSpec::Rule(RuleId::RangeRel)),
            Some(rule) => RuleId::parse(rule)
                .map(FallbackSpec::Rule)
                .map_err(|_| HarnessError::UnknownApproach(token.to_string())),
            None => Err(HarnessError::UnknownApproach(token.to_string())),
        }
    };

    if head == "brule_d_opt" && tau == 0.0 && !token.contains(':') {
        return Ok(spec(ApproachKind::BRule { fallback: FallbackSpec::Orule }));
    }
    if let Some(rest) = head.strip_prefix("brule_d_fix") {
        if !token.contains(':') {
            return Ok(spec(ApproachKind::BRule { fallback: fallback_of(rest)? }));
        }
    }
    if head == "bvar_d_opt" {
        return Ok(spec(ApproachKind::BVar { fallback: FallbackSpec::Orule, tau }));
    }
    if let Some(rest) = head.strip_prefix("bvar_d_fix") {
        return Ok(spec(ApproachKind::BVar { fallback: fallback_of(rest)?, tau }));
    }
    Err(HarnessError::UnknownApproach(token.to_string()))
}

/// Parses a comma-separated approach list.
pub fn parse_approaches(list: &str) -> Result<Vec<ApproachSpec>, HarnessError> {
    let specs: Vec<ApproachSpec> = list
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_approach)
        .collect::<Result<_, _>>()?;
    if specs.is_empty() {
        return Err(HarnessError::NoApproaches);
    }
    Ok(specs)
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub engine: EngineConfig,
    /// Worker threads for the (instance x approach) schedule; 0 picks the
    /// rayon default.
    pub jobs: usize,
}

/// Full bench output: the report rows plus every underlying solve, for
/// callers that also want traces.
pub struct BenchOutcome {
    pub rows: Vec<RunRow>,
    pub solves: Vec<(String, String, SolveResult)>,
}

/// Runs every requested approach on every instance and assembles rows sorted
/// by (instance, approach). Scheduling is two-phase: the rule portfolio runs
/// first (shared by the experts), then the expert approaches; each phase
/// fans out over a bounded worker pool. Output order does not depend on
/// scheduling.
pub fn run_bench(
    instances: &[(String, POProblem)],
    approaches: &[ApproachSpec],
    opts: &BenchOptions,
) -> Result<BenchOutcome, HarnessError> {
    if instances.is_empty() {
        return Err(HarnessError::NoInstances);
    }
    if approaches.is_empty() {
        return Err(HarnessError::NoApproaches);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("worker pool");

    // Which rules have to run per instance.
    let mut needed_rules: Vec<RuleId> = approaches
        .iter()
        .filter_map(|a| match a.kind {
            ApproachKind::Fixed(rule) => Some(rule),
            _ => None,
        })
        .collect();
    if approaches.iter().any(ApproachSpec::needs_portfolio) {
        needed_rules = RuleId::ALL.to_vec();
    }
    needed_rules.sort_by_key(|r| r.label());
    needed_rules.dedup();

    // Phase 1: fixed-rule runs, flat (instance x rule) parallelism.
    let rule_jobs: Vec<(usize, RuleId)> = (0..instances.len())
        .flat_map(|i| needed_rules.iter().map(move |&r| (i, r)))
        .collect();
    let rule_results: Vec<(usize, RuleId, SolveResult)> = pool.install(|| {
        rule_jobs
            .par_iter()
            .map(|&(i, rule)| {
                let mut policy = FixedRulePolicy::new(rule);
                (i, rule, solve(&instances[i].1, &opts.engine, &mut policy))
            })
            .collect()
    });
    let portfolio_of = |i: usize| -> Vec<(RuleId, SolveResult)> {
        rule_results
            .iter()
            .filter(|&&(k, _, _)| k == i)
            .map(|(_, r, s)| (*r, s.clone()))
            .collect()
    };

    // Phase 2: expert runs.
    let expert_jobs: Vec<(usize, &ApproachSpec)> = (0..instances.len())
        .flat_map(|i| {
            approaches
                .iter()
                .filter(|a| !matches!(a.kind, ApproachKind::Fixed(_) | ApproachKind::ORuleS))
                .map(move |a| (i, a))
        })
        .collect();
    let expert_results: Vec<(usize, String, SolveResult)> = pool.install(|| {
        expert_jobs
            .par_iter()
            .map(|&(i, approach)| {
                let portfolio = portfolio_of(i);
                let expert_cfg = match approach.kind {
                    ApproachKind::BRule { fallback } => ExpertConfig {
                        expert: ExpertKind::BRuleD,
                        fallback,
                        tie_tau: 0.0,
                        metric: SelectionMetric::Pace,
                    },
                    ApproachKind::BVar { fallback, tau } => ExpertConfig {
                        expert: ExpertKind::BVarD,
                        fallback,
                        tie_tau: tau,
                        metric: SelectionMetric::Pace,
                    },
                    _ => unreachable!("phase 2 jobs are experts"),
                };
                let result =
                    run_expert(&instances[i].1, &opts.engine, &expert_cfg, Some(&portfolio));
                (i, approach.token.clone(), result)
            })
            .collect()
    });

    // Assemble rows.
    let mut rows: Vec<RunRow> = Vec::new();
    let mut solves: Vec<(String, String, SolveResult)> = Vec::new();
    for (i, (name, _)) in instances.iter().enumerate() {
        let portfolio = portfolio_of(i);
        for approach in approaches {
            let (token, result) = match approach.kind {
                ApproachKind::Fixed(rule) => {
                    let result = portfolio
                        .iter()
                        .find(|(r, _)| *r == rule)
                        .map(|(_, s)| s.clone())
                        .expect("phase 1 ran every fixed rule");
                    (approach.token.clone(), result)
                }
                ApproachKind::ORuleS => {
                    let refs: Vec<(RuleId, &SolveResult)> =
                        portfolio.iter().map(|(r, s)| (*r, s)).collect();
                    let winner = orule_select(&refs, SelectionMetric::Pace);
                    let mut result = portfolio
                        .iter()
                        .find(|(r, _)| *r == winner)
                        .map(|(_, s)| s.clone())
                        .expect("winner ran");
                    result.policy_label = "orule_s";
                    (approach.token.clone(), result)
                }
                _ => {
                    let (_, token, result) = expert_results
                        .iter()
                        .find(|(k, token, _)| *k == i && token == &approach.token)
                        .expect("phase 2 ran every expert approach");
                    (token.clone(), result.clone())
                }
            };
            rows.push(RunRow::from_result(name, &token, &result));
            solves.push((name.clone(), token, result));
        }
    }
    rows.sort_by(|a, b| (&a.instance, &a.approach).cmp(&(&b.instance, &b.approach)));
    solves.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    Ok(BenchOutcome { rows, solves })
}

/// True when a bench outcome contains any failed run.
pub fn any_failed(outcome: &BenchOutcome) -> bool {
    outcome.solves.iter().any(|(_, _, r)| r.status == SolveStatus::Failed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{p1, p2};

    #[test]
    fn approach_tokens_parse() {
        assert_eq!(parse_approach("dual").unwrap().kind, ApproachKind::Fixed(RuleId::Dual));
        assert_eq!(parse_approach("orule_s").unwrap().kind, ApproachKind::ORuleS);
        assert_eq!(
            parse_approach("brule_d_opt").unwrap().kind,
            ApproachKind::BRule { fallback: FallbackSpec::Orule }
        );
        assert_eq!(
            parse_approach("brule_d_fix").unwrap().kind,
            ApproachKind::BRule { fallback: FallbackSpec::Rule(RuleId::RangeRel) }
        );
        assert_eq!(
            parse_approach("brule_d_fix@dual").unwrap().kind,
            ApproachKind::BRule { fallback: FallbackSpec::Rule(RuleId::Dual) }
        );
        assert_eq!(
            parse_approach("bvar_d_opt:0.01").unwrap().kind,
            ApproachKind::BVar { fallback: FallbackSpec::Orule, tau: 0.01 }
        );
        assert_eq!(
            parse_approach("bvar_d_fix@eigen:0.05").unwrap().kind,
            ApproachKind::BVar { fallback: FallbackSpec::Rule(RuleId::Eigen), tau: 0.05 }
        );
        assert!(parse_approach("strong").is_err());
        assert!(parse_approach("bvar_d_opt:x").is_err());
    }

    #[test]
    fn bench_grid_is_complete_and_sorted() {
        let instances = vec![("a".to_string(), p2()), ("b".to_string(), p1())];
        let approaches = parse_approaches("range,orule_s,bvar_d_opt").unwrap();
        let opts = BenchOptions {
            engine: EngineConfig {
                deterministic: true,
                time_limit: None,
                node_limit: Some(200),
                ..EngineConfig::default()
            },
            jobs: 2,
        };
        let outcome = run_bench(&instances, &approaches, &opts).unwrap();
        assert_eq!(outcome.rows.len(), 6);
        let keys: Vec<(String, String)> =
            outcome.rows.iter().map(|r| (r.instance.clone(), r.approach.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(outcome.rows.iter().all(|r| r.solved));
        assert!(!any_failed(&outcome));
    }

    #[test]
    fn deterministic_bench_repeats_exactly() {
        let instances = vec![("a".to_string(), p2())];
        let approaches = parse_approaches("dual,range_rel,orule_s,brule_d_opt").unwrap();
        let opts = BenchOptions {
            engine: EngineConfig {
                deterministic: true,
                time_limit: None,
                node_limit: Some(500),
                ..EngineConfig::default()
            },
            jobs: 3,
        };
        let a = run_bench(&instances, &approaches, &opts).unwrap();
        let b = run_bench(&instances, &approaches, &opts).unwrap();
        assert_eq!(a.rows, b.rows);
    }
}
