//! Spatial branch-and-bound driver.
//!
//! The driver owns the node queue (best-bound order, FIFO on ties), solves
//! one relaxation per node at node creation, maintains the incumbent and the
//! lower-bound trace, and delegates every branching decision to a
//! [`BranchPolicy`]. Policies may probe child relaxations through the
//! [`Prober`]; probe solves are counted separately from main-tree nodes, and
//! a probed winning pair is adopted as the actual children without re-solving.

use std::collections::BinaryHeap;
use std::time::Instant;

use thiserror::Error;

use crate::lp::{lp_solve, LpError, LpModel, LpStatus};
use crate::poly::POProblem;
use crate::rlt::{build_index, build_rlt_lp_with, NodeBounds, RltError, RltIndex};

/// Certified-optimality threshold on the relative or absolute gap. A run
/// reports `Optimal` exactly when its final gap clears this bar, regardless
/// of the (possibly looser) configured stopping tolerance.
pub const CERTIFIED_GAP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("branch point {point} is not strictly inside [{lo}, {hi}] of variable {var}")]
    BranchPointOutside { var: u32, point: f64, lo: f64, hi: f64 },
}

/// Failure surfaced by a branching policy.
#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Rlt(#[from] RltError),
    #[error("no branchable candidate variable at this node")]
    NoCandidate,
}

/// One node of the tree. The relaxation is solved when the node is created;
/// `lb` is its optimum (`+inf` for an infeasible child, which is fathomed
/// immediately and never queued).
#[derive(Debug, Clone)]
pub struct BBNode {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub bounds: NodeBounds,
    pub lb: f64,
    pub depth: u32,
    /// Full relaxation primal: original variables first, then relaxation
    /// columns in index order.
    pub primal: Option<Vec<f64>>,
    /// Row duals of the node relaxation, aligned with the rebuilt model.
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    TimeLimit,
    NodeLimit,
    Failed,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap-limit",
            SolveStatus::TimeLimit => "time-limit",
            SolveStatus::NodeLimit => "node-limit",
            SolveStatus::Failed => "failed",
        }
    }
}

/// KPI entry for one probed candidate variable.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiProbe {
    pub variable: u32,
    pub kpi: f64,
}

/// The variable one rule would have chosen at a node, with its measured KPI.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleChoice {
    pub rule: &'static str,
    pub variable: u32,
    pub kpi: f64,
}

/// Branching record for one expanded node.
#[derive(Debug, Clone)]
pub struct NodeDecision {
    pub node_id: u64,
    pub parent_id: Option<u64>,
    pub variable: u32,
    /// Policy label, verbatim in trace files.
    pub label: &'static str,
    pub branch_point: f64,
    pub parent_lb: f64,
    pub child_lbs: (f64, f64),
    pub kpi_observed: f64,
    /// Per-candidate KPI table when the policy probed candidates.
    pub kpi_table: Vec<KpiProbe>,
    /// Per-rule choices when the policy evaluated a rule portfolio.
    pub rule_choices: Vec<RuleChoice>,
    /// Winning rule label for portfolio policies.
    pub chosen_rule: Option<&'static str>,
    /// Time measure (seconds, or node count in deterministic mode).
    pub wall: f64,
}

/// Outcome of a solve, with everything the benchmark metrics consume.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub best_lb: f64,
    pub best_ub: f64,
    pub incumbent: Option<Vec<f64>>,
    pub nodes_explored: u64,
    pub probe_lp_solves: u64,
    pub wall_time: f64,
    /// (time measure, lower bound) at every strict global-bound improvement.
    pub lb_trace: Vec<(f64, f64)>,
    pub node_log: Vec<NodeDecision>,
    pub policy_label: &'static str,
    pub deterministic: bool,
    pub failure: Option<String>,
}

impl SolveResult {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Wall seconds, or the node count when the run was deterministic.
    pub fn time_measure(&self) -> f64 {
        if self.deterministic {
            self.nodes_explored as f64
        } else {
            self.wall_time
        }
    }

    /// Relative gap at termination; `None` without an incumbent.
    pub fn rel_gap(&self) -> Option<f64> {
        if self.best_ub.is_finite() {
            Some(gap(self.best_lb, self.best_ub).1.max(0.0))
        } else {
            None
        }
    }

    /// Time measure per unit of lower-bound improvement over the run, capped
    /// at 1e7 when the bound never moved.
    pub fn pace(&self) -> f64 {
        let root_lb = self.lb_trace.first().map(|&(_, lb)| lb).unwrap_or(self.best_lb);
        let improvement = self.best_lb - root_lb;
        if !improvement.is_finite() || improvement <= 1e-9 {
            1e7
        } else {
            self.time_measure() / improvement
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Wall-clock limit in seconds; ignored in deterministic mode.
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub rel_gap_tol: f64,
    pub abs_gap_tol: f64,
    pub feasibility_tol: f64,
    /// Branch-point guard: the relaxation value is clamped at least this
    /// fraction of the box width away from either bound.
    pub branch_guard: f64,
    /// Replaces wall-clock control and time measures with node counts so two
    /// runs of the same input are bit-identical.
    pub deterministic: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            time_limit: Some(600.0),
            node_limit: None,
            rel_gap_tol: 1e-3,
            abs_gap_tol: 1e-3,
            feasibility_tol: crate::poly::DEFAULT_FEASIBILITY_TOL,
            branch_guard: 0.1,
            deterministic: false,
        }
    }
}

/// Everything a policy may look at when choosing a branching variable.
pub struct NodeCtx<'a> {
    pub problem: &'a POProblem,
    pub index: &'a RltIndex,
    /// The node relaxation, rebuilt for this node (same rows the stored
    /// duals were priced on).
    pub model: &'a LpModel,
    pub node: &'a BBNode,
    pub config: &'a EngineConfig,
}

/// Child relaxation evaluated during probing or branching.
#[derive(Debug, Clone)]
pub struct ChildEval {
    pub bounds: NodeBounds,
    pub lb: f64,
    pub primal: Option<Vec<f64>>,
    pub duals: Vec<f64>,
}

/// Solves child relaxations on behalf of a policy, counting probe LPs.
pub struct Prober<'a> {
    problem: &'a POProblem,
    index: &'a RltIndex,
    counter: &'a mut u64,
}

impl Prober<'_> {
    pub fn eval(&mut self, bounds: NodeBounds) -> Result<ChildEval, LpError> {
        *self.counter += 1;
        eval_bounds(self.problem, self.index, bounds)
    }
}

fn eval_bounds(
    problem: &POProblem,
    index: &RltIndex,
    bounds: NodeBounds,
) -> Result<ChildEval, LpError> {
    let model = build_rlt_lp_with(problem, index, &bounds)
        .map_err(|_| LpError::Numerical("relaxation construction failed"))?;
    let sol = lp_solve(&model)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut primal = sol.primal;
            primal.resize(model.num_cols, 0.0);
            Ok(ChildEval { bounds, lb: sol.objective_value, primal: Some(primal), duals: sol.duals })
        }
        LpStatus::Infeasible => {
            Ok(ChildEval { bounds, lb: f64::INFINITY, primal: None, duals: Vec::new() })
        }
        LpStatus::Unbounded => Err(LpError::Numerical("relaxation reported unbounded")),
    }
}

/// A branching decision: the variable, the split point, and optionally the
/// already-solved children plus probe bookkeeping for the node log.
pub struct Decision {
    pub variable: u32,
    pub branch_point: f64,
    pub children: Option<(ChildEval, ChildEval)>,
    pub kpi_table: Vec<KpiProbe>,
    pub rule_choices: Vec<RuleChoice>,
    pub chosen_rule: Option<&'static str>,
}

impl Decision {
    pub fn plain(variable: u32, branch_point: f64) -> Self {
        Decision {
            variable,
            branch_point,
            children: None,
            kpi_table: Vec::new(),
            rule_choices: Vec::new(),
            chosen_rule: None,
        }
    }
}

/// A variable-selection strategy driving the tree search.
pub trait BranchPolicy {
    /// Canonical label; appears verbatim in trace records.
    fn label(&self) -> &'static str;

    fn decide(&mut self, ctx: &NodeCtx<'_>, prober: &mut Prober<'_>) -> Result<Decision, PolicyError>;

    /// Called once per branching with the observed KPI of the chosen
    /// variable; policies with per-variable history hook in here.
    fn observe(&mut self, _variable: u32, _kpi: f64, _parent_lb: f64) {}
}

/// Splits a box at `point` on variable `j`: left child keeps the lower part.
pub fn branch(bounds: &NodeBounds, j: u32, point: f64) -> Result<(NodeBounds, NodeBounds), EngineError> {
    let (lo, hi) = (bounds.lower[j as usize], bounds.upper[j as usize]);
    if !(point > lo && point < hi) {
        return Err(EngineError::BranchPointOutside { var: j, point, lo, hi });
    }
    Ok((bounds.child_below(j as usize, point), bounds.child_above(j as usize, point)))
}

/// Branch point for variable `j`: the relaxation value clamped away from the
/// bounds by `alpha` times the box width; midpoint when no primal is
/// available or the guard interval collapses.
pub fn branch_point(node: &BBNode, j: u32, alpha: f64) -> f64 {
    let lo = node.bounds.lower[j as usize];
    let hi = node.bounds.upper[j as usize];
    let mid = 0.5 * (lo + hi);
    let width = hi - lo;
    let (guard_lo, guard_hi) = (lo + alpha * width, hi - alpha * width);
    if guard_lo >= guard_hi {
        return mid;
    }
    match node.primal.as_ref().map(|p| p[j as usize]) {
        Some(x) if x.is_finite() => x.clamp(guard_lo, guard_hi),
        _ => mid,
    }
}

/// Lower-bound improvement of a branching: `min(child lbs) - parent lb`.
/// An infeasible child contributes `+inf`; both infeasible means the node
/// was fully pruned, the strongest possible outcome.
pub fn node_kpi(parent_lb: f64, left_lb: f64, right_lb: f64) -> f64 {
    left_lb.min(right_lb) - parent_lb
}

/// `(absolute, relative)` optimality gap; both `+inf` without an upper bound.
pub fn gap(lb: f64, ub: f64) -> (f64, f64) {
    if !ub.is_finite() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let abs = ub - lb;
    (abs, abs / ub.abs().max(1e-6))
}

/// Replaces the incumbent when `x` is feasible and strictly better. Returns
/// whether a replacement happened.
pub fn update_incumbent(
    best_ub: &mut f64,
    incumbent: &mut Option<Vec<f64>>,
    problem: &POProblem,
    x: &[f64],
    tol: f64,
) -> bool {
    let feasible = problem.point_feasible(x, tol).unwrap_or(false);
    if !feasible {
        return false;
    }
    let value = match problem.objective.eval(x) {
        Ok(v) => v,
        Err(_) => return false,
    };
    if value < *best_ub {
        *best_ub = value;
        *incumbent = Some(x.to_vec());
        true
    } else {
        false
    }
}

struct HeapItem {
    node: BBNode,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.node.lb == other.node.lb && self.node.id == other.node.id
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    // Reversed so the max-heap pops the lowest bound, FIFO on ties.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .node
            .lb
            .total_cmp(&self.node.lb)
            .then_with(|| other.node.id.cmp(&self.node.id))
    }
}

enum StopReason {
    GapMet,
    Exhausted,
    TimeLimit,
    NodeLimit,
    Failed(String),
}

/// Runs spatial branch-and-bound on `problem` under `policy`.
pub fn solve(problem: &POProblem, cfg: &EngineConfig, policy: &mut dyn BranchPolicy) -> SolveResult {
    debug_assert!(cfg.rel_gap_tol > 0.0 && cfg.abs_gap_tol > 0.0 && cfg.feasibility_tol > 0.0);
    debug_assert!((0.0..0.5).contains(&cfg.branch_guard));
    debug_assert!(problem.validate().is_valid(), "solve expects a validated problem");
    let t0 = Instant::now();
    let index = build_index(problem);

    let mut probe_solves: u64 = 0;
    let mut best_ub = f64::INFINITY;
    let mut incumbent: Option<Vec<f64>> = None;
    let mut lb_trace: Vec<(f64, f64)> = Vec::new();
    let mut node_log: Vec<NodeDecision> = Vec::new();
    let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
    let mut next_id: u64 = 0;

    let measure = |t0: &Instant, nodes: u64| -> f64 {
        if cfg.deterministic {
            nodes as f64
        } else {
            t0.elapsed().as_secs_f64()
        }
    };

    let finish = |reason: StopReason,
                  global_lb: f64,
                  best_ub: f64,
                  incumbent: Option<Vec<f64>>,
                  nodes_explored: u64,
                  probe_solves: u64,
                  lb_trace: Vec<(f64, f64)>,
                  node_log: Vec<NodeDecision>,
                  label: &'static str,
                  t0: Instant| {
        let (abs, rel) = gap(global_lb, best_ub);
        let certified = abs <= CERTIFIED_GAP || rel <= CERTIFIED_GAP;
        let (status, failure) = match reason {
            StopReason::Exhausted => (SolveStatus::Optimal, None),
            StopReason::GapMet if certified => (SolveStatus::Optimal, None),
            StopReason::GapMet => (SolveStatus::GapLimit, None),
            StopReason::TimeLimit if certified => (SolveStatus::Optimal, None),
            StopReason::TimeLimit => (SolveStatus::TimeLimit, None),
            StopReason::NodeLimit if certified => (SolveStatus::Optimal, None),
            StopReason::NodeLimit => (SolveStatus::NodeLimit, None),
            StopReason::Failed(msg) => (SolveStatus::Failed, Some(msg)),
        };
        SolveResult {
            status,
            best_lb: global_lb,
            best_ub,
            incumbent,
            nodes_explored,
            probe_lp_solves: probe_solves,
            wall_time: t0.elapsed().as_secs_f64(),
            lb_trace,
            node_log,
            policy_label: label,
            deterministic: cfg.deterministic,
            failure,
        }
    };

    // Root relaxation.
    let root_eval = match eval_bounds(problem, &index, NodeBounds::root(problem)) {
        Ok(eval) => eval,
        Err(e) => {
            return finish(
                StopReason::Failed(format!("root relaxation: {e}")),
                f64::NEG_INFINITY,
                best_ub,
                None,
                1,
                0,
                lb_trace,
                node_log,
                policy.label(),
                t0,
            )
        }
    };
    let mut nodes_explored: u64 = 1;
    if !root_eval.lb.is_finite() {
        // Infeasible root: the box contains no feasible point, certified.
        return finish(
            StopReason::Exhausted,
            f64::INFINITY,
            f64::INFINITY,
            None,
            nodes_explored,
            probe_solves,
            lb_trace,
            node_log,
            policy.label(),
            t0,
        );
    }
    let mut global_lb = root_eval.lb;
    lb_trace.push((measure(&t0, nodes_explored), global_lb));
    if let Some(primal) = &root_eval.primal {
        update_incumbent(&mut best_ub, &mut incumbent, problem, &primal[..problem.num_vars], cfg.feasibility_tol);
    }
    heap.push(HeapItem {
        node: BBNode {
            id: next_id,
            parent_id: None,
            bounds: root_eval.bounds,
            lb: root_eval.lb,
            depth: 0,
            primal: root_eval.primal,
            duals: root_eval.duals,
        },
    });
    next_id += 1;

    let reason = loop {
        let Some(top) = heap.peek() else {
            // Tree exhausted: the bound closes onto the incumbent.
            global_lb = best_ub;
            if let Some(last) = lb_trace.last() {
                if best_ub > last.1 && best_ub.is_finite() {
                    lb_trace.push((measure(&t0, nodes_explored), best_ub));
                }
            }
            break StopReason::Exhausted;
        };
        let effective = top.node.lb.min(best_ub);
        if effective > global_lb {
            global_lb = effective;
            lb_trace.push((measure(&t0, nodes_explored), global_lb));
        }
        let (abs, rel) = gap(global_lb, best_ub);
        if abs <= cfg.abs_gap_tol || rel <= cfg.rel_gap_tol {
            break StopReason::GapMet;
        }
        if !cfg.deterministic {
            if let Some(limit) = cfg.time_limit {
                if t0.elapsed().as_secs_f64() > limit {
                    break StopReason::TimeLimit;
                }
            }
        }
        if let Some(limit) = cfg.node_limit {
            if nodes_explored >= limit {
                break StopReason::NodeLimit;
            }
        }

        let node = heap.pop().expect("peeked above").node;
        let model = match build_rlt_lp_with(problem, &index, &node.bounds) {
            Ok(m) => m,
            Err(e) => break StopReason::Failed(format!("node {} relaxation: {e}", node.id)),
        };
        let decision = {
            let ctx = NodeCtx { problem, index: &index, model: &model, node: &node, config: cfg };
            let mut prober = Prober { problem, index: &index, counter: &mut probe_solves };
            match policy.decide(&ctx, &mut prober) {
                Ok(d) => d,
                Err(e) => break StopReason::Failed(format!("node {}: {e}", node.id)),
            }
        };

        let (lo_bounds, hi_bounds) = match branch(&node.bounds, decision.variable, decision.branch_point) {
            Ok(pair) => pair,
            Err(e) => break StopReason::Failed(format!("node {}: {e}", node.id)),
        };
        let (left, right) = match decision.children {
            Some(pair) => pair,
            None => {
                let left = match eval_bounds(problem, &index, lo_bounds) {
                    Ok(e) => e,
                    Err(e) => break StopReason::Failed(format!("node {} left child: {e}", node.id)),
                };
                let right = match eval_bounds(problem, &index, hi_bounds) {
                    Ok(e) => e,
                    Err(e) => break StopReason::Failed(format!("node {} right child: {e}", node.id)),
                };
                (left, right)
            }
        };
        nodes_explored += 2;

        let kpi = node_kpi(node.lb, left.lb, right.lb);
        policy.observe(decision.variable, kpi, node.lb);
        node_log.push(NodeDecision {
            node_id: node.id,
            parent_id: node.parent_id,
            variable: decision.variable,
            label: policy.label(),
            branch_point: decision.branch_point,
            parent_lb: node.lb,
            child_lbs: (left.lb, right.lb),
            kpi_observed: kpi,
            kpi_table: decision.kpi_table,
            rule_choices: decision.rule_choices,
            chosen_rule: decision.chosen_rule,
            wall: measure(&t0, nodes_explored),
        });

        for child in [left, right] {
            if !child.lb.is_finite() {
                continue; // infeasible child, fathomed
            }
            if let Some(primal) = &child.primal {
                update_incumbent(
                    &mut best_ub,
                    &mut incumbent,
                    problem,
                    &primal[..problem.num_vars],
                    cfg.feasibility_tol,
                );
            }
            heap.push(HeapItem {
                node: BBNode {
                    id: next_id,
                    parent_id: Some(node.id),
                    bounds: child.bounds,
                    lb: child.lb,
                    depth: node.depth + 1,
                    primal: child.primal,
                    duals: child.duals,
                },
            });
            next_id += 1;
        }
    };

    finish(
        reason,
        global_lb,
        best_ub,
        incumbent,
        nodes_explored,
        probe_solves,
        lb_trace,
        node_log,
        policy.label(),
        t0,
    )
}
