//! Solve one instance end to end with a fixed branching rule and walk the
//! solve trace.
//!
//! ```bash
//! cargo run --example solve_instance
//! ```

use polybranch::bench::{parse_problem, write_trace};
use polybranch::engine::EngineConfig;
use polybranch::rules::{solve_with_rule, RuleId};

fn main() {
    let problem = parse_problem(
        "vars 3\n\
         bounds 0 1 0 1 0 1\n\
         min: -4 x1*x2 + 3 x2*x3 - 2 x1*x3 - 1 x2 + 5 x2^2 - 3 x3^2 + 2 x1^2\n\
         c1: 1 x1 + 1 x2 + 1 x3 >= 0.75\n",
    )
    .unwrap();

    let cfg = EngineConfig::default();
    let result = solve_with_rule(&problem, &cfg, RuleId::RangeRel);

    println!("status      {}", result.status.as_str());
    println!("bounds      [{:.6}, {:.6}]", result.best_lb, result.best_ub);
    println!("nodes       {}", result.nodes_explored);
    println!("wall time   {:.3}s", result.wall_time);
    if let Some(x) = &result.incumbent {
        println!("incumbent   {x:?}");
    }

    println!("\nlower-bound trajectory:");
    for (t, lb) in &result.lb_trace {
        println!("  t={t:.4}s  lb={lb:.6}");
    }

    println!("\nbranchings:");
    for d in &result.node_log {
        println!(
            "  node {:>3} split x{} at {:.4}: parent lb {:+.5} -> children ({:+.5}, {:+.5}), kpi {:.5}",
            d.node_id,
            d.variable + 1,
            d.branch_point,
            d.parent_lb,
            d.child_lbs.0,
            d.child_lbs.1,
            d.kpi_observed,
        );
    }

    println!("\ntrace file contents:\n{}", write_trace(&result));
}
