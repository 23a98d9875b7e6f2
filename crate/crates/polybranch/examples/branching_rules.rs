//! Score every variable under each of the six branching rules at the root of
//! a generated instance.
//!
//! A variable's score sums, over the problem monomials containing it, the
//! violation of the defining identity `X_M = x_j * X_{M\j}` at the relaxation
//! point, weighted per rule: dual prices of the rows touching the monomial,
//! the variable's remaining range, or its eigencentrality in the variable
//! co-occurrence graph, each optionally damped by the reliability multiplier.
//!
//! ```bash
//! cargo run --example branching_rules
//! ```

use polybranch::bench::{gen_instance, GenParams};
use polybranch::engine::BBNode;
use polybranch::lp::lp_solve;
use polybranch::rlt::{build_index, build_rlt_lp_with, NodeBounds};
use polybranch::rules::{eigencentrality, rule_score, select_variable, PseudoStats, RuleId};

fn main() {
    let problem = gen_instance(&GenParams {
        num_vars: 4,
        degree: 2,
        density: 0.9,
        seed: 2024,
    })
    .unwrap();
    println!("instance: {}", problem.name);

    let index = build_index(&problem);
    let bounds = NodeBounds::root(&problem);
    let model = build_rlt_lp_with(&problem, &index, &bounds).unwrap();
    let sol = lp_solve(&model).unwrap();
    let mut primal = sol.primal.clone();
    primal.resize(model.num_cols, 0.0);
    println!("root bound: {:.6}", sol.objective_value);

    let node = BBNode {
        id: 0,
        parent_id: None,
        bounds,
        lb: sol.objective_value,
        depth: 0,
        primal: Some(primal),
        duals: sol.duals.clone(),
    };

    let centrality = eigencentrality(&problem);
    println!("eigencentrality: {centrality:.4?}");

    let stats = PseudoStats::new(problem.num_vars);
    println!("\n{:<10}  scores (x1..x{})          pick", "rule", problem.num_vars);
    for rule in RuleId::ALL {
        let scores = rule_score(rule, &node, &model, &index, &stats, &centrality);
        let pick = select_variable(&scores)
            .map(|j| format!("x{}", j + 1))
            .unwrap_or_else(|_| "-".into());
        let pretty: Vec<String> = scores.0.iter().map(|s| format!("{s:.4}")).collect();
        println!("{:<10}  [{}]  {pick}", rule.label(), pretty.join(", "));
    }
}
