//! A miniature benchmark campaign in memory: generate a suite, run a set of
//! approaches, aggregate the metric table, and emit performance profiles.
//!
//! ```bash
//! cargo run --example benchmark_and_profile
//! ```

use polybranch::bench::{
    aggregate, gen_instance, parse_approaches, profile_report, run_bench, write_report,
    BenchOptions, GenParams, ProfileMetric,
};
use polybranch::engine::EngineConfig;

fn main() {
    let instances: Vec<_> = (0..6)
        .map(|seed| {
            let problem = gen_instance(&GenParams {
                num_vars: 4 + (seed % 2) as usize,
                degree: 2,
                density: 0.9,
                seed: 600 + seed,
            })
            .unwrap();
            (problem.name.clone(), problem)
        })
        .collect();

    let approaches = parse_approaches("range_rel,eigen,orule_s,bvar_d_opt:0").unwrap();
    let opts = BenchOptions {
        engine: EngineConfig {
            deterministic: true, // node counts replace wall time: reproducible output
            time_limit: None,
            node_limit: Some(500),
            ..EngineConfig::default()
        },
        jobs: 2,
    };

    let outcome = run_bench(&instances, &approaches, &opts).unwrap();
    println!("--- report ---\n{}", write_report(&outcome.rows).unwrap());

    let table = aggregate(&outcome.rows).unwrap();
    println!("--- metric table ---\n{table}\n");

    println!("--- pace profile (tau, rho per approach) ---");
    for curve in profile_report(&outcome.rows, ProfileMetric::Pace) {
        let points: Vec<String> =
            curve.points.iter().map(|(t, r)| format!("({t:.2}, {r:.2})")).collect();
        println!("{:<14} {}", curve.approach, points.join(" "));
    }
}
