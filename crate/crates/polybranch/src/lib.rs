//! Spatial branch-and-bound workbench for box-constrained polynomial
//! optimization.
//!
//! The solver relaxes a polynomial program into a linear program by giving
//! every monomial its own column and adding linearized bound-factor products,
//! then closes the gap by branching on continuous variables. Branching
//! decisions come from a portfolio of six violation-weighted scoring rules
//! and three expert policies layered on top of them (per-instance best rule,
//! per-node best rule, per-node best variable via strong branching), and a
//! benchmark harness measures them against each other with solver-comparison
//! metrics and performance profiles.
//!
//! ## Start with the examples
//!
//! Each major capability has one runnable example:
//!
//! ```text
//! examples/
//! ├── build_and_evaluate.rs    # model a problem in code, validate, evaluate
//! ├── lp_duals.rs              # the LP subsolver: primal, duals, certificates
//! ├── rlt_relaxation.rs        # relaxation columns, bound-factor rows, root bound
//! ├── solve_instance.rs        # one full solve with trace and node log
//! ├── branching_rules.rs       # score vectors of the six rules at a node
//! ├── expert_policies.rs       # static/rule/variable experts side by side
//! ├── generate_instances.rs    # reproducible random instances
//! └── benchmark_and_profile.rs # bench a suite, aggregate, emit profiles
//! ```
//!
//! ```bash
//! cargo run --example solve_instance
//! cargo run --example expert_policies
//! ```
//!
//! ## Module map
//!
//! * [`poly`] — multisets, monomials, polynomials, and the problem type.
//! * [`lp`] — deterministic bounded-variable simplex with dual prices.
//! * [`rlt`] — the relaxation builder: monomial columns and bound factors.
//! * [`engine`] — the branch-and-bound driver and the policy interface.
//! * [`rules`] — the six scoring rules, the experts, and their plumbing.
//! * [`bench`] — instance format, generator, harness, metrics, profiles.
//!
//! The `polybranch` binary is a thin front end over [`bench`] and [`rules`];
//! see the README for the subcommands.

pub mod bench;
pub mod engine;
pub mod lp;
pub mod poly;
pub mod rlt;
pub mod rules;

#[cfg(test)]
pub(crate) mod testutil;
