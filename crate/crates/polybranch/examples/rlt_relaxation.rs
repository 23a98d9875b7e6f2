//! Build the linear relaxation of a bilinear program and inspect its pieces:
//! the monomial columns, the bound-factor rows, and the root bound they
//! produce.
//!
//! ```bash
//! cargo run --example rlt_relaxation
//! ```

use polybranch::bench::parse_problem;
use polybranch::lp::{lp_solve, RowTag};
use polybranch::rlt::{build_rlt_lp, rlt_violation, NodeBounds};

fn main() {
    let problem = parse_problem(
        "vars 2\nbounds 0 1 0 1\nmin: -1 x1*x2\nc1: 1 x1 + 1 x2 <= 1\n",
    )
    .unwrap();

    let bounds = NodeBounds::root(&problem);
    let (model, index) = build_rlt_lp(&problem, &bounds).unwrap();

    println!("monomial columns (after the {} original variables):", index.num_vars());
    for ms in index.closure() {
        println!("  column {} <- {ms}", index.column_of(ms).unwrap());
    }

    println!("\nrows:");
    for row in &model.rows {
        let kind = match &row.tag {
            RowTag::OriginalIneq { constraint } => format!("constraint {}", constraint + 1),
            RowTag::OriginalEq { constraint } => format!("equality {}", constraint + 1),
            RowTag::BoundFactor { left, right } => format!("bound factor ({left}, {right})"),
        };
        println!("  [{kind}] {:?} {} {}", row.coeffs.entries(), row.relation, row.rhs);
    }

    let sol = lp_solve(&model).unwrap();
    println!("\nroot lower bound: {:.6}", sol.objective_value);
    println!("relaxation point: {:?}", sol.primal);

    // How far the relaxation point is from satisfying X12 = x1*x2.
    let violation = rlt_violation(
        0,
        &polybranch::poly::Multiset::singleton(1),
        &sol.primal,
        &index,
    )
    .unwrap();
    println!("identity violation at the root: {violation:.4}");
}
