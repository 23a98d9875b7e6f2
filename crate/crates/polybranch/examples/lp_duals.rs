//! Solve a small LP, inspect the dual prices, and verify the certificate.
//!
//! ```bash
//! cargo run --example lp_duals
//! ```

use polybranch::lp::{check_certificates, lp_solve, LpModel, LpRow, Relation, RowTag, SparseVec};

fn main() {
    // min -X  s.t.  X <= x1, X <= x2, x1 + x2 <= 1, X >= x1 + x2 - 1,
    // all columns in [0, 1]: the envelope of the product x1*x2.
    let model = LpModel {
        num_cols: 3,
        objective: SparseVec::new(vec![(2, -1.0)]),
        obj_offset: 0.0,
        rows: vec![
            LpRow {
                coeffs: SparseVec::new(vec![(0, 1.0), (2, -1.0)]),
                relation: Relation::Ge,
                rhs: 0.0,
                tag: RowTag::OriginalIneq { constraint: 0 },
            },
            LpRow {
                coeffs: SparseVec::new(vec![(1, 1.0), (2, -1.0)]),
                relation: Relation::Ge,
                rhs: 0.0,
                tag: RowTag::OriginalIneq { constraint: 1 },
            },
            LpRow {
                coeffs: SparseVec::new(vec![(0, 1.0), (1, 1.0)]),
                relation: Relation::Le,
                rhs: 1.0,
                tag: RowTag::OriginalIneq { constraint: 2 },
            },
            LpRow {
                coeffs: SparseVec::new(vec![(2, 1.0), (0, -1.0), (1, -1.0)]),
                relation: Relation::Ge,
                rhs: -1.0,
                tag: RowTag::OriginalIneq { constraint: 3 },
            },
        ],
        col_lower: vec![0.0; 3],
        col_upper: vec![1.0; 3],
    };

    let sol = lp_solve(&model).unwrap();
    println!("status    {:?}", sol.status);
    println!("objective {:.6}", sol.objective_value);
    println!("primal    {:?}", sol.primal);
    for (i, (row, dual)) in model.rows.iter().zip(&sol.duals).enumerate() {
        let activity = row.coeffs.dot(&sol.primal);
        println!(
            "row {i}: activity {activity:+.4} {} {:+.1}   dual {dual:+.6}",
            row.relation, row.rhs
        );
    }

    let report = check_certificates(&model, &sol);
    println!("certificates ok: {}", report.is_ok());

    println!("--- model dump ---\n{}", model.dump());
}
