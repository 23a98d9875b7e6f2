//! Construct a polynomial program in code, validate it, and evaluate points.
//!
//! ```bash
//! cargo run --example build_and_evaluate
//! ```

use polybranch::poly::{Monomial, Multiset, POProblem, Polynomial};

fn main() {
    // minimize -x1*x2 + x2^2  subject to  x1 + x2 <= 1  on [0,1]^2,
    // stored internally as -x1 - x2 >= -1.
    let objective = Polynomial::new(vec![
        Monomial::new(-1.0, Multiset::from_indices(&[0, 1])),
        Monomial::new(1.0, Multiset::from_indices(&[1, 1])),
    ]);
    let budget = Polynomial::new(vec![
        Monomial::new(-1.0, Multiset::from_indices(&[0])),
        Monomial::new(-1.0, Multiset::from_indices(&[1])),
    ]);
    let problem = POProblem {
        num_vars: 2,
        objective,
        ineq_constraints: vec![(budget, -1.0)],
        eq_constraints: vec![],
        lower: vec![0.0, 0.0],
        upper: vec![1.0, 1.0],
        name: "toy".into(),
    };

    let report = problem.validate();
    println!("validation: {report}");
    println!("degree: {}", problem.degree());

    for point in [[0.5, 0.5], [1.0, 0.0], [0.8, 0.4]] {
        let value = problem.objective.eval(&point).unwrap();
        let feasible = problem.point_feasible(&point, 1e-6).unwrap();
        println!("f({point:?}) = {value:+.4}   feasible: {feasible}");
    }

    // Bound inversion is reported, not panicked on.
    let mut broken = problem.clone();
    broken.lower[1] = 2.0;
    println!("broken copy: {}", broken.validate());
}
