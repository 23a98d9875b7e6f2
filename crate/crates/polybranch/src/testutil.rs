//! Shared fixtures for unit tests.

use crate::poly::{Monomial, Multiset, POProblem, Polynomial};

pub(crate) fn poly_terms(terms: &[(f64, &[u32])]) -> Polynomial {
    Polynomial::new(
        terms.iter().map(|&(c, s)| Monomial::new(c, Multiset::from_indices(s))).collect(),
    )
}

/// `min x1*x2  s.t.  x1 + x2 >= 1,  x in [0,1]^2`; optimum 0, solved at the root.
pub(crate) fn p1() -> POProblem {
    POProblem {
        num_vars: 2,
        objective: poly_terms(&[(1.0, &[0, 1])]),
        ineq_constraints: vec![(poly_terms(&[(1.0, &[0]), (1.0, &[1])]), 1.0)],
        eq_constraints: vec![],
        lower: vec![0.0; 2],
        upper: vec![1.0; 2],
        name: "p1".into(),
    }
}

/// `min -x1*x2  s.t.  x1 + x2 <= 1,  x in [0,1]^2`; optimum -0.25 at (0.5, 0.5),
/// root relaxation -0.5.
pub(crate) fn p2() -> POProblem {
    POProblem {
        num_vars: 2,
        objective: poly_terms(&[(-1.0, &[0, 1])]),
        ineq_constraints: vec![(poly_terms(&[(-1.0, &[0]), (-1.0, &[1])]), -1.0)],
        eq_constraints: vec![],
        lower: vec![0.0; 2],
        upper: vec![1.0; 2],
        name: "p2".into(),
    }
}
