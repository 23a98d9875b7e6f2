//! Random instance generation.
//!
//! All randomness sits in the objective: every multiset of degree up to the
//! requested degree enters with the configured density, with an integer
//! coefficient drawn from {-10..-1, 1..10}. One fixed inequality
//! `sum x_j >= n/4` keeps the feasible region nontrivial inside the unit box.
//! The same seed always yields the same instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::poly::{Monomial, Multiset, POProblem, Polynomial};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("need at least 2 variables, got {0}")]
    TooFewVars(usize),
    #[error("need degree at least 2, got {0}")]
    DegreeTooLow(u32),
    #[error("density must be in (0, 1], got {0}")]
    BadDensity(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub num_vars: usize,
    pub degree: u32,
    pub density: f64,
    pub seed: u64,
}

/// All multisets over `0..n` with degree in `1..=degree`, canonical order.
fn all_multisets(n: usize, degree: u32) -> Vec<Multiset> {
    let mut out: Vec<Multiset> = Vec::new();
    let mut stack: Vec<(Vec<u32>, u32)> = vec![(Vec::new(), 0)];
    while let Some((prefix, start)) = stack.pop() {
        for v in (start..n as u32).rev() {
            let mut next = prefix.clone();
            next.push(v);
            if (next.len() as u32) < degree {
                stack.push((next.clone(), v));
            }
            out.push(Multiset::from_indices(&next));
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn gen_instance(params: &GenParams) -> Result<POProblem, GenError> {
    if params.num_vars < 2 {
        return Err(GenError::TooFewVars(params.num_vars));
    }
    if params.degree < 2 {
        return Err(GenError::DegreeTooLow(params.degree));
    }
    if !(params.density > 0.0 && params.density <= 1.0) {
        return Err(GenError::BadDensity(params.density));
    }

    let n = params.num_vars;
    let candidates = all_multisets(n, params.degree);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // Regenerate until the objective is nonempty (relevant only at extreme
    // densities; the RNG stream keeps advancing so this terminates).
    let mut terms: Vec<Monomial> = Vec::new();
    while terms.is_empty() {
        for ms in &candidates {
            if rng.random::<f64>() < params.density {
                let k: i32 = rng.random_range(0..20);
                let coef = if k < 10 { (k - 10) as f64 } else { (k - 9) as f64 };
                terms.push(Monomial::new(coef, ms.clone()));
            }
        }
    }

    let constraint = Polynomial::new(
        (0..n as u32).map(|j| Monomial::new(1.0, Multiset::singleton(j))).collect(),
    );
    Ok(POProblem {
        num_vars: n,
        objective: Polynomial::new(terms),
        ineq_constraints: vec![(constraint, n as f64 / 4.0)],
        eq_constraints: vec![],
        lower: vec![0.0; n],
        upper: vec![1.0; n],
        name: format!(
            "rand_v{}_d{}_p{}_s{}",
            params.num_vars, params.degree, params.density, params.seed
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::format::write_problem;

    #[test]
    fn same_seed_same_bytes() {
        let params = GenParams { num_vars: 4, degree: 3, density: 0.4, seed: 11 };
        let a = gen_instance(&params).unwrap();
        let b = gen_instance(&params).unwrap();
        assert_eq!(write_problem(&a), write_problem(&b));
        assert!(a.validate().is_valid());
    }

    #[test]
    fn density_one_includes_every_support() {
        let params = GenParams { num_vars: 2, degree: 2, density: 1.0, seed: 3 };
        let p = gen_instance(&params).unwrap();
        // {1}, {2}, {1,1}, {1,2}, {2,2}
        assert_eq!(p.objective.terms().len(), 5);
        let supports: Vec<_> = p.objective.terms().iter().map(|t| t.support.clone()).collect();
        assert!(supports.contains(&Multiset::from_indices(&[0, 1])));
        assert!(supports.contains(&Multiset::from_indices(&[1, 1])));
    }

    #[test]
    fn tiny_density_retries_until_nonempty() {
        let params = GenParams { num_vars: 6, degree: 2, density: 1e-5, seed: 0 };
        let p = gen_instance(&params).unwrap();
        assert!(!p.objective.terms().is_empty());
    }

    #[test]
    fn degenerate_parameters_rejected() {
        assert_eq!(
            gen_instance(&GenParams { num_vars: 1, degree: 2, density: 0.5, seed: 0 }),
            Err(GenError::TooFewVars(1))
        );
        assert_eq!(
            gen_instance(&GenParams { num_vars: 3, degree: 1, density: 0.5, seed: 0 }),
            Err(GenError::DegreeTooLow(1))
        );
        assert_eq!(
            gen_instance(&GenParams { num_vars: 3, degree: 2, density: 0.0, seed: 0 }),
            Err(GenError::BadDensity(0.0))
        );
    }

    #[test]
    fn coefficients_stay_in_range() {
        let params = GenParams { num_vars: 5, degree: 3, density: 0.8, seed: 99 };
        let p = gen_instance(&params).unwrap();
        for t in p.objective.terms() {
            let c = t.coefficient;
            assert!((-10.0..=10.0).contains(&c) && c != 0.0 && c == c.trunc());
        }
    }
}
