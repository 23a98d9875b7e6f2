//! Linear relaxations of polynomial programs via monomial substitution.
//!
//! Every monomial of degree at least two is replaced by a fresh LP column,
//! and products of bound factors `(x_j - l_j)` / `(u_j - x_j)` are expanded
//! and linearized into valid inequalities that tie those columns to the
//! original variables. The LP optimum is a valid lower bound over the node
//! box, exact in the limit of singleton boxes.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lp::{LpModel, LpRow, Relation, RowTag, SparseVec};
use crate::poly::{Multiset, POProblem, Polynomial};

#[derive(Debug, Error, PartialEq)]
pub enum RltError {
    #[error("no relaxation column for monomial {0}")]
    MissingColumn(String),
    #[error("bound factor of degree {got} exceeds problem degree {max}")]
    DegreeOverflow { got: u32, max: u32 },
}

/// Box bounds at a branch-and-bound node, alongside the root box.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub root_lower: Vec<f64>,
    pub root_upper: Vec<f64>,
}

impl NodeBounds {
    pub fn root(problem: &POProblem) -> Self {
        NodeBounds {
            lower: problem.lower.clone(),
            upper: problem.upper.clone(),
            root_lower: problem.lower.clone(),
            root_upper: problem.upper.clone(),
        }
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    /// Child with the upper bound of `j` moved down to `point`.
    pub fn child_below(&self, j: usize, point: f64) -> NodeBounds {
        let mut child = self.clone();
        child.upper[j] = point;
        child
    }

    /// Child with the lower bound of `j` moved up to `point`.
    pub fn child_above(&self, j: usize, point: f64) -> NodeBounds {
        let mut child = self.clone();
        child.lower[j] = point;
        child
    }
}

/// Column map for a relaxation: monomial multisets of degree >= 2 receive
/// dedicated LP columns after the original variables; degree-1 multisets map
/// to the variable columns themselves.
#[derive(Debug, Clone)]
pub struct RltIndex {
    num_vars: usize,
    /// The problem's own monomials (degree >= 2), canonically ordered. This
    /// is the set the violation scores in Eq.-style branching rules run over.
    universe: Vec<Multiset>,
    /// Downward closure of the universe (every sub-multiset of degree >= 2),
    /// canonically ordered; one LP column each, in this order.
    closure: Vec<Multiset>,
}

impl RltIndex {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Monomials present in the problem itself, degree >= 2.
    pub fn universe(&self) -> &[Multiset] {
        &self.universe
    }

    /// All multisets carrying a relaxation column (universe plus the
    /// sub-multisets its bound factors expand into).
    pub fn closure(&self) -> &[Multiset] {
        &self.closure
    }

    pub fn num_cols(&self) -> usize {
        self.num_vars + self.closure.len()
    }

    /// LP column of a multiset: identity for degree 1, table lookup above.
    pub fn column_of(&self, ms: &Multiset) -> Result<usize, RltError> {
        match ms.degree() {
            1 => Ok(ms.entries()[0].0 as usize),
            _ => self
                .closure
                .binary_search(ms)
                .map(|i| self.num_vars + i)
                .map_err(|_| RltError::MissingColumn(ms.to_string())),
        }
    }

    /// The multiset behind an LP column of degree >= 2, if any.
    pub fn multiset_of(&self, col: usize) -> Option<&Multiset> {
        col.checked_sub(self.num_vars).and_then(|i| self.closure.get(i))
    }

    /// Reads the relaxation value of a multiset from a full primal vector
    /// (variables followed by relaxation columns).
    pub fn value_of(&self, ms: &Multiset, primal: &[f64]) -> Result<f64, RltError> {
        if ms.is_empty() {
            return Ok(1.0);
        }
        Ok(primal[self.column_of(ms)?])
    }
}

/// Every support multiset of degree >= 2 occurring in the objective or any
/// constraint, in canonical order.
pub fn collect_monomials(problem: &POProblem) -> Vec<Multiset> {
    let mut set = BTreeSet::new();
    for (p, _) in problem.polynomials() {
        for term in p.terms() {
            if term.support.degree() >= 2 {
                set.insert(term.support.clone());
            }
        }
    }
    set.into_iter().collect()
}

fn sub_multisets_deg2(ms: &Multiset, out: &mut BTreeSet<Multiset>) {
    // Odometer over per-variable kept multiplicities.
    let entries = ms.entries();
    let mut keep: Vec<u32> = entries.iter().map(|&(_, m)| m).collect();
    loop {
        let sub = Multiset::from_runs(
            entries
                .iter()
                .zip(&keep)
                .filter(|&(_, &k)| k > 0)
                .map(|(&(v, _), &k)| (v, k))
                .collect(),
        );
        if sub.degree() >= 2 {
            out.insert(sub);
        }
        // next combination, counting down odometer-style
        let mut i = 0;
        loop {
            if i == keep.len() {
                return;
            }
            if keep[i] > 0 {
                keep[i] -= 1;
                break;
            }
            keep[i] = entries[i].1;
            i += 1;
        }
    }
}

/// Builds the column index for a problem: one column per closure multiset.
pub fn build_index(problem: &POProblem) -> RltIndex {
    let universe = collect_monomials(problem);
    let mut closure = BTreeSet::new();
    for ms in &universe {
        sub_multisets_deg2(ms, &mut closure);
    }
    RltIndex {
        num_vars: problem.num_vars,
        universe,
        closure: closure.into_iter().collect(),
    }
}

/// Linearizes a polynomial: degree-1 terms hit variable columns, higher
/// degrees hit relaxation columns, constants accumulate into the offset.
pub fn linearize(poly: &Polynomial, index: &RltIndex) -> Result<(SparseVec, f64), RltError> {
    let mut entries = Vec::with_capacity(poly.terms().len());
    let mut offset = 0.0;
    for term in poly.terms() {
        if term.support.is_empty() {
            offset += term.coefficient;
        } else {
            entries.push((index.column_of(&term.support)?, term.coefficient));
        }
    }
    Ok((SparseVec::new(entries), offset))
}

/// All ordered splits `(J1, J2)` with `J1 union J2 = ms`, deterministic order.
pub fn splits(ms: &Multiset) -> Vec<(Multiset, Multiset)> {
    let entries = ms.entries();
    let mut take: Vec<u32> = vec![0; entries.len()];
    let mut out = Vec::new();
    loop {
        let left = Multiset::from_runs(
            entries
                .iter()
                .zip(&take)
                .filter(|&(_, &k)| k > 0)
                .map(|(&(v, _), &k)| (v, k))
                .collect(),
        );
        let right = Multiset::from_runs(
            entries
                .iter()
                .zip(&take)
                .filter(|(&(_, m), &k)| k < m)
                .map(|(&(v, m), &k)| (v, m - k))
                .collect(),
        );
        out.push((left, right));
        let mut i = 0;
        loop {
            if i == take.len() {
                return out;
            }
            if take[i] < entries[i].1 {
                take[i] += 1;
                break;
            }
            take[i] = 0;
            i += 1;
        }
    }
}

/// Expands `prod_{j in j1} (x_j - l_j) * prod_{j in j2} (u_j - x_j) >= 0`
/// at the node bounds and linearizes it into a `>=` row.
pub fn bound_factor_linearize(
    j1: &Multiset,
    j2: &Multiset,
    bounds: &NodeBounds,
    index: &RltIndex,
    problem_degree: u32,
) -> Result<LpRow, RltError> {
    let degree = j1.degree() + j2.degree();
    if degree > problem_degree {
        return Err(RltError::DegreeOverflow { got: degree, max: problem_degree });
    }
    let mut product = Polynomial::constant(1.0);
    for v in j1.expanded() {
        let factor = Polynomial::var(v).add(&Polynomial::constant(-bounds.lower[v as usize]));
        product = product.mul(&factor);
    }
    for v in j2.expanded() {
        let factor = Polynomial::constant(bounds.upper[v as usize]).add(&Polynomial::var(v).scale(-1.0));
        product = product.mul(&factor);
    }
    let (coeffs, offset) = linearize(&product, index)?;
    let rhs = if offset == 0.0 { 0.0 } else { -offset };
    Ok(LpRow {
        coeffs,
        relation: Relation::Ge,
        rhs,
        tag: RowTag::BoundFactor { left: j1.clone(), right: j2.clone() },
    })
}

/// Builds the node relaxation: linearized objective and constraints plus all
/// bound-factor rows for every split of every closure monomial. Relaxation
/// columns get the interval bounds implied by the node box, which keeps the
/// model free of unbounded columns and makes the relaxation exact once the
/// box collapses to a point.
pub fn build_rlt_lp(problem: &POProblem, bounds: &NodeBounds) -> Result<(LpModel, RltIndex), RltError> {
    let index = build_index(problem);
    let model = build_rlt_lp_with(problem, &index, bounds)?;
    Ok((model, index))
}

/// Same as [`build_rlt_lp`] with a prebuilt index (the index depends only on
/// the problem, not the node).
pub fn build_rlt_lp_with(
    problem: &POProblem,
    index: &RltIndex,
    bounds: &NodeBounds,
) -> Result<LpModel, RltError> {
    let num_cols = index.num_cols();
    let mut col_lower = Vec::with_capacity(num_cols);
    let mut col_upper = Vec::with_capacity(num_cols);
    col_lower.extend_from_slice(&bounds.lower);
    col_upper.extend_from_slice(&bounds.upper);
    for ms in index.closure() {
        // All bounds are nonnegative, so the product interval is just the
        // product of endpoints.
        let mut lo = 1.0;
        let mut hi = 1.0;
        for &(v, m) in ms.entries() {
            lo *= bounds.lower[v as usize].powi(m as i32);
            hi *= bounds.upper[v as usize].powi(m as i32);
        }
        col_lower.push(lo);
        col_upper.push(hi);
    }

    let (objective, obj_offset) = linearize(&problem.objective, index)?;

    let mut rows = Vec::new();
    for (r, (poly, rhs)) in problem.ineq_constraints.iter().enumerate() {
        let (coeffs, offset) = linearize(poly, index)?;
        rows.push(LpRow {
            coeffs,
            relation: Relation::Ge,
            rhs: rhs - offset,
            tag: RowTag::OriginalIneq { constraint: r },
        });
    }
    for (r, (poly, rhs)) in problem.eq_constraints.iter().enumerate() {
        let (coeffs, offset) = linearize(poly, index)?;
        rows.push(LpRow {
            coeffs,
            relation: Relation::Eq,
            rhs: rhs - offset,
            tag: RowTag::OriginalEq { constraint: r },
        });
    }
    let problem_degree = problem.degree();
    for ms in index.closure() {
        for (j1, j2) in splits(ms) {
            rows.push(bound_factor_linearize(&j1, &j2, bounds, index, problem_degree)?);
        }
    }

    Ok(LpModel { num_cols, objective, obj_offset, rows, col_lower, col_upper })
}

/// Violation of the defining identity for variable `j` against base multiset
/// `J`: `| value(J + {j}) - x_j * value(J) |`, read from a full primal vector.
pub fn rlt_violation(
    j: u32,
    base: &Multiset,
    primal: &[f64],
    index: &RltIndex,
) -> Result<f64, RltError> {
    let joined = base.with_one(j);
    let big = index.value_of(&joined, primal)?;
    let small = index.value_of(base, primal)?;
    Ok((big - primal[j as usize] * small).abs())
}
