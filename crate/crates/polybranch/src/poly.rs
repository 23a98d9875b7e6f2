//! Multisets, monomials, polynomials and box-constrained polynomial programs.
//!
//! Everything here is plain data: immutable after construction, cheap to
//! clone, safe to share across threads. A polynomial program minimizes a
//! polynomial objective subject to polynomial inequality (`>=`) and equality
//! constraints over a finite box `l <= x <= u`.

use std::fmt;

use thiserror::Error;

/// Default absolute feasibility tolerance for constraint checks.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: point has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Multiset of variable indices, stored as sorted `(index, multiplicity)` runs.
///
/// The derived `Ord` is lexicographic on the runs, which is the canonical
/// ordering used everywhere a deterministic multiset order is needed
/// (relaxation column numbering, monomial collection, instance generation).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    entries: Vec<(u32, u32)>,
}

impl Multiset {
    pub fn empty() -> Self {
        Multiset { entries: Vec::new() }
    }

    pub fn singleton(var: u32) -> Self {
        Multiset { entries: vec![(var, 1)] }
    }

    /// Builds a multiset from an arbitrary list of variable indices.
    pub fn from_indices(indices: &[u32]) -> Self {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let mut entries: Vec<(u32, u32)> = Vec::new();
        for idx in sorted {
            match entries.last_mut() {
                Some((v, m)) if *v == idx => *m += 1,
                _ => entries.push((idx, 1)),
            }
        }
        Multiset { entries }
    }

    /// Builds from `(index, multiplicity)` runs; indices must be strictly
    /// increasing and multiplicities positive.
    pub fn from_runs(entries: Vec<(u32, u32)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, m)| m >= 1));
        Multiset { entries }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total degree: the sum of all multiplicities.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    pub fn multiplicity(&self, var: u32) -> u32 {
        self.entries
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn contains(&self, var: u32) -> bool {
        self.multiplicity(var) > 0
    }

    /// Distinct variable indices, ascending.
    pub fn distinct_vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(v, _)| v)
    }

    /// Indices repeated by multiplicity, ascending.
    pub fn expanded(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize))
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|&(v, _)| v)
    }

    /// Multiset union: multiplicities add, degrees add.
    pub fn union(&self, other: &Multiset) -> Multiset {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(va, ma)), Some(&&(vb, mb))) => {
                    if va < vb {
                        entries.push((va, ma));
                        a.next();
                    } else if vb < va {
                        entries.push((vb, mb));
                        b.next();
                    } else {
                        entries.push((va, ma + mb));
                        a.next();
                        b.next();
                    }
                }
                (Some(&&e), None) => {
                    entries.push(e);
                    a.next();
                }
                (None, Some(&&e)) => {
                    entries.push(e);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Multiset { entries }
    }

    /// Adds one copy of `var`.
    pub fn with_one(&self, var: u32) -> Multiset {
        self.union(&Multiset::singleton(var))
    }

    /// Removes one copy of `var`, or `None` if absent.
    pub fn without_one(&self, var: u32) -> Option<Multiset> {
        let pos = self.entries.binary_search_by_key(&var, |&(v, _)| v).ok()?;
        let mut entries = self.entries.clone();
        if entries[pos].1 > 1 {
            entries[pos].1 -= 1;
        } else {
            entries.remove(pos);
        }
        Some(Multiset { entries })
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.expanded().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// One term of a polynomial: `coefficient * prod_{j in support} x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub support: Multiset,
}

impl Monomial {
    pub fn new(coefficient: f64, support: Multiset) -> Self {
        Monomial { coefficient, support }
    }

    pub fn constant(c: f64) -> Self {
        Monomial { coefficient: c, support: Multiset::empty() }
    }

    pub fn degree(&self) -> u32 {
        self.support.degree()
    }

    /// Evaluates `coefficient * prod x_j` (with multiplicity) at `x`.
    ///
    /// `x` must cover every variable index in the support; the caller states
    /// the problem dimension explicitly so the empty support still checks it.
    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        if let Some(max) = self.support.max_index() {
            if max as usize >= x.len() {
                return Err(PolyError::DimensionMismatch {
                    expected: max as usize + 1,
                    got: x.len(),
                });
            }
        }
        let mut value = self.coefficient;
        for &(v, m) in self.support.entries() {
            value *= x[v as usize].powi(m as i32);
        }
        Ok(value)
    }
}

/// Sparse polynomial in canonical form: terms sorted by support, supports
/// unique, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![Monomial::constant(c)])
    }

    pub fn var(j: u32) -> Self {
        Polynomial::new(vec![Monomial::new(1.0, Multiset::singleton(j))])
    }

    /// Canonicalizes: sorts by support, merges equal supports by coefficient
    /// addition, drops zero coefficients.
    pub fn new(mut terms: Vec<Monomial>) -> Self {
        terms.sort_by(|a, b| a.support.cmp(&b.support));
        let mut merged: Vec<Monomial> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.support == t.support => last.coefficient += t.coefficient,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        Polynomial { terms: merged }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree()).max().unwrap_or(0)
    }

    pub fn max_var_index(&self) -> Option<u32> {
        self.terms.iter().filter_map(|t| t.support.max_index()).max()
    }

    /// Sum of term evaluations.
    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        let mut sum = 0.0;
        for t in &self.terms {
            sum += t.eval(x)?;
        }
        Ok(sum)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial::new(terms)
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::new(
            self.terms
                .iter()
                .map(|t| Monomial::new(t.coefficient * c, t.support.clone()))
                .collect(),
        )
    }

    /// Term-by-term product; used to expand bound-factor products.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Monomial::new(
                    a.coefficient * b.coefficient,
                    a.support.union(&b.support),
                ));
            }
        }
        Polynomial::new(terms)
    }
}

/// Relation of a polynomial constraint to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `phi(x) >= rhs`
    Inequality,
    /// `phi(x) = rhs`
    Equality,
}

/// A box-constrained polynomial program:
/// minimize `objective(x)` subject to `ineq_constraints[r].0(x) >= rhs`,
/// `eq_constraints[r].0(x) = rhs`, and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct POProblem {
    pub num_vars: usize,
    pub objective: Polynomial,
    pub ineq_constraints: Vec<(Polynomial, f64)>,
    pub eq_constraints: Vec<(Polynomial, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub name: String,
}

/// One invariant violation found by [`POProblem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    BoundInversion { var: usize },
    NegativeLowerBound { var: usize },
    NonFiniteBound { var: usize },
    IndexOutOfRange { source: String, index: u32 },
    NonFiniteCoefficient { source: String },
    NonFiniteRhs { source: String },
    BoundVectorLength { which: &'static str, got: usize },
    DegreeZero,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::BoundInversion { var } => {
                write!(f, "bound inversion at variable {var}")
            }
            ValidationIssue::NegativeLowerBound { var } => {
                write!(f, "negative lower bound at variable {var}")
            }
            ValidationIssue::NonFiniteBound { var } => {
                write!(f, "non-finite bound at variable {var}")
            }
            ValidationIssue::IndexOutOfRange { source, index } => {
                write!(f, "variable index {index} out of range in {source}")
            }
            ValidationIssue::NonFiniteCoefficient { source } => {
                write!(f, "non-finite coefficient in {source}")
            }
            ValidationIssue::NonFiniteRhs { source } => {
                write!(f, "non-finite right-hand side in {source}")
            }
            ValidationIssue::BoundVectorLength { which, got } => {
                write!(f, "{which} bound vector has {got} entries")
            }
            ValidationIssue::DegreeZero => write!(f, "problem degree is zero"),
        }
    }
}

/// Result of validating a [`POProblem`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            write!(f, "valid")
        } else {
            for (i, issue) in self.issues.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

impl POProblem {
    /// Problem degree: max degree over objective and constraints.
    pub fn degree(&self) -> u32 {
        self.polynomials().map(|(p, _)| p.degree()).max().unwrap_or(0)
    }

    /// Objective first, then inequalities, then equalities, with a label for
    /// diagnostics.
    pub fn polynomials(&self) -> impl Iterator<Item = (&Polynomial, String)> {
        std::iter::once((&self.objective, "objective".to_string()))
            .chain(
                self.ineq_constraints
                    .iter()
                    .enumerate()
                    .map(|(r, (p, _))| (p, format!("inequality {}", r + 1))),
            )
            .chain(
                self.eq_constraints
                    .iter()
                    .enumerate()
                    .map(|(r, (p, _))| (p, format!("equality {}", r + 1))),
            )
    }

    /// Checks every structural invariant and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.lower.len() != self.num_vars {
            issues.push(ValidationIssue::BoundVectorLength { which: "lower", got: self.lower.len() });
        }
        if self.upper.len() != self.num_vars {
            issues.push(ValidationIssue::BoundVectorLength { which: "upper", got: self.upper.len() });
        }
        for j in 0..self.lower.len().min(self.upper.len()).min(self.num_vars) {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !l.is_finite() || !u.is_finite() {
                issues.push(ValidationIssue::NonFiniteBound { var: j });
                continue;
            }
            if l < 0.0 {
                issues.push(ValidationIssue::NegativeLowerBound { var: j });
            }
            if l > u {
                issues.push(ValidationIssue::BoundInversion { var: j });
            }
        }
        for (p, source) in self.polynomials() {
            if let Some(max) = p.max_var_index() {
                if max as usize >= self.num_vars {
                    issues.push(ValidationIssue::IndexOutOfRange { source: source.clone(), index: max });
                }
            }
            if p.terms().iter().any(|t| !t.coefficient.is_finite()) {
                issues.push(ValidationIssue::NonFiniteCoefficient { source: source.clone() });
            }
        }
        for (r, (_, rhs)) in self.ineq_constraints.iter().enumerate() {
            if !rhs.is_finite() {
                issues.push(ValidationIssue::NonFiniteRhs { source: format!("inequality {}", r + 1) });
            }
        }
        for (r, (_, rhs)) in self.eq_constraints.iter().enumerate() {
            if !rhs.is_finite() {
                issues.push(ValidationIssue::NonFiniteRhs { source: format!("equality {}", r + 1) });
            }
        }
        if self.degree() == 0 {
            issues.push(ValidationIssue::DegreeZero);
        }
        ValidationReport { issues }
    }

    /// True iff `x` is inside the box and satisfies every constraint within
    /// an absolute tolerance.
    pub fn point_feasible(&self, x: &[f64], tol: f64) -> Result<bool, PolyError> {
        if x.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch { expected: self.num_vars, got: x.len() });
        }
        for j in 0..self.num_vars {
            if x[j] < self.lower[j] - tol || x[j] > self.upper[j] + tol {
                return Ok(false);
            }
        }
        for (p, rhs) in &self.ineq_constraints {
            if p.eval(x)? < rhs - tol {
                return Ok(false);
            }
        }
        for (p, rhs) in &self.eq_constraints {
            if (p.eval(x)? - rhs).abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
