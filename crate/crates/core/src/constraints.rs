//! Linear constraints `c = Σ_j α_j y^(d_j)(x_j)` and constraint sets.
//!
//! Absolute point and derivative constraints are single-term instances;
//! relative constraints equate two terms and carry `c = 0`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error("relative constraint compares y^({order})({location}) with itself")]
    DegenerateRelative { order: usize, location: f64 },
    #[error("constraint has no nonzero terms")]
    Empty,
    #[error("non-finite value in constraint")]
    NonFinite,
}

/// One weighted evaluation `α y^(d)(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintTerm {
    pub weight: f64,
    pub order: usize,
    pub location: f64,
}

impl ConstraintTerm {
    pub fn new(weight: f64, order: usize, location: f64) -> Self {
        Self {
            weight,
            order,
            location,
        }
    }

    fn same_slot(&self, other: &ConstraintTerm) -> bool {
        self.order == other.order && self.location == other.location
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    value: f64,
    terms: Vec<ConstraintTerm>,
}

impl LinearConstraint {
    /// Builds a constraint, merging terms that share `(order, location)` and
    /// dropping zero weights.
    pub fn new(value: f64, terms: Vec<ConstraintTerm>) -> Result<Self, ConstraintError> {
        if !value.is_finite() || terms.iter().any(|t| !t.weight.is_finite() || !t.location.is_finite()) {
            return Err(ConstraintError::NonFinite);
        }
        let mut merged: Vec<ConstraintTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.iter_mut().find(|m| m.same_slot(&t)) {
                Some(m) => m.weight += t.weight,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.weight != 0.0);
        if merged.is_empty() {
            return Err(ConstraintError::Empty);
        }
        Ok(Self {
            value,
            terms: merged,
        })
    }

    /// Builds a constraint exactly as given, without merging or dropping
    /// terms. Use [`ConstraintSet::validate`] to diagnose the result.
    pub fn raw(value: f64, terms: Vec<ConstraintTerm>) -> Self {
        Self { value, terms }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn terms(&self) -> &[ConstraintTerm] {
        &self.terms
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }

    /// True when this is a single unit-weight term.
    pub fn is_simple(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].weight == 1.0
    }

    /// Applies the constraint functional to `f`, where `f(x, d)` returns the
    /// `d`-th derivative at `x`.
    pub fn apply<E>(&self, mut f: impl FnMut(f64, usize) -> Result<f64, E>) -> Result<f64, E> {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.weight * f(t.location, t.order)?;
        }
        Ok(acc)
    }

    /// True when `other` is a nonzero multiple of `self`, value included.
    fn is_multiple_of(&self, other: &LinearConstraint) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        let first = self.terms[0];
        let Some(partner) = other.terms.iter().find(|t| t.same_slot(&first)) else {
            return false;
        };
        let ratio = partner.weight / first.weight;
        if ratio == 0.0 || !ratio.is_finite() {
            return false;
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        self.terms.iter().all(|t| {
            other
                .terms
                .iter()
                .any(|o| o.same_slot(t) && close(o.weight, ratio * t.weight))
        }) && close(other.value, ratio * self.value)
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} =", self.value)?;
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.weight < 0.0 { "-" } else if i == 0 { "" } else { "+" };
            let w = t.weight.abs();
            let coef = if w == 1.0 { String::new() } else { format!("{w}*") };
            let deriv = match t.order {
                0 => "y".to_string(),
                d => format!("y^({d})"),
            };
            write!(f, " {sign}{coef}{deriv}({})", t.location)?;
        }
        Ok(())
    }
}

/// `y(x) = y`.
pub fn point_constraint(x: f64, y: f64) -> LinearConstraint {
    LinearConstraint::raw(y, vec![ConstraintTerm::new(1.0, 0, x)])
}

/// `y^(d)(x) = v`.
pub fn derivative_constraint(x: f64, d: usize, v: f64) -> LinearConstraint {
    LinearConstraint::raw(v, vec![ConstraintTerm::new(1.0, d, x)])
}

/// `y^(di)(xi) = y^(dj)(xj)`, stored as `0 = y^(di)(xi) - y^(dj)(xj)`.
pub fn relative_constraint(
    xi: f64,
    di: usize,
    xj: f64,
    dj: usize,
) -> Result<LinearConstraint, ConstraintError> {
    if xi == xj && di == dj {
        return Err(ConstraintError::DegenerateRelative {
            order: di,
            location: xi,
        });
    }
    Ok(LinearConstraint::raw(
        0.0,
        vec![ConstraintTerm::new(1.0, di, xi), ConstraintTerm::new(-1.0, dj, xj)],
    ))
}

/// A problem found by [`ConstraintSet::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateConstraint { first: usize, second: usize },
    UnmergedTerms { constraint: usize, order: usize, location: f64 },
    ZeroWeight { constraint: usize, term: usize },
    /// All terms cancel, as in a relative constraint of a slot with itself.
    DegenerateRelative { constraint: usize },
    EmptyConstraint { constraint: usize },
    NonFinite { constraint: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateConstraint { first, second } => {
                write!(f, "duplicate constraint: #{second} repeats #{first}")
            }
            Violation::UnmergedTerms {
                constraint,
                order,
                location,
            } => write!(
                f,
                "unmerged terms in constraint #{constraint}: y^({order})({location}) appears more than once"
            ),
            Violation::ZeroWeight { constraint, term } => {
                write!(f, "zero weight on term {term} of constraint #{constraint}")
            }
            Violation::DegenerateRelative { constraint } => {
                write!(f, "degenerate relative constraint #{constraint}: all terms cancel")
            }
            Violation::EmptyConstraint { constraint } => write!(f, "constraint #{constraint} has no terms"),
            Violation::NonFinite { constraint } => write!(f, "constraint #{constraint} has non-finite entries"),
        }
    }
}

/// An ordered list of constraints; the order fixes the support-matrix rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<LinearConstraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<LinearConstraint>) -> Self {
        Self { constraints }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinearConstraint> {
        self.constraints.iter()
    }

    pub fn push(&mut self, c: LinearConstraint) {
        self.constraints.push(c);
    }

    pub fn max_order(&self) -> usize {
        self.constraints.iter().map(LinearConstraint::max_order).max().unwrap_or(0)
    }

    /// Checks every set invariant. Contradictory constraints (same terms,
    /// incompatible values) are not reported here; they show up as a
    /// singular support matrix.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for (ci, c) in self.constraints.iter().enumerate() {
            if c.terms.is_empty() {
                out.push(Violation::EmptyConstraint { constraint: ci });
                continue;
            }
            if !c.value.is_finite() || c.terms.iter().any(|t| !t.weight.is_finite() || !t.location.is_finite()) {
                out.push(Violation::NonFinite { constraint: ci });
                continue;
            }
            for (ti, t) in c.terms.iter().enumerate() {
                if t.weight == 0.0 {
                    out.push(Violation::ZeroWeight {
                        constraint: ci,
                        term: ti,
                    });
                }
            }
            let mut cancels = false;
            for (ti, t) in c.terms.iter().enumerate() {
                if c.terms[..ti].iter().any(|p| p.same_slot(t)) {
                    continue;
                }
                let same: Vec<_> = c.terms.iter().filter(|o| o.same_slot(t)).collect();
                if same.len() > 1 {
                    out.push(Violation::UnmergedTerms {
                        constraint: ci,
                        order: t.order,
                        location: t.location,
                    });
                }
            }
            if c.terms.len() > 1 {
                let merged = LinearConstraint::new(c.value, c.terms.clone());
                cancels = matches!(merged, Err(ConstraintError::Empty));
            }
            if cancels {
                out.push(Violation::DegenerateRelative { constraint: ci });
            }
        }
        for i in 0..self.constraints.len() {
            for j in i + 1..self.constraints.len() {
                let (a, b) = (&self.constraints[i], &self.constraints[j]);
                if a.terms.is_empty() || b.terms.is_empty() {
                    continue;
                }
                if a.is_multiple_of(b) {
                    out.push(Violation::DuplicateConstraint { first: i, second: j });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

impl FromIterator<LinearConstraint> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = LinearConstraint>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a LinearConstraint;
    type IntoIter = std::slice::Iter<'a, LinearConstraint>;
    fn into_iter(self) -> Self::IntoIter {
        self.constraints.iter()
    }
}
