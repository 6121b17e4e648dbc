//! General constrained-expression machinery.
//!
//! Given `n` linear constraints and `n` support functions, row `k` of the
//! support matrix applies constraint functional `k` to the row `h(x)`:
//!
//! ```text
//! H[k, :] = Σ_j α_kj · h^(d_kj)(x_kj)
//! ```
//!
//! With `Ξ = H⁻¹` the coefficient functions are `β(x)ᵀ = h(x)ᵀ Ξ` and
//!
//! ```text
//! y(x) = g(x) + Σ_k β_k(x) · (c_k − Σ_j α_kj g^(d_kj)(x_kj))
//! ```
//!
//! satisfies every constraint for any admissible `g`.

use crate::basis::{BasisError, BasisFamily, BasisMember};
use crate::constraints::{ConstraintSet, Violation};
use crate::freefn::{EvalError, FreeFunction};
use crate::linalg::{self, Lu, Matrix};

/// Below this the solve is refused.
pub const RCOND_ERROR: f64 = 1e-12;
/// Below this the solve succeeds but reports are flagged as ill-conditioned.
pub const RCOND_WARNING: f64 = 1e-10;
/// Residual tolerance relative to [`ConstrainedExpression::residual_scales`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("{constraints} constraints but {basis} basis members; the support matrix must be square")]
    DimensionMismatch { constraints: usize, basis: usize },
    #[error("empty constraint set")]
    NoConstraints,
    #[error("invalid constraint set: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidConstraints(Vec<Violation>),
    #[error("basis member {member} is undefined at constraint location x = {x}")]
    BasisUndefinedAtConstraint { member: usize, x: f64 },
    #[error("singular support matrix: rank {rank} of {n}, rcond {rcond:.3e}. {hint}")]
    SingularSupport {
        rank: usize,
        n: usize,
        rcond: f64,
        hint: String,
    },
    #[error("free function undefined at x = {x} for derivative order {order}: {source}")]
    FreeFunctionUndefined {
        x: f64,
        order: usize,
        source: EvalError,
    },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// The `n × n` matrix whose row `k` is constraint functional `k` applied to
/// the support-function row vector.
#[derive(Debug, Clone)]
pub struct SupportMatrix {
    entries: Matrix,
    rank: usize,
    rcond: f64,
    lu: Option<Lu>,
}

impl SupportMatrix {
    /// Wraps an arbitrary square matrix, computing rank and rcond.
    pub fn from_matrix(entries: Matrix) -> Self {
        assert!(entries.is_square(), "support matrix must be square");
        let rank = entries.rank();
        let lu = if rank == entries.rows() {
            Lu::factor(&entries).ok()
        } else {
            None
        };
        let rcond = lu
            .as_ref()
            .map_or(0.0, |lu| linalg::rcond(&entries, &lu.inverse()));
        Self {
            entries,
            rank,
            rcond,
            lu,
        }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.rcond < RCOND_WARNING
    }
}

/// `Ξ = H⁻¹`; column `k` holds the coefficients `ξ_k` of `β_k` over the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    xi: Matrix,
}

impl CoefficientMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.xi
    }

    /// Coefficient vector of `β_k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.xi.column(k)
    }

    pub fn n(&self) -> usize {
        self.xi.cols()
    }

    #[doc(hidden)]
    /// Wraps an arbitrary matrix. Only meant for negative-control tests.
    pub fn from_matrix_unchecked(xi: Matrix) -> Self {
        Self { xi }
    }
}

/// Assembles the support matrix for `set` over `basis`. No inversion is
/// attempted; rank and rcond are reported for diagnosis.
pub fn assemble_support_matrix(
    set: &ConstraintSet,
    basis: &BasisFamily,
) -> Result<SupportMatrix, EngineError> {
    let n = set.len();
    if n == 0 {
        return Err(EngineError::NoConstraints);
    }
    if basis.len() != n {
        return Err(EngineError::DimensionMismatch {
            constraints: n,
            basis: basis.len(),
        });
    }
    let mut h = Matrix::zeros(n, n);
    for (k, c) in set.iter().enumerate() {
        for t in c.terms() {
            let row = basis.eval_row(t.location, t.order).map_err(|e| match e {
                BasisError::UndefinedAt { member, x, .. } => {
                    EngineError::BasisUndefinedAtConstraint { member, x }
                }
                other => EngineError::Basis(other),
            })?;
            for (i, v) in row.into_iter().enumerate() {
                h[(k, i)] += t.weight * v;
            }
        }
    }
    Ok(SupportMatrix::from_matrix(h))
}

/// Inverts the support matrix, refusing rank-deficient or numerically
/// singular input.
pub fn solve_coefficients(sm: &SupportMatrix) -> Result<CoefficientMatrix, EngineError> {
    match &sm.lu {
        Some(lu) if sm.rank == sm.n() && sm.rcond >= RCOND_ERROR => Ok(CoefficientMatrix { xi: lu.inverse() }),
        _ => Err(EngineError::SingularSupport {
            rank: sm.rank,
            n: sm.n(),
            rcond: sm.rcond,
            hint: singular_hint(None),
        }),
    }
}

fn singular_hint(remedy: Option<&BasisFamily>) -> String {
    let base = "raise the monomial degrees so every member has a nonzero derivative at the \
                constrained orders, or switch to smooth non-polynomial members (exp, sin, cos, ln)";
    match remedy {
        Some(b) => format!("{base}; for example basis {{{}}}", b.descriptors().join(", ")),
        None => base.to_string(),
    }
}

/// For an all-monomial basis that failed, proposes `{1, x^d, x^(d+1), ...}`
/// with `d` the highest constrained derivative order, when that family
/// yields a well-conditioned solve.
pub fn suggest_remedy(set: &ConstraintSet, basis: &BasisFamily) -> Option<BasisFamily> {
    if !basis.members().iter().all(|m| matches!(m, BasisMember::Monomial(_))) {
        return None;
    }
    let n = set.len();
    let d = set.max_order() as u32;
    if n == 0 || d == 0 {
        return None;
    }
    let candidate = BasisFamily::from_powers(std::iter::once(0).chain(d..d + n as u32 - 1));
    let sm = assemble_support_matrix(set, &candidate).ok()?;
    solve_coefficients(&sm).ok().map(|_| candidate)
}

/// A function satisfying every constraint of its set for the stored `g`.
#[derive(Debug, Clone)]
pub struct ConstrainedExpression {
    basis: BasisFamily,
    support: SupportMatrix,
    coefficients: CoefficientMatrix,
    constraints: ConstraintSet,
    free: FreeFunction,
    shifts: Vec<f64>,
}

impl ConstrainedExpression {
    /// Validates the constraints, solves for `Ξ` and caches the shifts
    /// `c_k − α_kᵀ g^(d_k)(x_k)`.
    pub fn build(
        set: ConstraintSet,
        basis: BasisFamily,
        free: FreeFunction,
    ) -> Result<Self, EngineError> {
        set.validate().map_err(EngineError::InvalidConstraints)?;
        let support = assemble_support_matrix(&set, &basis)?;
        let coefficients = match solve_coefficients(&support) {
            Ok(c) => c,
            Err(EngineError::SingularSupport { rank, n, rcond, .. }) => {
                let remedy = suggest_remedy(&set, &basis);
                return Err(EngineError::SingularSupport {
                    rank,
                    n,
                    rcond,
                    hint: singular_hint(remedy.as_ref()),
                });
            }
            Err(e) => return Err(e),
        };
        let mut shifts = Vec::with_capacity(set.len());
        for c in &set {
            let gk = c
                .apply(|x, order| free.eval(x, order).map_err(|source| (x, order, source)))
                .map_err(|(x, order, source)| EngineError::FreeFunctionUndefined { x, order, source })?;
            shifts.push(c.value() - gk);
        }
        Ok(Self {
            basis,
            support,
            coefficients,
            constraints: set,
            free,
            shifts,
        })
    }

    pub fn n(&self) -> usize {
        self.constraints.len()
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn support(&self) -> &SupportMatrix {
        &self.support
    }

    pub fn coefficients(&self) -> &CoefficientMatrix {
        &self.coefficients
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn free(&self) -> &FreeFunction {
        &self.free
    }

    /// Cached `c_k − α_kᵀ g^(d_k)(x_k)`.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    /// `d^order β_k / dx^order` at `x` for every `k`.
    pub fn beta(&self, x: f64, order: usize) -> Result<Vec<f64>, EngineError> {
        let row = self.basis.eval_row(x, order)?;
        Ok(self.coefficients.xi.left_mul(&row))
    }

    /// `y^(order)(x) = g^(order)(x) + Σ_k β_k^(order)(x) · shift_k`.
    pub fn evaluate(&self, x: f64, order: usize) -> Result<f64, EngineError> {
        let g = self
            .free
            .eval(x, order)
            .map_err(|source| EngineError::FreeFunctionUndefined { x, order, source })?;
        let beta = self.beta(x, order)?;
        Ok(g + beta.iter().zip(&self.shifts).map(|(b, s)| b * s).sum::<f64>())
    }

    /// `|Σ_j α_kj y^(d_kj)(x_kj) − c_k|` for every constraint.
    pub fn residuals(&self) -> Result<Vec<f64>, EngineError> {
        self.constraints
            .iter()
            .map(|c| Ok((c.apply(|x, d| self.evaluate(x, d))? - c.value()).abs()))
            .collect()
    }

    /// `max(1, |c_k|, |shift_k|)`, the scale residuals are judged against.
    pub fn residual_scales(&self) -> Vec<f64> {
        self.constraints
            .iter()
            .zip(&self.shifts)
            .map(|(c, s)| 1f64.max(c.value().abs()).max(s.abs()))
            .collect()
    }

    /// True when every residual is below `tolerance · scale`.
    pub fn satisfies(&self, tolerance: f64) -> Result<bool, EngineError> {
        Ok(self
            .residuals()?
            .iter()
            .zip(self.residual_scales())
            .all(|(r, s)| *r < tolerance * s))
    }

    #[doc(hidden)]
    /// Swaps in a different coefficient matrix. Exists so verification can
    /// be exercised against a deliberately corrupted expression.
    pub fn replace_coefficients(&mut self, coefficients: CoefficientMatrix) {
        self.coefficients = coefficients;
    }
}
