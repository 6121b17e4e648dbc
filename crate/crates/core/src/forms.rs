//! Closed-form constrained expressions for common constraint layouts.
//!
//! Each form here is written out directly rather than going through the
//! support-matrix solve, so the two routes can be checked against each other.

use std::sync::Arc;

use crate::freefn::{EvalError, FreeFunction, Univariate};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormError {
    #[error("anchor violation at x1 = {x1}: {reason}")]
    AnchorViolation { x1: f64, reason: String },
    #[error("duplicate node at x = {x}")]
    DuplicateNode { x: f64 },
    #[error("dimension mismatch: expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least one point")]
    NoPoints,
    #[error("derivative orders must satisfy 0 <= p < q (got p = {p}, q = {q})")]
    InvalidOrders { p: usize, q: usize },
    #[error("period must be positive and finite (got {0})")]
    InvalidPeriod(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `d^r/dx^r [x^k / k!] = x^(k-r) / (k-r)!`, zero for `r > k`.
fn scaled_power_derivative(x: f64, k: usize, r: usize) -> f64 {
    if r > k {
        0.0
    } else {
        x.powi((k - r) as i32) / factorial(k - r)
    }
}

// ---------------------------------------------------------------------------
// One-point forms

/// How a single-point form is assembled from its ingredient functions.
#[derive(Clone)]
pub enum OnePointKind {
    /// `p(x) (x − x1) + y1`
    Linear { p: Arc<dyn Univariate> },
    /// `g(x) + (y1 − g1)`
    Additive { g: Arc<dyn Univariate> },
    /// `h(x)/h(x1) · y1`
    Rational { h: Arc<dyn Univariate> },
    /// `p(x) (x − x1) + h(x)/h(x1) · y1`
    LinearRational {
        p: Arc<dyn Univariate>,
        h: Arc<dyn Univariate>,
    },
    /// `p(x) (x − x1) + g(x) + (y1 − g1)`
    LinearAdditive {
        p: Arc<dyn Univariate>,
        g: Arc<dyn Univariate>,
    },
    /// `g(x) + h(x)/h(x1) · (y1 − g1)`
    AdditiveRational {
        g: Arc<dyn Univariate>,
        h: Arc<dyn Univariate>,
    },
    /// `p(x) (x − x1) + g(x) + h(x)/h(x1) · (y1 − g1)`
    Combined {
        p: Arc<dyn Univariate>,
        g: Arc<dyn Univariate>,
        h: Arc<dyn Univariate>,
    },
}

/// A function passing through `anchor = (x1, y1)`.
#[derive(Clone)]
pub struct OnePointForm {
    pub anchor: (f64, f64),
    pub kind: OnePointKind,
}

impl std::fmt::Debug for OnePointForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnePointForm")
            .field("kind", &self.kind_name())
            .field("anchor", &self.anchor)
            .finish()
    }
}

impl OnePointForm {
    pub fn new(anchor: (f64, f64), kind: OnePointKind) -> Self {
        Self { anchor, kind }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OnePointKind::Linear { .. } => "one-point-linear",
            OnePointKind::Additive { .. } => "one-point-additive",
            OnePointKind::Rational { .. } => "one-point-rational",
            OnePointKind::LinearRational { .. } => "one-point-linear-rational",
            OnePointKind::LinearAdditive { .. } => "one-point-linear-additive",
            OnePointKind::AdditiveRational { .. } => "one-point-additive-rational",
            OnePointKind::Combined { .. } => "one-point-combined",
        }
    }
}

fn anchored(f: &dyn Univariate, x1: f64, what: &str) -> Result<f64, FormError> {
    f.value(x1).map_err(|e| FormError::AnchorViolation {
        x1,
        reason: format!("{what}(x1) is not finite: {e}"),
    })
}

fn rational_anchor(h: &dyn Univariate, x1: f64) -> Result<f64, FormError> {
    let h1 = anchored(h, x1, "h")?;
    if h1 == 0.0 {
        return Err(FormError::AnchorViolation {
            x1,
            reason: "h(x1) = 0".into(),
        });
    }
    Ok(h1)
}

/// Evaluates a one-point form at `x`.
pub fn one_point(form: &OnePointForm, x: f64) -> Result<f64, FormError> {
    let (x1, y1) = form.anchor;
    let linear = |p: &dyn Univariate| -> Result<f64, FormError> {
        anchored(p, x1, "p")?;
        Ok(p.value(x)? * (x - x1))
    };
    let additive = |g: &dyn Univariate| -> Result<(f64, f64), FormError> {
        let g1 = anchored(g, x1, "g")?;
        Ok((g.value(x)?, y1 - g1))
    };
    let ratio = |h: &dyn Univariate| -> Result<f64, FormError> {
        let h1 = rational_anchor(h, x1)?;
        Ok(h.value(x)? / h1)
    };
    Ok(match &form.kind {
        OnePointKind::Linear { p } => linear(p.as_ref())? + y1,
        OnePointKind::Additive { g } => {
            let (gx, shift) = additive(g.as_ref())?;
            gx + shift
        }
        OnePointKind::Rational { h } => ratio(h.as_ref())? * y1,
        OnePointKind::LinearRational { p, h } => linear(p.as_ref())? + ratio(h.as_ref())? * y1,
        OnePointKind::LinearAdditive { p, g } => {
            let (gx, shift) = additive(g.as_ref())?;
            linear(p.as_ref())? + gx + shift
        }
        OnePointKind::AdditiveRational { g, h } => {
            let (gx, shift) = additive(g.as_ref())?;
            gx + ratio(h.as_ref())? * shift
        }
        OnePointKind::Combined { p, g, h } => {
            let (gx, shift) = additive(g.as_ref())?;
            linear(p.as_ref())? + gx + ratio(h.as_ref())? * shift
        }
    })
}

/// The finite-difference slope `p(x) = (g(x) − g(x1)) / (x − x1)` that turns
/// the linear one-point form into the additive one.
#[derive(Debug, Clone)]
pub struct SlopeEquivalent {
    g: FreeFunction,
    x1: f64,
    g1: f64,
    slope_at_anchor: f64,
}

/// Builds the slope equivalent of `g` about `x1`. At `x = x1` the removable
/// singularity is filled with `g'(x1)`.
pub fn slope_equivalent(g: &FreeFunction, x1: f64) -> Result<SlopeEquivalent, FormError> {
    let g1 = g.value(x1).map_err(|e| FormError::AnchorViolation {
        x1,
        reason: format!("g(x1) is not finite: {e}"),
    })?;
    let slope_at_anchor = g.eval(x1, 1)?;
    Ok(SlopeEquivalent {
        g: g.clone(),
        x1,
        g1,
        slope_at_anchor,
    })
}

impl SlopeEquivalent {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if x == self.x1 {
            Ok(self.slope_at_anchor)
        } else {
            Ok((self.g.value(x)? - self.g1) / (x - self.x1))
        }
    }
}

impl Univariate for SlopeEquivalent {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(x)
    }
}

// ---------------------------------------------------------------------------
// Derivative constraints at a single point

/// Function whose `p`-th and `q`-th derivatives at `x1` are `vp` and `vq`,
/// built on `{x^p/p!, x^q/q!}`.
pub fn two_derivative_form(
    g: &FreeFunction,
    x1: f64,
    p: usize,
    q: usize,
    vp: f64,
    vq: f64,
    x: f64,
) -> Result<f64, FormError> {
    two_derivative_form_derivative(g, x1, (p, q), (vp, vq), x, 0)
}

/// `order`-th derivative of [`two_derivative_form`].
pub fn two_derivative_form_derivative(
    g: &FreeFunction,
    x1: f64,
    (p, q): (usize, usize),
    (vp, vq): (f64, f64),
    x: f64,
    order: usize,
) -> Result<f64, FormError> {
    if p >= q {
        return Err(FormError::InvalidOrders { p, q });
    }
    let dp = vp - g.eval(x1, p)?;
    let dq = vq - g.eval(x1, q)?;
    // [x^(q-p)/q! - x1^(q-p)/(p!(q-p)!)] x^p  =  x^q/q! - x1^(q-p)/(q-p)! * x^p/p!
    let lead = x1.powi((q - p) as i32) / factorial(q - p);
    let beta_p = scaled_power_derivative(x, p, order);
    let beta_q = scaled_power_derivative(x, q, order) - lead * beta_p;
    Ok(g.eval(x, order)? + beta_p * dp + beta_q * dq)
}

/// Function whose derivatives of order `0..=n` at `x1` equal `values`.
pub fn taylor_form(g: &FreeFunction, x1: f64, values: &[f64], x: f64) -> Result<f64, FormError> {
    taylor_form_derivative(g, x1, values, x, 0)
}

/// `order`-th derivative of [`taylor_form`].
pub fn taylor_form_derivative(
    g: &FreeFunction,
    x1: f64,
    values: &[f64],
    x: f64,
    order: usize,
) -> Result<f64, FormError> {
    if values.is_empty() {
        return Err(FormError::NoPoints);
    }
    let dx = x - x1;
    let mut acc = g.eval(x, order)?;
    for (k, v) in values.iter().enumerate().skip(order) {
        let shift = v - g.eval(x1, k)?;
        acc += dx.powi((k - order) as i32) / factorial(k - order) * shift;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Point interpolation

fn check_distinct(nodes: impl Iterator<Item = f64> + Clone) -> Result<(), FormError> {
    let v: Vec<f64> = nodes.collect();
    if v.is_empty() {
        return Err(FormError::NoPoints);
    }
    for (i, a) in v.iter().enumerate() {
        if v[..i].contains(a) {
            return Err(FormError::DuplicateNode { x: *a });
        }
    }
    Ok(())
}

/// Cardinal weights `Π_{i≠k} (x − x_i)/(x_k − x_i)` for every node.
pub fn cardinal_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(k, xk)| {
            nodes
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, xi)| (x - xi) / (xk - xi))
                .product()
        })
        .collect()
}

/// All functions through `points`: `g(x) + Σ_k (y_k − g_k) L_k(x)`.
pub fn waring_form(g: &FreeFunction, points: &[(f64, f64)], x: f64) -> Result<f64, FormError> {
    check_distinct(points.iter().map(|p| p.0))?;
    let nodes: Vec<f64> = points.iter().map(|p| p.0).collect();
    let weights = cardinal_weights(&nodes, x);
    let mut acc = g.value(x)?;
    for ((xk, yk), w) in points.iter().zip(weights) {
        acc += w * (yk - g.value(*xk)?);
    }
    Ok(acc)
}

/// Componentwise [`waring_form`] for a vector trajectory through
/// `(t_k, y_k)` waypoints.
pub fn waring_vector_form(
    g: &[FreeFunction],
    waypoints: &[(f64, Vec<f64>)],
    t: f64,
) -> Result<Vec<f64>, FormError> {
    check_distinct(waypoints.iter().map(|w| w.0))?;
    for (_, y) in waypoints {
        if y.len() != g.len() {
            return Err(FormError::DimensionMismatch {
                expected: g.len(),
                found: y.len(),
            });
        }
    }
    let nodes: Vec<f64> = waypoints.iter().map(|w| w.0).collect();
    let weights = cardinal_weights(&nodes, t);
    g.iter()
        .enumerate()
        .map(|(c, gc)| {
            let mut acc = gc.value(t)?;
            for ((tk, yk), w) in waypoints.iter().zip(&weights) {
                acc += w * (yk[c] - gc.value(*tk)?);
            }
            Ok(acc)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Derivative-stack vectors

/// Upper-triangular `B(x, x0)` with `B[i][j] = (x − x0)^(j−i)/(j−i)!` for
/// `j ≥ i`, or its derivative with respect to `x` when `differentiated`.
pub fn stack_matrix(x: f64, x0: f64, size: usize, differentiated: bool) -> Matrix {
    let dx = x - x0;
    let mut b = Matrix::zeros(size, size);
    for i in 0..size {
        for j in i..size {
            let gap = j - i;
            b[(i, j)] = if !differentiated {
                dx.powi(gap as i32) / factorial(gap)
            } else if gap == 0 {
                0.0
            } else {
                dx.powi(gap as i32 - 1) / factorial(gap - 1)
            };
        }
    }
    b
}

/// `y_d(x) = g_d(x) + B(x, x0) (y_d0 − g_d0)` where `y_d = (y, y', y'', ...)`
/// and the stack size is `y_d0.len()`.
pub fn stack_form(g: &FreeFunction, x0: f64, y_d0: &[f64], x: f64) -> Result<Vec<f64>, FormError> {
    let size = y_d0.len();
    if size == 0 {
        return Err(FormError::NoPoints);
    }
    let shift: Vec<f64> = y_d0
        .iter()
        .enumerate()
        .map(|(k, v)| Ok(v - g.eval(x0, k)?))
        .collect::<Result<_, FormError>>()?;
    let b = stack_matrix(x, x0, size, false);
    (0..size)
        .map(|i| {
            let correction: f64 = b.row(i).iter().zip(&shift).map(|(bij, s)| bij * s).sum();
            Ok(g.eval(x, i)? + correction)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Periodic forms

/// The smooth periodic map `Ψ` applied to `x − δx`.
#[derive(Debug, Clone)]
pub enum ContinuousMap {
    /// `sin(2π (x − δx)/T)`, period `T`.
    Sine,
    /// `sin(π (x − δx)/T)`. Its true period is `2T`.
    HalfSine,
    /// A user-supplied map evaluated at `x − δx`; periodicity is the
    /// caller's responsibility.
    Custom(FreeFunction),
}

#[derive(Debug, Clone)]
pub enum PeriodicKind {
    Continuous(ContinuousMap),
    /// `(x − δx) mod T`, Euclidean remainder in `[0, T)`.
    Discontinuous,
}

#[derive(Debug, Clone)]
pub struct PeriodicSpec {
    period: f64,
    shift: f64,
    kind: PeriodicKind,
}

impl PeriodicSpec {
    pub fn new(period: f64, shift: f64, kind: PeriodicKind) -> Result<Self, FormError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(FormError::InvalidPeriod(period));
        }
        Ok(Self { period, shift, kind })
    }

    pub fn continuous(period: f64, shift: f64) -> Result<Self, FormError> {
        Self::new(period, shift, PeriodicKind::Continuous(ContinuousMap::Sine))
    }

    pub fn discontinuous(period: f64, shift: f64) -> Result<Self, FormError> {
        Self::new(period, shift, PeriodicKind::Discontinuous)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn kind(&self) -> &PeriodicKind {
        &self.kind
    }

    /// Smallest period of the mapped argument.
    pub fn effective_period(&self) -> f64 {
        match self.kind {
            PeriodicKind::Continuous(ContinuousMap::HalfSine) => 2.0 * self.period,
            _ => self.period,
        }
    }
}

/// The periodic argument fed to `g`.
pub fn periodic_map(spec: &PeriodicSpec, x: f64) -> Result<f64, FormError> {
    let s = x - spec.shift;
    let t = spec.period;
    Ok(match &spec.kind {
        PeriodicKind::Continuous(ContinuousMap::Sine) => (2.0 * std::f64::consts::PI * s / t).sin(),
        PeriodicKind::Continuous(ContinuousMap::HalfSine) => (std::f64::consts::PI * s / t).sin(),
        PeriodicKind::Continuous(ContinuousMap::Custom(psi)) => psi.value(s)?,
        PeriodicKind::Discontinuous => {
            let r = s.rem_euclid(t);
            // rem_euclid may round up to t for tiny negative inputs
            if r >= t {
                0.0
            } else {
                r
            }
        }
    })
}

/// `g(Ψ(x)) + (y_k − g(Ψ(x_k)))`: periodic and through `(x_k, y_k)`.
pub fn periodic_point_form(
    spec: &PeriodicSpec,
    g: &FreeFunction,
    (xk, yk): (f64, f64),
    x: f64,
) -> Result<f64, FormError> {
    let gk = g.value(periodic_map(spec, xk)?).map_err(|e| FormError::AnchorViolation {
        x1: xk,
        reason: format!("g is not finite at the mapped anchor: {e}"),
    })?;
    Ok(g.value(periodic_map(spec, x)?)? + (yk - gk))
}

/// Periodic functions through several points: the cardinal-weighted blend
/// of one [`periodic_point_form`] per point. The result is periodic about a
/// polynomial trend of degree `n − 1`.
pub fn periodic_waring(
    spec: &PeriodicSpec,
    g: &FreeFunction,
    points: &[(f64, f64)],
    x: f64,
) -> Result<f64, FormError> {
    check_distinct(points.iter().map(|p| p.0))?;
    let nodes: Vec<f64> = points.iter().map(|p| p.0).collect();
    let weights = cardinal_weights(&nodes, x);
    let mut acc = 0.0;
    for (pt, w) in points.iter().zip(weights) {
        acc += w * periodic_point_form(spec, g, *pt, x)?;
    }
    Ok(acc)
}
