//! A resolved problem: one or more evaluable models (engine builds or closed
//! forms), ready to be sampled on a grid or verified against their
//! constraints.

use std::collections::BTreeMap;

use crate::basis::BasisError;
use crate::constraints::ConstraintError;
use crate::engine::{ConstrainedExpression, EngineError};
use crate::forms::{self, FormError, OnePointForm, PeriodicSpec};
use crate::freefn::{EvalError, FreeFunction, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("cannot parse {field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl ProblemError {
    pub fn is_singular(&self) -> bool {
        matches!(self, ProblemError::Engine(EngineError::SingularSupport { .. }))
    }
}

/// Column label for the `k`-th derivative of `base`: `y`, `dy`, `d2y`, ...
pub fn derivative_label(base: &str, k: usize) -> String {
    match k {
        0 => base.to_string(),
        1 => format!("d{base}"),
        _ => format!("d{k}{base}"),
    }
}

/// One constraint functional evaluated on a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub target: f64,
    pub value: f64,
    pub scale: f64,
}

impl Check {
    fn new(label: impl Into<String>, target: f64, value: f64) -> Self {
        Self {
            label: label.into(),
            target,
            value,
            scale: 1f64.max(target.abs()),
        }
    }

    pub fn residual(&self) -> f64 {
        (self.value - self.target).abs()
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.residual() < tolerance * self.scale
    }
}

#[derive(Debug, Clone)]
pub enum FormModel {
    OnePoint(OnePointForm),
    Taylor {
        g: FreeFunction,
        x1: f64,
        values: Vec<f64>,
    },
    TwoDerivative {
        g: FreeFunction,
        x1: f64,
        orders: (usize, usize),
        values: (f64, f64),
    },
    Waring {
        g: FreeFunction,
        points: Vec<(f64, f64)>,
    },
    WaringVector {
        g: Vec<FreeFunction>,
        waypoints: Vec<(f64, Vec<f64>)>,
        names: Vec<String>,
    },
    Stack {
        g: FreeFunction,
        x0: f64,
        values: Vec<f64>,
    },
    PeriodicPoint {
        spec: PeriodicSpec,
        g: FreeFunction,
        anchor: (f64, f64),
    },
    PeriodicWaring {
        spec: PeriodicSpec,
        g: FreeFunction,
        points: Vec<(f64, f64)>,
    },
}

impl FormModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FormModel::OnePoint(f) => f.kind_name(),
            FormModel::Taylor { .. } => "taylor",
            FormModel::TwoDerivative { .. } => "two-derivative",
            FormModel::Waring { .. } => "waring",
            FormModel::WaringVector { .. } => "waring-vector",
            FormModel::Stack { .. } => "stack",
            FormModel::PeriodicPoint { spec, .. } => match spec.kind() {
                forms::PeriodicKind::Continuous(_) => "periodic-continuous",
                forms::PeriodicKind::Discontinuous => "periodic-discontinuous",
            },
            FormModel::PeriodicWaring { .. } => "periodic-waring",
        }
    }

    fn supports_derivatives(&self) -> bool {
        matches!(self, FormModel::Taylor { .. } | FormModel::TwoDerivative { .. })
    }

    fn columns(&self, derivatives: usize) -> Result<Vec<String>, ProblemError> {
        match self {
            FormModel::WaringVector { names, .. } if derivatives == 0 => Ok(names.clone()),
            FormModel::Stack { values, .. } if derivatives == 0 => {
                Ok((0..values.len()).map(|k| derivative_label("y", k)).collect())
            }
            _ if derivatives == 0 || self.supports_derivatives() => {
                Ok((0..=derivatives).map(|k| derivative_label("y", k)).collect())
            }
            _ => Err(ProblemError::Invalid(format!(
                "form '{}' does not provide derivative columns",
                self.kind_name()
            ))),
        }
    }

    fn derivative(&self, x: f64, order: usize) -> Result<f64, FormError> {
        match self {
            FormModel::Taylor { g, x1, values } => forms::taylor_form_derivative(g, *x1, values, x, order),
            FormModel::TwoDerivative { g, x1, orders, values } => {
                forms::two_derivative_form_derivative(g, *x1, *orders, *values, x, order)
            }
            _ => {
                debug_assert_eq!(order, 0);
                self.value(x)
            }
        }
    }

    fn value(&self, x: f64) -> Result<f64, FormError> {
        match self {
            FormModel::OnePoint(f) => forms::one_point(f, x),
            FormModel::Taylor { g, x1, values } => forms::taylor_form(g, *x1, values, x),
            FormModel::TwoDerivative { g, x1, orders, values } => {
                forms::two_derivative_form(g, *x1, orders.0, orders.1, values.0, values.1, x)
            }
            FormModel::Waring { g, points } => forms::waring_form(g, points, x),
            FormModel::PeriodicPoint { spec, g, anchor } => forms::periodic_point_form(spec, g, *anchor, x),
            FormModel::PeriodicWaring { spec, g, points } => forms::periodic_waring(spec, g, points, x),
            FormModel::WaringVector { .. } | FormModel::Stack { .. } => {
                Ok(self.row(x, 0)?[0])
            }
        }
    }

    fn row(&self, x: f64, derivatives: usize) -> Result<Vec<f64>, FormError> {
        match self {
            FormModel::WaringVector { g, waypoints, .. } => forms::waring_vector_form(g, waypoints, x),
            FormModel::Stack { g, x0, values } => forms::stack_form(g, *x0, values, x),
            _ => (0..=derivatives).map(|k| self.derivative(x, k)).collect(),
        }
    }

    fn checks(&self) -> Result<Vec<Check>, FormError> {
        let mut out = Vec::new();
        match self {
            FormModel::OnePoint(f) => {
                let (x1, y1) = f.anchor;
                out.push(Check::new(format!("y({x1}) = {y1}"), y1, forms::one_point(f, x1)?));
            }
            FormModel::Taylor { x1, values, .. } => {
                for (k, v) in values.iter().enumerate() {
                    out.push(Check::new(
                        format!("y^({k})({x1}) = {v}"),
                        *v,
                        self.derivative(*x1, k)?,
                    ));
                }
            }
            FormModel::TwoDerivative { x1, orders, values, .. } => {
                for (d, v) in [(orders.0, values.0), (orders.1, values.1)] {
                    out.push(Check::new(format!("y^({d})({x1}) = {v}"), v, self.derivative(*x1, d)?));
                }
            }
            FormModel::Waring { points, .. } | FormModel::PeriodicWaring { points, .. } => {
                for (xk, yk) in points {
                    out.push(Check::new(format!("y({xk}) = {yk}"), *yk, self.value(*xk)?));
                }
            }
            FormModel::WaringVector { waypoints, names, .. } => {
                for (tk, yk) in waypoints {
                    let got = self.row(*tk, 0)?;
                    for ((name, target), value) in names.iter().zip(yk).zip(got) {
                        out.push(Check::new(format!("{name}({tk}) = {target}"), *target, value));
                    }
                }
            }
            FormModel::Stack { x0, values, .. } => {
                let got = self.row(*x0, 0)?;
                for (k, (target, value)) in values.iter().zip(got).enumerate() {
                    out.push(Check::new(format!("y^({k})({x0}) = {target}"), *target, value));
                }
            }
            FormModel::PeriodicPoint { spec, anchor, .. } => {
                let (xk, yk) = *anchor;
                out.push(Check::new(format!("y({xk}) = {yk}"), yk, self.value(xk)?));
                let t = spec.effective_period();
                out.push(Check::new(
                    format!("y({xk} + {t}) = y({xk})"),
                    yk,
                    self.value(xk + t)?,
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Engine(ConstrainedExpression),
    Form(FormModel),
}

impl Model {
    /// Column labels produced by [`Model::row`], excluding the abscissa.
    pub fn columns(&self, derivatives: usize) -> Result<Vec<String>, ProblemError> {
        match self {
            Model::Engine(_) => Ok((0..=derivatives).map(|k| derivative_label("y", k)).collect()),
            Model::Form(f) => f.columns(derivatives),
        }
    }

    pub fn row(&self, x: f64, derivatives: usize) -> Result<Vec<f64>, ProblemError> {
        match self {
            Model::Engine(e) => (0..=derivatives)
                .map(|k| e.evaluate(x, k).map_err(ProblemError::from))
                .collect(),
            Model::Form(f) => Ok(f.row(x, derivatives)?),
        }
    }

    pub fn checks(&self) -> Result<Vec<Check>, ProblemError> {
        match self {
            Model::Engine(e) => {
                let scales = e.residual_scales();
                e.constraints()
                    .iter()
                    .zip(scales)
                    .map(|(c, scale)| {
                        let value = c.apply(|x, d| e.evaluate(x, d))?;
                        Ok(Check {
                            label: c.to_string(),
                            target: c.value(),
                            value,
                            scale,
                        })
                    })
                    .collect()
            }
            Model::Form(f) => Ok(f.checks()?),
        }
    }
}

/// Equally spaced sample grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub from: f64,
    pub to: f64,
    pub count: usize,
    pub derivatives: usize,
}

impl Sampling {
    pub fn points(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// A resolved spec. Ensembles hold one model per random draw.
#[derive(Debug, Clone)]
pub struct Problem {
    pub description: Option<String>,
    pub variable: String,
    pub members: Vec<Model>,
    pub draws: Vec<BTreeMap<String, f64>>,
    pub sampling: Option<Sampling>,
    pub notes: Vec<String>,
}

impl Problem {
    pub fn is_ensemble(&self) -> bool {
        !self.draws.is_empty()
    }

    pub fn header(&self, derivatives: usize) -> Result<Vec<String>, ProblemError> {
        let mut header = vec![self.variable.clone()];
        for (m, model) in self.members.iter().enumerate() {
            for c in model.columns(derivatives)? {
                header.push(if self.is_ensemble() {
                    format!("{c}_{}", m + 1)
                } else {
                    c
                });
            }
        }
        Ok(header)
    }

    pub fn row(&self, x: f64, derivatives: usize) -> Result<Vec<f64>, ProblemError> {
        let mut row = vec![x];
        for model in &self.members {
            row.extend(model.row(x, derivatives)?);
        }
        Ok(row)
    }

    /// Every constraint check of every member; labels are prefixed with the
    /// member number for ensembles.
    pub fn checks(&self) -> Result<Vec<Check>, ProblemError> {
        let mut out = Vec::new();
        for (m, model) in self.members.iter().enumerate() {
            for mut c in model.checks()? {
                if self.is_ensemble() {
                    c.label = format!("[{}] {}", m + 1, c.label);
                }
                out.push(c);
            }
        }
        Ok(out)
    }
}
