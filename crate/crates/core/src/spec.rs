//! JSON problem specifications.
//!
//! A spec describes either an engine problem (`basis` + `constraints`) or a
//! closed form (`form`), the free function, and an optional sampling grid.
//! Any numeric field may be given as a number or as a constant expression
//! over the names bound in `consts` (for example `"x1"` or `"-pi/2"`).
//!
//! ```json
//! {
//!   "basis": ["monomial:0", "monomial:1"],
//!   "constraints": [{"point": {"x": 0, "y": 1}}, {"derivative": {"x": 1, "d": 1, "v": 0}}],
//!   "free": "sin(x)",
//!   "sampling": {"from": -1, "to": 2, "count": 31, "derivatives": 1}
//! }
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::basis::BasisFamily;
use crate::constraints::{
    derivative_constraint, point_constraint, relative_constraint, ConstraintSet, ConstraintTerm,
    LinearConstraint,
};
use crate::engine::{ConstrainedExpression, RCOND_WARNING};
use crate::forms::{
    self, ContinuousMap, OnePointForm, OnePointKind, PeriodicKind, PeriodicSpec,
};
use crate::freefn::{self, FreeFunction, Univariate};
use crate::problem::{FormModel, Model, Problem, ProblemError, Sampling};

/// Redraws allowed per ensemble member before giving up on a singular or
/// ill-conditioned draw.
const MAX_REDRAWS: usize = 100;

/// A number, or a constant expression evaluated against the bound names.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Num {
    Value(f64),
    Expr(String),
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Value(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub alpha: Num,
    pub d: usize,
    pub x: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintSpec {
    Point { x: Num, y: Num },
    Derivative { x: Num, d: usize, v: Num },
    Relative { xi: Num, di: usize, xj: Num, dj: usize },
    Linear { c: Num, terms: Vec<TermSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CombinationSpec {
    /// Coefficients over the spec's own basis.
    Coefficients(Vec<Num>),
    WithBasis {
        basis: Vec<String>,
        coefficients: Vec<Num>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FreeSpec {
    /// `"zero"` or expression text.
    Text(String),
    Expr {
        expr: String,
        #[serde(default)]
        consts: BTreeMap<String, f64>,
    },
    Combination {
        #[serde(rename = "linear-combination")]
        combination: CombinationSpec,
    },
}

impl Default for FreeSpec {
    fn default() -> Self {
        FreeSpec::Text("zero".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormSpec {
    OnePointLinear {
        anchor: [Num; 2],
        /// Defaults to the slope equivalent of the free function.
        #[serde(default)]
        p: Option<FreeSpec>,
    },
    OnePointAdditive {
        anchor: [Num; 2],
    },
    OnePointRational {
        anchor: [Num; 2],
        h: FreeSpec,
    },
    Taylor {
        x1: Num,
        values: Vec<Num>,
    },
    TwoDerivative {
        x1: Num,
        p: usize,
        q: usize,
        vp: Num,
        vq: Num,
    },
    Waring {
        points: Vec<[Num; 2]>,
    },
    WaringVector {
        values: Vec<Vec<Num>>,
        /// Node times; equally spaced over `interval` when omitted.
        #[serde(default)]
        times: Option<Vec<Num>>,
        #[serde(default)]
        interval: Option<[Num; 2]>,
        /// One free function per component; the top-level `free` is used
        /// for every component when omitted.
        #[serde(default)]
        free: Option<Vec<FreeSpec>>,
        #[serde(default)]
        names: Option<Vec<String>>,
    },
    Stack {
        x0: Num,
        values: Vec<Num>,
    },
    PeriodicContinuous {
        anchor: [Num; 2],
    },
    PeriodicDiscontinuous {
        anchor: [Num; 2],
    },
    PeriodicWaring {
        points: Vec<[Num; 2]>,
    },
}

impl FormSpec {
    fn is_periodic(&self) -> bool {
        matches!(
            self,
            FormSpec::PeriodicContinuous { .. }
                | FormSpec::PeriodicDiscontinuous { .. }
                | FormSpec::PeriodicWaring { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodicKindSpec {
    #[default]
    Continuous,
    Discontinuous,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicFields {
    pub period: Num,
    #[serde(default = "zero_num")]
    pub shift: Num,
    /// Used by `periodic-waring`; the point forms fix the kind themselves.
    #[serde(default)]
    pub kind: PeriodicKindSpec,
    /// `"sine"` (default), `"half-sine"`, or an expression in the variable.
    #[serde(default)]
    pub map: Option<String>,
}

fn zero_num() -> Num {
    Num::Value(0.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub from: Num,
    pub to: Num,
    pub count: usize,
    #[serde(default)]
    pub derivatives: usize,
}

/// Seeded random draws of named constants, one problem per draw.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub count: usize,
    pub draws: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default = "default_variable")]
    pub variable: String,
    #[serde(default)]
    pub consts: BTreeMap<String, f64>,
    #[serde(default)]
    pub basis: Option<Vec<String>>,
    #[serde(default)]
    pub constraints: Option<Vec<ConstraintSpec>>,
    #[serde(default)]
    pub free: FreeSpec,
    #[serde(default)]
    pub form: Option<FormSpec>,
    #[serde(default)]
    pub sampling: Option<SamplingSpec>,
    #[serde(default)]
    pub periodic: Option<PeriodicFields>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_variable() -> String {
    "x".into()
}

fn invalid(msg: impl Into<String>) -> ProblemError {
    ProblemError::Invalid(msg.into())
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Structural checks that do not need any evaluation.
    pub fn validate(&self) -> Result<(), ProblemError> {
        match (&self.form, &self.basis, &self.constraints) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            (Some(_), _, _) => {
                return Err(invalid("give either basis + constraints or form, not both"))
            }
            (None, _, _) => {
                return Err(invalid("an engine spec needs both basis and constraints"))
            }
        }
        if let Some(s) = &self.sampling {
            if s.count < 2 {
                return Err(invalid("sampling count must be at least 2"));
            }
        }
        match (&self.form, &self.periodic) {
            (Some(f), None) if f.is_periodic() => {
                return Err(invalid("periodic forms need a periodic block"))
            }
            (f, Some(_)) if !f.as_ref().is_some_and(FormSpec::is_periodic) => {
                return Err(invalid("a periodic block needs a periodic form kind"))
            }
            _ => {}
        }
        if let Some(e) = &self.ensemble {
            if e.count == 0 {
                return Err(invalid("ensemble count must be at least 1"));
            }
            for (name, [lo, hi]) in &e.draws {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(format!("draw range for '{name}' must satisfy lo <= hi")));
                }
            }
        }
        Ok(())
    }

    /// Resolves the spec into evaluable models. `seed` overrides the spec's
    /// own seed for ensemble draws.
    pub fn resolve(&self, seed: Option<u64>) -> Result<Problem, ProblemError> {
        let mut notes = Vec::new();
        let mut members = Vec::new();
        let mut draws = Vec::new();
        match &self.ensemble {
            None => members.push(self.build_model(&self.consts, &mut notes)?),
            Some(ensemble) => {
                let seed = seed.or(self.seed).unwrap_or(0);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                notes.push(format!("ensemble of {} draws, seed {seed}", ensemble.count));
                for m in 0..ensemble.count {
                    let (model, drawn) = self.draw_member(ensemble, &mut rng, m, &mut notes)?;
                    members.push(model);
                    draws.push(drawn);
                }
            }
        }
        let sampling = match &self.sampling {
            None => None,
            Some(s) => {
                let from = resolve_num(&s.from, &self.consts, "sampling.from")?;
                let to = resolve_num(&s.to, &self.consts, "sampling.to")?;
                if from >= to {
                    return Err(invalid("sampling requires from < to"));
                }
                Some(Sampling {
                    from,
                    to,
                    count: s.count,
                    derivatives: s.derivatives,
                })
            }
        };
        Ok(Problem {
            description: self.description.clone(),
            variable: self.variable.clone(),
            members,
            draws,
            sampling,
            notes,
        })
    }

    fn draw_member(
        &self,
        ensemble: &EnsembleSpec,
        rng: &mut ChaCha8Rng,
        member: usize,
        notes: &mut Vec<String>,
    ) -> Result<(Model, BTreeMap<String, f64>), ProblemError> {
        let mut last_err = None;
        for attempt in 0..MAX_REDRAWS {
            let mut consts = self.consts.clone();
            let mut drawn = BTreeMap::new();
            for (name, [lo, hi]) in &ensemble.draws {
                let v = rng.gen_range(*lo..=*hi);
                consts.insert(name.clone(), v);
                drawn.insert(name.clone(), v);
            }
            let mut member_notes = Vec::new();
            match self.build_model(&consts, &mut member_notes) {
                Ok(Model::Engine(e)) if e.support().rcond() < RCOND_WARNING => {
                    last_err = Some(invalid(format!(
                        "draw {} stayed ill-conditioned after {MAX_REDRAWS} attempts",
                        member + 1
                    )));
                }
                Ok(model) => {
                    if attempt > 0 {
                        notes.push(format!("draw {} redrawn {attempt} time(s)", member + 1));
                    }
                    if member == 0 {
                        notes.extend(member_notes);
                    }
                    return Ok((model, drawn));
                }
                Err(e) if e.is_singular() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }

    fn build_model(
        &self,
        consts: &BTreeMap<String, f64>,
        notes: &mut Vec<String>,
    ) -> Result<Model, ProblemError> {
        let ctx = Context {
            variable: &self.variable,
            consts,
            basis: self.basis.as_deref(),
        };
        let free = ctx.free(&self.free, "free")?;
        if let Some(form) = &self.form {
            return Ok(Model::Form(ctx.form(form, free, self.periodic.as_ref(), notes)?));
        }
        let basis_desc = self.basis.as_ref().expect("validated");
        let basis = BasisFamily::from_descriptors_with(basis_desc, &self.variable, consts)?;
        let set = self
            .constraints
            .as_ref()
            .expect("validated")
            .iter()
            .enumerate()
            .map(|(k, c)| ctx.constraint(c, k))
            .collect::<Result<ConstraintSet, _>>()?;
        let e = ConstrainedExpression::build(set, basis, free)?;
        if e.support().is_ill_conditioned() {
            notes.push(format!(
                "warning: support matrix is ill-conditioned (rcond {:.3e} < {RCOND_WARNING:e})",
                e.support().rcond()
            ));
        }
        Ok(Model::Engine(e))
    }
}

/// Evaluates a constant expression such as `"x1"` or `"-pi/2"`.
pub fn resolve_num(n: &Num, consts: &BTreeMap<String, f64>, field: &str) -> Result<f64, ProblemError> {
    let v = match n {
        Num::Value(v) => *v,
        Num::Expr(text) => {
            // No variable: any free identifier must be a bound constant.
            let e = freefn::parse_with(text, "", consts).map_err(|source| ProblemError::Parse {
                field: field.to_string(),
                source,
            })?;
            e.eval(0.0)?
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{field} is not finite")))
    }
}

struct Context<'a> {
    variable: &'a str,
    consts: &'a BTreeMap<String, f64>,
    basis: Option<&'a [String]>,
}

impl Context<'_> {
    fn num(&self, n: &Num, field: &str) -> Result<f64, ProblemError> {
        resolve_num(n, self.consts, field)
    }

    fn nums(&self, ns: &[Num], field: &str) -> Result<Vec<f64>, ProblemError> {
        ns.iter()
            .enumerate()
            .map(|(i, n)| self.num(n, &format!("{field}[{i}]")))
            .collect()
    }

    fn pair(&self, p: &[Num; 2], field: &str) -> Result<(f64, f64), ProblemError> {
        Ok((self.num(&p[0], field)?, self.num(&p[1], field)?))
    }

    fn pairs(&self, ps: &[[Num; 2]], field: &str) -> Result<Vec<(f64, f64)>, ProblemError> {
        ps.iter()
            .enumerate()
            .map(|(i, p)| self.pair(p, &format!("{field}[{i}]")))
            .collect()
    }

    fn expr(&self, text: &str, extra: &BTreeMap<String, f64>, field: &str) -> Result<FreeFunction, ProblemError> {
        let consts = if extra.is_empty() {
            self.consts.clone()
        } else {
            let mut c = self.consts.clone();
            c.extend(extra.iter().map(|(k, v)| (k.clone(), *v)));
            c
        };
        FreeFunction::parse_with(text, self.variable, &consts).map_err(|source| ProblemError::Parse {
            field: field.to_string(),
            source,
        })
    }

    fn free(&self, spec: &FreeSpec, field: &str) -> Result<FreeFunction, ProblemError> {
        match spec {
            FreeSpec::Text(t) if t.trim() == "zero" => Ok(FreeFunction::Zero),
            FreeSpec::Text(t) => self.expr(t, &BTreeMap::new(), field),
            FreeSpec::Expr { expr, consts } => self.expr(expr, consts, field),
            FreeSpec::Combination { combination } => {
                let (desc, coeffs) = match combination {
                    CombinationSpec::Coefficients(c) => (
                        self.basis.ok_or_else(|| {
                            invalid(format!("{field}: a bare coefficient list needs the spec basis"))
                        })?,
                        c,
                    ),
                    CombinationSpec::WithBasis { basis, coefficients } => (basis.as_slice(), coefficients),
                };
                let basis = BasisFamily::from_descriptors_with(desc, self.variable, self.consts)?;
                let coeffs = self.nums(coeffs, field)?;
                if coeffs.len() != basis.len() {
                    return Err(invalid(format!(
                        "{field}: {} coefficients for {} basis members",
                        coeffs.len(),
                        basis.len()
                    )));
                }
                Ok(FreeFunction::combination(basis, coeffs))
            }
        }
    }

    fn constraint(&self, c: &ConstraintSpec, k: usize) -> Result<LinearConstraint, ProblemError> {
        let f = |name: &str| format!("constraints[{k}].{name}");
        Ok(match c {
            ConstraintSpec::Point { x, y } => point_constraint(self.num(x, &f("x"))?, self.num(y, &f("y"))?),
            ConstraintSpec::Derivative { x, d, v } => {
                derivative_constraint(self.num(x, &f("x"))?, *d, self.num(v, &f("v"))?)
            }
            ConstraintSpec::Relative { xi, di, xj, dj } => {
                relative_constraint(self.num(xi, &f("xi"))?, *di, self.num(xj, &f("xj"))?, *dj)?
            }
            ConstraintSpec::Linear { c, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        Ok(ConstraintTerm::new(
                            self.num(&t.alpha, &f("alpha"))?,
                            t.d,
                            self.num(&t.x, &f("x"))?,
                        ))
                    })
                    .collect::<Result<Vec<_>, ProblemError>>()?;
                LinearConstraint::new(self.num(c, &f("c"))?, terms)?
            }
        })
    }

    fn periodic(
        &self,
        fields: &PeriodicFields,
        kind: PeriodicKindSpec,
    ) -> Result<PeriodicSpec, ProblemError> {
        let period = self.num(&fields.period, "periodic.period")?;
        let shift = self.num(&fields.shift, "periodic.shift")?;
        let kind = match kind {
            PeriodicKindSpec::Discontinuous => PeriodicKind::Discontinuous,
            PeriodicKindSpec::Continuous => PeriodicKind::Continuous(match fields.map.as_deref() {
                None | Some("sine") => ContinuousMap::Sine,
                Some("half-sine") => ContinuousMap::HalfSine,
                Some(text) => ContinuousMap::Custom(self.expr(text, &BTreeMap::new(), "periodic.map")?),
            }),
        };
        Ok(PeriodicSpec::new(period, shift, kind)?)
    }

    fn form(
        &self,
        form: &FormSpec,
        g: FreeFunction,
        periodic: Option<&PeriodicFields>,
        notes: &mut Vec<String>,
    ) -> Result<FormModel, ProblemError> {
        let periodic_fields = || periodic.ok_or_else(|| invalid("periodic forms need a periodic block"));
        Ok(match form {
            FormSpec::OnePointLinear { anchor, p } => {
                let anchor = self.pair(anchor, "form.anchor")?;
                let p: Arc<dyn Univariate> = match p {
                    Some(p) => Arc::new(self.free(p, "form.p")?),
                    None => Arc::new(forms::slope_equivalent(&g, anchor.0)?),
                };
                FormModel::OnePoint(OnePointForm::new(anchor, OnePointKind::Linear { p }))
            }
            FormSpec::OnePointAdditive { anchor } => FormModel::OnePoint(OnePointForm::new(
                self.pair(anchor, "form.anchor")?,
                OnePointKind::Additive { g: Arc::new(g) },
            )),
            FormSpec::OnePointRational { anchor, h } => FormModel::OnePoint(OnePointForm::new(
                self.pair(anchor, "form.anchor")?,
                OnePointKind::Rational {
                    h: Arc::new(self.free(h, "form.h")?),
                },
            )),
            FormSpec::Taylor { x1, values } => {
                let values = self.nums(values, "form.values")?;
                if values.is_empty() {
                    return Err(invalid("taylor needs at least one value"));
                }
                FormModel::Taylor {
                    g,
                    x1: self.num(x1, "form.x1")?,
                    values,
                }
            }
            FormSpec::TwoDerivative { x1, p, q, vp, vq } => {
                if p >= q {
                    return Err(forms::FormError::InvalidOrders { p: *p, q: *q }.into());
                }
                FormModel::TwoDerivative {
                    g,
                    x1: self.num(x1, "form.x1")?,
                    orders: (*p, *q),
                    values: (self.num(vp, "form.vp")?, self.num(vq, "form.vq")?),
                }
            }
            FormSpec::Waring { points } => FormModel::Waring {
                g,
                points: self.pairs(points, "form.points")?,
            },
            FormSpec::WaringVector {
                values,
                times,
                interval,
                free,
                names,
            } => self.waring_vector(values, times.as_deref(), interval.as_ref(), free.as_deref(), names.as_deref(), g, notes)?,
            FormSpec::Stack { x0, values } => {
                let values = self.nums(values, "form.values")?;
                if values.is_empty() {
                    return Err(invalid("stack needs at least one value"));
                }
                FormModel::Stack {
                    g,
                    x0: self.num(x0, "form.x0")?,
                    values,
                }
            }
            FormSpec::PeriodicContinuous { anchor } => FormModel::PeriodicPoint {
                spec: self.periodic(periodic_fields()?, PeriodicKindSpec::Continuous)?,
                g,
                anchor: self.pair(anchor, "form.anchor")?,
            },
            FormSpec::PeriodicDiscontinuous { anchor } => FormModel::PeriodicPoint {
                spec: self.periodic(periodic_fields()?, PeriodicKindSpec::Discontinuous)?,
                g,
                anchor: self.pair(anchor, "form.anchor")?,
            },
            FormSpec::PeriodicWaring { points } => {
                let fields = periodic_fields()?;
                FormModel::PeriodicWaring {
                    spec: self.periodic(fields, fields.kind)?,
                    g,
                    points: self.pairs(points, "form.points")?,
                }
            }
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn waring_vector(
        &self,
        values: &[Vec<Num>],
        times: Option<&[Num]>,
        interval: Option<&[Num; 2]>,
        free: Option<&[FreeSpec]>,
        names: Option<&[String]>,
        g: FreeFunction,
        notes: &mut Vec<String>,
    ) -> Result<FormModel, ProblemError> {
        if values.is_empty() {
            return Err(forms::FormError::NoPoints.into());
        }
        let values: Vec<Vec<f64>> = values
            .iter()
            .enumerate()
            .map(|(i, v)| self.nums(v, &format!("form.values[{i}]")))
            .collect::<Result<_, _>>()?;
        let dim = values[0].len();
        let times = match times {
            Some(t) => {
                let t = self.nums(t, "form.times")?;
                if t.len() != values.len() {
                    return Err(invalid(format!(
                        "{} times for {} waypoints",
                        t.len(),
                        values.len()
                    )));
                }
                t
            }
            None => {
                let (a, b) = match interval {
                    Some(i) => self.pair(i, "form.interval")?,
                    None => (0.0, 1.0),
                };
                notes.push(format!(
                    "waypoint times not given; assumed equally spaced on [{a}, {b}]"
                ));
                equally_spaced(a, b, values.len())
            }
        };
        let g = match free {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, f)| self.free(f, &format!("form.free[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![g; dim],
        };
        let names = match names {
            Some(n) => n.to_vec(),
            None if g.len() == 3 => vec!["x".into(), "y".into(), "z".into()],
            None => (1..=g.len()).map(|i| format!("y{i}")).collect(),
        };
        if names.len() != g.len() {
            return Err(forms::FormError::DimensionMismatch {
                expected: g.len(),
                found: names.len(),
            }
            .into());
        }
        let waypoints: Vec<(f64, Vec<f64>)> = times.into_iter().zip(values).collect();
        // Surface dimension and duplicate-node errors at build time.
        forms::waring_vector_form(&g, &waypoints, waypoints[0].0)?;
        Ok(FormModel::WaringVector { g, waypoints, names })
    }
}

/// `count` equally spaced values from `a` to `b`; a single value sits at `a`.
pub fn equally_spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(json: &str) -> Result<Problem, ProblemError> {
        ProblemSpec::from_json(json)?.resolve(None)
    }

    #[test]
    fn num_forms() {
        let consts = BTreeMap::from([("x1".to_string(), -1.5)]);
        assert_eq!(resolve_num(&Num::Value(2.0), &consts, "f").unwrap(), 2.0);
        assert_eq!(resolve_num(&Num::Expr("x1".into()), &consts, "f").unwrap(), -1.5);
        assert_eq!(resolve_num(&Num::Expr("-2*x1".into()), &consts, "f").unwrap(), 3.0);
        assert!(resolve_num(&Num::Expr("y".into()), &consts, "f").is_err());
        assert!(resolve_num(&Num::Expr("1/0".into()), &consts, "f").is_err());
    }

    #[test]
    fn engine_spec() {
        let p = resolve(
            r#"{"basis": ["monomial:0", "monomial:1"],
                "constraints": [{"point": {"x": 0, "y": 1}}, {"derivative": {"x": 1, "d": 1, "v": 0}}],
                "free": "sin(x)",
                "sampling": {"from": -1, "to": 2, "count": 4, "derivatives": 1}}"#,
        )
        .unwrap();
        assert_eq!(p.header(1).unwrap(), vec!["x", "y", "dy"]);
        assert!(p.checks().unwrap().iter().all(|c| c.passes(1e-8)));
    }

    #[test]
    fn exactly_one_of_engine_or_form() {
        let both = r#"{"basis": ["exp"], "constraints": [{"point": {"x": 0, "y": 1}}],
                       "form": {"kind": "waring", "points": [[0, 1]]}}"#;
        assert!(matches!(ProblemSpec::from_json(both), Err(ProblemError::Invalid(_))));
        assert!(matches!(ProblemSpec::from_json("{}"), Err(ProblemError::Invalid(_))));
        let half = r#"{"basis": ["exp"]}"#;
        assert!(matches!(ProblemSpec::from_json(half), Err(ProblemError::Invalid(_))));
    }

    #[test]
    fn sampling_validation() {
        let base = r#"{"form": {"kind": "waring", "points": [[0, 1]]}, "sampling": "#;
        let bad_count = format!(r#"{base}{{"from": 0, "to": 1, "count": 1}}}}"#);
        assert!(ProblemSpec::from_json(&bad_count).is_err());
        let bad_range = format!(r#"{base}{{"from": 1, "to": 1, "count": 3}}}}"#);
        assert!(resolve(&bad_range).is_err());
    }

    #[test]
    fn free_function_forms() {
        let spec = r#"{"basis": ["exp", "sin"], "constraints": [{"point": {"x": 0, "y": 1}}, {"point": {"x": 1, "y": 2}}],
                       "free": {"linear-combination": [2, "-1"]}}"#;
        assert!(resolve(spec).is_ok());
        let spec = r#"{"form": {"kind": "one-point-additive", "anchor": [0, 5]},
                       "free": {"expr": "v + x^2", "consts": {"v": 1.25}}}"#;
        let p = resolve(spec).unwrap();
        assert_eq!(p.row(1.0, 0).unwrap(), vec![1.0, 6.0]);
        let spec = r#"{"form": {"kind": "waring", "points": [[0, 0]]},
                       "free": {"linear-combination": {"basis": ["monomial:2"], "coefficients": [1]}}}"#;
        assert_eq!(resolve(spec).unwrap().row(2.0, 0).unwrap(), vec![2.0, 4.0]);
        let spec = r#"{"form": {"kind": "waring", "points": [[0, 0]]}, "free": {"linear-combination": [1]}}"#;
        assert!(resolve(spec).is_err());
    }

    #[test]
    fn parse_errors_name_the_field() {
        let spec = r#"{"form": {"kind": "waring", "points": [[0, 0]]}, "free": "sin("}"#;
        match resolve(spec) {
            Err(ProblemError::Parse { field, source }) => {
                assert_eq!(field, "free");
                assert_eq!(source.position, 4);
            }
            _ => panic!("expected a parse error"),
        }
    }

    #[test]
    fn singular_is_reported_as_engine_error() {
        let spec = r#"{"basis": ["monomial:0", "monomial:1"],
                       "constraints": [{"relative": {"xi": -1, "di": 0, "xj": 1, "dj": 0}},
                                       {"relative": {"xi": -1, "di": 1, "xj": 1, "dj": 1}}]}"#;
        assert!(resolve(spec).unwrap_err().is_singular());
    }

    #[test]
    fn ensemble_is_seeded() {
        let spec = ProblemSpec::from_json(
            r#"{"basis": ["expr:1 - x^2", "sin"],
                "constraints": [{"relative": {"xi": "x1", "di": 0, "xj": "x2", "dj": 0}},
                                {"relative": {"xi": "x1", "di": 1, "xj": "x2", "dj": 1}}],
                "free": "v + x^2 - sin(3*x + v)",
                "ensemble": {"count": 3, "draws": {"v": [0, 6.283185307179586], "x1": [-2.5, -0.5], "x2": [0.5, 2.5]}}}"#,
        )
        .unwrap();
        let a = spec.resolve(Some(7)).unwrap();
        let b = spec.resolve(Some(7)).unwrap();
        let c = spec.resolve(Some(8)).unwrap();
        assert_eq!(a.draws, b.draws);
        assert_ne!(a.draws, c.draws);
        assert_eq!(a.members.len(), 3);
        assert!(a.checks().unwrap().iter().all(|c| c.passes(1e-8)));
        assert!(a.checks().unwrap()[0].label.starts_with("[1]"));
    }

    #[test]
    fn periodic_block_rules() {
        let no_block = r#"{"form": {"kind": "periodic-continuous", "anchor": [0, 1]}}"#;
        assert!(ProblemSpec::from_json(no_block).is_err());
        let stray = r#"{"form": {"kind": "waring", "points": [[0, 1]]}, "periodic": {"period": 1}}"#;
        assert!(ProblemSpec::from_json(stray).is_err());
        let ok = r#"{"form": {"kind": "periodic-discontinuous", "anchor": [0.1, 1]},
                     "periodic": {"period": 0.5, "shift": 0.6}, "free": "2 + 3*x^3"}"#;
        let p = resolve(ok).unwrap();
        assert!(p.checks().unwrap().iter().all(|c| c.passes(1e-10)));
    }

    #[test]
    fn vector_waring_defaults() {
        let spec = r#"{"variable": "t",
                       "form": {"kind": "waring-vector", "values": [[0, 0, 0], [1, 2, 3]],
                                "free": ["sin(t)", "exp(t)", "1 - t^2"]}}"#;
        let p = resolve(spec).unwrap();
        assert_eq!(p.header(0).unwrap(), vec!["t", "x", "y", "z"]);
        assert!(p.notes.iter().any(|n| n.contains("equally spaced")));
        assert_eq!(p.row(1.0, 0).unwrap(), vec![1.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn spacing() {
        assert_eq!(equally_spaced(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(equally_spaced(2.0, 3.0, 1), vec![2.0]);
    }
}
