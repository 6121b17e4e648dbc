//! Reproductions of the worked examples: each prints the reference
//! quantities next to the computed ones.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::basis::{BasisFamily, BasisMember};
use crate::constraints::{derivative_constraint, point_constraint, ConstraintSet, ConstraintTerm, LinearConstraint};
use crate::engine::{assemble_support_matrix, suggest_remedy, ConstrainedExpression, EngineError};
use crate::forms::{self, PeriodicSpec};
use crate::freefn::FreeFunction;
use crate::linalg::Matrix;
use crate::spec::equally_spaced;

pub const NAMES: [&str; 6] = [
    "four-constraint",
    "relative-numeric",
    "waring-table1",
    "periodic-fig3",
    "periodic-fig4",
    "rank-pathology",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReproCheck {
    pub quantity: String,
    pub reference: String,
    pub computed: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproReport {
    pub name: &'static str,
    pub title: &'static str,
    pub checks: Vec<ReproCheck>,
    pub notes: Vec<String>,
}

impl ReproReport {
    fn new(name: &'static str, title: &'static str) -> Self {
        Self {
            name,
            title,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, quantity: impl Into<String>, reference: impl Into<String>, computed: impl Into<String>, ok: bool) {
        self.checks.push(ReproCheck {
            quantity: quantity.into(),
            reference: reference.into(),
            computed: computed.into(),
            ok,
        });
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.ok)
    }
}

impl fmt::Display for ReproReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, self.title)?;
        for c in &self.checks {
            writeln!(f, "  [{}] {}", if c.ok { "match" } else { "MISMATCH" }, c.quantity)?;
            writeln!(f, "      reference: {}", c.reference)?;
            writeln!(f, "      computed:  {}", c.computed)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "{}", if self.passed() { "all checks match" } else { "some checks do not match" })
    }
}

/// Runs the named reproduction, or `None` for an unknown name.
pub fn run(name: &str) -> Option<ReproReport> {
    Some(match name {
        "four-constraint" => four_constraint(),
        "relative-numeric" => relative_numeric(),
        "waring-table1" => waring_table1(),
        "periodic-fig3" => periodic_fig3(),
        "periodic-fig4" => periodic_fig4(),
        "rank-pathology" => rank_pathology(),
        _ => return None,
    })
}

fn matrix_text(m: &Matrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.to_rows()
        .iter()
        .flatten()
        .zip(b.to_rows().iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn parse(text: &str) -> FreeFunction {
    FreeFunction::parse(text).expect("built-in expression")
}

/// The constraint layout `y''(-1), y(0), y(2), y'(2)`.
pub fn four_constraint_set(values: [f64; 4]) -> ConstraintSet {
    ConstraintSet::new(vec![
        derivative_constraint(-1.0, 2, values[0]),
        point_constraint(0.0, values[1]),
        point_constraint(2.0, values[2]),
        derivative_constraint(2.0, 1, values[3]),
    ])
}

/// The four coefficient polynomials printed for the four-constraint
/// example, as `(c0, c1, c2, c3)` over a common denominator of 28.
pub const FOUR_CONSTRAINT_BETA: [[f64; 4]; 4] = [
    [0.0, -8.0, 8.0, -2.0],
    [28.0, -24.0, 3.0, 1.0],
    [0.0, 24.0, -3.0, -1.0],
    [0.0, -20.0, 6.0, 2.0],
];

fn four_constraint() -> ReproReport {
    let mut r = ReproReport::new("four-constraint", "four constraints at three points with monomials {1, x, x^2, x^3}");
    let e = ConstrainedExpression::build(
        four_constraint_set([0.0; 4]),
        BasisFamily::monomials(4),
        FreeFunction::Zero,
    )
    .expect("nonsingular");
    let h = Matrix::from_rows(&[
        [0.0, 0.0, 2.0, -6.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 4.0, 8.0],
        [0.0, 1.0, 4.0, 12.0],
    ]);
    r.check(
        "support matrix (exact)",
        matrix_text(&h),
        matrix_text(e.support().entries()),
        e.support().entries() == &h,
    );
    let reference = [
        [0.0, 28.0, 0.0, 0.0],
        [-8.0, -24.0, 24.0, -20.0],
        [8.0, 3.0, -3.0, 6.0],
        [-2.0, 1.0, -1.0, 2.0],
    ];
    let xi28 = Matrix::from_rows(&reference);
    let scaled: Vec<Vec<f64>> = e
        .coefficients()
        .matrix()
        .to_rows()
        .iter()
        .map(|row| row.iter().map(|v| v * 28.0).collect())
        .collect();
    let over28 = Matrix::from_rows(&reference.map(|row| row.map(|v| v / 28.0)));
    let err = max_abs_diff(e.coefficients().matrix(), &over28);
    r.check(
        "28 * inverse (tolerance 1e-12 per entry of the inverse)",
        matrix_text(&xi28),
        format!("{} (max error {err:.1e})", matrix_text(&Matrix::from_rows(&scaled))),
        err <= 1e-12,
    );
    let mut worst = 0.0f64;
    for x in equally_spaced(-2.0, 3.0, 20) {
        let beta = e.beta(x, 0).expect("polynomial basis");
        for (b, c) in beta.iter().zip(FOUR_CONSTRAINT_BETA) {
            let p = (c[0] + x * (c[1] + x * (c[2] + x * c[3]))) / 28.0;
            worst = worst.max((b - p).abs());
        }
    }
    r.check(
        "beta_k(x) at 20 points in [-2, 3] (tolerance 1e-10)",
        "(-8x + 8x^2 - 2x^3)/28, (28 - 24x + 3x^2 + x^3)/28, (24x - 3x^2 - x^3)/28, (-20x + 6x^2 + 2x^3)/28",
        format!("max deviation {worst:.1e}"),
        worst <= 1e-10,
    );
    r
}

/// `3 = 2 y(-1) − π y''(2)` and `π = e y'(-1) + y(1) − 3 y'(2)`.
pub fn relative_numeric_set() -> ConstraintSet {
    ConstraintSet::new(vec![
        LinearConstraint::new(
            3.0,
            vec![ConstraintTerm::new(2.0, 0, -1.0), ConstraintTerm::new(-PI, 2, 2.0)],
        )
        .expect("nonzero terms"),
        LinearConstraint::new(
            PI,
            vec![
                ConstraintTerm::new(E, 1, -1.0),
                ConstraintTerm::new(1.0, 0, 1.0),
                ConstraintTerm::new(-3.0, 1, 2.0),
            ],
        )
        .expect("nonzero terms"),
    ])
}

fn relative_numeric() -> ReproReport {
    let mut r = ReproReport::new("relative-numeric", "two linear relative constraints with h = {e^x, sin x}");
    let basis = BasisFamily::new(vec![BasisMember::Exp, BasisMember::Sin]).expect("non-empty");
    let e = ConstrainedExpression::build(relative_numeric_set(), basis, parse("x^2")).expect("nonsingular");
    let reference = Matrix::from_rows(&[[-0.0610, 0.0201], [-0.3163, 0.3853]]);
    let err = max_abs_diff(e.coefficients().matrix(), &reference);
    let rounded: Vec<Vec<String>> = e
        .coefficients()
        .matrix()
        .to_rows()
        .iter()
        .map(|row| row.iter().map(|v| format!("{v:.8}")).collect())
        .collect();
    r.check(
        "beta coefficient matrix (tolerance 5e-4)",
        matrix_text(&reference),
        format!(
            "[{}] (max error {err:.1e})",
            rounded.iter().map(|row| format!("[{}]", row.join(", "))).collect::<Vec<_>>().join(", ")
        ),
        err < 5e-4,
    );
    let residuals = e.residuals().expect("smooth g");
    let scales = e.residual_scales();
    let ok = residuals.iter().zip(&scales).all(|(res, s)| *res < 1e-8 * s);
    r.check(
        "constraint residuals with g = x^2",
        "0",
        format!("{residuals:?}"),
        ok,
    );
    r
}

/// Waypoint table as `(x, y, z)` columns.
pub const TABLE1: [[f64; 3]; 5] = [
    [2.0, 1.0, 2.0],
    [0.0, 2.0, 1.0],
    [-1.0, 0.0, 2.0],
    [1.0, -1.0, 0.0],
    [1.0, 1.0, -1.0],
];

pub fn table1_free() -> Vec<FreeFunction> {
    vec![parse("sin(x)"), parse("exp(x)"), parse("1 - x^2")]
}

fn waring_table1() -> ReproReport {
    let mut r = ReproReport::new("waring-table1", "vector Waring trajectory through five points, g = {sin t, e^t, 1 - t^2}");
    let g = table1_free();
    let times = equally_spaced(0.0, 1.0, TABLE1.len());
    let waypoints: Vec<(f64, Vec<f64>)> = times.iter().zip(TABLE1).map(|(t, p)| (*t, p.to_vec())).collect();
    for (t, p) in &waypoints {
        let got = forms::waring_vector_form(&g, &waypoints, *t).expect("distinct nodes");
        let err = got.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.check(
            format!("point at t = {t} (tolerance 1e-9)"),
            format!("{p:?}"),
            format!("{got:?}"),
            err <= 1e-9,
        );
    }
    r.notes.push("no waypoint times are given; equally spaced times on [0, 1] are assumed".into());
    r
}

const PERIODIC_PERIOD: f64 = 0.5;
const PERIODIC_SHIFT_C: f64 = 0.4;
const PERIODIC_SHIFT_D: f64 = 0.6;

fn periodic_specs() -> [(&'static str, PeriodicSpec); 2] {
    [
        ("continuous", PeriodicSpec::continuous(PERIODIC_PERIOD, PERIODIC_SHIFT_C).expect("valid")),
        ("discontinuous", PeriodicSpec::discontinuous(PERIODIC_PERIOD, PERIODIC_SHIFT_D).expect("valid")),
    ]
}

const PERIODIC_NOTE: &str = "the half-rate map sin(pi (x - dx)/T) repeats every 2T; the default continuous map is \
     sin(2 pi (x - dx)/T) so that results repeat every T (the half-rate map is available as \"half-sine\")";

fn periodic_fig3() -> ReproReport {
    let mut r = ReproReport::new("periodic-fig3", "continuous and discontinuous periodic functions, T = 0.5");
    let grid = equally_spaced(-1.5, 1.5, 61);
    for g_text in ["1 - exp(x)", "2 + 3*x^3", "cos(5*x)"] {
        let g = parse(g_text);
        for (kind, spec) in periodic_specs() {
            let mut worst = 0.0f64;
            for &x in &grid {
                let a = g.value(forms::periodic_map(&spec, x).expect("built-in map")).expect("smooth g");
                let b = g.value(forms::periodic_map(&spec, x + PERIODIC_PERIOD).expect("built-in map")).expect("smooth g");
                worst = worst.max((a - b).abs());
            }
            r.check(
                format!("{kind}, g = {g_text}: y(x + T) - y(x) over 61 points (tolerance 1e-10)"),
                "0",
                format!("{worst:.1e}"),
                worst <= 1e-10,
            );
        }
    }
    let m = forms::periodic_map(&periodic_specs()[1].1, 0.1).expect("built-in map");
    r.check("discontinuous map at x = 0.1", "0", format!("{m}"), m == 0.0);
    r.notes.push(PERIODIC_NOTE.into());
    r
}

/// Largest residual of a least-squares line through `(x, y)`.
pub fn line_fit_residual(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    x.iter()
        .zip(y)
        .map(|(a, b)| (b - (my + slope * (a - mx))).abs())
        .fold(0.0, f64::max)
}

pub const PERIODIC_POINTS: [(f64, f64); 2] = [(-0.7, -0.1), (1.7, 0.2)];

fn periodic_fig4() -> ReproReport {
    let mut r = ReproReport::new("periodic-fig4", "periodic functions through (-0.7, -0.1) and (1.7, 0.2)");
    let grid = equally_spaced(-1.5, 2.5, 81);
    for g_text in ["cos(7*x)", "1 - exp(x)", "2 + 3*x^3"] {
        let g = parse(g_text);
        for (kind, spec) in periodic_specs() {
            let node_err = PERIODIC_POINTS
                .iter()
                .map(|&(xk, yk)| (forms::periodic_waring(&spec, &g, &PERIODIC_POINTS, xk).expect("smooth g") - yk).abs())
                .fold(0.0, f64::max);
            r.check(
                format!("{kind}, g = {g_text}: passes through both points (tolerance 1e-10)"),
                "0",
                format!("{node_err:.1e}"),
                node_err <= 1e-10,
            );
            let diff: Vec<f64> = grid
                .iter()
                .map(|&x| {
                    forms::periodic_waring(&spec, &g, &PERIODIC_POINTS, x + PERIODIC_PERIOD).expect("smooth g")
                        - forms::periodic_waring(&spec, &g, &PERIODIC_POINTS, x).expect("smooth g")
                })
                .collect();
            let fit = line_fit_residual(&grid, &diff);
            r.check(
                format!("{kind}, g = {g_text}: y(x + T) - y(x) is a line (tolerance 1e-9)"),
                "affine",
                format!("line-fit residual {fit:.1e}"),
                fit < 1e-9,
            );
        }
    }
    r.notes.push(PERIODIC_NOTE.into());
    r
}

/// Third-derivative constraints at `x1`, `x2`, `x3` plus `y(x2)`.
pub fn rank_pathology_set(x1: f64, x2: f64, x3: f64) -> ConstraintSet {
    ConstraintSet::new(vec![
        derivative_constraint(x1, 3, 1.0),
        point_constraint(x2, 0.5),
        derivative_constraint(x2, 3, -2.0),
        derivative_constraint(x3, 3, 0.25),
    ])
}

fn rank_pathology() -> ReproReport {
    let mut r = ReproReport::new("rank-pathology", "third-derivative constraints with monomials {1, x, x^2, x^3}");
    let (x1, x2, x3) = (-1.0, 0.5, 2.0);
    let set = rank_pathology_set(x1, x2, x3);
    let monomials = BasisFamily::monomials(4);
    let sm = assemble_support_matrix(&set, &monomials).expect("polynomial basis");
    r.check("rank of the support matrix", "2", sm.rank().to_string(), sm.rank() == 2);
    let outcome = ConstrainedExpression::build(set.clone(), monomials.clone(), FreeFunction::Zero);
    let singular = matches!(outcome, Err(EngineError::SingularSupport { rank: 2, .. }));
    r.check(
        "monomial build",
        "cannot be inverted",
        match &outcome {
            Err(e) => e.to_string(),
            Ok(_) => "solved".into(),
        },
        singular,
    );
    let remedy = suggest_remedy(&set, &monomials);
    let expected = ["monomial:0", "monomial:3", "monomial:4", "monomial:5"];
    let names = remedy.as_ref().map(|b| b.descriptors()).unwrap_or_default();
    r.check(
        "suggested basis",
        "{1, x^3, x^4, x^5}",
        format!("{{{}}}", names.join(", ")),
        names == expected,
    );
    let solved = ConstrainedExpression::build(set, BasisFamily::from_powers([0, 3, 4, 5]), FreeFunction::Zero);
    r.check(
        "build with {1, x^3, x^4, x^5}",
        "nonsingular",
        match &solved {
            Ok(e) => format!("nonsingular, rcond {:.3e}", e.support().rcond()),
            Err(e) => e.to_string(),
        },
        solved.is_ok(),
    );
    r.notes.push(format!(
        "the example leaves the locations symbolic; x1 = {x1}, x2 = {x2}, x3 = {x3} are used"
    ));
    r
}
