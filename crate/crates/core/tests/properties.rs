use cexpr::basis::BasisFamily;
use cexpr::constraints::{derivative_constraint, point_constraint, ConstraintSet};
use cexpr::engine::{ConstrainedExpression, RCOND_WARNING};
use cexpr::forms::{self, PeriodicSpec};
use cexpr::freefn::{parse, FreeFunction};
use proptest::prelude::*;

/// Random expression text built from functions that are smooth on all of R.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (-3i32..=3).prop_map(|c| format!("({c})")),
        (1u32..4).prop_map(|k| format!("x^{k}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(0.3 * sin({a}))")),
            inner.prop_map(|a| format!("1 / (2 + cos({a}))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symbolic_derivatives_match_finite_differences(text in smooth_expr(), x in -1.5f64..1.5, order in 1usize..=4) {
        let f = FreeFunction::parse(&text).unwrap();
        let h = 1e-5;
        let fd = (f.eval(x + h, order - 1).unwrap() - f.eval(x - h, order - 1).unwrap()) / (2.0 * h);
        let exact = f.eval(x, order).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1.0), "{}: fd {} exact {}", text, fd, exact);
    }

    #[test]
    fn printing_then_parsing_is_stable(text in smooth_expr(), x in -2.0f64..2.0) {
        let first = parse(&text).unwrap();
        let printed = first.to_string();
        let second = parse(&printed).unwrap();
        prop_assert_eq!(second.to_string(), printed.clone());
        let (a, b) = (first.eval(x).unwrap(), second.eval(x).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", text, printed);
    }

    #[test]
    fn engine_satisfies_point_and_derivative_constraints(
        spec in prop::collection::vec((-2.0f64..2.0, 0usize..=2, -3.0f64..3.0), 1..=5),
        g in smooth_expr(),
    ) {
        let set: ConstraintSet = spec
            .iter()
            .map(|&(x, d, v)| if d == 0 { point_constraint(x, v) } else { derivative_constraint(x, d, v) })
            .collect();
        let basis = BasisFamily::monomials(spec.len());
        let built = ConstrainedExpression::build(set, basis, FreeFunction::parse(&g).unwrap());
        let Ok(e) = built else { return Ok(()) };
        prop_assume!(e.support().rcond() >= RCOND_WARNING);
        for &(x, d, v) in &spec {
            let y = e.evaluate(x, d).unwrap();
            let gv = e.free().eval(x, d).unwrap();
            let scale = v.abs().max((v - gv).abs()).max(1.0);
            prop_assert!((y - v).abs() <= 1e-8 * scale, "y^({}) ({}) = {} want {}", d, x, y, v);
        }
    }

    #[test]
    fn waring_form_hits_every_node(
        xs in prop::collection::btree_set(-40i32..40, 1..6),
        g in smooth_expr(),
        ys in prop::collection::vec(-3.0f64..3.0, 6),
    ) {
        let points: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(x, y)| (*x as f64 / 20.0, *y)).collect();
        let g = FreeFunction::parse(&g).unwrap();
        for &(x, y) in &points {
            let got = forms::waring_form(&g, &points, x).unwrap();
            prop_assert!((got - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn periodic_forms_are_periodic(
        period in 0.2f64..3.0,
        shift in -1.0f64..1.0,
        anchor in (-1.0f64..1.0, -2.0f64..2.0),
        x in -3.0f64..3.0,
        discontinuous in any::<bool>(),
        g in smooth_expr(),
    ) {
        let spec = if discontinuous {
            PeriodicSpec::discontinuous(period, shift).unwrap()
        } else {
            PeriodicSpec::continuous(period, shift).unwrap()
        };
        let g = FreeFunction::parse(&g).unwrap();
        let a = forms::periodic_point_form(&spec, &g, anchor, x).unwrap();
        let b = forms::periodic_point_form(&spec, &g, anchor, x + period).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{} vs {}", a, b);
        let at = forms::periodic_point_form(&spec, &g, anchor, anchor.0).unwrap();
        prop_assert!((at - anchor.1).abs() <= 1e-10 * anchor.1.abs().max(1.0));
    }
}
