use noether_core::expr::{parse, Expr, Func, Rational};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (-2.0f64..2.0).prop_map(|v| Expr::num((v * 100.0).round() / 100.0)),
        (1i64..6).prop_map(|n| Expr::num(n as f64)),
    ]
}

/// Smooth expressions that stay finite on the whole plane.
fn smooth() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let one = || Expr::num(1.0);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| a / (one() + b.powi(2))),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), 2i64..4).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Cos, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Atan, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, Expr::call(Func::Sin, a))),
            inner.clone().prop_map(move |a| Expr::call(Func::Ln, one() + a.powi(2))),
            inner.clone().prop_map(move |a| Expr::call(Func::Sqrt, one() + a.powi(2))),
            inner.clone().prop_map(move |a| (one() + a.powi(2)).pow(Rational::new(-3, 2))),
            inner.prop_map(|a| Expr::call(Func::Tan, Expr::call(Func::Sin, a) * 0.5)),
        ]
    })
}

fn at(e: &Expr, x: f64, y: f64) -> f64 {
    e.evaluate(&[("x", x), ("y", y)]).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derivative_matches_central_difference(e in smooth(), pts in points()) {
        let dx = e.differentiate("x");
        for (x, y) in pts {
            let h = f64::EPSILON.cbrt() * x.abs().max(1.0);
            let fd = (at(&e, x + h, y) - at(&e, x - h, y)) / (2.0 * h);
            let d = at(&dx, x, y);
            prop_assert!(close(d, fd, 1e-6), "{e}: d/dx = {d}, fd = {fd} at ({x}, {y})");
        }
    }

    #[test]
    fn simplify_preserves_value_and_is_idempotent(e in smooth(), pts in points()) {
        let s = e.simplify();
        let ss = s.simplify();
        for (x, y) in pts {
            let (v, vs, vss) = (at(&e, x, y), at(&s, x, y), at(&ss, x, y));
            prop_assert!(close(v, vs, 1e-12), "{e} -> {s}: {v} vs {vs}");
            prop_assert!(close(vs, vss, 1e-12), "{s} -> {ss}: {vs} vs {vss}");
        }
    }

    #[test]
    fn print_parse_round_trip(e in smooth(), pts in points()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        for (x, y) in pts {
            let (v, w) = (at(&e, x, y), at(&back, x, y));
            prop_assert!(close(v, w, 1e-14), "{text}: {v} vs {w}");
        }
    }

    #[test]
    fn simplified_derivative_agrees_with_raw(e in smooth(), pts in points()) {
        let raw = e.differentiate("y");
        let simp = e.derivative("y");
        for (x, y) in pts {
            prop_assert!(close(at(&raw, x, y), at(&simp, x, y), 1e-11));
        }
    }
}
