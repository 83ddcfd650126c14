use std::sync::Arc;

use noether_core::dynamics::{integrate, State};
use noether_core::expr::{parse, Expr};
use noether_core::fields::{Component, FieldModel, FieldProfile};
use noether_core::symmetry::{CanonicalCoords, Symmetry, SymmetrySpec};
use noether_core::verify::{verify_model, Grid, Windows, DEFAULT_FD_TOL, DEFAULT_TOL};
use noether_core::Error;
use proptest::prelude::*;

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

const WINDOW: [f64; 2] = [0.0, 2.0];

#[derive(Debug, Clone)]
enum Params {
    A { c: [f64; 6] },
    B { c: [f64; 4] },
    C { c: [f64; 4] },
}

fn params() -> impl Strategy<Value = Params> {
    prop_oneof![
        proptest::array::uniform6(-1.0f64..1.0).prop_map(|c| Params::A { c }),
        proptest::array::uniform4(-1.0f64..1.0).prop_map(|c| Params::B { c }),
        proptest::array::uniform4(-1.0f64..1.0).prop_map(|c| Params::C { c }),
    ]
}

fn spec(p: &Params) -> SymmetrySpec {
    match p {
        Params::A { c } => SymmetrySpec::case_a(
            e(&format!("1.2 + ({})*0.3*t + ({})*0.2*sin(t)", c[0], c[1])),
            e(&format!("({})*0.5 + ({})*0.2*t", c[2], c[3])),
            e(&format!("({})*0.3*t^2", c[4])),
            e(&format!("({})*0.3*cos(t)", c[5])),
            WINDOW,
        ),
        Params::B { c } => SymmetrySpec::case_b(
            e(&format!("({})*0.3*t^2 + ({})*0.2", c[0], c[1])),
            e(&format!("({})*0.3*sin(t) + ({})*0.2*t", c[2], c[3])),
            WINDOW,
        ),
        Params::C { c } => SymmetrySpec::case_c(
            e(&format!("({}) + ({})*sin(t)", c[0], c[1])),
            e(&format!("2 + ({})*0.5*cos(t) + ({})*0.3*t", c[2], c[3])),
            WINDOW,
        ),
    }
}

fn profile(p: &Params) -> FieldProfile {
    match p {
        Params::A { .. } => FieldProfile {
            bbar: e("1 + 0.3*xbar - 0.2*ybar"),
            vbar: e("0.5*xbar^2 + 0.3*ybar^2 + 0.1*xbar*ybar"),
            ..Default::default()
        },
        _ => FieldProfile {
            vbar: e("0.4*xbar^2 + 0.1*xbar*ybar"),
            psi: e("-0.3*xbar^2 + 0.1*xbar^3*cos(ybar)"),
            ..Default::default()
        },
    }
}

fn windows() -> Windows {
    Windows {
        t: WINDOW,
        x: [-2.0, 2.0],
        y: [-2.0, 2.0],
    }
}

fn g_along<F: Fn(CanonicalCoords) -> f64>(sym: &Symmetry, x: f64, y: f64, t: f64, f: F) -> f64 {
    sym.generator_directional_derivative(|x, y, t| Ok::<_, Error>(f(sym.to_canonical(x, y, t)?)), x, y, t)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generator_straightens_in_canonical_coordinates(
        p in params(),
        x in -1.5f64..1.5,
        y in -1.5f64..1.5,
        t in 0.1f64..1.9,
    ) {
        let sym = Symmetry::new(spec(&p)).unwrap();
        prop_assume!(sym.to_canonical(x, y, t).is_ok());
        prop_assert!(g_along(&sym, x, y, t, |c| c.xbar).abs() < 1e-6);
        prop_assert!(g_along(&sym, x, y, t, |c| c.ybar).abs() < 1e-6);
        prop_assert!((g_along(&sym, x, y, t, |c| c.tbar) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn canonical_round_trip(p in params(), x in -1.5f64..1.5, y in -1.5f64..1.5, t in 0.0f64..2.0) {
        let sym = Symmetry::new(spec(&p)).unwrap();
        let Ok(c) = sym.to_canonical(x, y, t) else { return Ok(()) };
        let (x2, y2) = sym.from_canonical(c, t).unwrap();
        prop_assert!((x2 - x).abs() <= 1e-9 && (y2 - y).abs() <= 1e-9, "({x}, {y}) -> ({x2}, {y2})");
    }

    #[test]
    fn perturbation_flips_a_report(p in params(), which in 0usize..3, eps in 1e-3f64..1e-1) {
        let sym = Arc::new(Symmetry::new(spec(&p)).unwrap());
        let model = FieldModel::new(sym, &profile(&p)).unwrap();
        let grid = Grid::new(windows(), 8, 8, 4);
        let clean = verify_model(&model, &grid, DEFAULT_TOL, DEFAULT_FD_TOL).unwrap();
        prop_assert!(clean.iter().all(|r| r.pass));
        let scale = clean[0].scale;
        let component = [Component::E1, Component::E2, Component::B][which];
        let amp = eps * scale;
        let dirty = model.with_perturbation(component, e(&format!("{amp}*(x*y + t)"))).unwrap();
        let reports = verify_model(&dirty, &grid, DEFAULT_TOL, DEFAULT_FD_TOL).unwrap();
        prop_assert!(reports.iter().any(|r| !r.pass));
    }

    #[test]
    fn trajectory_sampling(p in params(), dt in 0.03f64..0.4) {
        let sym = Arc::new(Symmetry::new(spec(&p)).unwrap());
        let model = FieldModel::new(sym, &profile(&p)).unwrap();
        let start = State { t: 0.0, x: 0.6, y: 0.7, vx: 0.1, vy: -0.2 };
        let Ok(tr) = integrate(&model, start, 2.0, 1e-9, dt) else { return Ok(()) };
        prop_assert_eq!(tr.samples[0].state, start);
        prop_assert_eq!(tr.last().t, 2.0);
        for w in tr.samples.windows(2) {
            let gap = w[1].state.t - w[0].state.t;
            prop_assert!(gap > 0.0 && gap <= dt * (1.0 + 1e-12));
        }
        prop_assert!(tr.max_relative_drift() <= 1e-7, "drift {}", tr.max_relative_drift());
    }
}
