//! Seeded random scenarios and expressions shared by the integration tests.
#![allow(dead_code)]

use noether_cli::scenario::{
    GridSize, InitialCondition, Outputs, ProfileFile, Scenario, ScenarioFile, SymmetryFile, Tolerances,
};
use noether_core::dynamics::{integrate_with, IntegrateOptions, State};
use noether_core::expr::{Expr, Func, Rational};
use noether_core::symmetry::Case;
use noether_core::verify::Windows;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const T_WINDOW: [f64; 2] = [0.0, 2.0];
pub const SPACE: [f64; 2] = [-8.0, 8.0];

fn c<R: Rng>(rng: &mut R, amp: f64) -> f64 {
    let v: f64 = rng.gen_range(-amp..amp);
    (v * 1e4).round() / 1e4
}

/// A smooth function of t bounded by `amp` on [0, 2].
fn time_fn<R: Rng>(rng: &mut R, amp: f64) -> String {
    let h = amp / 2.0;
    let term = |rng: &mut R| match rng.gen_range(0..5) {
        0 => format!("({})*t/2", c(rng, h)),
        1 => format!("({})*t^2/4", c(rng, h)),
        2 => format!("({})*sin(({})*t + ({}))", c(rng, h), c(rng, 1.5), c(rng, 1.0)),
        3 => format!("({})*cos(({})*t)", c(rng, h), c(rng, 1.5)),
        _ => format!("({})*t*(2 - t)", c(rng, h)),
    };
    format!("{} + {}", term(rng), term(rng))
}

pub fn windows() -> Windows {
    Windows {
        t: T_WINDOW,
        x: SPACE,
        y: SPACE,
    }
}

fn file(case: Case, symmetry: SymmetryFile, profile: ProfileFile, seed: u64) -> ScenarioFile {
    ScenarioFile {
        case,
        symmetry,
        profile,
        windows: windows(),
        tolerances: Tolerances::default(),
        grid: GridSize::default(),
        initial_conditions: Vec::new(),
        seed,
        outputs: Outputs::default(),
        perturbation: None,
    }
}

pub fn random_case_a<R: Rng>(rng: &mut R, seed: u64) -> ScenarioFile {
    let rho = if rng.gen_bool(0.5) {
        format!("{} + {}", 1.0 + c(rng, 0.25).abs(), time_fn(rng, 0.4))
    } else {
        format!("sqrt({} + ({})*t^2)", 1.0 + c(rng, 0.25).abs(), 0.5 + c(rng, 0.4))
    };
    let symmetry = SymmetryFile {
        rho: Some(rho),
        omega: Some(format!("{} + {}", c(rng, 0.5), time_fn(rng, 0.3))),
        alpha1: Some(time_fn(rng, 0.4)),
        alpha2: Some(time_fn(rng, 0.4)),
        t_ref: Some(0.0),
        ..Default::default()
    };
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let b = [sign * rng.gen_range(0.5..1.5), c(rng, 0.2), c(rng, 0.2), c(rng, 0.1)];
    let profile = ProfileFile {
        bbar: Some(format!("({}) + ({})*xbar + ({})*ybar + ({})*xbar*ybar", b[0], b[1], b[2], b[3])),
        abar1: Some(format!("-({})*ybar/2 - ({})*ybar^2/2", b[0], b[2])),
        abar2: Some(format!("({})*xbar/2 + ({})*xbar^2/2 + ({})*xbar^2*ybar/2", b[0], b[1], b[3])),
        vbar: Some(format!(
            "({})*xbar^2 + ({})*ybar^2 + ({})*xbar*ybar + ({})*xbar^3 + ({})*sin(xbar + ybar)",
            rng.gen_range(0.3..1.0),
            rng.gen_range(0.3..1.0),
            c(rng, 0.1),
            c(rng, 0.03),
            c(rng, 0.05)
        )),
        ..Default::default()
    };
    file(Case::A, symmetry, profile, seed)
}

pub fn random_case_b<R: Rng>(rng: &mut R, seed: u64) -> ScenarioFile {
    let symmetry = SymmetryFile {
        beta1: Some(time_fn(rng, 0.5)),
        beta2: Some(time_fn(rng, 0.5)),
        ..Default::default()
    };
    let profile = ProfileFile {
        psi: Some(format!(
            "xbar^2*(({}) + ({})*xbar*cos(ybar) + ({})*ybar)",
            -0.5 * rng.gen_range(0.3..1.2),
            c(rng, 0.1),
            c(rng, 0.2)
        )),
        vbar: Some(format!(
            "({})*xbar^2 + ({})*xbar^3*sin(ybar) + ({})*xbar^2*ybar",
            rng.gen_range(0.2..0.8),
            c(rng, 0.03),
            c(rng, 0.1)
        )),
        ..Default::default()
    };
    file(Case::B, symmetry, profile, seed)
}

pub fn random_case_c<R: Rng>(rng: &mut R, seed: u64) -> ScenarioFile {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let symmetry = SymmetryFile {
        a1: Some(format!("({}) + {}", c(rng, 1.0), time_fn(rng, 0.5))),
        a2: Some(format!("({}) + {}", sign * rng.gen_range(1.5..2.5), time_fn(rng, 0.5))),
        ..Default::default()
    };
    let profile = ProfileFile {
        psi: Some(format!(
            "({})*xbar + ({})*xbar*ybar + ({})*xbar^3 + ({})*xbar^2*sin(ybar)",
            c(rng, 1.0),
            c(rng, 0.3),
            c(rng, 0.05),
            c(rng, 0.2)
        )),
        vbar: Some(format!(
            "({})*xbar^2 + ({})*xbar*ybar + ({})*cos(xbar)",
            rng.gen_range(0.1..0.6),
            c(rng, 0.2),
            c(rng, 0.1)
        )),
        ..Default::default()
    };
    file(Case::C, symmetry, profile, seed)
}

pub fn random_file<R: Rng>(rng: &mut R, case: Case, seed: u64) -> ScenarioFile {
    match case {
        Case::A => random_case_a(rng, seed),
        Case::B => random_case_b(rng, seed),
        Case::C => random_case_c(rng, seed),
    }
}

fn candidate<R: Rng>(rng: &mut R, s: &Scenario) -> InitialCondition {
    match s.case() {
        Case::B => {
            let t0 = T_WINDOW[0];
            let beta = s.symmetry.beta().expect("Case B");
            let (b1, b2) = (beta[0].eval(0, t0).unwrap(), beta[1].eval(0, t0).unwrap());
            let (b1d, b2d) = (beta[0].eval(1, t0).unwrap(), beta[1].eval(1, t0).unwrap());
            let r = rng.gen_range(0.6..1.4);
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let ut = rng.gen_range(0.2..0.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let ur = rng.gen_range(-0.2..0.2);
            let (ct, st) = (th.cos(), th.sin());
            InitialCondition {
                x: b1 + r * ct,
                y: b2 + r * st,
                vx: b1d + ur * ct - ut * st,
                vy: b2d + ur * st + ut * ct,
            }
        }
        _ => InitialCondition {
            x: rng.gen_range(-1.0..1.0),
            y: rng.gen_range(-1.0..1.0),
            vx: rng.gen_range(-0.5..0.5),
            vy: rng.gen_range(-0.5..0.5),
        },
    }
}

/// `n` initial conditions whose trajectories stay inside the spatial window
/// over the whole time window (candidates are redrawn until they do).
pub fn initial_conditions<R: Rng>(rng: &mut R, s: &Scenario, n: usize) -> Vec<InitialCondition> {
    let opts = IntegrateOptions {
        tol: 1e-8,
        output_dt: 0.5,
        spatial: Some([SPACE, SPACE]),
    };
    let mut out = Vec::new();
    for _ in 0..50 * n {
        if out.len() == n {
            break;
        }
        let ic = candidate(rng, s);
        let st = State {
            t: T_WINDOW[0],
            x: ic.x,
            y: ic.y,
            vx: ic.vx,
            vy: ic.vy,
        };
        if integrate_with(&s.model, st, T_WINDOW[1], &opts).is_ok() {
            out.push(ic);
        }
    }
    assert_eq!(out.len(), n, "could not find {n} admissible initial conditions");
    out
}

/// `per_case` scenarios for each case with three admissible trajectories each.
pub fn suite(per_case: usize, seed: u64) -> Vec<Scenario> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for case in [Case::A, Case::B, Case::C] {
        for k in 0..per_case {
            let f = random_file(&mut rng, case, seed + k as u64);
            let name = format!("random_{case}_{k}");
            let s = f.clone().build(&name).unwrap_or_else(|e| panic!("{name}: {e}\n{f:#?}"));
            let ics = initial_conditions(&mut rng, &s, 3);
            let mut f = s.file.clone();
            f.initial_conditions = ics;
            out.push(f.build(name).unwrap());
        }
    }
    out
}

pub fn state(s: &Scenario, ic: &InitialCondition) -> State {
    State {
        t: s.file.windows.t[0],
        x: ic.x,
        y: ic.y,
        vx: ic.vx,
        vy: ic.vy,
    }
}

/// Random smooth expression in x and y, finite everywhere.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> Expr {
    let one = || Expr::num(1.0);
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => Expr::var("x"),
            1 => Expr::var("y"),
            2 => Expr::num((rng.gen_range(-2.0f64..2.0) * 100.0).round() / 100.0),
            _ => Expr::num(rng.gen_range(1..6) as f64),
        };
    }
    let sub = |rng: &mut R| random_expr(rng, depth - 1);
    match rng.gen_range(0..14) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 => sub(rng) * sub(rng),
        3 => sub(rng) / (one() + sub(rng).powi(2)),
        4 => -sub(rng),
        5 => {
            let n = rng.gen_range(2..4);
            sub(rng).powi(n)
        }
        6 => Expr::call(Func::Sin, sub(rng)),
        7 => Expr::call(Func::Cos, sub(rng)),
        8 => Expr::call(Func::Atan, sub(rng)),
        9 => Expr::call(Func::Exp, Expr::call(Func::Sin, sub(rng))),
        10 => Expr::call(Func::Ln, one() + sub(rng).powi(2)),
        11 => Expr::call(Func::Sqrt, one() + sub(rng).powi(2)),
        12 => (one() + sub(rng).powi(2)).pow(Rational::new(-3, 2)),
        _ => Expr::call(Func::Tan, Expr::call(Func::Sin, sub(rng)) * 0.5),
    }
}
