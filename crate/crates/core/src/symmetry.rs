//! Point-symmetry data, generator components and canonical group coordinates.
//!
//! Every generator handled here has the form
//! `G = ρ² ∂t + (ρρ̇x − Ωy + a₁) ∂x + (ρρ̇y + Ωx + a₂) ∂y`.
//! Case A keeps ρ, Ω free and parameterises `a` through α;
//! Case B is ρ = 0, Ω = 1 with a = (β₂, −β₁); Case C is ρ = Ω = 0.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quadrature::{cumulative, CumulativeIntegral, DEFAULT_TOL};
use crate::scalar::Scalar;

pub const DEFAULT_MIN_ABS: f64 = 1e-3;
pub const DEFAULT_R_MIN: f64 = 1e-6;
const WINDOW_SAMPLES: usize = 1001;
const WINDOW_SLACK: f64 = 1e-3;
const MAX_ORDER: usize = 4;
const CLOCK_CACHE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
    C,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::A => "A",
            Case::B => "B",
            Case::C => "C",
        };
        f.write_str(s)
    }
}

/// A function of `t` together with its symbolic derivatives up to order four.
#[derive(Debug, Clone)]
pub struct TimeFn {
    name: String,
    derivs: Vec<Expr>,
    zero: bool,
}

impl TimeFn {
    pub fn new(name: &str, expr: Expr) -> Result<TimeFn> {
        if let Some(v) = expr.variables().into_iter().find(|v| v != "t") {
            return Err(Error::Invalid(format!(
                "{name} may depend only on t, but uses `{v}`"
            )));
        }
        let zero = expr.simplify().is_zero();
        let mut derivs = vec![expr];
        for _ in 0..MAX_ORDER {
            let next = derivs.last().expect("seeded").derivative("t");
            derivs.push(next);
        }
        Ok(TimeFn {
            name: name.to_string(),
            derivs,
            zero,
        })
    }

    pub fn constant(name: &str, v: f64) -> TimeFn {
        TimeFn::new(name, Expr::num(v)).expect("constant has no variables")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &Expr {
        &self.derivs[0]
    }

    pub fn derivative_expr(&self, order: usize) -> &Expr {
        &self.derivs[order]
    }

    /// True when the function simplifies to the literal zero.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn eval(&self, order: usize, t: f64) -> Result<f64> {
        if self.zero {
            return Ok(0.0);
        }
        self.derivs[order]
            .evaluate(&[("t", t)])
            .map_err(|e| Error::expr(self.label(order), e))
    }

    /// The `order`-th derivative as a scalar carrying its own t-derivative.
    pub fn lift<S: Scalar>(&self, order: usize, t: S) -> Result<S> {
        let v = self.eval(order, t.value())?;
        if !S::TRACKS_DERIVATIVES || self.zero {
            return Ok(S::cst(v));
        }
        Ok(t.chain(v, self.eval(order + 1, t.value())?))
    }

    fn label(&self, order: usize) -> String {
        match order {
            0 => self.name.clone(),
            1 => format!("d/dt {}", self.name),
            k => format!("d^{k}/dt^{k} {}", self.name),
        }
    }
}

/// `a = ρ(ρα̇ − ρ̇α)`, for users who know α and want the generator's `a`.
pub fn a_from_alpha(rho: &Expr, alpha: &Expr) -> Expr {
    let rho_dot = rho.derivative("t");
    let alpha_dot = alpha.derivative("t");
    (rho.clone() * (rho.clone() * alpha_dot - rho_dot * alpha.clone())).simplify()
}

#[derive(Debug, Clone)]
pub enum Generator {
    A {
        rho: Expr,
        omega: Expr,
        alpha1: Expr,
        alpha2: Expr,
    },
    B {
        beta1: Expr,
        beta2: Expr,
    },
    C {
        a1: Expr,
        a2: Expr,
    },
}

#[derive(Debug, Clone)]
pub struct SymmetrySpec {
    pub generator: Generator,
    pub window: [f64; 2],
    /// Common lower limit of the Case A quadratures.
    pub t_ref: f64,
    /// Lower bound on |ρ| (Case A) or on |a₂| (Case C) across the window.
    pub min_abs: f64,
    /// Radius of the excluded disc around the Case B centre.
    pub r_min: f64,
    pub quad_tol: f64,
}

impl SymmetrySpec {
    pub fn new(generator: Generator, window: [f64; 2]) -> SymmetrySpec {
        SymmetrySpec {
            generator,
            window,
            t_ref: 0.0,
            min_abs: DEFAULT_MIN_ABS,
            r_min: DEFAULT_R_MIN,
            quad_tol: DEFAULT_TOL,
        }
    }

    pub fn case_a(rho: Expr, omega: Expr, alpha1: Expr, alpha2: Expr, window: [f64; 2]) -> Self {
        Self::new(
            Generator::A {
                rho,
                omega,
                alpha1,
                alpha2,
            },
            window,
        )
    }

    pub fn case_b(beta1: Expr, beta2: Expr, window: [f64; 2]) -> Self {
        Self::new(Generator::B { beta1, beta2 }, window)
    }

    pub fn case_c(a1: Expr, a2: Expr, window: [f64; 2]) -> Self {
        Self::new(Generator::C { a1, a2 }, window)
    }

    pub fn with_t_ref(mut self, t_ref: f64) -> Self {
        self.t_ref = t_ref;
        self
    }

    pub fn case(&self) -> Case {
        match self.generator {
            Generator::A { .. } => Case::A,
            Generator::B { .. } => Case::B,
            Generator::C { .. } => Case::C,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCoords {
    pub xbar: f64,
    pub ybar: f64,
    pub tbar: f64,
}

/// ρ (to third order), Ω and a (to second order) at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GeneratorCoefficients {
    pub rho: [f64; 4],
    pub omega: [f64; 3],
    pub a1: [f64; 3],
    pub a2: [f64; 3],
}

impl GeneratorCoefficients {
    /// `(τ, η₁, η₂)` at `(x, y)`.
    pub fn components(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let [r, rd, ..] = self.rho;
        let w = self.omega[0];
        (
            r * r,
            r * rd * x - w * y + self.a1[0],
            r * rd * y + w * x + self.a2[0],
        )
    }
}

/// Case A moving frame at one instant: the symmetry functions, their
/// derivatives and the quadratures t̄, T, δ.
#[derive(Debug, Clone, Copy)]
pub struct FrameA<S> {
    pub rho: S,
    pub rho_dot: S,
    pub rho_ddot: S,
    pub omega: S,
    pub omega_dot: S,
    pub alpha: [S; 2],
    pub alpha_dot: [S; 2],
    pub alpha_ddot: [S; 2],
    pub tbar: S,
    pub rot: S,
    pub delta: [S; 2],
}

impl<S: Scalar> FrameA<S> {
    /// `R(T)·v`.
    pub fn rotate(&self, v: [S; 2]) -> [S; 2] {
        let (c, s) = (self.rot.cos(), self.rot.sin());
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    /// `R(T)⁻¹·v`.
    pub fn unrotate(&self, v: [S; 2]) -> [S; 2] {
        let (c, s) = (self.rot.cos(), self.rot.sin());
        [c * v[0] + s * v[1], c * v[1] - s * v[0]]
    }

    /// `η = ρρ̇(q − α) + ρ²α̇ + Ω×q`.
    pub fn eta(&self, x: S, y: S) -> [S; 2] {
        let rr = self.rho * self.rho_dot;
        let r2 = self.rho * self.rho;
        [
            rr * (x - self.alpha[0]) + r2 * self.alpha_dot[0] - self.omega * y,
            rr * (y - self.alpha[1]) + r2 * self.alpha_dot[1] + self.omega * x,
        ]
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ClockReading {
    tbar: f64,
    rot: f64,
    delta: [f64; 2],
}

type Integrand = Box<dyn FnMut(f64) -> f64 + Send>;

struct Clock {
    tbar: CumulativeIntegral<Integrand>,
    rot: Option<CumulativeIntegral<Integrand>>,
    delta: Option<[CumulativeIntegral<Integrand>; 2]>,
    recent: VecDeque<(f64, ClockReading)>,
}

fn value_or_nan(f: &TimeFn, t: f64) -> f64 {
    f.eval(0, t).unwrap_or(f64::NAN)
}

impl Clock {
    fn new(rho: &TimeFn, omega: &TimeFn, alpha: &[TimeFn; 2], t_ref: f64, tol: f64) -> Clock {
        let r = rho.clone();
        let tbar: Integrand = Box::new(move |t| value_or_nan(&r, t).powi(-2));
        let rot_integrand = || -> Integrand {
            let (r, w) = (rho.clone(), omega.clone());
            Box::new(move |t| value_or_nan(&w, t) / value_or_nan(&r, t).powi(2))
        };
        let rot = (!omega.is_zero()).then(|| cumulative(rot_integrand(), t_ref, tol));
        let delta = (!omega.is_zero() && !(alpha[0].is_zero() && alpha[1].is_zero())).then(|| {
            [0, 1].map(|k| {
                let mut inner = cumulative(rot_integrand(), t_ref, tol);
                let (r, w, a) = (rho.clone(), omega.clone(), alpha.clone());
                let f: Integrand = Box::new(move |mu| {
                    let big_t = inner.value(mu).unwrap_or(f64::NAN);
                    let (c, s) = (big_t.cos(), big_t.sin());
                    let (a1, a2) = (value_or_nan(&a[0], mu), value_or_nan(&a[1], mu));
                    let scale = value_or_nan(&w, mu) / value_or_nan(&r, mu).powi(3);
                    if k == 0 {
                        scale * (a2 * c - a1 * s)
                    } else {
                        -scale * (a1 * c + a2 * s)
                    }
                });
                cumulative(f, t_ref, tol)
            })
        });
        Clock {
            tbar: cumulative(tbar, t_ref, tol),
            rot,
            delta,
            recent: VecDeque::with_capacity(CLOCK_CACHE),
        }
    }

    fn read(&mut self, t: f64) -> Result<ClockReading> {
        if let Some((_, r)) = self.recent.iter().find(|(s, _)| *s == t) {
            return Ok(*r);
        }
        let mut reading = ClockReading {
            tbar: self.tbar.value(t)?,
            ..Default::default()
        };
        if let Some(rot) = &mut self.rot {
            reading.rot = rot.value(t)?;
        }
        if let Some([d1, d2]) = &mut self.delta {
            reading.delta = [d1.value(t)?, d2.value(t)?];
        }
        if self.recent.len() == CLOCK_CACHE {
            self.recent.pop_front();
        }
        self.recent.push_back((t, reading));
        Ok(reading)
    }
}

/// Validated symmetry with compiled time functions and, for Case A, the
/// cached quadratures. Safe to share between threads.
pub struct Symmetry {
    spec: SymmetrySpec,
    case: Case,
    rho: TimeFn,
    omega: TimeFn,
    a: [TimeFn; 2],
    alpha: Option<[TimeFn; 2]>,
    beta: Option<[TimeFn; 2]>,
    swapped: bool,
    clock: Option<Mutex<Clock>>,
}

impl fmt::Debug for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symmetry")
            .field("case", &self.case)
            .field("spec", &self.spec)
            .field("swapped", &self.swapped)
            .finish_non_exhaustive()
    }
}

impl Symmetry {
    pub fn new(spec: SymmetrySpec) -> Result<Symmetry> {
        let [lo, hi] = spec.window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Invalid(format!("time window [{lo}, {hi}] is empty or not finite")));
        }
        if !(spec.min_abs > 0.0 && spec.r_min > 0.0 && spec.quad_tol > 0.0) {
            return Err(Error::Invalid("min_abs, r_min and quad_tol must be positive".into()));
        }
        let mut sym = match &spec.generator {
            Generator::A {
                rho,
                omega,
                alpha1,
                alpha2,
            } => {
                if !(spec.t_ref >= lo && spec.t_ref <= hi) {
                    return Err(Error::Invalid(format!(
                        "t_ref = {} must lie in the time window [{lo}, {hi}]",
                        spec.t_ref
                    )));
                }
                let rho = TimeFn::new("rho", rho.clone())?;
                let a = [
                    TimeFn::new("a1", a_from_alpha(rho.expr(), alpha1))?,
                    TimeFn::new("a2", a_from_alpha(rho.expr(), alpha2))?,
                ];
                Symmetry {
                    case: Case::A,
                    omega: TimeFn::new("omega", omega.clone())?,
                    alpha: Some([TimeFn::new("alpha1", alpha1.clone())?, TimeFn::new("alpha2", alpha2.clone())?]),
                    rho,
                    a,
                    beta: None,
                    swapped: false,
                    clock: None,
                    spec: spec.clone(),
                }
            }
            Generator::B { beta1, beta2 } => Symmetry {
                case: Case::B,
                rho: TimeFn::constant("rho", 0.0),
                omega: TimeFn::constant("omega", 1.0),
                a: [
                    TimeFn::new("a1", beta2.clone())?,
                    TimeFn::new("a2", (-beta1.clone()).simplify())?,
                ],
                alpha: None,
                beta: Some([TimeFn::new("beta1", beta1.clone())?, TimeFn::new("beta2", beta2.clone())?]),
                swapped: false,
                clock: None,
                spec: spec.clone(),
            },
            Generator::C { a1, a2 } => {
                let a = [TimeFn::new("a1", a1.clone())?, TimeFn::new("a2", a2.clone())?];
                Symmetry {
                    case: Case::C,
                    rho: TimeFn::constant("rho", 0.0),
                    omega: TimeFn::constant("omega", 0.0),
                    swapped: a[1].is_zero(),
                    a,
                    alpha: None,
                    beta: None,
                    clock: None,
                    spec: spec.clone(),
                }
            }
        };
        sym.validate_window()?;
        if let Some(alpha) = &sym.alpha {
            sym.clock = Some(Mutex::new(Clock::new(
                &sym.rho,
                &sym.omega,
                alpha,
                spec.t_ref,
                spec.quad_tol,
            )));
        }
        Ok(sym)
    }

    /// Sample every time function across the window: all must evaluate, and
    /// the non-degeneracy condition of the case must hold.
    fn validate_window(&self) -> Result<()> {
        let [lo, hi] = self.spec.window;
        let guarded = match self.case {
            Case::A => Some(&self.rho),
            Case::B => None,
            Case::C if self.swapped => Some(&self.a[0]),
            Case::C => Some(&self.a[1]),
        };
        let mut fns: Vec<&TimeFn> = vec![&self.rho, &self.omega, &self.a[0], &self.a[1]];
        fns.extend(self.alpha.iter().flatten());
        fns.extend(self.beta.iter().flatten());
        for i in 0..WINDOW_SAMPLES {
            let t = lo + (hi - lo) * i as f64 / (WINDOW_SAMPLES - 1) as f64;
            for f in &fns {
                for order in 0..=3 {
                    f.eval(order, t)?;
                }
            }
            if let Some(g) = guarded {
                let v = g.eval(0, t)?;
                if v.abs() < self.spec.min_abs {
                    let name = match self.case {
                        Case::A => "rho",
                        _ if self.swapped => "a1",
                        _ => "a2",
                    };
                    return Err(Error::BelowMinimum {
                        name,
                        t,
                        value: v.abs(),
                        min: self.spec.min_abs,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &SymmetrySpec {
        &self.spec
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn window(&self) -> [f64; 2] {
        self.spec.window
    }

    pub fn rho(&self) -> &TimeFn {
        &self.rho
    }

    pub fn omega(&self) -> &TimeFn {
        &self.omega
    }

    /// Generator translation coefficients `a₁, a₂`.
    pub fn a(&self) -> &[TimeFn; 2] {
        &self.a
    }

    pub fn alpha(&self) -> Option<&[TimeFn; 2]> {
        self.alpha.as_ref()
    }

    pub fn beta(&self) -> Option<&[TimeFn; 2]> {
        self.beta.as_ref()
    }

    /// Case C with a₂ ≡ 0: handled with x and y exchanged.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn r_min(&self) -> f64 {
        self.spec.r_min
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let [lo, hi] = self.spec.window;
        let slack = WINDOW_SLACK * (hi - lo);
        if t.is_finite() && t >= lo - slack && t <= hi + slack {
            Ok(())
        } else {
            Err(Error::OutOfWindow { t, lo, hi })
        }
    }

    pub fn generator_coefficients(&self, t: f64) -> Result<GeneratorCoefficients> {
        self.check_time(t)?;
        let mut g = GeneratorCoefficients::default();
        for k in 0..4 {
            g.rho[k] = self.rho.eval(k, t)?;
        }
        for k in 0..3 {
            g.omega[k] = self.omega.eval(k, t)?;
            g.a1[k] = self.a[0].eval(k, t)?;
            g.a2[k] = self.a[1].eval(k, t)?;
        }
        Ok(g)
    }

    /// `[τ, η₁, η₂]` over any scalar type.
    pub fn generator_s<S: Scalar>(&self, x: S, y: S, t: S) -> Result<[S; 3]> {
        self.check_time(t.value())?;
        let r = self.rho.lift(0, t)?;
        let rd = self.rho.lift(1, t)?;
        let w = self.omega.lift(0, t)?;
        let a1 = self.a[0].lift(0, t)?;
        let a2 = self.a[1].lift(0, t)?;
        Ok([r * r, r * rd * x - w * y + a1, r * rd * y + w * x + a2])
    }

    /// `(τ, η₁, η₂)` at `(x, y, t)`.
    pub fn generator_components(&self, x: f64, y: f64, t: f64) -> Result<(f64, f64, f64)> {
        Ok(self.generator_coefficients(t)?.components(x, y))
    }

    /// Case A frame at `t`. Panics if called on another case.
    pub fn frame_a<S: Scalar>(&self, t: S) -> Result<FrameA<S>> {
        let alpha = self.alpha.as_ref().expect("frame_a needs a Case A symmetry");
        let tv = t.value();
        self.check_time(tv)?;
        let reading = self
            .clock
            .as_ref()
            .expect("Case A owns a clock")
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .read(tv)?;
        let rho = self.rho.lift(0, t)?;
        let omega = self.omega.lift(0, t)?;
        let alpha0 = [alpha[0].lift(0, t)?, alpha[1].lift(0, t)?];
        let (tbar, rot, delta) = if S::TRACKS_DERIVATIVES {
            let (r, w) = (rho.value(), omega.value());
            let (c, s) = (reading.rot.cos(), reading.rot.sin());
            let (a1, a2) = (alpha0[0].value(), alpha0[1].value());
            let k = w / (r * r * r);
            (
                t.chain(reading.tbar, 1.0 / (r * r)),
                t.chain(reading.rot, w / (r * r)),
                [
                    t.chain(reading.delta[0], k * (a2 * c - a1 * s)),
                    t.chain(reading.delta[1], -k * (a1 * c + a2 * s)),
                ],
            )
        } else {
            (
                S::cst(reading.tbar),
                S::cst(reading.rot),
                [S::cst(reading.delta[0]), S::cst(reading.delta[1])],
            )
        };
        Ok(FrameA {
            rho,
            rho_dot: self.rho.lift(1, t)?,
            rho_ddot: self.rho.lift(2, t)?,
            omega,
            omega_dot: self.omega.lift(1, t)?,
            alpha: alpha0,
            alpha_dot: [alpha[0].lift(1, t)?, alpha[1].lift(1, t)?],
            alpha_ddot: [alpha[0].lift(2, t)?, alpha[1].lift(2, t)?],
            tbar,
            rot,
            delta,
        })
    }

    /// Case A: the time at which t̄ reaches `tbar`, by Newton iteration from
    /// `guess` (t̄ is strictly increasing with slope 1/ρ²).
    pub fn time_from_tbar(&self, tbar: f64, guess: f64) -> Result<f64> {
        let mut t = guess;
        for _ in 0..60 {
            let f = self.frame_a(t)?;
            let step = (f.tbar - tbar) * f.rho * f.rho;
            t -= step;
            if step.abs() <= 1e-15 * t.abs().max(1.0) {
                return Ok(t);
            }
        }
        Err(Error::Invalid(format!("could not invert tbar = {tbar}")))
    }

    /// Canonical coordinates `[x̄, ȳ, t̄]` over any scalar type.
    pub fn canonical<S: Scalar>(&self, x: S, y: S, t: S) -> Result<[S; 3]> {
        self.check_time(t.value())?;
        match self.case {
            Case::A => {
                let f = self.frame_a(t)?;
                let q = f.unrotate([x - f.alpha[0], y - f.alpha[1]]);
                Ok([q[0] / f.rho + f.delta[0], q[1] / f.rho + f.delta[1], f.tbar])
            }
            Case::B => {
                let beta = self.beta.as_ref().expect("Case B has beta");
                let bx = x - beta[0].lift(0, t)?;
                let by = y - beta[1].lift(0, t)?;
                let r = (bx * bx + by * by).sqrt();
                if !(r.value() >= self.spec.r_min) {
                    return Err(Error::ExcludedDisc {
                        x: x.value(),
                        y: y.value(),
                        t: t.value(),
                        r_min: self.spec.r_min,
                    });
                }
                Ok([r, t, by.atan2(bx)])
            }
            Case::C => {
                let a1 = self.a[0].lift(0, t)?;
                let a2 = self.a[1].lift(0, t)?;
                if self.swapped {
                    Ok([y - a2 * x / a1, t, x / a1])
                } else {
                    Ok([x - a1 * y / a2, t, y / a2])
                }
            }
        }
    }

    pub fn to_canonical(&self, x: f64, y: f64, t: f64) -> Result<CanonicalCoords> {
        let [xbar, ybar, tbar] = self.canonical(x, y, t)?;
        Ok(CanonicalCoords { xbar, ybar, tbar })
    }

    /// Physical position at time `t` of the point with canonical coordinates
    /// `c` (its `ybar` is implied by `t` in Cases B and C).
    pub fn from_canonical(&self, c: CanonicalCoords, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        match self.case {
            Case::A => {
                let f = self.frame_a(t)?;
                let q = f.rotate([c.xbar - f.delta[0], c.ybar - f.delta[1]]);
                Ok((f.alpha[0] + f.rho * q[0], f.alpha[1] + f.rho * q[1]))
            }
            Case::B => {
                let beta = self.beta.as_ref().expect("Case B has beta");
                if !(c.xbar >= self.spec.r_min) {
                    return Err(Error::ExcludedDisc {
                        x: f64::NAN,
                        y: f64::NAN,
                        t,
                        r_min: self.spec.r_min,
                    });
                }
                Ok((
                    beta[0].eval(0, t)? + c.xbar * c.tbar.cos(),
                    beta[1].eval(0, t)? + c.xbar * c.tbar.sin(),
                ))
            }
            Case::C => {
                let a1 = self.a[0].eval(0, t)?;
                let a2 = self.a[1].eval(0, t)?;
                if self.swapped {
                    Ok((a1 * c.tbar, c.xbar + a2 * c.tbar))
                } else {
                    Ok((c.xbar + a1 * c.tbar, a2 * c.tbar))
                }
            }
        }
    }

    /// `G f = τ f_t + η₁ f_x + η₂ f_y` by central differences with step
    /// `cbrt(ε)·max(1, |coordinate|)`.
    pub fn generator_directional_derivative<F, E>(&self, f: F, x: f64, y: f64, t: f64) -> std::result::Result<f64, E>
    where
        F: Fn(f64, f64, f64) -> std::result::Result<f64, E>,
        E: From<Error>,
    {
        let (tau, eta1, eta2) = self.generator_components(x, y, t)?;
        let step = |c: f64| f64::EPSILON.cbrt() * c.abs().max(1.0);
        let mut g = 0.0;
        if tau != 0.0 {
            let h = step(t);
            g += tau * (f(x, y, t + h)? - f(x, y, t - h)?) / (2.0 * h);
        }
        if eta1 != 0.0 {
            let h = step(x);
            g += eta1 * (f(x + h, y, t)? - f(x - h, y, t)?) / (2.0 * h);
        }
        if eta2 != 0.0 {
            let h = step(y);
            g += eta2 * (f(x, y + h, t)? - f(x, y - h, t)?) / (2.0 * h);
        }
        Ok(g)
    }
}
