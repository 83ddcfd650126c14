//! Electromagnetic fields admitting a given point symmetry, their potentials
//! and the gauge function entering the Noether invariant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::{Dual3, Scalar};
use crate::symmetry::{Case, Symmetry};

const BAR_VARS: [&str; 2] = ["xbar", "ybar"];
const PHYS_VARS: [&str; 3] = ["x", "y", "t"];

/// Free functions of the field class. `bbar` is used by Case A, `psi` by
/// Cases B and C; `vbar` by all. Profile functions take `xbar`, `ybar`;
/// `lambda` takes `x`, `y`, `t`.
#[derive(Debug, Clone)]
pub struct FieldProfile {
    pub bbar: Expr,
    pub vbar: Expr,
    pub psi: Expr,
    pub abar: Option<[Expr; 2]>,
    pub lambda: Option<Expr>,
}

impl Default for FieldProfile {
    fn default() -> Self {
        FieldProfile {
            bbar: Expr::num(0.0),
            vbar: Expr::num(0.0),
            psi: Expr::num(0.0),
            abar: None,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    E1,
    E2,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValues<S> {
    pub e1: S,
    pub e2: S,
    pub b: S,
}

impl FieldValues<Dual3> {
    pub fn values(&self) -> FieldValues<f64> {
        FieldValues {
            e1: self.e1.v,
            e2: self.e2.v,
            b: self.b.v,
        }
    }
}

fn check_vars(e: &Expr, name: &str, allowed: &[&str]) -> Result<()> {
    match e.variables().into_iter().find(|v| !allowed.contains(&v.as_str())) {
        Some(v) => Err(Error::Invalid(format!(
            "{name} may only use {}, but uses `{v}`",
            allowed.join(", ")
        ))),
        None => Ok(()),
    }
}

fn eval_bar<S: Scalar>(e: &Expr, name: &str, xb: S, yb: S) -> Result<S> {
    e.eval_with(&|v: &str| match v {
        "xbar" => Some(xb),
        "ybar" => Some(yb),
        _ => None,
    })
    .map_err(|err| Error::expr(name, err))
}

fn eval_phys<S: Scalar>(e: &Expr, name: &str, x: S, y: S, t: S) -> Result<S> {
    e.eval_with(&|v: &str| match v {
        "x" => Some(x),
        "y" => Some(y),
        "t" => Some(t),
        _ => None,
    })
    .map_err(|err| Error::expr(name, err))
}

#[derive(Debug)]
struct Profile {
    source: FieldProfile,
    bbar: Expr,
    vbar: Expr,
    vbar_x: Expr,
    vbar_y: Expr,
    psi: Expr,
    psi_x: Expr,
    psi_y: Expr,
}

impl Profile {
    fn new(p: &FieldProfile) -> Result<Profile> {
        check_vars(&p.bbar, "Bbar", &BAR_VARS)?;
        check_vars(&p.vbar, "Vbar", &BAR_VARS)?;
        check_vars(&p.psi, "psi", &BAR_VARS)?;
        if let Some([a1, a2]) = &p.abar {
            check_vars(a1, "Abar1", &BAR_VARS)?;
            check_vars(a2, "Abar2", &BAR_VARS)?;
        }
        if let Some(l) = &p.lambda {
            check_vars(l, "lambda", &PHYS_VARS)?;
        }
        Ok(Profile {
            source: p.clone(),
            bbar: p.bbar.clone(),
            vbar: p.vbar.clone(),
            vbar_x: p.vbar.derivative("xbar"),
            vbar_y: p.vbar.derivative("ybar"),
            psi: p.psi.clone(),
            psi_x: p.psi.derivative("xbar"),
            psi_y: p.psi.derivative("ybar"),
        })
    }
}

#[derive(Debug, Clone)]
struct Gauge {
    lambda: Expr,
    lx: Expr,
    ly: Expr,
    lt: Expr,
}

impl Gauge {
    fn new(lambda: Expr) -> Result<Gauge> {
        check_vars(&lambda, "lambda", &PHYS_VARS)?;
        Ok(Gauge {
            lx: lambda.derivative("x"),
            ly: lambda.derivative("y"),
            lt: lambda.derivative("t"),
            lambda,
        })
    }
}

#[derive(Debug, Clone)]
struct Perturbation {
    component: Component,
    expr: Expr,
}

#[derive(Debug)]
enum Kind {
    Symmetric,
    /// Fields given directly as functions of `(x, y, t)`.
    Explicit([Expr; 3]),
}

/// Field evaluator bound to a symmetry. Cheap to clone; safe to share.
#[derive(Debug, Clone)]
pub struct FieldModel {
    symmetry: Arc<Symmetry>,
    profile: Arc<Profile>,
    kind: Arc<Kind>,
    perturbation: Option<Perturbation>,
}

pub fn build_field_a(symmetry: Arc<Symmetry>, profile: &FieldProfile) -> Result<FieldModel> {
    expect_case(&symmetry, Case::A)?;
    FieldModel::new(symmetry, profile)
}

pub fn build_field_b(symmetry: Arc<Symmetry>, profile: &FieldProfile) -> Result<FieldModel> {
    expect_case(&symmetry, Case::B)?;
    FieldModel::new(symmetry, profile)
}

pub fn build_field_c(symmetry: Arc<Symmetry>, profile: &FieldProfile) -> Result<FieldModel> {
    expect_case(&symmetry, Case::C)?;
    FieldModel::new(symmetry, profile)
}

fn expect_case(symmetry: &Symmetry, case: Case) -> Result<()> {
    if symmetry.case() == case {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "expected a Case {case} symmetry, got Case {}",
            symmetry.case()
        )))
    }
}

impl FieldModel {
    /// Fields of the class selected by the symmetry's case.
    pub fn new(symmetry: Arc<Symmetry>, profile: &FieldProfile) -> Result<FieldModel> {
        Ok(FieldModel {
            symmetry,
            profile: Arc::new(Profile::new(profile)?),
            kind: Arc::new(Kind::Symmetric),
            perturbation: None,
        })
    }

    /// Hand-built fields, checked against `symmetry` rather than built from it.
    pub fn explicit(symmetry: Arc<Symmetry>, e1: Expr, e2: Expr, b: Expr) -> Result<FieldModel> {
        check_vars(&e1, "E1", &PHYS_VARS)?;
        check_vars(&e2, "E2", &PHYS_VARS)?;
        check_vars(&b, "B", &PHYS_VARS)?;
        Ok(FieldModel {
            symmetry,
            profile: Arc::new(Profile::new(&FieldProfile::default())?),
            kind: Arc::new(Kind::Explicit([e1, e2, b])),
            perturbation: None,
        })
    }

    /// Add `expr(x, y, t)` to one field component.
    pub fn with_perturbation(mut self, component: Component, expr: Expr) -> Result<FieldModel> {
        check_vars(&expr, "perturbation", &PHYS_VARS)?;
        self.perturbation = Some(Perturbation { component, expr });
        Ok(self)
    }

    pub fn symmetry(&self) -> &Arc<Symmetry> {
        &self.symmetry
    }

    pub fn case(&self) -> Case {
        self.symmetry.case()
    }

    pub fn profile(&self) -> &FieldProfile {
        &self.profile.source
    }

    pub fn is_perturbed(&self) -> bool {
        self.perturbation.is_some()
    }

    pub fn is_explicit(&self) -> bool {
        matches!(*self.kind, Kind::Explicit(_))
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<FieldValues<f64>> {
        self.eval_s(x, y, t)
    }

    /// Fields with exact first partials in `(x, y, t)`.
    pub fn jet(&self, x: f64, y: f64, t: f64) -> Result<FieldValues<Dual3>> {
        self.eval_s(
            Dual3::seed(x, Dual3::X),
            Dual3::seed(y, Dual3::Y),
            Dual3::seed(t, Dual3::T),
        )
    }

    pub fn vbar_at(&self, xbar: f64, ybar: f64) -> Result<f64> {
        eval_bar(&self.profile.vbar, "Vbar", xbar, ybar)
    }

    pub fn psi_at(&self, xbar: f64, ybar: f64) -> Result<f64> {
        eval_bar(&self.profile.psi, "psi", xbar, ybar)
    }

    /// `(B̄, V̄, ∂x̄V̄, ∂ȳV̄)` at a canonical point (Case A profile).
    pub fn profile_at(&self, xbar: f64, ybar: f64) -> Result<[f64; 4]> {
        let p = &self.profile;
        Ok([
            eval_bar(&p.bbar, "Bbar", xbar, ybar)?,
            eval_bar(&p.vbar, "Vbar", xbar, ybar)?,
            eval_bar(&p.vbar_x, "d/dxbar Vbar", xbar, ybar)?,
            eval_bar(&p.vbar_y, "d/dybar Vbar", xbar, ybar)?,
        ])
    }

    pub fn eval_s<S: Scalar>(&self, x: S, y: S, t: S) -> Result<FieldValues<S>> {
        let mut f = match &*self.kind {
            Kind::Explicit([e1, e2, b]) => {
                self.symmetry.check_time(t.value())?;
                FieldValues {
                    e1: eval_phys(e1, "E1", x, y, t)?,
                    e2: eval_phys(e2, "E2", x, y, t)?,
                    b: eval_phys(b, "B", x, y, t)?,
                }
            }
            Kind::Symmetric => match self.case() {
                Case::A => self.fields_a(x, y, t)?,
                Case::B => self.fields_b(x, y, t)?,
                Case::C if self.symmetry.swapped() => {
                    let p = self.fields_c(y, x, t, 1, 0)?;
                    FieldValues {
                        e1: p.e2,
                        e2: p.e1,
                        b: -p.b,
                    }
                }
                Case::C => self.fields_c(x, y, t, 0, 1)?,
            },
        };
        if let Some(p) = &self.perturbation {
            let d = eval_phys(&p.expr, "perturbation", x, y, t)?;
            match p.component {
                Component::E1 => f.e1 = f.e1 + d,
                Component::E2 => f.e2 = f.e2 + d,
                Component::B => f.b = f.b + d,
            }
        }
        Ok(f)
    }

    fn fields_a<S: Scalar>(&self, x: S, y: S, t: S) -> Result<FieldValues<S>> {
        let p = &self.profile;
        let f = self.symmetry.frame_a(t)?;
        let q = f.unrotate([x - f.alpha[0], y - f.alpha[1]]);
        let (xb, yb) = (q[0] / f.rho + f.delta[0], q[1] / f.rho + f.delta[1]);
        let bbar = eval_bar(&p.bbar, "Bbar", xb, yb)?;
        let ebar = [-eval_bar(&p.vbar_x, "d/dxbar Vbar", xb, yb)?, -eval_bar(&p.vbar_y, "d/dybar Vbar", xb, yb)?];
        let (r, rd, w) = (f.rho, f.rho_dot, f.omega);
        let r2 = r * r;
        let r3 = r2 * r;
        let r4 = r2 * r2;
        let two = S::cst(2.0);
        let eta = f.eta(x, y);
        let re = f.rotate(ebar);
        let k = r * f.omega_dot - two * rd * w;
        let e1 = f.alpha_ddot[0] + f.rho_ddot / r * (x - f.alpha[0]) + w * w * x / r4 - k * y / r3
            + w / r3 * (r * f.alpha_dot[1] - rd * f.alpha[1])
            + re[0] / r3
            - eta[1] * bbar / r4;
        let e2 = f.alpha_ddot[1] + f.rho_ddot / r * (y - f.alpha[1]) + w * w * y / r4 + k * x / r3
            - w / r3 * (r * f.alpha_dot[0] - rd * f.alpha[0])
            + re[1] / r3
            + eta[0] * bbar / r4;
        Ok(FieldValues {
            e1,
            e2,
            b: (bbar - two * w) / r2,
        })
    }

    fn fields_b<S: Scalar>(&self, x: S, y: S, t: S) -> Result<FieldValues<S>> {
        let p = &self.profile;
        let [xb, yb, _] = self.symmetry.canonical(x, y, t)?;
        let beta = self.symmetry.beta().expect("Case B has beta");
        let (bx, by) = (x - beta[0].lift(0, t)?, y - beta[1].lift(0, t)?);
        let bbar = -eval_bar(&p.psi_x, "d/dxbar psi", xb, yb)? / xb;
        let ebar1 = -eval_bar(&p.vbar_x, "d/dxbar Vbar", xb, yb)? / xb;
        let ebar2 = eval_bar(&p.psi_y, "d/dybar psi", xb, yb)? / (xb * xb);
        Ok(FieldValues {
            e1: beta[0].lift(2, t)? - beta[1].lift(1, t)? * bbar + bx * ebar1 - by * ebar2,
            e2: beta[1].lift(2, t)? + beta[0].lift(1, t)? * bbar + bx * ebar2 + by * ebar1,
            b: bbar,
        })
    }

    /// Case C fields in the frame where `a[i1]` plays a₁ and `a[i2]` plays a₂.
    fn fields_c<S: Scalar>(&self, x: S, y: S, t: S, i1: usize, i2: usize) -> Result<FieldValues<S>> {
        let p = &self.profile;
        self.symmetry.check_time(t.value())?;
        let a = self.symmetry.a();
        let (a1, a1d, a1dd) = (a[i1].lift(0, t)?, a[i1].lift(1, t)?, a[i1].lift(2, t)?);
        let (a2, a2d, a2dd) = (a[i2].lift(0, t)?, a[i2].lift(1, t)?, a[i2].lift(2, t)?);
        let (xb, yb) = (x - a1 * y / a2, t);
        let bbar = eval_bar(&p.psi_x, "d/dxbar psi", xb, yb)?;
        let vbar_x = eval_bar(&p.vbar_x, "d/dxbar Vbar", xb, yb)?;
        let psi = eval_bar(&p.psi, "psi", xb, yb)?;
        let psi_y = eval_bar(&p.psi_y, "d/dybar psi", xb, yb)?;
        let ebar1 = -vbar_x;
        let ebar2 = a1dd / a2 * xb - a2d / a2 * psi - psi_y + a1 / a2 * vbar_x;
        Ok(FieldValues {
            e1: a1dd * y / a2 - a2d * y * bbar / a2 + ebar1,
            e2: a2dd * y / a2 + a1d * y * bbar / a2 + ebar2,
            b: bbar,
        })
    }

    /// Case A electric field from the compact rotating-frame formula
    /// `E = [ρ(ρη_t − ρ̇η) + η×Ω]/ρ⁴ + R(T)Ē/ρ³ + B̄×η/ρ⁴`.
    pub fn electric_field_vector_form_a(&self, x: f64, y: f64, t: f64) -> Result<(f64, f64)> {
        expect_case(&self.symmetry, Case::A)?;
        let p = &self.profile;
        let f = self.symmetry.frame_a(t)?;
        // η_t at fixed q, by forward-mode differentiation in t alone
        let ft = self.symmetry.frame_a(Dual3::seed(t, Dual3::T))?;
        let eta_t = ft.eta(Dual3::constant(x), Dual3::constant(y)).map(|v| v.dt());
        let eta = f.eta(x, y);
        let q = f.unrotate([x - f.alpha[0], y - f.alpha[1]]);
        let (xb, yb) = (q[0] / f.rho + f.delta[0], q[1] / f.rho + f.delta[1]);
        let bbar = eval_bar(&p.bbar, "Bbar", xb, yb)?;
        let ebar = [-eval_bar(&p.vbar_x, "d/dxbar Vbar", xb, yb)?, -eval_bar(&p.vbar_y, "d/dybar Vbar", xb, yb)?];
        let re = f.rotate(ebar);
        let (r, rd, w) = (f.rho, f.rho_dot, f.omega);
        let r3 = r * r * r;
        let r4 = r3 * r;
        let e1 = (r * (r * eta_t[0] - rd * eta[0]) + eta[1] * w) / r4 + re[0] / r3 - bbar * eta[1] / r4;
        let e2 = (r * (r * eta_t[1] - rd * eta[1]) - eta[0] * w) / r4 + re[1] / r3 + bbar * eta[0] / r4;
        Ok((e1, e2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials<S> {
    pub a1: S,
    pub a2: S,
    pub v: S,
    pub f: S,
}

/// Vector potential, scalar potential and the gauge term `F` of the Noether
/// invariant, optionally shifted by a gauge function λ.
#[derive(Debug, Clone)]
pub struct PotentialSet {
    model: FieldModel,
    gauge: Option<Gauge>,
}

/// Potentials for an unperturbed symmetric field model, with the profile's
/// gauge function (if any).
pub fn build_potentials(model: &FieldModel) -> Result<PotentialSet> {
    if model.is_explicit() {
        return Err(Error::PotentialsUnavailable("fields were given explicitly".into()));
    }
    if model.case() == Case::A && model.profile.source.abar.is_none() {
        return Err(Error::PotentialsUnavailable(
            "Case A needs Abar1 and Abar2 with curl equal to Bbar".into(),
        ));
    }
    let gauge = model.profile.source.lambda.clone().map(Gauge::new).transpose()?;
    let mut unperturbed = model.clone();
    unperturbed.perturbation = None;
    Ok(PotentialSet {
        model: unperturbed,
        gauge,
    })
}

impl PotentialSet {
    pub fn with_gauge(&self, lambda: Expr) -> Result<PotentialSet> {
        Ok(PotentialSet {
            model: self.model.clone(),
            gauge: Some(Gauge::new(lambda)?),
        })
    }

    pub fn without_gauge(&self) -> PotentialSet {
        PotentialSet {
            model: self.model.clone(),
            gauge: None,
        }
    }

    pub fn gauge(&self) -> Option<&Expr> {
        self.gauge.as_ref().map(|g| &g.lambda)
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<Potentials<f64>> {
        self.eval_s(x, y, t)
    }

    pub fn jet(&self, x: f64, y: f64, t: f64) -> Result<Potentials<Dual3>> {
        self.eval_s(
            Dual3::seed(x, Dual3::X),
            Dual3::seed(y, Dual3::Y),
            Dual3::seed(t, Dual3::T),
        )
    }

    pub fn eval_s<S: Scalar>(&self, x: S, y: S, t: S) -> Result<Potentials<S>> {
        let sym = &self.model.symmetry;
        let mut p = match sym.case() {
            Case::A => self.potentials_a(x, y, t)?,
            Case::B => self.potentials_b(x, y, t)?,
            Case::C if sym.swapped() => {
                let p = self.potentials_c(y, x, t, 1, 0)?;
                Potentials {
                    a1: p.a2,
                    a2: p.a1,
                    ..p
                }
            }
            Case::C => self.potentials_c(x, y, t, 0, 1)?,
        };
        if let Some(g) = &self.gauge {
            let lx = eval_phys(&g.lx, "d/dx lambda", x, y, t)?;
            let ly = eval_phys(&g.ly, "d/dy lambda", x, y, t)?;
            let lt = eval_phys(&g.lt, "d/dt lambda", x, y, t)?;
            let [tau, eta1, eta2] = sym.generator_s(x, y, t)?;
            p.a1 = p.a1 + lx;
            p.a2 = p.a2 + ly;
            p.v = p.v - lt;
            p.f = p.f + tau * lt + eta1 * lx + eta2 * ly;
        }
        Ok(p)
    }

    /// `I = τ(½|q̇|² + V) − η·(q̇ + A) + F`.
    pub fn invariant(&self, x: f64, y: f64, vx: f64, vy: f64, t: f64) -> Result<f64> {
        let p = self.eval(x, y, t)?;
        let (tau, eta1, eta2) = self.model.symmetry.generator_components(x, y, t)?;
        Ok(tau * (0.5 * (vx * vx + vy * vy) + p.v) - eta1 * (vx + p.a1) - eta2 * (vy + p.a2) + p.f)
    }

    fn potentials_a<S: Scalar>(&self, x: S, y: S, t: S) -> Result<Potentials<S>> {
        let prof = &self.model.profile;
        let [ab1, ab2] = prof.source.abar.as_ref().expect("checked at construction");
        let f = self.model.symmetry.frame_a(t)?;
        let q = f.unrotate([x - f.alpha[0], y - f.alpha[1]]);
        let (xb, yb) = (q[0] / f.rho + f.delta[0], q[1] / f.rho + f.delta[1]);
        let ra = f.rotate([eval_bar(ab1, "Abar1", xb, yb)?, eval_bar(ab2, "Abar2", xb, yb)?]);
        let vbar = eval_bar(&prof.vbar, "Vbar", xb, yb)?;
        let (r, rd, rdd, w) = (f.rho, f.rho_dot, f.rho_ddot, f.omega);
        let r2 = r * r;
        let r3 = r2 * r;
        let r4 = r2 * r2;
        let half = S::cst(0.5);
        let c = [0, 1].map(|i| r * f.alpha_dot[i] - rd * f.alpha[i]);
        let d = [0, 1].map(|i| r * f.alpha_ddot[i] - rdd * f.alpha[i]);
        let q2 = x * x + y * y;
        let eta = f.eta(x, y);
        let dq = d[0] * x + d[1] * y;
        let cq = c[0] * x + c[1] * y;
        // (c × Ω)·q, which equals c·(Ω × q)
        let cwq = w * (c[1] * x - c[0] * y);
        let v = -dq / r - rdd * q2 * half / r - cwq / r3 - w * w * q2 * half / r4
            + vbar / r2
            + (eta[0] * ra[0] + eta[1] * ra[1]) / r3;
        let fgauge = half * (c[0] * c[0] + c[1] * c[1]) + rd * cq + r * dq + half * (rd * rd + r * rdd) * q2
            + cwq / r;
        Ok(Potentials {
            a1: y * w / r2 + ra[0] / r,
            a2: -x * w / r2 + ra[1] / r,
            v,
            f: fgauge,
        })
    }

    fn potentials_b<S: Scalar>(&self, x: S, y: S, t: S) -> Result<Potentials<S>> {
        let prof = &self.model.profile;
        let sym = &self.model.symmetry;
        let [xb, yb, _] = sym.canonical(x, y, t)?;
        let beta = sym.beta().expect("Case B has beta");
        let (bx, by) = (x - beta[0].lift(0, t)?, y - beta[1].lift(0, t)?);
        let (b1d, b2d) = (beta[0].lift(1, t)?, beta[1].lift(1, t)?);
        let (b1dd, b2dd) = (beta[0].lift(2, t)?, beta[1].lift(2, t)?);
        let psi_r2 = eval_bar(&prof.psi, "psi", xb, yb)? / (xb * xb);
        let vbar = eval_bar(&prof.vbar, "Vbar", xb, yb)?;
        Ok(Potentials {
            a1: by * psi_r2,
            a2: -bx * psi_r2,
            v: -b1dd * bx - b2dd * by + vbar + (b1d * by - b2d * bx) * psi_r2,
            f: b2d * bx - b1d * by,
        })
    }

    fn potentials_c<S: Scalar>(&self, x: S, y: S, t: S, i1: usize, i2: usize) -> Result<Potentials<S>> {
        let prof = &self.model.profile;
        let sym = &self.model.symmetry;
        sym.check_time(t.value())?;
        let a = sym.a();
        let (a1, a1d, a1dd) = (a[i1].lift(0, t)?, a[i1].lift(1, t)?, a[i1].lift(2, t)?);
        let (a2, a2d, a2dd) = (a[i2].lift(0, t)?, a[i2].lift(1, t)?, a[i2].lift(2, t)?);
        let (xb, yb) = (x - a1 * y / a2, t);
        let psi = eval_bar(&prof.psi, "psi", xb, yb)?;
        let vbar = eval_bar(&prof.vbar, "Vbar", xb, yb)?;
        let v = -a1dd * x * y / a2 + (a1 * a1dd - a2 * a2dd) * y * y / (S::cst(2.0) * a2 * a2) + vbar
            + a2d * y * psi / a2;
        Ok(Potentials {
            a1: S::cst(0.0),
            a2: psi,
            v,
            f: a1d * x + a2d * y,
        })
    }
}
