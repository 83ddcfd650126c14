//! Charged-particle motion in the constructed fields and the Noether
//! invariants along it.
//!
//! Units are those of a unit charge with unit mass: `ẍ = E₁ + ẏB`,
//! `ÿ = E₂ − ẋB`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::ode::{integrate_adaptive, DenseStep, OdeOptions, OdeStats};
use crate::scalar::{Dual3, Scalar};
use crate::symmetry::{Case, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub state: State,
    pub invariant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: OdeStats,
    pub tol: f64,
}

impl Trajectory {
    /// `max |I(t) − I(t₀)| / (1 + |I(t₀)|)`.
    pub fn max_relative_drift(&self) -> f64 {
        let i0 = self.samples[0].invariant;
        self.samples
            .iter()
            .map(|s| (s.invariant - i0).abs() / (1.0 + i0.abs()))
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &State {
        &self.samples.last().expect("trajectories are never empty").state
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,vx,vy,I")?;
        for s in &self.samples {
            let st = &s.state;
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                st.t, st.x, st.y, st.vx, st.vy, s.invariant
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub tol: f64,
    pub output_dt: f64,
    /// `[[x_min, x_max], [y_min, y_max]]`; leaving it is an error.
    pub spatial: Option<[[f64; 2]; 2]>,
}

pub fn lorentz_rhs(model: &FieldModel, s: &State) -> Result<[f64; 4]> {
    let f = model.eval(s.x, s.y, s.t)?;
    Ok([s.vx, s.vy, f.e1 + s.vy * f.b, f.e2 - s.vx * f.b])
}

/// Output times `t0, t0 + dt, …` up to and including `t1`.
pub fn output_times(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = t0 + k as f64 * dt;
        if t >= t1 - 1e-12 * (t1 - t0) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(t1);
    out
}

/// Integrate `y' = f(t, y)` and sample the dense output at `times`
/// (ascending, starting at `t0`).
fn sampled<const N: usize, F, C>(
    f: F,
    y0: [f64; N],
    times: &[f64],
    tol: f64,
    mut check: C,
) -> Result<(Vec<[f64; N]>, OdeStats)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    C: FnMut(f64, &[f64; N]) -> Result<()>,
{
    let (t0, t1) = (times[0], *times.last().expect("non-empty"));
    let mut out = vec![y0];
    let mut next = 1;
    let stats = integrate_adaptive(f, t0, y0, t1, &OdeOptions::tol(tol), |d: &DenseStep<N>| {
        check(d.t1, &d.end())?;
        while next < times.len() && times[next] <= d.t1 {
            out.push(if times[next] == d.t1 { d.end() } else { d.eval(times[next]) });
            next += 1;
        }
        Ok(())
    })?;
    Ok((out, stats))
}

pub fn integrate(model: &FieldModel, initial: State, t_end: f64, tol: f64, output_dt: f64) -> Result<Trajectory> {
    integrate_with(
        model,
        initial,
        t_end,
        &IntegrateOptions {
            tol,
            output_dt,
            spatial: None,
        },
    )
}

pub fn integrate_with(model: &FieldModel, initial: State, t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(opts.tol > 0.0 && opts.output_dt > 0.0) {
        return Err(Error::Invalid("tolerance and output interval must be positive".into()));
    }
    model.symmetry().check_time(initial.t)?;
    model.symmetry().check_time(t_end)?;
    let times = output_times(initial.t, t_end, opts.output_dt);
    let y0 = [initial.x, initial.y, initial.vx, initial.vy];
    let rhs = |t: f64, y: &[f64; 4]| {
        lorentz_rhs(
            model,
            &State {
                t,
                x: y[0],
                y: y[1],
                vx: y[2],
                vy: y[3],
            },
        )
    };
    let check = |t: f64, y: &[f64; 4]| match opts.spatial {
        Some([[x0, x1], [y0, y1]]) if !(y[0] >= x0 && y[0] <= x1 && y[1] >= y0 && y[1] <= y1) => {
            Err(Error::LeftWindow { t, x: y[0], y: y[1] })
        }
        _ => Ok(()),
    };
    let (ys, stats) = sampled(rhs, y0, &times, opts.tol, check)?;
    let samples = times
        .iter()
        .zip(ys)
        .map(|(&t, y)| {
            let state = State {
                t,
                x: y[0],
                y: y[1],
                vx: y[2],
                vy: y[3],
            };
            Ok(Sample {
                state,
                invariant: invariant(model, &state)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        samples,
        stats,
        tol: opts.tol,
    })
}

/// The Noether invariant of the model's symmetry, by its closed form.
pub fn invariant(model: &FieldModel, s: &State) -> Result<f64> {
    match model.case() {
        Case::A => invariant_a(model, s),
        Case::B => invariant_b(model, s),
        Case::C => invariant_c(model, s),
    }
}

/// `½|ρ(q̇ − α̇) − ρ̇(q − α) − Ω×q/ρ|² + V̄(x̄, ȳ)`.
pub fn invariant_a(model: &FieldModel, s: &State) -> Result<f64> {
    let sym = model.symmetry();
    let f = sym.frame_a(s.t)?;
    let c = sym.to_canonical(s.x, s.y, s.t)?;
    let w1 = f.rho * (s.vx - f.alpha_dot[0]) - f.rho_dot * (s.x - f.alpha[0]) + f.omega * s.y / f.rho;
    let w2 = f.rho * (s.vy - f.alpha_dot[1]) - f.rho_dot * (s.y - f.alpha[1]) - f.omega * s.x / f.rho;
    Ok(0.5 * (w1 * w1 + w2 * w2) + model.vbar_at(c.xbar, c.ybar)?)
}

/// `(y − β₂)(ẋ − β̇₁) − (x − β₁)(ẏ − β̇₂) + ψ(x̄, ȳ)`.
pub fn invariant_b(model: &FieldModel, s: &State) -> Result<f64> {
    let sym = model.symmetry();
    let c = sym.to_canonical(s.x, s.y, s.t)?;
    let beta = sym.beta().ok_or_else(|| Error::Invalid("not a Case B symmetry".into()))?;
    let (bx, by) = (s.x - beta[0].eval(0, s.t)?, s.y - beta[1].eval(0, s.t)?);
    let (b1d, b2d) = (beta[0].eval(1, s.t)?, beta[1].eval(1, s.t)?);
    Ok(by * (s.vx - b1d) - bx * (s.vy - b2d) + model.psi_at(c.xbar, c.ybar)?)
}

/// `−(a₁ẋ + a₂ẏ − ȧ₁x − ȧ₂y + a₂ψ(x̄, ȳ))`, with a₁ in front of ψ when the
/// axes are exchanged.
pub fn invariant_c(model: &FieldModel, s: &State) -> Result<f64> {
    let sym = model.symmetry();
    if sym.case() != Case::C {
        return Err(Error::Invalid("not a Case C symmetry".into()));
    }
    let c = sym.to_canonical(s.x, s.y, s.t)?;
    let a = sym.a();
    let (a1, a2) = (a[0].eval(0, s.t)?, a[1].eval(0, s.t)?);
    let (a1d, a2d) = (a[0].eval(1, s.t)?, a[1].eval(1, s.t)?);
    let lead = if sym.swapped() { a1 } else { a2 };
    Ok(-(a1 * s.vx + a2 * s.vy - a1d * s.x - a2d * s.y + lead * model.psi_at(c.xbar, c.ybar)?))
}

/// Total time derivatives of the canonical coordinates along `s`.
fn canonical_rates(sym: &Symmetry, s: &State) -> Result<([f64; 3], [f64; 3])> {
    let c = sym.canonical(
        Dual3::seed(s.x, Dual3::X),
        Dual3::seed(s.y, Dual3::Y),
        Dual3::seed(s.t, Dual3::T),
    )?;
    Ok((
        c.map(|v| v.value()),
        c.map(|v| v.dt() + s.vx * v.dx() + s.vy * v.dy()),
    ))
}

/// Momentum conjugate to the cyclic coordinate t̄ (Cases B and C), computed
/// from the rates of the canonical coordinates. The invariant is its negative.
pub fn cyclic_momentum(model: &FieldModel, s: &State) -> Result<f64> {
    let sym = model.symmetry();
    let ([xb, yb, _], [xb_dot, _, tb_dot]) = canonical_rates(sym, s)?;
    let psi = model.psi_at(xb, yb)?;
    match sym.case() {
        Case::A => Err(Error::Invalid("t̄ is not cyclic in Case A".into())),
        Case::B => Ok(xb * xb * tb_dot - psi),
        Case::C => {
            let a = sym.a();
            let (i1, i2) = if sym.swapped() { (1, 0) } else { (0, 1) };
            let (a1, a2) = (a[i1].eval(0, s.t)?, a[i2].eval(0, s.t)?);
            let a1d = a[i1].eval(1, s.t)?;
            Ok((a1 * a1 + a2 * a2) * tb_dot + a1 * xb_dot - a1d * xb + a2 * psi)
        }
    }
}

/// Case A state in canonical variables; `u = dq̄/dt̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub tbar: f64,
    pub xbar: f64,
    pub ybar: f64,
    pub uxbar: f64,
    pub uybar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalSample {
    pub state: CanonicalState,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalTrajectory {
    pub samples: Vec<CanonicalSample>,
    pub stats: OdeStats,
    pub tol: f64,
}

/// `q̄′ = ρ R(T)⁻¹ (q̇ − η/ρ²)`.
pub fn to_canonical_state(sym: &Symmetry, s: &State) -> Result<CanonicalState> {
    let f = sym.frame_a(s.t)?;
    let c = sym.to_canonical(s.x, s.y, s.t)?;
    let eta = f.eta(s.x, s.y);
    let r2 = f.rho * f.rho;
    let u = f.unrotate([s.vx - eta[0] / r2, s.vy - eta[1] / r2]);
    Ok(CanonicalState {
        tbar: c.tbar,
        xbar: c.xbar,
        ybar: c.ybar,
        uxbar: f.rho * u[0],
        uybar: f.rho * u[1],
    })
}

/// Inverse of [`to_canonical_state`]; `guess` seeds the search for `t`.
pub fn from_canonical_state(sym: &Symmetry, c: &CanonicalState, guess: f64) -> Result<State> {
    let t = sym.time_from_tbar(c.tbar, guess)?;
    let (x, y) = sym.from_canonical(
        crate::symmetry::CanonicalCoords {
            xbar: c.xbar,
            ybar: c.ybar,
            tbar: c.tbar,
        },
        t,
    )?;
    let f = sym.frame_a(t)?;
    let eta = f.eta(x, y);
    let r2 = f.rho * f.rho;
    let u = f.rotate([c.uxbar, c.uybar]);
    Ok(State {
        t,
        x,
        y,
        vx: eta[0] / r2 + u[0] / f.rho,
        vy: eta[1] / r2 + u[1] / f.rho,
    })
}

/// `½|q̄′|² + V̄(x̄, ȳ)`.
pub fn canonical_energy(model: &FieldModel, c: &CanonicalState) -> Result<f64> {
    let [_, vbar, ..] = model.profile_at(c.xbar, c.ybar)?;
    Ok(0.5 * (c.uxbar * c.uxbar + c.uybar * c.uybar) + vbar)
}

/// Integrate the autonomous canonical system `x̄″ = −∂x̄V̄ + ȳ′B̄`,
/// `ȳ″ = −∂ȳV̄ − x̄′B̄` and sample it at `tbar_outputs` (ascending, after the
/// initial t̄).
pub fn canonical_dynamics_a(
    model: &FieldModel,
    initial: CanonicalState,
    tbar_outputs: &[f64],
    tol: f64,
) -> Result<CanonicalTrajectory> {
    if model.case() != Case::A {
        return Err(Error::Invalid("canonical dynamics needs a Case A model".into()));
    }
    let mut times = vec![initial.tbar];
    times.extend(tbar_outputs.iter().copied().filter(|&t| t > initial.tbar));
    if times.len() < 2 {
        return Err(Error::Invalid("no output times after the initial tbar".into()));
    }
    let rhs = |_: f64, y: &[f64; 4]| {
        let [bbar, _, vx, vy] = model.profile_at(y[0], y[1])?;
        Ok([y[2], y[3], -vx + y[3] * bbar, -vy - y[2] * bbar])
    };
    let y0 = [initial.xbar, initial.ybar, initial.uxbar, initial.uybar];
    let (ys, stats) = sampled(rhs, y0, &times, tol, |_, _| Ok(()))?;
    let samples = times
        .iter()
        .zip(ys)
        .map(|(&tbar, y)| {
            let state = CanonicalState {
                tbar,
                xbar: y[0],
                ybar: y[1],
                uxbar: y[2],
                uybar: y[3],
            };
            Ok(CanonicalSample {
                state,
                energy: canonical_energy(model, &state)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicalTrajectory { samples, stats, tol })
}
