//! Grid residuals of the identities the constructed fields must satisfy.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Trajectory};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{FieldModel, FieldValues, PotentialSet};
use crate::scalar::Scalar;
use crate::symmetry::Case;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_FD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Windows {
    pub t: [f64; 2],
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub windows: Windows,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

impl Grid {
    pub fn new(windows: Windows, nx: usize, ny: usize, nt: usize) -> Grid {
        Grid { windows, nx, ny, nt }
    }

    /// 20 × 20 spatial by 10 time samples.
    pub fn standard(windows: Windows) -> Grid {
        Grid::new(windows, 20, 20, 10)
    }

    /// Points `[x, y, t]`, time outermost.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let w = &self.windows;
        let mut out = Vec::with_capacity(self.nx * self.ny * self.nt);
        for t in linspace(w.t[0], w.t[1], self.nt) {
            for y in linspace(w.y[0], w.y[1], self.ny) {
                for x in linspace(w.x[0], w.x[1], self.nx) {
                    out.push([x, y, t]);
                }
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        let w = &self.windows;
        format!(
            "{}x{}x{} over x in [{}, {}], y in [{}, {}], t in [{}, {}]",
            self.nx, self.ny, self.nt, w.x[0], w.x[1], w.y[0], w.y[1], w.t[0], w.t[1]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Forward-mode dual numbers through the canonical map.
    Exact,
    /// Central differences with step `cbrt(ε)·max(1, |coordinate|)`.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity: String,
    pub mode: DerivativeMode,
    pub grid: String,
    pub points: usize,
    /// Grid points inside an excluded region.
    pub skipped: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub argmax: [f64; 3],
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
}

/// One residual per identity at one point, plus the magnitude entering the scale.
struct PointResult<const K: usize> {
    at: [f64; 3],
    residuals: [f64; K],
    magnitude: f64,
}

fn evaluate_grid<const K: usize, F>(points: &[[f64; 3]], f: F) -> Result<(Vec<PointResult<K>>, usize)>
where
    F: Fn([f64; 3]) -> Result<([f64; K], f64)> + Sync,
{
    let results: Vec<Result<Option<PointResult<K>>>> = points
        .par_iter()
        .map(|&p| match f(p) {
            Ok((residuals, magnitude)) => Ok(Some(PointResult {
                at: p,
                residuals,
                magnitude,
            })),
            Err(Error::ExcludedDisc { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut kept = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(p) => kept.push(p),
            None => skipped += 1,
        }
    }
    Ok((kept, skipped))
}

fn reports<const K: usize>(
    names: [&str; K],
    mode: DerivativeMode,
    grid: &str,
    tol: f64,
    results: &[PointResult<K>],
    skipped: usize,
) -> Result<[ResidualReport; K]> {
    if results.is_empty() {
        return Err(Error::Invalid("no grid point lies outside the excluded region".into()));
    }
    let scale = 1.0 + results.iter().map(|p| p.magnitude).fold(0.0, f64::max);
    Ok(std::array::from_fn(|k| {
        let mut max_abs = 0.0;
        let mut argmax = results[0].at;
        let mut sum = 0.0;
        for p in results {
            let r = p.residuals[k].abs();
            sum += r;
            // NaN residuals must surface as failures
            if r > max_abs || r.is_nan() {
                max_abs = r;
                argmax = p.at;
            }
        }
        ResidualReport {
            identity: names[k].to_string(),
            mode,
            grid: grid.to_string(),
            points: results.len(),
            skipped,
            max_abs,
            mean_abs: sum / results.len() as f64,
            argmax,
            scale,
            tol,
            pass: max_abs <= tol * scale,
        }
    }))
}

/// Field values and their `x`, `y`, `t` partials.
struct FieldJet {
    v: [f64; 3],
    d: [[f64; 3]; 3],
}

fn fd_step(c: f64) -> f64 {
    f64::EPSILON.cbrt() * c.abs().max(1.0)
}

fn field_jet(model: &FieldModel, p: [f64; 3], mode: DerivativeMode) -> Result<FieldJet> {
    let comps = |f: FieldValues<f64>| [f.e1, f.e2, f.b];
    match mode {
        DerivativeMode::Exact => {
            let j = model.jet(p[0], p[1], p[2])?;
            let c = [j.e1, j.e2, j.b];
            Ok(FieldJet {
                v: c.map(|s| s.value()),
                d: c.map(|s| s.d),
            })
        }
        DerivativeMode::FiniteDifference => {
            let v = comps(model.eval(p[0], p[1], p[2])?);
            let mut d = [[0.0; 3]; 3];
            for axis in 0..3 {
                let h = fd_step(p[axis]);
                let (mut hi, mut lo) = (p, p);
                hi[axis] += h;
                lo[axis] -= h;
                let fh = comps(model.eval(hi[0], hi[1], hi[2])?);
                let fl = comps(model.eval(lo[0], lo[1], lo[2])?);
                for k in 0..3 {
                    d[k][axis] = (fh[k] - fl[k]) / (2.0 * h);
                }
            }
            Ok(FieldJet { v, d })
        }
    }
}

pub const NOETHER_NAMES: [&str; 3] = ["noether_magnetic", "noether_electric_x", "noether_electric_y"];

/// Residuals of the three conditions for `G` to be a Noether symmetry of the
/// Lorentz system with fields `(E, B)`.
pub fn noether_residuals(model: &FieldModel, grid: &Grid, mode: DerivativeMode, tol: f64) -> Result<[ResidualReport; 3]> {
    let sym = model.symmetry();
    let (results, skipped) = evaluate_grid(&grid.points(), |p| {
        let [x, y, t] = p;
        let g = sym.generator_coefficients(t)?;
        let (gv, gf) = match mode {
            DerivativeMode::Exact => {
                let j = field_jet(model, p, mode)?;
                let (tau, eta1, eta2) = g.components(x, y);
                let gd = |k: usize| tau * j.d[k][2] + eta1 * j.d[k][0] + eta2 * j.d[k][1];
                (j.v, [gd(0), gd(1), gd(2)])
            }
            DerivativeMode::FiniteDifference => {
                let f = model.eval(x, y, t)?;
                let along = |k: usize| {
                    sym.generator_directional_derivative(
                        |x, y, t| {
                            let f = model.eval(x, y, t)?;
                            Ok::<_, Error>([f.e1, f.e2, f.b][k])
                        },
                        x,
                        y,
                        t,
                    )
                };
                ([f.e1, f.e2, f.b], [along(0)?, along(1)?, along(2)?])
            }
        };
        let [e1, e2, b] = gv;
        let [r, rd, rdd, rddd] = g.rho;
        let [w, wd, wdd] = g.omega;
        let rr = r * rd;
        let s2 = r * rdd + rd * rd;
        let s3 = r * rddd + 3.0 * rd * rdd;
        let magnetic = gf[2] + 2.0 * rr * b + 2.0 * wd;
        let electric_x = gf[0] + 3.0 * rr * e1 + w * e2 + (s2 * y + wd * x + g.a2[1]) * b - s3 * x + wdd * y - g.a1[2];
        let electric_y = gf[1] + 3.0 * rr * e2 - w * e1 - (s2 * x - wd * y + g.a1[1]) * b - s3 * y - wdd * x - g.a2[2];
        let magnitude = e1.abs().max(e2.abs()).max(b.abs());
        Ok(([magnetic, electric_x, electric_y], magnitude))
    })?;
    reports(NOETHER_NAMES, mode, &grid.describe(), tol, &results, skipped)
}

/// `∂x E₂ − ∂y E₁ + ∂t B`.
pub fn faraday_residual(model: &FieldModel, grid: &Grid, mode: DerivativeMode, tol: f64) -> Result<ResidualReport> {
    let (results, skipped) = evaluate_grid(&grid.points(), |p| {
        let j = field_jet(model, p, mode)?;
        let magnitude = j.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(([j.d[1][0] - j.d[0][1] + j.d[2][2]], magnitude))
    })?;
    let [r] = reports(["faraday"], mode, &grid.describe(), tol, &results, skipped)?;
    Ok(r)
}

pub const POTENTIAL_NAMES: [&str; 3] = ["potential_e1", "potential_e2", "potential_b"];

/// `E₁ + ∂xV + ∂tA₁`, `E₂ + ∂yV + ∂tA₂`, `B − (∂xA₂ − ∂yA₁)`.
pub fn potential_residuals(
    potentials: &PotentialSet,
    grid: &Grid,
    mode: DerivativeMode,
    tol: f64,
) -> Result<[ResidualReport; 3]> {
    let model = potentials.model();
    let (results, skipped) = evaluate_grid(&grid.points(), |p| {
        let [x, y, t] = p;
        let f = model.eval(x, y, t)?;
        // [a1, a2, v] partials, indexed [component][axis]
        let d: [[f64; 3]; 3] = match mode {
            DerivativeMode::Exact => {
                let j = potentials.jet(x, y, t)?;
                [j.a1.d, j.a2.d, j.v.d]
            }
            DerivativeMode::FiniteDifference => {
                let mut d = [[0.0; 3]; 3];
                for axis in 0..3 {
                    let h = fd_step(p[axis]);
                    let (mut hi, mut lo) = (p, p);
                    hi[axis] += h;
                    lo[axis] -= h;
                    let ph = potentials.eval(hi[0], hi[1], hi[2])?;
                    let pl = potentials.eval(lo[0], lo[1], lo[2])?;
                    d[0][axis] = (ph.a1 - pl.a1) / (2.0 * h);
                    d[1][axis] = (ph.a2 - pl.a2) / (2.0 * h);
                    d[2][axis] = (ph.v - pl.v) / (2.0 * h);
                }
                d
            }
        };
        let magnitude = f.e1.abs().max(f.e2.abs()).max(f.b.abs());
        Ok((
            [
                f.e1 + d[2][0] + d[0][2],
                f.e2 + d[2][1] + d[1][2],
                f.b - (d[1][0] - d[0][1]),
            ],
            magnitude,
        ))
    })?;
    reports(POTENTIAL_NAMES, mode, &grid.describe(), tol, &results, skipped)
}

/// Case A: `∂x̄Ā₂ − ∂ȳĀ₁ − B̄` at the canonical images of the grid points.
pub fn abar_curl(model: &FieldModel, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    let profile = model.profile();
    let Some([ab1, ab2]) = &profile.abar else {
        return Err(Error::PotentialsUnavailable("Abar1 and Abar2 are not given".into()));
    };
    let curl = (ab2.derivative("xbar") - ab1.derivative("ybar") - profile.bbar.clone()).simplify();
    let bbar = profile.bbar.clone();
    let sym = model.symmetry();
    let eval = |e: &Expr, xb: f64, yb: f64| {
        e.evaluate(&[("xbar", xb), ("ybar", yb)])
            .map_err(|err| Error::expr("Abar curl", err))
    };
    let (results, skipped) = evaluate_grid(&grid.points(), |[x, y, t]| {
        let c = sym.to_canonical(x, y, t)?;
        Ok(([eval(&curl, c.xbar, c.ybar)?], eval(&bbar, c.xbar, c.ybar)?.abs()))
    })?;
    let [r] = reports(["abar_curl"], DerivativeMode::Exact, &grid.describe(), tol, &results, skipped)?;
    Ok(r)
}

/// A smooth gauge function of `(x, y, t)` with coefficients drawn from `rng`.
pub fn random_gauge<R: Rng + ?Sized>(rng: &mut R) -> Expr {
    let c: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let text = format!(
        "({})*x*y + ({})*x*sin(t) + ({})*y^2*t + ({})*cos(x - ({})*y)",
        c[0], c[1], c[2], c[3], c[4]
    );
    crate::expr::parse(&text).expect("gauge template parses")
}

/// Compare the invariant computed from potentials under several gauges with
/// the closed form, sample by sample along a trajectory.
pub fn gauge_independence_check(
    potentials: &PotentialSet,
    gauges: &[Expr],
    trajectory: &Trajectory,
    tol: f64,
) -> Result<ResidualReport> {
    let model = potentials.model();
    let sets: Vec<PotentialSet> = std::iter::once(Ok(potentials.clone()))
        .chain(gauges.iter().map(|g| potentials.with_gauge(g.clone())))
        .collect::<Result<_>>()?;
    let mut results = Vec::with_capacity(trajectory.samples.len());
    for s in &trajectory.samples {
        let st = s.state;
        let mut values = vec![dynamics::invariant(model, &st)?];
        for p in &sets {
            values.push(p.invariant(st.x, st.y, st.vx, st.vy, st.t)?);
        }
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let magnitude = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        results.push(PointResult {
            at: [st.x, st.y, st.t],
            residuals: [hi - lo],
            magnitude,
        });
    }
    let desc = format!("{} trajectory samples, {} gauges", results.len(), sets.len());
    let [r] = reports(["gauge_invariant"], DerivativeMode::Exact, &desc, tol, &results, 0)?;
    Ok(r)
}

/// Every grid identity applicable to the model: the Noether system and
/// Faraday's law in both derivative modes, plus potential reconstruction
/// when potentials exist.
pub fn verify_model(model: &FieldModel, grid: &Grid, tol: f64, fd_tol: f64) -> Result<Vec<ResidualReport>> {
    let mut out = Vec::new();
    for (mode, tol) in [(DerivativeMode::Exact, tol), (DerivativeMode::FiniteDifference, fd_tol)] {
        out.extend(noether_residuals(model, grid, mode, tol)?);
        out.push(faraday_residual(model, grid, mode, tol)?);
    }
    if model.is_explicit() {
        return Ok(out);
    }
    if model.case() == Case::A {
        if model.profile().abar.is_none() {
            return Ok(out);
        }
        let curl = abar_curl(model, grid, tol)?;
        let ok = curl.pass;
        out.push(curl);
        if !ok {
            return Ok(out);
        }
    }
    let potentials = crate::fields::build_potentials(model)?;
    out.extend(potential_residuals(&potentials, grid, DerivativeMode::Exact, tol)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, State};
    use crate::expr::parse;
    use crate::fields::{build_field_a, build_field_b, build_field_c, build_potentials, Component, FieldProfile};
    use crate::symmetry::{Symmetry, SymmetrySpec};
    use rand::SeedableRng;
    use std::sync::Arc;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn windows() -> Windows {
        Windows {
            t: [0.0, 2.0],
            x: [-1.5, 1.5],
            y: [-1.5, 1.5],
        }
    }

    fn small_grid() -> Grid {
        Grid::new(windows(), 8, 8, 5)
    }

    fn time_translation() -> Arc<Symmetry> {
        Arc::new(Symmetry::new(SymmetrySpec::case_a(e("1"), e("0"), e("0"), e("0"), [0.0, 2.0])).unwrap())
    }

    fn profile(bbar: &str, vbar: &str, psi: &str) -> FieldProfile {
        FieldProfile {
            bbar: e(bbar),
            vbar: e(vbar),
            psi: e(psi),
            ..Default::default()
        }
    }

    fn all_pass(model: &FieldModel, fd_tol: f64) {
        for r in verify_model(model, &Grid::standard(windows()), DEFAULT_TOL, fd_tol).unwrap() {
            assert!(r.pass, "{r:?}");
            assert!(r.max_abs >= r.mean_abs && r.mean_abs >= 0.0);
        }
    }

    #[test]
    fn grid_layout() {
        let g = Grid::new(windows(), 3, 2, 2);
        let p = g.points();
        assert_eq!(p.len(), 12);
        assert_eq!(p[0], [-1.5, -1.5, 0.0]);
        assert_eq!(p[2], [1.5, -1.5, 0.0]);
        assert_eq!(p[11], [1.5, 1.5, 2.0]);
    }

    #[test]
    fn static_uniform_field_has_zero_residuals() {
        let m = FieldModel::explicit(time_translation(), e("0"), e("0"), e("0.8")).unwrap();
        for mode in [DerivativeMode::Exact, DerivativeMode::FiniteDifference] {
            for r in noether_residuals(&m, &small_grid(), mode, DEFAULT_TOL).unwrap() {
                assert!(r.max_abs <= 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn magnetic_residual_sees_time_dependence_only() {
        let eps = 1e-2;
        let base = build_field_a(time_translation(), &profile("0.8", "0", "0")).unwrap();
        let px = base.clone().with_perturbation(Component::B, e(&format!("{eps}*x"))).unwrap();
        let [r, ..] = noether_residuals(&px, &small_grid(), DerivativeMode::Exact, DEFAULT_TOL).unwrap();
        assert_eq!(r.max_abs, 0.0);
        let pt = base.with_perturbation(Component::B, e(&format!("{eps}*t"))).unwrap();
        let [r, ..] = noether_residuals(&pt, &small_grid(), DerivativeMode::Exact, DEFAULT_TOL).unwrap();
        // τ = 1, so GB = ε everywhere
        assert!((r.max_abs - eps).abs() < 1e-15 && (r.mean_abs - eps).abs() < 1e-15);
        assert!(!r.pass);
    }

    #[test]
    fn faraday_detects_hand_built_violation() {
        let m = FieldModel::explicit(time_translation(), e("0"), e("t*x"), e("0")).unwrap();
        let r = faraday_residual(&m, &small_grid(), DerivativeMode::Exact, DEFAULT_TOL).unwrap();
        assert_eq!(r.max_abs, 2.0);
        assert_eq!(r.argmax[2], 2.0);
        assert!(!r.pass);
    }

    #[test]
    fn constructed_fields_pass_every_identity() {
        let a = Arc::new(Symmetry::new(SymmetrySpec::case_a(e("sqrt(1+t^2)"), e("0"), e("0"), e("0"), [0.0, 2.0])).unwrap());
        all_pass(&build_field_a(a, &profile("1 + xbar*ybar - ybar^2", "xbar^2 + 0.5*ybar^2 - 0.2*xbar^3", "0")).unwrap(), DEFAULT_FD_TOL);

        let a = Arc::new(
            Symmetry::new(SymmetrySpec::case_a(e("1 + 0.2*sin(t)"), e("0.3 + 0.1*t"), e("0.2*t"), e("0.1*cos(t)"), [0.0, 2.0]))
                .unwrap(),
        );
        let mut p = profile("1 + xbar", "xbar^2 + ybar^2", "0");
        p.abar = Some([e("0"), e("xbar + xbar^2/2")]);
        p.lambda = Some(e("x*y*t"));
        all_pass(&build_field_a(a, &p).unwrap(), DEFAULT_FD_TOL);

        let b = Arc::new(Symmetry::new(SymmetrySpec::case_b(e("t^2/4"), e("0.1"), [0.0, 2.0])).unwrap());
        all_pass(&build_field_b(b, &profile("0", "xbar^2*(1 + 0.2*ybar)", "xbar^2*(0.5 + 0.1*xbar*ybar)")).unwrap(), DEFAULT_FD_TOL);

        let c = Arc::new(Symmetry::new(SymmetrySpec::case_c(e("sin(t)"), e("2 + cos(t)"), [0.0, 2.0])).unwrap());
        all_pass(&build_field_c(c, &profile("0", "xbar^2 + ybar*xbar", "xbar*(1 + ybar) + xbar^3/3")).unwrap(), DEFAULT_FD_TOL);

        let c = Arc::new(Symmetry::new(SymmetrySpec::case_c(e("1 + t/3"), e("0"), [0.0, 2.0])).unwrap());
        all_pass(&build_field_c(c, &profile("0", "xbar^2", "xbar*ybar")).unwrap(), DEFAULT_FD_TOL);
    }

    #[test]
    fn perturbation_is_detected_in_every_case() {
        let a = Arc::new(Symmetry::new(SymmetrySpec::case_a(e("1 + t/4"), e("0.2"), e("0"), e("0"), [0.0, 2.0])).unwrap());
        let b = Arc::new(Symmetry::new(SymmetrySpec::case_b(e("0.1*t"), e("0"), [0.0, 2.0])).unwrap());
        let c = Arc::new(Symmetry::new(SymmetrySpec::case_c(e("0.5"), e("1"), [0.0, 2.0])).unwrap());
        let models = [
            build_field_a(a, &profile("1", "xbar^2", "0")).unwrap(),
            build_field_b(b, &profile("0", "xbar^2", "xbar^2")).unwrap(),
            build_field_c(c, &profile("0", "xbar^2", "xbar")).unwrap(),
        ];
        for m in models {
            let p = m.with_perturbation(Component::B, e("0.01*(x*y + t)")).unwrap();
            let reports = verify_model(&p, &small_grid(), DEFAULT_TOL, DEFAULT_FD_TOL).unwrap();
            assert!(reports.iter().any(|r| r.identity == "noether_magnetic" && !r.pass));
            assert!(reports.iter().any(|r| r.identity == "faraday" && !r.pass));
        }
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let b = Arc::new(Symmetry::new(SymmetrySpec::case_b(e("t^2/4"), e("0.1"), [0.0, 2.0])).unwrap());
        let m = build_field_b(b, &profile("0", "xbar^2", "xbar^2*sin(ybar)")).unwrap();
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| verify_model(&m, &Grid::standard(windows()), DEFAULT_TOL, DEFAULT_FD_TOL).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn bad_abar_is_reported() {
        let mut p = profile("2", "0", "0");
        p.abar = Some([e("0"), e("xbar")]);
        let m = build_field_a(time_translation(), &p).unwrap();
        let r = abar_curl(&m, &small_grid(), 1e-8).unwrap();
        assert!(!r.pass && (r.max_abs - 1.0).abs() < 1e-15);
        let reports = verify_model(&m, &small_grid(), DEFAULT_TOL, DEFAULT_FD_TOL).unwrap();
        assert!(reports.iter().all(|r| !r.identity.starts_with("potential_")));
    }

    #[test]
    fn gauge_independence() {
        let c = Arc::new(Symmetry::new(SymmetrySpec::case_c(e("0.3*sin(t)"), e("1 + 0.3*sin(t)"), [0.0, 2.0])).unwrap());
        let m = build_field_c(c, &profile("0", "xbar^2", "0.5*xbar + 0.1*xbar*ybar")).unwrap();
        let tr = integrate(&m, State { t: 0.0, x: 0.2, y: 0.1, vx: 0.3, vy: -0.2 }, 2.0, 1e-10, 0.1).unwrap();
        let pots = build_potentials(&m).unwrap();
        let r = gauge_independence_check(&pots, &[e("x^2*y + sin(t)")], &tr, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let gauges = [random_gauge(&mut rng), random_gauge(&mut rng)];
        assert_ne!(gauges[0], gauges[1]);
        let r = gauge_independence_check(&pots, &gauges, &tr, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        let r = gauge_independence_check(&pots, &[e("3.5")], &tr, 1e-8).unwrap();
        assert!(r.max_abs < 1e-14, "{r:?}");

        let mut p = profile("0.6", "0", "0");
        p.abar = Some([e("0"), e("0.6*xbar")]);
        let m = build_field_a(time_translation(), &p).unwrap();
        let tr = integrate(&m, State { t: 0.0, x: 0.2, y: 0.1, vx: 0.3, vy: -0.2 }, 2.0, 1e-10, 0.1).unwrap();
        let pots = build_potentials(&m).unwrap();
        let r = gauge_independence_check(&pots, &[e("x*y*t")], &tr, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        for s in &tr.samples {
            assert!((s.invariant - 0.5 * (s.state.vx.powi(2) + s.state.vy.powi(2))).abs() < 1e-15);
        }
    }
}
