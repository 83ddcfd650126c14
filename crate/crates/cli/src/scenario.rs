//! Scenario files: one JSON document per experiment.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use noether_core::dynamics::State;
use noether_core::expr::{self, Expr};
use noether_core::fields::{Component, FieldModel, FieldProfile};
use noether_core::symmetry::{Case, Generator, Symmetry, SymmetrySpec};
use noether_core::verify::{Grid, Windows};

/// Input problem located at a JSON path (`profile.vbar`, `windows.t`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
}

impl ScenarioError {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
        ScenarioError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<String>,
    /// Lower limit of the Case A quadratures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_ref: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bbar: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vbar: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abar1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abar2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Residual tolerance on exact-derivative paths.
    pub residual: f64,
    /// Residual tolerance on finite-difference paths.
    pub fd_residual: f64,
    pub integrator: f64,
    pub quadrature: f64,
    /// Allowed `max |I − I₀| / (1 + |I₀|)`.
    pub drift: f64,
    pub gauge: f64,
    pub rho_min: f64,
    pub a_min: f64,
    pub r_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-6,
            fd_residual: 1e-5,
            integrator: 1e-10,
            quadrature: 1e-10,
            drift: 1e-7,
            gauge: 1e-8,
            rho_min: 1e-3,
            a_min: 1e-3,
            r_min: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl Default for GridSize {
    fn default() -> Self {
        GridSize { nx: 20, ny: 20, nt: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub report: String,
    /// Trajectory files are `<prefix>_<k>.csv`, the drift summary `<prefix>_summary.json`.
    pub trajectory_prefix: String,
    pub output_dt: f64,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            report: "report.json".into(),
            trajectory_prefix: "trajectory".into(),
            output_dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationFile {
    pub component: Component,
    pub expr: String,
}

/// The file as written.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub case: Case,
    pub symmetry: SymmetryFile,
    pub profile: ProfileFile,
    pub windows: Windows,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridSize,
    #[serde(default)]
    pub initial_conditions: Vec<InitialCondition>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationFile>,
}

/// A validated scenario with its symmetry and field model built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub file: ScenarioFile,
    pub symmetry: Arc<Symmetry>,
    pub model: FieldModel,
}

fn expression(path: &str, text: &str, allowed: &[&str]) -> Result<Expr> {
    let e = expr::parse(text).map_err(|err| ScenarioError::new(path, err))?;
    if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(&v.as_str())) {
        return Err(ScenarioError::new(
            path,
            format!("unknown variable `{v}` (allowed: {})", allowed.join(", ")),
        ));
    }
    Ok(e)
}

fn required(path: &str, value: &Option<String>, case: Case, allowed: &[&str]) -> Result<Expr> {
    match value {
        Some(text) => expression(path, text, allowed),
        None => Err(ScenarioError::new(path, format!("required for Case {case}"))),
    }
}

fn optional(path: &str, value: &Option<String>, allowed: &[&str]) -> Result<Option<Expr>> {
    value.as_deref().map(|text| expression(path, text, allowed)).transpose()
}

fn forbid(path: &str, value: &Option<String>, case: Case) -> Result<()> {
    match value {
        Some(_) => Err(ScenarioError::new(path, format!("not used in Case {case}"))),
        None => Ok(()),
    }
}

fn check_window(path: &str, w: [f64; 2]) -> Result<()> {
    if w[0].is_finite() && w[1].is_finite() && w[0] < w[1] {
        Ok(())
    } else {
        Err(ScenarioError::new(path, format!("window [{}, {}] must be finite with min < max", w[0], w[1])))
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::new(path, format!("must be positive, got {v}")))
    }
}

const T: &[&str] = &["t"];
const CANONICAL: &[&str] = &["xbar", "ybar"];
const PHYSICAL: &[&str] = &["x", "y", "t"];

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            let path = if path == "." { String::new() } else { path };
            ScenarioError::new(path, format!("{inner}"))
        })
    }

    fn symmetry_spec(&self) -> Result<SymmetrySpec> {
        let s = &self.symmetry;
        let case = self.case;
        let generator = match case {
            Case::A => {
                for (p, v) in [("symmetry.beta1", &s.beta1), ("symmetry.beta2", &s.beta2), ("symmetry.a1", &s.a1), ("symmetry.a2", &s.a2)] {
                    forbid(p, v, case)?;
                }
                let zero = || Expr::num(0.0);
                Generator::A {
                    rho: required("symmetry.rho", &s.rho, case, T)?,
                    omega: required("symmetry.omega", &s.omega, case, T)?,
                    alpha1: optional("symmetry.alpha1", &s.alpha1, T)?.unwrap_or_else(zero),
                    alpha2: optional("symmetry.alpha2", &s.alpha2, T)?.unwrap_or_else(zero),
                }
            }
            Case::B => {
                for (p, v) in [("symmetry.rho", &s.rho), ("symmetry.omega", &s.omega), ("symmetry.alpha1", &s.alpha1), ("symmetry.alpha2", &s.alpha2), ("symmetry.a1", &s.a1), ("symmetry.a2", &s.a2)] {
                    forbid(p, v, case)?;
                }
                Generator::B {
                    beta1: required("symmetry.beta1", &s.beta1, case, T)?,
                    beta2: required("symmetry.beta2", &s.beta2, case, T)?,
                }
            }
            Case::C => {
                for (p, v) in [("symmetry.rho", &s.rho), ("symmetry.omega", &s.omega), ("symmetry.alpha1", &s.alpha1), ("symmetry.alpha2", &s.alpha2), ("symmetry.beta1", &s.beta1), ("symmetry.beta2", &s.beta2)] {
                    forbid(p, v, case)?;
                }
                Generator::C {
                    a1: required("symmetry.a1", &s.a1, case, T)?,
                    a2: required("symmetry.a2", &s.a2, case, T)?,
                }
            }
        };
        if s.t_ref.is_some() && case != Case::A {
            return Err(ScenarioError::new("symmetry.t_ref", format!("not used in Case {case}")));
        }
        let tol = &self.tolerances;
        let mut spec = SymmetrySpec::new(generator, self.windows.t);
        spec.t_ref = s.t_ref.unwrap_or(self.windows.t[0]);
        spec.min_abs = if case == Case::C { tol.a_min } else { tol.rho_min };
        spec.r_min = tol.r_min;
        spec.quad_tol = tol.quadrature;
        Ok(spec)
    }

    fn field_profile(&self) -> Result<FieldProfile> {
        let p = &self.profile;
        let case = self.case;
        let mut out = FieldProfile::default();
        match case {
            Case::A => {
                forbid("profile.psi", &p.psi, case)?;
                out.bbar = required("profile.bbar", &p.bbar, case, CANONICAL)?;
                out.vbar = required("profile.vbar", &p.vbar, case, CANONICAL)?;
                out.abar = match (optional("profile.abar1", &p.abar1, CANONICAL)?, optional("profile.abar2", &p.abar2, CANONICAL)?) {
                    (Some(a1), Some(a2)) => Some([a1, a2]),
                    (None, None) => None,
                    (None, Some(_)) => return Err(ScenarioError::new("profile.abar1", "abar1 and abar2 go together")),
                    (Some(_), None) => return Err(ScenarioError::new("profile.abar2", "abar1 and abar2 go together")),
                };
            }
            Case::B | Case::C => {
                forbid("profile.bbar", &p.bbar, case)?;
                forbid("profile.abar1", &p.abar1, case)?;
                forbid("profile.abar2", &p.abar2, case)?;
                out.vbar = required("profile.vbar", &p.vbar, case, CANONICAL)?;
                out.psi = required("profile.psi", &p.psi, case, CANONICAL)?;
            }
        }
        out.lambda = optional("profile.lambda", &p.lambda, PHYSICAL)?;
        Ok(out)
    }

    fn check_numbers(&self) -> Result<()> {
        let w = &self.windows;
        check_window("windows.t", w.t)?;
        check_window("windows.x", w.x)?;
        check_window("windows.y", w.y)?;
        let tol = &self.tolerances;
        for (p, v) in [
            ("tolerances.residual", tol.residual),
            ("tolerances.fd_residual", tol.fd_residual),
            ("tolerances.integrator", tol.integrator),
            ("tolerances.quadrature", tol.quadrature),
            ("tolerances.drift", tol.drift),
            ("tolerances.gauge", tol.gauge),
            ("tolerances.rho_min", tol.rho_min),
            ("tolerances.a_min", tol.a_min),
            ("tolerances.r_min", tol.r_min),
            ("outputs.output_dt", self.outputs.output_dt),
        ] {
            positive(p, v)?;
        }
        for (p, n) in [("grid.nx", self.grid.nx), ("grid.ny", self.grid.ny), ("grid.nt", self.grid.nt)] {
            if n < 2 {
                return Err(ScenarioError::new(p, format!("need at least 2 samples, got {n}")));
            }
        }
        for (k, ic) in self.initial_conditions.iter().enumerate() {
            let inside = ic.x >= w.x[0] && ic.x <= w.x[1] && ic.y >= w.y[0] && ic.y <= w.y[1];
            if !inside || !(ic.vx.is_finite() && ic.vy.is_finite()) {
                return Err(ScenarioError::new(
                    format!("initial_conditions[{k}]"),
                    "position must lie inside the spatial window and velocity must be finite",
                ));
            }
        }
        if self.outputs.report.is_empty() || self.outputs.trajectory_prefix.is_empty() {
            return Err(ScenarioError::new("outputs", "file names must not be empty"));
        }
        Ok(())
    }

    /// Validate and build the symmetry and field model.
    pub fn build(self, name: impl Into<String>) -> Result<Scenario> {
        self.check_numbers()?;
        let spec = self.symmetry_spec()?;
        let profile = self.field_profile()?;
        let symmetry = Arc::new(Symmetry::new(spec).map_err(|e| ScenarioError::new("symmetry", e))?);
        let mut model = FieldModel::new(symmetry.clone(), &profile).map_err(|e| ScenarioError::new("profile", e))?;
        if let Some(p) = &self.perturbation {
            let e = expression("perturbation.expr", &p.expr, PHYSICAL)?;
            model = model.with_perturbation(p.component, e).map_err(|e| ScenarioError::new("perturbation", e))?;
        }
        Ok(Scenario {
            name: name.into(),
            file: self,
            symmetry,
            model,
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::new("", format!("cannot read {}: {e}", path.display())))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        ScenarioFile::from_json(&text)?.build(name)
    }

    pub fn case(&self) -> Case {
        self.file.case
    }

    pub fn grid(&self) -> Grid {
        let g = self.file.grid;
        Grid::new(self.file.windows, g.nx, g.ny, g.nt)
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.file.tolerances
    }

    /// Initial states at the start of the time window.
    pub fn initial_states(&self) -> Vec<State> {
        let t = self.file.windows.t[0];
        self.file
            .initial_conditions
            .iter()
            .map(|ic| State {
                t,
                x: ic.x,
                y: ic.y,
                vx: ic.vx,
                vy: ic.vy,
            })
            .collect()
    }
}
