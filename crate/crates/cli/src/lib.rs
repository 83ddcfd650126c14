//! Scenario-driven front end: residual verification, trajectory simulation
//! and coordinate transforms.

pub mod scenario;

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use noether_core::dynamics::{self, IntegrateOptions, State, Trajectory};
use noether_core::fields::build_potentials;
use noether_core::ode::OdeStats;
use noether_core::symmetry::{Case, CanonicalCoords};
use noether_core::verify::{self, ResidualReport};
use noether_core::Error as CoreError;

pub use scenario::{Scenario, ScenarioError, ScenarioFile};

#[derive(Debug)]
pub enum CliError {
    /// Unusable input: exit code 2.
    Input(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Run `f` on a pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub case: Case,
    pub perturbed: bool,
    pub reports: Vec<ResidualReport>,
    /// Problems that stopped a check from running (trajectory left the window, ...).
    pub errors: Vec<String>,
    pub pass: bool,
}

fn integration_options(s: &Scenario) -> IntegrateOptions {
    let w = s.file.windows;
    IntegrateOptions {
        tol: s.tolerances().integrator,
        output_dt: s.file.outputs.output_dt,
        spatial: Some([w.x, w.y]),
    }
}

fn recoverable(e: &CoreError) -> bool {
    matches!(e, CoreError::LeftWindow { .. } | CoreError::StepUnderflow { .. } | CoreError::ExcludedDisc { .. })
}

pub fn verify(s: &Scenario) -> Result<VerifyReport, CliError> {
    let tol = s.tolerances();
    let mut reports = verify::verify_model(&s.model, &s.grid(), tol.residual, tol.fd_residual)?;
    let mut errors = Vec::new();
    // gauge check, when potentials exist and there is something to integrate
    let curl_ok = reports.iter().all(|r| r.identity != "abar_curl" || r.pass);
    let potentials = (!s.model.is_explicit() && curl_ok && !s.file.initial_conditions.is_empty())
        .then(|| build_potentials(&s.model).ok())
        .flatten();
    if let Some(p) = potentials {
        let mut rng = ChaCha8Rng::seed_from_u64(s.file.seed);
        let gauges = [verify::random_gauge(&mut rng), verify::random_gauge(&mut rng)];
        let opts = integration_options(s);
        let t_end = s.file.windows.t[1];
        let results: Vec<_> = s
            .initial_states()
            .into_par_iter()
            .map(|st| {
                let tr = dynamics::integrate_with(&s.model, st, t_end, &opts)?;
                verify::gauge_independence_check(&p, &gauges, &tr, tol.gauge)
            })
            .collect();
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(mut r) => {
                    r.identity = format!("gauge_invariant[{k}]");
                    reports.push(r);
                }
                Err(e) if recoverable(&e) => errors.push(format!("initial_conditions[{k}]: {e}")),
                Err(e) => return Err(e.into()),
            }
        }
    }
    let pass = errors.is_empty() && reports.iter().all(|r| r.pass);
    Ok(VerifyReport {
        scenario: s.name.clone(),
        case: s.case(),
        perturbed: s.model.is_perturbed(),
        reports,
        errors,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub index: usize,
    pub file: Option<String>,
    pub initial: State,
    pub samples: usize,
    pub max_relative_drift: Option<f64>,
    pub stats: Option<OdeStats>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub scenario: String,
    pub case: Case,
    pub tol: f64,
    pub drift_tol: f64,
    pub trajectories: Vec<TrajectorySummary>,
    pub pass: bool,
}

pub fn simulate(s: &Scenario) -> Result<(SimulateSummary, Vec<Option<Trajectory>>), CliError> {
    let states = s.initial_states();
    if states.is_empty() {
        return Err(ScenarioError {
            path: "initial_conditions".into(),
            message: "simulate needs at least one initial condition".into(),
        }
        .into());
    }
    let opts = integration_options(s);
    let t_end = s.file.windows.t[1];
    let drift_tol = s.tolerances().drift;
    let results: Vec<_> = states
        .par_iter()
        .map(|&st| dynamics::integrate_with(&s.model, st, t_end, &opts))
        .collect();
    let mut summaries = Vec::new();
    let mut trajectories = Vec::new();
    for (index, (initial, r)) in states.into_iter().zip(results).enumerate() {
        match r {
            Ok(tr) => {
                let drift = tr.max_relative_drift();
                summaries.push(TrajectorySummary {
                    index,
                    file: Some(format!("{}_{index}.csv", s.file.outputs.trajectory_prefix)),
                    initial,
                    samples: tr.samples.len(),
                    max_relative_drift: Some(drift),
                    stats: Some(tr.stats),
                    error: None,
                    pass: drift <= drift_tol,
                });
                trajectories.push(Some(tr));
            }
            Err(e) if recoverable(&e) => {
                summaries.push(TrajectorySummary {
                    index,
                    file: None,
                    initial,
                    samples: 0,
                    max_relative_drift: None,
                    stats: None,
                    error: Some(e.to_string()),
                    pass: false,
                });
                trajectories.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let pass = summaries.iter().all(|t| t.pass);
    Ok((
        SimulateSummary {
            scenario: s.name.clone(),
            case: s.case(),
            tol: opts.tol,
            drift_tol,
            trajectories: summaries,
            pass,
        },
        trajectories,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformOutput {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub xbar: f64,
    pub ybar: f64,
    pub tbar: f64,
    pub tau: f64,
    pub eta1: f64,
    pub eta2: f64,
}

pub fn transform(s: &Scenario, x: f64, y: f64, t: f64) -> Result<TransformOutput, CliError> {
    let CanonicalCoords { xbar, ybar, tbar } = s.symmetry.to_canonical(x, y, t)?;
    let (tau, eta1, eta2) = s.symmetry.generator_components(x, y, t)?;
    Ok(TransformOutput {
        x,
        y,
        t,
        xbar,
        ybar,
        tbar,
        tau,
        eta1,
        eta2,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_trajectory(path: &Path, tr: &Trajectory) -> Result<(), CliError> {
    tr.write_csv(BufWriter::new(fs::File::create(path)?))?;
    Ok(())
}
