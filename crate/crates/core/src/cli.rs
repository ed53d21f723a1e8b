//! Batch driver behind the `stefan-sim` binary: JSON scenario files in,
//! `summary.json` plus a profile table out.
//!
//! Exit status is 0 on success, 1 for configuration errors and 2 for solver
//! failures, failed verification or non-finite output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::closedform::{self, ClosedFormCase, ClosedFormKind};
use crate::error::StefanError;
use crate::fixedpoint::{residuals, FixedPointConfig, Residuals};
use crate::freeboundary::{solve_front, FrontSolveReport};
use crate::oracle::{shoot, ShootingConfig, ShootingResult};
use crate::profile::{linspace, ProfileFunction};
use crate::thermal::{
    reduce_convective, reduce_flux, temperature_from_u, BoundaryCondition, BoundaryKind, CoefficientModel,
    DimensionlessProblem, PhysicalParams,
};
use crate::vapor::{positive_root, solve_alpha0, VaporSolution};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "STEFAN_SIM_THREADS";
/// Agreement required between methods in verify mode.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    Vapor,
    SolveFlux,
    SolveConvective,
    ClosedForm,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Reduced constants given directly instead of physical data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessInput {
    pub a: f64,
    pub alpha0: f64,
    pub nu: f64,
    #[serde(default)]
    pub qstar: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub pstar: Option<f64>,
    #[serde(default)]
    pub ste: Option<f64>,
    /// Used only to convert u to θ in the profile table.
    #[serde(default = "one")]
    pub theta_m: f64,
    #[serde(default)]
    pub theta_star: f64,
}

fn one() -> f64 {
    1.0
}

/// Coefficients of α₀² + dα₀ + e = 0 given directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaporInput {
    pub d: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// One scenario, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub mode: Mode,
    /// Required for `closed_form` and `verify` unless it can be read off the
    /// dimensionless constants.
    #[serde(default)]
    pub boundary: Option<BoundaryKind>,
    #[serde(default)]
    pub physical: Option<PhysicalParams>,
    /// Overrides the α₀ computed from the vapour zone when `physical` is given.
    #[serde(default)]
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub dimensionless: Option<DimensionlessInput>,
    #[serde(default)]
    pub vapor: Option<VaporInput>,
    #[serde(default)]
    pub model: CoefficientModel,
    #[serde(default)]
    pub solver: FixedPointConfig,
    #[serde(default)]
    pub oracle: ShootingConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("cannot parse config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("non-finite output: {0}")]
    NonFinite(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }

    /// Machine-readable error class.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::NonFinite(_) => "non_finite",
            CliError::Verification(_) => "verification",
            CliError::Io(_) => "io",
        }
    }
}

impl From<StefanError> for CliError {
    fn from(e: StefanError) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Summary record that remembers every non-finite number written into it.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    map: Map<String, Value>,
    non_finite: Vec<String>,
}

impl Summary {
    pub fn num(&mut self, key: &str, v: f64) {
        if !v.is_finite() {
            self.non_finite.push(key.to_string());
        }
        self.map.insert(key.to_string(), Value::from(v));
    }

    pub fn opt_num(&mut self, key: &str, v: Option<f64>) {
        match v {
            Some(x) => self.num(key, x),
            None => {
                self.map.insert(key.to_string(), Value::Null);
            }
        }
    }

    pub fn int(&mut self, key: &str, v: usize) {
        self.map.insert(key.to_string(), Value::from(v));
    }

    pub fn flag(&mut self, key: &str, v: bool) {
        self.map.insert(key.to_string(), Value::Bool(v));
    }

    pub fn opt_flag(&mut self, key: &str, v: Option<bool>) {
        self.map.insert(key.to_string(), v.map_or(Value::Null, Value::Bool));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.map.insert(key.to_string(), Value::String(v.into()));
    }

    pub fn texts(&mut self, key: &str, v: &[String]) {
        self.map.insert(key.to_string(), Value::from(v.to_vec()));
    }

    pub fn object(&mut self, key: &str, sub: Summary) {
        self.non_finite
            .extend(sub.non_finite.into_iter().map(|k| format!("{key}.{k}")));
        self.map.insert(key.to_string(), Value::Object(sub.map));
    }

    pub fn list(&mut self, key: &str, subs: Vec<Summary>) {
        let mut items = Vec::with_capacity(subs.len());
        for (i, sub) in subs.into_iter().enumerate() {
            self.non_finite
                .extend(sub.non_finite.into_iter().map(|k| format!("{key}[{i}].{k}")));
            items.push(Value::Object(sub.map));
        }
        self.map.insert(key.to_string(), Value::Array(items));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    pub fn non_finite(&self) -> &[String] {
        &self.non_finite
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.map)
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.map.clone())
    }
}

/// Plot-ready columns of the liquid-zone solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub eta: Vec<f64>,
    pub u2: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ProfileTable {
    fn new(u: &ProfileFunction, scale: Scale, kind: BoundaryKind) -> Self {
        ProfileTable {
            eta: u.grid().to_vec(),
            u2: u.values().to_vec(),
            theta: u
                .values()
                .iter()
                .map(|&v| temperature_from_u(kind, scale.theta_m, scale.theta_star, v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    fn all_finite(&self) -> bool {
        self.eta
            .iter()
            .chain(&self.u2)
            .chain(&self.theta)
            .all(|v| v.is_finite())
    }
}

/// One row of the verify-mode comparison, measured against the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub xi: f64,
    pub xi_difference: f64,
    pub profile_distance: f64,
    /// False for approximate references that do not enter the verdict.
    pub exact: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: Summary,
    pub profile: Option<ProfileTable>,
    pub comparison: Option<Vec<ComparisonRow>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scale {
    theta_m: f64,
    theta_star: f64,
}

struct Scenario {
    problem: DimensionlessProblem,
    scale: Scale,
    vapor: Option<VaporSolution>,
}

fn boundary_for(cfg: &ScenarioConfig, mode: Mode) -> Result<BoundaryKind, CliError> {
    let forced = match mode {
        Mode::SolveFlux => Some(BoundaryKind::HeatFlux),
        Mode::SolveConvective => Some(BoundaryKind::Convective),
        _ => None,
    };
    if let (Some(f), Some(b)) = (forced, cfg.boundary) {
        if f != b {
            return Err(CliError::Config(format!("boundary {b:?} contradicts mode {mode:?}")));
        }
    }
    if let Some(b) = forced.or(cfg.boundary) {
        return Ok(b);
    }
    if let Some(d) = &cfg.dimensionless {
        let flux = d.qstar.is_some() || d.m.is_some();
        let conv = d.pstar.is_some() || d.ste.is_some();
        match (flux, conv) {
            (true, false) => return Ok(BoundaryKind::HeatFlux),
            (false, true) => return Ok(BoundaryKind::Convective),
            _ => {}
        }
    }
    Err(CliError::Config(
        "field `boundary` (heat_flux or convective) is required for this mode".into(),
    ))
}

fn require(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing field `dimensionless.{name}`")))
}

fn build_scenario(cfg: &ScenarioConfig, kind: BoundaryKind) -> Result<Scenario, CliError> {
    cfg.solver.validate()?;
    match (&cfg.physical, &cfg.dimensionless) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either `physical` or `dimensionless`, not both".into(),
        )),
        (None, None) => Err(CliError::Config(
            "one of `physical` or `dimensionless` is required".into(),
        )),
        (Some(params), None) => {
            params.validate()?;
            let (alpha0, vapor) = match cfg.alpha0 {
                Some(a0) => (a0, None),
                None => {
                    let sol = solve_alpha0(params)?;
                    (sol.alpha0, Some(sol))
                }
            };
            let problem = match kind {
                BoundaryKind::HeatFlux => reduce_flux(params, cfg.model.clone(), alpha0)?,
                BoundaryKind::Convective => reduce_convective(params, cfg.model.clone(), alpha0)?,
            };
            Ok(Scenario {
                problem,
                scale: Scale {
                    theta_m: params.theta_m,
                    theta_star: params.theta_star,
                },
                vapor,
            })
        }
        (None, Some(d)) => {
            if cfg.alpha0.is_some() {
                return Err(CliError::Config(
                    "top-level `alpha0` applies to physical input; set `dimensionless.alpha0`".into(),
                ));
            }
            let model = cfg.model.clone();
            let problem = match kind {
                BoundaryKind::HeatFlux => DimensionlessProblem::heat_flux(
                    d.a,
                    d.alpha0,
                    d.nu,
                    require(d.qstar, "qstar")?,
                    require(d.m, "m")?,
                    model,
                )?,
                BoundaryKind::Convective => DimensionlessProblem::convective(
                    d.a,
                    d.alpha0,
                    d.nu,
                    require(d.pstar, "pstar")?,
                    require(d.ste, "ste")?,
                    model,
                )?,
            };
            Ok(Scenario {
                problem,
                scale: Scale {
                    theta_m: d.theta_m,
                    theta_star: d.theta_star,
                },
                vapor: None,
            })
        }
    }
}

fn boundary_name(kind: BoundaryKind) -> &'static str {
    match kind {
        BoundaryKind::HeatFlux => "heat_flux",
        BoundaryKind::Convective => "convective",
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Vapor => "vapor",
        Mode::SolveFlux => "solve_flux",
        Mode::SolveConvective => "solve_convective",
        Mode::ClosedForm => "closed_form",
        Mode::Verify => "verify",
    }
}

fn problem_summary(s: &mut Summary, sc: &Scenario) {
    let p = &sc.problem;
    s.text("boundary", boundary_name(p.kind()));
    s.num("a", p.a);
    s.num("alpha0", p.alpha0);
    s.num("nu", p.nu);
    match p.bc {
        BoundaryCondition::HeatFlux { qstar, m } => {
            s.num("qstar", qstar);
            s.num("m", m);
        }
        BoundaryCondition::Convective { pstar, ste } => {
            s.num("pstar", pstar);
            s.num("ste", ste);
        }
    }
    s.text(
        "model",
        match p.model {
            CoefficientModel::Constant => "constant",
            CoefficientModel::Linear { .. } => "linear",
            CoefficientModel::Table(_) => "table",
        },
    );
    if let CoefficientModel::Linear { alpha, beta } = p.model {
        s.num("model_alpha", alpha);
        s.num("model_beta", beta);
    }
    if let Some(v) = &sc.vapor {
        s.object("vapor", vapor_summary(v));
    }
}

fn vapor_summary(v: &VaporSolution) -> Summary {
    let mut s = Summary::default();
    s.num("alpha0", v.alpha0);
    s.num("d", v.d);
    s.num("e", v.e);
    s.num("quadratic_residual", v.quadratic_residual());
    s.flag("ambiguous", v.ambiguous);
    s
}

fn residual_summary(r: &Residuals) -> Summary {
    let mut s = Summary::default();
    s.num("boundary_alpha0", r.boundary_alpha0);
    s.num("boundary_xi", r.boundary_xi);
    s.num("stefan", r.stefan);
    s.num("ode_interior", r.ode_interior);
    s.opt_num("derivative_identity", r.derivative_identity);
    s
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn run_vapor(cfg: &ScenarioConfig) -> Result<RunOutput, CliError> {
    let mut s = Summary::default();
    s.text("mode", "vapor");
    match (&cfg.vapor, &cfg.physical) {
        (Some(q), _) => {
            let (alpha0, ambiguous) = positive_root(q.d, q.e)?;
            s.num("alpha0", alpha0);
            s.num("d", q.d);
            s.num("e", q.e);
            s.num("quadratic_residual", alpha0 * alpha0 + q.d * alpha0 + q.e);
            s.flag("ambiguous", ambiguous);
        }
        (None, Some(params)) => {
            let sol = solve_alpha0(params)?;
            s.num("alpha0", sol.alpha0);
            s.num("d", sol.d);
            s.num("e", sol.e);
            s.num("quadratic_residual", sol.quadratic_residual());
            s.flag("ambiguous", sol.ambiguous);
            s.num("parabola_a_times_t", sol.a_scaled);
            s.num("parabola_b", sol.b);
            s.num("parabola_c", sol.c);
            let mut balance = Summary::default();
            for t in [0.5, 1.0, 4.0] {
                balance.num(&format!("t={t}"), sol.flux_balance_residual(params, t)?);
            }
            s.object("flux_balance_residual", balance);
        }
        (None, None) => {
            return Err(CliError::Config("vapor mode needs `vapor` {d, e} or `physical`".into()));
        }
    }
    Ok(RunOutput {
        summary: s,
        profile: None,
        comparison: None,
    })
}

fn front_summary(s: &mut Summary, r: &FrontSolveReport) {
    s.num("xi", r.xi);
    s.num("xi1", r.xi1);
    s.num("xi2", r.xi2);
    s.opt_num("xi_star", finite_or_none(r.xi_star));
    s.num("defect", r.defect);
    s.int("iterations", r.solution.iterations);
    s.num("epsilon_estimate", r.solution.epsilon_estimate);
    s.num("epsilon_bound", r.solution.epsilon_bound);
    s.num("epsilon_rigorous", r.solution.epsilon_rigorous);
    s.int("matching_evaluations", r.phi_values.len());
    s.flag("admissible", r.admissible);
    s.opt_flag("latent_heat_ok", r.latent_heat_ok);
    s.flag("monotone_matching", r.monotone_matching);
    s.int("sign_changes", r.sign_changes);
    s.texts("warnings", &r.warnings);
    s.object("residuals", residual_summary(&r.residuals));
}

fn run_solve(cfg: &ScenarioConfig, mode: Mode) -> Result<RunOutput, CliError> {
    let kind = boundary_for(cfg, mode)?;
    let sc = build_scenario(cfg, kind)?;
    let report = solve_front(&sc.problem, &cfg.solver)?;
    let mut s = Summary::default();
    s.text("mode", mode_name(mode));
    problem_summary(&mut s, &sc);
    front_summary(&mut s, &report);
    Ok(RunOutput {
        summary: s,
        profile: Some(ProfileTable::new(&report.solution.profile, sc.scale, kind)),
        comparison: None,
    })
}

struct ClosedFormSolution {
    case: ClosedFormCase,
    xi: f64,
    profile: ProfileFunction,
}

type ProfileFormula = fn(&ClosedFormCase, f64, f64) -> crate::error::Result<f64>;

fn closed_form_solution(problem: &DimensionlessProblem, nodes: usize) -> Result<ClosedFormSolution, StefanError> {
    let case = ClosedFormCase::from_problem(problem)?;
    let (xi, f): (f64, ProfileFormula) = match case.kind {
        ClosedFormKind::ConstantFlux => (
            closedform::constant_flux_front_m(&case)?,
            closedform::constant_flux_profile,
        ),
        ClosedFormKind::ConstantConvective => (
            closedform::constant_convective_front(&case)?,
            closedform::constant_convective_profile,
        ),
        ClosedFormKind::LinearConvective => (
            closedform::linear_convective_front(&case)?,
            closedform::linear_convective_profile,
        ),
    };
    let grid = linspace(problem.alpha0, xi, nodes);
    let values = grid
        .iter()
        .map(|&eta| f(&case, xi, eta))
        .collect::<crate::error::Result<Vec<f64>>>()?;
    let profile = ProfileFunction::from_values(grid, values)?;
    Ok(ClosedFormSolution { case, xi, profile })
}

fn kind_name(kind: ClosedFormKind) -> &'static str {
    match kind {
        ClosedFormKind::ConstantFlux => "constant_flux",
        ClosedFormKind::ConstantConvective => "constant_convective",
        ClosedFormKind::LinearConvective => "linear_convective",
    }
}

fn run_closed_form(cfg: &ScenarioConfig) -> Result<RunOutput, CliError> {
    let kind = boundary_for(cfg, Mode::ClosedForm)?;
    let sc = build_scenario(cfg, kind)?;
    let cf = closed_form_solution(&sc.problem, cfg.solver.grid_nodes)?;
    let mut s = Summary::default();
    s.text("mode", "closed_form");
    problem_summary(&mut s, &sc);
    s.text("closed_form", kind_name(cf.case.kind));
    s.num("xi", cf.xi);
    if let (ClosedFormKind::ConstantFlux, Some(params)) = (cf.case.kind, &cfg.physical) {
        s.num(
            "xi_latent_heat_form",
            closedform::constant_flux_front(&cf.case, params)?,
        );
    }
    s.object("residuals", residual_summary(&residuals(&sc.problem, &cf.profile)?));
    Ok(RunOutput {
        summary: s,
        profile: Some(ProfileTable::new(&cf.profile, sc.scale, kind)),
        comparison: None,
    })
}

/// Worker count from `STEFAN_SIM_THREADS`; 0 or unset means all available cores.
pub fn worker_threads() -> Result<usize, CliError> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    Ok(if requested == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        requested
    })
}

fn run_verify(cfg: &ScenarioConfig, threads: usize) -> Result<RunOutput, CliError> {
    let kind = boundary_for(cfg, Mode::Verify)?;
    let sc = build_scenario(cfg, kind)?;
    cfg.oracle.validate()?;
    let problem = &sc.problem;
    let (pipeline, oracle): (
        Result<FrontSolveReport, StefanError>,
        Result<ShootingResult, StefanError>,
    ) = if threads >= 2 {
        std::thread::scope(|scope| {
            let handle = scope.spawn(|| shoot(problem, &cfg.oracle));
            let p = solve_front(problem, &cfg.solver);
            let o = handle
                .join()
                .unwrap_or_else(|_| Err(StefanError::Shooting("oracle thread panicked".into())));
            (p, o)
        })
    } else {
        (solve_front(problem, &cfg.solver), shoot(problem, &cfg.oracle))
    };
    let pipeline = pipeline?;
    let oracle = oracle?;
    let closed = match ClosedFormCase::from_problem(problem) {
        Ok(_) => Some(closed_form_solution(problem, cfg.solver.grid_nodes)?),
        Err(_) => None,
    };

    let reference = &pipeline.solution.profile;
    let mut rows = vec![
        ComparisonRow {
            method: "pipeline".into(),
            xi: pipeline.xi,
            xi_difference: 0.0,
            profile_distance: 0.0,
            exact: true,
        },
        ComparisonRow {
            method: "oracle".into(),
            xi: oracle.xi,
            xi_difference: oracle.xi - pipeline.xi,
            profile_distance: reference.sup_distance(&oracle.profile),
            exact: true,
        },
    ];
    if let Some(cf) = &closed {
        rows.push(ComparisonRow {
            method: kind_name(cf.case.kind).into(),
            xi: cf.xi,
            xi_difference: cf.xi - pipeline.xi,
            profile_distance: reference.sup_distance(&cf.profile),
            // The linear case substitutes bound constants for the coefficients.
            exact: cf.case.kind != ClosedFormKind::LinearConvective,
        });
    }
    let verified = rows
        .iter()
        .filter(|r| r.exact)
        .all(|r| r.xi_difference.abs() <= VERIFY_TOL && r.profile_distance <= VERIFY_TOL);

    let mut s = Summary::default();
    s.text("mode", "verify");
    problem_summary(&mut s, &sc);
    front_summary(&mut s, &pipeline);
    s.num("oracle_defect", oracle.defect);
    s.num("oracle_boundary_defect", oracle.boundary_defect);
    s.int("oracle_bisections", oracle.bisections);
    s.num("tolerance", VERIFY_TOL);
    s.flag("verified", verified);
    s.list(
        "comparison",
        rows.iter()
            .map(|r| {
                let mut row = Summary::default();
                row.text("method", r.method.clone());
                row.num("xi", r.xi);
                row.num("xi_difference", r.xi_difference);
                row.num("profile_distance", r.profile_distance);
                row.flag("exact", r.exact);
                row
            })
            .collect(),
    );
    Ok(RunOutput {
        summary: s,
        profile: Some(ProfileTable::new(reference, sc.scale, kind)),
        comparison: Some(rows),
    })
}

/// Execute a scenario without touching the file system.
pub fn execute(cfg: &ScenarioConfig, threads: usize) -> Result<RunOutput, CliError> {
    let out = match cfg.mode {
        Mode::Vapor => run_vapor(cfg)?,
        Mode::SolveFlux | Mode::SolveConvective => run_solve(cfg, cfg.mode)?,
        Mode::ClosedForm => run_closed_form(cfg)?,
        Mode::Verify => run_verify(cfg, threads)?,
    };
    if !out.summary.non_finite().is_empty() {
        return Err(CliError::NonFinite(out.summary.non_finite().join(", ")));
    }
    if let Some(p) = &out.profile {
        if !p.all_finite() {
            return Err(CliError::NonFinite("profile table".into()));
        }
    }
    Ok(out)
}

/// Write the profile table as CSV (`eta,u2,theta`) or as JSON with the summary.
pub fn emit_profile(out: &RunOutput, path: &Path, format: Format) -> Result<(), CliError> {
    let table = out
        .profile
        .as_ref()
        .ok_or_else(|| CliError::Io("this mode produces no profile".into()))?;
    let text = match format {
        Format::Csv => {
            let mut text = String::with_capacity(64 * (table.len() + 1));
            text.push_str("eta,u2,theta\n");
            for i in 0..table.len() {
                text.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e}\n",
                    table.eta[i], table.u2[i], table.theta[i]
                ));
            }
            text
        }
        Format::Json => {
            let doc = serde_json::json!({
                "summary": out.summary.to_value(),
                "eta": table.eta,
                "u2": table.u2,
                "theta": table.theta,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| io_error(path, e))?;
            s.push('\n');
            s
        }
    };
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn emit_comparison(rows: &[ComparisonRow], path: &Path) -> Result<(), CliError> {
    let mut text = String::from("method,xi,xi_difference,profile_distance,exact\n");
    for r in rows {
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            r.method, r.xi, r.xi_difference, r.profile_distance, r.exact
        ));
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "stefan-sim",
    version,
    about = "Melt-front solver for the one-phase Stefan problem"
)]
pub struct Args {
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the mode in the scenario file.
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Output directory (default: `output.dir` from the scenario, else the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Profile table format.
    #[arg(long)]
    pub format: Option<Format>,
    /// Print nothing on success.
    #[arg(long)]
    pub quiet: bool,
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub summary: PathBuf,
    pub profile: Option<PathBuf>,
    pub comparison: Option<PathBuf>,
}

/// Load, execute and write a scenario.
pub fn run(args: &Args) -> Result<(RunOutput, Written), CliError> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    let threads = worker_threads()?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let format = args.format.or(cfg.output.format).unwrap_or_default();

    let out = execute(&cfg, threads)?;
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;

    let summary_path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&out.summary.to_value()).map_err(|e| io_error(&summary_path, e))?;
    text.push('\n');
    fs::write(&summary_path, text).map_err(|e| io_error(&summary_path, e))?;

    let profile = match &out.profile {
        Some(_) => {
            let path = dir.join(match format {
                Format::Csv => "profile.csv",
                Format::Json => "profile.json",
            });
            emit_profile(&out, &path, format)?;
            Some(path)
        }
        None => None,
    };
    let comparison = match &out.comparison {
        Some(rows) => {
            let path = dir.join("comparison.csv");
            emit_comparison(rows, &path)?;
            Some(path)
        }
        None => None,
    };
    if let Some(Value::Bool(false)) = out.summary.get("verified") {
        return Err(CliError::Verification(format!(
            "methods disagree by more than {VERIFY_TOL:e}; see {}",
            summary_path.display()
        )));
    }
    Ok((
        out,
        Written {
            summary: summary_path,
            profile,
            comparison,
        },
    ))
}

fn report(out: &RunOutput) -> String {
    let mut line = String::new();
    for key in ["mode", "alpha0", "xi", "iterations", "verified"] {
        if let Some(v) = out.summary.get(key) {
            if !line.is_empty() {
                line.push_str("  ");
            }
            line.push_str(&format!("{key}={v}"));
        }
    }
    line
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok((out, written)) => {
            if !args.quiet {
                println!("{}", report(&out));
                println!("wrote {}", written.summary.display());
                for p in written.profile.iter().chain(&written.comparison) {
                    println!("wrote {}", p.display());
                }
            }
            0
        }
        Err(e) => {
            eprintln!("stefan-sim: error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}
