//! Shooting solution of the similarity boundary-value problem.
//!
//! The ODE [L*(u) η^ν u']' + (2/a) η^{ν+1} N*(u) u' = 0 is integrated as the
//! first-order system
//!
//! ```text
//! u' = w / (η^ν L*(u)),    w' = −(2/a) η N*(u) w / L*(u),
//! ```
//!
//! with w = L*(u) η^ν u', from η = α₀ with the boundary condition there and a
//! trial value U = u(α₀). The integration stops where u reaches its melt value
//! and U is bisected until the Stefan condition also holds at that point.
//! Nothing here uses the kernel or fixed-point code.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::profile::{linspace, ProfileFunction, MIN_NODES};
use crate::thermal::{BoundaryCondition, CoefficientModel, DimensionlessProblem};

/// Shooting settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingConfig {
    /// Local error tolerance of the Runge–Kutta integrator.
    pub rk_tol: f64,
    /// Tolerance on the Stefan-condition defect.
    pub shoot_tol: f64,
    pub max_bisect: usize,
    /// Nodes of the returned profile.
    pub grid_nodes: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            rk_tol: 1e-11,
            shoot_tol: 1e-9,
            max_bisect: 200,
            grid_nodes: 257,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rk_tol > 0.0 && self.shoot_tol > 0.0 && self.max_bisect > 0) {
            return Err(StefanError::invalid(
                "shooting",
                "rk_tol, shoot_tol and max_bisect must be positive",
            ));
        }
        if self.grid_nodes < MIN_NODES {
            return Err(StefanError::invalid(
                "shooting.grid_nodes",
                format!("must be >= {MIN_NODES}"),
            ));
        }
        Ok(())
    }
}

/// Outcome of a successful shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub xi: f64,
    /// Recovered u(α₀).
    pub u_alpha0: f64,
    pub profile: ProfileFunction,
    /// Stefan-condition defect at ξ.
    pub defect: f64,
    /// Boundary-condition defect at α₀ of the recovered initial state.
    pub boundary_defect: f64,
    pub bisections: usize,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 200_000;

type State = [f64; 2];

struct System<'a> {
    model: &'a CoefficientModel,
    two_over_a: f64,
    nu: f64,
}

impl System<'_> {
    fn rhs(&self, eta: f64, y: &State) -> State {
        let l = self.model.conductivity(y[0]);
        let n = self.model.capacity(y[0]);
        [y[1] / (eta.powf(self.nu) * l), -self.two_over_a * eta * n * y[1] / l]
    }

    fn u_slope(&self, eta: f64, y: &State) -> f64 {
        y[1] / (eta.powf(self.nu) * self.model.conductivity(y[0]))
    }

    /// One Dormand–Prince step; returns the fifth-order state and the scaled error.
    fn step(&self, eta: f64, y: &State, h: f64, tol: f64) -> (State, f64) {
        let mut k = [[0.0; 2]; 7];
        k[0] = self.rhs(eta, y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = self.rhs(eta + C[s] * h, &ys);
        }
        let mut next = *y;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                next[i] += h * A[6].get(s).copied().unwrap_or(0.0) * k[s][i];
                e += h * E[s] * k[s][i];
            }
            let scale = tol * (1.0 + y[i].abs().max(next[i].abs()));
            err = err.max(e.abs() / scale);
        }
        (next, err)
    }
}

/// How an integration ended.
enum Shot {
    /// u reached the melt value at η with state y.
    Crossed { eta: f64, y: State },
    /// Reached η_max without crossing; the state there.
    Missed { y: State },
}

fn new_step(h: f64, err: f64) -> f64 {
    let factor = if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * factor
}

/// Integrate from (α₀, y0) until u − level changes sign or η_max is reached.
/// If `stops` is non-empty, every listed η is hit exactly and the state is
/// recorded there.
#[allow(clippy::too_many_arguments)]
fn integrate(
    sys: &System,
    eta0: f64,
    y0: State,
    level: f64,
    eta_max: f64,
    tol: f64,
    stops: &[f64],
    record: &mut Vec<State>,
) -> Result<Shot> {
    let mut eta = eta0;
    let mut y = y0;
    let mut h = 1e-3 * (eta_max - eta0);
    let mut next_stop = 0;
    while next_stop < stops.len() && stops[next_stop] <= eta {
        record.push(y);
        next_stop += 1;
    }
    let sign0 = (y[0] - level).signum();
    for _ in 0..MAX_STEPS {
        if eta >= eta_max {
            return Ok(Shot::Missed { y });
        }
        let mut target = eta_max;
        if next_stop < stops.len() {
            target = target.min(stops[next_stop]);
        }
        let forced = eta + h >= target;
        let hh = if forced { target - eta } else { h };
        let (trial, err) = sys.step(eta, &y, hh, tol);
        if !(err.is_finite() && trial[0].is_finite() && trial[1].is_finite()) {
            h *= 0.2;
            if h < 1e-14 * eta.abs().max(1.0) {
                return Err(StefanError::Shooting(format!("step size underflow at eta = {eta}")));
            }
            continue;
        }
        if err > 1.0 {
            h = new_step(hh, err);
            continue;
        }
        let crossed = (trial[0] - level).signum() != sign0 || trial[0] == level;
        if crossed {
            let (ec, yc) = locate(sys, eta, &y, hh, level, tol);
            return Ok(Shot::Crossed { eta: ec, y: yc });
        }
        eta = if forced { target } else { eta + hh };
        y = trial;
        while next_stop < stops.len() && stops[next_stop] <= eta {
            record.push(y);
            next_stop += 1;
        }
        if !forced {
            h = new_step(hh, err);
        }
    }
    Err(StefanError::Shooting("step limit reached".to_string()))
}

/// Step length in (0, h] at which u reaches `level`, found by bisecting a
/// single step taken from the last accepted point.
fn locate(sys: &System, eta: f64, y: &State, h: f64, level: f64, tol: f64) -> (f64, State) {
    let sign0 = (y[0] - level).signum();
    let (mut lo, mut hi) = (0.0, h);
    let mut y_hi = sys.step(eta, y, h, tol).0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let ym = sys.step(eta, y, mid, tol).0;
        if (ym[0] - level).signum() == sign0 && ym[0] != level {
            lo = mid;
        } else {
            hi = mid;
            y_hi = ym;
        }
    }
    (eta + hi, y_hi)
}

struct Shooter<'a> {
    problem: &'a DimensionlessProblem,
    sys: System<'a>,
    cfg: ShootingConfig,
    eta_max: f64,
}

impl Shooter<'_> {
    fn initial_state(&self, u0: f64) -> State {
        let an = self.problem.alpha0.powf(self.problem.nu);
        match self.problem.bc {
            BoundaryCondition::HeatFlux { qstar, .. } => [u0, -qstar * an],
            BoundaryCondition::Convective { pstar, .. } => [u0, an * pstar * u0],
        }
    }

    /// Stefan-condition defect at the crossing.
    fn stefan_defect(&self, eta: f64, y: &State) -> f64 {
        let p = self.problem;
        match p.bc {
            BoundaryCondition::HeatFlux { m, .. } => self.sys.u_slope(eta, y) + m * eta,
            BoundaryCondition::Convective { ste, .. } => y[1] / eta.powf(p.nu) - 2.0 * eta / (p.a * ste),
        }
    }

    /// Defect for trial U, or a signed stand-in if u never reaches the melt value.
    fn shoot(&self, u0: f64) -> Result<(f64, Option<(f64, State)>)> {
        let level = self.problem.melt_value();
        let shot = integrate(
            &self.sys,
            self.problem.alpha0,
            self.initial_state(u0),
            level,
            self.eta_max,
            self.cfg.rk_tol,
            &[],
            &mut Vec::new(),
        )?;
        Ok(match shot {
            Shot::Crossed { eta, y } => (self.stefan_defect(eta, &y), Some((eta, y))),
            // Flux: U too large to melt back to 0 in range. Convective: U too small.
            Shot::Missed { .. } => match self.problem.bc {
                BoundaryCondition::HeatFlux { .. } => (1.0, None),
                BoundaryCondition::Convective { .. } => (-1.0, None),
            },
        })
    }
}

fn run(problem: &DimensionlessProblem, cfg: &ShootingConfig, want_flux: bool) -> Result<ShootingResult> {
    problem.validate()?;
    cfg.validate()?;
    let is_flux = matches!(problem.bc, BoundaryCondition::HeatFlux { .. });
    if is_flux != want_flux {
        return Err(StefanError::invalid(
            "bc",
            "boundary condition does not match the shooting variant",
        ));
    }
    let a0 = problem.alpha0;
    let p = problem.nu + 1.0;
    if !(problem.matching_at_alpha0() > a0.powf(p)) {
        return Err(StefanError::Shooting(
            "the Stefan condition cannot be met beyond the boiling front for these constants".to_string(),
        ));
    }
    let shooter = Shooter {
        problem,
        sys: System {
            model: &problem.model,
            two_over_a: 2.0 / problem.a,
            nu: problem.nu,
        },
        cfg: *cfg,
        eta_max: 4.0 * problem.xi_cap(),
    };

    // Bracket U with defect(lo) < 0 < defect(hi).
    let (mut lo, mut hi) = if is_flux {
        let mut hi = 1.0;
        let mut n = 0;
        while shooter.shoot(hi)?.0 <= 0.0 {
            hi *= 2.0;
            n += 1;
            if n > 60 {
                return Err(StefanError::Shooting("could not bracket u(alpha0)".to_string()));
            }
        }
        (0.0, hi)
    } else {
        (0.0, 1.0)
    };
    let mut best: Option<(f64, f64, State)> = None;
    let mut bisections = 0;
    for _ in 0..cfg.max_bisect {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        bisections += 1;
        let (d, hit) = shooter.shoot(mid)?;
        if let Some((eta, y)) = hit {
            best = Some((mid, eta, y));
        }
        // The defect increases with U in both variants.
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    let (u0, _, _) = best.ok_or_else(|| StefanError::Shooting("no trial reached the melt value".to_string()))?;
    let (defect, hit) = shooter.shoot(u0)?;
    let (xi, _) = hit.ok_or_else(|| StefanError::Shooting("final trial missed the melt value".to_string()))?;
    if !(defect.abs() <= cfg.shoot_tol) {
        return Err(StefanError::Shooting(format!(
            "Stefan-condition defect {defect:e} above tolerance {:e}",
            cfg.shoot_tol
        )));
    }

    // Second pass stopping exactly on the output grid.
    let grid = linspace(a0, xi, cfg.grid_nodes);
    let mut states = Vec::with_capacity(grid.len());
    let y0 = shooter.initial_state(u0);
    let shot = integrate(
        &shooter.sys,
        a0,
        y0,
        problem.melt_value(),
        xi,
        cfg.rk_tol,
        &grid[..grid.len() - 1],
        &mut states,
    )?;
    let (Shot::Crossed { y: last, .. } | Shot::Missed { y: last }) = shot;
    while states.len() < grid.len() - 1 {
        // The first pass located the crossing a hair before the last interior
        // node; reuse the crossing state.
        states.push(last);
    }
    states.push([problem.melt_value(), last[1]]);
    let values: Vec<f64> = states.iter().map(|y| y[0]).collect();
    let slopes: Vec<f64> = grid
        .iter()
        .zip(&states)
        .map(|(&eta, y)| shooter.sys.u_slope(eta, y))
        .collect();
    let profile = ProfileFunction::from_hermite(grid, values, slopes)?;

    let l0 = problem.model.conductivity(u0);
    let slope0 = shooter.sys.u_slope(a0, &y0);
    let boundary_defect = match problem.bc {
        BoundaryCondition::HeatFlux { qstar, .. } => l0 * slope0 + qstar,
        BoundaryCondition::Convective { pstar, .. } => l0 * slope0 - pstar * u0,
    };
    Ok(ShootingResult {
        xi,
        u_alpha0: u0,
        profile,
        defect,
        boundary_defect,
        bisections,
    })
}

/// Shooting solution for the heat-flux condition.
pub fn shoot_flux(problem: &DimensionlessProblem, cfg: &ShootingConfig) -> Result<ShootingResult> {
    run(problem, cfg, true)
}

/// Shooting solution for the convective condition.
pub fn shoot_convective(problem: &DimensionlessProblem, cfg: &ShootingConfig) -> Result<ShootingResult> {
    run(problem, cfg, false)
}

/// Dispatch on the problem's boundary condition.
pub fn shoot(problem: &DimensionlessProblem, cfg: &ShootingConfig) -> Result<ShootingResult> {
    match problem.bc {
        BoundaryCondition::HeatFlux { .. } => shoot_flux(problem, cfg),
        BoundaryCondition::Convective { .. } => shoot_convective(problem, cfg),
    }
}
