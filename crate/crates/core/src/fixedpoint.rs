//! The integral operators of the similarity problem on a frozen ξ and their
//! Picard iteration.
//!
//! Heat flux: W(u)(η) = q*[Φ(ξ, u) − Φ(η, u)].
//! Convective: V(u)(η) = (1 + p*Φ(η, u)) / (1 + p*Φ(ξ, u)).
//!
//! Φ carries the factor α₀^ν, so the coefficient in front of it is q* or p*
//! alone. Both operators return exact node slopes, since dΦ/dη is known in
//! closed form in terms of E.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::kernel::{kernel_envelopes, kernel_table, KernelBounds, KernelTable};
use crate::profile::{fd_derivative, linspace, ProfileFunction, MIN_NODES};
use crate::thermal::{BoundaryCondition, DimensionlessProblem};

/// Picard iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointConfig {
    /// Sup-norm tolerance on successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    pub grid_nodes: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            tol: 1e-10,
            max_iter: 200,
            grid_nodes: 257,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(StefanError::invalid(
                "solver.tol",
                format!("must be > 0, got {}", self.tol),
            ));
        }
        if self.max_iter < 1 {
            return Err(StefanError::invalid("solver.max_iter", "must be >= 1"));
        }
        if self.grid_nodes < MIN_NODES {
            return Err(StefanError::invalid(
                "solver.grid_nodes",
                format!("must be >= {MIN_NODES}, got {}", self.grid_nodes),
            ));
        }
        Ok(())
    }
}

/// Outcome of a converged Picard iteration at fixed ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub xi: f64,
    pub profile: ProfileFunction,
    pub iterations: usize,
    /// ‖u_k − u_{k−1}‖ for k = 1, 2, ...
    pub residual_history: Vec<f64>,
    /// Largest observed ratio of successive deltas (0 if fewer than two
    /// deltas lie above the noise floor).
    pub epsilon_estimate: f64,
    /// ε(α₀, ξ) (flux) or ε̂(α₀, ξ) (convective).
    pub epsilon_bound: f64,
    /// Lipschitz bound of the convective operator that holds for every
    /// admissible pair, 2p*Φ̃/(1 + p*Φ_lo); equal to `epsilon_bound` for flux.
    pub epsilon_rigorous: f64,
    pub xi_star: f64,
}

/// Root of ε(α₀, z) = 1, with the outcome of the monotonicity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// +∞ when ε stays below 1 up to the search limit.
    pub value: f64,
    /// ε was increasing on every scanned step.
    pub increasing: bool,
}

fn check_problem_xi(problem: &DimensionlessProblem, xi: f64) -> Result<()> {
    problem.validate()?;
    if !(xi > problem.alpha0 && xi.is_finite()) {
        return Err(StefanError::Domain(format!(
            "front coefficient xi = {xi} must exceed alpha0 = {}",
            problem.alpha0
        )));
    }
    Ok(())
}

fn check_profile(u: &ProfileFunction, problem: &DimensionlessProblem, xi: f64) -> Result<()> {
    let scale = xi.abs().max(1.0) * 1e-14;
    if (u.start() - problem.alpha0).abs() > scale || (u.end() - xi).abs() > scale {
        return Err(StefanError::Domain(format!(
            "profile spans [{}, {}], expected [{}, {xi}]",
            u.start(),
            u.end(),
            problem.alpha0
        )));
    }
    Ok(())
}

/// dΦ/dη at every node of `u`, i.e. α₀^ν E / (η^ν L*(u)).
fn phi_slopes(u: &ProfileFunction, problem: &DimensionlessProblem, table: &KernelTable) -> Vec<f64> {
    let an = problem.alpha0.powf(problem.nu);
    u.grid()
        .iter()
        .zip(u.values())
        .zip(&table.e)
        .map(|((&eta, &v), &e)| an * e / (eta.powf(problem.nu) * problem.model.conductivity(v)))
        .collect()
}

/// One application of the operator for the problem's boundary condition.
/// Also returns the kernel table of the input profile.
pub fn apply_map(
    u: &ProfileFunction,
    problem: &DimensionlessProblem,
    xi: f64,
) -> Result<(ProfileFunction, KernelTable)> {
    check_problem_xi(problem, xi)?;
    check_profile(u, problem, xi)?;
    let table = kernel_table(u, &problem.model, problem.a, problem.nu)?;
    let dphi = phi_slopes(u, problem, &table);
    let phi_xi = table.phi_end();
    let (values, slopes): (Vec<f64>, Vec<f64>) = match problem.bc {
        BoundaryCondition::HeatFlux { qstar, .. } => (
            table.phi.iter().map(|&p| qstar * (phi_xi - p)).collect(),
            dphi.iter().map(|&d| -qstar * d).collect(),
        ),
        BoundaryCondition::Convective { pstar, .. } => {
            let denom = 1.0 + pstar * phi_xi;
            (
                table.phi.iter().map(|&p| (1.0 + pstar * p) / denom).collect(),
                dphi.iter().map(|&d| pstar * d / denom).collect(),
            )
        }
    };
    let out = ProfileFunction::from_hermite(u.grid().to_vec(), values, slopes)?;
    Ok((out, table))
}

/// W(u) on the grid of `u`; the result vanishes at ξ.
pub fn apply_w(u: &ProfileFunction, problem: &DimensionlessProblem, xi: f64) -> Result<ProfileFunction> {
    if !matches!(problem.bc, BoundaryCondition::HeatFlux { .. }) {
        return Err(StefanError::invalid("bc", "W is the heat-flux operator"));
    }
    apply_map(u, problem, xi).map(|(w, _)| w)
}

/// V(u) on the grid of `u`; the result equals 1 at ξ.
pub fn apply_v(u: &ProfileFunction, problem: &DimensionlessProblem, xi: f64) -> Result<ProfileFunction> {
    if !matches!(problem.bc, BoundaryCondition::Convective { .. }) {
        return Err(StefanError::invalid("bc", "V is the convective operator"));
    }
    apply_map(u, problem, xi).map(|(v, _)| v)
}

/// Envelopes and Lipschitz data for the problem at front coefficient `xi`.
pub fn kernel_bounds(problem: &DimensionlessProblem, xi: f64) -> Result<KernelBounds> {
    kernel_envelopes(&problem.bounds(xi), problem.a, problem.nu, problem.alpha0)
}

/// ε(α₀, z) = 2q*Φ̃(α₀, z) for heat flux, ε̂(α₀, z) = Φ̃ / (1 + p*Φ_hi(z)) for convective.
pub fn epsilon(problem: &DimensionlessProblem, z: f64) -> Result<f64> {
    let kb = kernel_bounds(problem, z)?;
    Ok(match problem.bc {
        BoundaryCondition::HeatFlux { qstar, .. } => 2.0 * qstar * kb.phi_tilde(z),
        BoundaryCondition::Convective { pstar, .. } => kb.phi_tilde(z) / (1.0 + pstar * kb.phi_hi(z)),
    })
}

/// 2q*Φ̃ for heat flux, 2p*Φ̃/(1 + p*Φ_lo) for convective.
pub fn epsilon_rigorous(problem: &DimensionlessProblem, z: f64) -> Result<f64> {
    let kb = kernel_bounds(problem, z)?;
    Ok(match problem.bc {
        BoundaryCondition::HeatFlux { qstar, .. } => 2.0 * qstar * kb.phi_tilde(z),
        BoundaryCondition::Convective { pstar, .. } => 2.0 * pstar * kb.phi_tilde(z) / (1.0 + pstar * kb.phi_lo(z)),
    })
}

/// Upper end of the ξ* search.
pub fn xi_search_limit(problem: &DimensionlessProblem) -> f64 {
    10.0 * problem.xi_cap()
}

const THRESHOLD_SCAN: usize = 400;

/// ξ*: root of ε(α₀, z) = 1 on (α₀, z_max].
///
/// The first scanned crossing is refined by bisection. If ε(z_max) < 1 the
/// threshold is +∞.
pub fn xi_star(problem: &DimensionlessProblem) -> Result<Threshold> {
    problem.validate()?;
    let a0 = problem.alpha0;
    let zmax = xi_search_limit(problem);
    let zs = linspace(a0, zmax, THRESHOLD_SCAN + 1);
    let mut eps = Vec::with_capacity(zs.len());
    for &z in &zs {
        eps.push(if z == a0 { 0.0 } else { epsilon(problem, z)? });
    }
    let increasing = eps.windows(2).all(|w| w[1] >= w[0]);
    let Some(k) = eps.iter().position(|&e| e >= 1.0) else {
        return Ok(Threshold {
            value: f64::INFINITY,
            increasing,
        });
    };
    let (mut lo, mut hi) = (zs[k - 1], zs[k]);
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if epsilon(problem, mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        value: 0.5 * (lo + hi),
        increasing,
    })
}

/// Starting iterate: u ≡ 0 for heat flux, u ≡ 1 for convective.
pub fn initial_profile(problem: &DimensionlessProblem, xi: f64, nodes: usize) -> Result<ProfileFunction> {
    let u0 = problem.melt_value();
    ProfileFunction::uniform(problem.alpha0, xi, nodes, |_| u0)
}

/// Ratios below this delta are dominated by quadrature noise.
const RATIO_FLOOR: f64 = 1e-12;

/// Largest ratio of successive deltas above the noise floor.
pub fn contraction_estimate(history: &[f64]) -> f64 {
    history
        .windows(2)
        .filter(|w| w[0] > RATIO_FLOOR && w[1] > RATIO_FLOOR)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Picard iteration u_{k+1} = W(u_k) or V(u_k) at fixed ξ.
pub fn solve_fixed_point(problem: &DimensionlessProblem, xi: f64, cfg: &FixedPointConfig) -> Result<FixedPointReport> {
    cfg.validate()?;
    check_problem_xi(problem, xi)?;
    let mut u = initial_profile(problem, xi, cfg.grid_nodes)?;
    let mut history = Vec::new();
    for k in 1..=cfg.max_iter {
        let (next, _) = apply_map(&u, problem, xi)?;
        let delta = next.sup_distance(&u);
        if !delta.is_finite() {
            return Err(StefanError::NonConvergence {
                iterations: k,
                last_delta: delta,
                epsilon_estimate: contraction_estimate(&history),
            });
        }
        history.push(delta);
        u = next;
        if delta <= cfg.tol {
            let threshold = xi_star(problem)?;
            return Ok(FixedPointReport {
                xi,
                profile: u,
                iterations: k,
                epsilon_estimate: contraction_estimate(&history),
                residual_history: history,
                epsilon_bound: epsilon(problem, xi)?,
                epsilon_rigorous: epsilon_rigorous(problem, xi)?,
                xi_star: threshold.value,
            });
        }
    }
    Err(StefanError::NonConvergence {
        iterations: cfg.max_iter,
        last_delta: *history.last().unwrap_or(&f64::NAN),
        epsilon_estimate: contraction_estimate(&history),
    })
}

/// Defects of the boundary-value problem for a profile on a uniform grid over
/// [α₀, ξ], measured with fourth-order finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// L*(u(α₀))u'(α₀) + q* (flux) or L*(u(α₀))u'(α₀) − p*u(α₀) (convective).
    pub boundary_alpha0: f64,
    /// u(ξ) − 0 (flux) or u(ξ) − 1 (convective).
    pub boundary_xi: f64,
    /// u'(ξ) + Mξ (flux) or L*(u(ξ))u'(ξ) − 2ξ/(a Ste) (convective).
    pub stefan: f64,
    /// max over interior nodes of |[L* η^ν u']' + (2/a) η^{ν+1} N* u'|.
    pub ode_interior: f64,
    /// Convective only: max |u'_fd − p*α₀^ν E/((1 + p*Φ(ξ)) η^ν L*)|.
    pub derivative_identity: Option<f64>,
}

/// Residuals of `u` as a solution with front coefficient equal to its right end.
pub fn residuals(problem: &DimensionlessProblem, u: &ProfileFunction) -> Result<Residuals> {
    let grid = u.grid();
    let n = grid.len();
    let xi = u.end();
    let h = (xi - grid[0]) / (n - 1) as f64;
    let uniform = grid
        .iter()
        .enumerate()
        .all(|(i, &x)| (x - (grid[0] + h * i as f64)).abs() <= 1e-12 * xi.abs().max(1.0));
    if !uniform {
        return Err(StefanError::invalid("profile", "residuals need a uniform grid"));
    }
    let model = &problem.model;
    let (a, nu) = (problem.a, problem.nu);
    let vals = u.values();
    let du = fd_derivative(vals, h);
    let flux: Vec<f64> = (0..n)
        .map(|i| model.conductivity(vals[i]) * grid[i].powf(nu) * du[i])
        .collect();
    let dflux = fd_derivative(&flux, h);
    let ode_interior = (1..n - 1)
        .map(|i| (dflux[i] + 2.0 / a * grid[i].powf(nu + 1.0) * model.capacity(vals[i]) * du[i]).abs())
        .fold(0.0, f64::max);
    let l0 = model.conductivity(vals[0]);
    let lxi = model.conductivity(vals[n - 1]);
    let (boundary_alpha0, boundary_xi, stefan, derivative_identity) = match problem.bc {
        BoundaryCondition::HeatFlux { qstar, m } => (l0 * du[0] + qstar, vals[n - 1], du[n - 1] + m * xi, None),
        BoundaryCondition::Convective { pstar, ste } => {
            let table = kernel_table(u, model, a, nu)?;
            let denom = 1.0 + pstar * table.phi_end();
            let an = problem.alpha0.powf(nu);
            let ident = (0..n)
                .map(|i| {
                    let exact = pstar * an * table.e[i] / (denom * grid[i].powf(nu) * model.conductivity(vals[i]));
                    (du[i] - exact).abs()
                })
                .fold(0.0, f64::max);
            (
                l0 * du[0] - pstar * vals[0],
                vals[n - 1] - 1.0,
                lxi * du[n - 1] - 2.0 * xi / (a * ste),
                Some(ident),
            )
        }
    };
    Ok(Residuals {
        boundary_alpha0,
        boundary_xi,
        stefan,
        ode_interior,
        derivative_identity,
    })
}
