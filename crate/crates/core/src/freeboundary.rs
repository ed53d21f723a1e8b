//! The melt-front coefficient ξ from the matching condition φ(ξ) = ξ^{ν+1}.
//!
//! Heat flux: φ(ξ) = q*α₀^ν E(ξ, u) / (M L*(0)), so that u'(ξ) = −Mξ.
//! Convective: φ^c(ξ) = a α₀^ν p* Ste E(ξ, u) / (2(1 + p*Φ(ξ, u))), so that
//! L*(1) u'(ξ) = 2ξ/(a Ste).
//!
//! Each trial ξ needs its own converged profile, so the outer bisection runs a
//! full Picard iteration per candidate.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::fixedpoint::{
    epsilon, kernel_bounds, residuals, solve_fixed_point, xi_star, FixedPointConfig, FixedPointReport, Residuals,
};
use crate::kernel::kernel_table;
use crate::profile::linspace;
use crate::thermal::{BoundaryCondition, DimensionlessProblem};

/// Width of the final ξ bracket.
pub const XI_TOL: f64 = 1e-10;
/// Points in the coarse scan for additional sign changes.
const MULTIPLICITY_SCAN: usize = 12;

/// One matching-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingSample {
    pub xi: f64,
    pub phi: f64,
    pub iterations: usize,
    pub epsilon_estimate: f64,
}

/// Result of the front solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSolveReport {
    pub xi: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi_star: f64,
    /// φ(ξ) − ξ^{ν+1} at the reported ξ.
    pub defect: f64,
    /// Every matching evaluation in the order it was made.
    pub phi_values: Vec<MatchingSample>,
    /// The converged fixed point at the reported ξ.
    pub solution: FixedPointReport,
    /// ε(α₀, ξ₂) < 1.
    pub admissible: bool,
    /// φ₂(ξ*) < ξ*^{ν+1}; heat flux only.
    pub latent_heat_ok: Option<bool>,
    /// The sampled matching values were non-increasing in ξ.
    pub monotone_matching: bool,
    /// Sign changes of the defect found by the coarse scan of the bracket.
    pub sign_changes: usize,
    pub warnings: Vec<String>,
    pub residuals: Residuals,
}

impl FrontSolveReport {
    /// Melt front position β(t) = 2ξ√t.
    pub fn front_position(&self, t: f64) -> f64 {
        2.0 * self.xi * t.sqrt()
    }
}

/// Matching function evaluated on a converged profile.
fn matching_value(problem: &DimensionlessProblem, report: &FixedPointReport) -> Result<f64> {
    let table = kernel_table(&report.profile, &problem.model, problem.a, problem.nu)?;
    let an = problem.alpha0.powf(problem.nu);
    Ok(match problem.bc {
        BoundaryCondition::HeatFlux { qstar, m } => qstar * an * table.e_end() / (m * problem.melt_conductivity()),
        BoundaryCondition::Convective { pstar, ste } => {
            problem.a * an * pstar * ste * table.e_end() / (2.0 * (1.0 + pstar * table.phi_end()))
        }
    })
}

fn matching(problem: &DimensionlessProblem, xi: f64, cfg: &FixedPointConfig) -> Result<(f64, FixedPointReport)> {
    let report = solve_fixed_point(problem, xi, cfg)?;
    let phi = matching_value(problem, &report)?;
    Ok((phi, report))
}

/// φ(ξ) for the heat-flux condition.
pub fn phi_flux(xi: f64, problem: &DimensionlessProblem, cfg: &FixedPointConfig) -> Result<f64> {
    if !matches!(problem.bc, BoundaryCondition::HeatFlux { .. }) {
        return Err(StefanError::invalid("bc", "phi_flux needs the heat-flux condition"));
    }
    matching(problem, xi, cfg).map(|(phi, _)| phi)
}

/// φ^c(ξ) for the convective condition.
pub fn phi_convective(xi: f64, problem: &DimensionlessProblem, cfg: &FixedPointConfig) -> Result<f64> {
    if !matches!(problem.bc, BoundaryCondition::Convective { .. }) {
        return Err(StefanError::invalid(
            "bc",
            "phi_convective needs the convective condition",
        ));
    }
    matching(problem, xi, cfg).map(|(phi, _)| phi)
}

/// Envelopes (φ₁, φ₂) of the matching function at ξ.
///
/// Heat flux: C·E_lo(ξ) and C·E_hi(ξ) with C = q*α₀^ν/(M L*(0)).
/// Convective: (0, (aα₀^ν p* Ste/2)·E_hi(ξ)).
pub fn matching_envelopes(problem: &DimensionlessProblem, xi: f64) -> Result<(f64, f64)> {
    let kb = kernel_bounds(problem, xi.max(problem.xi_cap()))?;
    let c = problem.matching_at_alpha0();
    Ok(match problem.bc {
        BoundaryCondition::HeatFlux { .. } => (c * kb.e_lo(xi), c * kb.e_hi(xi)),
        BoundaryCondition::Convective { .. } => (0.0, c * kb.e_hi(xi)),
    })
}

/// Root above α₀ of f(ξ) = ξ^{ν+1} for a decreasing f with f(α₀) = C.
fn envelope_root(problem: &DimensionlessProblem, f: impl Fn(f64) -> f64) -> Result<f64> {
    let p = problem.nu + 1.0;
    let a0 = problem.alpha0;
    let mut lo = a0;
    let mut hi = problem.xi_cap();
    if !(f(lo) > lo.powf(p)) {
        return Err(StefanError::NoRoot(format!(
            "matching function at alpha0 is {}, not above alpha0^(nu+1) = {}",
            f(lo),
            lo.powf(p)
        )));
    }
    while hi - lo > XI_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > mid.powf(p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn envelope_roots(problem: &DimensionlessProblem) -> Result<(f64, f64)> {
    let xi2 = envelope_root(problem, |x| {
        matching_envelopes(problem, x).map(|e| e.1).unwrap_or(f64::NAN)
    })?;
    let xi1 = match problem.bc {
        BoundaryCondition::HeatFlux { .. } => envelope_root(problem, |x| {
            matching_envelopes(problem, x).map(|e| e.0).unwrap_or(f64::NAN)
        })?,
        BoundaryCondition::Convective { .. } => problem.alpha0,
    };
    Ok((xi1, xi2))
}

/// φ₂(ξ*) < ξ*^{ν+1}; true when ξ* is infinite.
fn latent_heat_condition(problem: &DimensionlessProblem, xi_star: f64) -> Result<bool> {
    if !xi_star.is_finite() {
        return Ok(true);
    }
    let (_, phi2) = matching_envelopes(problem, xi_star)?;
    Ok(phi2 < xi_star.powf(problem.nu + 1.0))
}

/// Roots ξ₁ ≤ ξ₂ of φ₁(ξ) = ξ^{ν+1} and φ₂(ξ) = ξ^{ν+1} (heat flux).
///
/// Fails if the latent-heat hypothesis φ₂(ξ*) < ξ*^{ν+1} does not hold.
pub fn bracket_roots(problem: &DimensionlessProblem) -> Result<(f64, f64)> {
    if !matches!(problem.bc, BoundaryCondition::HeatFlux { .. }) {
        return Err(StefanError::invalid(
            "bc",
            "bracket_roots is defined for the heat-flux condition",
        ));
    }
    let threshold = xi_star(problem)?;
    if !latent_heat_condition(problem, threshold.value)? {
        return Err(StefanError::Bracket(format!(
            "phi2(xi*) >= xi*^(nu+1) at xi* = {}",
            threshold.value
        )));
    }
    envelope_roots(problem)
}

struct Probe<'a> {
    problem: &'a DimensionlessProblem,
    cfg: &'a FixedPointConfig,
    trace: Vec<MatchingSample>,
}

impl Probe<'_> {
    fn defect(&mut self, xi: f64) -> Result<(f64, FixedPointReport)> {
        let (phi, report) = matching(self.problem, xi, self.cfg)?;
        self.trace.push(MatchingSample {
            xi,
            phi,
            iterations: report.iterations,
            epsilon_estimate: report.epsilon_estimate,
        });
        Ok((phi - xi.powf(self.problem.nu + 1.0), report))
    }
}

/// Solve for ξ and the profile on [α₀, ξ].
pub fn solve_front(problem: &DimensionlessProblem, cfg: &FixedPointConfig) -> Result<FrontSolveReport> {
    problem.validate()?;
    cfg.validate()?;
    let a0 = problem.alpha0;
    let p = problem.nu + 1.0;
    let mut warnings = Vec::new();

    let defect_at_alpha0 = problem.matching_at_alpha0() - a0.powf(p);
    if !(defect_at_alpha0 > 0.0) {
        return Err(StefanError::NoRoot(format!(
            "matching function at alpha0 is {}, not above alpha0^(nu+1) = {}; the melt front would not pass the boiling front",
            problem.matching_at_alpha0(),
            a0.powf(p)
        )));
    }
    let threshold = xi_star(problem)?;
    if !threshold.increasing {
        warnings.push("contraction constant is not increasing on the scanned range".to_string());
    }
    let (xi1, xi2) = envelope_roots(problem)?;
    let latent_heat_ok = match problem.bc {
        BoundaryCondition::HeatFlux { .. } => Some(latent_heat_condition(problem, threshold.value)?),
        BoundaryCondition::Convective { .. } => None,
    };
    let admissible = epsilon(problem, xi2)? < 1.0;
    if !admissible {
        warnings.push(format!("contraction constant at xi2 = {xi2} is not below 1"));
    }
    if latent_heat_ok == Some(false) {
        warnings.push("latent-heat inequality phi2(xi*) < xi*^(nu+1) fails".to_string());
    }

    let mut probe = Probe {
        problem,
        cfg,
        trace: Vec::new(),
    };
    let pad = 1e-6 * xi2.max(1.0);
    let mut lo = (xi1 - pad).max(a0);
    let mut hi = xi2 + pad;
    if lo > a0 {
        let (d, _) = probe.defect(lo)?;
        if !(d > 0.0) {
            return Err(StefanError::Bracket(format!(
                "matching defect {d} at lower end {lo} is not positive"
            )));
        }
    }
    let (d_hi, _) = probe.defect(hi)?;
    if !(d_hi < 0.0) {
        return Err(StefanError::Bracket(format!(
            "matching defect {d_hi} at upper end {hi} is not negative"
        )));
    }

    let mut sign_changes = 1;
    if xi2 - xi1 > 1e-6 {
        let pts = linspace(lo, hi, MULTIPLICITY_SCAN + 1);
        let mut last = if lo == a0 {
            defect_at_alpha0
        } else {
            probe.defect(lo)?.0
        };
        let mut changes = 0;
        for &x in &pts[1..] {
            let d = probe.defect(x)?.0;
            if (d > 0.0) != (last > 0.0) {
                changes += 1;
            }
            last = d;
        }
        sign_changes = changes;
        if changes > 1 {
            warnings.push(format!(
                "matching defect changes sign {changes} times on the bracket; the first root is reported"
            ));
            // Narrow the bracket to the first sign change.
            let mut prev = if lo == a0 {
                defect_at_alpha0
            } else {
                probe.defect(lo)?.0
            };
            for w in pts.windows(2) {
                let d = probe.defect(w[1])?.0;
                if (d > 0.0) != (prev > 0.0) {
                    lo = w[0];
                    hi = w[1];
                    break;
                }
                prev = d;
            }
        }
    }

    while hi - lo > XI_TOL {
        let mid = 0.5 * (lo + hi);
        let (d, _) = probe.defect(mid)?;
        if d > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi = 0.5 * (lo + hi);
    let (defect, solution) = probe.defect(xi)?;
    let residuals = residuals(problem, &solution.profile)?;

    let mut sorted = probe.trace.clone();
    sorted.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    let monotone_matching = sorted
        .windows(2)
        .all(|w| w[1].phi <= w[0].phi + 1e-12 * w[0].phi.abs().max(1.0));
    if !monotone_matching {
        warnings.push("matching function is not non-increasing on the sampled points".to_string());
    }

    Ok(FrontSolveReport {
        xi,
        xi1,
        xi2,
        xi_star: threshold.value,
        defect,
        phi_values: probe.trace,
        solution,
        admissible,
        latent_heat_ok,
        monotone_matching,
        sign_changes,
        warnings,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{constant_convective_front, constant_flux_front_m, ClosedFormCase};
    use crate::thermal::CoefficientModel;

    #[test]
    fn constant_flux_matches_closed_form() {
        let p = DimensionlessProblem::heat_flux(1.0, 0.5, 0.5, 1.0, 1.0, CoefficientModel::Constant).unwrap();
        let r = solve_front(&p, &FixedPointConfig::default()).unwrap();
        let c = ClosedFormCase::from_problem(&p).unwrap();
        let xi = constant_flux_front_m(&c).unwrap();
        assert!((r.xi - xi).abs() < 1e-9, "{} vs {xi}", r.xi);
        assert_eq!(r.xi1, r.xi2);
        assert!(r.admissible);
        assert_eq!(r.latent_heat_ok, Some(true));
        assert!(r.defect.abs() < 1e-9);
        assert!((r.front_position(4.0) - 4.0 * r.xi).abs() < 1e-15);
    }

    #[test]
    fn constant_convective_matches_closed_form() {
        let p = DimensionlessProblem::convective(1.0, 0.5, 0.5, 1.0, 2.0, CoefficientModel::Constant).unwrap();
        let r = solve_front(&p, &FixedPointConfig::default()).unwrap();
        let xi = constant_convective_front(&ClosedFormCase::from_problem(&p).unwrap()).unwrap();
        assert!((r.xi - xi).abs() < 1e-9);
        assert_eq!(r.xi1, p.alpha0);
        assert!(r.latent_heat_ok.is_none());
        assert!(r.monotone_matching);
    }

    #[test]
    fn phi_at_alpha0_limit() {
        let p = DimensionlessProblem::heat_flux(1.0, 0.5, 0.5, 1.0, 1.0, CoefficientModel::linear(0.5, 0.5)).unwrap();
        let cfg = FixedPointConfig::default();
        let near = phi_flux(0.5 + 1e-7, &p, &cfg).unwrap();
        // L*(0) = 1 for the linear model.
        assert!((near - p.matching_at_alpha0()).abs() < 1e-6);
        assert!(phi_convective(0.6, &p, &cfg).is_err());
    }

    #[test]
    fn flux_matching_is_sandwiched() {
        let p = DimensionlessProblem::heat_flux(1.0, 0.5, 0.5, 1.0, 1.0, CoefficientModel::linear(0.5, 0.5)).unwrap();
        let cfg = FixedPointConfig::default();
        let (xi1, xi2) = bracket_roots(&p).unwrap();
        assert!(xi1 < xi2);
        for &xi in &[0.55, 0.6, 0.7, 0.8] {
            let phi = phi_flux(xi, &p, &cfg).unwrap();
            let (lo, hi) = matching_envelopes(&p, xi).unwrap();
            assert!(lo <= phi && phi <= hi, "{lo} <= {phi} <= {hi}");
        }
    }

    #[test]
    fn linear_convective_front_is_bracketed() {
        let p = DimensionlessProblem::convective(1.0, 0.5, 0.5, 1.0, 2.0, CoefficientModel::linear(1.0, 1.0)).unwrap();
        let r = solve_front(&p, &FixedPointConfig::default()).unwrap();
        assert!(r.xi > r.xi1 && r.xi <= r.xi2);
        assert!(r.defect.abs() < 1e-9);
        assert_eq!(r.sign_changes, 1);
        assert!(r.monotone_matching);
        assert!(r.residuals.stefan.abs() < 1e-5, "{:?}", r.residuals);
    }

    #[test]
    fn no_root_below_boiling_front() {
        let p = DimensionlessProblem::convective(1.0, 2.0, 0.5, 0.1, 0.5, CoefficientModel::Constant).unwrap();
        assert!(matches!(
            solve_front(&p, &FixedPointConfig::default()),
            Err(StefanError::NoRoot(_))
        ));
    }
}
