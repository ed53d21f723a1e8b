//! Explicit solutions for constant coefficients and the bound-constant
//! approximation for linear coefficients.
//!
//! With s = (1 − ν)/2 and k a Gaussian rate,
//!
//! ```text
//! G_k(η) = α₀^ν/2 · e^{kα₀²} · k^{−s} · [γ(s, kη²) − γ(s, kα₀²)]
//!        = α₀^ν ∫_{α₀}^{η} e^{−k(v² − α₀²)} v^{−ν} dv,
//! ```
//!
//! so that for L* = N* = 1 the kernel is Φ = G_{1/a}.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::specfun::lower_gamma_difference;
use crate::thermal::{BoundaryCondition, CoefficientModel, DimensionlessProblem, PhysicalParams};

/// Which explicit solution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    ConstantFlux,
    ConstantConvective,
    LinearConvective,
}

/// Constants of an explicit case. Unused constants are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCase {
    pub kind: ClosedFormKind,
    pub a: f64,
    pub nu: f64,
    pub alpha0: f64,
    pub qstar: f64,
    /// Stefan-condition constant M (heat flux).
    pub m: f64,
    pub pstar: f64,
    pub ste: f64,
    /// N* = 1 + αu.
    pub alpha: f64,
    /// L* = 1 + βu.
    pub beta: f64,
}

const XI_TOL: f64 = 1e-10;

impl ClosedFormCase {
    pub fn constant_flux(a: f64, nu: f64, alpha0: f64, qstar: f64, m: f64) -> Result<Self> {
        let c = ClosedFormCase {
            kind: ClosedFormKind::ConstantFlux,
            a,
            nu,
            alpha0,
            qstar,
            m,
            pstar: 0.0,
            ste: 0.0,
            alpha: 0.0,
            beta: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn constant_convective(a: f64, nu: f64, alpha0: f64, pstar: f64, ste: f64) -> Result<Self> {
        let c = ClosedFormCase {
            kind: ClosedFormKind::ConstantConvective,
            a,
            nu,
            alpha0,
            qstar: 0.0,
            m: 0.0,
            pstar,
            ste,
            alpha: 0.0,
            beta: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn linear_convective(
        a: f64,
        nu: f64,
        alpha0: f64,
        pstar: f64,
        ste: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let c = ClosedFormCase {
            kind: ClosedFormKind::LinearConvective,
            a,
            nu,
            alpha0,
            qstar: 0.0,
            m: 0.0,
            pstar,
            ste,
            alpha,
            beta,
        };
        c.validate()?;
        Ok(c)
    }

    /// The explicit case matching a reduced problem, if there is one.
    pub fn from_problem(problem: &DimensionlessProblem) -> Result<Self> {
        let (a, nu, a0) = (problem.a, problem.nu, problem.alpha0);
        match (&problem.model, problem.bc) {
            (CoefficientModel::Constant, BoundaryCondition::HeatFlux { qstar, m }) => {
                Self::constant_flux(a, nu, a0, qstar, m)
            }
            (CoefficientModel::Constant, BoundaryCondition::Convective { pstar, ste }) => {
                Self::constant_convective(a, nu, a0, pstar, ste)
            }
            (CoefficientModel::Linear { alpha, beta }, BoundaryCondition::Convective { pstar, ste }) => {
                Self::linear_convective(a, nu, a0, pstar, ste, *alpha, *beta)
            }
            _ => Err(StefanError::invalid(
                "model",
                "explicit solutions exist for constant coefficients and for linear coefficients with the convective condition",
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(StefanError::invalid(name, format!("must be > 0, got {v}")))
            }
        };
        pos("a", self.a)?;
        pos("alpha0", self.alpha0)?;
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(StefanError::invalid(
                "nu",
                format!("must satisfy 0 < nu < 1, got {}", self.nu),
            ));
        }
        match self.kind {
            ClosedFormKind::ConstantFlux => {
                pos("qstar", self.qstar)?;
                pos("m", self.m)
            }
            ClosedFormKind::ConstantConvective | ClosedFormKind::LinearConvective => {
                pos("pstar", self.pstar)?;
                pos("ste", self.ste)?;
                if !(self.alpha >= 0.0 && self.beta >= 0.0) {
                    return Err(StefanError::invalid("alpha, beta", "must be >= 0"));
                }
                Ok(())
            }
        }
    }

    fn require(&self, kind: ClosedFormKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(StefanError::invalid(
                "kind",
                format!("expected {kind:?}, got {:?}", self.kind),
            ))
        }
    }

    fn check_eta(&self, xi: f64, eta: f64) -> Result<()> {
        if !(xi > self.alpha0) {
            return Err(StefanError::Domain(format!(
                "xi = {xi} must exceed alpha0 = {}",
                self.alpha0
            )));
        }
        if !(eta >= self.alpha0 && eta <= xi) {
            return Err(StefanError::Domain(format!(
                "eta = {eta} outside [{}, {xi}]",
                self.alpha0
            )));
        }
        Ok(())
    }

    /// α₀^ν/2 · e^{kα₀²} · k^{−s} · [γ(s, kη₂²) − γ(s, kη₁²)].
    fn gaussian_moment(&self, k: f64, eta1: f64, eta2: f64) -> f64 {
        let s = 0.5 * (1.0 - self.nu);
        let a0 = self.alpha0;
        let diff = lower_gamma_difference(s, k * eta1 * eta1, k * eta2 * eta2).unwrap_or(f64::NAN);
        a0.powf(self.nu) / 2.0 * (k * a0 * a0).exp() * k.powf(-s) * diff
    }

    /// Φ(η) for constant coefficients.
    pub fn constant_phi(&self, eta: f64) -> f64 {
        self.gaussian_moment(1.0 / self.a, self.alpha0, eta)
    }

    /// E(η) = exp(−(η² − α₀²)/a).
    pub fn constant_e(&self, eta: f64) -> f64 {
        (-(eta * eta - self.alpha0 * self.alpha0) / self.a).exp()
    }

    /// Rate (1 + α)/(a(1 + 2β)) of the linear-case Φ.
    fn linear_rate(&self) -> f64 {
        (1.0 + self.alpha) / (self.a * (1.0 + 2.0 * self.beta))
    }

    /// Φ(η) of the linear case with bound constants substituted.
    pub fn linear_phi(&self, eta: f64) -> f64 {
        self.gaussian_moment(self.linear_rate(), self.alpha0, eta) / (1.0 + self.beta)
    }

    /// E(η) of the linear case with bound constants substituted.
    pub fn linear_e(&self, eta: f64) -> f64 {
        let k = (1.0 + self.alpha) / (self.a * (1.0 + self.beta));
        (-k * (eta * eta - self.alpha0 * self.alpha0)).exp()
    }

    /// Matching function of the case as a function of ξ (M-based for heat flux).
    pub fn matching(&self, xi: f64) -> f64 {
        let an = self.alpha0.powf(self.nu);
        match self.kind {
            ClosedFormKind::ConstantFlux => self.qstar * an * self.constant_e(xi) / self.m,
            ClosedFormKind::ConstantConvective => {
                self.a * an * self.pstar * self.ste * self.constant_e(xi)
                    / (2.0 * (1.0 + self.pstar * self.constant_phi(xi)))
            }
            ClosedFormKind::LinearConvective => {
                self.a * an * self.pstar * self.ste * self.linear_e(xi)
                    / (2.0 * (1.0 + self.pstar * self.linear_phi(xi)))
            }
        }
    }
}

/// u(η) = q*[Φ(ξ) − Φ(η)] for constant coefficients.
pub fn constant_flux_profile(case: &ClosedFormCase, xi: f64, eta: f64) -> Result<f64> {
    case.require(ClosedFormKind::ConstantFlux)?;
    case.check_eta(xi, eta)?;
    Ok(case.qstar * case.gaussian_moment(1.0 / case.a, eta, xi))
}

/// φ(ξ) = q*α₀^ν λ₀ e^{−(ξ² − α₀²)/a} / (2 l_m γ_m).
pub fn constant_flux_matching_physical(case: &ClosedFormCase, physical: &PhysicalParams, xi: f64) -> f64 {
    case.qstar * case.alpha0.powf(case.nu) * physical.lambda0 * case.constant_e(xi)
        / (2.0 * physical.l_m * physical.gamma_m)
}

/// Root of φ(ξ) = ξ^{ν+1} with φ from physical latent-heat data.
pub fn constant_flux_front(case: &ClosedFormCase, physical: &PhysicalParams) -> Result<f64> {
    case.require(ClosedFormKind::ConstantFlux)?;
    physical.validate()?;
    matching_root(case.alpha0, case.nu, |xi| {
        constant_flux_matching_physical(case, physical, xi)
    })
}

/// Root of q*α₀^ν E(ξ)/M = ξ^{ν+1}, the form the general solver uses.
pub fn constant_flux_front_m(case: &ClosedFormCase) -> Result<f64> {
    case.require(ClosedFormKind::ConstantFlux)?;
    matching_root(case.alpha0, case.nu, |xi| case.matching(xi))
}

/// u(η) = (1 + p*Φ(η)) / (1 + p*Φ(ξ)) for constant coefficients.
pub fn constant_convective_profile(case: &ClosedFormCase, xi: f64, eta: f64) -> Result<f64> {
    case.require(ClosedFormKind::ConstantConvective)?;
    case.check_eta(xi, eta)?;
    if eta == xi {
        return Ok(1.0);
    }
    Ok((1.0 + case.pstar * case.constant_phi(eta)) / (1.0 + case.pstar * case.constant_phi(xi)))
}

/// Root of φ_c(ξ) = ξ^{ν+1}.
pub fn constant_convective_front(case: &ClosedFormCase) -> Result<f64> {
    case.require(ClosedFormKind::ConstantConvective)?;
    matching_root(case.alpha0, case.nu, |xi| case.matching(xi))
}

/// Ratio form of the linear case with bound constants substituted.
pub fn linear_convective_profile(case: &ClosedFormCase, xi: f64, eta: f64) -> Result<f64> {
    case.require(ClosedFormKind::LinearConvective)?;
    case.check_eta(xi, eta)?;
    if eta == xi {
        return Ok(1.0);
    }
    Ok((1.0 + case.pstar * case.linear_phi(eta)) / (1.0 + case.pstar * case.linear_phi(xi)))
}

/// Root of φ̃_c(ξ) = ξ^{ν+1}.
pub fn linear_convective_front(case: &ClosedFormCase) -> Result<f64> {
    case.require(ClosedFormKind::LinearConvective)?;
    matching_root(case.alpha0, case.nu, |xi| case.matching(xi))
}

/// Root above α₀ of φ(ξ) = ξ^{ν+1} for a non-increasing φ.
///
/// The bracket [α₀, φ(α₀)^{1/(ν+1)}] always contains the root, since φ never
/// exceeds φ(α₀).
pub fn matching_root(alpha0: f64, nu: f64, phi: impl Fn(f64) -> f64) -> Result<f64> {
    let p = nu + 1.0;
    let f0 = phi(alpha0);
    if !(f0 > alpha0.powf(p)) {
        return Err(StefanError::NoRoot(format!(
            "matching function at alpha0 is {f0}, not above alpha0^(nu+1) = {}; the melt front would not pass the boiling front",
            alpha0.powf(p)
        )));
    }
    let mut lo = alpha0;
    let mut hi = f0.powf(1.0 / p);
    if !(phi(hi) - hi.powf(p) <= 0.0) {
        return Err(StefanError::Bracket(format!("matching defect not negative at {hi}")));
    }
    while hi - lo > XI_TOL {
        let mid = 0.5 * (lo + hi);
        if phi(mid) - mid.powf(p) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
