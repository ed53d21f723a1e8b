//! Material data, temperature-dependent coefficient models and the reduction
//! of the dimensional problem to similarity form.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, StefanError};
use crate::profile::ProfileFunction;

/// Dimensional material and process constants (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Reference thermal conductivity λ₀ [W/(m·K)].
    pub lambda0: f64,
    /// Reference specific heat c₀ [J/(kg·K)].
    pub c0: f64,
    /// Reference density ρ₀ [kg/m³].
    pub rho0: f64,
    /// Melting temperature [K].
    pub theta_m: f64,
    /// Boiling temperature [K].
    pub theta_b: f64,
    /// Ionization temperature of the vapour [K].
    pub theta_im: f64,
    /// Reference bulk temperature near the boiling front [K].
    pub theta_star: f64,
    /// Latent heat of melting [J/kg].
    pub l_m: f64,
    /// Latent heat of boiling [J/kg].
    pub l_b: f64,
    /// Density at melting [kg/m³].
    pub gamma_m: f64,
    /// Density at boiling [kg/m³].
    pub gamma_b: f64,
    /// Arc power constant P₀.
    pub p0: f64,
    /// Cross-section exponent, 0 < ν < 1.
    pub nu: f64,
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(StefanError::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

pub(crate) fn require_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 && nu < 1.0 {
        Ok(())
    } else {
        Err(StefanError::invalid("nu", format!("must satisfy 0 < nu < 1, got {nu}")))
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("lambda0", self.lambda0)?;
        require_positive("c0", self.c0)?;
        require_positive("rho0", self.rho0)?;
        require_positive("theta_m", self.theta_m)?;
        require_positive("l_m", self.l_m)?;
        require_positive("l_b", self.l_b)?;
        require_positive("gamma_m", self.gamma_m)?;
        require_positive("gamma_b", self.gamma_b)?;
        require_positive("p0", self.p0)?;
        require_nu(self.nu)?;
        for (name, v) in [
            ("theta_b", self.theta_b),
            ("theta_im", self.theta_im),
            ("theta_star", self.theta_star),
        ] {
            if !v.is_finite() {
                return Err(StefanError::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Thermal diffusivity a = λ₀ / (c₀ ρ₀).
    pub fn diffusivity(&self) -> f64 {
        self.lambda0 / (self.c0 * self.rho0)
    }
}

/// Tabulated coefficients, linearly interpolated in u and held constant outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub u: Vec<f64>,
    pub conductivity: Vec<f64>,
    pub capacity: Vec<f64>,
}

impl CoefficientTable {
    fn validate(&self) -> Result<()> {
        let n = self.u.len();
        if n < 2 || self.conductivity.len() != n || self.capacity.len() != n {
            return Err(StefanError::invalid(
                "model.table",
                "needs at least two rows and equal-length u/conductivity/capacity columns",
            ));
        }
        if !self.u.windows(2).all(|w| w[0] < w[1]) || !self.u.iter().all(|v| v.is_finite()) {
            return Err(StefanError::invalid(
                "model.table.u",
                "must be finite and strictly increasing",
            ));
        }
        if !self
            .conductivity
            .iter()
            .chain(&self.capacity)
            .all(|v| v.is_finite() && *v > 0.0)
        {
            return Err(StefanError::invalid(
                "model.table",
                "coefficients must be finite and > 0",
            ));
        }
        Ok(())
    }

    fn interpolate(&self, column: &[f64], u: f64) -> f64 {
        let n = self.u.len();
        if u <= self.u[0] {
            return column[0];
        }
        if u >= self.u[n - 1] {
            return column[n - 1];
        }
        let i = self.u.partition_point(|&x| x <= u) - 1;
        let t = (u - self.u[i]) / (self.u[i + 1] - self.u[i]);
        column[i] + t * (column[i + 1] - column[i])
    }

    fn range_stats(&self, column: &[f64], lo: f64, hi: f64) -> (f64, f64, f64) {
        let mut min = self.interpolate(column, lo).min(self.interpolate(column, hi));
        let mut max = self.interpolate(column, lo).max(self.interpolate(column, hi));
        for (&u, &v) in self.u.iter().zip(column) {
            if u > lo && u < hi {
                min = min.min(v);
                max = max.max(v);
            }
        }
        let mut lip: f64 = 0.0;
        for i in 0..self.u.len() - 1 {
            if self.u[i + 1] > lo && self.u[i] < hi {
                lip = lip.max(((column[i + 1] - column[i]) / (self.u[i + 1] - self.u[i])).abs());
            }
        }
        (min, max, lip)
    }
}

/// Dimensionless conductivity L*(u) and volumetric heat capacity N*(u).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientModel {
    /// L* = N* = 1.
    #[default]
    Constant,
    /// L* = 1 + βu, N* = 1 + αu.
    Linear { alpha: f64, beta: f64 },
    /// Piecewise-linear table in u.
    Table(CoefficientTable),
}

/// Bounds and Lipschitz constants of a model over a range of u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBounds {
    pub l_min: f64,
    pub l_max: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub l_lip: f64,
    pub n_lip: f64,
}

impl ModelBounds {
    pub const UNIT: ModelBounds = ModelBounds {
        l_min: 1.0,
        l_max: 1.0,
        n_min: 1.0,
        n_max: 1.0,
        l_lip: 0.0,
        n_lip: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.l_min > 0.0
            && self.n_min > 0.0
            && self.l_min <= self.l_max
            && self.n_min <= self.n_max
            && self.l_max.is_finite()
            && self.n_max.is_finite()
            && self.l_lip >= 0.0
            && self.n_lip >= 0.0
            && self.l_lip.is_finite()
            && self.n_lip.is_finite();
        if ok {
            Ok(())
        } else {
            Err(StefanError::invalid("model bounds", format!("{self:?}")))
        }
    }
}

impl CoefficientModel {
    pub fn linear(alpha: f64, beta: f64) -> Self {
        CoefficientModel::Linear { alpha, beta }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientModel::Constant => Ok(()),
            CoefficientModel::Linear { alpha, beta } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(StefanError::invalid(
                        "model.alpha",
                        format!("must be >= 0, got {alpha}"),
                    ));
                }
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(StefanError::invalid("model.beta", format!("must be >= 0, got {beta}")));
                }
                Ok(())
            }
            CoefficientModel::Table(t) => t.validate(),
        }
    }

    #[inline]
    pub fn conductivity(&self, u: f64) -> f64 {
        match self {
            CoefficientModel::Constant => 1.0,
            CoefficientModel::Linear { beta, .. } => 1.0 + beta * u,
            CoefficientModel::Table(t) => t.interpolate(&t.conductivity, u),
        }
    }

    #[inline]
    pub fn capacity(&self, u: f64) -> f64 {
        match self {
            CoefficientModel::Constant => 1.0,
            CoefficientModel::Linear { alpha, .. } => 1.0 + alpha * u,
            CoefficientModel::Table(t) => t.interpolate(&t.capacity, u),
        }
    }

    /// Bounds of L*, N* and their Lipschitz constants for u ∈ [lo, hi].
    pub fn bounds_on(&self, lo: f64, hi: f64) -> ModelBounds {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        match self {
            CoefficientModel::Constant => ModelBounds::UNIT,
            CoefficientModel::Linear { alpha, beta } => {
                let (l0, l1) = (1.0 + beta * lo, 1.0 + beta * hi);
                let (n0, n1) = (1.0 + alpha * lo, 1.0 + alpha * hi);
                ModelBounds {
                    l_min: l0.min(l1),
                    l_max: l0.max(l1),
                    n_min: n0.min(n1),
                    n_max: n0.max(n1),
                    l_lip: beta.abs(),
                    n_lip: alpha.abs(),
                }
            }
            CoefficientModel::Table(t) => {
                let (l_min, l_max, l_lip) = t.range_stats(&t.conductivity, lo, hi);
                let (n_min, n_max, n_lip) = t.range_stats(&t.capacity, lo, hi);
                ModelBounds {
                    l_min,
                    l_max,
                    n_min,
                    n_max,
                    l_lip,
                    n_lip,
                }
            }
        }
    }

    /// Smallest conductivity over u ≥ 0.
    fn conductivity_floor(&self) -> f64 {
        match self {
            CoefficientModel::Constant => 1.0,
            CoefficientModel::Linear { .. } => 1.0,
            CoefficientModel::Table(t) => t.conductivity.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Which condition is imposed on the known boiling front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    HeatFlux,
    Convective,
}

/// Boundary data of the reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// L*(u(α₀)) u'(α₀) = −q*, u(ξ) = 0, u'(ξ) = −Mξ.
    HeatFlux { qstar: f64, m: f64 },
    /// L*(u(α₀)) u'(α₀) = p* u(α₀), u(ξ) = 1, L*(1) u'(ξ) = 2ξ/(a Ste).
    Convective { pstar: f64, ste: f64 },
}

impl BoundaryCondition {
    pub fn kind(&self) -> BoundaryKind {
        match self {
            BoundaryCondition::HeatFlux { .. } => BoundaryKind::HeatFlux,
            BoundaryCondition::Convective { .. } => BoundaryKind::Convective,
        }
    }
}

/// Sign of θ_m − θ* in the convective scaling; Ste is stored as a magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureOrdering {
    MeltAboveReference,
    MeltBelowReference,
}

/// Dimensional factors kept alongside a flux problem built from physical data,
/// so the alternative constant-coefficient matching function can be reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxScaling {
    pub lambda0: f64,
    pub theta_m: f64,
    pub latent_density: f64,
}

/// The problem in similarity variables η = z / (2√t) on α₀ ≤ η ≤ ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessProblem {
    /// Thermal diffusivity a.
    pub a: f64,
    /// Boiling-front coefficient α₀.
    pub alpha0: f64,
    /// Cross-section exponent ν.
    pub nu: f64,
    pub model: CoefficientModel,
    pub bc: BoundaryCondition,
    #[serde(default)]
    pub flux_scaling: Option<FluxScaling>,
    #[serde(default)]
    pub ordering: Option<TemperatureOrdering>,
}

impl DimensionlessProblem {
    pub fn heat_flux(a: f64, alpha0: f64, nu: f64, qstar: f64, m: f64, model: CoefficientModel) -> Result<Self> {
        let p = DimensionlessProblem {
            a,
            alpha0,
            nu,
            model,
            bc: BoundaryCondition::HeatFlux { qstar, m },
            flux_scaling: None,
            ordering: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn convective(a: f64, alpha0: f64, nu: f64, pstar: f64, ste: f64, model: CoefficientModel) -> Result<Self> {
        let p = DimensionlessProblem {
            a,
            alpha0,
            nu,
            model,
            bc: BoundaryCondition::Convective { pstar, ste },
            flux_scaling: None,
            ordering: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("a", self.a)?;
        require_positive("alpha0", self.alpha0)?;
        require_nu(self.nu)?;
        self.model.validate()?;
        match self.bc {
            BoundaryCondition::HeatFlux { qstar, m } => {
                require_positive("qstar", qstar)?;
                require_positive("m", m)
            }
            BoundaryCondition::Convective { pstar, ste } => {
                require_positive("pstar", pstar)?;
                require_positive("ste", ste)
            }
        }
    }

    pub fn kind(&self) -> BoundaryKind {
        self.bc.kind()
    }

    /// Value of u on the melting isotherm.
    pub fn melt_value(&self) -> f64 {
        match self.bc {
            BoundaryCondition::HeatFlux { .. } => 0.0,
            BoundaryCondition::Convective { .. } => 1.0,
        }
    }

    /// Dimensionless conductivity on the melting isotherm, L*(u(ξ)).
    pub fn melt_conductivity(&self) -> f64 {
        self.model.conductivity(self.melt_value())
    }

    /// Value of the matching function as ξ → α₀⁺ (E → 1, Φ → 0).
    pub fn matching_at_alpha0(&self) -> f64 {
        let an = self.alpha0.powf(self.nu);
        match self.bc {
            BoundaryCondition::HeatFlux { qstar, m } => qstar * an / (m * self.melt_conductivity()),
            BoundaryCondition::Convective { pstar, ste } => self.a * an * pstar * ste / 2.0,
        }
    }

    /// A priori upper bound for any root of the matching condition: the
    /// matching function never exceeds its value at α₀.
    pub fn xi_cap(&self) -> f64 {
        self.alpha0.max(self.matching_at_alpha0().powf(1.0 / (1.0 + self.nu)))
    }

    /// Range of u the iterates can occupy on [α₀, ξ].
    pub fn working_range(&self, xi: f64) -> (f64, f64) {
        match self.bc {
            BoundaryCondition::Convective { .. } => (0.0, 1.0),
            BoundaryCondition::HeatFlux { qstar, .. } => {
                // u(η) ≤ q* Φ(ξ) ≤ q* α₀^ν ∫ v^{−ν} dv / min L*, using E ≤ 1.
                let z = xi.max(self.xi_cap());
                let s = 1.0 - self.nu;
                let umax = qstar * self.alpha0.powf(self.nu) * (z.powf(s) - self.alpha0.powf(s))
                    / (s * self.model.conductivity_floor());
                (0.0, umax.max(0.0))
            }
        }
    }

    /// Model bounds over `working_range(xi)`.
    pub fn bounds(&self, xi: f64) -> ModelBounds {
        let (lo, hi) = self.working_range(xi);
        self.model.bounds_on(lo, hi)
    }
}

/// Reduce the heat-flux problem to similarity form.
pub fn reduce_flux(params: &PhysicalParams, model: CoefficientModel, alpha0: f64) -> Result<DimensionlessProblem> {
    params.validate()?;
    require_positive("alpha0", alpha0)?;
    model.validate()?;
    let a = params.diffusivity();
    let qstar = params.p0 * (-alpha0 * alpha0).exp() / (alpha0 * params.theta_m * PI.sqrt());
    // λ(θ_m) from the dimensional model: θ = θ_m ↔ u = 0 in the flux scaling.
    let lambda_melt = params.lambda0 * model.conductivity(0.0);
    let m = 2.0 * params.l_m * params.gamma_m / (params.lambda0 * params.theta_m * lambda_melt);
    let mut p = DimensionlessProblem::heat_flux(a, alpha0, params.nu, qstar, m, model)?;
    p.flux_scaling = Some(FluxScaling {
        lambda0: params.lambda0,
        theta_m: params.theta_m,
        latent_density: params.l_m * params.gamma_m,
    });
    Ok(p)
}

/// Reduce the convective problem to similarity form.
///
/// Ste is taken as |θ_m − θ*| c₀ / l_m; the sign of θ_m − θ* is kept in
/// `ordering`.
pub fn reduce_convective(
    params: &PhysicalParams,
    model: CoefficientModel,
    alpha0: f64,
) -> Result<DimensionlessProblem> {
    params.validate()?;
    require_positive("alpha0", alpha0)?;
    model.validate()?;
    let diff = params.theta_m - params.theta_star;
    if diff == 0.0 {
        return Err(StefanError::invalid(
            "theta_star",
            "must differ from theta_m (the convective scaling divides by theta_m - theta_star)",
        ));
    }
    let a = params.diffusivity();
    let q = params.p0 * (-alpha0 * alpha0).exp();
    let pstar = q / (params.lambda0 * PI.sqrt());
    let ste = diff.abs() * params.c0 / params.l_m;
    let mut p = DimensionlessProblem::convective(a, alpha0, params.nu, pstar, ste, model)?;
    p.ordering = Some(if diff > 0.0 {
        TemperatureOrdering::MeltAboveReference
    } else {
        TemperatureOrdering::MeltBelowReference
    });
    Ok(p)
}

/// Map a dimensionless profile back to a dimensional temperature at (z, t).
pub fn dimensional_temperature(
    u: &ProfileFunction,
    problem: &DimensionlessProblem,
    params: &PhysicalParams,
    z: f64,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(StefanError::Domain(format!("time must be positive, got {t}")));
    }
    let eta = z / (2.0 * t.sqrt());
    if !u.contains(eta) {
        return Err(StefanError::Domain(format!(
            "eta = {eta} outside the liquid region [{}, {}]",
            u.start(),
            u.end()
        )));
    }
    let v = u.eval(eta);
    Ok(temperature_from_u(problem.kind(), params.theta_m, params.theta_star, v))
}

/// θ from u: θ_m(u + 1) for the flux scaling, θ* + (θ_m − θ*)u for the convective one.
pub fn temperature_from_u(kind: BoundaryKind, theta_m: f64, theta_star: f64, u: f64) -> f64 {
    match kind {
        BoundaryKind::HeatFlux => theta_m * (u + 1.0),
        BoundaryKind::Convective => theta_star + (theta_m - theta_star) * u,
    }
}
