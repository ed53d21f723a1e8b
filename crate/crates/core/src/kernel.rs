//! The integral kernels of the similarity problem and their a priori envelopes.
//!
//! For a profile u on [α₀, ξ]:
//!
//! ```text
//! E(η, u) = exp(−(2/a) ∫_{α₀}^{η} s N*(u(s)) / L*(u(s)) ds)
//! Φ(η, u) = α₀^ν ∫_{α₀}^{η} E(v, u) / (v^ν L*(u(v))) dv
//! ```
//!
//! Both are accumulated panel by panel over the profile grid. Inside a panel
//! the outer integral of Φ is adaptive Gauss–Kronrod; the inner integral of E
//! up to each outer node is a fixed 15-point rule from the left edge of the
//! current subinterval, plus the running sum over subintervals already done.

use crate::error::{Result, StefanError};
use crate::profile::ProfileFunction;
use crate::quad::{combine, gk15, kronrod_nodes};
use crate::specfun::lower_gamma_difference;
use crate::thermal::{CoefficientModel, ModelBounds};

/// Absolute tolerance per panel for both the exponent integral and Φ.
const PANEL_TOL: f64 = 1e-13;
const MAX_DEPTH: u32 = 30;

/// E and Φ at every node of a profile's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub grid: Vec<f64>,
    pub e: Vec<f64>,
    pub phi: Vec<f64>,
}

impl KernelTable {
    pub fn phi_end(&self) -> f64 {
        self.phi[self.phi.len() - 1]
    }

    pub fn e_end(&self) -> f64 {
        self.e[self.e.len() - 1]
    }
}

struct Kernel<'a> {
    u: &'a ProfileFunction,
    model: &'a CoefficientModel,
    two_over_a: f64,
    nu: f64,
    alpha0_nu: f64,
}

impl<'a> Kernel<'a> {
    fn new(u: &'a ProfileFunction, model: &'a CoefficientModel, a: f64, nu: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(StefanError::invalid("a", "must be > 0"));
        }
        let alpha0 = u.start();
        if !(alpha0 > 0.0) {
            return Err(StefanError::Domain(format!(
                "profile must start at alpha0 > 0, starts at {alpha0}"
            )));
        }
        Ok(Kernel {
            u,
            model,
            two_over_a: 2.0 / a,
            nu,
            alpha0_nu: alpha0.powf(nu),
        })
    }

    /// s N*(u(s)) / L*(u(s)) on panel `i`.
    #[inline]
    fn exponent_integrand(&self, i: usize, s: f64) -> f64 {
        let v = self.u.eval_in_panel(i, s);
        s * self.model.capacity(v) / self.model.conductivity(v)
    }

    /// Integrate over [lo, hi] ⊂ panel `i` with E(lo) = exp(log_e_lo).
    /// Returns (∫ s N/L ds, Φ increment).
    fn panel(&self, i: usize, lo: f64, hi: f64, log_e_lo: f64) -> Result<(f64, f64)> {
        if hi <= lo {
            return Ok((0.0, 0.0));
        }
        let mut acc = 0.0;
        let mut phi = 0.0;
        self.recurse(i, lo, hi, log_e_lo, PANEL_TOL, 0, &mut acc, &mut phi)?;
        Ok((acc, phi))
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        i: usize,
        c: f64,
        d: f64,
        log_e_lo: f64,
        tol: f64,
        depth: u32,
        acc: &mut f64,
        phi: &mut f64,
    ) -> Result<()> {
        let mut g = |s: f64| self.exponent_integrand(i, s);
        let inner = gk15(&mut g, c, d);
        let nodes = kronrod_nodes(c, d);
        let mut fx = [0.0; 15];
        for (f, &v) in fx.iter_mut().zip(nodes.iter()) {
            let partial = *acc + gk15(&mut g, c, v).value;
            let e = (log_e_lo - self.two_over_a * partial).exp();
            let l = self.model.conductivity(self.u.eval_in_panel(i, v));
            *f = self.alpha0_nu * e / (v.powf(self.nu) * l);
        }
        let outer = combine(c, d, &fx);
        if !(outer.value.is_finite() && inner.value.is_finite()) {
            return Err(StefanError::Quadrature {
                lo: c,
                hi: d,
                tol,
                estimate: f64::NAN,
            });
        }
        let floor = 50.0 * f64::EPSILON;
        let ok_inner = inner.error <= tol.max(floor * inner.value.abs());
        let ok_outer = outer.error <= tol.max(floor * outer.value.abs());
        if ok_inner && ok_outer {
            *acc += inner.value;
            *phi += outer.value;
            return Ok(());
        }
        if depth >= MAX_DEPTH {
            return Err(StefanError::Quadrature {
                lo: c,
                hi: d,
                tol,
                estimate: inner.error.max(outer.error),
            });
        }
        let mid = 0.5 * (c + d);
        self.recurse(i, c, mid, log_e_lo, 0.5 * tol, depth + 1, acc, phi)?;
        self.recurse(i, mid, d, log_e_lo, 0.5 * tol, depth + 1, acc, phi)
    }

    fn table(&self) -> Result<KernelTable> {
        let grid = self.u.grid();
        let n = grid.len();
        let mut e = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        let mut log_e = 0.0;
        let mut cum_phi = 0.0;
        e.push(1.0);
        phi.push(0.0);
        for i in 0..n - 1 {
            let (g, dphi) = self.panel(i, grid[i], grid[i + 1], log_e)?;
            log_e -= self.two_over_a * g;
            cum_phi += dphi;
            e.push(log_e.exp());
            phi.push(cum_phi);
        }
        Ok(KernelTable {
            grid: grid.to_vec(),
            e,
            phi,
        })
    }

    /// (E(η), Φ(η)) at an arbitrary η in the profile's domain.
    fn at(&self, eta: f64) -> Result<(f64, f64)> {
        if !self.u.contains(eta) {
            return Err(StefanError::Domain(format!(
                "eta = {eta} outside [{}, {}]",
                self.u.start(),
                self.u.end()
            )));
        }
        let eta = eta.clamp(self.u.start(), self.u.end());
        let grid = self.u.grid();
        let p = self.u.panel_of(eta);
        let mut log_e = 0.0;
        let mut phi = 0.0;
        for i in 0..p {
            let (g, dphi) = self.panel(i, grid[i], grid[i + 1], log_e)?;
            log_e -= self.two_over_a * g;
            phi += dphi;
        }
        let (g, dphi) = self.panel(p, grid[p], eta, log_e)?;
        log_e -= self.two_over_a * g;
        phi += dphi;
        Ok((log_e.exp(), phi))
    }
}

/// E and Φ at every node of `u`'s grid; α₀ is the first grid node.
pub fn kernel_table(u: &ProfileFunction, model: &CoefficientModel, a: f64, nu: f64) -> Result<KernelTable> {
    Kernel::new(u, model, a, nu)?.table()
}

/// E(η, u).
pub fn kernel_e(u: &ProfileFunction, model: &CoefficientModel, a: f64, eta: f64) -> Result<f64> {
    // ν does not enter E.
    Kernel::new(u, model, a, 0.5)?.at(eta).map(|(e, _)| e)
}

/// Φ(η, u).
pub fn kernel_phi(
    u: &ProfileFunction,
    model: &CoefficientModel,
    a: f64,
    nu: f64,
    alpha0: f64,
    eta: f64,
) -> Result<f64> {
    let rel = (u.start() - alpha0).abs() / alpha0.abs().max(1.0);
    if rel > 1e-14 {
        return Err(StefanError::Domain(format!(
            "profile starts at {} but alpha0 = {alpha0}",
            u.start()
        )));
    }
    Kernel::new(u, model, a, nu)?.at(eta).map(|(_, phi)| phi)
}

/// Closed-form envelopes of E and Φ and the Lipschitz factors of both kernels,
/// valid for every profile whose values keep L*, N* inside `bounds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds {
    pub bounds: ModelBounds,
    pub a: f64,
    pub nu: f64,
    pub alpha0: f64,
}

/// Envelopes for the given model bounds.
pub fn kernel_envelopes(bounds: &ModelBounds, a: f64, nu: f64, alpha0: f64) -> Result<KernelBounds> {
    bounds.validate()?;
    if !(a > 0.0 && alpha0 > 0.0 && nu > 0.0 && nu < 1.0) {
        return Err(StefanError::invalid(
            "kernel_envelopes",
            "need a > 0, alpha0 > 0, 0 < nu < 1",
        ));
    }
    Ok(KernelBounds {
        bounds: *bounds,
        a,
        nu,
        alpha0,
    })
}

impl KernelBounds {
    fn span(&self, eta: f64) -> f64 {
        eta * eta - self.alpha0 * self.alpha0
    }

    /// exp(−N_M (η² − α₀²) / (a L_m)).
    pub fn e_lo(&self, eta: f64) -> f64 {
        (-self.bounds.n_max * self.span(eta) / (self.a * self.bounds.l_min)).exp()
    }

    /// exp(−N_m (η² − α₀²) / (a L_M)).
    pub fn e_hi(&self, eta: f64) -> f64 {
        (-self.bounds.n_min * self.span(eta) / (self.a * self.bounds.l_max)).exp()
    }

    /// α₀^ν/(2L) · e^{kα₀²} · k^{(ν−1)/2} · [γ(s, kη²) − γ(s, kα₀²)], s = (1−ν)/2,
    /// which is α₀^ν ∫ exp(−k(v² − α₀²)) v^{−ν} dv / L.
    fn gaussian_moment(&self, k: f64, l: f64, eta: f64) -> f64 {
        let s = 0.5 * (1.0 - self.nu);
        let x0 = k * self.alpha0 * self.alpha0;
        let x1 = k * eta.max(self.alpha0) * eta.max(self.alpha0);
        let diff = lower_gamma_difference(s, x0, x1).unwrap_or(0.0);
        self.alpha0.powf(self.nu) / (2.0 * l) * x0.exp() * k.powf(-s) * diff
    }

    /// Lower envelope of Φ (rate N_M/(aL_m), weight 1/L_M).
    pub fn phi_lo(&self, eta: f64) -> f64 {
        let b = &self.bounds;
        self.gaussian_moment(b.n_max / (self.a * b.l_min), b.l_max, eta)
    }

    /// Upper envelope of Φ (rate N_m/(aL_M), weight 1/L_m).
    pub fn phi_hi(&self, eta: f64) -> f64 {
        let b = &self.bounds;
        self.gaussian_moment(b.n_min / (self.a * b.l_max), b.l_min, eta)
    }

    /// (1/(aL_m)) (Ñ + N_M L̃ / L_m): |E(η,u) − E(η,u*)| ≤ factor · (η² − α₀²) · ‖u − u*‖.
    pub fn e_lipschitz_factor(&self) -> f64 {
        let b = &self.bounds;
        (b.n_lip + b.n_max * b.l_lip / b.l_min) / (self.a * b.l_min)
    }

    /// Lipschitz factor of E at η.
    pub fn e_lipschitz(&self, eta: f64) -> f64 {
        self.e_lipschitz_factor() * self.span(eta)
    }

    /// Lipschitz factor of Φ at η: |Φ(η,u) − Φ(η,u*)| ≤ Φ̃(α₀, η) ‖u − u*‖.
    pub fn phi_tilde(&self, eta: f64) -> f64 {
        let b = &self.bounds;
        let nu = self.nu;
        let a0 = self.alpha0;
        let p1 = 1.0 - nu;
        let p3 = 3.0 - nu;
        let moment = eta.powf(p3) / p3 - a0 * a0 * eta.powf(p1) / p1 + 2.0 * a0.powf(p3) / (p3 * p1);
        let weight = b.l_lip * (eta.powf(p1) - a0.powf(p1)) / p1;
        a0.powf(nu) / (b.l_min * b.l_min) * ((b.n_lip + b.n_max * b.l_lip / b.l_min) / self.a * moment + weight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::lower_gamma;

    fn flat(alpha0: f64, xi: f64, c: f64) -> ProfileFunction {
        ProfileFunction::uniform(alpha0, xi, 65, |_| c).unwrap()
    }

    #[test]
    fn identities_at_alpha0() {
        let u = ProfileFunction::uniform(0.5, 1.5, 65, |x| 1.0 - 0.3 * x).unwrap();
        let m = CoefficientModel::linear(0.4, 0.8);
        assert_eq!(kernel_e(&u, &m, 1.3, 0.5).unwrap(), 1.0);
        assert_eq!(kernel_phi(&u, &m, 1.3, 0.4, 0.5, 0.5).unwrap(), 0.0);
        let t = kernel_table(&u, &m, 1.3, 0.4).unwrap();
        assert_eq!(t.e[0], 1.0);
        assert_eq!(t.phi[0], 0.0);
    }

    #[test]
    fn constant_model_e_is_gaussian() {
        let u = flat(0.5, 1.0, 0.0);
        let e = kernel_e(&u, &CoefficientModel::Constant, 1.0, 1.0).unwrap();
        assert!((e - (-0.75f64).exp()).abs() < 1e-13);
        assert!((e - 0.472_366_552_7).abs() < 1e-9);
    }

    #[test]
    fn constant_model_phi_matches_incomplete_gamma() {
        // α₀^ν · ½ e^{α₀²/a} a^{(1−ν)/2} [γ(s, η²/a) − γ(s, α₀²/a)], a = 1, ν = 1/2
        let u = flat(0.5, 1.0, 0.0);
        let phi = kernel_phi(&u, &CoefficientModel::Constant, 1.0, 0.5, 0.5, 1.0).unwrap();
        let s = 0.25;
        let expected =
            0.5f64.sqrt() * 0.5 * 0.25f64.exp() * (lower_gamma(s, 1.0).unwrap() - lower_gamma(s, 0.25).unwrap());
        assert!((phi - expected).abs() < 1e-12, "{phi} vs {expected}");
    }

    #[test]
    fn table_and_pointwise_agree() {
        let u = ProfileFunction::uniform(0.7, 1.9, 65, |x| (x - 0.7) * 0.8).unwrap();
        let m = CoefficientModel::linear(1.0, 1.0);
        let t = kernel_table(&u, &m, 0.8, 0.3).unwrap();
        for &k in &[5usize, 31, 64] {
            let e = kernel_e(&u, &m, 0.8, t.grid[k]).unwrap();
            let phi = kernel_phi(&u, &m, 0.8, 0.3, 0.7, t.grid[k]).unwrap();
            assert!((e - t.e[k]).abs() < 1e-15);
            assert!((phi - t.phi[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_is_increasing() {
        let u = ProfileFunction::uniform(0.5, 2.0, 65, |x| x.sin().abs()).unwrap();
        let m = CoefficientModel::linear(0.5, 2.0);
        let t = kernel_table(&u, &m, 1.0, 0.5).unwrap();
        assert!(t.phi.windows(2).all(|w| w[0] < w[1]));
        assert!(t.e.windows(2).all(|w| w[0] > w[1]));
        assert!(t.e.iter().all(|&e| e > 0.0 && e <= 1.0));
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let u = flat(0.5, 1.0, 0.0);
        assert!(kernel_e(&u, &CoefficientModel::Constant, 1.0, 1.2).is_err());
        assert!(kernel_phi(&u, &CoefficientModel::Constant, 1.0, 0.5, 0.6, 0.8).is_err());
    }

    #[test]
    fn constant_envelopes_collapse() {
        let kb = kernel_envelopes(&ModelBounds::UNIT, 1.0, 0.5, 0.5).unwrap();
        for &eta in &[0.5, 0.8, 1.3] {
            assert_eq!(kb.e_lo(eta), kb.e_hi(eta));
            assert!((kb.e_lo(eta) - (-(eta * eta - 0.25f64)).exp()).abs() < 1e-15);
            assert_eq!(kb.phi_lo(eta), kb.phi_hi(eta));
            assert_eq!(kb.phi_tilde(eta), 0.0);
        }
    }

    #[test]
    fn phi_tilde_reevaluated_by_hand() {
        // α=β=1 on [0,1]: L_m=1, N_M=2, L̃=Ñ=1; a=1, ν=1/2, α₀=1, η=2
        let b = crate::thermal::CoefficientModel::linear(1.0, 1.0).bounds_on(0.0, 1.0);
        let kb = kernel_envelopes(&b, 1.0, 0.5, 1.0).unwrap();
        let bracket = 2f64.powf(2.5) / 2.5 - 2f64.powf(0.5) / 0.5 + 2.0 / (2.5 * 0.5);
        let expected = (1.0 + 2.0) * bracket + (2f64.sqrt() - 1.0) / 0.5;
        assert!((kb.phi_tilde(2.0) - expected).abs() < 1e-13);
        assert_eq!(kb.phi_tilde(1.0), 0.0);
    }
}
