//! Metallic-vapour zone: the parabolic temperature profile and the boiling
//! front coefficient α₀.
//!
//! With θ₁ = Az² + Bz + C on 0 < z < α(t) = 2α₀√t, the end values fix
//! B = 0, C = θ_im, A = (θ_b − θ_im)/(4α₀²t), and the flux balance at the
//! boiling front
//!
//! ```text
//! −λ₀ ∂θ₁/∂z |_{z=α(t)} = P₀/(2√(πt)) − l_b γ_b α'(t)
//! ```
//!
//! reduces to a quadratic α₀² + Dα₀ + E = 0 with
//! D = −P₀/(2 l_b γ_b √π) and E = −λ₀(θ_b − θ_im)/(l_b γ_b).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::thermal::PhysicalParams;

/// Boiling-front coefficient together with the parabola and quadratic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaporSolution {
    pub alpha0: f64,
    /// θ₁ = (A/t) z² + B z + C; `a_scaled` holds A·t.
    pub a_scaled: f64,
    pub b: f64,
    pub c: f64,
    /// α₀² + dα₀ + e = 0.
    pub d: f64,
    pub e: f64,
    /// Both roots of the quadratic were positive; the smaller one was taken.
    pub ambiguous: bool,
}

/// Positive root of α² + dα + e = 0.
///
/// Returns the root and whether a second positive root was discarded.
pub fn positive_root(d: f64, e: f64) -> Result<(f64, bool)> {
    if !(d.is_finite() && e.is_finite()) {
        return Err(StefanError::invalid("d, e", "quadratic coefficients must be finite"));
    }
    let disc = d * d - 4.0 * e;
    if disc < 0.0 {
        return Err(StefanError::NoRoot(format!(
            "alpha0^2 + {d} alpha0 + {e} = 0 has negative discriminant {disc}"
        )));
    }
    // q = −(d + sign(d)√disc)/2; roots q and e/q avoid cancellation.
    let sq = disc.sqrt();
    let q = -0.5 * (d + if d >= 0.0 { sq } else { -sq });
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, e / q) };
    let mut positive: Vec<f64> = [r1, r2].into_iter().filter(|r| *r > 0.0).collect();
    positive.sort_by(f64::total_cmp);
    let ambiguous = positive.len() == 2 && positive[0] != positive[1];
    let root = *positive
        .first()
        .ok_or_else(|| StefanError::NoRoot(format!("alpha0^2 + {d} alpha0 + {e} = 0 has no positive root")))?;
    // One Newton step to polish the last bits.
    let f = root * root + d * root + e;
    let df = 2.0 * root + d;
    let polished = if df != 0.0 { root - f / df } else { root };
    let root = if polished > 0.0 && (polished * polished + d * polished + e).abs() <= f.abs() {
        polished
    } else {
        root
    };
    Ok((root, ambiguous))
}

/// Quadratic coefficients (d, e) of the boiling-front equation.
pub fn quadratic_coefficients(params: &PhysicalParams) -> (f64, f64) {
    let lg = params.l_b * params.gamma_b;
    let d = -params.p0 / (2.0 * lg * PI.sqrt());
    let e = -params.lambda0 * (params.theta_b - params.theta_im) / lg;
    (d, e)
}

/// α₀ and the vapour-zone parabola.
pub fn solve_alpha0(params: &PhysicalParams) -> Result<VaporSolution> {
    params.validate()?;
    let (d, e) = quadratic_coefficients(params);
    let (alpha0, ambiguous) = positive_root(d, e)?;
    Ok(VaporSolution {
        alpha0,
        a_scaled: (params.theta_b - params.theta_im) / (4.0 * alpha0 * alpha0),
        b: 0.0,
        c: params.theta_im,
        d,
        e,
        ambiguous,
    })
}

impl VaporSolution {
    /// Residual of α₀² + dα₀ + e.
    pub fn quadratic_residual(&self) -> f64 {
        self.alpha0 * self.alpha0 + self.d * self.alpha0 + self.e
    }

    /// Boiling front position α(t) = 2α₀√t.
    pub fn front(&self, t: f64) -> f64 {
        2.0 * self.alpha0 * t.sqrt()
    }

    /// Flux balance at the boiling front: −λ₀θ₁_z − P₀/(2√(πt)) + l_bγ_bα'(t).
    pub fn flux_balance_residual(&self, params: &PhysicalParams, t: f64) -> Result<f64> {
        check_time(t)?;
        let alpha = self.front(t);
        let grad = 2.0 * (self.a_scaled / t) * alpha + self.b;
        let speed = self.alpha0 / t.sqrt();
        Ok(-params.lambda0 * grad - params.p0 / (2.0 * (PI * t).sqrt()) + params.l_b * params.gamma_b * speed)
    }
}

/// θ₁(z, t) = z²(θ_b − θ_im)/(4α₀²t) + θ_im on 0 ≤ z ≤ α(t).
pub fn vapor_temperature(sol: &VaporSolution, params: &PhysicalParams, z: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let front = sol.front(t);
    if !(z >= 0.0 && z <= front) {
        return Err(StefanError::Domain(format!(
            "z = {z} outside the vapour zone [0, {front}] at t = {t}"
        )));
    }
    if z == front {
        return Ok(params.theta_b);
    }
    Ok(z * z * (params.theta_b - params.theta_im) / (4.0 * sol.alpha0 * sol.alpha0 * t) + params.theta_im)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(StefanError::Domain(format!(
            "time must be positive and finite, got {t}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysicalParams {
        PhysicalParams {
            lambda0: 1.3,
            c0: 1.0,
            rho0: 1.0,
            theta_m: 1.0,
            theta_b: 2.0,
            theta_im: 5.0,
            theta_star: 0.5,
            l_m: 1.0,
            l_b: 0.7,
            gamma_b: 1.1,
            gamma_m: 1.0,
            p0: 20.0,
            nu: 0.5,
        }
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(positive_root(3.0, -4.0).unwrap(), (1.0, false));
        assert_eq!(positive_root(0.0, -9.0).unwrap(), (3.0, false));
        assert!(matches!(positive_root(1.0, 1.0), Err(StefanError::NoRoot(_))));
        assert!(positive_root(3.0, 2.0).is_err());
    }

    #[test]
    fn two_positive_roots_take_the_smaller() {
        // (α − 1)(α − 2)
        let (r, amb) = positive_root(-3.0, 2.0).unwrap();
        assert_eq!(r, 1.0);
        assert!(amb);
    }

    #[test]
    fn solution_satisfies_quadratic_and_balance() {
        let p = params();
        let sol = solve_alpha0(&p).unwrap();
        assert!(sol.alpha0 > 0.0);
        // θ_b < θ_im: both roots positive, the slower front is taken.
        assert!(sol.ambiguous);
        assert!(sol.quadratic_residual().abs() < 1e-12);
        assert_eq!(sol.b, 0.0);
        assert_eq!(sol.c, p.theta_im);
        for &t in &[0.5, 1.0, 4.0] {
            assert!(sol.flux_balance_residual(&p, t).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn hotter_boiling_front_gives_a_unique_root() {
        let p = PhysicalParams {
            theta_b: 6.0,
            ..params()
        };
        let sol = solve_alpha0(&p).unwrap();
        assert!(!sol.ambiguous);
        assert!(sol.quadratic_residual().abs() < 1e-12);
        assert!(sol.flux_balance_residual(&p, 1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn weak_source_has_no_front() {
        let p = PhysicalParams { p0: 2.5, ..params() };
        assert!(matches!(solve_alpha0(&p), Err(StefanError::NoRoot(_))));
    }

    #[test]
    fn endpoint_temperatures() {
        let p = params();
        let sol = solve_alpha0(&p).unwrap();
        let t = 2.0;
        let front = sol.front(t);
        assert_eq!(vapor_temperature(&sol, &p, 0.0, t).unwrap(), p.theta_im);
        assert_eq!(vapor_temperature(&sol, &p, front, t).unwrap(), p.theta_b);
        let mid = vapor_temperature(&sol, &p, 0.5 * front, t).unwrap();
        assert!((mid - ((p.theta_b - p.theta_im) / 4.0 + p.theta_im)).abs() < 1e-14);
        assert!(vapor_temperature(&sol, &p, 1.01 * front, t).is_err());
        assert!(vapor_temperature(&sol, &p, 0.1, 0.0).is_err());
    }

    #[test]
    fn decreasing_when_boiling_below_ionization() {
        let p = params();
        let sol = solve_alpha0(&p).unwrap();
        let front = sol.front(1.0);
        let mut last = f64::INFINITY;
        for k in 0..=50 {
            let v = vapor_temperature(&sol, &p, front * k as f64 / 50.0, 1.0).unwrap();
            assert!(v < last);
            last = v;
        }
    }
}
