//! Property tests for the invariants of each module.

use proptest::prelude::*;

use stefan_core::closedform::{
    constant_convective_front, constant_convective_profile, constant_flux_front_m, constant_flux_profile,
    linear_convective_front, ClosedFormCase,
};
use stefan_core::fixedpoint::{apply_v, apply_w, solve_fixed_point, FixedPointConfig};
use stefan_core::freeboundary::{matching_envelopes, phi_convective, phi_flux};
use stefan_core::kernel::{kernel_envelopes, kernel_table};
use stefan_core::profile::ProfileFunction;
use stefan_core::specfun::{lower_gamma, lower_gamma_difference};
use stefan_core::thermal::{
    dimensional_temperature, reduce_convective, reduce_flux, CoefficientModel, DimensionlessProblem, PhysicalParams,
};
use stefan_core::vapor::positive_root;

fn physical(nu: f64, theta_m: f64, theta_star: f64) -> PhysicalParams {
    PhysicalParams {
        lambda0: 1.0,
        c0: 1.0,
        rho0: 1.0,
        theta_m,
        theta_b: 2.0 * theta_m,
        theta_im: 3.0 * theta_m,
        theta_star,
        l_m: 0.5,
        l_b: 1.0,
        gamma_m: 1.0,
        gamma_b: 1.0,
        p0: 2.0,
        nu,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lower_gamma_is_increasing_in_x(s in 0.05f64..2.0, x in 0.0f64..49.0, dx in 1e-3f64..1.0) {
        let g1 = lower_gamma(s, x).unwrap();
        let g2 = lower_gamma(s, x + dx).unwrap();
        prop_assert!(g2 >= g1);
        // Strict whenever the true increment, at least dx·t^{s−1}e^{−t} at
        // t = x + dx, is resolvable in double precision.
        let t = x + dx;
        let increment = dx * t.powf(s - 1.0) * (-t).exp();
        if increment > 8.0 * f64::EPSILON * g2 {
            prop_assert!(g2 > g1);
        }
    }

    #[test]
    fn lower_gamma_recurrence(s in 0.05f64..2.0, x in 0.0f64..50.0) {
        let lhs = lower_gamma(s + 1.0, x).unwrap();
        let rhs = s * lower_gamma(s, x).unwrap() - x.powf(s) * (-x).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300) || (lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn gamma_difference_is_consistent(s in 0.05f64..0.5, x1 in 0.0f64..10.0, dx in 0.0f64..10.0) {
        let d = lower_gamma_difference(s, x1, x1 + dx).unwrap();
        let direct = lower_gamma(s, x1 + dx).unwrap() - lower_gamma(s, x1).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn quadratic_root_solves_the_equation(d in -20.0f64..20.0, e in -50.0f64..-1e-3) {
        let (r, ambiguous) = positive_root(d, e).unwrap();
        prop_assert!(r > 0.0);
        prop_assert!(!ambiguous);
        prop_assert!((r * r + d * r + e).abs() <= 1e-12 * (r * r + d.abs() * r + e.abs()));
    }

    #[test]
    fn interpolant_hits_nodes_and_keeps_monotone_data_monotone(
        steps in proptest::collection::vec(0.0f64..1.0, 40..80),
    ) {
        let mut acc = 0.0;
        let values: Vec<f64> = steps.iter().map(|s| { acc += s; acc }).collect();
        let n = values.len();
        let grid: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let u = ProfileFunction::from_values(grid.clone(), values.clone()).unwrap();
        for (x, v) in grid.iter().zip(&values) {
            prop_assert_eq!(u.eval(*x), *v);
        }
        let pts = u.norm_points();
        for w in pts.windows(2) {
            prop_assert!(u.eval(w[1]) >= u.eval(w[0]) - 1e-12);
        }
    }

    #[test]
    fn linear_model_bounds_on_unit_range(alpha in 1e-3f64..3.0, beta in 1e-3f64..3.0, u1 in 0.0f64..1.0, du in 1e-6f64..1.0) {
        let m = CoefficientModel::linear(alpha, beta);
        let b = m.bounds_on(0.0, 1.0);
        prop_assert_eq!((b.l_min, b.l_max, b.n_min, b.n_max), (1.0, 1.0 + beta, 1.0, 1.0 + alpha));
        prop_assert_eq!((b.l_lip, b.n_lip), (beta, alpha));
        prop_assert!(m.conductivity(u1) < m.conductivity(u1 + du));
    }

    #[test]
    fn temperature_at_the_melt_front_is_theta_m(
        nu in 0.1f64..0.9, theta_m in 0.5f64..3000.0, star_frac in 0.1f64..0.9, alpha0 in 0.2f64..1.0,
    ) {
        let params = physical(nu, theta_m, star_frac * theta_m);
        for flux in [true, false] {
            let p = if flux {
                reduce_flux(&params, CoefficientModel::Constant, alpha0).unwrap()
            } else {
                reduce_convective(&params, CoefficientModel::Constant, alpha0).unwrap()
            };
            let xi = alpha0 * 1.5;
            let melt = p.melt_value();
            let u = ProfileFunction::uniform(alpha0, xi, 33, |x| melt + (xi - x)).unwrap();
            let t: f64 = 2.0;
            let z = 2.0 * xi * t.sqrt();
            let theta = dimensional_temperature(&u, &p, &params, z, t).unwrap();
            prop_assert!((theta - theta_m).abs() <= 4.0 * f64::EPSILON * theta_m);
        }
    }

    #[test]
    fn closed_form_profiles_hit_their_melt_values(
        a in 0.5f64..2.0, nu in 0.1f64..0.9, alpha0 in 0.2f64..1.0, pstar in 0.5f64..3.0, ste in 1.0f64..3.0,
    ) {
        let flux = ClosedFormCase::constant_flux(a, nu, alpha0, 1.0, 0.5 / alpha0).unwrap();
        let xi = constant_flux_front_m(&flux).unwrap();
        prop_assert_eq!(constant_flux_profile(&flux, xi, xi).unwrap(), 0.0);
        let conv = ClosedFormCase::constant_convective(a, nu, alpha0, pstar, ste * alpha0 / a).unwrap();
        if let Ok(xi) = constant_convective_front(&conv) {
            prop_assert_eq!(constant_convective_profile(&conv, xi, xi).unwrap(), 1.0);
        }
    }

    #[test]
    fn closed_form_matching_is_non_increasing(
        a in 0.5f64..2.0, nu in 0.1f64..0.9, alpha0 in 0.2f64..1.0, alpha in 0.0f64..1.0, beta in 0.0f64..1.0,
    ) {
        let cases = [
            ClosedFormCase::constant_flux(a, nu, alpha0, 1.0, 0.5 / alpha0).unwrap(),
            ClosedFormCase::constant_convective(a, nu, alpha0, 2.0, 4.0 * alpha0 / a).unwrap(),
            ClosedFormCase::linear_convective(a, nu, alpha0, 2.0, 4.0 * alpha0 / a, alpha, beta).unwrap(),
        ];
        let xi = linear_convective_front(&cases[2]).unwrap();
        for case in &cases {
            let mut last = case.matching(alpha0);
            let mut x = alpha0;
            while x < 3.0 * xi {
                x += 1e-3;
                let v = case.matching(x);
                prop_assert!(v <= last + 1e-13 * last.abs());
                last = v;
            }
        }
    }

    #[test]
    fn kernel_identities_and_monotonicity(
        alpha in 0.0f64..2.0, beta in 0.0f64..2.0, a in 0.5f64..2.0, nu in 0.1f64..0.9,
        alpha0 in 0.2f64..1.0, width in 0.05f64..1.0, phase in 0.0f64..6.0,
    ) {
        let model = CoefficientModel::linear(alpha, beta);
        let u = ProfileFunction::uniform(alpha0, alpha0 + width, 65, |x| 0.5 + 0.5 * (5.0 * x + phase).sin()).unwrap();
        let t = kernel_table(&u, &model, a, nu).unwrap();
        prop_assert_eq!(t.e[0], 1.0);
        prop_assert_eq!(t.phi[0], 0.0);
        prop_assert!(t.e.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        prop_assert!(t.phi.windows(2).all(|w| w[1] > w[0]));
        let kb = kernel_envelopes(&model.bounds_on(0.0, 1.0), a, nu, alpha0).unwrap();
        for (i, &eta) in u.grid().iter().enumerate() {
            prop_assert!(t.e[i] >= kb.e_lo(eta) * (1.0 - 1e-12) && t.e[i] <= kb.e_hi(eta) * (1.0 + 1e-12));
            prop_assert!(t.phi[i] >= kb.phi_lo(eta) * (1.0 - 1e-12) - 1e-15);
            prop_assert!(t.phi[i] <= kb.phi_hi(eta) * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn operators_hit_their_melt_values(
        alpha in 0.0f64..1.0, beta in 0.0f64..1.0, alpha0 in 0.2f64..1.0, width in 0.05f64..0.5,
    ) {
        let xi = alpha0 + width;
        let model = CoefficientModel::linear(alpha, beta);
        let u = ProfileFunction::uniform(alpha0, xi, 65, |x| 1.0 - 0.5 * (xi - x)).unwrap();
        let conv = DimensionlessProblem::convective(1.0, alpha0, 0.5, 1.0, 2.0, model.clone()).unwrap();
        let v = apply_v(&u, &conv, xi).unwrap();
        prop_assert_eq!(*v.values().last().unwrap(), 1.0);
        prop_assert!(v.values().iter().all(|&x| x > 0.0 && x <= 1.0));
        let flux = DimensionlessProblem::heat_flux(1.0, alpha0, 0.5, 1.0, 0.5, model).unwrap();
        let w = apply_w(&u.map_values(|x| 1.0 - x).unwrap(), &flux, xi).unwrap();
        prop_assert_eq!(*w.values().last().unwrap(), 0.0);
        prop_assert!(w.values().iter().all(|&x| x >= 0.0));
    }
}

proptest! {
    // Each case runs full Picard solves.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn matching_functions_stay_inside_their_envelopes(
        alpha in 0.0f64..1.0, beta in 0.0f64..1.0, frac in 0.05f64..1.0,
    ) {
        let cfg = FixedPointConfig::default();
        let model = CoefficientModel::linear(alpha, beta);
        let conv = DimensionlessProblem::convective(1.0, 0.5, 0.5, 1.0, 2.0, model.clone()).unwrap();
        let xi = 0.5 + frac * (conv.xi_cap() - 0.5);
        let phi = phi_convective(xi, &conv, &cfg).unwrap();
        let (lo, hi) = matching_envelopes(&conv, xi).unwrap();
        prop_assert!(phi >= 0.0 && lo >= 0.0);
        prop_assert!(phi <= hi * (1.0 + 1e-12));

        let flux = DimensionlessProblem::heat_flux(1.0, 0.5, 0.5, 1.0, 0.5, model).unwrap();
        let xi = 0.5 + frac * (flux.xi_cap() - 0.5);
        let phi = phi_flux(xi, &flux, &cfg).unwrap();
        let (lo, hi) = matching_envelopes(&flux, xi).unwrap();
        prop_assert!(phi >= lo * (1.0 - 1e-12) && phi <= hi * (1.0 + 1e-12), "{} <= {} <= {}", lo, phi, hi);
    }

    #[test]
    fn converged_profile_is_a_fixed_point(alpha in 0.0f64..1.0, beta in 0.0f64..1.0, width in 0.02f64..0.3) {
        let cfg = FixedPointConfig::default();
        let p = DimensionlessProblem::convective(1.0, 0.5, 0.5, 1.0, 2.0, CoefficientModel::linear(alpha, beta)).unwrap();
        let r = solve_fixed_point(&p, 0.5 + width, &cfg).unwrap();
        let again = apply_v(&r.profile, &p, 0.5 + width).unwrap();
        prop_assert!(again.sup_distance(&r.profile) <= 10.0 * cfg.tol);
        if r.epsilon_bound < 1.0 {
            prop_assert!(r.epsilon_estimate <= r.epsilon_bound.max(1.0));
        }
    }
}
