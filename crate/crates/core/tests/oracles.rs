//! Implementation checks against independently coded references.

mod common;

use ddcorr_core::discretization::{
    assemble_carrier, bernoulli, sg_flux, solve_carrier, solve_tridiagonal, Field, Grid,
    TridiagonalSystem,
};
use ddcorr_core::kinetics::{beta, gamma, xi, xi_reduced, xi_sup};
use ddcorr_core::params::{pzc_interval_left, pzc_interval_right, tau_max};
use ddcorr_core::{ModelParams, Side, Species};
use rand::RngExt;

#[test]
fn thomas_matches_dense_elimination() {
    let mut rng = common::rng(11);
    let n = 51;
    for _ in 0..100 {
        let mut sys = TridiagonalSystem::zeros(n);
        for i in 0..n {
            sys.sub[i] = if i > 0 {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            };
            sys.sup[i] = if i + 1 < n {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            };
            let off = sys.sub[i].abs() + sys.sup[i].abs();
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sys.diag[i] = sign * (off + rng.random_range(0.1..2.0));
            sys.rhs[i] = rng.random_range(-10.0..10.0);
        }
        let x = solve_tridiagonal(&sys).unwrap();
        let reference = common::dense_solve(&sys);
        let rhs_norm = sys.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in x.iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
        assert!(sys.residual_inf(&x) <= 1e-12 * (1.0 + rhs_norm));
    }
}

#[test]
fn tau_matches_independent_expression() {
    let mut rng = common::rng(5);
    for _ in 0..1000 {
        let mut p = ModelParams::default();
        p.lambda2 = rng.random_range(0.01..100.0);
        p.epsilon = rng.random_range(1e-4..2.0);
        p.p_max = rng.random_range(0.1..10.0);
        p.n_max = rng.random_range(0.1..10.0);
        p.rho_hl = p.n_max - 3.0 * p.p_max;
        let expected = if 1.0 / (9.0 * p.p_max) < p.epsilon / p.n_max {
            p.lambda2 / (9.0 * p.p_max)
        } else {
            p.lambda2 * p.epsilon / p.n_max
        };
        let tau = tau_max(&p).unwrap();
        assert!(tau > 0.0);
        assert!(((tau - expected) / expected).abs() <= 1e-15);
    }
}

#[test]
fn xi_forms_agree_and_are_nonpositive() {
    let p = ModelParams {
        dpsi0_pzc: 0.2,
        dpsi1_pzc: -0.3,
        ..ModelParams::default()
    };
    for species in Species::ALL {
        for side in Side::ALL {
            for i in 0..10_000 {
                let x = -50.0 + 100.0 * i as f64 / 9_999.0;
                let full = xi(&p, species, side, x).unwrap();
                let reduced = xi_reduced(&p, species, side, x).unwrap();
                // the definitional form cancels gamma against u^m beta
                let um = p.species(species).ceiling;
                let scale = 1.0
                    + gamma(&p, species, side, x).unwrap()
                    + um * beta(&p, species, side, x).unwrap()
                    + full.abs();
                assert!(
                    (full - reduced).abs() <= 1e-12 * scale,
                    "x={x}: {full} vs {reduced}"
                );
                assert!(full <= 1e-10);
            }
        }
    }
}

/// Each endpoint is attained when a particular species/side pair becomes
/// tangent to zero.
#[test]
fn interval_endpoints_are_sharp() {
    let base = ModelParams::default();
    let left = pzc_interval_left(&base);
    let right = pzc_interval_right(&base);
    let cases = [
        (Species::P, Side::Left, left.lower, -0.1),
        (Species::N, Side::Left, left.upper, 0.1),
        (Species::N, Side::Right, right.lower, -0.1),
        (Species::P, Side::Right, right.upper, 0.1),
    ];
    for (species, side, endpoint, outward) in cases {
        let mut p = base;
        match side {
            Side::Left => p.dpsi0_pzc = endpoint,
            Side::Right => p.dpsi1_pzc = endpoint,
        }
        let sup = xi_sup(&p, species, side).unwrap();
        assert!(sup.abs() <= 1e-8, "{species:?}/{side:?}: {sup}");
        match side {
            Side::Left => p.dpsi0_pzc = endpoint + outward,
            Side::Right => p.dpsi1_pzc = endpoint + outward,
        }
        assert!(xi_sup(&p, species, side).unwrap() > 0.0);
    }
}

#[test]
fn beta_gamma_positive() {
    let mut rng = common::rng(3);
    for _ in 0..200 {
        let p = common::random_admissible_params(&mut rng);
        let x = rng.random_range(-50.0..50.0);
        for species in Species::ALL {
            for side in Side::ALL {
                assert!(beta(&p, species, side, x).unwrap() > 0.0);
                assert!(gamma(&p, species, side, x).unwrap() > 0.0);
            }
        }
    }
}

#[test]
fn sg_flux_identities() {
    let h = 0.01;
    for species in Species::ALL {
        let z = species.charge();
        for k in -200..=200 {
            let zd = k as f64 * 0.1;
            let dpsi = zd / z;
            let diffusion = sg_flux(species, 0.7, 0.2, 0.0, h);
            assert!((diffusion - 0.5 / h).abs() <= 1e-13 / h);
            let u = 0.8;
            let drift = sg_flux(species, u, u, dpsi, h);
            assert!((drift + z * u * dpsi / h).abs() * h <= 1e-13 * (1.0 + zd.abs()));
            // Slotboom variable constant: u = e^{-z Psi}
            let psi_left = -0.3 / z;
            let psi_right = psi_left + dpsi;
            let j = sg_flux(
                species,
                (-z * psi_left).exp(),
                (-z * psi_right).exp(),
                dpsi,
                h,
            );
            assert!(
                j.abs() * h <= 1e-13 * (1.0 + (-z * psi_right).exp()),
                "zd={zd}: {j}"
            );
        }
    }
    for x in [0.1, 1.0, 10.0] {
        assert!((bernoulli(-x) - bernoulli(x) - x).abs() < 1e-13);
    }
}

#[test]
fn slotboom_constant_profile_has_no_interior_residual() {
    let params = ModelParams::default();
    let grid = Grid::new(50).unwrap();
    let psi = Field::from_fn(&grid, |x| 0.8 * (3.0 * x).sin());
    for species in Species::ALL {
        let z = species.charge();
        let u = Field::from_fn(&grid, |x| 0.1 * (-z * 0.8 * (3.0 * x).sin()).exp());
        let dt = 0.01;
        let sys = assemble_carrier(&params, &grid, species, &u, &psi, dt).unwrap();
        let au = sys.apply(&u);
        for i in 1..grid.intervals() {
            // flux part vanishes, leaving the mass term which equals rhs
            assert!((au[i] - sys.rhs[i]).abs() <= 1e-12, "node {i}");
        }
    }
}

#[test]
fn poisson_quadratic_convergence() {
    let ms = [25, 50, 100, 200];
    let errors: Vec<(f64, f64)> = ms.iter().map(|&m| common::quadratic_l2_error(m)).collect();
    for (m, (l2, nodal)) in ms.iter().zip(&errors) {
        println!("M = {m:4}  L2 error = {l2:.6e}  nodal error = {nodal:.3e}");
        assert!(*nodal < 1e-12);
    }
    for w in errors.windows(2) {
        let order = (w[0].0 / w[1].0).log2();
        assert!(order >= 1.9, "order {order}");
    }
}

#[test]
fn carrier_steady_limit_matches_closed_form() {
    let mut params = ModelParams::default();
    params.v = 0.3;
    params.kinetics.get_mut(Species::N, Side::Left).m = 2.0;
    params.kinetics.get_mut(Species::N, Side::Right).k = 0.6;
    params.kinetics.get_mut(Species::P, Side::Left).k = 1.7;
    let grid = Grid::new(40).unwrap();
    let psi = Field::constant(&grid, 0.0);
    for species in Species::ALL {
        let b0 = beta(&params, species, Side::Left, 0.0).unwrap();
        let g0 = gamma(&params, species, Side::Left, 0.0).unwrap();
        let b1 = beta(&params, species, Side::Right, params.v).unwrap();
        let g1 = gamma(&params, species, Side::Right, params.v).unwrap();
        // u = A + B x with u'(0) = b0 A - g0 and -u'(1) = b1 (A + B) - g1
        let a = (g1 + g0 * (1.0 + b1)) / (b0 * (1.0 + b1) + b1);
        let b = b0 * a - g0;
        let u_old = Field::from_fn(&grid, |x| 0.3 + 0.2 * x);
        let u = solve_carrier(&params, &grid, species, &u_old, &psi, 1e12).unwrap();
        for i in 0..grid.nodes() {
            let exact = a + b * grid.x(i);
            assert!((u[i] - exact).abs() <= 1e-10, "{species:?} node {i}");
        }
    }
}
