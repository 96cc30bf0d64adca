#![allow(dead_code)]

use ddcorr_core::discretization::{solve_poisson, Field, Grid, TridiagonalSystem};
use ddcorr_core::params::{pzc_interval_left, pzc_interval_right, InterfaceKinetics};
use ddcorr_core::timeloop::{FieldSpec, RunConfig};
use ddcorr_core::{ModelParams, Side, Species};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Default parameters (application values, symmetric kinetics) on `M = 100`.
pub fn default_config() -> RunConfig {
    RunConfig::new(ModelParams::default(), Grid::new(100).unwrap())
}

/// Random admissible parameters: `rho_hl = -5, Pm = 2, Nm = 1`, kinetics
/// with `m, k` in [0.5, 2] and `a, b` in [0.1, 0.9], drops inside their
/// intervals. Draws with an empty interval are rejected and redrawn.
pub fn random_admissible_params(rng: &mut StdRng) -> ModelParams {
    loop {
        let mut p = ModelParams::default();
        for species in Species::ALL {
            for side in Side::ALL {
                *p.kinetics.get_mut(species, side) = InterfaceKinetics {
                    m: rng.random_range(0.5..2.0),
                    k: rng.random_range(0.5..2.0),
                    a: rng.random_range(0.1..0.9),
                    b: rng.random_range(0.1..0.9),
                };
            }
        }
        p.v = rng.random_range(-1.0..1.0);
        let left = pzc_interval_left(&p);
        let right = pzc_interval_right(&p);
        if left.is_empty() || right.is_empty() {
            continue;
        }
        p.dpsi0_pzc = rng.random_range(left.lower..=left.upper);
        p.dpsi1_pzc = rng.random_range(right.lower..=right.upper);
        return p;
    }
}

/// Random nodal data in `[0, ceiling]`, written to a temporary CSV.
pub fn random_profile_file(rng: &mut StdRng, grid: &Grid, ceiling: f64, tag: &str) -> FieldSpec {
    let text: String = (0..grid.nodes())
        .map(|_| format!("{:.17e}\n", rng.random_range(0.0..=ceiling)))
        .collect();
    let path = std::env::temp_dir().join(format!("ddcorr-test-{}-{tag}.csv", std::process::id()));
    std::fs::write(&path, text).unwrap();
    FieldSpec::File(path)
}

/// Coupled fixed point with `Psi ≡ 0`: each carrier sits at the kinetic
/// equilibrium `gamma / beta` of both interfaces and `3P - N + rho_hl = 0`.
pub fn equilibrium_config() -> RunConfig {
    let mut cfg = default_config();
    let p = &mut cfg.params;
    // P = Pm * 11/12, N = Nm / 2: 3 * 11/6 - 1/2 - 5 = 0
    p.kinetics.get_mut(Species::P, Side::Left).m = 11.0;
    p.kinetics.get_mut(Species::P, Side::Left).k = 1.0;
    p.kinetics.get_mut(Species::P, Side::Right).m = 1.0;
    p.kinetics.get_mut(Species::P, Side::Right).k = 11.0;
    cfg.init.p = Some(FieldSpec::Constant(11.0 / 6.0));
    cfg.init.n = Some(FieldSpec::Constant(0.5));
    cfg
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(sys: &TridiagonalSystem) -> Vec<f64> {
    let n = sys.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        a[i][i] = sys.diag[i];
        if i > 0 {
            a[i][i - 1] = sys.sub[i];
        }
        if i + 1 < n {
            a[i][i + 1] = sys.sup[i];
        }
        a[i][n] = sys.rhs[i];
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..=n {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    x
}

/// `-lambda2 Psi'' = c` with both Robin conditions, closed form.
pub fn quadratic_exact(p: &ModelParams, c: f64) -> impl Fn(f64) -> f64 {
    let q = c / p.lambda2;
    // Psi = -q x²/2 + A + B x
    // A - alpha0 B = d0 ; A + (1 + alpha1) B = V - d1 + q/2 + alpha1 q
    let rhs1 = p.dpsi0_pzc;
    let rhs2 = p.v - p.dpsi1_pzc + 0.5 * q + p.alpha1 * q;
    let b = (rhs2 - rhs1) / (1.0 + p.alpha0 + p.alpha1);
    let a = rhs1 + p.alpha0 * b;
    move |x| -0.5 * q * x * x + a + b * x
}

/// `(L² error of the P1 reconstruction, max nodal error)` for constant
/// densities `P ≡ 1, N ≡ 0.5` on `M = m`.
pub fn quadratic_l2_error(m: usize) -> (f64, f64) {
    let params = ModelParams {
        dpsi0_pzc: 0.1,
        v: 0.4,
        dpsi1_pzc: -0.2,
        ..ModelParams::default()
    };
    let grid = Grid::new(m).unwrap();
    // P ≡ 1, N ≡ 0.5: c = 3 - 0.5 - 5 = -2.5
    let p = Field::constant(&grid, 1.0);
    let n = Field::constant(&grid, 0.5);
    let psi = solve_poisson(&params, &grid, &p, &n).unwrap();
    let exact = quadratic_exact(&params, -2.5);
    let nodal = (0..grid.nodes())
        .map(|i| (psi[i] - exact(grid.x(i))).abs())
        .fold(0.0, f64::max);
    // 3-point Gauss per cell on the piecewise-linear reconstruction
    let gauss = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    let h = grid.h();
    let mut acc = 0.0;
    for cell in 0..m {
        for (s, w) in gauss {
            let t = 0.5 * (1.0 + s);
            let x = grid.x(cell) + t * h;
            let approx = (1.0 - t) * psi[cell] + t * psi[cell + 1];
            acc += 0.5 * h * w * (approx - exact(x)).powi(2);
        }
    }
    (acc.sqrt(), nodal)
}
