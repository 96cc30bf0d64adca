use super::{solve_tridiagonal, Field, Grid, TridiagonalSystem};
use crate::error::Result;
use crate::params::ModelParams;

/// Finite-volume system for `-lambda2 Psi'' = 3P - N + rho_hl` with the
/// capacitor-type Robin conditions
/// `Psi - alpha0 Psi' = dpsi0_pzc` at 0 and `Psi + alpha1 Psi' = V - dpsi1_pzc` at 1.
///
/// Interior rows read `lambda2 (-Psi[i-1] + 2 Psi[i] - Psi[i+1]) / h = h f[i]`;
/// the boundary rows are half-cell balances whose outer flux comes from the
/// Robin relation. The matrix is symmetric with positive diagonal and is
/// strictly diagonally dominant on both boundary rows.
pub fn assemble_poisson(
    params: &ModelParams,
    grid: &Grid,
    p: &[f64],
    n: &[f64],
) -> Result<TridiagonalSystem> {
    grid.check(p)?;
    grid.check(n)?;
    let m = grid.intervals();
    let h = grid.h();
    let l2 = params.lambda2;
    let coupling = l2 / h;

    let mut sys = TridiagonalSystem::zeros(grid.nodes());
    for i in 0..=m {
        let source = params.charge_density(p[i], n[i]);
        sys.rhs[i] = grid.weight(i) * source;
        if i > 0 {
            sys.sub[i] = -coupling;
            sys.diag[i] += coupling;
        }
        if i < m {
            sys.sup[i] = -coupling;
            sys.diag[i] += coupling;
        }
    }
    sys.diag[0] += l2 / params.alpha0;
    sys.rhs[0] += l2 * params.dpsi0_pzc / params.alpha0;
    sys.diag[m] += l2 / params.alpha1;
    sys.rhs[m] += l2 * (params.v - params.dpsi1_pzc) / params.alpha1;
    Ok(sys)
}

pub fn solve_poisson(params: &ModelParams, grid: &Grid, p: &[f64], n: &[f64]) -> Result<Field> {
    solve_tridiagonal(&assemble_poisson(params, grid, p, n)?)
}
