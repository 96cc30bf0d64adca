use super::{sg_flux, solve_tridiagonal, Field, Grid, TridiagonalSystem};
use crate::error::{Error, Result};
use crate::kinetics::boundary_coefficients;
use crate::params::{ModelParams, Side, Species};

/// Fully implicit finite-volume step for one carrier with the potential lagged.
///
/// Node `i` balances `eps_u w_i (u_i - u_old_i) / dt + J_{i+1/2} - J_{i-1/2} = 0`,
/// with Scharfetter-Gummel fluxes `J` built from `psi`. At the ends the outer
/// flux is the Butler-Volmer rate: `-J(0) = beta0 u_0 - gamma0` and
/// `J(1) = beta1 u_M - gamma1`, all coefficients evaluated at `psi`.
///
/// The result is a Z-matrix with positive diagonal whose column sums equal
/// `eps_u w_i / dt` (plus `beta` on the boundary columns), hence an M-matrix.
pub fn assemble_carrier(
    params: &ModelParams,
    grid: &Grid,
    species: Species,
    u_old: &[f64],
    psi: &[f64],
    dt: f64,
) -> Result<TridiagonalSystem> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    grid.check(u_old)?;
    grid.check(psi)?;
    let m = grid.intervals();
    let h = grid.h();
    let eps = params.species(species).time_coeff;

    let mut sys = TridiagonalSystem::zeros(grid.nodes());
    for i in 0..=m {
        let mass = eps * grid.weight(i) / dt;
        sys.diag[i] = mass;
        sys.rhs[i] = mass * u_old[i];
    }
    // J_{i+1/2} = (B(s) u_i - B(-s) u_{i+1}) / h enters row i with + and row i+1 with -
    for i in 0..m {
        let dpsi = psi[i + 1] - psi[i];
        let from_left = sg_flux(species, 1.0, 0.0, dpsi, h);
        let from_right = -sg_flux(species, 0.0, 1.0, dpsi, h);
        sys.diag[i] += from_left;
        sys.sup[i] = -from_right;
        sys.sub[i + 1] = -from_left;
        sys.diag[i + 1] += from_right;
    }

    let (beta0, gamma0) = boundary_coefficients(params, species, Side::Left, psi[0])?;
    sys.diag[0] += beta0;
    sys.rhs[0] += gamma0;
    let (beta1, gamma1) = boundary_coefficients(params, species, Side::Right, psi[m])?;
    sys.diag[m] += beta1;
    sys.rhs[m] += gamma1;
    Ok(sys)
}

pub fn solve_carrier(
    params: &ModelParams,
    grid: &Grid,
    species: Species,
    u_old: &[f64],
    psi: &[f64],
    dt: f64,
) -> Result<Field> {
    solve_tridiagonal(&assemble_carrier(params, grid, species, u_old, psi, dt)?)
}
