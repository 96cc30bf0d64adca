//! Spatial discretization on a uniform vertex-centred grid over `(0, 1)`.
//!
//! Node `i` owns the control volume `[x_i - h/2, x_i + h/2] ∩ [0, 1]`, so the
//! two boundary nodes carry half cells. Boundary conditions enter through the
//! half-cell flux balances, which keeps every system tridiagonal with `M + 1`
//! unknowns.

mod carrier;
mod flux;
mod grid;
mod poisson;
mod tridiagonal;

pub use carrier::{assemble_carrier, solve_carrier};
pub use flux::{bernoulli, sg_flux};
pub use grid::{Field, Grid};
pub use poisson::{assemble_poisson, solve_poisson};
pub use tridiagonal::{solve_tridiagonal, TridiagonalSystem};
