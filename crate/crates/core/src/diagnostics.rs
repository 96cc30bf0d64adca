//! Executable counterparts of the a priori estimates: discrete norms, time
//! translates, weak-form residuals, and self-convergence studies.
//!
//! Spatial integrals use the trapezoid rule on nodal values and gradients are
//! piecewise-constant differences, matching the vertex-centred scheme.

use serde::Serialize;

use crate::discretization::{sg_flux, Field, Grid};
use crate::error::{Error, Result};
use crate::kinetics::reaction_rate;
use crate::params::{ModelParams, Side, Species};
use crate::timeloop::{run_recording, DtSpec, Recording, RunConfig, SimState, Trajectory};

/// Per-step record written to the time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub k: usize,
    pub t: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub min_n: f64,
    pub max_n: f64,
    /// Squared discrete H1 norms (usual variant) of the new level.
    pub h1_psi: f64,
    pub h1_p: f64,
    pub h1_n: f64,
    /// Carrier fluxes `J(0)` and `J(1)` of the step.
    pub jp0: f64,
    pub jp1: f64,
    pub jn0: f64,
    pub jn1: f64,
    pub mass_res_p: f64,
    pub mass_res_n: f64,
    /// `max_u ‖u^{k+1} - u^k‖∞ / dt`.
    pub stationarity: f64,
    /// `max |Psi|` of the new level; reported, not part of the series columns.
    pub max_abs_psi: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: [&'static str; 16] = [
        "k",
        "t",
        "minP",
        "maxP",
        "minN",
        "maxN",
        "h1Psi",
        "h1P",
        "h1N",
        "JP0",
        "JP1",
        "JN0",
        "JN1",
        "massResP",
        "massResN",
        "stationarity",
    ];

    /// Numeric columns after `k`, in header order.
    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.min_p,
            self.max_p,
            self.min_n,
            self.max_n,
            self.h1_psi,
            self.h1_p,
            self.h1_n,
            self.jp0,
            self.jp1,
            self.jn0,
            self.jn1,
            self.mass_res_p,
            self.mass_res_n,
            self.stationarity,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H1Variant {
    /// `‖u'‖² + ‖u‖²`.
    Usual,
    /// `‖u'‖² + u(0)² + u(1)²`.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    P,
    N,
    Psi,
}

impl Quantity {
    pub fn of(self, state: &SimState) -> &Field {
        match self {
            Quantity::P => &state.p,
            Quantity::N => &state.n,
            Quantity::Psi => &state.psi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakForm {
    Carrier(Species),
    Poisson,
}

/// Trapezoid approximation of `∫ f²`.
pub fn l2_norm_sq(f: &[f64], grid: &Grid) -> Result<f64> {
    grid.check(f)?;
    Ok(f.iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * v * v)
        .sum())
}

fn gradient_sq(f: &[f64], grid: &Grid) -> f64 {
    let h = grid.h();
    f.windows(2)
        .map(|w| {
            let d = (w[1] - w[0]) / h;
            h * d * d
        })
        .sum()
}

pub fn h1_norm_sq(f: &[f64], grid: &Grid, variant: H1Variant) -> Result<f64> {
    grid.check(f)?;
    let grad = gradient_sq(f, grid);
    Ok(match variant {
        H1Variant::Usual => grad + l2_norm_sq(f, grid)?,
        H1Variant::Boundary => grad + f[0] * f[0] + f[f.len() - 1] * f[f.len() - 1],
    })
}

/// `boundary / usual` for one field; both norms are equivalent, so over any
/// family of fields this ratio stays within `[1/κ, κ]` for some `κ`.
pub fn norm_equivalence_ratio(f: &[f64], grid: &Grid) -> Result<f64> {
    Ok(h1_norm_sq(f, grid, H1Variant::Boundary)? / h1_norm_sq(f, grid, H1Variant::Usual)?)
}

/// Flux `J(0)` and `J(1)` of one carrier for a step from `psi_old` to `u_new`.
pub fn boundary_currents(
    params: &ModelParams,
    species: Species,
    u_new: &[f64],
    psi_old: &[f64],
) -> Result<(f64, f64)> {
    let m = u_new.len() - 1;
    let j0 = -reaction_rate(params, species, Side::Left, u_new[0], psi_old[0])?;
    let j1 = reaction_rate(params, species, Side::Right, u_new[m], psi_old[m])?;
    Ok((j0, j1))
}

/// `eps_u Σ w_i (u_new - u_old)_i / dt + J(1) - J(0)`; interior fluxes
/// telescope, so only the boundary rates enter.
pub fn mass_budget_residual(
    params: &ModelParams,
    grid: &Grid,
    species: Species,
    u_old: &[f64],
    u_new: &[f64],
    psi_old: &[f64],
    dt: f64,
) -> Result<f64> {
    grid.check(u_old)?;
    grid.check(u_new)?;
    grid.check(psi_old)?;
    let eps = params.species(species).time_coeff;
    let storage: f64 = (0..grid.nodes())
        .map(|i| grid.weight(i) * (u_new[i] - u_old[i]))
        .sum::<f64>()
        * eps
        / dt;
    let (j0, j1) = boundary_currents(params, species, u_new, psi_old)?;
    Ok(storage + j1 - j0)
}

pub(crate) fn record_step(
    params: &ModelParams,
    grid: &Grid,
    old: &SimState,
    new: &SimState,
    dt: f64,
) -> Result<DiagnosticsRecord> {
    let (jp0, jp1) = boundary_currents(params, Species::P, &new.p, &old.psi)?;
    let (jn0, jn1) = boundary_currents(params, Species::N, &new.n, &old.psi)?;
    let stationarity = new.p.max_abs_diff(&old.p).max(new.n.max_abs_diff(&old.n)) / dt;
    Ok(DiagnosticsRecord {
        k: new.step,
        t: new.time,
        min_p: new.p.min(),
        max_p: new.p.max(),
        min_n: new.n.min(),
        max_n: new.n.max(),
        h1_psi: h1_norm_sq(&new.psi, grid, H1Variant::Usual)?,
        h1_p: h1_norm_sq(&new.p, grid, H1Variant::Usual)?,
        h1_n: h1_norm_sq(&new.n, grid, H1Variant::Usual)?,
        jp0,
        jp1,
        jn0,
        jn1,
        mass_res_p: mass_budget_residual(params, grid, Species::P, &old.p, &new.p, &old.psi, dt)?,
        mass_res_n: mass_budget_residual(params, grid, Species::N, &old.n, &new.n, &old.psi, dt)?,
        stationarity,
        max_abs_psi: new.psi.iter().fold(0.0, |a, v| a.max(v.abs())),
    })
}

fn require_complete(traj: &Trajectory, min_steps: usize) -> Result<()> {
    if !traj.is_complete() {
        return Err(Error::Study(
            "trajectory must record every step (use Recording::EveryStep)".into(),
        ));
    }
    if traj.steps() < min_steps {
        return Err(Error::Study(format!(
            "trajectory has {} steps, need at least {min_steps}",
            traj.steps()
        )));
    }
    Ok(())
}

/// `(Σ_k dt ‖u^{k+1} - u^k‖²)^{1/2}`: the L²(0,T;L²) norm of the shift
/// difference of the piecewise-constant interpolant.
pub fn l2l2_time_translate(traj: &Trajectory, which: Quantity) -> Result<f64> {
    require_complete(traj, 2)?;
    let mut acc = 0.0;
    for pair in traj.states.windows(2) {
        let diff: Vec<f64> = which
            .of(&pair[1])
            .iter()
            .zip(which.of(&pair[0]).iter())
            .map(|(a, b)| a - b)
            .collect();
        acc += traj.dt * l2_norm_sq(&diff, &traj.grid)?;
    }
    Ok(acc.sqrt())
}

/// `(Σ_{k>=1} dt ‖u^k‖²_{H1})^{1/2}` of the piecewise-constant interpolant.
pub fn l2_h1_norm(traj: &Trajectory, which: Quantity) -> Result<f64> {
    require_complete(traj, 1)?;
    let mut acc = 0.0;
    for state in &traj.states[1..] {
        acc += traj.dt * h1_norm_sq(which.of(state), &traj.grid, H1Variant::Usual)?;
    }
    Ok(acc.sqrt())
}

/// Largest absolute residual of the discrete weak form over all nodal hat
/// functions and all levels of the trajectory.
///
/// The carrier form at level `k` tests `u^{k+1}` against `u^k` and `Psi^k`
/// (mass lumped, Scharfetter-Gummel cell fluxes, Butler-Volmer boundary
/// terms); the Poisson form tests every stored level against its own
/// densities.
pub fn weak_residual(traj: &Trajectory, which: WeakForm) -> Result<f64> {
    let params = &traj.params;
    let grid = &traj.grid;
    match which {
        WeakForm::Poisson => {
            let mut worst = 0.0f64;
            for state in &traj.states {
                worst = worst.max(poisson_residual(params, grid, state)?);
            }
            Ok(worst)
        }
        WeakForm::Carrier(species) => {
            require_complete(traj, 0)?;
            let mut worst = 0.0f64;
            for pair in traj.states.windows(2) {
                let r = carrier_residual(
                    params,
                    grid,
                    species,
                    pair[0].density(species),
                    pair[1].density(species),
                    &pair[0].psi,
                    traj.dt,
                )?;
                worst = worst.max(r);
            }
            Ok(worst)
        }
    }
}

fn poisson_residual(params: &ModelParams, grid: &Grid, state: &SimState) -> Result<f64> {
    let psi = &state.psi;
    grid.check(psi)?;
    let m = grid.intervals();
    let h = grid.h();
    let l2 = params.lambda2;
    let mut res = vec![0.0; grid.nodes()];
    // λ² ∫ Ψ' φ_i'  cell by cell
    for cell in 0..m {
        let slope = (psi[cell + 1] - psi[cell]) / h;
        res[cell] += l2 * slope * (-1.0 / h) * h;
        res[cell + 1] += l2 * slope * (1.0 / h) * h;
    }
    res[0] += l2 / params.alpha0 * (psi[0] - params.dpsi0_pzc);
    res[m] -= l2 / params.alpha1 * (params.v - psi[m] - params.dpsi1_pzc);
    for (i, r) in res.iter_mut().enumerate() {
        *r -= grid.weight(i) * params.charge_density(state.p[i], state.n[i]);
    }
    Ok(res.iter().fold(0.0, |a, r| a.max(r.abs())))
}

fn carrier_residual(
    params: &ModelParams,
    grid: &Grid,
    species: Species,
    u_old: &[f64],
    u_new: &[f64],
    psi: &[f64],
    dt: f64,
) -> Result<f64> {
    let m = grid.intervals();
    let h = grid.h();
    let eps = params.species(species).time_coeff;
    let mut res: Vec<f64> = (0..grid.nodes())
        .map(|i| eps * grid.weight(i) * (u_new[i] - u_old[i]) / dt)
        .collect();
    // -∫ J φ_i' with J constant per cell
    for cell in 0..m {
        let j = sg_flux(
            species,
            u_new[cell],
            u_new[cell + 1],
            psi[cell + 1] - psi[cell],
            h,
        );
        res[cell] -= j * (-1.0 / h) * h;
        res[cell + 1] -= j * (1.0 / h) * h;
    }
    res[0] += reaction_rate(params, species, Side::Left, u_new[0], psi[0])?;
    res[m] += reaction_rate(params, species, Side::Right, u_new[m], psi[m])?;
    Ok(res.iter().fold(0.0, |a, r| a.max(r.abs())))
}

/// Result of a self-convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudy {
    /// Time steps or mesh sizes, coarse to fine.
    pub resolutions: Vec<f64>,
    /// Final-time L² distance of `(P, N)` to the reference run.
    pub errors: Vec<f64>,
    /// Resolution of the reference run.
    pub reference: f64,
    /// Least-squares slope of `log error` against `log resolution`; `None`
    /// when the errors sit at round-off level.
    pub order: Option<f64>,
}

/// Errors below this are treated as round-off and make the order indeterminate.
pub const ORDER_NOISE_FLOOR: f64 = 1e-11;

/// Refinement factor between the finest listed time step and the reference run.
pub const TEMPORAL_REFERENCE_FACTOR: usize = 16;

/// Refinement factor between the finest listed grid and the reference grid.
pub const SPATIAL_REFERENCE_FACTOR: usize = 4;

fn final_state(config: &RunConfig) -> Result<SimState> {
    Ok(run_recording(config, Recording::Snapshots(Vec::new()))?
        .last()
        .clone())
}

fn check_halving(values: &[f64], what: &str) -> Result<()> {
    if values.len() < 3 {
        return Err(Error::Study(format!(
            "need at least 3 {what}, got {}",
            values.len()
        )));
    }
    for w in values.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::Study(format!(
                "{what} must halve successively: {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn fit_order(resolutions: &[f64], errors: &[f64]) -> Option<f64> {
    if errors.iter().any(|e| !(*e > ORDER_NOISE_FLOOR)) {
        return None;
    }
    let xs: Vec<f64> = resolutions.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

fn pair_distance(a: &SimState, b: &SimState, grid: &Grid, stride: usize) -> Result<f64> {
    let pick = |f: &Field| -> Vec<f64> { f.iter().step_by(stride).copied().collect() };
    let dp: Vec<f64> = pick(&a.p)
        .iter()
        .zip(pick(&b.p))
        .map(|(x, y)| x - y)
        .collect();
    let dn: Vec<f64> = pick(&a.n)
        .iter()
        .zip(pick(&b.n))
        .map(|(x, y)| x - y)
        .collect();
    Ok((l2_norm_sq(&dp, grid)? + l2_norm_sq(&dn, grid)?).sqrt())
}

fn run_all<T: Send>(
    jobs: Vec<RunConfig>,
    f: impl Fn(&RunConfig) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs.iter().map(|cfg| scope.spawn(|| f(cfg))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence member panicked"))
            .collect()
    })
}

/// Observed temporal order from runs at halving time steps `dts` (coarse to
/// fine), measured against a run `TEMPORAL_REFERENCE_FACTOR` times finer.
pub fn temporal_order(config: &RunConfig, dts: &[f64]) -> Result<OrderStudy> {
    check_halving(dts, "time steps")?;
    let tau = config.tau()?;
    if !config.overrides.unsafe_dt {
        if let Some(dt) = dts.iter().find(|dt| **dt > tau) {
            return Err(Error::TimeStepTooLarge { dt: *dt, tau });
        }
    }
    let reference = dts[dts.len() - 1] / TEMPORAL_REFERENCE_FACTOR as f64;
    let mut jobs: Vec<RunConfig> = dts
        .iter()
        .chain(std::iter::once(&reference))
        .map(|&dt| {
            let mut cfg = config.clone();
            cfg.time.dt = DtSpec::Fixed(dt);
            cfg
        })
        .collect();
    for cfg in &jobs {
        let (steps, eff) = cfg.schedule()?;
        if let DtSpec::Fixed(dt) = cfg.time.dt {
            if (eff - dt).abs() > 1e-12 * dt {
                return Err(Error::Study(format!(
                    "final time {} is not a multiple of dt = {dt} ({steps} steps)",
                    cfg.time.final_time
                )));
            }
        }
    }
    let finals = run_all(std::mem::take(&mut jobs), final_state)?;
    let (reference_state, members) = finals.split_last().expect("reference run");
    let errors = members
        .iter()
        .map(|s| pair_distance(s, reference_state, &config.grid, 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderStudy {
        order: fit_order(dts, &errors),
        resolutions: dts.to_vec(),
        errors,
        reference,
    })
}

/// Observed spatial order from grids with `intervals` (coarse to fine, each
/// doubling) at the configuration's time step, against a grid
/// `SPATIAL_REFERENCE_FACTOR` times finer than the finest. Errors are
/// measured on the coarse nodes.
pub fn spatial_order(config: &RunConfig, intervals: &[usize]) -> Result<OrderStudy> {
    let hs: Vec<f64> = intervals.iter().map(|m| 1.0 / *m as f64).collect();
    check_halving(&hs, "grids")?;
    let m_ref = intervals[intervals.len() - 1] * SPATIAL_REFERENCE_FACTOR;
    let jobs = intervals
        .iter()
        .chain(std::iter::once(&m_ref))
        .map(|&m| {
            let mut cfg = config.clone();
            cfg.grid = Grid::new(m)?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let finals = run_all(jobs, final_state)?;
    let (reference_state, members) = finals.split_last().expect("reference run");
    let errors = members
        .iter()
        .zip(intervals)
        .map(|(s, &m)| {
            let coarse = Grid::new(m)?;
            let reference_on_coarse = SimState {
                step: reference_state.step,
                time: reference_state.time,
                p: reference_state
                    .p
                    .iter()
                    .step_by(m_ref / m)
                    .copied()
                    .collect::<Vec<_>>()
                    .into(),
                n: reference_state
                    .n
                    .iter()
                    .step_by(m_ref / m)
                    .copied()
                    .collect::<Vec<_>>()
                    .into(),
                psi: Field::new(Vec::new()),
            };
            pair_distance(s, &reference_on_coarse, &coarse, 1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderStudy {
        order: fit_order(&hs, &errors),
        resolutions: hs,
        errors,
        reference: 1.0 / m_ref as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h1_constant_and_zero() {
        let grid = Grid::new(10).unwrap();
        let c = 1.7;
        let f = Field::constant(&grid, c);
        assert!((h1_norm_sq(&f, &grid, H1Variant::Usual).unwrap() - c * c).abs() < 1e-14);
        assert!((h1_norm_sq(&f, &grid, H1Variant::Boundary).unwrap() - 2.0 * c * c).abs() < 1e-14);
        let z = Field::constant(&grid, 0.0);
        assert_eq!(h1_norm_sq(&z, &grid, H1Variant::Usual).unwrap(), 0.0);
    }

    #[test]
    fn h1_identity_field() {
        let grid = Grid::new(10).unwrap();
        let f = Field::from_fn(&grid, |x| x);
        // gradient 1, trapezoid of x² = 1/3 + h²/6
        let usual = h1_norm_sq(&f, &grid, H1Variant::Usual).unwrap();
        assert!((usual - 1.335).abs() < 1e-13, "{usual}");
        let boundary = h1_norm_sq(&f, &grid, H1Variant::Boundary).unwrap();
        assert!((boundary - 2.0).abs() < 1e-13);
    }

    #[test]
    fn h1_size_mismatch() {
        let grid = Grid::new(10).unwrap();
        assert!(h1_norm_sq(&[1.0; 3], &grid, H1Variant::Usual).is_err());
    }

    #[test]
    fn order_fit_exact_power_law() {
        let dts = [0.4, 0.2, 0.1, 0.05];
        let errs: Vec<f64> = dts.iter().map(|d| 3.0 * d * d).collect();
        assert!((fit_order(&dts, &errs).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_order(&dts, &[1e-15, 1e-15, 1e-15, 1e-15]), None);
    }

    #[test]
    fn halving_check() {
        assert!(check_halving(&[0.4, 0.2, 0.1], "x").is_ok());
        assert!(check_halving(&[0.4, 0.2], "x").is_err());
        assert!(check_halving(&[0.4, 0.2, 0.05], "x").is_err());
    }
}
