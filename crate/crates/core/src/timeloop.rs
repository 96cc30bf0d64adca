//! Semi-implicit time loop.
//!
//! Each step first takes the potential of the current densities, then
//! advances both carriers with one implicit solve each, using that lagged
//! potential. Stored states always carry the potential of their own
//! densities.

use std::path::PathBuf;

use crate::diagnostics::{record_step, DiagnosticsRecord};
use crate::discretization::{solve_carrier, solve_poisson, Field, Grid};
use crate::error::{BoundViolation, Error, Result};
use crate::params::{check_admissibility, tau_formula, ModelParams, Species};

/// Tolerance for the density bounds checked after every step.
pub const BOUND_TOL: f64 = 1e-10;

/// Default fraction of the bound `tau` used when the step is `auto`.
pub const DEFAULT_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    /// `safety * tau`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeControl {
    pub dt: DtSpec,
    pub safety: f64,
    pub final_time: f64,
}

impl Default for TimeControl {
    fn default() -> Self {
        Self {
            dt: DtSpec::Auto,
            safety: DEFAULT_SAFETY,
            final_time: 0.5,
        }
    }
}

/// Source of an initial density profile.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    /// CSV with one value per node; a non-numeric first row is a header.
    File(PathBuf),
}

impl FieldSpec {
    pub fn resolve(&self, grid: &Grid) -> Result<Field> {
        match self {
            FieldSpec::Constant(v) => Ok(Field::constant(grid, *v)),
            FieldSpec::File(path) => {
                let values = read_column(path)?;
                grid.check(&values)?;
                Ok(Field::new(values))
            }
        }
    }
}

fn read_column(path: &PathBuf) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for field in record.iter().filter(|f| !f.is_empty()) {
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if row == 0 => break,
                Err(_) => {
                    return Err(Error::Config(format!(
                        "{}: row {}: `{field}` is not a number",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
    }
    Ok(values)
}

/// Initial densities; `None` means half of the maximum density.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialData {
    pub p: Option<FieldSpec>,
    pub n: Option<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputControl {
    /// Extra snapshot times; the initial and final states are always kept.
    pub snapshot_times: Vec<f64>,
    pub series: bool,
}

impl Default for OutputControl {
    fn default() -> Self {
        Self {
            snapshot_times: Vec::new(),
            series: true,
        }
    }
}

/// Escape hatches for runs outside the proven regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Overrides {
    /// Permit `dt > tau` and keep going after a bound violation.
    pub unsafe_dt: bool,
    /// Permit point-of-zero-charge drops outside their admissible intervals.
    pub unsafe_pzc: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub time: TimeControl,
    pub init: InitialData,
    pub output: OutputControl,
    pub overrides: Overrides,
}

impl RunConfig {
    pub fn new(params: ModelParams, grid: Grid) -> Self {
        Self {
            params,
            grid,
            time: TimeControl::default(),
            init: InitialData::default(),
            output: OutputControl::default(),
            overrides: Overrides::default(),
        }
    }

    /// Admissibility-checked `tau`; point-of-zero-charge failures are
    /// tolerated under `unsafe_pzc`.
    pub fn tau(&self) -> Result<f64> {
        let report = check_admissibility(&self.params)?;
        let ok = report.passed || (self.overrides.unsafe_pzc && report.passed_ignoring_pzc());
        if !ok {
            return Err(Error::Inadmissible(Box::new(report)));
        }
        Ok(tau_formula(&self.params))
    }

    /// Requested time step: `safety * tau` for `auto`.
    pub fn dt(&self) -> Result<f64> {
        let dt = match self.time.dt {
            DtSpec::Auto => self.time.safety * self.tau()?,
            DtSpec::Fixed(dt) => dt,
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTimeStep(dt));
        }
        Ok(dt)
    }

    /// Number of steps and the step actually taken, `T / K <= dt`.
    pub fn schedule(&self) -> Result<(usize, f64)> {
        let dt = self.dt()?;
        let t = self.time.final_time;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("final time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok((0, dt));
        }
        let steps = ((t / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok((steps, t / steps as f64))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time.safety > 0.0 && self.time.safety <= 1.0) {
            return Err(Error::Config(format!(
                "safety must lie in (0, 1], got {}",
                self.time.safety
            )));
        }
        self.tau()?;
        let (_, dt) = self.schedule()?;
        if !self.overrides.unsafe_dt && dt > tau_formula(&self.params) {
            return Err(Error::TimeStepTooLarge {
                dt,
                tau: tau_formula(&self.params),
            });
        }
        for t in &self.output.snapshot_times {
            if !t.is_finite() || *t < 0.0 {
                return Err(Error::Config(format!("invalid snapshot time {t}")));
            }
        }
        Ok(())
    }
}

/// One iterate `(P^k, N^k, Psi^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: usize,
    pub time: f64,
    pub p: Field,
    pub n: Field,
    pub psi: Field,
}

impl SimState {
    pub fn density(&self, species: Species) -> &Field {
        match species {
            Species::P => &self.p,
            Species::N => &self.n,
        }
    }
}

/// Which states a run keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Recording {
    EveryStep,
    /// Initial state, the states at these times, and the final state.
    Snapshots(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ModelParams,
    pub grid: Grid,
    pub dt: f64,
    pub states: Vec<SimState>,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn initial(&self) -> &SimState {
        &self.states[0]
    }

    pub fn last(&self) -> &SimState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn steps(&self) -> usize {
        self.diagnostics.len()
    }

    /// True when `states[k]` is level `k` for every `k`.
    pub fn is_complete(&self) -> bool {
        self.states.len() == self.diagnostics.len() + 1
            && self.states.iter().enumerate().all(|(k, s)| s.step == k)
    }
}

/// Builds level 0 from the initial data and checks `0 <= u0 <= u^m` exactly.
pub fn init(config: &RunConfig) -> Result<SimState> {
    let params = &config.params;
    let grid = &config.grid;
    let resolve = |spec: &Option<FieldSpec>, species: Species| -> Result<Field> {
        let field = match spec {
            Some(spec) => spec.resolve(grid)?,
            None => Field::constant(grid, params.species(species).ceiling),
        };
        let ceiling = params.species(species).ceiling;
        if let Some((node, &value)) = field
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && **v <= ceiling))
        {
            return Err(Error::InitialBound {
                species: species.name(),
                node,
                value,
                ceiling,
            });
        }
        Ok(field)
    };
    let p = resolve(&config.init.p, Species::P)?;
    let n = resolve(&config.init.n, Species::N)?;
    let psi = solve_poisson(params, grid, &p, &n)?;
    Ok(SimState {
        step: 0,
        time: 0.0,
        p,
        n,
        psi,
    })
}

/// Advances `state` by `dt`, returning the new level and its diagnostics.
pub fn step(
    params: &ModelParams,
    grid: &Grid,
    state: &SimState,
    dt: f64,
    allow_large_dt: bool,
) -> Result<(SimState, DiagnosticsRecord)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let tau = tau_formula(params);
    if dt > tau && !allow_large_dt {
        return Err(Error::TimeStepTooLarge { dt, tau });
    }
    debug_assert!({
        let fresh = solve_poisson(params, grid, &state.p, &state.n)?;
        fresh.max_abs_diff(&state.psi)
            <= 1e-10 * (1.0 + fresh.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    });

    let p = solve_carrier(params, grid, Species::P, &state.p, &state.psi, dt)?;
    let n = solve_carrier(params, grid, Species::N, &state.n, &state.psi, dt)?;
    let psi = solve_poisson(params, grid, &p, &n)?;
    let next = SimState {
        step: state.step + 1,
        time: (state.step + 1) as f64 * dt,
        p,
        n,
        psi,
    };
    let record = record_step(params, grid, state, &next, dt)?;
    Ok((next, record))
}

/// Runs the configuration, keeping the snapshots listed in its output control.
pub fn run(config: &RunConfig) -> Result<Trajectory> {
    run_recording(
        config,
        Recording::Snapshots(config.output.snapshot_times.clone()),
    )
}

pub fn run_recording(config: &RunConfig, recording: Recording) -> Result<Trajectory> {
    config.validate()?;
    let (steps, dt) = config.schedule()?;
    let params = &config.params;
    let grid = &config.grid;

    let mut keep = vec![false; steps + 1];
    keep[0] = true;
    keep[steps] = true;
    match &recording {
        Recording::EveryStep => keep.fill(true),
        Recording::Snapshots(times) => {
            for &t in times {
                let k = ((t / dt) - 1e-9).ceil().max(0.0) as usize;
                keep[k.min(steps)] = true;
            }
        }
    }

    let mut state = init(config)?;
    let mut states = vec![state.clone()];
    let mut diagnostics = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (next, record) = step(params, grid, &state, dt, config.overrides.unsafe_dt)?;
        if !config.overrides.unsafe_dt {
            check_bounds(params, grid, &next)?;
        }
        diagnostics.push(record);
        state = next;
        if keep[k] {
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        params: *params,
        grid: *grid,
        dt,
        states,
        diagnostics,
    })
}

fn check_bounds(params: &ModelParams, grid: &Grid, state: &SimState) -> Result<()> {
    for species in Species::ALL {
        let ceiling = params.species(species).ceiling;
        let field = state.density(species);
        let bad = field
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v >= -BOUND_TOL && v <= ceiling + BOUND_TOL));
        if let Some((node, &value)) = bad {
            return Err(Error::BoundViolation(Box::new(BoundViolation {
                step: state.step,
                time: state.time,
                species: species.name(),
                node,
                value,
                ceiling,
                dump: dump_state(grid, state),
            })));
        }
    }
    Ok(())
}

fn dump_state(grid: &Grid, state: &SimState) -> String {
    let mut out = String::from("x,P,N,Psi\n");
    for i in 0..grid.nodes() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            grid.x(i),
            state.p[i],
            state.n[i],
            state.psi[i]
        ));
    }
    out
}
