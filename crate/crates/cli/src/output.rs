use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ddcorr_core::diagnostics::{boundary_currents, DiagnosticsRecord};
use ddcorr_core::timeloop::{SimState, Trajectory};
use ddcorr_core::{BoundViolation, Species};
use serde::Serialize;

pub const SENTINEL: &str = "INCOMPLETE";

/// Marks `dir` as incomplete until [`Sentinel::finish`] is called.
pub struct Sentinel(PathBuf);

impl Sentinel {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(SENTINEL);
        fs::write(&path, "run did not finish\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(Sentinel(path))
    }

    pub fn finish(self) -> Result<()> {
        fs::remove_file(&self.0).with_context(|| format!("cannot remove {}", self.0.display()))
    }
}

/// 17 significant digits; refuses non-finite values.
pub fn num(v: f64) -> Result<String> {
    if !v.is_finite() {
        bail!("refusing to write non-finite value {v}");
    }
    Ok(format!("{v:.16e}"))
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal label for each time that keeps the labels distinct.
pub fn time_labels(times: &[f64]) -> Vec<String> {
    for digits in 6..=17 {
        let labels: Vec<String> = times
            .iter()
            .map(|t| {
                let s = format!("{t:.digits$}");
                let s = s.trim_end_matches('0').trim_end_matches('.');
                if s.is_empty() || s == "-" {
                    "0".to_string()
                } else {
                    s.to_string()
                }
            })
            .collect();
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() == labels.len() {
            return labels;
        }
    }
    times.iter().map(|t| format!("{t:e}")).collect()
}

fn state_rows(traj: &Trajectory, state: &SimState) -> Result<Vec<Vec<String>>> {
    (0..traj.grid.nodes())
        .map(|i| {
            Ok(vec![
                num(traj.grid.x(i))?,
                num(state.p[i])?,
                num(state.n[i])?,
                num(state.psi[i])?,
            ])
        })
        .collect()
}

/// Writes `snap_t<time>.csv` for each stored state; returns the file names.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<Vec<String>> {
    let times: Vec<f64> = traj.states.iter().map(|s| s.time).collect();
    let mut names = Vec::new();
    for (state, label) in traj.states.iter().zip(time_labels(&times)) {
        let name = format!("snap_t{label}.csv");
        write_csv(
            &dir.join(&name),
            &["x", "P", "N", "Psi"],
            state_rows(traj, state)?,
        )?;
        names.push(name);
    }
    Ok(names)
}

pub fn write_series(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![r.k.to_string()];
            for v in r.values() {
                row.push(num(v)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(path, &DiagnosticsRecord::CSV_HEADER, rows)
}

/// `[J_P(0), J_P(1), J_N(0), J_N(1)]` at the end of the run. Without any step,
/// the rates are evaluated on the initial state.
pub fn final_currents(traj: &Trajectory) -> Result<[f64; 4]> {
    if let Some(r) = traj.diagnostics.last() {
        return Ok([r.jp0, r.jp1, r.jn0, r.jn1]);
    }
    let s = traj.last();
    let (jp0, jp1) = boundary_currents(&traj.params, Species::P, &s.p, &s.psi)?;
    let (jn0, jn1) = boundary_currents(&traj.params, Species::N, &s.n, &s.psi)?;
    Ok([jp0, jp1, jn0, jn1])
}

pub fn max_abs_psi(traj: &Trajectory) -> f64 {
    let initial = traj
        .initial()
        .psi
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    traj.diagnostics
        .iter()
        .fold(initial, |a, r| a.max(r.max_abs_psi))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub final_time: f64,
    pub max_abs_psi: f64,
    #[serde(rename = "JP0")]
    pub jp0: f64,
    #[serde(rename = "JP1")]
    pub jp1: f64,
    #[serde(rename = "JN0")]
    pub jn0: f64,
    #[serde(rename = "JN1")]
    pub jn1: f64,
    pub snapshots: Vec<String>,
}

impl RunSummary {
    pub fn currents(&self) -> [f64; 4] {
        [self.jp0, self.jp1, self.jn0, self.jn1]
    }
}

/// Writes every output of a finished run into `dir`.
pub fn write_run(
    dir: &Path,
    traj: &Trajectory,
    series: bool,
    config_json: &str,
) -> Result<RunSummary> {
    let snapshots = write_snapshots(dir, traj)?;
    if series {
        write_series(&dir.join("series.csv"), &traj.diagnostics)?;
    }
    fs::write(dir.join("config.json"), format!("{config_json}\n"))?;
    let [jp0, jp1, jn0, jn1] = final_currents(traj)?;
    let summary = RunSummary {
        steps: traj.steps(),
        dt: traj.dt,
        final_time: traj.last().time,
        max_abs_psi: max_abs_psi(traj),
        jp0,
        jp1,
        jn0,
        jn1,
        snapshots,
    };
    for v in [
        summary.dt,
        summary.final_time,
        summary.max_abs_psi,
        jp0,
        jp1,
        jn0,
        jn1,
    ] {
        num(v)?;
    }
    fs::write(
        dir.join("summary.json"),
        format!("{}\n", serde_json::to_string_pretty(&summary)?),
    )?;
    Ok(summary)
}

/// State at the offending step plus a one-line description.
pub fn write_violation(dir: &Path, v: &BoundViolation) -> Result<()> {
    fs::write(dir.join("violation.csv"), &v.dump)?;
    fs::write(dir.join("violation.txt"), format!("{v}\n"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_short_and_distinct() {
        assert_eq!(time_labels(&[0.0, 0.5]), vec!["0", "0.5"]);
        assert_eq!(time_labels(&[0.1 + 0.2, 2.0]), vec!["0.3", "2"]);
        let close = time_labels(&[1e-7, 2e-7]);
        assert_ne!(close[0], close[1]);
    }

    #[test]
    fn non_finite_numbers_rejected() {
        assert!(num(f64::NAN).is_err());
        assert!(num(f64::INFINITY).is_err());
        assert_eq!(num(0.5).unwrap(), "5.0000000000000000e-1");
    }
}
