use std::fmt;
use std::fs;
use std::path::Path;
use std::thread;

use anyhow::{anyhow, bail, Context, Result};
use ddcorr_core::config::{load_config, to_json};
use ddcorr_core::diagnostics::temporal_order;
use ddcorr_core::params::check_admissibility;
use ddcorr_core::timeloop::{run, Overrides, RunConfig};
use ddcorr_core::Error;

use crate::output::{num, write_run, write_violation, RunSummary, Sentinel};

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// A run left the admissible box; maps to exit status 2.
#[derive(Debug)]
pub struct Aborted(pub String);

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Aborted {}

pub fn parse_settings(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects key=value, got `{s}`"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

pub fn check(config: &Path) -> Result<bool> {
    let doc = ddcorr_core::config::read_document(config, &[])?;
    let base = config.parent().unwrap_or(Path::new("."));
    let cfg = ddcorr_core::config::parse_config(doc, base, Overrides::default())?;
    let report = check_admissibility(&cfg.params)?;
    say!("{report}");
    say!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.passed)
}

enum PointError {
    Violation(String),
    Failed(String),
}

/// Runs one configuration into `dir`, leaving the sentinel on failure.
fn run_into(dir: &Path, cfg: &RunConfig) -> Result<std::result::Result<RunSummary, PointError>> {
    let sentinel = Sentinel::create(dir)?;
    match run(cfg) {
        Ok(traj) => {
            let summary = write_run(dir, &traj, cfg.output.series, &to_json(cfg))?;
            sentinel.finish()?;
            Ok(Ok(summary))
        }
        Err(Error::BoundViolation(v)) => {
            write_violation(dir, &v)?;
            Ok(Err(PointError::Violation(v.to_string())))
        }
        Err(e) => Ok(Err(PointError::Failed(e.to_string()))),
    }
}

pub fn simulate(
    config: &Path,
    out: &Path,
    settings: &[(String, String)],
    overrides: Overrides,
) -> Result<()> {
    let cfg = load_config(config, settings, overrides)?;
    match run_into(out, &cfg)? {
        Ok(s) => {
            say!(
                "{} steps of dt = {:e} to t = {}; max |Psi| = {:e}",
                s.steps,
                s.dt,
                s.final_time,
                s.max_abs_psi
            );
            say!(
                "final currents: JP0 = {:e}, JP1 = {:e}, JN0 = {:e}, JN1 = {:e}",
                s.jp0,
                s.jp1,
                s.jn0,
                s.jn1
            );
            say!(
                "wrote {} snapshot(s) to {}",
                s.snapshots.len(),
                out.display()
            );
            Ok(())
        }
        Err(PointError::Violation(msg)) => Err(Aborted(format!("bound violation: {msg}")).into()),
        Err(PointError::Failed(msg)) => bail!("run failed: {msg}"),
    }
}

/// `points` values from `from` to `to`, both ends exact.
pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![from],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    to
                } else {
                    from + (to - from) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

fn parallelism() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// Maps `f` over `items` on scoped threads, at most one per core at a time.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let mut out = Vec::with_capacity(items.len());
    for (c, chunk) in items.chunks(parallelism()).enumerate() {
        let base = c * parallelism();
        let f = &f;
        thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(i, item)| s.spawn(move || f(base + i, item)))
                .collect();
            out.extend(
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep worker panicked")),
            );
        });
    }
    out
}

pub fn sweep(
    config: &Path,
    param: &str,
    from: f64,
    to: f64,
    points: usize,
    out: &Path,
) -> Result<()> {
    if points == 0 {
        bail!("--points must be at least 1");
    }
    // the base configuration must load on its own
    load_config(config, &[], Overrides::default())?;
    let values = linspace(from, to, points);
    let sentinel = Sentinel::create(out)?;

    let results = par_map(&values, |i, &v| -> Result<_> {
        let dir = out.join(format!("point_{i:03}"));
        let settings = [(param.to_string(), format!("{v:?}"))];
        match load_config(config, &settings, Overrides::default()) {
            Ok(cfg) => run_into(&dir, &cfg),
            Err(e) => {
                Sentinel::create(&dir)?;
                Ok(Err(PointError::Failed(e.to_string())))
            }
        }
    });

    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    w.write_record([
        "point",
        param,
        "status",
        "JP0",
        "JP1",
        "JN0",
        "JN1",
        "max_abs_psi",
    ])?;
    let (mut violations, mut failures) = (0, 0);
    for (i, (v, result)) in values.iter().zip(results).enumerate() {
        let mut row = vec![format!("point_{i:03}"), num(*v)?];
        match result? {
            Ok(s) => {
                row.push("ok".into());
                for c in s.currents() {
                    row.push(num(c)?);
                }
                row.push(num(s.max_abs_psi)?);
            }
            Err(e) => {
                let (status, msg) = match e {
                    PointError::Violation(m) => {
                        violations += 1;
                        ("violation", m)
                    }
                    PointError::Failed(m) => {
                        failures += 1;
                        ("failed", m)
                    }
                };
                eprintln!("point_{i:03} ({param} = {v}): {msg}");
                row.push(status.into());
                row.extend(std::iter::repeat_n(String::new(), 5));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    say!("{points} point(s) written to {}", out.display());
    if failures > 0 {
        bail!("{failures} sweep point(s) failed");
    }
    if violations > 0 {
        return Err(Aborted(format!(
            "{violations} sweep point(s) left the admissible box"
        ))
        .into());
    }
    sentinel.finish()
}

/// Parses `0.01`, `tau`, `tau/8` or `0.5*tau`.
pub fn parse_dt(s: &str, tau: f64) -> Result<f64> {
    let s = s.trim();
    let value = if let Some(rest) = s.strip_prefix("tau") {
        let rest = rest.trim();
        if rest.is_empty() {
            tau
        } else if let Some(d) = rest.strip_prefix('/') {
            tau / d
                .trim()
                .parse::<f64>()
                .with_context(|| format!("bad divisor in `{s}`"))?
        } else if let Some(f) = rest.strip_prefix('*') {
            tau * f
                .trim()
                .parse::<f64>()
                .with_context(|| format!("bad factor in `{s}`"))?
        } else {
            bail!("cannot parse time step `{s}`");
        }
    } else if let Some(f) = s.strip_suffix("tau") {
        let f = f.trim().trim_end_matches('*').trim();
        tau * f
            .parse::<f64>()
            .with_context(|| format!("bad factor in `{s}`"))?
    } else {
        s.parse::<f64>()
            .with_context(|| format!("cannot parse time step `{s}`"))?
    };
    if !(value > 0.0 && value.is_finite()) {
        bail!("time step `{s}` must be positive and finite");
    }
    Ok(value)
}

pub fn convergence(config: &Path, dts: &str, out: &Path) -> Result<()> {
    let cfg = load_config(config, &[], Overrides::default())?;
    let tau = cfg.tau()?;
    let dts = dts
        .split(',')
        .map(|s| parse_dt(s, tau))
        .collect::<Result<Vec<_>>>()?;
    let sentinel = Sentinel::create(out)?;
    let study = temporal_order(&cfg, &dts).map_err(|e| match e {
        Error::BoundViolation(v) => Aborted(format!("bound violation: {v}")).into(),
        e => anyhow::Error::from(e),
    })?;

    let mut w = csv::Writer::from_path(out.join("errors.csv"))?;
    w.write_record(["dt", "error"])?;
    say!("{:>24} {:>24}", "dt", "error");
    for (dt, err) in study.resolutions.iter().zip(&study.errors) {
        w.write_record([num(*dt)?, num(*err)?])?;
        say!("{dt:>24.16e} {err:>24.16e}");
    }
    w.flush()?;
    fs::write(
        out.join("order.json"),
        format!("{}\n", serde_json::to_string_pretty(&study)?),
    )?;
    match study.order {
        Some(p) => say!(
            "observed order {p:.4} (reference dt = {:e})",
            study.reference
        ),
        None => say!("observed order indeterminate: errors at solver-noise level"),
    }
    sentinel.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_expressions() {
        assert_eq!(parse_dt("tau", 0.2).unwrap(), 0.2);
        assert_eq!(parse_dt(" tau/4 ", 0.2).unwrap(), 0.05);
        assert_eq!(parse_dt("0.5*tau", 0.2).unwrap(), 0.1);
        assert_eq!(parse_dt("tau*0.5", 0.2).unwrap(), 0.1);
        assert_eq!(parse_dt("1e-3", 0.2).unwrap(), 1e-3);
        assert!(parse_dt("tau/0", 0.2).is_err());
        assert!(parse_dt("-1", 0.2).is_err());
        assert!(parse_dt("tau^2", 0.2).is_err());
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(0.0, 1.0, 5);
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(0.1, 0.7, 3).last(), Some(&0.7));
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn settings_need_equals_sign() {
        let s = parse_settings(&["V=0.5".into(), "time.dt = auto".into()]).unwrap();
        assert_eq!(s[1], ("time.dt".into(), "auto".into()));
        assert!(parse_settings(&["V".into()]).is_err());
    }
}
