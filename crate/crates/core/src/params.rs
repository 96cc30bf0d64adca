//! Model constants and the standing hypotheses they must satisfy.
//!
//! The model is already dimensionless. [`ModelParams::default`] carries the
//! application values `rho_hl = -5`, `Pm = 2`, `Nm = 1` and symmetric
//! kinetics (`m = k = 1`, `a = b = 0.5`), for which zero lies strictly inside
//! both point-of-zero-charge intervals.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the charge-balance relation `3 Pm - Nm + rho_hl = 0`.
pub const CHARGE_BALANCE_TOL: f64 = 1e-12;

/// The two mobile carriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    /// Fe(III) cations, charge number 3.
    P,
    /// Electrons, charge number -1.
    N,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::P, Species::N];

    pub fn charge(self) -> f64 {
        match self {
            Species::P => 3.0,
            Species::N => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::P => "P",
            Species::N => "N",
        }
    }
}

/// Interface of the oxide layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Metal/oxide interface, `x = 0`.
    Left,
    /// Oxide/solution interface, `x = 1`.
    Right,
}

impl Side {
    pub const ALL: [Side; 2] = [Side::Left, Side::Right];

    fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// Per-carrier constants of the synthetic transport equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesSpec {
    /// Charge number `z_u`.
    pub charge: f64,
    /// Coefficient `eps_u` in front of the time derivative.
    pub time_coeff: f64,
    /// Maximum density `u^m`.
    pub ceiling: f64,
}

/// Butler-Volmer coefficients of one reaction at one interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterfaceKinetics {
    pub m: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for InterfaceKinetics {
    fn default() -> Self {
        Self {
            m: 1.0,
            k: 1.0,
            a: 0.5,
            b: 0.5,
        }
    }
}

/// Kinetic coefficients for both species at both interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KineticsTable {
    pub p: [InterfaceKinetics; 2],
    pub n: [InterfaceKinetics; 2],
}

impl KineticsTable {
    pub fn get(&self, species: Species, side: Side) -> &InterfaceKinetics {
        match species {
            Species::P => &self.p[side.index()],
            Species::N => &self.n[side.index()],
        }
    }

    pub fn get_mut(&mut self, species: Species, side: Side) -> &mut InterfaceKinetics {
        match species {
            Species::P => &mut self.p[side.index()],
            Species::N => &mut self.n[side.index()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Squared scaled Debye length.
    pub lambda2: f64,
    /// Cation/electron mobility ratio; time coefficient of the electron equation.
    pub epsilon: f64,
    /// Host-lattice charge density.
    pub rho_hl: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    /// Applied potential.
    pub v: f64,
    pub dpsi0_pzc: f64,
    pub dpsi1_pzc: f64,
    pub p_max: f64,
    pub n_max: f64,
    pub kinetics: KineticsTable,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            lambda2: 1.0,
            epsilon: 0.1,
            rho_hl: -5.0,
            alpha0: 1.0,
            alpha1: 1.0,
            v: 0.0,
            dpsi0_pzc: 0.0,
            dpsi1_pzc: 0.0,
            p_max: 2.0,
            n_max: 1.0,
            kinetics: KineticsTable::default(),
        }
    }
}

impl ModelParams {
    pub fn species(&self, species: Species) -> SpeciesSpec {
        match species {
            Species::P => SpeciesSpec {
                charge: 3.0,
                time_coeff: 1.0,
                ceiling: self.p_max,
            },
            Species::N => SpeciesSpec {
                charge: -1.0,
                time_coeff: self.epsilon,
                ceiling: self.n_max,
            },
        }
    }

    pub fn kin(&self, species: Species, side: Side) -> &InterfaceKinetics {
        self.kinetics.get(species, side)
    }

    pub fn alpha(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.alpha0,
            Side::Right => self.alpha1,
        }
    }

    pub fn dpsi_pzc(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.dpsi0_pzc,
            Side::Right => self.dpsi1_pzc,
        }
    }

    /// Net charge source `3P - N + rho_hl`.
    pub fn charge_density(&self, p: f64, n: f64) -> f64 {
        3.0 * p - n + self.rho_hl
    }

    /// Every scalar with its configuration name, in a fixed order.
    pub fn named_values(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("lambda2".to_string(), self.lambda2),
            ("epsilon".to_string(), self.epsilon),
            ("rho_hl".to_string(), self.rho_hl),
            ("alpha0".to_string(), self.alpha0),
            ("alpha1".to_string(), self.alpha1),
            ("V".to_string(), self.v),
            ("dpsi0_pzc".to_string(), self.dpsi0_pzc),
            ("dpsi1_pzc".to_string(), self.dpsi1_pzc),
            ("Pm".to_string(), self.p_max),
            ("Nm".to_string(), self.n_max),
        ];
        for species in Species::ALL {
            for side in Side::ALL {
                let kin = self.kin(species, side);
                let prefix = format!("kinetics.{}.side{}", species.name(), side.index());
                for (coef, value) in [("m", kin.m), ("k", kin.k), ("a", kin.a), ("b", kin.b)] {
                    out.push((format!("{prefix}.{coef}"), value));
                }
            }
        }
        out
    }
}

/// Admissible range for one point-of-zero-charge drop.
///
/// An endpoint formula with a zero transfer coefficient degenerates to an
/// infinite endpoint of the wrong sign, leaving the interval empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PzcInterval {
    #[serde(serialize_with = "finite_or_null")]
    pub lower: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub upper: f64,
    pub value: f64,
}

impl PzcInterval {
    pub fn contains_value(&self) -> bool {
        self.lower <= self.value && self.value <= self.upper
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn is_empty(&self) -> bool {
        !(self.lower <= self.upper)
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Interval of admissible `dpsi0_pzc`.
pub fn pzc_interval_left(p: &ModelParams) -> PzcInterval {
    let kp = p.kin(Species::P, Side::Left);
    let kn = p.kin(Species::N, Side::Left);
    let lower = -(1.0 / (3.0 * kp.a)) * (1.0 + (kp.a * kp.k * p.alpha0).ln());
    let upper = (1.0 / kn.a) * (1.0 + (kn.a * kn.k * p.alpha0).ln());
    PzcInterval {
        lower,
        upper,
        value: p.dpsi0_pzc,
    }
}

/// Interval of admissible `dpsi1_pzc`.
pub fn pzc_interval_right(p: &ModelParams) -> PzcInterval {
    let kp = p.kin(Species::P, Side::Right);
    let kn = p.kin(Species::N, Side::Right);
    let lower = -(1.0 / kn.b) * (1.0 + (kn.b * kn.m * p.alpha1).ln());
    let upper = (1.0 / (3.0 * kp.b)) * (1.0 + (kp.b * kp.m * p.alpha1).ln());
    PzcInterval {
        lower,
        upper,
        value: p.dpsi1_pzc,
    }
}

pub fn pzc_interval(p: &ModelParams, side: Side) -> PzcInterval {
    match side {
        Side::Left => pzc_interval_left(p),
        Side::Right => pzc_interval_right(p),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub checks: Vec<HypothesisCheck>,
    pub pzc0: PzcInterval,
    pub pzc1: PzcInterval,
    pub passed: bool,
}

impl AdmissibilityReport {
    pub fn check(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// True when every hypothesis except the point-of-zero-charge ranges holds.
    pub fn passed_ignoring_pzc(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| !c.id.starts_with("(12"))
            .all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            write!(f, "[{mark}] {:<6} {}", c.id, c.description)?;
            if !c.detail.is_empty() {
                write!(f, ": {}", c.detail)?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "dpsi0_pzc admissible interval [{}, {}], value {}",
            self.pzc0.lower, self.pzc0.upper, self.pzc0.value
        )?;
        writeln!(
            f,
            "dpsi1_pzc admissible interval [{}, {}], value {}",
            self.pzc1.lower, self.pzc1.upper, self.pzc1.value
        )?;
        write!(
            f,
            "verdict: {}",
            if self.passed {
                "admissible"
            } else {
                "NOT admissible"
            }
        )
    }
}

/// Checks the standing hypotheses on `p`.
///
/// Fails only on non-finite inputs; every other problem is reported in the
/// returned report, whose `passed` flag is the overall verdict.
pub fn check_admissibility(p: &ModelParams) -> Result<AdmissibilityReport> {
    let named = p.named_values();
    if let Some((name, value)) = named.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            name: name.clone(),
            value: *value,
        });
    }

    let mut checks = Vec::new();

    let constants = [
        ("lambda2", p.lambda2),
        ("epsilon", p.epsilon),
        ("alpha0", p.alpha0),
        ("alpha1", p.alpha1),
        ("Pm", p.p_max),
        ("Nm", p.n_max),
    ];
    let bad: Vec<String> = constants
        .iter()
        .filter(|(_, v)| *v <= 0.0)
        .map(|(n, v)| format!("{n} = {v}"))
        .collect();
    checks.push(HypothesisCheck {
        id: "const",
        description: "lambda2, epsilon, alpha0, alpha1, Pm, Nm > 0",
        passed: bad.is_empty(),
        detail: bad.join(", "),
    });

    let rates: Vec<(String, f64)> = named
        .iter()
        .filter(|(n, _)| n.ends_with(".m") || n.ends_with(".k"))
        .filter(|(_, v)| *v <= 0.0)
        .map(|(n, v)| (n.clone(), *v))
        .collect();
    checks.push(HypothesisCheck {
        id: "(8)",
        description: "kinetic rate coefficients m, k > 0",
        passed: rates.is_empty(),
        detail: join_named(&rates),
    });

    let transfer: Vec<(String, f64)> = named
        .iter()
        .filter(|(n, _)| n.ends_with(".a") || n.ends_with(".b"))
        .filter(|(_, v)| !(0.0..=1.0).contains(v))
        .map(|(n, v)| (n.clone(), *v))
        .collect();
    checks.push(HypothesisCheck {
        id: "(9)",
        description: "transfer coefficients a, b in [0, 1]",
        passed: transfer.is_empty(),
        detail: join_named(&transfer),
    });

    let balance = 3.0 * p.p_max - p.n_max + p.rho_hl;
    checks.push(HypothesisCheck {
        id: "(10)",
        description: "3 Pm - Nm + rho_hl = 0",
        passed: balance.abs() <= CHARGE_BALANCE_TOL,
        detail: format!("3*{} - {} + {} = {}", p.p_max, p.n_max, p.rho_hl, balance),
    });

    let pzc0 = pzc_interval_left(p);
    checks.push(HypothesisCheck {
        id: "(12a)",
        description: "dpsi0_pzc inside its admissible interval",
        passed: pzc0.contains_value(),
        detail: interval_detail(&pzc0),
    });
    let pzc1 = pzc_interval_right(p);
    checks.push(HypothesisCheck {
        id: "(12b)",
        description: "dpsi1_pzc inside its admissible interval",
        passed: pzc1.contains_value(),
        detail: interval_detail(&pzc1),
    });

    let passed = checks.iter().all(|c| c.passed);
    Ok(AdmissibilityReport {
        checks,
        pzc0,
        pzc1,
        passed,
    })
}

fn join_named(items: &[(String, f64)]) -> String {
    items
        .iter()
        .map(|(n, v)| format!("{n} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn interval_detail(iv: &PzcInterval) -> String {
    if iv.is_empty() {
        format!("interval [{}, {}] is empty", iv.lower, iv.upper)
    } else {
        format!("{} in [{}, {}]", iv.value, iv.lower, iv.upper)
    }
}

/// `lambda2 * min(1 / (9 Pm), epsilon / Nm)` without any admissibility check.
pub fn tau_formula(p: &ModelParams) -> f64 {
    p.lambda2 * (1.0 / (9.0 * p.p_max)).min(p.epsilon / p.n_max)
}

/// Largest time step for which the discrete densities provably stay in
/// `[0, u^m]`.
pub fn tau_max(p: &ModelParams) -> Result<f64> {
    let report = check_admissibility(p)?;
    if !report.passed {
        return Err(Error::Inadmissible(Box::new(report)));
    }
    Ok(tau_formula(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_half_kinetics() -> ModelParams {
        // a = 0.5, k = 1, alpha = 1 everywhere, as in the defaults
        ModelParams::default()
    }

    #[test]
    fn species_constants() {
        let p = ModelParams::default();
        let sp = p.species(Species::P);
        assert_eq!((sp.charge, sp.time_coeff, sp.ceiling), (3.0, 1.0, 2.0));
        let sn = p.species(Species::N);
        assert_eq!((sn.charge, sn.time_coeff, sn.ceiling), (-1.0, 0.1, 1.0));
    }

    #[test]
    fn charge_balance_application_values() {
        let report = check_admissibility(&ModelParams::default()).unwrap();
        assert!(report.check("(10)").unwrap().passed);
        assert!(report.passed, "{report}");

        let p = ModelParams {
            rho_hl: -4.0,
            ..ModelParams::default()
        };
        let report = check_admissibility(&p).unwrap();
        assert!(!report.check("(10)").unwrap().passed);
        assert!(!report.passed);
    }

    #[test]
    fn pzc_endpoints_hand_values() {
        let p = with_half_kinetics();
        let iv = pzc_interval_left(&p);
        let lower = -(1.0 / 1.5) * (1.0 + 0.5f64.ln());
        let upper = 2.0 * (1.0 + 0.5f64.ln());
        assert!((iv.lower - lower).abs() < 1e-15);
        assert!((iv.upper - upper).abs() < 1e-15);
        assert!((iv.lower - (-0.204568)).abs() < 1e-6);
        assert!((iv.upper - 0.613706).abs() < 1e-6);
        // symmetric defaults mirror the interval on the right side
        let iv1 = pzc_interval_right(&p);
        assert!((iv1.lower + upper).abs() < 1e-15);
        assert!((iv1.upper + lower).abs() < 1e-15);
        assert!(iv.contains(0.0) && iv1.contains(0.0));
    }

    #[test]
    fn zero_transfer_coefficient_empties_interval() {
        let mut p = ModelParams::default();
        p.kinetics.get_mut(Species::P, Side::Left).a = 0.0;
        let iv = pzc_interval_left(&p);
        assert!(iv.is_empty());
        let report = check_admissibility(&p).unwrap();
        assert!(!report.check("(12a)").unwrap().passed);
        assert!(report.check("(9)").unwrap().passed);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"lower\":null"));
    }

    #[test]
    fn hypothesis_failures_are_listed() {
        let mut p = ModelParams::default();
        p.kinetics.get_mut(Species::N, Side::Right).m = 0.0;
        p.kinetics.get_mut(Species::P, Side::Left).b = 1.5;
        p.alpha1 = -1.0;
        let report = check_admissibility(&p).unwrap();
        assert!(!report.check("(8)").unwrap().passed);
        assert!(report
            .check("(8)")
            .unwrap()
            .detail
            .contains("kinetics.N.side1.m"));
        assert!(!report.check("(9)").unwrap().passed);
        assert!(!report.check("const").unwrap().passed);
        assert!(!report.passed);
    }

    #[test]
    fn non_finite_rejected() {
        let p = ModelParams {
            v: f64::NAN,
            ..ModelParams::default()
        };
        match check_admissibility(&p) {
            Err(Error::NonFinite { name, .. }) => assert_eq!(name, "V"),
            other => panic!("expected NonFinite, got {other:?}"),
        }
        let mut p = ModelParams::default();
        p.kinetics.get_mut(Species::P, Side::Right).k = f64::INFINITY;
        assert!(matches!(
            check_admissibility(&p),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn tau_examples() {
        let p = ModelParams::default();
        assert!((tau_max(&p).unwrap() - 1.0 / 18.0).abs() < 1e-15);

        let p = ModelParams {
            lambda2: 18.0,
            epsilon: 1.0,
            ..ModelParams::default()
        };
        assert!((tau_max(&p).unwrap() - 1.0).abs() < 1e-15);

        let p2 = ModelParams { lambda2: 36.0, ..p };
        assert_eq!(tau_max(&p2).unwrap(), 2.0 * tau_max(&p).unwrap());
    }

    #[test]
    fn tau_rejects_inadmissible() {
        let p = ModelParams {
            rho_hl: -4.0,
            ..ModelParams::default()
        };
        assert!(matches!(tau_max(&p), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn report_is_deterministic() {
        let p = ModelParams::default();
        assert_eq!(
            check_admissibility(&p).unwrap(),
            check_admissibility(&p).unwrap()
        );
    }
}
