use crate::params::Species;

/// Bernoulli function `x / (e^x - 1)`, equal to 1 at the origin.
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let x2 = x * x;
        1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0
    } else {
        x / x.exp_m1()
    }
}

/// Scharfetter-Gummel flux from node `left` to node `right`.
///
/// `dpsi = Psi_right - Psi_left`. Exact for the two-point problem with
/// constant field, so it vanishes whenever `u e^{z Psi}` is constant.
pub fn sg_flux(species: Species, u_left: f64, u_right: f64, dpsi: f64, h: f64) -> f64 {
    let s = species.charge() * dpsi;
    (bernoulli(s) * u_left - bernoulli(-s) * u_right) / h
}
