//! Butler-Volmer boundary kinetics.
//!
//! Both interfaces use reaction rates that are affine in the boundary density,
//! `r(s, x) = beta(x) s - gamma(x)`, with `x = Psi(0)` on the left and
//! `x = V - Psi(1)` on the right.

use crate::error::{Error, Result};
use crate::params::{ModelParams, Side, Species};

/// Largest exponent magnitude accepted before `exp` is considered to overflow.
pub const EXP_GUARD: f64 = 700.0;

/// Search window for the supremum of [`xi`].
pub const XI_WINDOW: (f64, f64) = (-50.0, 50.0);

pub(crate) fn guarded_exp(arg: f64) -> Result<f64> {
    if !(arg.abs() <= EXP_GUARD) {
        return Err(Error::ExpOverflow {
            arg,
            limit: EXP_GUARD,
        });
    }
    Ok(arg.exp())
}

/// `m e^{-z b x} + k e^{z a x}`.
pub fn beta(p: &ModelParams, species: Species, side: Side, x: f64) -> Result<f64> {
    let kin = p.kin(species, side);
    let z = species.charge();
    Ok(kin.m * guarded_exp(-z * kin.b * x)? + kin.k * guarded_exp(z * kin.a * x)?)
}

/// Source coefficient: `m u^m e^{-z b x}` on the left, `k u^m e^{z a x}` on the right.
pub fn gamma(p: &ModelParams, species: Species, side: Side, x: f64) -> Result<f64> {
    let kin = p.kin(species, side);
    let z = species.charge();
    let ceiling = p.species(species).ceiling;
    Ok(match side {
        Side::Left => kin.m * ceiling * guarded_exp(-z * kin.b * x)?,
        Side::Right => kin.k * ceiling * guarded_exp(z * kin.a * x)?,
    })
}

/// Potential argument of the kinetic coefficients at `side`, given the
/// boundary value of the potential.
pub fn potential_argument(p: &ModelParams, side: Side, psi_boundary: f64) -> f64 {
    match side {
        Side::Left => psi_boundary,
        Side::Right => p.v - psi_boundary,
    }
}

/// `(beta, gamma)` evaluated at the boundary potential.
pub fn boundary_coefficients(
    p: &ModelParams,
    species: Species,
    side: Side,
    psi_boundary: f64,
) -> Result<(f64, f64)> {
    let x = potential_argument(p, side, psi_boundary);
    Ok((beta(p, species, side, x)?, gamma(p, species, side, x)?))
}

/// Reaction rate `beta(x) u - gamma(x)`.
///
/// On the left this equals `-J(0)`, on the right `J(1)`, where `J` is the
/// carrier flux.
pub fn reaction_rate(
    p: &ModelParams,
    species: Species,
    side: Side,
    u_boundary: f64,
    psi_boundary: f64,
) -> Result<f64> {
    let (b, g) = boundary_coefficients(p, species, side, psi_boundary)?;
    Ok(b * u_boundary - g)
}

/// Auxiliary function whose nonpositivity drives the boundary part of the
/// maximum principle.
pub fn xi(p: &ModelParams, species: Species, side: Side, x: f64) -> Result<f64> {
    let spec = p.species(species);
    let um = spec.ceiling;
    let linear = um * spec.charge / p.alpha(side) * (x - p.dpsi_pzc(side));
    let g = gamma(p, species, side, x)?;
    let b = beta(p, species, side, x)?;
    Ok(match side {
        Side::Left => g - um * b + linear,
        Side::Right => g - um * b - linear,
    })
}

/// Closed form of [`xi`] after cancelling the matching exponentials.
pub fn xi_reduced(p: &ModelParams, species: Species, side: Side, x: f64) -> Result<f64> {
    let spec = p.species(species);
    let kin = p.kin(species, side);
    let z = spec.charge;
    let slope = z / p.alpha(side) * (x - p.dpsi_pzc(side));
    Ok(match side {
        Side::Left => spec.ceiling * (-kin.k * guarded_exp(z * kin.a * x)? + slope),
        Side::Right => spec.ceiling * (-kin.m * guarded_exp(-z * kin.b * x)? - slope),
    })
}

const XI_SAMPLES: usize = 20_001;

/// Maximum of [`xi`] over [`XI_WINDOW`].
///
/// Dense sampling locates the best bracket; golden-section search refines it.
/// `xi` is concave, so the bracket holds the global maximum of the window.
pub fn xi_sup(p: &ModelParams, species: Species, side: Side) -> Result<f64> {
    Ok(xi_argmax(p, species, side)?.1)
}

/// `(x*, xi(x*))` for the maximum of [`xi`] over [`XI_WINDOW`].
pub fn xi_argmax(p: &ModelParams, species: Species, side: Side) -> Result<(f64, f64)> {
    let (lo, hi) = XI_WINDOW;
    let step = (hi - lo) / (XI_SAMPLES - 1) as f64;
    let at = |i: usize| lo + step * i as f64;

    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..XI_SAMPLES {
        let v = xi(p, species, side, at(i))?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut a = at(best.0.saturating_sub(1));
    let mut b = at((best.0 + 1).min(XI_SAMPLES - 1));

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = xi(p, species, side, c)?;
    let mut fd = xi(p, species, side, d)?;
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = xi(p, species, side, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = xi(p, species, side, d)?;
        }
    }
    let mut out = (best.1, at(best.0));
    for x in [a, b, 0.5 * (a + b)] {
        let v = xi(p, species, side, x)?;
        if v > out.0 {
            out = (v, x);
        }
    }
    Ok((out.1, out.0))
}
