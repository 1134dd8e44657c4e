//! Compton polarimetry: Klein-Nishina azimuthal densities and the
//! equivalent RoC contrast.
//!
//! With `x = β(1 − cos θ)` the azimuthal part of the Klein-Nishina cross
//! section is proportional to `2 sin²φ (1 + x) + x²`, which normalized on
//! `[0, π)` equals `(1 − r cos 2φ)/π` for `r = 1/(x + 1/(1 + x))`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::states::singlet_difference_density;

/// Nodes of the periodic trapezoid rule used for normalization. Exact for
/// trigonometric polynomials of degree below this.
const QUADRATURE_NODES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComptonKinematics {
    /// hν / (m_e c²)
    pub beta: f64,
    /// Scattering angle in radians.
    pub theta: f64,
}

impl ComptonKinematics {
    pub fn new(beta: f64, theta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "energy ratio β = {beta} must be finite and >= 0"
            )));
        }
        if !(theta > 0.0 && theta <= PI) {
            return Err(Error::InvalidParameter(format!(
                "scattering angle θ = {theta} outside (0, π]"
            )));
        }
        Ok(Self { beta, theta })
    }

    /// x = β(1 − cos θ)
    pub fn x(&self) -> f64 {
        self.beta * (1.0 - self.theta.cos())
    }
}

fn kn_numerator(x: f64, phi: f64) -> f64 {
    let s = phi.sin();
    2.0 * s * s * (1.0 + x) + x * x
}

fn kn_normalizer(x: f64) -> f64 {
    let h = PI / QUADRATURE_NODES as f64;
    (0..QUADRATURE_NODES)
        .map(|k| kn_numerator(x, k as f64 * h))
        .sum::<f64>()
        * h
}

/// Klein-Nishina azimuthal density on `[0, π)`, normalized to unit mass.
pub fn kn_phi_density(k: &ComptonKinematics, phi: f64) -> f64 {
    let x = k.x();
    kn_numerator(x, phi) / kn_normalizer(x)
}

/// Contrast of the RoC device reproducing the Klein-Nishina modulation.
pub fn contrast_from_kn(k: &ComptonKinematics) -> f64 {
    let x = k.x();
    1.0 / (x + 1.0 / (1.0 + x))
}

/// RoC single-detector density `(1 − r cos 2φ)/π`.
pub fn roc_phi_density(r: f64, phi: f64) -> f64 {
    (1.0 - r * (2.0 * phi).cos()) / PI
}

/// Density of the azimuth difference of two polarimeters observing a
/// singlet pair: `(1/π)[1 − r_A r_B cos 2Δφ]`.
pub fn coincidence_density(r_a: f64, r_b: f64, delta_phi: f64) -> f64 {
    singlet_difference_density(r_a, r_b, delta_phi)
}

/// Ratio of perpendicular to parallel coincidences `(1 + r_A r_B)/(1 − r_A r_B)`.
pub fn perpendicular_parallel_ratio(r_a: f64, r_b: f64) -> Result<f64> {
    for r in [r_a, r_b] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("contrast {r} outside [0,1]")));
        }
    }
    let p = r_a * r_b;
    if p >= 1.0 {
        return Err(Error::InvalidParameter("ratio is infinite for r_A r_B = 1".into()));
    }
    Ok((1.0 + p) / (1.0 - p))
}

fn write_curve<W: Write, F: Fn(f64) -> f64>(out: W, header: [&str; 2], points: usize, scale: f64, f: F) -> Result<()> {
    if points == 0 {
        return Err(Error::InvalidParameter("curve needs at least one point".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for k in 0..points {
        let phi = PI * k as f64 / points as f64;
        w.write_record([fmt_sig(phi.to_degrees()), fmt_sig(scale * f(phi))])?;
    }
    w.flush()?;
    Ok(())
}

/// `phi_deg,density` at `points` equally spaced angles in `[0°, 180°)`.
pub fn write_kn_curve<W: Write>(k: &ComptonKinematics, points: usize, scale: f64, out: W) -> Result<()> {
    let norm = kn_normalizer(k.x());
    let x = k.x();
    write_curve(out, ["phi_deg", "density"], points, scale, |phi| {
        kn_numerator(x, phi) / norm
    })
}

/// `delta_phi_deg,density` at `points` equally spaced angles.
pub fn write_coincidence_curve<W: Write>(r_a: f64, r_b: f64, points: usize, scale: f64, out: W) -> Result<()> {
    write_curve(out, ["delta_phi_deg", "density"], points, scale, |d| {
        coincidence_density(r_a, r_b, d)
    })
}
