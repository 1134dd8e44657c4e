//! Detector contrast from angular scattered-power data.
//!
//! The model `P(φ) = a[1 + r cos 2(φ + φ0)]` is fitted through its linear
//! form `a + b cos 2φ + c sin 2φ`, with `r = √(b² + c²)/a` and
//! `φ0 = ½ atan2(−c, b)`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{fmt_sig, to_json_string};

pub const MIN_SAMPLES: usize = 5;
pub const SERIES_HEADER: [&str; 2] = ["angle_deg", "power_mw"];
/// Relative singular-value cutoff for a usable design matrix.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct AngularPowerSeries {
    /// Radians.
    angles: Vec<f64>,
    /// Milliwatts.
    powers: Vec<f64>,
}

impl AngularPowerSeries {
    /// `(angle in degrees, power in mW)` pairs.
    pub fn from_degrees(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        for (k, &(deg, p)) in samples.iter().enumerate() {
            validate(deg, p).map_err(|message| Error::Parse { row: k + 2, message })?;
        }
        Ok(Self {
            angles: samples.iter().map(|s| s.0.to_radians()).collect(),
            powers: samples.iter().map(|s| s.1).collect(),
        })
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != SERIES_HEADER {
            return Err(Error::Parse {
                row: 1,
                message: format!("expected header `{}`", SERIES_HEADER.join(",")),
            });
        }
        let mut samples = Vec::new();
        for (k, row) in rdr.records().enumerate() {
            let line = k + 2;
            let row = row.map_err(|e| Error::Parse {
                row: line,
                message: e.to_string(),
            })?;
            if row.len() != 2 {
                return Err(Error::Parse {
                    row: line,
                    message: format!("expected 2 fields, found {}", row.len()),
                });
            }
            let num = |i: usize| -> Result<f64> {
                row[i].parse().map_err(|_| Error::Parse {
                    row: line,
                    message: format!("non-numeric value `{}` in column {}", &row[i], SERIES_HEADER[i]),
                })
            };
            let (deg, p) = (num(0)?, num(1)?);
            validate(deg, p).map_err(|message| Error::Parse { row: line, message })?;
            samples.push((deg, p));
        }
        Self::from_degrees(&samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SERIES_HEADER)?;
        for (phi, p) in self.angles.iter().zip(&self.powers) {
            w.write_record([fmt_sig(phi.to_degrees()), fmt_sig(*p)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
}

fn validate(deg: f64, p: f64) -> std::result::Result<(), String> {
    if !deg.is_finite() || !(0.0..360.0).contains(&deg) {
        return Err(format!("angle {deg} outside [0, 360)"));
    }
    if !p.is_finite() {
        return Err("non-finite power".into());
    }
    if p < 0.0 {
        return Err(format!("negative power {p}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    /// Baseline power, mW.
    pub a: f64,
    pub r: f64,
    /// Phase offset in `[0, π)`, radians.
    pub phi0: f64,
    /// Statistical standard uncertainty of `r` from the residual scatter.
    pub sigma_r: f64,
    /// mW.
    pub residual_rms: f64,
    /// Set when the raw estimate fell outside `[0, 1]`.
    pub clamped: bool,
    pub n_samples: usize,
}

impl FitResult {
    pub fn predict(&self, phi: f64) -> f64 {
        self.a * (1.0 + self.r * (2.0 * (phi + self.phi0)).cos())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_string(self)?)
    }

    /// `angle_deg,power_fit_mw` at `points` equally spaced angles in
    /// `[0°, 360°)`.
    pub fn write_curve<W: Write>(&self, points: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["angle_deg", "power_fit_mw"])?;
        for k in 0..points {
            let deg = 360.0 * k as f64 / points as f64;
            w.write_record([fmt_sig(deg), fmt_sig(self.predict(deg.to_radians()))])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn fit_contrast(series: &AngularPowerSeries) -> Result<FitResult> {
    let n = series.len();
    let x = DMatrix::from_fn(n, 3, |i, j| {
        let phi = series.angles[i];
        match j {
            0 => 1.0,
            1 => (2.0 * phi).cos(),
            _ => (2.0 * phi).sin(),
        }
    });
    let y = DVector::from_column_slice(&series.powers);
    let sv = x.singular_values();
    if sv.min() <= RANK_TOL * sv.max() {
        return Err(Error::InvalidParameter(
            "design is rank deficient: angles must not all coincide modulo 90°".into(),
        ));
    }
    let xtx: Matrix3<f64> = (x.transpose() * &x).fixed_view::<3, 3>(0, 0).into_owned();
    let xty: Vector3<f64> = (x.transpose() * &y).fixed_rows::<3>(0).into_owned();
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("normal equations are singular".into()))?;
    let beta = chol.solve(&xty);
    let (a, b, c) = (beta[0], beta[1], beta[2]);
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("fitted baseline {a} is not positive")));
    }
    let resid = &y - &x * DVector::from_column_slice(beta.as_slice());
    let rss = resid.norm_squared();
    let amp = b.hypot(c);
    let raw = amp / a;
    let phi0 = if amp == 0.0 {
        0.0
    } else {
        (0.5 * (-c).atan2(b)).rem_euclid(PI)
    };
    let cov = chol.inverse() * (rss / (n - 3) as f64);
    let grad = if amp > 0.0 {
        Vector3::new(-raw / a, b / (a * amp), c / (a * amp))
    } else {
        // direction-free: average over the (b, c) plane
        let s = (0.5 * (cov[(1, 1)] + cov[(2, 2)])).max(0.0).sqrt() / a;
        return Ok(finish(a, raw, phi0, s, rss, n));
    };
    let sigma_r = (grad.transpose() * cov * grad)[(0, 0)].max(0.0).sqrt();
    Ok(finish(a, raw, phi0, sigma_r, rss, n))
}

fn finish(a: f64, raw: f64, phi0: f64, sigma_r: f64, rss: f64, n: usize) -> FitResult {
    let clamped = !(0.0..=1.0).contains(&raw);
    if clamped {
        log::warn!("fitted contrast {raw} clamped to [0, 1]");
    }
    FitResult {
        a,
        r: raw.clamp(0.0, 1.0),
        phi0,
        sigma_r,
        residual_rms: (rss / n as f64).sqrt(),
        clamped,
        n_samples: n,
    }
}

/// `n` equally spaced samples of `a[1 + r cos 2(φ + φ0)]` on `[0°, 360°)`,
/// each multiplied by `1 + noise·g` with standard normal `g`.
pub fn synthetic_series(a: f64, r: f64, phi0: f64, n: usize, noise: f64, seed: u64) -> Result<AngularPowerSeries> {
    let normal = Normal::new(0.0, noise.max(0.0)).map_err(|e| Error::InvalidParameter(format!("noise level: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let deg = 360.0 * k as f64 / n as f64;
            let clean = a * (1.0 + r * (2.0 * (deg.to_radians() + phi0)).cos());
            let noisy = clean * (1.0 + normal.sample(&mut rng));
            (deg, noisy.max(0.0))
        })
        .collect();
    AngularPowerSeries::from_degrees(&samples)
}
