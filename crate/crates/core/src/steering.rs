//! Steering from post-processed RoC measurements and CHSH scores of binned
//! RoC observables.
//!
//! Two coarse-grainings of a RoC device yield Pauli observables up to the
//! factor `2r/π`: the half-circle split `{[0,π/2), [π/2,π)}` gives
//! `B − A = (2r/π)σy`, and the split `{[0,π/4) ∪ [3π/4,π), [π/4,3π/4)}` gives
//! `B − A = (2r/π)σx`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::to_json_string;
use crate::povm::{bin_element, AngleBin, AnglePartition, RoCDevice};
use crate::qubit::{pauli, tensor, Axis, ComplexMatrix, DensityMatrix, C64};

/// Slack on `|⟨σσ⟩| ≤ 1`.
pub const CORRELATION_TOL: f64 = 1e-10;
/// Local-hidden-variable bound on the CHSH combination.
pub const CHSH_BOUND: f64 = 2.0;
pub const STEERING_THRESHOLD: f64 = 2.0;

/// Pauli observables assembled from one RoC device.
#[derive(Clone, Debug)]
pub struct RocPaulis {
    /// (π/2r)(B^x − A^x)
    pub x: ComplexMatrix,
    /// (π/2r)(B^y − A^y)
    pub y: ComplexMatrix,
    /// B^x − A^x
    pub x_unscaled: ComplexMatrix,
    /// B^y − A^y
    pub y_unscaled: ComplexMatrix,
}

fn bin(lo: f64, hi: f64) -> AngleBin {
    AngleBin::new(lo, hi).expect("fixed bin")
}

pub fn pauli_from_roc(r: f64) -> Result<RocPaulis> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Pauli post-processing needs a positive contrast, got {r}"
        )));
    }
    let dev = RoCDevice::new(r)?;
    let a_x = bin_element(dev, bin(FRAC_PI_4, 3.0 * FRAC_PI_4));
    let b_x = &bin_element(dev, bin(0.0, FRAC_PI_4)) + &bin_element(dev, bin(3.0 * FRAC_PI_4, PI));
    let a_y = bin_element(dev, bin(0.0, FRAC_PI_2));
    let b_y = bin_element(dev, bin(FRAC_PI_2, PI));
    let x_unscaled = &b_x - &a_x;
    let y_unscaled = &b_y - &a_y;
    let k = PI / (2.0 * r);
    Ok(RocPaulis {
        x: x_unscaled.scale_real(k),
        y: y_unscaled.scale_real(k),
        x_unscaled,
        y_unscaled,
    })
}

/// `⟨σ_i^A σ_j^B⟩` for `i, j ∈ {x, y}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl CorrelationTable {
    pub fn new(xx: f64, xy: f64, yx: f64, yy: f64) -> Result<Self> {
        for v in [xx, xy, yx, yy] {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            if v.abs() > 1.0 + CORRELATION_TOL {
                return Err(Error::InvalidParameter(format!("correlation {v} outside [-1, 1]")));
            }
        }
        Ok(Self { xx, xy, yx, yy })
    }

    pub fn zero() -> Self {
        Self {
            xx: 0.0,
            xy: 0.0,
            yx: 0.0,
            yy: 0.0,
        }
    }
}

/// Correlations between Alice's exact Paulis and Bob's RoC-derived ones.
///
/// With `r_known` Bob rescales by `π/2r` and recovers true Paulis; without
/// it he rescales by `π/2`, so his observables are `r·σ`.
pub fn correlation_table(rho: &DensityMatrix, r_b: f64, r_known: bool) -> Result<CorrelationTable> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let bob = pauli_from_roc(r_b)?;
    let scale = if r_known { 1.0 } else { r_b };
    let bx = bob.x.scale_real(scale);
    let by = bob.y.scale_real(scale);
    let (sx, sy) = (pauli(Axis::X), pauli(Axis::Y));
    let e = |a: &ComplexMatrix, b: &ComplexMatrix| -> Result<f64> { Ok(rho.expectation(&tensor(a, b)?)) };
    CorrelationTable::new(e(&sx, &bx)?, e(&sx, &by)?, e(&sy, &bx)?, e(&sy, &by)?)
}

/// `√(⟨(σx+σy)σx⟩² + ⟨(σx+σy)σy⟩²) + √(⟨(σx−σy)σx⟩² + ⟨(σx−σy)σy⟩²)`,
/// Alice's operator first.
pub fn steering_functional(t: &CorrelationTable) -> f64 {
    (t.xx + t.yx).hypot(t.xy + t.yy) + (t.xx - t.yx).hypot(t.xy - t.yy)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteeringReport {
    pub functional_value: f64,
    pub threshold: f64,
    pub demonstrated: bool,
    pub assumptions: &'static str,
    pub r_known: bool,
    pub correlations: CorrelationTable,
}

impl SteeringReport {
    pub fn new(correlations: CorrelationTable, r_known: bool) -> Self {
        let v = steering_functional(&correlations);
        Self {
            functional_value: v,
            threshold: STEERING_THRESHOLD,
            demonstrated: v > STEERING_THRESHOLD,
            assumptions: "alice-trusted",
            r_known,
            correlations,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_string(self)?)
    }
}

/// A two-outcome measurement: a partition with a ±1 label per bin.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMeasurement {
    partition: AnglePartition,
    labels: Vec<i8>,
}

impl BinaryMeasurement {
    pub fn new(partition: AnglePartition, labels: Vec<i8>) -> Result<Self> {
        if labels.len() != partition.len() {
            return Err(Error::DimensionMismatch {
                expected: partition.len(),
                found: labels.len(),
            });
        }
        if labels.iter().any(|&l| l != 1 && l != -1) {
            return Err(Error::InvalidParameter("outcome labels must be +1 or -1".into()));
        }
        Ok(Self { partition, labels })
    }

    /// `+1` on `[θ, θ+π/2)` taken modulo π, `−1` elsewhere.
    pub fn half_plane(theta: f64) -> Result<Self> {
        let t = theta.rem_euclid(PI);
        let u = t + FRAC_PI_2;
        let mut edges = vec![0.0];
        let mut labels = Vec::new();
        if u <= PI {
            if t > 0.0 {
                edges.push(t);
                labels.push(-1);
            }
            edges.push(u);
            labels.push(1);
            if u < PI {
                edges.push(PI);
                labels.push(-1);
            }
        } else {
            edges.push(u - PI);
            labels.push(1);
            edges.push(t);
            labels.push(-1);
            edges.push(PI);
            labels.push(1);
        }
        Self::new(AnglePartition::from_edges(&edges)?, labels)
    }

    pub fn partition(&self) -> &AnglePartition {
        &self.partition
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// `Σ_k label_k · E_k` for a device of contrast `device`.
    pub fn observable(&self, device: RoCDevice) -> ComplexMatrix {
        let mut o = ComplexMatrix::zeros(2).expect("qubit");
        for (b, &l) in self.partition.bins().iter().zip(&self.labels) {
            o = &o + &bin_element(device, *b).scale_real(f64::from(l));
        }
        o
    }
}

/// Two settings per party.
#[derive(Clone, Debug, PartialEq)]
pub struct BellConfiguration {
    pub alice: [BinaryMeasurement; 2],
    pub bob: [BinaryMeasurement; 2],
}

impl BellConfiguration {
    /// Half-plane settings at Alice `{0, π/4}` and Bob `{π/8, 3π/8}`.
    pub fn canonical() -> Self {
        let h = |t: f64| BinaryMeasurement::half_plane(t).expect("valid angle");
        Self {
            alice: [h(0.0), h(FRAC_PI_4)],
            bob: [h(PI / 8.0), h(-PI / 8.0)],
        }
    }

    /// Random partitions with up to `max_bins` bins and random labels.
    pub fn random<R: Rng>(rng: &mut R, max_bins: usize) -> Self {
        let mut m = || {
            let k = rng.random_range(1..=max_bins.max(1));
            let mut cuts: Vec<f64> = (1..k).map(|_| rng.random::<f64>() * PI).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![0.0];
            edges.extend(cuts.into_iter().filter(|&c| c > 1e-9 && c < PI - 1e-9));
            edges.push(PI);
            let labels = (0..edges.len() - 1)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            BinaryMeasurement::new(AnglePartition::from_edges(&edges).expect("sorted cuts"), labels)
                .expect("matching labels")
        };
        let (a0, a1, b0, b1) = (m(), m(), m(), m());
        Self {
            alice: [a0, a1],
            bob: [b0, b1],
        }
    }
}

/// `E(A0,B0) + E(A0,B1) + E(A1,B0) − E(A1,B1)`.
pub fn chsh_score(rho: &DensityMatrix, config: &BellConfiguration, r_a: RoCDevice, r_b: RoCDevice) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let a: Vec<ComplexMatrix> = config.alice.iter().map(|m| m.observable(r_a)).collect();
    let b: Vec<ComplexMatrix> = config.bob.iter().map(|m| m.observable(r_b)).collect();
    let e = |i: usize, j: usize| -> Result<f64> { Ok(rho.expectation(&tensor(&a[i], &b[j])?)) };
    Ok(e(0, 0)? + e(0, 1)? + e(1, 0)? - e(1, 1)?)
}

/// Density matrix `G G† / tr(G G†)` from a complex Gaussian `G`.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> Result<DensityMatrix> {
    let g: Vec<C64> = (0..dim * dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let g = ComplexMatrix::from_rows(dim, g)?;
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshSearch {
    pub configurations: usize,
    pub states: usize,
    /// Largest |CHSH| seen.
    pub max_abs_score: f64,
}

/// Seeded random search for the largest `|CHSH|` over configurations,
/// states and contrasts. Configuration `k` uses the stream `seed + k`, so
/// the result does not depend on scheduling.
pub fn chsh_random_search(configurations: usize, states: usize, seed: u64) -> Result<ChshSearch> {
    let best = (0..configurations)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let config = BellConfiguration::random(&mut rng, 6);
            let mut best: f64 = 0.0;
            for _ in 0..states {
                let rho = random_state(&mut rng, 4)?;
                let ra = RoCDevice::new(rng.random())?;
                let rb = RoCDevice::new(rng.random())?;
                best = best.max(chsh_score(&rho, &config, ra, rb)?.abs());
                let perfect = RoCDevice::perfect();
                best = best.max(chsh_score(&rho, &config, perfect, perfect)?.abs());
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ChshSearch {
        configurations,
        states,
        max_abs_score: best,
    })
}
