//! Rotationally covariant (RoC) detector model.
//!
//! A RoC device is fixed by a single contrast `r ∈ [0,1]`. Its operator
//! density on the outcome circle `[0,π)` is
//!
//! ```text
//! M_φ = (1/π) U_φ* (𝟙 + r σx) U_φ = (1/π) [𝟙 + r (cos2φ σx − sin2φ σy)]
//! ```
//!
//! with `U_φ = exp(−iφσz)`. Every formula downstream uses this sign
//! convention.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{bloch_operator, eigenvalues_hermitian, identity2, ComplexMatrix};

/// Length tolerance for partitions of `[0,π)`.
pub const PARTITION_TOL: f64 = 1e-12;
/// Tolerance for POVM positivity and completeness.
pub const POVM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoCDevice {
    r: f64,
}

impl RoCDevice {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("detector contrast {r} outside [0,1]")));
        }
        Ok(Self { r })
    }

    pub fn perfect() -> Self {
        Self { r: 1.0 }
    }

    pub fn contrast(&self) -> f64 {
        self.r
    }
}

/// Half-open angle interval `[lo, hi)` inside `[0, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleBin {
    lo: f64,
    hi: f64,
}

impl AngleBin {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::InvalidBin { lo, hi });
        }
        if lo < -PARTITION_TOL || hi > PI + PARTITION_TOL {
            return Err(Error::InvalidBin { lo, hi });
        }
        Ok(Self {
            lo: lo.max(0.0),
            hi: hi.min(PI),
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Finite cover of `[0,π)` by disjoint half-open bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePartition {
    bins: Vec<AngleBin>,
}

impl AnglePartition {
    /// Accepts bins in any order; sorted by `lo` they must tile `[0,π)`.
    pub fn new(bins: Vec<AngleBin>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidPartition("no bins".into()));
        }
        let mut sorted = bins.clone();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if sorted[0].lo.abs() > PARTITION_TOL {
            return Err(Error::InvalidPartition(format!(
                "first bin starts at {} instead of 0",
                sorted[0].lo
            )));
        }
        for pair in sorted.windows(2) {
            let gap = pair[1].lo - pair[0].hi;
            if gap.abs() > PARTITION_TOL {
                return Err(Error::InvalidPartition(format!(
                    "bins [{}, {}) and [{}, {}) {}",
                    pair[0].lo,
                    pair[0].hi,
                    pair[1].lo,
                    pair[1].hi,
                    if gap > 0.0 { "leave a gap" } else { "overlap" }
                )));
            }
        }
        let last = sorted[sorted.len() - 1].hi;
        if (last - PI).abs() > PARTITION_TOL {
            return Err(Error::InvalidPartition(format!("last bin ends at {last} instead of π")));
        }
        let total: f64 = bins.iter().map(AngleBin::width).sum();
        if (total - PI).abs() > PARTITION_TOL {
            return Err(Error::InvalidPartition(format!(
                "total bin length {total} differs from π"
            )));
        }
        Ok(Self { bins })
    }

    /// `n` equal bins.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("zero bins".into()));
        }
        let edges: Vec<f64> = (0..=n).map(|k| PI * k as f64 / n as f64).collect();
        Self::from_edges(&edges)
    }

    /// Consecutive edges `0 = e₀ < e₁ < … < e_k = π`.
    pub fn from_edges(edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidPartition("need at least two edges".into()));
        }
        let bins = edges
            .windows(2)
            .map(|w| AngleBin::new(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bins)
    }

    pub fn bins(&self) -> &[AngleBin] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// M₀ = 𝟙 + r σx.
pub fn m_zero(device: RoCDevice) -> ComplexMatrix {
    bloch_operator(1.0, device.r, 0.0, 0.0)
}

/// Operator density M_φ = (1/π)[𝟙 + r(cos2φ σx − sin2φ σy)].
pub fn m_density(device: RoCDevice, phi: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * phi).sin_cos();
    bloch_operator(1.0, device.r * c, -device.r * s, 0.0).scale_real(1.0 / PI)
}

/// Bloch coefficients `(a, x, y)` of the integral of M_φ over `[lo, hi)`.
pub(crate) fn bin_coefficients(r: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let a = (hi - lo) / PI;
    let k = r / (2.0 * PI);
    let x = k * ((2.0 * hi).sin() - (2.0 * lo).sin());
    let y = k * ((2.0 * hi).cos() - (2.0 * lo).cos());
    (a, x, y)
}

/// Closed-form POVM element ∫_bin M_φ dφ.
pub fn bin_element(device: RoCDevice, bin: AngleBin) -> ComplexMatrix {
    let (a, x, y) = bin_coefficients(device.r, bin.lo, bin.hi);
    bloch_operator(a, x, y, 0.0)
}

/// Checked variant of [`bin_element`] taking raw interval ends.
pub fn bin_element_between(device: RoCDevice, lo: f64, hi: f64) -> Result<ComplexMatrix> {
    Ok(bin_element(device, AngleBin::new(lo, hi)?))
}

/// POVM obtained by integrating a RoC density over an angle partition.
#[derive(Clone, Debug)]
pub struct BinnedPOVM {
    device: RoCDevice,
    partition: AnglePartition,
    elements: Vec<ComplexMatrix>,
}

impl BinnedPOVM {
    pub fn device(&self) -> RoCDevice {
        self.device
    }

    pub fn partition(&self) -> &AnglePartition {
        &self.partition
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn build_binned_povm(device: RoCDevice, partition: &AnglePartition) -> Result<BinnedPOVM> {
    let elements: Vec<ComplexMatrix> = partition.bins().iter().map(|&bin| bin_element(device, bin)).collect();
    let mut sum = ComplexMatrix::zeros(2)?;
    for e in &elements {
        let min = eigenvalues_hermitian(e)?[0];
        if min < -POVM_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        sum = &sum + e;
    }
    let defect = sum.max_abs_diff(&identity2());
    if defect > POVM_TOL {
        return Err(Error::InvalidPartition(format!(
            "POVM elements sum to identity only within {defect:e}"
        )));
    }
    Ok(BinnedPOVM {
        device,
        partition: partition.clone(),
        elements,
    })
}

/// Contrast estimate from horizontal/vertical counts on a known source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastEstimate {
    /// Estimate clamped to `[0, 1]`.
    pub r: f64,
    /// Unclamped estimator value.
    pub raw: f64,
    /// Set when the raw value left `[0,1]` by more than 1e−9.
    pub clamped: bool,
}

/// Estimates `r` from counts `n_h` (detections at φ=0) and `n_v` (φ=π/2)
/// on the source ρ_a = (a/2)𝟙 + (1−a)|H⟩⟨H|.
///
/// With q = n_h/n_v the estimator is r = (q − 1) / ((q + 1)(a − 1)).
pub fn estimate_contrast(n_h: u64, n_v: u64, a: f64) -> Result<ContrastEstimate> {
    if n_v == 0 {
        return Err(Error::InvalidParameter("no vertical counts (n_V = 0)".into()));
    }
    if !(0.0..=2.0).contains(&a) {
        return Err(Error::InvalidParameter(format!("mixing parameter {a} outside [0,2]")));
    }
    if (a - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter(
            "a = 1 gives a maximally mixed source without contrast information".into(),
        ));
    }
    let q = n_h as f64 / n_v as f64;
    let raw = (q - 1.0) / ((q + 1.0) * (a - 1.0));
    let clamped = !(-1e-9..=1.0 + 1e-9).contains(&raw);
    if clamped {
        log::warn!("contrast estimate {raw} outside [0,1]; clamping");
    }
    Ok(ContrastEstimate {
        r: raw.clamp(0.0, 1.0),
        raw,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{pauli, rotation, Axis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dev(r: f64) -> RoCDevice {
        RoCDevice::new(r).unwrap()
    }

    #[test]
    fn m_zero_examples() {
        assert_eq!(m_zero(dev(0.0)).max_abs_diff(&identity2()), 0.0);
        let ev = eigenvalues_hermitian(&m_zero(dev(1.0))).unwrap();
        assert!(ev[0].abs() < 1e-15 && (ev[1] - 2.0).abs() < 1e-15);
        let ev = eigenvalues_hermitian(&m_zero(dev(0.5))).unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-15 && (ev[1] - 1.5).abs() < 1e-15);
        assert!((m_zero(dev(0.3)).trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn m_density_matches_conjugation() {
        for &r in &[0.0, 0.4, 1.0] {
            for k in 0..16 {
                let phi = k as f64 * PI / 16.0;
                let u = rotation(phi);
                let direct = (&(&u.adjoint() * &m_zero(dev(r))) * &u).scale_real(1.0 / PI);
                assert!(direct.max_abs_diff(&m_density(dev(r), phi)) < 1e-15);
            }
        }
        let quarter = m_density(dev(0.6), PI / 4.0);
        let expected = (&identity2() - &pauli(Axis::Y).scale_real(0.6)).scale_real(1.0 / PI);
        assert!(quarter.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn covariance_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = rng.random::<f64>();
            let phi = rng.random::<f64>() * PI;
            let psi = rng.random::<f64>() * PI;
            let u = rotation(psi);
            let lhs = m_density(dev(r), (phi + psi).rem_euclid(PI));
            let rhs = &(&u.adjoint() * &m_density(dev(r), phi)) * &u;
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn bin_element_examples() {
        let full = AngleBin::new(0.0, PI).unwrap();
        assert!(bin_element(dev(0.8), full).max_abs_diff(&identity2()) < 1e-15);
        let half = AngleBin::new(0.0, PI / 2.0).unwrap();
        let expected = &identity2().scale_real(0.5) - &pauli(Axis::Y).scale_real(1.0 / PI);
        assert!(bin_element(dev(1.0), half).max_abs_diff(&expected) < 1e-15);
        assert!(bin_element(dev(0.0), half).max_abs_diff(&identity2().scale_real(0.5)) < 1e-15);
        assert!(bin_element_between(dev(0.5), 1.0, 1.0).is_err());
        assert!(bin_element_between(dev(0.5), 1.0, 0.5).is_err());
    }

    #[test]
    fn partitions() {
        for n in [1, 2, 8] {
            let p = AnglePartition::uniform(n).unwrap();
            let povm = build_binned_povm(dev(0.9), &p).unwrap();
            assert_eq!(povm.len(), n);
        }
        let single = build_binned_povm(dev(0.3), &AnglePartition::uniform(1).unwrap()).unwrap();
        assert!(single.elements()[0].max_abs_diff(&identity2()) < 1e-15);
        assert!(AnglePartition::from_edges(&[0.0, 1.0, 2.0]).is_err());
        assert!(AnglePartition::from_edges(&[0.1, 1.0, PI]).is_err());
        let overlapping = vec![AngleBin::new(0.0, 2.0).unwrap(), AngleBin::new(1.0, PI).unwrap()];
        assert!(AnglePartition::new(overlapping).is_err());
        // order of bins is free as long as they tile
        let shuffled = vec![AngleBin::new(1.0, PI).unwrap(), AngleBin::new(0.0, 1.0).unwrap()];
        assert_eq!(AnglePartition::new(shuffled).unwrap().len(), 2);
        assert!(AnglePartition::uniform(0).is_err());
    }

    #[test]
    fn random_partitions_are_valid_povms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..=64);
            let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>() * PI).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![0.0];
            edges.extend(cuts.into_iter().filter(|&c| c > 0.0));
            edges.push(PI);
            let p = AnglePartition::from_edges(&edges).unwrap();
            let povm = build_binned_povm(dev(rng.random()), &p).unwrap();
            for e in povm.elements() {
                assert!(eigenvalues_hermitian(e).unwrap()[0] >= -POVM_TOL);
            }
        }
    }

    #[test]
    fn device_validation() {
        assert!(RoCDevice::new(1.2).is_err());
        assert!(RoCDevice::new(-0.1).is_err());
        assert!(RoCDevice::new(f64::NAN).is_err());
    }

    #[test]
    fn contrast_estimator() {
        let perfect = estimate_contrast(0, 100, 0.0).unwrap();
        assert_eq!(perfect.r, 1.0);
        assert!(!perfect.clamped);
        assert_eq!(estimate_contrast(500, 500, 0.0).unwrap().r, 0.0);
        assert!(estimate_contrast(10, 0, 0.0).is_err());
        assert!(estimate_contrast(10, 10, 1.0).is_err());
        let wild = estimate_contrast(0, 100, 0.5).unwrap();
        assert!(wild.clamped && wild.r == 1.0 && wild.raw > 1.0);
    }

    #[test]
    fn contrast_estimator_roundtrip() {
        let (r, a, n) = (0.7, 0.5, 1_000_000u64);
        let w_h = 1.0 + r * (a - 1.0);
        let w_v = 1.0 - r * (a - 1.0);
        let p_h = w_h / (w_h + w_v);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n_h = (0..n).filter(|_| rng.random::<f64>() < p_h).count() as u64;
        let est = estimate_contrast(n_h, n - n_h, a).unwrap();
        assert!((est.r - r).abs() < 0.01, "{est:?}");
    }
}
