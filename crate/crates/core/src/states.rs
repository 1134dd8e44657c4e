//! Named two-qubit states and their coincidence statistics under RoC
//! detectors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::povm::{m_density, BinnedPOVM, RoCDevice};
use crate::qubit::{bloch_operator, identity2, tensor, DensityMatrix, C64};
use crate::record::MeasurementRecord;

/// Probabilities below zero but above this are treated as roundoff.
pub const NEGATIVE_PROBABILITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum NamedState {
    /// |Ψ⁻⟩ = (|01⟩ − |10⟩)/√2.
    Singlet,
    /// f·|Ψ⁻⟩⟨Ψ⁻| + (1−f)/4·𝟙.
    Werner {
        f: f64,
    },
    /// (|HV⟩⟨HV| + |VH⟩⟨VH|)/2 with |V⟩⟨V| = (𝟙+σx)/2, |H⟩⟨H| = (𝟙−σx)/2.
    OrthoMixture,
    Custom(DensityMatrix),
}

impl NamedState {
    pub fn description(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedState::Singlet => write!(f, "singlet"),
            NamedState::Werner { f: fid } => write!(f, "werner:{fid}"),
            NamedState::OrthoMixture => write!(f, "ortho-mixture"),
            NamedState::Custom(_) => write!(f, "custom"),
        }
    }
}

impl FromStr for NamedState {
    type Err = Error;

    /// Accepts `singlet`, `werner:<f>`, `ortho-mixture` and `mixed`
    /// (the maximally mixed state, `werner:0`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "singlet" => return Ok(NamedState::Singlet),
            "ortho-mixture" | "ortho_mixture" | "orthomixture" => return Ok(NamedState::OrthoMixture),
            "mixed" | "maximally-mixed" => return Ok(NamedState::Werner { f: 0.0 }),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("werner:").or_else(|| s.strip_prefix("werner=")) {
            let f: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad Werner fidelity `{rest}`")))?;
            return Ok(NamedState::Werner { f });
        }
        Err(Error::InvalidParameter(format!(
            "unknown state `{s}` (expected singlet, werner:<f>, ortho-mixture or mixed)"
        )))
    }
}

fn singlet() -> DensityMatrix {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    DensityMatrix::pure(&[z, s, -s, z]).expect("singlet is a valid state")
}

pub fn make_state(kind: &NamedState) -> Result<DensityMatrix> {
    match kind {
        NamedState::Singlet => Ok(singlet()),
        NamedState::Werner { f } => {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::InvalidParameter(format!("Werner fidelity {f} outside [0,1]")));
            }
            singlet().mix(&DensityMatrix::maximally_mixed(4)?, *f)
        }
        NamedState::OrthoMixture => {
            let v = bloch_operator(0.5, 0.5, 0.0, 0.0);
            let h = &identity2() - &v;
            let m = &tensor(&h, &v)? + &tensor(&v, &h)?;
            DensityMatrix::new(m.scale_real(0.5))
        }
        NamedState::Custom(rho) => {
            if rho.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    found: rho.dim(),
                });
            }
            Ok(rho.clone())
        }
    }
}

/// Joint detection density tr[ρ (M^{r_A}_φ ⊗ M^{r_B}_ψ)].
pub fn joint_density(rho: &DensityMatrix, r_a: RoCDevice, r_b: RoCDevice, phi: f64, psi: f64) -> f64 {
    let op = tensor(&m_density(r_a, phi), &m_density(r_b, psi)).expect("qubit operators");
    rho.expectation(&op)
}

/// Matrix of joint probabilities `P_ij` (row i: Alice's bin, column j: Bob's).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("empty probability table".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.cols + j] = value;
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn row_marginals(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn col_marginals(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

/// P_ij = tr[ρ (A_i ⊗ B_j)].
pub fn joint_probabilities(rho: &DensityMatrix, povm_a: &BinnedPOVM, povm_b: &BinnedPOVM) -> Result<ProbabilityTable> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let mut values = Vec::with_capacity(povm_a.len() * povm_b.len());
    for a in povm_a.elements() {
        for b in povm_b.elements() {
            let p = rho.expectation(&tensor(a, b)?);
            if p < -NEGATIVE_PROBABILITY_TOL {
                return Err(Error::NotPositive { min_eigenvalue: p });
            }
            values.push(p.max(0.0));
        }
    }
    ProbabilityTable::new(povm_a.len(), povm_b.len(), values)
}

/// Draws `n` coincidences from the table of joint probabilities.
///
/// The generator is ChaCha8 seeded through `seed_from_u64(seed)`; each shot
/// consumes one uniform `f64` which is located in the cumulative
/// distribution by binary search. Records are bit-reproducible for a fixed
/// seed.
pub fn sample_counts(table: &ProbabilityTable, n: u64, seed: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of shots must be at least 1".into()));
    }
    let total = table.total();
    let mut cdf = Vec::with_capacity(table.values.len());
    let mut acc = 0.0;
    for &p in &table.values {
        acc += p / total;
        cdf.push(acc);
    }
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..n {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[k] += 1;
    }
    Ok(counts)
}

/// Simulates a coincidence record for `rho` measured with the two POVMs.
pub fn sample_record(
    rho: &DensityMatrix,
    povm_a: &BinnedPOVM,
    povm_b: &BinnedPOVM,
    n: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of shots must be at least 1".into()));
    }
    let table = joint_probabilities(rho, povm_a, povm_b)?;
    let counts = sample_counts(&table, n, seed)?;
    MeasurementRecord::new(povm_a.partition().clone(), povm_b.partition().clone(), counts)
}

/// Coincidence density of the singlet at angle difference Δφ, marginalized
/// over the common angle: (1/π)[1 − r_A r_B cos2Δφ].
pub fn singlet_difference_density(r_a: f64, r_b: f64, delta: f64) -> f64 {
    (1.0 - r_a * r_b * (2.0 * delta).cos()) / PI
}
