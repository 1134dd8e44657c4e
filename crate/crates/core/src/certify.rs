//! Entanglement certification by negativity minimization.
//!
//! Given joint frequencies `p_ij` for Alice's bins `A_i` and Bob's bins
//! `B_j`, the smallest negativity of any state reproducing them is
//!
//! ```text
//! inf tr T − 1   s.t.  T ⪰ 0,  T ⪰ ρ^Γ,  ρ ⪰ 0,  tr ρ = 1,
//!                      tr[ρ (A_i ⊗ B_j)] = p_ij      (exact)
//!                   or |tr[ρ (A_i ⊗ B_j)] − p_ij| ≤ ε_ij   (Hoeffding)
//! ```
//!
//! solved with the block SDP solver on real embeddings of `ρ`, `T` and
//! `S = T − ρ^Γ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::to_json_string;
use crate::povm::{build_binned_povm, AnglePartition, RoCDevice};
use crate::qubit::{identity4, partial_transpose, tensor, DensityMatrix};
use crate::record::MeasurementRecord;
use crate::sdp::{extract, functional, hermitian_basis, solve, SdpProblem, SdpResiduals, SdpSettings, SdpStatus};
use crate::states::ProbabilityTable;

/// Minimal negativity above which a state is declared entangled.
pub const DECISION_THRESHOLD: f64 = 1e-6;

/// Per-cell radius `√(ln(2/(1−c)) / (2n))` such that an empirical frequency
/// is within it of the true probability with probability at least `c`.
pub fn hoeffding_radius(n: u64, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("Hoeffding radius needs n >= 1".into()));
    }
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie in [0, 1), got {c}"
        )));
    }
    Ok(((2.0 / (1.0 - c)).ln() / (2.0 * n as f64)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceMode {
    Exact,
    Hoeffding,
}

impl std::str::FromStr for ConfidenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "hoeffding" => Ok(Self::Hoeffding),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode `{other}` (expected exact or hoeffding)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceSettings {
    pub c: f64,
    pub mode: ConfidenceMode,
    /// Divide `1 − c` by the number of cells for simultaneous coverage.
    pub bonferroni: bool,
}

impl ConfidenceSettings {
    pub fn exact() -> Self {
        Self {
            c: 0.0,
            mode: ConfidenceMode::Exact,
            bonferroni: false,
        }
    }

    pub fn hoeffding(c: f64) -> Result<Self> {
        let s = Self {
            c,
            mode: ConfidenceMode::Hoeffding,
            bonferroni: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::InvalidParameter(format!(
                "confidence level must lie in [0, 1), got {}",
                self.c
            )));
        }
        Ok(())
    }

    /// Radius applied to every cell of a `cells`-cell table from `n` shots.
    pub fn cell_radius(&self, n: u64, cells: usize) -> Result<f64> {
        self.validate()?;
        let c = if self.bonferroni {
            1.0 - (1.0 - self.c) / cells as f64
        } else {
            self.c
        };
        hoeffding_radius(n, c)
    }
}

/// Joint bin frequencies with the partitions that produced them.
#[derive(Clone, Debug)]
pub struct Statistics {
    table: ProbabilityTable,
    partition_a: AnglePartition,
    partition_b: AnglePartition,
    shots: Option<u64>,
}

impl Statistics {
    /// Probabilities known without sampling error.
    pub fn exact(table: ProbabilityTable, partition_a: AnglePartition, partition_b: AnglePartition) -> Result<Self> {
        Self::new(table, partition_a, partition_b, None)
    }

    pub fn from_record(record: &MeasurementRecord) -> Result<Self> {
        Self::new(
            record.frequencies(),
            record.partition_a().clone(),
            record.partition_b().clone(),
            Some(record.total()),
        )
    }

    fn new(
        table: ProbabilityTable,
        partition_a: AnglePartition,
        partition_b: AnglePartition,
        shots: Option<u64>,
    ) -> Result<Self> {
        if table.rows() != partition_a.len() {
            return Err(Error::DimensionMismatch {
                expected: partition_a.len(),
                found: table.rows(),
            });
        }
        if table.cols() != partition_b.len() {
            return Err(Error::DimensionMismatch {
                expected: partition_b.len(),
                found: table.cols(),
            });
        }
        if let Some(p) = table.values().iter().find(|&&p| p < 0.0) {
            return Err(Error::InvalidParameter(format!("negative frequency {p}")));
        }
        if !(table.total() > 0.0) {
            return Err(Error::InvalidParameter("statistics contain no events".into()));
        }
        Ok(Self {
            table,
            partition_a,
            partition_b,
            shots,
        })
    }

    pub fn table(&self) -> &ProbabilityTable {
        &self.table
    }

    pub fn partition_a(&self) -> &AnglePartition {
        &self.partition_a
    }

    pub fn partition_b(&self) -> &AnglePartition {
        &self.partition_b
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificationStatus {
    Entangled,
    Inconclusive,
    InfeasibleData,
    SolverFailure,
}

impl std::fmt::Display for CertificationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Entangled => "ENTANGLED",
            Self::Inconclusive => "INCONCLUSIVE",
            Self::InfeasibleData => "INFEASIBLE_DATA",
            Self::SolverFailure => "SOLVER_FAILURE",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CertificationResult {
    pub status: CertificationStatus,
    /// Clamped at zero; absent unless the SDP reached optimality.
    pub min_negativity: Option<f64>,
    pub mode: ConfidenceMode,
    pub confidence: Option<f64>,
    /// Radius per cell, row-major; zeros in exact mode.
    pub epsilon: Vec<f64>,
    pub shots: Option<u64>,
    /// State attaining the minimum.
    pub witness: Option<DensityMatrix>,
    pub solver_iterations: usize,
    pub residuals: SdpResiduals,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    status: CertificationStatus,
    min_negativity: Option<f64>,
    mode: ConfidenceMode,
    c: Option<f64>,
    epsilon: &'a [f64],
    n: Option<u64>,
    solver_iterations: usize,
    residuals: SdpResiduals,
}

impl CertificationResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_string(&ResultJson {
            status: self.status,
            min_negativity: self.min_negativity,
            mode: self.mode,
            c: self.confidence,
            epsilon: &self.epsilon,
            n: self.shots,
            solver_iterations: self.solver_iterations,
            residuals: self.residuals,
        })?)
    }
}

/// Constraint data of the negativity SDP, before the right-hand sides are
/// chosen.
pub struct NegativityProgram {
    problem: SdpProblem,
}

const RHO: usize = 0;
const T: usize = 1;
const S: usize = 2;

impl NegativityProgram {
    /// Blocks `ρ`, `T`, `S` with `T − S = ρ^Γ`, `tr ρ = 1`, objective `tr T`.
    fn base() -> Result<SdpProblem> {
        let mut p = SdpProblem::new(&[8, 8, 8])?;
        let id = identity4();
        p.set_objective(T, functional(&id))?;
        for e in hermitian_basis(4)? {
            let f = functional(&e);
            let fg = functional(&partial_transpose(&e)?);
            p.add_equality(vec![(T, f.clone()), (S, -f), (RHO, -fg)], 0.0)?;
        }
        p.add_equality(vec![(RHO, functional(&id))], 1.0)?;
        Ok(p)
    }

    /// Builds the program for `stats` measured with RoC devices of the
    /// given contrasts. `epsilon` holds per-cell radii or is `None` for
    /// equality constraints.
    pub fn new(stats: &Statistics, r_a: RoCDevice, r_b: RoCDevice, epsilon: Option<&[f64]>) -> Result<Self> {
        let povm_a = build_binned_povm(r_a, stats.partition_a())?;
        let povm_b = build_binned_povm(r_b, stats.partition_b())?;
        let mut p = Self::base()?;
        let cols = povm_b.len();
        for (i, a) in povm_a.elements().iter().enumerate() {
            for (j, b) in povm_b.elements().iter().enumerate() {
                let f = functional(&tensor(a, b)?);
                let pij = stats.table().get(i, j);
                match epsilon {
                    None => {
                        p.add_equality(vec![(RHO, f)], pij)?;
                    }
                    Some(eps) => {
                        let e = eps[i * cols + j];
                        p.add_inequality(vec![(RHO, f.clone())], pij + e)?;
                        p.add_inequality(vec![(RHO, -f)], -(pij - e))?;
                    }
                }
            }
        }
        Ok(Self { problem: p })
    }

    pub fn problem(&self) -> &SdpProblem {
        &self.problem
    }
}

/// Smallest negativity among states compatible with `stats` under devices
/// of contrast `r_a`, `r_b`.
pub fn min_negativity(
    stats: &Statistics,
    r_a: RoCDevice,
    r_b: RoCDevice,
    settings: &ConfidenceSettings,
    sdp: &SdpSettings,
) -> Result<CertificationResult> {
    settings.validate()?;
    let cells = stats.table().values().len();
    let (epsilon, confidence) = match settings.mode {
        ConfidenceMode::Exact => (vec![0.0; cells], None),
        ConfidenceMode::Hoeffding => {
            let n = stats
                .shots()
                .ok_or_else(|| Error::InvalidParameter("Hoeffding mode needs a shot count".into()))?;
            (vec![settings.cell_radius(n, cells)?; cells], Some(settings.c))
        }
    };
    let program = NegativityProgram::new(
        stats,
        r_a,
        r_b,
        match settings.mode {
            ConfidenceMode::Exact => None,
            ConfidenceMode::Hoeffding => Some(&epsilon),
        },
    )?;
    let sol = solve(program.problem(), sdp);
    let mut result = CertificationResult {
        status: CertificationStatus::SolverFailure,
        min_negativity: None,
        mode: settings.mode,
        confidence,
        epsilon,
        shots: stats.shots(),
        witness: None,
        solver_iterations: sol.iterations,
        residuals: sol.residuals,
    };
    match sol.status {
        SdpStatus::Optimal => {
            let value = (sol.primal_objective - 1.0).max(0.0);
            result.min_negativity = Some(value);
            result.status = if value > DECISION_THRESHOLD {
                CertificationStatus::Entangled
            } else {
                CertificationStatus::Inconclusive
            };
            let rho = extract(&sol.x[RHO])?;
            result.witness = DensityMatrix::from_approximate(&rho).ok();
        }
        SdpStatus::PrimalInfeasible => result.status = CertificationStatus::InfeasibleData,
        SdpStatus::Unbounded | SdpStatus::NumericalLimit => {
            log::warn!("negativity SDP ended with {}", sol.status);
        }
    }
    Ok(result)
}

/// Certifies a sampled record.
pub fn certify(
    record: &MeasurementRecord,
    r_a: RoCDevice,
    r_b: RoCDevice,
    settings: &ConfidenceSettings,
    sdp: &SdpSettings,
) -> Result<CertificationResult> {
    min_negativity(&Statistics::from_record(record)?, r_a, r_b, settings, sdp)
}
