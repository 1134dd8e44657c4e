//! Semi-device-independent certification.
//!
//! Measured statistics are confronted with every pair of hypothetical RoC
//! devices on a grid. Each hypothesis either replicates the data with an
//! entangled state only, replicates it with a separable state, or cannot
//! replicate it at all. The sample is entangled when no hypothesis falls in
//! the separable case and at least one replicates it.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{min_negativity, CertificationStatus, ConfidenceSettings, Statistics, DECISION_THRESHOLD};
use crate::error::{Error, Result};
use crate::format::{fmt_sig, to_json_string};
use crate::povm::{bin_coefficients, build_binned_povm, AnglePartition, RoCDevice};
use crate::sdp::SdpSettings;
use crate::states::{joint_probabilities, make_state, NamedState};

pub const DEFAULT_GRID_STEP: f64 = 0.01;
/// Necessary contrast product for Werner-family statistics to be entangled.
pub const WERNER_FAMILY_BOUND: f64 = 1.0 / 3.0;

/// Ascending hypothetical contrasts in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisGrid {
    r_values: Vec<f64>,
}

impl HypothesisGrid {
    pub fn new(r_values: Vec<f64>) -> Result<Self> {
        if r_values.is_empty() {
            return Err(Error::InvalidParameter("hypothesis grid is empty".into()));
        }
        if r_values.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidParameter(
                "hypothetical contrasts must lie in (0, 1]".into(),
            ));
        }
        if r_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "hypothesis grid must be strictly ascending".into(),
            ));
        }
        Ok(Self { r_values })
    }

    /// `step, 2·step, …` up to and including 1.
    pub fn with_step(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::InvalidParameter(format!("grid step {step} outside (0, 1]")));
        }
        let n = (1.0 / step + 1e-9).floor() as usize;
        let mut v: Vec<f64> = (1..=n).map(|k| k as f64 * step).filter(|&r| r < 1.0 - 1e-12).collect();
        v.push(1.0);
        Self::new(v)
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn len(&self) -> usize {
        self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_values.is_empty()
    }
}

impl Default for HypothesisGrid {
    fn default() -> Self {
        Self::with_step(DEFAULT_GRID_STEP).expect("valid default step")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HypothesisCase {
    ReplicatedEntangled,
    ReplicatedSeparable,
    NotReplicable,
    /// The solver neither converged nor proved infeasibility.
    SolverFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    #[serde(rename = "r_A_hyp")]
    pub r_a_hyp: f64,
    #[serde(rename = "r_B_hyp")]
    pub r_b_hyp: f64,
    pub case: HypothesisCase,
    pub min_negativity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WernerFamilyCheck {
    /// Correlation modulation seen by perfect devices.
    pub modulation: f64,
    pub bound: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemiDIVerdict {
    pub entangled: bool,
    /// False when some hypothesis ended in a solver failure.
    pub complete: bool,
    pub solver_failures: usize,
    pub werner_family_bound: WernerFamilyCheck,
    pub outcomes: Vec<HypothesisOutcome>,
}

impl SemiDIVerdict {
    /// Applies the aggregation rule to `outcomes`.
    pub fn aggregate(outcomes: Vec<HypothesisOutcome>, werner_family_bound: WernerFamilyCheck) -> Self {
        let has = |c: HypothesisCase| outcomes.iter().any(|o| o.case == c);
        let entangled = !has(HypothesisCase::ReplicatedSeparable) && has(HypothesisCase::ReplicatedEntangled);
        let solver_failures = outcomes
            .iter()
            .filter(|o| o.case == HypothesisCase::SolverFailure)
            .count();
        if solver_failures > 0 {
            log::warn!("{solver_failures} hypotheses ended in solver failure; verdict is incomplete");
        }
        Self {
            entangled,
            complete: solver_failures == 0,
            solver_failures,
            werner_family_bound,
            outcomes,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_string(self)?)
    }
}

/// Necessary condition `r_A r_B > 1/3` for Werner-family statistics.
pub fn werner_family_bound(modulation: f64) -> WernerFamilyCheck {
    WernerFamilyCheck {
        modulation,
        bound: WERNER_FAMILY_BOUND,
        passes: modulation > WERNER_FAMILY_BOUND,
    }
}

/// Least-squares estimate of the x/y correlation block seen by perfect
/// devices, reduced to the mean of its singular values.
pub fn observed_modulation(stats: &Statistics) -> f64 {
    let coeff = |p: &AnglePartition| -> Vec<(f64, f64, f64)> {
        p.bins().iter().map(|b| bin_coefficients(1.0, b.lo(), b.hi())).collect()
    };
    let ca = coeff(stats.partition_a());
    let cb = coeff(stats.partition_b());
    let total = stats.table().total();
    let rows = ca.len() * cb.len();
    // unknowns: Alice (x, y), Bob (x, y), T_xx, T_xy, T_yx, T_yy
    let mut design = DMatrix::zeros(rows, 8);
    let mut target = DVector::zeros(rows);
    for (i, &(a, xa, ya)) in ca.iter().enumerate() {
        for (j, &(b, xb, yb)) in cb.iter().enumerate() {
            let k = i * cb.len() + j;
            let vals = [xa * b, ya * b, a * xb, a * yb, xa * xb, xa * yb, ya * xb, ya * yb];
            for (c, v) in vals.iter().enumerate() {
                design[(k, c)] = *v;
            }
            target[k] = stats.table().get(i, j) / total - a * b;
        }
    }
    let sol = design
        .svd(true, true)
        .solve(&target, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(8));
    let t = DMatrix::from_row_slice(2, 2, &[sol[4], sol[5], sol[6], sol[7]]);
    t.singular_values().mean()
}

/// Runs the negativity minimization for one hypothetical device pair.
pub fn classify_hypothesis(
    stats: &Statistics,
    r_a_hyp: f64,
    r_b_hyp: f64,
    settings: &ConfidenceSettings,
    sdp: &SdpSettings,
) -> Result<HypothesisOutcome> {
    for r in [r_a_hyp, r_b_hyp] {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "hypothetical contrast {r} outside (0, 1]"
            )));
        }
    }
    let res = min_negativity(stats, RoCDevice::new(r_a_hyp)?, RoCDevice::new(r_b_hyp)?, settings, sdp)?;
    let case = match res.status {
        CertificationStatus::Entangled => HypothesisCase::ReplicatedEntangled,
        CertificationStatus::Inconclusive => HypothesisCase::ReplicatedSeparable,
        CertificationStatus::InfeasibleData => HypothesisCase::NotReplicable,
        CertificationStatus::SolverFailure => HypothesisCase::SolverFailure,
    };
    Ok(HypothesisOutcome {
        r_a_hyp,
        r_b_hyp,
        case,
        min_negativity: res.min_negativity,
    })
}

/// Evaluates every hypothesis on `grid × grid`. Outcomes are listed with
/// Alice's contrast varying slowest.
pub fn scan(
    stats: &Statistics,
    grid: &HypothesisGrid,
    settings: &ConfidenceSettings,
    sdp: &SdpSettings,
) -> Result<SemiDIVerdict> {
    let pairs: Vec<(f64, f64)> = grid
        .r_values()
        .iter()
        .flat_map(|&a| grid.r_values().iter().map(move |&b| (a, b)))
        .collect();
    scan_pairs(stats, &pairs, settings, sdp)
}

/// Like [`scan`] over an explicit list of hypotheses.
pub fn scan_pairs(
    stats: &Statistics,
    pairs: &[(f64, f64)],
    settings: &ConfidenceSettings,
    sdp: &SdpSettings,
) -> Result<SemiDIVerdict> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no hypotheses to scan".into()));
    }
    let outcomes = pairs
        .par_iter()
        .map(|&(a, b)| classify_hypothesis(stats, a, b, settings, sdp))
        .collect::<Result<Vec<_>>>()?;
    Ok(SemiDIVerdict::aggregate(
        outcomes,
        werner_family_bound(observed_modulation(stats)),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub r_product: f64,
    /// At hypothesis (1, 1); absent when the solver failed.
    pub min_negativity: Option<f64>,
}

/// Exact statistics of `state` seen through devices `(r_a, r_b)`.
pub fn exact_statistics(
    state: &NamedState,
    r_a: f64,
    r_b: f64,
    partition_a: &AnglePartition,
    partition_b: &AnglePartition,
) -> Result<Statistics> {
    let rho = make_state(state)?;
    let pa = build_binned_povm(RoCDevice::new(r_a)?, partition_a)?;
    let pb = build_binned_povm(RoCDevice::new(r_b)?, partition_b)?;
    Statistics::exact(
        joint_probabilities(&rho, &pa, &pb)?,
        partition_a.clone(),
        partition_b.clone(),
    )
}

fn negativity_at_unit_hypothesis(
    state: &NamedState,
    r_a: f64,
    r_b: f64,
    partition_a: &AnglePartition,
    partition_b: &AnglePartition,
    sdp: &SdpSettings,
) -> Result<Option<f64>> {
    let stats = exact_statistics(state, r_a, r_b, partition_a, partition_b)?;
    let out = classify_hypothesis(&stats, 1.0, 1.0, &ConfidenceSettings::exact(), sdp)?;
    Ok(out.min_negativity)
}

/// Minimal negativity at hypothesis (1, 1) for exact statistics of `state`
/// measured with each sample pair `(r_A, r_B)`, sorted by `r_A·r_B`.
pub fn threshold_curve(
    samples: &[(f64, f64)],
    state: &NamedState,
    partition_a: &AnglePartition,
    partition_b: &AnglePartition,
    sdp: &SdpSettings,
) -> Result<Vec<CurvePoint>> {
    let mut points = samples
        .par_iter()
        .map(|&(ra, rb)| {
            Ok(CurvePoint {
                r_product: ra * rb,
                min_negativity: negativity_at_unit_hypothesis(state, ra, rb, partition_a, partition_b, sdp)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.r_product.total_cmp(&b.r_product));
    Ok(points)
}

/// Sample pairs `(√p, √p)` for each contrast product `p`.
pub fn symmetric_samples(products: &[f64]) -> Vec<(f64, f64)> {
    products.iter().map(|&p| (p.sqrt(), p.sqrt())).collect()
}

pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r_product", "min_negativity"])?;
    for p in curve {
        w.write_record([fmt_sig(p.r_product), p.min_negativity.map(fmt_sig).unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    /// Largest sampled product not certified entangled.
    pub below: f64,
    /// Smallest sampled product certified entangled.
    pub above: f64,
    pub estimate: f64,
    pub uncertainty: f64,
}

/// Locates the first crossing of [`DECISION_THRESHOLD`] on a sorted curve.
pub fn curve_crossing(curve: &[CurvePoint]) -> Option<ThresholdEstimate> {
    let above = curve
        .iter()
        .position(|p| p.min_negativity.is_some_and(|v| v > DECISION_THRESHOLD))?;
    if above == 0 {
        return None;
    }
    let lo = curve[above - 1].r_product;
    let hi = curve[above].r_product;
    Some(ThresholdEstimate {
        below: lo,
        above: hi,
        estimate: 0.5 * (lo + hi),
        uncertainty: hi - lo,
    })
}

/// Bisection on the contrast product between `lo` (not entangled) and `hi`
/// (entangled) with symmetric devices, down to width `tol`.
pub fn refine_threshold(
    state: &NamedState,
    partition_a: &AnglePartition,
    partition_b: &AnglePartition,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    sdp: &SdpSettings,
) -> Result<ThresholdEstimate> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter("bisection needs lo < hi and tol > 0".into()));
    }
    let entangled = |p: f64| -> Result<bool> {
        let v = negativity_at_unit_hypothesis(state, p.sqrt(), p.sqrt(), partition_a, partition_b, sdp)?;
        Ok(v.is_some_and(|v| v > DECISION_THRESHOLD))
    };
    if entangled(lo)? || !entangled(hi)? {
        return Err(Error::InvalidParameter(
            "bisection bracket does not straddle the threshold".into(),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdEstimate {
        below: lo,
        above: hi,
        estimate: 0.5 * (lo + hi),
        uncertainty: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction() {
        let g = HypothesisGrid::default();
        assert_eq!(g.len(), 100);
        assert!((g.r_values()[0] - 0.01).abs() < 1e-15);
        assert_eq!(*g.r_values().last().unwrap(), 1.0);
        let g = HypothesisGrid::with_step(0.3).unwrap();
        assert_eq!(g.r_values().len(), 4);
        assert_eq!(*g.r_values().last().unwrap(), 1.0);
        assert!(HypothesisGrid::new(vec![]).is_err());
        assert!(HypothesisGrid::new(vec![0.0, 0.5]).is_err());
        assert!(HypothesisGrid::new(vec![0.5, 0.4]).is_err());
        assert!(HypothesisGrid::with_step(0.0).is_err());
    }

    fn outcome(case: HypothesisCase) -> HypothesisOutcome {
        HypothesisOutcome {
            r_a_hyp: 1.0,
            r_b_hyp: 1.0,
            case,
            min_negativity: None,
        }
    }

    #[test]
    fn aggregation_rule() {
        use HypothesisCase::*;
        let check = werner_family_bound(0.5);
        let v = |cases: &[HypothesisCase]| {
            SemiDIVerdict::aggregate(cases.iter().map(|&c| outcome(c)).collect(), check.clone()).entangled
        };
        assert!(v(&[ReplicatedEntangled, NotReplicable]));
        assert!(!v(&[ReplicatedEntangled, ReplicatedSeparable]));
        assert!(!v(&[NotReplicable, NotReplicable]));
        let with_failure = SemiDIVerdict::aggregate(vec![outcome(ReplicatedEntangled), outcome(SolverFailure)], check);
        assert!(with_failure.entangled);
        assert!(!with_failure.complete);
        assert_eq!(with_failure.solver_failures, 1);
    }
}
