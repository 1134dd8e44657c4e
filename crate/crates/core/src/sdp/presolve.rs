//! Removal of linearly dependent equality rows.

use nalgebra::DVector;

use super::problem::{ConstraintSense, SdpProblem};

/// Residual norm (relative to the normalized row) below which a row counts
/// as dependent.
const RANK_TOL: f64 = 1e-10;
/// Right-hand-side mismatch below which a dependent row is dropped.
const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub(crate) enum Presolve {
    /// Indices of the constraints handed to the interior-point method.
    Reduced { kept: Vec<usize> },
    /// Farkas ray in the original constraint numbering: `bᵀy = 1` and
    /// `‖𝒜*y‖ = residual`.
    Infeasible { y: DVector<f64>, residual: f64 },
}

/// Pivoted modified Gram-Schmidt on the equality rows.
pub(crate) fn presolve(problem: &SdpProblem, tol_feas: f64) -> Presolve {
    let cons = problem.constraints();
    let eq: Vec<usize> = (0..cons.len())
        .filter(|&i| cons[i].sense == ConstraintSense::Equal)
        .collect();
    let offsets: Vec<usize> = problem
        .blocks()
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d * d;
            Some(o)
        })
        .collect();
    let len: usize = problem.blocks().iter().map(|d| d * d).sum();

    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(eq.len());
    let mut rhs = Vec::with_capacity(eq.len());
    let mut norms = Vec::with_capacity(eq.len());
    for &i in &eq {
        let mut v = DVector::zeros(len);
        for (k, a) in &cons[i].terms {
            v.rows_mut(offsets[*k], a.len()).copy_from_slice(a.as_slice());
        }
        let n = v.norm();
        if n > 0.0 {
            v /= n;
        }
        rows.push(v);
        rhs.push(if n > 0.0 { cons[i].rhs / n } else { cons[i].rhs });
        norms.push(n);
    }

    let m = rows.len();
    // residual_i = Σ_l coef_i[l] row_l
    let mut coef: Vec<DVector<f64>> = (0..m)
        .map(|i| {
            let mut c = DVector::zeros(m);
            c[i] = 1.0;
            c
        })
        .collect();
    let mut resid = rows;
    let mut active: Vec<bool> = vec![true; m];
    loop {
        let mut best = None;
        let mut best_norm = RANK_TOL;
        for i in 0..m {
            if active[i] {
                let n = resid[i].norm();
                if n > best_norm {
                    best_norm = n;
                    best = Some(i);
                }
            }
        }
        let Some(p) = best else { break };
        active[p] = false;
        let e = &resid[p] / best_norm;
        let ec = &coef[p] / best_norm;
        for i in 0..m {
            if active[i] {
                let proj = resid[i].dot(&e);
                resid[i].axpy(-proj, &e, 1.0);
                coef[i].axpy(-proj, &ec, 1.0);
            }
        }
    }

    let mut dropped = vec![false; cons.len()];
    for i in (0..m).filter(|&i| active[i]) {
        let delta: f64 = coef[i].iter().zip(&rhs).map(|(c, b)| c * b).sum();
        let r = resid[i].norm();
        if delta.abs() <= CONSISTENCY_TOL {
            dropped[eq[i]] = true;
            continue;
        }
        if r / delta.abs() <= tol_feas {
            let mut y = DVector::zeros(cons.len());
            for l in 0..m {
                if coef[i][l] != 0.0 && norms[l] > 0.0 {
                    y[eq[l]] = coef[i][l] / (delta * norms[l]);
                } else if coef[i][l] != 0.0 {
                    y[eq[l]] = coef[i][l] / delta;
                }
            }
            return Presolve::Infeasible {
                y,
                residual: r / delta.abs(),
            };
        }
        // Ambiguous: leave the row for the interior-point method.
    }
    Presolve::Reduced {
        kept: (0..cons.len()).filter(|&i| !dropped[i]).collect(),
    }
}
