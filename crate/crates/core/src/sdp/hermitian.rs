//! Complex Hermitian blocks expressed through real symmetric ones.
//!
//! A Hermitian `H = A + iB` is represented by the real block
//! `[[A, −B], [B, A]]`. For such a block `Y`, `tr(EH) = ½·tr(emb(E)·Y)`.

use nalgebra::DMatrix;

use super::ipm::{solve, SdpSettings, SdpStatus};
use super::problem::SdpProblem;
use crate::error::{Error, Result};
use crate::qubit::{ComplexMatrix, C64};

/// Real embedding `[[Re H, −Im H], [Im H, Re H]]`.
pub fn embed(h: &ComplexMatrix) -> DMatrix<f64> {
    let d = h.dim();
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let v = h.get(i % d, j % d);
        match (i < d, j < d) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Coefficient matrix whose inner product with an embedded block `Y`
/// equals `tr(E H)`.
pub fn functional(e: &ComplexMatrix) -> DMatrix<f64> {
    let mut m = embed(e) * 0.5;
    // exact symmetry keeps the problem validator happy
    let t = m.transpose();
    m += t;
    m * 0.5
}

/// Hermitian operator represented by a real `2d × 2d` block. Blocks that
/// are not of embedded form are averaged onto that form first.
pub fn extract(y: &DMatrix<f64>) -> Result<ComplexMatrix> {
    if y.nrows() != y.ncols() || y.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(y.nrows()));
    }
    let d = y.nrows() / 2;
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let re = 0.5 * (y[(i, j)] + y[(i + d, j + d)]);
            let im = 0.5 * (y[(i + d, j)] - y[(i, j + d)]);
            entries.push(C64::new(re, im));
        }
    }
    ComplexMatrix::from_rows(d, entries).map(|m| m.hermitian_part())
}

/// Orthonormal basis of the real space of `d × d` Hermitian matrices.
pub fn hermitian_basis(d: usize) -> Result<Vec<ComplexMatrix>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in k..d {
            let mut e = vec![C64::new(0.0, 0.0); d * d];
            if k == l {
                e[k * d + k] = C64::new(1.0, 0.0);
                out.push(ComplexMatrix::from_rows(d, e)?);
                continue;
            }
            e[k * d + l] = C64::new(h, 0.0);
            e[l * d + k] = C64::new(h, 0.0);
            out.push(ComplexMatrix::from_rows(d, e.clone())?);
            e[k * d + l] = C64::new(0.0, -h);
            e[l * d + k] = C64::new(0.0, h);
            out.push(ComplexMatrix::from_rows(d, e)?);
        }
    }
    Ok(out)
}

/// `inf { tr T : T ⪰ 0, T ⪰ A }`, computed with the SDP solver.
pub fn positive_part_trace(a: &ComplexMatrix, settings: &SdpSettings) -> Result<f64> {
    let asym = a.max_asymmetry();
    if asym > crate::qubit::HERMITIAN_REJECT_TOL {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let a = a.hermitian_part();
    let d = a.dim();
    let id = ComplexMatrix::identity(d)?;
    // blocks: T and S = T − A
    let mut p = SdpProblem::new(&[2 * d, 2 * d])?;
    p.set_objective(0, functional(&id))?;
    for e in hermitian_basis(d)? {
        let f = functional(&e);
        p.add_equality(vec![(0, f.clone()), (1, -f)], e.trace_product(&a))?;
    }
    let sol = solve(&p, settings);
    match sol.status {
        SdpStatus::Optimal => Ok(sol.primal_objective),
        other => Err(Error::Solver(format!("positive-part SDP ended with {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{pauli, Axis};

    #[test]
    fn embedding_preserves_trace_products() {
        let a = &pauli(Axis::Y) + &pauli(Axis::X).scale_real(0.3);
        let b = &pauli(Axis::Y).scale_real(2.0) + &pauli(Axis::Z);
        let lhs = a.trace_product(&b);
        let rhs = functional(&a).dot(&embed(&b));
        assert!((lhs - rhs).abs() < 1e-14);
        let back = extract(&embed(&a)).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal() {
        let basis = hermitian_basis(4).unwrap();
        assert_eq!(basis.len(), 16);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.trace_product(b) - expected).abs() < 1e-15);
            }
        }
    }
}
