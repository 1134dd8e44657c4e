//! Problem description for the block SDP solver.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest tolerated asymmetry in any coefficient matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintSense {
    Equal,
    LessEqual,
}

/// One affine constraint `Σ_k ⟨A_k, X_k⟩ (= | ≤) rhs`.
///
/// Blocks that do not appear in `terms` have a zero coefficient.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub terms: Vec<(usize, DMatrix<f64>)>,
    pub rhs: f64,
    pub sense: ConstraintSense,
}

/// `min Σ_k ⟨C_k, X_k⟩` over symmetric PSD blocks `X_k` subject to affine
/// constraints.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Vec<DMatrix<f64>>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(blocks: &[usize]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidProblem("problem has no blocks".into()));
        }
        if let Some(&d) = blocks.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self {
            blocks: blocks.to_vec(),
            objective: blocks.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
            constraints: Vec::new(),
        })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &[DMatrix<f64>] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_equalities(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.sense == ConstraintSense::Equal)
            .count()
    }

    pub fn num_inequalities(&self) -> usize {
        self.constraints.len() - self.num_equalities()
    }

    pub fn set_objective(&mut self, block: usize, c: DMatrix<f64>) -> Result<()> {
        self.check_term(block, &c)?;
        self.objective[block] = c;
        Ok(())
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, DMatrix<f64>)>, rhs: f64) -> Result<usize> {
        self.add_constraint(terms, rhs, ConstraintSense::Equal)
    }

    /// Adds `Σ ⟨A_k, X_k⟩ ≤ rhs`.
    pub fn add_inequality(&mut self, terms: Vec<(usize, DMatrix<f64>)>, rhs: f64) -> Result<usize> {
        self.add_constraint(terms, rhs, ConstraintSense::LessEqual)
    }

    pub fn add_constraint(
        &mut self,
        terms: Vec<(usize, DMatrix<f64>)>,
        rhs: f64,
        sense: ConstraintSense,
    ) -> Result<usize> {
        if !rhs.is_finite() {
            return Err(Error::NonFinite);
        }
        for (k, (block, a)) in terms.iter().enumerate() {
            self.check_term(*block, a)?;
            if terms[..k].iter().any(|(b, _)| b == block) {
                return Err(Error::InvalidProblem(format!(
                    "block {block} appears twice in one constraint"
                )));
            }
        }
        self.constraints.push(Constraint { terms, rhs, sense });
        Ok(self.constraints.len() - 1)
    }

    fn check_term(&self, block: usize, a: &DMatrix<f64>) -> Result<()> {
        let d = *self
            .blocks
            .get(block)
            .ok_or_else(|| Error::InvalidProblem(format!("block index {block} out of range")))?;
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if a.nrows() != d { a.nrows() } else { a.ncols() },
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asym = (a - a.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidProblem(format!(
                "coefficient matrix for block {block} is not symmetric (asymmetry {asym:e})"
            )));
        }
        Ok(())
    }

    /// Writes the problem as whitespace-separated triplets.
    ///
    /// ```text
    /// blocks <d_1> ... <d_k>
    /// objective <block> <row> <col> <value>
    /// constraint <index> <eq|le> <rhs>
    /// coef <index> <block> <row> <col> <value>
    /// ```
    ///
    /// Only the upper triangle of each matrix is listed, indices are
    /// zero-based. Meant for debugging.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "blocks")?;
        for d in &self.blocks {
            write!(out, " {d}")?;
        }
        writeln!(out)?;
        for (k, c) in self.objective.iter().enumerate() {
            write_upper(&mut out, &format!("objective {k}"), c)?;
        }
        for (i, con) in self.constraints.iter().enumerate() {
            let sense = match con.sense {
                ConstraintSense::Equal => "eq",
                ConstraintSense::LessEqual => "le",
            };
            writeln!(out, "constraint {i} {sense} {:e}", con.rhs)?;
            for (k, a) in &con.terms {
                write_upper(&mut out, &format!("coef {i} {k}"), a)?;
            }
        }
        Ok(())
    }
}

fn write_upper<W: Write>(out: &mut W, prefix: &str, m: &DMatrix<f64>) -> Result<()> {
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            let v = m[(r, c)];
            if v != 0.0 {
                writeln!(out, "{prefix} {r} {c} {v:e}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_input() {
        assert!(SdpProblem::new(&[]).is_err());
        assert!(SdpProblem::new(&[2, 0]).is_err());
        let mut p = SdpProblem::new(&[2]).unwrap();
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(p.set_objective(0, asym).is_err());
        assert!(p.add_equality(vec![(1, DMatrix::identity(2, 2))], 1.0).is_err());
        assert!(p.add_equality(vec![(0, DMatrix::identity(3, 3))], 1.0).is_err());
        assert!(p.add_equality(vec![(0, DMatrix::identity(2, 2))], f64::NAN).is_err());
    }

    #[test]
    fn triplet_dump() {
        let mut p = SdpProblem::new(&[2]).unwrap();
        p.set_objective(0, DMatrix::identity(2, 2)).unwrap();
        p.add_inequality(vec![(0, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]))], 1.0)
            .unwrap();
        let mut buf = Vec::new();
        p.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "blocks 2\nobjective 0 0 0 1e0\nobjective 0 1 1 1e0\nconstraint 0 le 1e0\ncoef 0 0 0 1 5e-1\n"
        );
    }
}
