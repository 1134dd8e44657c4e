//! Dense complex algebra for one- and two-qubit operators.
//!
//! Two-qubit operators use the ordering A⊗B with Alice's qubit on the slow
//! (leftmost) index: basis `|ab⟩` sits at row `2a + b`. Partial transposes,
//! tensor products and the POVM products in [`crate::states`] all rely on
//! this ordering.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

/// Square complex matrix of dimension 2 or 4, stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

impl ComplexMatrix {
    pub(crate) fn from_raw(dim: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_raw(dim, vec![ZERO; dim * dim]))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_raw(dim, entries))
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_rows(dim, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.data[j * n + i];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|z| z * factor).collect())
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|z| z * factor).collect())
    }

    /// Largest entrywise |A − A*|.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    /// (A + A*)/2.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_raw(
            self.dim,
            self.data.iter().zip(&adj.data).map(|(a, b)| (a + b) * 0.5).collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Re tr(A B), the Hilbert–Schmidt pairing for Hermitian operands.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc.re
    }

    fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Self::from_raw(n, out)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix::from_raw(self.dim, self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix::from_raw(self.dim, self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::from_raw(2, vec![ONE, ZERO, ZERO, ONE])
}

pub fn identity4() -> ComplexMatrix {
    ComplexMatrix::identity(4).expect("dimension 4 is supported")
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    let data = match axis {
        Axis::X => vec![ZERO, ONE, ONE, ZERO],
        Axis::Y => vec![ZERO, -I, I, ZERO],
        Axis::Z => vec![ONE, ZERO, ZERO, -ONE],
    };
    ComplexMatrix::from_raw(2, data)
}

/// `a·𝟙 + x·σx + y·σy + z·σz`.
pub fn bloch_operator(a: f64, x: f64, y: f64, z: f64) -> ComplexMatrix {
    ComplexMatrix::from_raw(
        2,
        vec![
            C64::new(a + z, 0.0),
            C64::new(x, -y),
            C64::new(x, y),
            C64::new(a - z, 0.0),
        ],
    )
}

/// U_φ = exp(−iφσz).
///
/// φ is reduced modulo 2π, the exact period of U_φ. The conjugation action
/// U_φ* A U_φ has period π.
pub fn rotation(phi: f64) -> ComplexMatrix {
    let phi = phi.rem_euclid(2.0 * PI);
    let (s, c) = phi.sin_cos();
    ComplexMatrix::from_raw(2, vec![C64::new(c, -s), ZERO, ZERO, C64::new(c, s)])
}

/// Kronecker product `a ⊗ b` of two single-qubit operators.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim,
            });
        }
    }
    let mut out = vec![ZERO; 16];
    for ia in 0..2 {
        for ja in 0..2 {
            let x = a.get(ia, ja);
            for ib in 0..2 {
                for jb in 0..2 {
                    out[(2 * ia + ib) * 4 + 2 * ja + jb] = x * b.get(ib, jb);
                }
            }
        }
    }
    Ok(ComplexMatrix::from_raw(4, out))
}

/// Transpose on Alice's (first) tensor factor.
pub fn partial_transpose(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim,
        });
    }
    let mut out = rho.clone();
    for ia in 0..2 {
        for ja in 0..2 {
            for ib in 0..2 {
                for jb in 0..2 {
                    out.set(2 * ia + ib, 2 * ja + jb, rho.get(2 * ja + ib, 2 * ia + jb));
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, ordered like `values`.
    pub vectors: ComplexMatrix,
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// the classical real Jacobi rotation. Matrices are at most 4×4, so the
/// method converges in a handful of sweeps to full precision.
pub fn eigen_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let asym = a.max_asymmetry();
    if asym > HERMITIAN_REJECT_TOL * (1.0 + frobenius(a)) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let n = a.dim;
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n)?;
    let scale = frobenius(&m).max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).norm_sqr())
            .sum();
        if off.sqrt() <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m.get(p, q);
                let gabs = g.norm();
                if gabs <= 1e-300 {
                    continue;
                }
                // Phase step: D = diag(.., 1, .., e^{-iα}, ..) makes m_pq real.
                let phase = g / gabs;
                for r in 0..n {
                    let x = m.get(r, q) * phase.conj();
                    m.set(r, q, x);
                }
                for c in 0..n {
                    let x = m.get(q, c) * phase;
                    m.set(q, c, x);
                }
                for r in 0..n {
                    let x = v.get(r, q) * phase.conj();
                    v.set(r, q, x);
                }
                // Real Jacobi rotation on the now-real symmetric pivot block.
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let theta = (aqq - app) / (2.0 * gabs);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let mrp = m.get(r, p);
                    let mrq = m.get(r, q);
                    m.set(r, p, mrp * c - mrq * s);
                    m.set(r, q, mrp * s + mrq * c);
                }
                for col in 0..n {
                    let mpc = m.get(p, col);
                    let mqc = m.get(q, col);
                    m.set(p, col, mpc * c - mqc * s);
                    m.set(q, col, mpc * s + mqc * c);
                }
                m.set(p, q, ZERO);
                m.set(q, p, ZERO);
                for r in 0..n {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, vrp * c - vrq * s);
                    v.set(r, q, vrp * s + vrq * c);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).re.total_cmp(&m.get(j, j).re));
    let values = order.iter().map(|&i| m.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n)?;
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, dst, v.get(r, src));
        }
    }
    Ok(HermitianEigen { values, vectors })
}

pub fn eigenvalues_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigen_hermitian(a)?.values)
}

fn frobenius(a: &ComplexMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖A‖₁ = Σ|λᵢ| for Hermitian A.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(a)?.iter().map(|l| l.abs()).sum())
}

/// Negativity (‖X^Γ‖₁ − tr X)/2 of a Hermitian two-qubit operator.
pub fn operator_negativity(x: &ComplexMatrix) -> Result<f64> {
    let pt = partial_transpose(x)?;
    let norm = trace_norm(&pt)?;
    Ok(((norm - x.trace().re) / 2.0).max(0.0))
}

/// Negativity (‖ρ^Γ‖₁ − 1)/2 of a two-qubit state.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    operator_negativity(rho.matrix())
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates and symmetrizes `m`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let asym = m.max_asymmetry();
        if asym > HERMITIAN_REJECT_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let m = m.hermitian_part();
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let min = eigenvalues_hermitian(&m)?[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { matrix: m })
    }

    /// Projects an approximately valid state onto the state space: the
    /// Hermitian part is taken, negative eigenvalues are clipped and the
    /// trace renormalized.
    pub fn from_approximate(m: &ComplexMatrix) -> Result<Self> {
        let h = m.hermitian_part();
        let eig = eigen_hermitian(&h)?;
        let clipped: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.values[0],
            });
        }
        let n = h.dim;
        let mut out = ComplexMatrix::zeros(n)?;
        for (k, &l) in clipped.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let w = l / total;
            for i in 0..n {
                for j in 0..n {
                    let z = out.get(i, j) + eig.vectors.get(i, k) * eig.vectors.get(j, k).conj() * w;
                    out.set(i, j, z);
                }
            }
        }
        Self::new(out.hermitian_part())
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let m = ComplexMatrix::identity(dim)?.scale_real(1.0 / dim as f64);
        Ok(Self { matrix: m })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let dim = psi.len();
        check_dim(dim)?;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let mut m = ComplexMatrix::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, psi[i] * psi[j].conj() / norm);
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// tr(ρ O) for Hermitian O.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        self.matrix.trace_product(op)
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("mixing weight {w} outside [0,1]")));
        }
        Self::new(&self.matrix.scale_real(w) + &other.matrix.scale_real(1.0 - w))
    }
}
