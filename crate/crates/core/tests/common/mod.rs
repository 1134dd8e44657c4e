#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rotcov::qubit::ComplexMatrix;

pub fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |i, j| m.get(i, j))
}

/// Eigenvalues through nalgebra's Hermitian eigensolver, ascending.
pub fn oracle_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn oracle_positive_part(m: &ComplexMatrix) -> f64 {
    oracle_eigenvalues(m).into_iter().filter(|&l| l > 0.0).sum()
}

pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if i == j { 0.0 } else { rng.sample(StandardNormal) };
            e[i * dim + j] = Complex64::new(re, im);
            e[j * dim + i] = Complex64::new(re, -im);
        }
    }
    ComplexMatrix::from_rows(dim, e).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Composite Gauss-Legendre (5 points) over `[a, b]` with `n` panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * 0.5 * h
}

use rotcov::qubit::{identity2, partial_transpose, pauli, tensor, Axis, DensityMatrix};

/// (𝟙 + Σ_k t_k σ_k⊗σ_k)/4; `None` when not a state.
pub fn bell_diagonal(t: [f64; 3]) -> Option<DensityMatrix> {
    let mut m = tensor(&identity2(), &identity2()).unwrap();
    for (k, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
        let p = tensor(&pauli(axis), &pauli(axis)).unwrap();
        m = &m + &p.scale_real(t[k]);
    }
    let m = m.scale_real(0.25);
    if oracle_eigenvalues(&m)[0] < -1e-13 {
        return None;
    }
    DensityMatrix::new(m).ok()
}

/// Negativity from nalgebra's eigensolver.
pub fn oracle_negativity(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose(rho.matrix()).unwrap();
    -oracle_eigenvalues(&pt).into_iter().filter(|&l| l < 0.0).sum::<f64>()
}

/// Minimal negativity over Bell-diagonal states with t = (−c, −c, t3),
/// found numerically over the admissible range of t3.
pub fn bell_diagonal_min_negativity(c: f64) -> f64 {
    let feasible = |t3: f64| bell_diagonal([-c, -c, t3]).is_some();
    assert!(feasible(-c), "Werner point must be admissible");
    // admissible t3 form an interval containing −c; find its ends
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if feasible(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if feasible(-1.0) { -1.0 } else { edge(-c, -1.0 - 1e-9) };
    let hi = if feasible(1.0) { 1.0 } else { edge(-c, 1.0 + 1e-9) };
    let n = |t3: f64| oracle_negativity(&bell_diagonal([-c, -c, t3]).unwrap());
    // negativity is convex along the segment
    let (mut a, mut b) = (lo, hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if n(x1) <= n(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    [lo, hi, 0.5 * (a + b)].into_iter().map(n).fold(f64::INFINITY, f64::min)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol.max(1e-17) {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// ∫ M_φ dφ over `[lo, hi)` by adaptive quadrature of each Pauli
/// coefficient of `(1/π)[𝟙 + r(cos2φ σx − sin2φ σy)]`.
pub fn quadrature_bin_coefficients(r: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let pi = std::f64::consts::PI;
    let a = adaptive_simpson(&|_| 1.0 / pi, lo, hi, 1e-14);
    let x = adaptive_simpson(&|p: f64| r * (2.0 * p).cos() / pi, lo, hi, 1e-14);
    let y = adaptive_simpson(&|p: f64| -r * (2.0 * p).sin() / pi, lo, hi, 1e-14);
    (a, x, y)
}
