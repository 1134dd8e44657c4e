//! Homogeneous self-dual interior-point method with Nesterov-Todd scaling.
//!
//! The problem handed to [`solve`] is brought to the standard form
//! `min ⟨C,X⟩ s.t. 𝒜X = b, X ∈ K` where `K` is the product of the PSD
//! blocks and a nonnegative orthant holding one slack per inequality. The
//! embedding variables `(X, y, Z, τ, κ)` start at `(I, 0, I, 1, 1)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use super::presolve::{presolve, Presolve};
use super::problem::{ConstraintSense, SdpProblem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpSettings {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_gap: 1e-8,
            max_iter: 200,
        }
    }
}

const STEP_FRACTION: f64 = 0.98;
const MIN_STEP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    Unbounded,
    NumericalLimit,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SdpStatus::Optimal => "OPTIMAL",
            SdpStatus::PrimalInfeasible => "PRIMAL_INFEASIBLE",
            SdpStatus::Unbounded => "UNBOUNDED",
            SdpStatus::NumericalLimit => "NUMERICAL_LIMIT",
        })
    }
}

/// Relative residuals of the returned iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SdpResiduals {
    /// ‖𝒜X − b‖ / (1 + ‖b‖)
    pub primal: f64,
    /// ‖𝒜*y + Z − C‖ / (1 + ‖C‖)
    pub dual: f64,
    /// |⟨C,X⟩ − bᵀy| / (1 + |⟨C,X⟩|)
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// `y` with `bᵀy = 1`, `Z = −𝒜*y + e ⪰ 0` where `‖e‖ = residual`.
    Farkas { y: DVector<f64>, residual: f64 },
    /// `X ⪰ 0` with `⟨C,X⟩ = −1` and `‖𝒜X‖ = residual`.
    ImprovingRay { x: Vec<DMatrix<f64>>, residual: f64 },
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal blocks, in problem order.
    pub x: Vec<DMatrix<f64>>,
    /// One slack per inequality, in the order the inequalities were added.
    pub slacks: DVector<f64>,
    /// One multiplier per constraint; zero for rows removed by presolve.
    pub y: DVector<f64>,
    /// Dual slack blocks.
    pub z: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: SdpResiduals,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Σ_k ⟨X_k, Z_k⟩ over the PSD blocks plus the slack part.
    pub fn complementarity(&self) -> f64 {
        self.x.iter().zip(&self.z).map(|(x, z)| x.dot(z)).sum()
    }
}

/// Element of the cone `K`: PSD blocks followed by the orthant.
#[derive(Clone, Debug)]
struct Point {
    s: Vec<DMatrix<f64>>,
    l: DVector<f64>,
}

impl Point {
    fn identity(dims: &[usize], n_lp: usize) -> Self {
        Self {
            s: dims.iter().map(|&d| DMatrix::identity(d, d)).collect(),
            l: DVector::from_element(n_lp, 1.0),
        }
    }

    fn zeros(dims: &[usize], n_lp: usize) -> Self {
        Self {
            s: dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
            l: DVector::zeros(n_lp),
        }
    }

    fn dot(&self, o: &Point) -> f64 {
        self.s.iter().zip(&o.s).map(|(a, b)| a.dot(b)).sum::<f64>() + self.l.dot(&o.l)
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// self += a·o
    fn axpy(&mut self, a: f64, o: &Point) {
        for (x, y) in self.s.iter_mut().zip(&o.s) {
            *x += y * a;
        }
        self.l.axpy(a, &o.l, 1.0);
    }

    fn scaled(&self, a: f64) -> Point {
        Point {
            s: self.s.iter().map(|m| m * a).collect(),
            l: &self.l * a,
        }
    }

    fn symmetrize(&mut self) {
        for m in &mut self.s {
            let t = m.transpose();
            *m += t;
            *m *= 0.5;
        }
    }
}

struct Row {
    terms: Vec<(usize, DMatrix<f64>)>,
    slack: Option<usize>,
}

struct StdForm {
    dims: Vec<usize>,
    n_lp: usize,
    c: Point,
    rows: Vec<Row>,
    b: DVector<f64>,
    /// Per block, (row, term) pairs touching it.
    block_rows: Vec<Vec<(usize, usize)>>,
}

impl StdForm {
    fn build(problem: &SdpProblem, kept: &[usize]) -> Self {
        let dims = problem.blocks().to_vec();
        let cons = problem.constraints();
        let mut n_lp = 0;
        let mut rows = Vec::with_capacity(kept.len());
        let mut b = DVector::zeros(kept.len());
        for (r, &i) in kept.iter().enumerate() {
            let slack = match cons[i].sense {
                ConstraintSense::Equal => None,
                ConstraintSense::LessEqual => {
                    n_lp += 1;
                    Some(n_lp - 1)
                }
            };
            rows.push(Row {
                terms: cons[i].terms.clone(),
                slack,
            });
            b[r] = cons[i].rhs;
        }
        let mut block_rows = vec![Vec::new(); dims.len()];
        for (r, row) in rows.iter().enumerate() {
            for (t, (k, _)) in row.terms.iter().enumerate() {
                block_rows[*k].push((r, t));
            }
        }
        let c = Point {
            s: problem.objective().to_vec(),
            l: DVector::zeros(n_lp),
        };
        Self {
            dims,
            n_lp,
            c,
            rows,
            b,
            block_rows,
        }
    }

    fn nu(&self) -> f64 {
        (self.dims.iter().sum::<usize>() + self.n_lp) as f64
    }

    /// 𝒜X
    fn apply(&self, x: &Point) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| {
                let mut v: f64 = row.terms.iter().map(|(k, a)| a.dot(&x.s[*k])).sum();
                if let Some(s) = row.slack {
                    v += x.l[s];
                }
                v
            }),
        )
    }

    /// 𝒜*y
    fn adjoint(&self, y: &DVector<f64>) -> Point {
        let mut out = Point::zeros(&self.dims, self.n_lp);
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            for (k, a) in &row.terms {
                out.s[*k] += a * yi;
            }
            if let Some(s) = row.slack {
                out.l[s] += yi;
            }
        }
        out
    }
}

struct BlockScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    lambda: DVector<f64>,
}

/// Nesterov-Todd scaling `W = GGᵀ` with `G⁻¹XG⁻ᵀ = GᵀZG = Λ`.
struct Scaling {
    blocks: Vec<BlockScaling>,
    w: DVector<f64>,
    lambda: DVector<f64>,
}

impl Scaling {
    fn new(x: &Point, z: &Point) -> Option<Self> {
        let mut blocks = Vec::with_capacity(x.s.len());
        for (xb, zb) in x.s.iter().zip(&z.s) {
            let d = xb.nrows();
            let l = Cholesky::new(xb.clone())?.unpack();
            let r = Cholesky::new(zb.clone())?.unpack();
            let svd = (r.transpose() * &l).svd(false, true);
            let v_t = svd.v_t?;
            let sig = svd.singular_values;
            if sig.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
                return None;
            }
            let l_inv = l.solve_lower_triangular(&DMatrix::identity(d, d))?;
            let mut g = &l * v_t.transpose();
            let mut g_inv = &v_t * l_inv;
            for j in 0..d {
                let s = sig[j].sqrt();
                g.column_mut(j).scale_mut(1.0 / s);
                g_inv.row_mut(j).scale_mut(s);
            }
            blocks.push(BlockScaling { g, g_inv, lambda: sig });
        }
        if x.l.iter().chain(z.l.iter()).any(|&v| !(v > 0.0)) {
            return None;
        }
        let w = x.l.zip_map(&z.l, |a, b| (a / b).sqrt());
        let lambda = x.l.zip_map(&z.l, |a, b| (a * b).sqrt());
        Some(Self { blocks, w, lambda })
    }

    /// G⁻¹ ΔX G⁻ᵀ
    fn scale_x(&self, dx: &Point) -> Point {
        Point {
            s: self
                .blocks
                .iter()
                .zip(&dx.s)
                .map(|(b, m)| &b.g_inv * m * b.g_inv.transpose())
                .collect(),
            l: dx.l.component_div(&self.w),
        }
    }

    /// Gᵀ ΔZ G
    fn scale_z(&self, dz: &Point) -> Point {
        Point {
            s: self
                .blocks
                .iter()
                .zip(&dz.s)
                .map(|(b, m)| b.g.transpose() * m * &b.g)
                .collect(),
            l: dz.l.component_mul(&self.w),
        }
    }

    /// W U W
    fn w_apply(&self, u: &Point) -> Point {
        Point {
            s: self
                .blocks
                .iter()
                .zip(&u.s)
                .map(|(b, m)| {
                    let inner = b.g.transpose() * m * &b.g;
                    &b.g * inner * b.g.transpose()
                })
                .collect(),
            l: u.l.component_mul(&self.w).component_mul(&self.w),
        }
    }

    /// Maps a scaled complementarity target `R` to `R_c` with
    /// `ΔX + WΔZW = R_c`.
    fn complementarity_rhs(&self, r: &Point) -> Point {
        Point {
            s: self
                .blocks
                .iter()
                .zip(&r.s)
                .map(|(b, m)| {
                    let d = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                        2.0 * m[(i, j)] / (b.lambda[i] + b.lambda[j])
                    });
                    &b.g * d * b.g.transpose()
                })
                .collect(),
            l: DVector::from_iterator(r.l.len(), (0..r.l.len()).map(|i| self.w[i] * r.l[i] / self.lambda[i])),
        }
    }

    /// σμI − Λ² − sym(D_x D_z), with the second-order term omitted when
    /// `affine` is absent.
    fn target(&self, sigma_mu: f64, affine: Option<(&Point, &Point)>) -> Point {
        let s = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let d = b.lambda.len();
                let mut m = DMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        sigma_mu - b.lambda[i] * b.lambda[i]
                    } else {
                        0.0
                    }
                });
                if let Some((dx, dz)) = affine {
                    let p = &dx.s[k] * &dz.s[k];
                    m -= (&p + p.transpose()) * 0.5;
                }
                m
            })
            .collect();
        let mut l = self.lambda.map(|v| sigma_mu - v * v);
        if let Some((dx, dz)) = affine {
            l -= dx.l.component_mul(&dz.l);
        }
        Point { s, l }
    }

    /// Largest α with Λ + αD ⪰ 0 for every block.
    fn max_step(&self, d: &Point) -> f64 {
        let mut alpha = f64::INFINITY;
        for (b, m) in self.blocks.iter().zip(&d.s) {
            let n = b.lambda.len();
            let s = DMatrix::from_fn(n, n, |i, j| m[(i, j)] / (b.lambda[i] * b.lambda[j]).sqrt());
            let s = (&s + s.transpose()) * 0.5;
            let min = s.symmetric_eigenvalues().min();
            if min < 0.0 {
                alpha = alpha.min(-1.0 / min);
            }
        }
        for (i, &v) in d.l.iter().enumerate() {
            if v < 0.0 {
                alpha = alpha.min(-self.lambda[i] / v);
            }
        }
        alpha
    }
}

/// Cholesky factor of the Schur complement; empty when there are no rows.
struct Schur {
    m: DMatrix<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl Schur {
    fn new(std: &StdForm, sc: &Scaling) -> Option<Self> {
        let n = std.rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, list) in std.block_rows.iter().enumerate() {
            let g = &sc.blocks[k].g;
            let scaled: Vec<DMatrix<f64>> = list
                .iter()
                .map(|&(r, t)| g.transpose() * &std.rows[r].terms[t].1 * g)
                .collect();
            for (p, &(ri, _)) in list.iter().enumerate() {
                for (q, &(rj, _)) in list.iter().enumerate().skip(p) {
                    let v = scaled[p].dot(&scaled[q]);
                    m[(ri, rj)] += v;
                    if ri != rj {
                        m[(rj, ri)] += v;
                    }
                }
            }
        }
        for (r, row) in std.rows.iter().enumerate() {
            if let Some(s) = row.slack {
                m[(r, r)] += sc.w[s] * sc.w[s];
            }
        }
        if n == 0 {
            return Some(Self { m, chol: None });
        }
        let chol = Cholesky::new(m.clone()).or_else(|| {
            let shift = 1e-14 * m.diagonal().amax().max(1.0);
            let mut reg = m.clone();
            for i in 0..n {
                reg[(i, i)] += shift;
            }
            Cholesky::new(reg)
        })?;
        Some(Self { m, chol: Some(chol) })
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            None => rhs.clone(),
            Some(c) => {
                let mut u = c.solve(rhs);
                let res = rhs - &self.m * &u;
                u += c.solve(&res);
                u
            }
        }
    }
}

struct Direction {
    x: Point,
    y: DVector<f64>,
    z: Point,
    tau: f64,
    kappa: f64,
}

struct Residuals {
    p: DVector<f64>,
    d: Point,
    g: f64,
}

struct Newton<'a> {
    std: &'a StdForm,
    sc: &'a Scaling,
    schur: &'a Schur,
    v: DVector<f64>,
    xv: Point,
    den_v: f64,
}

impl<'a> Newton<'a> {
    fn new(std: &'a StdForm, sc: &'a Scaling, schur: &'a Schur, tau: f64, kappa: f64) -> Self {
        let wcw = sc.w_apply(&std.c);
        let v = schur.solve(&(&std.b + std.apply(&wcw)));
        let mut xv = sc.w_apply(&std.adjoint(&v));
        xv.axpy(-1.0, &wcw);
        let den_v = std.c.dot(&xv) - std.b.dot(&v) - kappa / tau;
        Self {
            std,
            sc,
            schur,
            v,
            xv,
            den_v,
        }
    }

    fn direction(&self, eta: f64, res: &Residuals, rc: &Point, r_tk: f64, tau: f64, kappa: f64) -> Direction {
        let std = self.std;
        let wrw = self.sc.w_apply(&res.d.scaled(eta));
        let rhs = &res.p * eta - std.apply(rc) + std.apply(&wrw);
        let u = self.schur.solve(&rhs);
        let mut xu = rc.clone();
        xu.axpy(-1.0, &wrw);
        xu.axpy(1.0, &self.sc.w_apply(&std.adjoint(&u)));
        let num = eta * res.g + std.b.dot(&u) - std.c.dot(&xu) - r_tk / tau;
        let dtau = num / self.den_v;
        let dy = &u + &self.v * dtau;
        let mut dx = xu;
        dx.axpy(dtau, &self.xv);
        let mut dz = res.d.scaled(eta);
        dz.axpy(dtau, &std.c);
        dz.axpy(-1.0, &std.adjoint(&dy));
        let dkappa = (r_tk - kappa * dtau) / tau;
        Direction {
            x: dx,
            y: dy,
            z: dz,
            tau: dtau,
            kappa: dkappa,
        }
    }
}

fn max_ratio(v: f64, dv: f64) -> f64 {
    if dv < 0.0 {
        -v / dv
    } else {
        f64::INFINITY
    }
}

/// Solves `problem`. Never fails: numerical trouble is reported through
/// [`SdpStatus::NumericalLimit`].
pub fn solve(problem: &SdpProblem, settings: &SdpSettings) -> SdpSolution {
    let ncons = problem.constraints().len();
    let n_ineq = problem.num_inequalities();
    let kept = match presolve(problem, settings.tol_feas) {
        Presolve::Reduced { kept } => kept,
        Presolve::Infeasible { y, residual } => {
            let dims = problem.blocks();
            log::debug!("presolve found inconsistent equalities");
            return SdpSolution {
                status: SdpStatus::PrimalInfeasible,
                x: dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
                slacks: DVector::zeros(n_ineq),
                y: y.clone(),
                z: dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                residuals: SdpResiduals::default(),
                iterations: 0,
                certificate: Some(Certificate::Farkas { y, residual }),
            };
        }
    };
    let std = StdForm::build(problem, &kept);
    let mut out = run(&std, settings);

    // map back to the original numbering
    let mut y = DVector::zeros(ncons);
    for (r, &i) in kept.iter().enumerate() {
        y[i] = out.y[r];
    }
    if let Some(Certificate::Farkas { y: ref mut cy, .. }) = out.certificate {
        let mut full = DVector::zeros(ncons);
        for (r, &i) in kept.iter().enumerate() {
            full[i] = cy[r];
        }
        *cy = full;
    }
    let mut slacks = DVector::zeros(n_ineq);
    let mut lp_of = 0;
    let mut s_idx = 0;
    for (i, con) in problem.constraints().iter().enumerate() {
        if con.sense == ConstraintSense::LessEqual {
            if kept.contains(&i) {
                slacks[s_idx] = out.slacks[lp_of];
                lp_of += 1;
            }
            s_idx += 1;
        }
    }
    out.y = y;
    out.slacks = slacks;
    out
}

fn run(std: &StdForm, settings: &SdpSettings) -> SdpSolution {
    let dims = &std.dims;
    let n_lp = std.n_lp;
    let mut x = Point::identity(dims, n_lp);
    let mut z = Point::identity(dims, n_lp);
    let mut y = DVector::zeros(std.rows.len());
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let nu = std.nu();
    let b_norm = std.b.norm();
    let c_norm = std.c.norm();

    let finish = |status: SdpStatus,
                  x: &Point,
                  y: &DVector<f64>,
                  z: &Point,
                  tau: f64,
                  residuals: SdpResiduals,
                  iterations: usize,
                  certificate: Option<Certificate>| {
        let xs = x.scaled(1.0 / tau);
        let zs = z.scaled(1.0 / tau);
        let ys = y / tau;
        SdpSolution {
            status,
            primal_objective: std.c.dot(&xs),
            dual_objective: std.b.dot(&ys),
            x: xs.s,
            slacks: xs.l,
            y: ys,
            z: zs.s,
            residuals,
            iterations,
            certificate,
        }
    };

    let mut iter = 0;
    loop {
        let ax = std.apply(&x);
        let aty = std.adjoint(&y);
        let mut rd = std.c.scaled(tau);
        rd.axpy(-1.0, &aty);
        rd.axpy(-1.0, &z);
        let res = Residuals {
            p: &std.b * tau - &ax,
            g: std.b.dot(&y) - std.c.dot(&x) - kappa,
            d: rd,
        };
        let mu = (x.dot(&z) + tau * kappa) / (nu + 1.0);

        let pobj = std.c.dot(&x) / tau;
        let dobj = std.b.dot(&y) / tau;
        let residuals = SdpResiduals {
            primal: res.p.norm() / (tau * (1.0 + b_norm)),
            dual: res.d.norm() / (tau * (1.0 + c_norm)),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        };
        let compl = x.dot(&z) / (tau * tau);
        log::trace!(
            "iter {iter}: pobj {pobj:e} dobj {dobj:e} pres {:e} dres {:e} tau {tau:e} kappa {kappa:e} mu {mu:e}",
            residuals.primal,
            residuals.dual
        );
        if residuals.primal <= settings.tol_feas
            && residuals.dual <= settings.tol_feas
            && residuals.gap <= settings.tol_gap
            && compl <= settings.tol_gap * (1.0 + pobj.abs())
        {
            return finish(SdpStatus::Optimal, &x, &y, &z, tau, residuals, iter, None);
        }
        let bty = std.b.dot(&y);
        if bty > 0.0 {
            let mut e = aty.clone();
            e.axpy(1.0, &z);
            let r = e.norm() / bty;
            if r <= settings.tol_feas {
                let cert = Certificate::Farkas {
                    y: &y / bty,
                    residual: r,
                };
                return finish(
                    SdpStatus::PrimalInfeasible,
                    &x,
                    &y,
                    &z,
                    tau,
                    residuals,
                    iter,
                    Some(cert),
                );
            }
        }
        let ctx = std.c.dot(&x);
        if ctx < 0.0 {
            let r = ax.norm() / -ctx;
            if r <= settings.tol_feas {
                let ray = x.scaled(-1.0 / ctx);
                let cert = Certificate::ImprovingRay { x: ray.s, residual: r };
                return finish(SdpStatus::Unbounded, &x, &y, &z, tau, residuals, iter, Some(cert));
            }
        }
        if iter >= settings.max_iter {
            log::debug!("iteration limit reached");
            return finish(SdpStatus::NumericalLimit, &x, &y, &z, tau, residuals, iter, None);
        }

        let Some(sc) = Scaling::new(&x, &z) else {
            log::debug!("scaling failed at iteration {iter}");
            return finish(SdpStatus::NumericalLimit, &x, &y, &z, tau, residuals, iter, None);
        };
        let Some(schur) = Schur::new(std, &sc) else {
            log::debug!("Schur complement not positive definite at iteration {iter}");
            return finish(SdpStatus::NumericalLimit, &x, &y, &z, tau, residuals, iter, None);
        };
        let newton = Newton::new(std, &sc, &schur, tau, kappa);

        // predictor
        let rc_aff = x.scaled(-1.0);
        let aff = newton.direction(1.0, &res, &rc_aff, -tau * kappa, tau, kappa);
        let dxa = sc.scale_x(&aff.x);
        let dza = sc.scale_z(&aff.z);
        let alpha_aff = sc
            .max_step(&dxa)
            .min(sc.max_step(&dza))
            .min(max_ratio(tau, aff.tau))
            .min(max_ratio(kappa, aff.kappa))
            .min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // corrector
        let target = sc.target(sigma * mu, Some((&dxa, &dza)));
        let rc = sc.complementarity_rhs(&target);
        let r_tk = sigma * mu - tau * kappa - aff.tau * aff.kappa;
        let dir = newton.direction(1.0 - sigma, &res, &rc, r_tk, tau, kappa);
        let alpha = (STEP_FRACTION
            * sc.max_step(&sc.scale_x(&dir.x))
                .min(sc.max_step(&sc.scale_z(&dir.z)))
                .min(max_ratio(tau, dir.tau))
                .min(max_ratio(kappa, dir.kappa)))
        .min(1.0);
        if !(alpha > MIN_STEP) {
            log::debug!("step length collapsed at iteration {iter}");
            return finish(SdpStatus::NumericalLimit, &x, &y, &z, tau, residuals, iter, None);
        }
        x.axpy(alpha, &dir.x);
        z.axpy(alpha, &dir.z);
        x.symmetrize();
        z.symmetrize();
        y.axpy(alpha, &dir.y, 1.0);
        tau += alpha * dir.tau;
        kappa += alpha * dir.kappa;
        iter += 1;
    }
}
