//! Dense helpers on top of faer: norms, eigensolvers and functional calculus.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn cis(phi: f64) -> c64 {
    c64::new(phi.cos(), phi.sin())
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn diag(values: &[c64]) -> CMat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
}

pub fn real_diag(values: &[f64]) -> CMat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(values[i], 0.0) } else { ZERO })
}

pub fn scale(m: &CMat, z: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * z)
}

/// `A S - S A`.
pub fn commutator(a: &CMat, s: &CMat) -> CMat {
    a * s - s * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm_l2()
}

/// Induced 1-norm (max column sum), used for cheap condition estimates.
pub fn norm_one(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `(M + M*) / 2` and the asymmetry `‖M − M*‖_max` that was removed.
pub fn hermitize(m: &CMat) -> (CMat, f64) {
    let n = m.nrows();
    let mut asym = 0.0f64;
    let h = Mat::from_fn(n, n, |i, j| {
        let a = m[(i, j)];
        let b = m[(j, i)].conj();
        asym = asym.max((a - b).norm());
        (a + b) * 0.5
    });
    (h, asym)
}

pub fn submatrix(m: &CMat, lo: usize, hi: usize) -> CMat {
    Mat::from_fn(hi - lo, hi - lo, |i, j| m[(lo + i, lo + j)])
}

/// Defect `‖U*U − I‖_max`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut d = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let e = if i == j { g[(i, j)] - ONE } else { g[(i, j)] };
            d = d.max(e.norm());
        }
    }
    d
}

/// A linear map that can be applied together with its adjoint.
pub trait LinOp: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[c64]) -> Vec<c64>;
    fn apply_adjoint(&self, y: &[c64]) -> Vec<c64>;
}

impl LinOp for CMat {
    fn nrows(&self) -> usize {
        Mat::nrows(self)
    }
    fn ncols(&self) -> usize {
        Mat::ncols(self)
    }
    fn apply(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![ZERO; Mat::nrows(self)];
        for (j, xj) in x.iter().enumerate() {
            if *xj == ZERO {
                continue;
            }
            let col = self.col(j);
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += col[i] * xj;
            }
        }
        y
    }
    fn apply_adjoint(&self, y: &[c64]) -> Vec<c64> {
        (0..Mat::ncols(self))
            .map(|j| {
                let col = self.col(j);
                let mut s = ZERO;
                for (i, yi) in y.iter().enumerate() {
                    s += col[i].conj() * yi;
                }
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NormConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_iter: 400 }
    }
}

/// Fixed start vector. All-ones is orthogonal to every odd-parity singular
/// vector of a reflection-symmetric operator, so the entries are perturbed by
/// a deterministic low-discrepancy sequence.
pub fn start_vector(n: usize) -> Vec<c64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let v: Vec<c64> = (0..n)
        .map(|k| c64::new(1.0 + ((k as f64 + 1.0) * PHI).fract(), 0.0))
        .collect();
    let nrm = vec_norm(&v);
    v.into_iter().map(|x| x / nrm).collect()
}

pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Largest singular value by Lanczos on `X*X` with full reorthogonalization.
pub fn spectral_norm(op: &dyn LinOp, cfg: NormConfig) -> Result<f64> {
    let n = op.ncols();
    if n == 0 || op.nrows() == 0 {
        return Ok(0.0);
    }
    let mut basis: Vec<Vec<c64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut q = start_vector(n);
    let mut last = f64::NAN;
    let cap = cfg.max_iter.min(n);
    for it in 0..cap {
        let xq = op.apply(&q);
        let mut w = op.apply_adjoint(&xq);
        let alpha = dot(&q, &w).re;
        alphas.push(alpha);
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = vec_norm(&w);
        let (theta, tail) = ritz_top(&alphas, &betas, beta)?;
        last = theta;
        if theta <= 0.0 && beta <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        let scale_ref = theta.abs().max(f64::MIN_POSITIVE);
        if tail <= cfg.rel_tol * 1e-2 * scale_ref || beta <= 1e-14 * scale_ref || it + 1 == n {
            return Ok(theta.max(0.0).sqrt());
        }
        betas.push(beta);
        q = w.into_iter().map(|x| x / beta).collect();
    }
    if n <= DENSE_NORM_FALLBACK && op.nrows() <= DENSE_NORM_FALLBACK {
        return dense_norm(op);
    }
    Err(Error::NormNotConverged { iterations: cap, last_rayleigh: last })
}

/// Largest dimension for which a stalled Lanczos run is finished by a
/// dense SVD of the materialized operator.
pub const DENSE_NORM_FALLBACK: usize = 2048;

fn dense_norm(op: &dyn LinOp) -> Result<f64> {
    let n = op.ncols();
    let mut e = vec![ZERO; n];
    let cols: Vec<Vec<c64>> = (0..n)
        .map(|j| {
            e[j] = ONE;
            let c = op.apply(&e);
            e[j] = ZERO;
            c
        })
        .collect();
    let m = from_columns(op.nrows(), &cols);
    let s = m.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Top Ritz value of the Lanczos tridiagonal and its residual estimate.
fn ritz_top(alphas: &[f64], betas: &[f64], beta_next: f64) -> Result<(f64, f64)> {
    let m = alphas.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i == j + 1 {
            betas[j]
        } else if j == i + 1 {
            betas[i]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let theta = s[m - 1];
    Ok((theta, (beta_next * u[(m - 1, m - 1)]).abs()))
}

pub fn operator_norm(m: &CMat) -> Result<f64> {
    spectral_norm(m, NormConfig::default())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// `f(A) = Q f(Λ) Q*` for Hermitian `A`.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> c64) -> Result<CMat> {
    let (vals, q) = hermitian_eigen(a)?;
    let fl: Vec<c64> = vals.iter().map(|&x| f(x)).collect();
    let n = a.nrows();
    let qf = Mat::from_fn(n, n, |i, j| q[(i, j)] * fl[j]);
    Ok(&qf * q.adjoint())
}

/// Eigenvalue angles in `[0, 2π)`.
pub fn angle(z: c64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Eigendecomposition of a unitary (normal) matrix.
///
/// The Cayley transform at a point `ζ` chosen in the widest spectral gap is
/// Hermitian and shares eigenvectors with `W`, so the stable Hermitian solver
/// gives an orthonormal basis even inside degenerate clusters. Eigenvalues are
/// read off as Rayleigh quotients.
pub fn unitary_eigen(w: &CMat) -> Result<(Vec<c64>, CMat)> {
    let n = w.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if is_diagonal(w) {
        return Ok(((0..n).map(|i| w[(i, i)]).collect(), identity(n)));
    }
    let zeta = gap_point(w)?;
    let lhs = identity(n) - scale(w, zeta.conj());
    let rhs = identity(n) + scale(w, zeta.conj());
    let lu = lhs.partial_piv_lu();
    let h = scale(&lu.solve(&rhs), -I);
    let (h, _) = hermitize(&h);
    let (_, q) = hermitian_eigen(&h)?;
    let wq = w * &q;
    let vals: Vec<c64> = (0..n)
        .map(|j| {
            let mut s = ZERO;
            for i in 0..n {
                s += q[(i, j)].conj() * wq[(i, j)];
            }
            s
        })
        .collect();
    let mut resid = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            resid = resid.max((wq[(i, j)] - q[(i, j)] * vals[j]).norm());
        }
    }
    if resid <= 1e-10 * n as f64 {
        return Ok((vals, q));
    }
    let evd = w.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    Ok(((0..n).map(|i| s[i]).collect(), evd.U().to_owned()))
}

fn is_diagonal(w: &CMat) -> bool {
    let n = w.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || w[(i, j)] == ZERO))
}

/// A point on the circle in the widest gap of the spectrum of a unitary.
///
/// Uses only the eigenvalues of the Hermitian part: each `cos φ` gives the
/// candidate pair `±φ`, and the widest gap among all candidates is also a gap
/// of the true spectrum.
pub fn gap_point(w: &CMat) -> Result<c64> {
    let (re, _) = hermitize(w);
    let cosines = hermitian_eigenvalues(&re)?;
    let mut cand: Vec<f64> = Vec::with_capacity(2 * cosines.len());
    for c in cosines {
        let phi = c.clamp(-1.0, 1.0).acos();
        cand.push(phi);
        cand.push(std::f64::consts::TAU - phi);
    }
    Ok(cis(widest_gap_midpoint(&mut cand)))
}

/// Midpoint of the largest circular gap between the given angles.
pub fn widest_gap_midpoint(angles: &mut [f64]) -> f64 {
    use std::f64::consts::TAU;
    if angles.is_empty() {
        return 0.0;
    }
    for a in angles.iter_mut() {
        *a = a.rem_euclid(TAU);
    }
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut best = (angles[0] + TAU - angles[n - 1], angles[n - 1]);
    for k in 1..n {
        let g = angles[k] - angles[k - 1];
        if g > best.0 {
            best = (g, angles[k - 1]);
        }
    }
    (best.1 + best.0 / 2.0).rem_euclid(TAU)
}

/// LU-based inverse with a 1-norm condition estimate.
pub fn inverse(m: &CMat) -> Result<(CMat, f64)> {
    let inv = m.partial_piv_lu().inverse();
    let cond = norm_one(m) * norm_one(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::IllConditioned { condition: cond });
    }
    Ok((inv, cond))
}

/// Solve `M X = B` with a condition check.
pub fn solve(m: &CMat, b: &CMat) -> Result<(CMat, f64)> {
    let lu = m.partial_piv_lu();
    let x = lu.solve(b);
    let inv_norm = norm_one(&lu.inverse());
    let cond = norm_one(m) * inv_norm;
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::IllConditioned { condition: cond });
    }
    Ok((x, cond))
}

/// `M^{-1}` applied implicitly, for norms of resolvent products.
pub struct LuOp {
    lu: faer::linalg::solvers::PartialPivLu<c64>,
    n: usize,
}

impl LuOp {
    pub fn new(m: &CMat) -> Self {
        Self { lu: m.partial_piv_lu(), n: m.nrows() }
    }

    pub fn solve_vec(&self, x: &[c64]) -> Vec<c64> {
        let b = Mat::from_fn(self.n, 1, |i, _| x[i]);
        let y = self.lu.solve(&b);
        (0..self.n).map(|i| y[(i, 0)]).collect()
    }

    pub fn solve_adjoint_vec(&self, x: &[c64]) -> Vec<c64> {
        use faer::linalg::solvers::SolveCore;
        let mut b = Mat::from_fn(self.n, 1, |i, _| x[i].conj());
        // (M*)^{-1} x = conj(M^{-T} conj(x))
        self.lu.solve_transpose_in_place_with_conj(faer::Conj::No, b.as_mut());
        (0..self.n).map(|i| b[(i, 0)].conj()).collect()
    }
}

/// Plain complex vector dot helpers for column extraction.
pub fn column(m: &CMat, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn from_columns(n: usize, cols: &[Vec<c64>]) -> CMat {
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal() {
        let m = real_diag(&[0.5, -3.0, 2.0, 1.0]);
        let n = operator_norm(&m).unwrap();
        assert!((n - 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_of_zero() {
        let m: CMat = Mat::zeros(5, 5);
        assert_eq!(operator_norm(&m).unwrap(), 0.0);
    }

    #[test]
    fn norm_catches_odd_singular_vector() {
        // Antisymmetric top singular vector, invisible to an all-ones start.
        let n = 9;
        let m = Mat::from_fn(n, n, |i, j| {
            let x = i as f64 - 4.0;
            let y = j as f64 - 4.0;
            c64::new(if i == j { 0.1 } else { 0.0 } + 5.0 * x * y / 60.0, 0.0)
        });
        let exact = 0.1 + 5.0 * 60.0 / 60.0;
        assert!((operator_norm(&m).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn unitary_eigen_twisted_cycle() {
        let n = 17;
        let w = Mat::from_fn(n, n, |i, j| {
            if i == j + 1 {
                ONE
            } else if i == 0 && j == n - 1 {
                -I
            } else {
                ZERO
            }
        });
        let (vals, q) = unitary_eigen(&w).unwrap();
        let wq = &w * &q;
        for j in 0..n {
            assert!((vals[j].norm() - 1.0).abs() < 1e-12);
            for i in 0..n {
                assert!((wq[(i, j)] - q[(i, j)] * vals[j]).norm() < 1e-12);
            }
        }
        assert!(unitarity_defect(&q) < 1e-12);
    }

    #[test]
    fn lu_adjoint_solve() {
        let m = Mat::from_fn(3, 3, |i, j| c64::new((i + 2 * j) as f64 + if i == j { 4.0 } else { 0.0 }, (i as f64) - (j as f64)));
        let op = LuOp::new(&m);
        let x = vec![ONE, I, c64::new(2.0, -1.0)];
        let y = op.solve_adjoint_vec(&x);
        let back = LinOp::apply_adjoint(&m, &y);
        for k in 0..3 {
            assert!((back[k] - x[k]).norm() < 1e-12);
        }
    }
}
