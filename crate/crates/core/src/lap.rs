//! Limiting absorption sweeps through the Cayley transform, the kernel
//! `δ(U,z)`, smoothness sums and spectral-type diagnostics.

use faer::c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, LinOp, LuOp, NormConfig, I, ONE};
use crate::models::CommutatorModel;
use crate::operator::{ComplexVector, ConjugateOp, Diagonal, LatticeOp, SpectralWindow};

#[derive(Debug, Clone)]
pub struct DeltaKernel {
    pub z: c64,
    pub delta: CMat,
    /// `‖δ − (1−|z|²) R R*‖` with `R = (1−zU*)^{-1}`.
    pub factorization_residual: f64,
    /// Smallest eigenvalue of the Hermitian part of `δ`.
    pub min_eig: f64,
}

/// `δ(U,z) = (1−zU*)^{-1} − (1−z̄^{-1}U*)^{-1}`.
pub fn delta_kernel(u: &CMat, z: c64) -> Result<DeltaKernel> {
    let r2 = z.norm_sqr();
    if (z.norm() - 1.0).abs() < 1e-12 || z.norm() == 0.0 {
        return Err(Error::InvalidParameter(format!("δ(U,z) needs 0 < |z| ≠ 1, got |z| = {}", z.norm())));
    }
    let n = u.nrows();
    let ustar = u.adjoint().to_owned();
    let one = linalg::identity(n);
    let (r, _) = linalg::inverse(&(&one - linalg::scale(&ustar, z)))?;
    let (r_out, _) = linalg::inverse(&(&one - linalg::scale(&ustar, ONE / z.conj())))?;
    let delta = &r - &r_out;
    let gram = linalg::scale(&(&r * r.adjoint()), c64::new(1.0 - r2, 0.0));
    let factorization_residual = linalg::operator_norm(&(&delta - &gram))?;
    let (h, _) = linalg::hermitize(&delta);
    let min_eig = linalg::hermitian_eigenvalues(&h)?[0];
    Ok(DeltaKernel { z, delta, factorization_residual, min_eig })
}

/// Diagonal of `⟨A⟩^{−s}` on a section.
pub fn weight_diagonal(a: &CMat, s: f64) -> Result<Vec<f64>> {
    let n = a.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == c64::new(0.0, 0.0)));
    if diagonal {
        return Ok((0..n).map(|i| a[(i, i)].re.hypot(1.0).powf(-s)).collect());
    }
    Err(Error::Incompatible("weight_diagonal needs a diagonal conjugate".into()))
}

/// `⟨A⟩^{−s}` as a dense matrix (any Hermitian `A`).
pub fn weight_matrix(a: &CMat, s: f64) -> Result<CMat> {
    match weight_diagonal(a, s) {
        Ok(w) => Ok(linalg::real_diag(&w)),
        Err(_) => linalg::hermitian_function(a, |x| c64::new(x.hypot(1.0).powf(-s), 0.0)),
    }
}

/// `X = W (H_θ − z)^{-1} W` applied through one LU factorization of
/// `(i+z) − θ̄(z−i)U`.
struct WeightedResolvent<'a> {
    u: &'a CMat,
    theta_bar: c64,
    w: &'a CMat,
    lu: LuOp,
    /// Apply only `W (H − z)^{-1}` (no right weight).
    one_sided: bool,
}

impl<'a> WeightedResolvent<'a> {
    fn new(u: &'a CMat, theta: c64, w: &'a CMat, z: c64, one_sided: bool) -> Self {
        let n = u.nrows();
        let m = linalg::scale(&linalg::identity(n), I + z) - linalg::scale(u, theta.conj() * (z - I));
        Self { u, theta_bar: theta.conj(), w, lu: LuOp::new(&m), one_sided }
    }

    /// `(1 − θ̄U)x`.
    fn one_minus(&self, x: &[c64]) -> Vec<c64> {
        let ux = LinOp::apply(self.u, x);
        x.iter().zip(ux).map(|(a, b)| a - self.theta_bar * b).collect()
    }

    fn one_minus_adjoint(&self, x: &[c64]) -> Vec<c64> {
        let ux = LinOp::apply_adjoint(self.u, x);
        x.iter().zip(ux).map(|(a, b)| a - self.theta_bar.conj() * b).collect()
    }
}

impl LinOp for WeightedResolvent<'_> {
    fn nrows(&self) -> usize {
        self.u.nrows()
    }
    fn ncols(&self) -> usize {
        self.u.nrows()
    }
    fn apply(&self, x: &[c64]) -> Vec<c64> {
        let y = if self.one_sided { x.to_vec() } else { LinOp::apply(self.w, x) };
        let y = self.lu.solve_vec(&y);
        let y = self.one_minus(&y);
        LinOp::apply(self.w, &y).into_iter().map(|v| -v).collect()
    }
    fn apply_adjoint(&self, x: &[c64]) -> Vec<c64> {
        let y = LinOp::apply_adjoint(self.w, x);
        let y = self.one_minus_adjoint(&y);
        let y = self.lu.solve_adjoint_vec(&y);
        let y = if self.one_sided { y } else { LinOp::apply_adjoint(self.w, &y) };
        y.into_iter().map(|v| -v).collect()
    }
}

/// `‖W (H_θ − λ − iε)^{-1} W‖`; `eps` may be negative.
pub fn weighted_resolvent_norm(u: &CMat, theta: c64, w: &CMat, lambda: f64, eps: f64) -> Result<f64> {
    let op = WeightedResolvent::new(u, theta, w, c64::new(lambda, eps), false);
    linalg::spectral_norm(&op, NormConfig::default())
}

/// `|ε| · ‖W (H_θ − λ − iε)^{-1}‖²`.
pub fn imaginary_part_bound(u: &CMat, theta: c64, w: &CMat, lambda: f64, eps: f64) -> Result<f64> {
    let op = WeightedResolvent::new(u, theta, w, c64::new(lambda, eps), true);
    let n = linalg::spectral_norm(&op, NormConfig::default())?;
    Ok(eps.abs() * n * n)
}

#[derive(Debug, Clone, Serialize)]
pub struct LapSweep {
    pub theta: c64,
    pub s: f64,
    pub lambda_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub k_schedule: Vec<usize>,
    /// `norms[l][e][k]`.
    pub norms: Vec<Vec<Vec<f64>>>,
    pub imaginary_parts: Vec<Vec<Vec<f64>>>,
    /// `stabilized[l][e]`.
    pub stabilized: Vec<Vec<bool>>,
    /// Sup over stabilized entries (`None` when nothing stabilized).
    pub sup_bound: Option<f64>,
    pub eps_floor_constant: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LapConfig {
    /// Relative change allowed between the two largest sections.
    pub stabilization: f64,
    /// Entries with `ε < c/K_max` are never counted as stabilized.
    pub eps_floor_constant: f64,
}

impl Default for LapConfig {
    fn default() -> Self {
        Self { stabilization: 0.01, eps_floor_constant: 1.0 }
    }
}

/// Weighted resolvent norms on growing sections. `eps_grid` is sorted
/// decreasing.
#[allow(clippy::too_many_arguments)]
pub fn lap_sweep(
    model: &dyn CommutatorModel,
    theta: c64,
    lambda_grid: &[f64],
    s: f64,
    eps_grid: &[f64],
    k_schedule: &[usize],
    cfg: LapConfig,
) -> Result<LapSweep> {
    if !(s > 0.5) {
        return Err(Error::InvalidParameter(format!("weight exponent s = {s} must exceed 1/2")));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0)) || eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps grid must be positive and decreasing".into()));
    }
    if k_schedule.len() < 2 || k_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("K schedule must be increasing with at least two entries".into()));
    }
    let sections: Vec<(CMat, CMat)> = k_schedule
        .iter()
        .map(|&k| {
            let sec = model.section(k)?;
            let w = weight_matrix(&sec.conjugate, s)?;
            Ok((sec.unitary, w))
        })
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (li, &lambda) in lambda_grid.iter().enumerate() {
        for (ei, &eps) in eps_grid.iter().enumerate() {
            for ki in 0..k_schedule.len() {
                jobs.push((li, ei, ki, lambda, eps));
            }
        }
    }
    let cells: Vec<(usize, usize, usize, f64, f64)> = jobs
        .par_iter()
        .map(|&(li, ei, ki, lambda, eps)| {
            let (u, w) = &sections[ki];
            let norm = weighted_resolvent_norm(u, theta, w, lambda, eps)?;
            let imag = imaginary_part_bound(u, theta, w, lambda, eps)?;
            Ok((li, ei, ki, norm, imag))
        })
        .collect::<Result<_>>()?;
    let nk = k_schedule.len();
    let mut norms = vec![vec![vec![0.0; nk]; eps_grid.len()]; lambda_grid.len()];
    let mut imaginary_parts = norms.clone();
    for (li, ei, ki, n, im) in cells {
        norms[li][ei][ki] = n;
        imaginary_parts[li][ei][ki] = im;
    }
    let k_max = *k_schedule.last().unwrap() as f64;
    let mut stabilized = vec![vec![false; eps_grid.len()]; lambda_grid.len()];
    let mut sup: Option<f64> = None;
    for li in 0..lambda_grid.len() {
        for (ei, &eps) in eps_grid.iter().enumerate() {
            let row = &norms[li][ei];
            let (a, b) = (row[nk - 2], row[nk - 1]);
            let ok = (b - a).abs() <= cfg.stabilization * b.abs().max(f64::MIN_POSITIVE)
                && eps >= cfg.eps_floor_constant / k_max;
            stabilized[li][ei] = ok;
            if ok {
                sup = Some(sup.map_or(b, |m: f64| m.max(b)));
            }
        }
    }
    Ok(LapSweep {
        theta,
        s,
        lambda_grid: lambda_grid.to_vec(),
        eps_grid: eps_grid.to_vec(),
        k_schedule: k_schedule.to_vec(),
        norms,
        imaginary_parts,
        stabilized,
        sup_bound: sup,
        eps_floor_constant: cfg.eps_floor_constant,
    })
}

impl LapSweep {
    /// Stabilized `(ε, norm)` pairs at `lambda_grid[li]`, largest section.
    pub fn stabilized_series(&self, li: usize) -> Vec<(f64, f64)> {
        let nk = self.k_schedule.len();
        self.eps_grid
            .iter()
            .enumerate()
            .filter(|(ei, _)| self.stabilized[li][*ei])
            .map(|(ei, &e)| (e, self.norms[li][ei][nk - 1]))
            .collect()
    }

    /// `d log norm / d log ε` over the last stabilized decade of `ε`.
    pub fn last_decade_slope(&self, li: usize) -> Option<f64> {
        let pts = self.stabilized_series(li);
        let e_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let decade: Vec<(f64, f64)> = pts
            .into_iter()
            .filter(|(e, _)| *e <= 10.0 * e_min * (1.0 + 1e-12))
            .map(|(e, n)| (e.ln(), n.ln()))
            .collect();
        log_log_slope(&decade)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Where `Uⁿφ` is computed.
pub enum SmoothTarget<'a> {
    /// Exact lattice iteration; on support overflow the sum continues on
    /// the closed section of half-width `fallback_k`.
    Lattice { op: &'a LatticeOp, a: &'a Diagonal, fallback_k: usize },
    /// Dense section with the weight diagonal of `⟨A⟩` given per site and
    /// an optional window projection applied to `φ` first.
    Dense { u: &'a CMat, a: &'a CMat, projection: Option<&'a CMat> },
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub b_label: String,
    pub window: String,
    pub n_schedule: Vec<usize>,
    pub partial_sums: Vec<f64>,
    /// `(k, Σ_{2^k ≤ |n| < 2^{k+1}} ‖⟨A⟩^{−s}Uⁿφ‖²)`.
    pub dyadic_tails: Vec<(u32, f64)>,
    /// Consecutive differences of the dyadic tails.
    pub tail_decrements: Vec<f64>,
    pub sup_over_disk: Option<f64>,
    pub notes: Vec<String>,
}

const TRIM: f64 = 1e-18;

fn weighted_sq(v: &ComplexVector, a: &Diagonal, s: f64) -> f64 {
    (0..v.len())
        .map(|i| v.entries[i].norm_sqr() * a.value(v.offset + i as i64).hypot(1.0).powf(-2.0 * s))
        .sum()
}

fn dense_weighted_sq(v: &[c64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, wi)| x.norm_sqr() * wi * wi).sum()
}

/// Per-step terms `t_n = ‖⟨A⟩^{−s}Uⁿφ‖² + ‖⟨A⟩^{−s}U^{−n}φ‖²` for `n ≥ 1`
/// and `t_0 = ‖⟨A⟩^{−s}φ‖²`.
fn smooth_terms(target: &SmoothTarget, s: f64, phi: &ComplexVector, n_max: usize, notes: &mut Vec<String>) -> Result<Vec<f64>> {
    match target {
        SmoothTarget::Lattice { op, a, fallback_k } => {
            let adj = op.adjoint();
            let mut terms = vec![weighted_sq(phi, a, s)];
            let (mut fwd, mut bwd) = (phi.clone(), phi.clone());
            for n in 1..=n_max {
                let step = op.apply(&fwd).and_then(|f| adj.apply(&bwd).map(|b| (f, b)));
                match step {
                    Ok((mut f, mut b)) => {
                        f.trim(TRIM);
                        b.trim(TRIM);
                        terms.push(weighted_sq(&f, a, s) + weighted_sq(&b, a, s));
                        fwd = f;
                        bwd = b;
                    }
                    Err(Error::TruncationNeeded { required, cap }) => {
                        notes.push(format!(
                            "lattice support {required} exceeded cap {cap} at n = {n}; continued on the closed section K = {fallback_k}"
                        ));
                        let u = op.closure(*fallback_k, crate::models::CLOSURE_TWIST)?;
                        let w: Vec<f64> = (-(*fallback_k as i64)..=*fallback_k as i64)
                            .map(|j| a.value(j).hypot(1.0).powf(-s))
                            .collect();
                        let ustar = u.adjoint().to_owned();
                        let mut f = fwd.to_section(*fallback_k);
                        let mut b = bwd.to_section(*fallback_k);
                        for _ in n..=n_max {
                            f = LinOp::apply(&u, &f);
                            b = LinOp::apply(&ustar, &b);
                            terms.push(dense_weighted_sq(&f, &w) + dense_weighted_sq(&b, &w));
                        }
                        return Ok(terms);
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(terms)
        }
        SmoothTarget::Dense { u, a, projection } => {
            let w = weight_diagonal(a, s)?;
            let k = u.nrows() / 2;
            let mut f = phi.to_section(k);
            if let Some(p) = projection {
                f = LinOp::apply(*p, &f);
            }
            let ustar = u.adjoint().to_owned();
            let mut b = f.clone();
            let mut terms = vec![dense_weighted_sq(&f, &w)];
            for _ in 1..=n_max {
                f = LinOp::apply(*u, &f);
                b = LinOp::apply(&ustar, &b);
                terms.push(dense_weighted_sq(&f, &w) + dense_weighted_sq(&b, &w));
            }
            Ok(terms)
        }
    }
}

/// Partial sums `Σ_{|n|≤N} ‖⟨A⟩^{−s}UⁿEφ‖²` and dyadic tails up to
/// `2^{k_max+1}`.
pub fn smooth_sum(
    target: &SmoothTarget,
    s: f64,
    phi: &ComplexVector,
    b_label: &str,
    window: Option<&SpectralWindow>,
    n_schedule: &[usize],
    k_max: u32,
) -> Result<SmoothnessReport> {
    if !(s > 0.5) {
        return Err(Error::InvalidParameter(format!("weight exponent s = {s} must exceed 1/2")));
    }
    let n_max = n_schedule.iter().copied().max().unwrap_or(0).max((1usize << (k_max + 1)) - 1);
    let mut notes = Vec::new();
    let terms = smooth_terms(target, s, phi, n_max, &mut notes)?;
    let mut prefix = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        prefix.push(acc);
    }
    let partial_sums = n_schedule.iter().map(|&n| prefix[n]).collect();
    let dyadic_tails: Vec<(u32, f64)> = (0..=k_max)
        .map(|k| {
            let lo = 1usize << k;
            let hi = (1usize << (k + 1)).min(terms.len());
            (k, terms[lo..hi].iter().sum())
        })
        .collect();
    let tail_decrements = dyadic_tails.windows(2).map(|w| w[0].1 - w[1].1).collect();
    Ok(SmoothnessReport {
        b_label: b_label.to_string(),
        window: window.map_or_else(|| "global".to_string(), |w| format!("({}, {})", w.lo, w.hi)),
        n_schedule: n_schedule.to_vec(),
        partial_sums,
        dyadic_tails,
        tail_decrements,
        sup_over_disk: None,
        notes,
    })
}

/// `sup_z |⟨φ, B δ(U,z) E B φ⟩|` over `z_grid` and probes, `B = ⟨A⟩^{−s}`.
pub fn smooth_sup_disk(
    u: &CMat,
    a: &CMat,
    s: f64,
    projection: Option<&CMat>,
    probes: &[Vec<c64>],
    z_grid: &[c64],
) -> Result<f64> {
    if let Some(z) = z_grid.iter().find(|z| z.norm() > 1.0 - 1e-3) {
        return Err(Error::InvalidParameter(format!("grid point {z} is within 1e-3 of the circle")));
    }
    let b = weight_matrix(a, s)?;
    let n = u.nrows();
    let ustar = u.adjoint().to_owned();
    let one = linalg::identity(n);
    let values: Vec<f64> = z_grid
        .par_iter()
        .map(|&z| {
            if z.norm() == 0.0 {
                // δ(U,0) = 1 as the limit of the Gram form.
                return Ok(probes
                    .iter()
                    .map(|p| {
                        let x = LinOp::apply(&b, p);
                        let y = projection.map_or_else(|| x.clone(), |e| LinOp::apply(e, &x));
                        linalg::dot(&x, &y).norm()
                    })
                    .fold(0.0, f64::max));
            }
            let lu_in = LuOp::new(&(&one - linalg::scale(&ustar, z)));
            let lu_out = LuOp::new(&(&one - linalg::scale(&ustar, ONE / z.conj())));
            Ok(probes
                .iter()
                .map(|p| {
                    let x = LinOp::apply(&b, p);
                    let y = projection.map_or_else(|| x.clone(), |e| LinOp::apply(e, &x));
                    let d: Vec<c64> = lu_in
                        .solve_vec(&y)
                        .into_iter()
                        .zip(lu_out.solve_vec(&y))
                        .map(|(p, q)| p - q)
                        .collect();
                    linalg::dot(&x, &d).norm()
                })
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct WienerReport {
    pub n: usize,
    /// `(1/N) Σ_{n=1}^N |⟨φ,Uⁿφ⟩|²`.
    pub cesaro: f64,
    /// `(N, cesaro(N))` on the dyadic grid.
    pub dyadic: Vec<(usize, f64)>,
    /// Fitted exponent of `|⟨φ,Uⁿφ⟩|` against `n` (dyadic grid, nonzero
    /// coefficients only).
    pub coeff_decay_fit: Option<f64>,
    /// Fitted exponent of `cesaro(N)` against `N`.
    pub cesaro_slope: Option<f64>,
    /// `C = N·cesaro(N)` at the largest `N`.
    pub c_fit: f64,
    /// Relative growth of `N·cesaro(N)` over the last octave.
    pub last_octave_growth: f64,
}

/// Correlation coefficients `⟨φ,Uⁿφ⟩` for `n = 1..=n_max`.
pub fn correlations(u: &LatticeOp, phi: &ComplexVector, n_max: usize) -> Result<Vec<c64>> {
    let mut v = phi.clone();
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        v = u.apply(&v)?;
        v.trim(TRIM);
        out.push(phi.inner(&v));
    }
    Ok(out)
}

pub fn wiener_diagnostic(u: &LatticeOp, phi: &ComplexVector, n_max: usize) -> Result<WienerReport> {
    let nrm = phi.norm();
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("probe must be normalized, ‖φ‖ = {nrm}")));
    }
    let c = correlations(u, phi, n_max)?;
    wiener_from_correlations(&c)
}

pub fn wiener_from_correlations(c: &[c64]) -> Result<WienerReport> {
    let n_max = c.len();
    if n_max == 0 {
        return Err(Error::InvalidParameter("need at least one correlation".into()));
    }
    let mut acc = 0.0;
    let mut running = Vec::with_capacity(n_max);
    for z in c {
        acc += z.norm_sqr();
        running.push(acc);
    }
    let dyadic: Vec<(usize, f64)> = (0..)
        .map(|k| 1usize << k)
        .take_while(|&n| n <= n_max)
        .map(|n| (n, running[n - 1] / n as f64))
        .collect();
    let coeff_pts: Vec<(f64, f64)> = dyadic
        .iter()
        .filter(|(n, _)| c[n - 1].norm() > 0.0)
        .map(|(n, _)| ((*n as f64).ln(), c[n - 1].norm().ln()))
        .collect();
    let ces_pts: Vec<(f64, f64)> = dyadic
        .iter()
        .filter(|(n, v)| *n >= 16 && *v > 0.0)
        .map(|(n, v)| ((*n as f64).ln(), v.ln()))
        .collect();
    let total = running[n_max - 1];
    let half = running[(n_max / 2).max(1) - 1];
    Ok(WienerReport {
        n: n_max,
        cesaro: total / n_max as f64,
        dyadic,
        coeff_decay_fit: log_log_slope(&coeff_pts),
        cesaro_slope: log_log_slope(&ces_pts),
        c_fit: total,
        last_octave_growth: if total > 0.0 { (total - half) / total } else { 0.0 },
    })
}

/// Weight diagonal of a diagonal conjugate on sites `-k..=k`.
pub fn lattice_weights(a: &ConjugateOp, k: usize, s: f64) -> Option<Vec<f64>> {
    (-(k as i64)..=k as i64).map(|j| a.domain_weight(j).map(|w| w.powf(-s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;

    #[test]
    fn scalar_delta() {
        let d = delta_kernel(&diag(&[ONE]), c64::new(0.5, 0.0)).unwrap();
        assert!((d.delta[(0, 0)] - c64::new(3.0, 0.0)).norm() < 1e-14);
        assert!(d.factorization_residual < 1e-14);
    }

    #[test]
    fn unit_circle_rejected() {
        assert!(delta_kernel(&diag(&[ONE]), linalg::cis(0.3)).is_err());
    }

    #[test]
    fn identity_wiener() {
        let r = wiener_diagnostic(&LatticeOp::identity(), &ComplexVector::delta(0), 64).unwrap();
        assert_eq!(r.cesaro, 1.0);
    }

    #[test]
    fn shift_wiener_is_zero() {
        let r = wiener_diagnostic(&LatticeOp::shift(), &ComplexVector::delta(0), 64).unwrap();
        assert_eq!(r.cesaro, 0.0);
        assert!(r.coeff_decay_fit.is_none());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| ((k as f64).ln(), -2.0 * (k as f64).ln())).collect();
        assert!((log_log_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
    }
}
