//! Regularity integrands `‖e^{−itA}Se^{itA} + e^{itA}Se^{−itA} − 2S‖` and
//! `‖e^{−itA}[A,S]e^{itA} − [A,S]‖`, their integrals against `dt/t²` and
//! `dt/t`, and a classification across growing sections.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE};
use crate::operator::{commutator, heisenberg_conjugate, ConjugateOp, DenseOperator, Operator};

/// Lower integration cutoff.
pub const T_MIN: f64 = 1e-4;
/// Default number of log-spaced grid points.
pub const T_POINTS: usize = 64;

pub fn log_grid(t_min: f64, points: usize) -> Vec<f64> {
    let (a, b) = (t_min.ln(), 0.0);
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} outside (0, 1]")));
    }
    Ok(())
}

/// Norm of an operator on the half-width-`k` section. Dense operators drop
/// `margin` rows and columns at each edge.
fn masked_norm(op: &Operator, k: usize, margin: usize) -> Result<f64> {
    match op {
        Operator::Lattice(l) => l.section_norm(k),
        Operator::Dense(d) => {
            let n = d.dim();
            let m = margin.min(n / 2);
            linalg::operator_norm(&linalg::submatrix(&d.mat, m, n - m))
        }
    }
}

fn combine(terms: &[(f64, &Operator)]) -> Result<Operator> {
    match terms[0].1 {
        Operator::Lattice(_) => {
            let parts = terms
                .iter()
                .map(|(c, op)| match op {
                    Operator::Lattice(l) => Ok(l.scale(ONE * *c)),
                    Operator::Dense(_) => Err(Error::Incompatible("mixed realizations".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Operator::Lattice(crate::operator::LatticeOp::sum(parts)))
        }
        Operator::Dense(first) => {
            let mut acc = CMat::zeros(first.dim(), first.dim());
            for (c, op) in terms {
                match op {
                    Operator::Dense(d) => acc += linalg::scale(&d.mat, ONE * *c),
                    Operator::Lattice(_) => {
                        return Err(Error::Incompatible("mixed realizations".into()))
                    }
                }
            }
            Ok(Operator::Dense(DenseOperator::new(acc, first.offset)))
        }
    }
}

/// Edge rows masked for dense realizations.
pub const DENSE_MARGIN: usize = 4;

/// `‖e^{−itA}Ue^{itA} + e^{itA}Ue^{−itA} − 2U‖` on the section.
pub fn c11_integrand(u: &Operator, a: &ConjugateOp, t: f64, k: usize) -> Result<f64> {
    check_t(t)?;
    let plus = heisenberg_conjugate(a, u, t)?;
    let minus = heisenberg_conjugate(a, u, -t)?;
    masked_norm(&combine(&[(1.0, &plus), (1.0, &minus), (-2.0, u)])?, k, DENSE_MARGIN)
}

/// `‖e^{−itA}[A,U]e^{itA} − [A,U]‖` on the section.
pub fn c1plus0_integrand(u: &Operator, a: &ConjugateOp, t: f64, k: usize) -> Result<f64> {
    check_t(t)?;
    let c = commutator(a, u)?;
    let moved = heisenberg_conjugate(a, &c, t)?;
    masked_norm(&combine(&[(1.0, &moved), (-1.0, &c)])?, k, DENSE_MARGIN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceFlag {
    Converged,
    Growing,
    Inconclusive,
}

impl fmt::Display for DivergenceFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DivergenceFlag::Converged => "converged",
            DivergenceFlag::Growing => "growing",
            DivergenceFlag::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralPair {
    pub c11: f64,
    pub c1plus0: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlagPair {
    pub c11: DivergenceFlag,
    pub c1plus0: DivergenceFlag,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub t_grid: Vec<f64>,
    /// Integrand values at the largest section.
    pub c11_integrand: Vec<f64>,
    pub c1plus0_integrand: Vec<f64>,
    /// Integral estimates at the largest section (cutoff plus tail).
    pub integral_estimates: IntegralPair,
    /// Estimates for every section in the schedule.
    pub estimates_by_k: Vec<IntegralPair>,
    pub divergence_flag: FlagPair,
    pub section_sizes: Vec<usize>,
    pub t_min: f64,
}

/// Trapezoid rule for `∫ f(t) t^{−p} dt` on a log grid (in `u = ln t`),
/// plus a power-law tail on `(0, t_min)` extrapolated from the first two
/// points. Returns `(cutoff integral, tail)`; the tail is infinite when the
/// fitted exponent does not make it integrable.
pub fn log_trapezoid(t: &[f64], f: &[f64], p: f64) -> (f64, f64) {
    let g: Vec<f64> = t.iter().zip(f).map(|(t, f)| f * t.powf(1.0 - p)).collect();
    let body: f64 = (1..t.len()).map(|i| 0.5 * (g[i] + g[i - 1]) * (t[i].ln() - t[i - 1].ln())).sum();
    let tail = if g[0] == 0.0 {
        0.0
    } else if g[1] > 0.0 && g[0] > 0.0 {
        // g(t) ≈ g₀ (t/t₀)^q, so ∫₀^{t₀} g dt/t = g₀/q.
        let q = (g[1] / g[0]).ln() / (t[1] / t[0]).ln();
        if q > 1e-3 {
            g[0] / q
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    (body, tail)
}

fn flag(estimates: &[f64], tails: &[f64]) -> DivergenceFlag {
    let n = estimates.len();
    if tails.last().is_some_and(|t| t.is_infinite()) {
        return DivergenceFlag::Growing;
    }
    if n < 3 {
        return DivergenceFlag::Inconclusive;
    }
    let d1 = estimates[n - 2] - estimates[n - 3];
    let d2 = estimates[n - 1] - estimates[n - 2];
    let scale = estimates[n - 1].abs().max(1e-300);
    if d2.abs() <= 1e-8 * scale {
        return DivergenceFlag::Converged;
    }
    if d1.signum() != d2.signum() {
        return DivergenceFlag::Inconclusive;
    }
    // Geometric decay of the increments suggests a finite limit.
    let ratio = d2 / d1;
    if ratio <= 0.5 {
        DivergenceFlag::Converged
    } else {
        DivergenceFlag::Growing
    }
}

/// `family(K)` returns the pair realized at section size `K`.
pub fn classify<F>(family: F, t_grid: &[f64], k_schedule: &[usize]) -> Result<RegularityReport>
where
    F: Fn(usize) -> Result<(Operator, ConjugateOp)> + Sync,
{
    if t_grid.len() < 16 {
        return Err(Error::InvalidParameter(format!(
            "t grid needs at least 16 points, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 || *t_grid.last().unwrap() > 1.0 {
        return Err(Error::InvalidParameter("t grid must be increasing in (0, 1]".into()));
    }
    if k_schedule.is_empty() || k_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("K schedule must be increasing".into()));
    }
    let mut by_k = Vec::new();
    let mut tails = (Vec::new(), Vec::new());
    let mut last = (Vec::new(), Vec::new());
    for &k in k_schedule {
        let (u, a) = family(k)?;
        let vals: Vec<(f64, f64)> = t_grid
            .par_iter()
            .map(|&t| Ok((c11_integrand(&u, &a, t, k)?, c1plus0_integrand(&u, &a, t, k)?)))
            .collect::<Result<_>>()?;
        let (c11v, c10v): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
        let (b11, t11) = log_trapezoid(t_grid, &c11v, 2.0);
        let (b10, t10) = log_trapezoid(t_grid, &c10v, 1.0);
        by_k.push(IntegralPair {
            c11: b11 + if t11.is_finite() { t11 } else { 0.0 },
            c1plus0: b10 + if t10.is_finite() { t10 } else { 0.0 },
        });
        tails.0.push(t11);
        tails.1.push(t10);
        last = (c11v, c10v);
    }
    let e11: Vec<f64> = by_k.iter().map(|p| p.c11).collect();
    let e10: Vec<f64> = by_k.iter().map(|p| p.c1plus0).collect();
    Ok(RegularityReport {
        t_grid: t_grid.to_vec(),
        c11_integrand: last.0,
        c1plus0_integrand: last.1,
        integral_estimates: *by_k.last().unwrap(),
        divergence_flag: FlagPair { c11: flag(&e11, &tails.0), c1plus0: flag(&e10, &tails.1) },
        estimates_by_k: by_k,
        section_sizes: k_schedule.to_vec(),
        t_min: t_grid[0],
    })
}

impl RegularityReport {
    /// CSV rows `(t, c11_integrand, c1plus0_integrand, K)`.
    pub fn csv_rows(&self) -> Vec<String> {
        let k = self.section_sizes.last().copied().unwrap_or(0);
        self.t_grid
            .iter()
            .zip(&self.c11_integrand)
            .zip(&self.c1plus0_integrand)
            .map(|((t, a), b)| format!("{t:.12e},{a:.12e},{b:.12e},{k}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Diagonal, LatticeOp};

    fn shift() -> (Operator, ConjugateOp) {
        (Operator::Lattice(LatticeOp::shift()), ConjugateOp::diagonal(Diagonal::number()))
    }

    #[test]
    fn shift_integrands_closed_form() {
        let (u, a) = shift();
        for t in [1e-3, 0.1, 0.5, 1.0] {
            let c11 = c11_integrand(&u, &a, t, 16).unwrap();
            let c10 = c1plus0_integrand(&u, &a, t, 16).unwrap();
            assert!((c11 - 2.0 * (1.0 - f64::cos(t))).abs() < 1e-10);
            assert!((c10 - 2.0 * (t / 2.0).sin().abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_is_zero() {
        let u = Operator::Lattice(LatticeOp::identity());
        let a = ConjugateOp::diagonal(Diagonal::number());
        assert_eq!(c11_integrand(&u, &a, 0.3, 8).unwrap(), 0.0);
        assert!(c1plus0_integrand(&u, &a, 0.3, 8).unwrap() == 0.0);
    }

    #[test]
    fn t_out_of_range() {
        let (u, a) = shift();
        assert!(c11_integrand(&u, &a, 0.0, 8).is_err());
        assert!(c11_integrand(&u, &a, 1.5, 8).is_err());
    }

    #[test]
    fn trapezoid_of_constant() {
        let t = log_grid(1e-4, 64);
        let f: Vec<f64> = t.iter().map(|t| t * t).collect();
        let (body, tail) = log_trapezoid(&t, &f, 2.0);
        let du = (1e4f64).ln() / 63.0;
        assert!((body + tail - 1.0).abs() < du * du / 12.0 * 1.01);
    }
}
