use faer::{c64, Mat};

use super::{CommutatorModel, ModelSection};
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, I, ZERO};
use crate::operator::{ConjugateOp, UnitaryOp};

/// Free evolution `e^{−iTP²}` in the momentum representation on a uniform
/// grid `ξ ∈ [−Ξ, Ξ]`, with the conjugate `½{F Q + Q F}`, `F = P(P²+1)^{-1}`
/// and `Q = i·(central difference in ξ)`.
#[derive(Debug, Clone)]
pub struct FreeEvolutionModel {
    pub time: f64,
    pub cutoff: f64,
    pub points: usize,
    pub spacing: f64,
    pub xi: Vec<f64>,
    pub u: UnitaryOp,
    pub a: ConjugateOp,
    a_mat: CMat,
}

/// Rows within this distance of the grid edge are boundary rows.
pub const FREE_EVOLUTION_MARGIN: usize = 4;

impl FreeEvolutionModel {
    pub fn build(time: f64, cutoff: f64, points: usize) -> Result<Self> {
        if !(time > 0.0) {
            return Err(Error::InvalidParameter(format!("T = {time} must be positive")));
        }
        if !(cutoff > 0.0) || points < 16 {
            return Err(Error::InvalidParameter(format!(
                "need Ξ > 0 and at least 16 grid points, got Ξ = {cutoff}, M = {points}"
            )));
        }
        let spacing = 2.0 * cutoff / (points - 1) as f64;
        let xi: Vec<f64> = (0..points).map(|k| -cutoff + k as f64 * spacing).collect();
        let phases: Vec<c64> = xi.iter().map(|x| cis(-time * x * x)).collect();
        let u = UnitaryOp::dense(linalg::diag(&phases), 0, format!("free_evolution(T={time})"))?;
        let f: Vec<f64> = xi.iter().map(|x| x / (x * x + 1.0)).collect();
        let h = 1.0 / (2.0 * spacing);
        // Q_{k,k±1} = ±i/(2Δξ); A = ½(FQ + QF) is tridiagonal.
        let a_mat = Mat::from_fn(points, points, |r, c| {
            let q = if c == r + 1 {
                I * h
            } else if r == c + 1 {
                -I * h
            } else {
                return ZERO;
            };
            q * (0.5 * (f[r] + f[c]))
        });
        let a = ConjugateOp::hermitian(a_mat.clone(), 0)?;
        Ok(Self { time, cutoff, points, spacing, xi, u, a, a_mat })
    }

    /// Continuum symbol `2Tξ²/(ξ²+1)` on the grid.
    pub fn symbol(&self) -> Vec<f64> {
        self.xi.iter().map(|x| 2.0 * self.time * x * x / (x * x + 1.0)).collect()
    }

    /// `U*[A,U]` of the discretization.
    pub fn discrete_form(&self) -> CMat {
        let u = &self.u.as_dense().expect("dense").mat;
        u.adjoint() * linalg::commutator(&self.a_mat, u)
    }

    /// Per-row error of `U*[A,U]` against the symbol, measured on the
    /// constant function (row sums), relative to `max |symbol|`. Boundary
    /// rows are excluded.
    pub fn interior_row_errors(&self) -> Vec<f64> {
        self.row_errors(FREE_EVOLUTION_MARGIN..self.points - FREE_EVOLUTION_MARGIN)
    }

    fn row_errors(&self, rows: std::ops::Range<usize>) -> Vec<f64> {
        let m = self.discrete_form();
        let d = self.symbol();
        let scale = d.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        rows.map(|r| {
            let s: c64 = (0..self.points).map(|c| m[(r, c)]).sum();
            (s - c64::new(d[r], 0.0)).norm() / scale
        })
        .collect()
    }

    pub fn interior_relative_error(&self) -> f64 {
        self.interior_row_errors().into_iter().fold(0.0, f64::max)
    }

    /// Largest row error over grid points with `|ξ| ≤ cut`. Convergence
    /// studies compare a fixed `cut` across grids; a fixed row margin
    /// drifts toward the edge as the grid is refined.
    pub fn relative_error_within(&self, cut: f64) -> f64 {
        let lo = self.xi.iter().position(|x| x.abs() <= cut).unwrap_or(self.points);
        let hi = self.xi.iter().rposition(|x| x.abs() <= cut).map_or(lo, |h| h + 1);
        let lo = lo.max(1);
        let hi = hi.min(self.points - 1);
        self.row_errors(lo..hi.max(lo)).into_iter().fold(0.0, f64::max)
    }

    /// `Ξ − margin·Δξ`, the physical edge of the interior.
    pub fn interior_cut(&self) -> f64 {
        self.cutoff - FREE_EVOLUTION_MARGIN as f64 * self.spacing
    }
}

impl CommutatorModel for FreeEvolutionModel {
    fn label(&self) -> String {
        self.u.label.clone()
    }
    fn unitary(&self) -> &UnitaryOp {
        &self.u
    }
    fn conjugate(&self) -> &ConjugateOp {
        &self.a
    }
    fn section(&self, _k: usize) -> Result<ModelSection> {
        Ok(ModelSection {
            half_width: self.points / 2,
            offset: 0,
            unitary: self.u.as_dense().expect("dense").mat.clone(),
            conjugate: self.a_mat.clone(),
            form: linalg::real_diag(&self.symbol()),
            interior_margin: FREE_EVOLUTION_MARGIN,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_and_hermitian() {
        let m = FreeEvolutionModel::build(1.0, 8.0, 256).unwrap();
        assert!(linalg::unitarity_defect(&m.u.as_dense().unwrap().mat) <= 1e-14);
        let (_, asym) = linalg::hermitize(&m.a_mat);
        assert!(asym <= 1e-12);
    }

    #[test]
    fn second_order_convergence() {
        let e1 = FreeEvolutionModel::build(1.0, 0.5, 128).unwrap().interior_relative_error();
        let e2 = FreeEvolutionModel::build(1.0, 0.5, 256).unwrap().interior_relative_error();
        assert!(e2 < e1 / 3.5, "{e1} {e2}");
    }
}
