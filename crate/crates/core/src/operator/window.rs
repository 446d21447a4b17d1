use std::f64::consts::{PI, TAU};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::lattice::LatticeOp;
use super::ops::UnitaryOp;
use crate::error::{Error, Result};
use crate::linalg::{self, angle, CMat, ZERO};

/// Open arc `{e^{iφ} : lo < φ < hi}` of the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
    pub base_point_excluded: Option<f64>,
}

impl SpectralWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let w = hi - lo;
        if !(w > 0.0 && w < TAU) {
            return Err(Error::InvalidWindow(format!(
                "arc ({lo}, {hi}) must have width in (0, 2π)"
            )));
        }
        Ok(Self { lo, hi, base_point_excluded: None })
    }

    pub fn with_base_point(mut self, theta: f64) -> Result<Self> {
        if self.contains_closed(theta) {
            return Err(Error::InvalidWindow(format!(
                "base point angle {theta} lies in the closed arc"
            )));
        }
        self.base_point_excluded = Some(theta);
        Ok(self)
    }

    /// Full circle minus a small arc of half-width `gap` around `phi`.
    pub fn punctured(phi: f64, gap: f64) -> Result<Self> {
        Self::new(phi + gap, phi + TAU - gap)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Offset of `phi` from `lo` reduced to `[0, 2π)`.
    fn rel(&self, phi: f64) -> f64 {
        (phi - self.lo).rem_euclid(TAU)
    }

    pub fn contains(&self, phi: f64) -> bool {
        let r = self.rel(phi);
        r > 0.0 && r < self.width()
    }

    pub fn contains_closed(&self, phi: f64) -> bool {
        let r = self.rel(phi);
        r <= self.width() || (TAU - r) < 1e-15
    }

    /// Circular distance from `phi` to the endpoints.
    pub fn boundary_distance(&self, phi: f64) -> f64 {
        let d = |a: f64| {
            let x = (phi - a).rem_euclid(TAU);
            x.min(TAU - x)
        };
        d(self.lo).min(d(self.hi))
    }

    /// Does the closure of `other` sit strictly inside this arc?
    pub fn compactly_contains(&self, other: &SpectralWindow) -> bool {
        let a = self.rel(other.lo);
        a > 0.0 && a + other.width() < self.width()
    }

    /// Fourier coefficient `ĉ_n` of the arc indicator.
    pub fn indicator_coefficient(&self, n: i64) -> c64 {
        if n == 0 {
            return c64::new(self.width() / TAU, 0.0);
        }
        let nf = n as f64;
        let num = linalg::cis(-nf * self.lo) - linalg::cis(-nf * self.hi);
        num / c64::new(0.0, TAU * nf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjectionMethod {
    Diagonalize,
    Fejer { order: usize },
}

#[derive(Debug, Clone)]
pub struct SpectralProjection {
    pub matrix: CMat,
    /// Orthonormal basis of the range (diagonalize method only).
    pub basis: Option<CMat>,
    /// Eigenvalues inside the window (diagonalize method only).
    pub eigenvalues: Vec<c64>,
    /// Angular resolution of the Fejér kernel, `2π/(N+1)`.
    pub smoothing_width: Option<f64>,
    pub warnings: Vec<String>,
}

/// Default guard band (radians) for eigenvalues near the window edge.
pub const BOUNDARY_GUARD: f64 = 1e-6;

/// `E^U(Θ)` on a finite section.
///
/// `section` is the half-width `K` used to cut a lattice operator; dense
/// operators ignore it.
pub fn spectral_projection(
    u: &UnitaryOp,
    window: &SpectralWindow,
    method: ProjectionMethod,
    section: Option<usize>,
) -> Result<SpectralProjection> {
    match method {
        ProjectionMethod::Diagonalize => {
            let d = u.as_dense().ok_or_else(|| {
                Error::Incompatible("diagonalize needs a dense realization".into())
            })?;
            diagonalize_projection(&d.mat, window, BOUNDARY_GUARD)
        }
        ProjectionMethod::Fejer { order } => {
            if order == 0 {
                return Err(Error::InvalidParameter("Fejér order must be at least 1".into()));
            }
            let matrix = match (u.as_lattice(), u.as_dense()) {
                (Some(op), _) => {
                    let k = section.ok_or_else(|| {
                        Error::InvalidParameter("lattice projection needs a section size".into())
                    })?;
                    fejer_polynomial(op, window, order).section(k)
                }
                (None, Some(d)) => fejer_dense(&d.mat, window, order),
                _ => unreachable!(),
            };
            Ok(SpectralProjection {
                matrix,
                basis: None,
                eigenvalues: Vec::new(),
                smoothing_width: Some(TAU / (order as f64 + 1.0)),
                warnings: Vec::new(),
            })
        }
    }
}

/// Exact eigenprojection of a dense unitary onto the eigenvalues in `Θ`.
pub fn diagonalize_projection(
    w: &CMat,
    window: &SpectralWindow,
    guard: f64,
) -> Result<SpectralProjection> {
    let (vals, q) = linalg::unitary_eigen(w)?;
    let n = w.nrows();
    let mut keep = Vec::new();
    let mut warnings = Vec::new();
    for (j, z) in vals.iter().enumerate() {
        let phi = angle(*z);
        if window.boundary_distance(phi) < guard {
            warnings.push(format!(
                "eigenvalue angle {phi:.12} within {guard:e} of the window boundary"
            ));
        }
        if window.contains(phi) {
            keep.push(j);
        }
    }
    let basis = Mat::from_fn(n, keep.len(), |i, c| q[(i, keep[c])]);
    let matrix = &basis * basis.adjoint();
    Ok(SpectralProjection {
        matrix,
        eigenvalues: keep.iter().map(|&j| vals[j]).collect(),
        basis: Some(basis),
        smoothing_width: None,
        warnings,
    })
}

/// `Σ_{|n|≤N} (1 − |n|/(N+1)) ĉ_n U^n` as an exact lattice operator.
pub fn fejer_polynomial(u: &LatticeOp, window: &SpectralWindow, order: usize) -> LatticeOp {
    let mut terms = vec![LatticeOp::identity().scale(window.indicator_coefficient(0))];
    let mut pos = u.clone();
    let ustar = u.adjoint();
    let mut neg = ustar.clone();
    for n in 1..=order as i64 {
        let w = 1.0 - n as f64 / (order as f64 + 1.0);
        terms.push(pos.scale(window.indicator_coefficient(n) * w));
        terms.push(neg.scale(window.indicator_coefficient(-n) * w));
        pos = u.mul(&pos);
        neg = ustar.mul(&neg);
    }
    LatticeOp::sum(terms)
}

fn fejer_dense(w: &CMat, window: &SpectralWindow, order: usize) -> CMat {
    let n = w.nrows();
    let wstar = linalg::adjoint(w);
    let mut out = linalg::scale(&linalg::identity(n), window.indicator_coefficient(0));
    let mut pos = w.clone();
    let mut neg = wstar.clone();
    for k in 1..=order as i64 {
        let f = 1.0 - k as f64 / (order as f64 + 1.0);
        out += linalg::scale(&pos, window.indicator_coefficient(k) * f);
        out += linalg::scale(&neg, window.indicator_coefficient(-k) * f);
        pos = w * &pos;
        neg = &wstar * &neg;
    }
    out
}

/// Upper half circle `(0, π)`.
pub fn upper_half() -> SpectralWindow {
    SpectralWindow { lo: 0.0, hi: PI, base_point_excluded: None }
}

/// Number of eigenvalues of a dense unitary inside `Θ`.
pub fn count_in_window(vals: &[c64], window: &SpectralWindow) -> usize {
    vals.iter().filter(|z| **z != ZERO && window.contains(angle(**z))).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, I, ONE};
    use crate::operator::ComplexVector;

    #[test]
    fn arc_around_i_picks_one_eigenvalue() {
        let u = UnitaryOp::dense(diag(&[ONE, I, -ONE, -I]), 0, "diag").unwrap();
        let w = SpectralWindow::new(PI / 4.0, 3.0 * PI / 4.0).unwrap();
        let p = spectral_projection(&u, &w, ProjectionMethod::Diagonalize, None).unwrap();
        let mut expect = Mat::zeros(4, 4);
        expect[(1, 1)] = ONE;
        assert!(linalg::max_abs(&(&p.matrix - &expect)) < 1e-14);
    }

    #[test]
    fn punctured_circle_is_identity() {
        let u = UnitaryOp::dense(diag(&[I, -ONE, -I]), 0, "diag").unwrap();
        let w = SpectralWindow::punctured(0.0, 0.1).unwrap();
        let p = spectral_projection(&u, &w, ProjectionMethod::Diagonalize, None).unwrap();
        assert!(linalg::max_abs(&(&p.matrix - &linalg::identity(3))) < 1e-14);
    }

    #[test]
    fn fejer_shift_half_circle() {
        let u = UnitaryOp::lattice(LatticeOp::shift(), "shift").unwrap();
        let w = upper_half();
        let mut last = f64::INFINITY;
        for order in [4, 16, 64] {
            let e = fejer_polynomial(u.as_lattice().unwrap(), &w, order);
            let v = e.apply(&ComplexVector::delta(0)).unwrap();
            let dev = (v.get(0).re - 0.5).abs();
            assert!(dev <= last);
            last = dev;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn window_validation() {
        assert!(SpectralWindow::new(1.0, 1.0).is_err());
        assert!(SpectralWindow::new(0.0, TAU).is_err());
        let w = SpectralWindow::new(0.5, 2.0).unwrap();
        assert!(w.with_base_point(1.0).is_err());
        assert!(w.with_base_point(3.0).is_ok());
    }
}
