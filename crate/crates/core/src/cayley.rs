//! Cayley transform `H_θ = −i(1+θ̄U)(1−θ̄U)^{-1}` of a unitary, built from its
//! bounded resolvent, and the commutator identities it satisfies.

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, angle, CMat, I, ONE};
use crate::models::ModelSection;

/// Default guard band (radians) between `θ` and the spectrum of `U`.
pub const CAYLEY_GUARD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CayleyOperator {
    pub base_point: c64,
    pub source: CMat,
    /// `−i(1+θ̄U)(1−θ̄U)^{-1}`, symmetrized; absent when `θ` is within the
    /// guard band of `σ(U)`.
    pub dense_h: Option<CMat>,
    /// Largest entry of `H − H*` removed by the symmetrization.
    pub asymmetry: Option<f64>,
    /// `(H − i)^{-1} = (i/2)(1 − θ̄U)`, always available.
    pub resolvent_at_i: CMat,
    /// Angular distance from `θ` to the nearest eigenvalue of `U`.
    pub spectral_distance: f64,
    pub condition: Option<f64>,
    pub flagged: Option<String>,
}

fn one_minus(u: &CMat, theta: c64) -> CMat {
    linalg::identity(u.nrows()) - linalg::scale(u, theta.conj())
}

fn one_plus(u: &CMat, theta: c64) -> CMat {
    linalg::identity(u.nrows()) + linalg::scale(u, theta.conj())
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

pub fn build_cayley(u: &CMat, theta: c64) -> Result<CayleyOperator> {
    build_cayley_guarded(u, theta, CAYLEY_GUARD)
}

pub fn build_cayley_guarded(u: &CMat, theta: c64, guard: f64) -> Result<CayleyOperator> {
    let n = u.nrows();
    if (theta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("base point {theta} is not unimodular")));
    }
    let resolvent_at_i = linalg::scale(&one_minus(u, theta), c64::new(0.0, 0.5));
    let (vals, _) = linalg::unitary_eigen(u)?;
    let ta = angle(theta);
    let spectral_distance = vals
        .iter()
        .map(|z| circle_distance(angle(*z), ta))
        .fold(f64::INFINITY, f64::min);
    let mut out = CayleyOperator {
        base_point: theta,
        source: u.clone(),
        dense_h: None,
        asymmetry: None,
        resolvent_at_i,
        spectral_distance,
        condition: None,
        flagged: None,
    };
    if n == 0 {
        out.dense_h = Some(Mat::zeros(0, 0));
        return Ok(out);
    }
    if spectral_distance <= guard {
        out.flagged = Some(
            Error::BasePointInSpectrum { distance: spectral_distance, guard }.to_string(),
        );
        return Ok(out);
    }
    let (x, cond) = linalg::solve(&one_minus(u, theta), &one_plus(u, theta))?;
    let (h, asym) = linalg::hermitize(&linalg::scale(&x, -I));
    out.dense_h = Some(h);
    out.asymmetry = Some(asym);
    out.condition = Some(cond);
    Ok(out)
}

impl CayleyOperator {
    pub fn h(&self) -> Result<&CMat> {
        self.dense_h.as_ref().ok_or_else(|| {
            Error::BasePointInSpectrum { distance: self.spectral_distance, guard: CAYLEY_GUARD }
        })
    }

    /// `‖(1−θ̄U)H + i(1+θ̄U)‖`, the defect of the defining relation.
    pub fn relation_residual(&self) -> Result<f64> {
        let h = self.h()?;
        let r = one_minus(&self.source, self.base_point) * h
            + linalg::scale(&one_plus(&self.source, self.base_point), I);
        linalg::operator_norm(&r)
    }
}

/// Stereographic map `λ = −i(1+θ̄θ′)/(1−θ̄θ′)`.
pub fn spectral_map(theta_p: c64, theta: c64) -> Result<f64> {
    let w = theta.conj() * theta_p;
    let den = ONE - w;
    if den.norm() < 1e-15 {
        return Err(Error::MapsToInfinity);
    }
    Ok((-I * (ONE + w) / den).re)
}

/// Inverse map `θ′ = θ(λ+i)/(λ−i)`.
pub fn inverse_spectral_map(lambda: f64, theta: c64) -> c64 {
    theta * (c64::new(lambda, 1.0) / c64::new(lambda, -1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventReport {
    pub residual: Option<f64>,
    pub condition: f64,
}

/// `(H_θ − z)^{-1} = −(1−θ̄U)[(i+z) − θ̄(z−i)U]^{-1}`.
pub fn cayley_resolvent(u: &CMat, theta: c64, z: c64) -> Result<(CMat, f64)> {
    if z.im == 0.0 {
        return Err(Error::InvalidParameter(format!("resolvent point {z} is real")));
    }
    let n = u.nrows();
    let m = linalg::scale(&linalg::identity(n), I + z) - linalg::scale(u, theta.conj() * (z - I));
    let (minv, cond) = linalg::inverse(&m)?;
    Ok((linalg::scale(&(one_minus(u, theta) * minv), -ONE), cond))
}

/// Resolvent with the residual `‖(H − z)R − I‖` when `H` exists.
pub fn cayley_resolvent_checked(c: &CayleyOperator, z: c64) -> Result<(CMat, ResolventReport)> {
    let (r, condition) = cayley_resolvent(&c.source, c.base_point, z)?;
    let residual = match &c.dense_h {
        Some(h) => {
            let n = h.nrows();
            let hz = h - linalg::scale(&linalg::identity(n), z);
            Some(linalg::operator_norm(&(hz * &r - linalg::identity(n)))?)
        }
        None => None,
    };
    Ok((r, ResolventReport { residual, condition }))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub model: String,
    pub theta: f64,
    pub identity: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub condition: Option<f64>,
    pub pass: bool,
}

/// `‖[A,(i/2)(1−θ̄U)] + (iθ̄/2)[A,U]‖`.
pub fn verify_identity_a(u: &CMat, a: &CMat, theta: c64) -> Result<f64> {
    let r = linalg::scale(&one_minus(u, theta), c64::new(0.0, 0.5));
    let lhs = linalg::commutator(a, &r);
    let rhs = linalg::scale(&linalg::commutator(a, u), I * theta.conj() * 0.5);
    linalg::operator_norm(&(lhs + rhs))
}

/// `‖i(HA − AH) − 2{(1−θ̄U)^{-1}}* U*[A,U] (1−θ̄U)^{-1}‖` and the condition
/// number of `1 − θ̄U`.
pub fn verify_identity_b(c: &CayleyOperator, a: &CMat) -> Result<(f64, f64)> {
    let h = c.h()?;
    let u = &c.source;
    let (r, cond) = linalg::inverse(&one_minus(u, c.base_point))?;
    let lhs = linalg::scale(&linalg::commutator(h, a), I);
    let form = u.adjoint() * linalg::commutator(a, u);
    let rhs = linalg::scale(&(r.adjoint() * form * &r), c64::new(2.0, 0.0));
    Ok((linalg::operator_norm(&(lhs - rhs))?, cond))
}

pub fn identity_a_report(label: &str, u: &CMat, a: &CMat, theta: c64) -> Result<IdentityReport> {
    let residual = verify_identity_a(u, a, theta)?;
    let tolerance = 1e-12 * u.nrows() as f64;
    Ok(IdentityReport {
        model: label.to_string(),
        theta: angle(theta),
        identity: "a",
        residual,
        tolerance,
        condition: None,
        pass: residual <= tolerance,
    })
}

pub fn identity_b_report(label: &str, u: &CMat, a: &CMat, theta: c64) -> Result<IdentityReport> {
    let c = build_cayley(u, theta)?;
    let (residual, cond) = verify_identity_b(&c, a)?;
    let tolerance = 1e-8 * cond;
    Ok(IdentityReport {
        model: label.to_string(),
        theta: angle(theta),
        identity: "b",
        residual,
        tolerance,
        condition: Some(cond),
        pass: residual <= tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub lhs_min_eig: Option<f64>,
    pub bound: f64,
    pub rank: usize,
    pub vacuous: bool,
    pub pass: bool,
}

/// `[iH_θ, A]` from the commutator form: `2{(1−θ̄U)^{-1}}* M (1−θ̄U)^{-1}`.
pub fn transported_commutator(section: &ModelSection, theta: c64) -> Result<CMat> {
    let (r, _) = linalg::inverse(&one_minus(&section.unitary, theta))?;
    let out = r.adjoint() * &section.form * &r;
    Ok(linalg::hermitize(&linalg::scale(&out, c64::new(2.0, 0.0))).0)
}

/// Compress `[iH_θ, A]` to `E^{H_θ}([lo, hi])` and compare its bottom with
/// `a/2`.
pub fn mourre_transfer(
    section: &ModelSection,
    theta: c64,
    interval: (f64, f64),
    a: f64,
) -> Result<TransferReport> {
    let c = build_cayley(&section.unitary, theta)?;
    let h = c.h()?;
    let (vals, q) = linalg::hermitian_eigen(h)?;
    let keep: Vec<usize> =
        (0..vals.len()).filter(|&j| vals[j] >= interval.0 && vals[j] <= interval.1).collect();
    let bound = a / 2.0;
    if keep.is_empty() {
        return Ok(TransferReport { lhs_min_eig: None, bound, rank: 0, vacuous: true, pass: true });
    }
    let n = h.nrows();
    let basis = Mat::from_fn(n, keep.len(), |i, c| q[(i, keep[c])]);
    let ih_a = transported_commutator(section, theta)?;
    let (compressed, _) = linalg::hermitize(&(basis.adjoint() * ih_a * &basis));
    let min = linalg::hermitian_eigenvalues(&compressed)?[0];
    Ok(TransferReport {
        lhs_min_eig: Some(min),
        bound,
        rank: keep.len(),
        vacuous: false,
        pass: min >= bound - 1e-8,
    })
}

/// Spectral projection of a Hermitian matrix onto eigenvalues in `(lo, hi)`.
pub fn hermitian_projection(h: &CMat, lo: f64, hi: f64) -> Result<CMat> {
    let (vals, q) = linalg::hermitian_eigen(h)?;
    let n = h.nrows();
    let keep: Vec<usize> = (0..n).filter(|&j| vals[j] > lo && vals[j] < hi).collect();
    let basis = Mat::from_fn(n, keep.len(), |i, c| q[(i, keep[c])]);
    Ok(&basis * basis.adjoint())
}

/// Image `J` of the arc `(φ_lo, φ_hi)` under the spectral map (the arc
/// must avoid `θ`). Returned as an ordered real interval.
pub fn arc_image(lo: f64, hi: f64, theta: c64) -> Result<(f64, f64)> {
    let a = spectral_map(linalg::cis(lo), theta)?;
    let b = spectral_map(linalg::cis(hi), theta)?;
    Ok(if a <= b { (a, b) } else { (b, a) })
}
