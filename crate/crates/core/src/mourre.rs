//! Mourre certificates on spectral windows, the virial identity, window
//! eigenvalue counts and perturbations `VU` with `V = e^{iB}`.

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, I, ONE};
use crate::models::ModelSection;
use crate::operator::{
    diagonalize_projection, ComplexVector, Diagonal, LatticeOp, SpectralWindow, BOUNDARY_GUARD,
};

#[derive(Debug, Clone, Serialize)]
pub struct VirialReport {
    pub eigenvalue: c64,
    pub eigen_residual: f64,
    pub virial_value: c64,
    pub tolerance: f64,
    pub pass: bool,
}

fn virial_report(phi_norm: f64, uphi: &[c64], phi: &[c64], form_phi: c64, tol: f64) -> Result<VirialReport> {
    let n2 = phi_norm * phi_norm;
    let theta = linalg::dot(phi, uphi) / n2;
    let theta = theta / theta.norm();
    let r: Vec<c64> = uphi.iter().zip(phi).map(|(u, p)| u - theta * p).collect();
    let eigen_residual = linalg::vec_norm(&r) / phi_norm;
    if eigen_residual > tol / 10.0 {
        return Err(Error::Precondition(format!(
            "virial_check: vector is not an approximate eigenvector (residual {eigen_residual:.3e} > {:.3e})",
            tol / 10.0
        )));
    }
    let virial_value = form_phi / n2;
    Ok(VirialReport {
        eigenvalue: theta,
        eigen_residual,
        virial_value,
        tolerance: tol,
        pass: virial_value.norm() <= tol,
    })
}

/// `⟨φ, U*[A,U]φ⟩/‖φ‖²` for an approximate eigenvector of a dense `U`.
pub fn virial_check(u: &CMat, a: &CMat, phi: &[c64], tol: f64) -> Result<VirialReport> {
    let norm = linalg::vec_norm(phi);
    if norm == 0.0 {
        return Err(Error::Precondition("virial_check: zero vector".into()));
    }
    let uphi = linalg::LinOp::apply(u, phi);
    // ⟨φ, U*[A,U]φ⟩ = ⟨Uφ, AUφ⟩ − ⟨Uφ, UAφ⟩
    let auphi = linalg::LinOp::apply(a, &uphi);
    let uaphi = linalg::LinOp::apply(u, &linalg::LinOp::apply(a, phi));
    let form_phi = linalg::dot(&uphi, &auphi) - linalg::dot(&uphi, &uaphi);
    virial_report(norm, &uphi, phi, form_phi, tol)
}

/// Virial value on the lattice, with `U*[A,U]` applied exactly.
pub fn virial_check_lattice(
    u: &LatticeOp,
    a: &Diagonal,
    phi: &ComplexVector,
    tol: f64,
) -> Result<VirialReport> {
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(Error::Precondition("virial_check: zero vector".into()));
    }
    let uphi = u.apply(phi)?;
    let form_phi = phi.inner(&u.adjoint().mul(&u.diag_commutator(a)).apply(phi)?);
    let lo = phi.offset.min(uphi.offset);
    let hi = phi.hi().max(uphi.hi());
    let grab = |v: &ComplexVector| (lo..=hi).map(|s| v.get(s)).collect::<Vec<_>>();
    virial_report(norm, &grab(&uphi), &grab(phi), form_phi, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct Allowance {
    pub rank: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MourreCertificate {
    pub window: SpectralWindow,
    pub a_estimate: f64,
    pub compact_allowance: Allowance,
    pub min_eig_after_allowance: f64,
    pub section_size: usize,
    pub interior_margin: usize,
    /// Dimension of `ran E^U(Θ)` on the section.
    pub range_dim: usize,
    /// Ascending spectrum of the compressed commutator form.
    pub compressed_spectrum: Vec<f64>,
    pub vacuous: bool,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Compress `form` to `ran E^U(Θ)` and read off the Mourre constant after
/// absorbing the lowest `allowance_rank` eigenvalues into a finite-rank
/// allowance.
pub fn certify_form(
    unitary: &CMat,
    form: &CMat,
    window: &SpectralWindow,
    allowance_rank: usize,
    interior_margin: usize,
) -> Result<MourreCertificate> {
    let proj = diagonalize_projection(unitary, window, BOUNDARY_GUARD)?;
    let q = proj.basis.expect("diagonalize yields a basis");
    let range_dim = q.ncols();
    let mut cert = MourreCertificate {
        window: *window,
        a_estimate: 0.0,
        compact_allowance: Allowance { rank: allowance_rank, norm: 0.0 },
        min_eig_after_allowance: 0.0,
        section_size: unitary.nrows(),
        interior_margin,
        range_dim,
        compressed_spectrum: Vec::new(),
        vacuous: false,
        pass: false,
        warnings: proj.warnings,
    };
    if range_dim <= allowance_rank {
        cert.vacuous = true;
        cert.warnings.push(format!(
            "range of the window projection has dimension {range_dim}, allowance rank {allowance_rank}"
        ));
        return Ok(cert);
    }
    let (c, _) = linalg::hermitize(&(q.adjoint() * form * &q));
    let (vals, vecs) = linalg::hermitian_eigen(&c)?;
    let a = vals[allowance_rank];
    // K = Σ_{j < r} (a − λ_j) v_j v_j*, so C + K ≥ a on the range.
    let mut k = Mat::<c64>::zeros(range_dim, range_dim);
    for j in 0..allowance_rank {
        let w = c64::new(a - vals[j], 0.0);
        for r in 0..range_dim {
            for s in 0..range_dim {
                k[(r, s)] += w * vecs[(r, j)] * vecs[(s, j)].conj();
            }
        }
    }
    let after = linalg::hermitian_eigenvalues(&linalg::hermitize(&(c + k)).0)?[0];
    cert.a_estimate = a;
    cert.compact_allowance.norm = if allowance_rank > 0 { a - vals[0] } else { 0.0 };
    cert.min_eig_after_allowance = after;
    cert.compressed_spectrum = vals;
    cert.pass = a > 0.0 && after >= a - 1e-8;
    Ok(cert)
}

/// Mourre certificate on a model section, using the section's commutator
/// form.
pub fn certify_mourre(
    section: &ModelSection,
    window: &SpectralWindow,
    allowance_rank: usize,
) -> Result<MourreCertificate> {
    certify_form(&section.unitary, &section.form, window, allowance_rank, section.interior_margin)
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowCount {
    pub count: usize,
    /// Eigenvectors that survive the lattice Weyl test (only for lattice
    /// operators).
    pub genuine: Option<usize>,
    pub flag: Option<String>,
}

/// Number of eigenvalues of a dense unitary inside `Θ`.
pub fn count_window_eigenvalues(u: &CMat, window: &SpectralWindow) -> Result<usize> {
    let (vals, _) = linalg::unitary_eigen(u)?;
    Ok(vals.iter().filter(|z| window.contains(linalg::angle(**z))).count())
}

/// Count section eigenvalues in `Θ` and test each eigenvector against the
/// unbounded lattice operator: an eigenvector `φ` of the section is kept
/// as genuine only if `‖Uφ − λφ‖ ≤ tol` on the lattice.
pub fn count_window_eigenvalues_lattice(
    op: &LatticeOp,
    section: &CMat,
    window: &SpectralWindow,
    tol: f64,
) -> Result<WindowCount> {
    let n = section.nrows();
    let k = n / 2;
    let (vals, vecs) = linalg::unitary_eigen(section)?;
    let mut count = 0;
    let mut genuine = 0;
    for (j, z) in vals.iter().enumerate() {
        if !window.contains(linalg::angle(*z)) {
            continue;
        }
        count += 1;
        let phi = ComplexVector::from_section(linalg::column(&vecs, j), k);
        let r = op.apply(&phi)?.axpy(-*z, &phi).norm();
        if r <= tol {
            genuine += 1;
        }
    }
    let flag = (genuine < count).then(|| {
        format!(
            "open-boundary artifact: {} of {count} section eigenvectors fail the lattice test",
            count - genuine
        )
    });
    Ok(WindowCount { count, genuine: Some(genuine), flag })
}

/// `V = e^{iB}` for a Hermitian `B`, with the series for `[A, V]`.
#[derive(Debug, Clone)]
pub struct ExponentialPerturbation {
    pub b: CMat,
    pub v: CMat,
    /// Numerical rank of `B`.
    pub rank: usize,
    pub series_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesCommutator {
    pub terms: usize,
    pub difference: f64,
    #[serde(skip)]
    pub series: CMat,
    #[serde(skip)]
    pub direct: CMat,
}

const SERIES_MAX_TERMS: usize = 400;

fn numerical_rank(vals: &[f64]) -> usize {
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    vals.iter().filter(|v| v.abs() > 1e-12 * top.max(1.0)).count()
}

pub fn exponential_perturbation(b: &CMat, series_tol: f64) -> Result<ExponentialPerturbation> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::Dimension { expected: n, found: b.ncols() });
    }
    let scale = linalg::max_abs(b).max(f64::MIN_POSITIVE);
    let asym = linalg::max_abs(&(b - b.adjoint()));
    if asym > 1e-12 * scale {
        return Err(Error::NotHermitian { asymmetry: asym, tolerance: 1e-12 * scale });
    }
    if !(series_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("series tolerance {series_tol} must be positive")));
    }
    let (vals, _) = linalg::hermitian_eigen(b)?;
    let v = linalg::hermitian_function(b, linalg::cis)?;
    let defect = linalg::unitarity_defect(&v);
    if defect > 1e-12 * n.max(1) as f64 {
        return Err(Error::NotUnitary { defect, tolerance: 1e-12 * n.max(1) as f64 });
    }
    Ok(ExponentialPerturbation { b: b.clone(), v, rank: numerical_rank(&vals), series_tol })
}

impl ExponentialPerturbation {
    /// `[A, e^{iB}] = Σ_{k≥1} (i^k/k!) Σ_{ℓ<k} B^{k−1−ℓ}[A,B]B^ℓ`, compared
    /// with `AV − VA`.
    pub fn commutator_with(&self, a: &CMat) -> Result<SeriesCommutator> {
        let n = self.b.nrows();
        let c = linalg::commutator(a, &self.b);
        let direct = linalg::commutator(a, &self.v);
        let c_norm = linalg::frobenius(&c);
        let mut series = Mat::<c64>::zeros(n, n);
        if c_norm == 0.0 {
            let difference = linalg::operator_norm(&(&series - &direct))?;
            return Ok(SeriesCommutator { terms: 0, difference, series, direct });
        }
        // T_k = Σ_{ℓ<k} B^{k−1−ℓ} C B^ℓ with T_{k+1} = B T_k + C B^k.
        let mut t = c.clone();
        let mut b_pow = self.b.clone();
        let mut coef = I;
        for k in 1..=SERIES_MAX_TERMS {
            let term = linalg::scale(&t, coef);
            let size = linalg::frobenius(&term);
            series += &term;
            if size < self.series_tol * c_norm {
                let difference = linalg::operator_norm(&(&series - &direct))?;
                return Ok(SeriesCommutator { terms: k, difference, series, direct });
            }
            t = &self.b * &t + &c * &b_pow;
            b_pow = &b_pow * &self.b;
            coef = coef * I / (k as f64 + 1.0);
        }
        Err(Error::SeriesDivergence {
            terms: SERIES_MAX_TERMS,
            term_norm: linalg::frobenius(&linalg::scale(&t, coef)),
        })
    }

    /// `‖V − 1‖`.
    pub fn defect_norm(&self) -> Result<f64> {
        linalg::operator_norm(&(&self.v - linalg::identity(self.v.nrows())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbedCertificate {
    pub certificate: MourreCertificate,
    pub rank_v_minus_one: usize,
    pub v_defect_norm: f64,
    /// `‖E((VU)*[A,VU] − U*[A,U])E‖` on the range of the new window.
    pub difference_norm: f64,
    /// `‖[A,V]‖ + 2‖V−1‖·‖[A,U]‖`.
    pub difference_bound: f64,
}

/// Certificate for `VU` on `Θ′ ⋐ Θ`.
///
/// `v` is given on the section. The commutator form of `VU` is
/// `U*V*[A,V]U + U*[A,U]`, with `U*[A,U]` taken from the section form.
pub fn perturbed_certificate(
    section: &ModelSection,
    v: &CMat,
    window: &SpectralWindow,
    base: &MourreCertificate,
) -> Result<PerturbedCertificate> {
    let n = section.dim();
    if v.nrows() != n {
        return Err(Error::Dimension { expected: n, found: v.nrows() });
    }
    if !base.window.compactly_contains(window) && base.window != *window {
        return Err(Error::Precondition(format!(
            "perturbed_certificate: window ({}, {}) is not compactly inside ({}, {})",
            window.lo, window.hi, base.window.lo, base.window.hi
        )));
    }
    let d = v - linalg::identity(n);
    let sv: Vec<f64> = {
        let (vals, _) = linalg::hermitian_eigen(&linalg::hermitize(&(d.adjoint() * &d)).0)?;
        vals.into_iter().map(|x| x.max(0.0).sqrt()).collect()
    };
    let rank = numerical_rank(&sv);
    if rank > n / 4 {
        return Err(Error::Precondition(format!(
            "perturbed_certificate: V − 1 has rank {rank} on a section of size {n}"
        )));
    }
    let v_defect_norm = sv.iter().fold(0.0f64, |m, x| m.max(*x));
    let u = &section.unitary;
    let av = linalg::commutator(&section.conjugate, v);
    let extra = u.adjoint() * v.adjoint() * &av * u;
    let form = linalg::hermitize(&(&section.form + &extra)).0;
    let vu = v * u;
    let certificate = certify_form(
        &vu,
        &form,
        window,
        base.compact_allowance.rank + rank,
        section.interior_margin,
    )?;
    let difference_norm = match diagonalize_projection(&vu, window, BOUNDARY_GUARD)?.basis {
        Some(q) if q.ncols() > 0 => linalg::operator_norm(&(q.adjoint() * &extra * &q))?,
        _ => 0.0,
    };
    let difference_bound = linalg::operator_norm(&av)?
        + 2.0 * v_defect_norm * linalg::operator_norm(&section.commutator())?;
    Ok(PerturbedCertificate {
        certificate,
        rank_v_minus_one: rank,
        v_defect_norm,
        difference_norm,
        difference_bound,
    })
}

/// `πP₀` on a centered section of half-width `k`.
pub fn rank_one_generator(k: usize) -> CMat {
    let n = 2 * k + 1;
    Mat::from_fn(n, n, |r, c| if r == k && c == k { c64::new(std::f64::consts::PI, 0.0) } else { c64::new(0.0, 0.0) })
}

/// `1 − 2P₀` on the same section, the closed form of `e^{iπP₀}`.
pub fn rank_one_reflection(k: usize) -> CMat {
    let mut v = linalg::identity(2 * k + 1);
    v[(k, k)] = -ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;

    #[test]
    fn virial_exact_eigenvector() {
        let u = diag(&[ONE, I]);
        let mut a = linalg::real_diag(&[0.3, -1.0]);
        a[(0, 1)] = c64::new(0.2, 0.5);
        a[(1, 0)] = c64::new(0.2, -0.5);
        let r = virial_check(&u, &a, &[ONE, c64::new(0.0, 0.0)], 1e-8).unwrap();
        assert!(r.virial_value.norm() < 1e-14);
    }

    #[test]
    fn virial_rejects_non_eigenvector() {
        let u = diag(&[ONE, I]);
        let a = linalg::real_diag(&[1.0, 2.0]);
        assert!(matches!(virial_check(&u, &a, &[ONE, ONE], 1e-8), Err(Error::Precondition(_))));
    }

    #[test]
    fn count_three_of_eight() {
        let phases: Vec<c64> = (0..8).map(|j| linalg::cis(0.7 * j as f64 + 0.1)).collect();
        let w = SpectralWindow::new(0.0, 1.6).unwrap();
        assert_eq!(count_window_eigenvalues(&diag(&phases), &w).unwrap(), 3);
    }

    #[test]
    fn zero_generator_gives_identity() {
        let p = exponential_perturbation(&Mat::zeros(3, 3), 1e-14).unwrap();
        assert!(linalg::max_abs(&(&p.v - linalg::identity(3))) < 1e-15);
        let c = p.commutator_with(&linalg::real_diag(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(c.difference, 0.0);
    }

    #[test]
    fn rank_one_reflection_closed_form() {
        let p = exponential_perturbation(&rank_one_generator(3), 1e-14).unwrap();
        assert!(linalg::max_abs(&(&p.v - rank_one_reflection(3))) < 1e-14);
        assert_eq!(p.rank, 1);
    }

    #[test]
    fn commuting_pair_fails_certificate() {
        let u = diag(&[linalg::cis(0.5), linalg::cis(1.0)]);
        let form = Mat::zeros(2, 2);
        let w = SpectralWindow::new(0.0, 2.0).unwrap();
        let c = certify_form(&u, &form, &w, 0, 0).unwrap();
        assert_eq!(c.a_estimate, 0.0);
        assert!(!c.pass);
    }
}
