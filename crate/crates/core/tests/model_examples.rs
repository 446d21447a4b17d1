use std::f64::consts::{PI, TAU};

use faer::c64;
use mourre_core::lap::delta_kernel;
use mourre_core::linalg::{self, unitarity_defect};
use mourre_core::models::{
    mourre_constant_cocycle, planted_eigenvalue, CocycleModel, CommutatorModel, DilationModel, FreeEvolutionModel,
    ShiftModel,
};
use mourre_core::mourre::{
    certify_form, certify_mourre, count_window_eigenvalues_lattice, perturbed_certificate, rank_one_reflection,
    virial_check,
};
use mourre_core::operator::{Operator, SpectralWindow};
use mourre_core::regularity::{classify, log_grid, DivergenceFlag};
use mourre_core::Error;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn cos_h() -> Vec<(i64, c64)> {
    vec![(1, c64::new(0.0, -1.0 / (4.0 * PI)))]
}

#[test]
fn dilation_form_is_constant() {
    let m = DilationModel::build(0.1, 0.05, 20).unwrap();
    let sec = m.section(20).unwrap();
    for i in 0..sec.dim() {
        for j in 0..sec.dim() {
            let want = if i == j { m.expected_form() } else { 0.0 };
            assert!((sec.form[(i, j)] - c64::new(want, 0.0)).norm() < 1e-12);
        }
    }
    assert!((m.expected_form() - 0.2).abs() < 1e-15);
}

#[test]
fn free_evolution_section_is_unitary() {
    let m = FreeEvolutionModel::build(1.0, 8.0, 256).unwrap();
    let sec = m.section(0).unwrap();
    assert_eq!(sec.dim(), 256);
    assert!(unitarity_defect(&sec.unitary) < 1e-12);
    assert!(FreeEvolutionModel::build(1.0, 8.0, 4).is_err());
}

#[test]
fn trivial_cocycle_has_form_two_pi() {
    let m = CocycleModel::build(1, &[], golden(), 24).unwrap();
    let r = mourre_constant_cocycle(&m, 1).unwrap();
    assert!((r.min_eig - TAU).abs() < 1e-9);
}

#[test]
fn negative_winding_keeps_a_positive_bound() {
    let m = CocycleModel::build(-1, &cos_h(), golden(), 24).unwrap();
    let r = mourre_constant_cocycle(&m, 8).unwrap();
    assert!(r.min_eig >= PI - r.tolerance, "{r:?}");
}

#[test]
fn averaged_form_approaches_the_winding() {
    let mut last = f64::INFINITY;
    for n in [3, 8, 21] {
        let m = CocycleModel::build(1, &cos_h(), golden(), 24).unwrap();
        let r = mourre_constant_cocycle(&m, n).unwrap();
        let gap = TAU - r.min_eig;
        assert!(gap <= TAU * r.ergodic_bound + r.tolerance, "n = {n}: {r:?}");
        assert!(r.ergodic_bound <= last + 1e-12);
        last = r.ergodic_bound;
    }
}

#[test]
fn scaled_number_operator_transfers_half_its_constant() {
    // A = c·N with the shift gives U*[A,U] = c.
    let shift = ShiftModel::build().unwrap();
    let sec = shift.section(16).unwrap();
    let c = 0.7;
    let form = linalg::scale(&sec.form, c64::new(c, 0.0));
    let cert = certify_form(&sec.unitary, &form, &SpectralWindow::new(0.5, 2.5).unwrap(), 0, 0).unwrap();
    assert!(cert.a_estimate >= c / 2.0);
    assert!((cert.a_estimate - c).abs() < 1e-12);
}

#[test]
fn empty_window_is_vacuous() {
    let shift = ShiftModel::build().unwrap();
    let sec = shift.section(4).unwrap();
    // Eigenphases of the twisted closure sit at (π/2 + 2πj)/9, spaced by 0.698.
    let cert = certify_mourre(&sec, &SpectralWindow::new(0.2, 0.3).unwrap(), 0).unwrap();
    assert!(cert.vacuous);
    assert_eq!(cert.range_dim, 0);
}

#[test]
fn virial_holds_on_the_planted_eigenvector() {
    let m = planted_eigenvalue(0.7).unwrap();
    let sec = m.inner.section(16).unwrap();
    assert_eq!(sec.dim(), 33);
    let phi: Vec<c64> = (0..33).map(|i| if i == 16 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }).collect();
    let v = virial_check(&sec.unitary, &sec.conjugate, &phi, 1e-10).unwrap();
    assert!(v.pass, "{v:?}");
}

#[test]
fn planted_eigenvalue_is_counted_and_genuine() {
    let m = planted_eigenvalue(0.7).unwrap();
    let sec = m.inner.section(24).unwrap();
    let w = SpectralWindow::new(0.65, 0.75).unwrap();
    let c = count_window_eigenvalues_lattice(m.inner.op(), &sec.unitary, &w, 1e-8).unwrap();
    assert!(c.count >= 1);
    assert!(c.genuine.unwrap() >= 1);
}

#[test]
fn shift_section_eigenvalues_are_flagged() {
    let shift = ShiftModel::build().unwrap();
    let sec = shift.section(24).unwrap();
    let w = SpectralWindow::new(0.5, 2.5).unwrap();
    let c = count_window_eigenvalues_lattice(shift.inner.op(), &sec.unitary, &w, 1e-8).unwrap();
    assert!(c.count >= 1);
    assert_eq!(c.genuine, Some(0));
    assert!(c.flag.is_some());
}

#[test]
fn perturbed_certificate_cases() {
    let shift = ShiftModel::build().unwrap();
    let sec = shift.section(24).unwrap();
    let n = sec.dim();
    let outer = SpectralWindow::new(0.2, TAU - 0.2).unwrap();
    let inner = SpectralWindow::new(0.4, TAU - 0.4).unwrap();
    let base = certify_mourre(&sec, &outer, 0).unwrap();

    let same = perturbed_certificate(&sec, &linalg::identity(n), &inner, &base).unwrap();
    assert_eq!(same.rank_v_minus_one, 0);
    assert!(same.difference_norm < 1e-12);

    let refl = perturbed_certificate(&sec, &rank_one_reflection(24), &inner, &base).unwrap();
    assert!(refl.rank_v_minus_one <= 2);

    let full = linalg::scale(&linalg::identity(n), c64::new(-1.0, 0.0));
    assert!(matches!(perturbed_certificate(&sec, &full, &inner, &base), Err(Error::Precondition(_))));
}

#[test]
fn shift_delta_kernel_at_one_half() {
    let shift = ShiftModel::build().unwrap();
    let sec = shift.section(8).unwrap();
    let d = delta_kernel(&sec.unitary, c64::new(0.5, 0.0)).unwrap();
    assert!(d.min_eig >= -1e-12);
    assert!(d.factorization_residual < 1e-12);
}

#[test]
fn cos_cocycle_regularity_converges() {
    let m = CocycleModel::build(1, &cos_h(), golden(), 32).unwrap();
    let u = Operator::Lattice(m.op().clone());
    let a = m.conjugate().clone();
    let r = classify(|_| Ok((u.clone(), a.clone())), &log_grid(1e-4, 48), &[32, 64, 128]).unwrap();
    assert_eq!(r.divergence_flag.c1plus0, DivergenceFlag::Converged, "{:?}", r.estimates_by_k);
    assert!(r.c11_integrand.iter().chain(&r.c1plus0_integrand).all(|v| *v >= 0.0));
}
