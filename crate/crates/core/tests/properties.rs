//! Randomized invariants over dense pairs and lattice operators.

use std::f64::consts::{PI, TAU};

use faer::{c64, Mat};
use mourre_core::cayley::{cayley_resolvent, inverse_spectral_map, spectral_map, verify_identity_a};
use mourre_core::lap::{delta_kernel, weighted_resolvent_norm, weight_matrix};
use mourre_core::linalg::{self, cis, CMat};
use mourre_core::models::{CocycleModel, CommutatorModel, ShiftModel};
use mourre_core::mourre::{
    certify_form, certify_mourre, exponential_perturbation, perturbed_certificate,
};
use mourre_core::operator::{
    commutator, diagonalize_projection, heisenberg_conjugate, ComplexVector, ConjugateOp, DenseOperator,
    Operator, SpectralWindow, BOUNDARY_GUARD,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let x = Mat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    linalg::scale(&(&x + x.adjoint()), c64::new(0.5 * scale, 0.0))
}

fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    linalg::hermitian_function(&hermitian(rng, n, 3.0), cis).unwrap()
}

fn sorted_angles(u: &CMat) -> Vec<f64> {
    let (vals, _) = linalg::unitary_eigen(u).unwrap();
    let mut a: Vec<f64> = vals.iter().map(|z| z.arg().rem_euclid(TAU)).collect();
    a.sort_by(f64::total_cmp);
    a
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 16, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectra_of_uv_and_vu_agree(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v) = (unitary(&mut rng, n), unitary(&mut rng, n));
        let a = sorted_angles(&(&u * &v));
        let b = sorted_angles(&(&v * &u));
        // Compare as multisets on the circle.
        for x in &a {
            let d = b.iter().map(|y| circular_gap(*x, *y)).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-9, "angle {x} missing, nearest at {d}");
        }
    }

    #[test]
    fn delta_kernel_is_a_positive_gram_product(seed in any::<u64>(), n in 1usize..16, r in 0.05f64..0.95, phi in 0.0f64..TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let d = delta_kernel(&u, c64::from_polar(r, phi)).unwrap();
        prop_assert!(d.factorization_residual <= 1e-10 * (1.0 + 1.0 / (1.0 - r)).powi(2));
        prop_assert!(d.min_eig >= -1e-10);
    }

    #[test]
    fn spectral_map_round_trips(phi in 0.0f64..TAU, lambda in -1e3f64..1e3) {
        let theta = cis(phi);
        let back = spectral_map(inverse_spectral_map(lambda, theta), theta).unwrap();
        prop_assert!((back - lambda).abs() <= 1e-12 * lambda.abs().max(1.0) * (1.0 + lambda * lambda).sqrt());
    }

    #[test]
    fn cayley_resolvent_is_bounded_by_distance_to_the_axis(seed in any::<u64>(), n in 2usize..16, re in -5.0f64..5.0, im in 0.05f64..3.0, sign in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let theta = linalg::gap_point(&u).unwrap();
        let im = if sign { im } else { -im };
        let (r, _) = cayley_resolvent(&u, theta, c64::new(re, im)).unwrap();
        prop_assert!(linalg::operator_norm(&r).unwrap() <= (1.0 + 1e-8) / im.abs());
    }

    #[test]
    fn identity_a_holds_on_random_pairs(seed in any::<u64>(), n in 1usize..24, phi in 0.0f64..TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let a = hermitian(&mut rng, n, 4.0);
        prop_assert!(verify_identity_a(&u, &a, cis(phi)).unwrap() <= 1e-12 * n as f64);
    }

    #[test]
    fn commutator_is_antisymmetric_under_adjoint(seed in any::<u64>(), n in 1usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let a = hermitian(&mut rng, n, 2.0);
        // [A,U]* = −[A,U*] for Hermitian A.
        let lhs = linalg::commutator(&a, &u).adjoint().to_owned();
        let rhs = linalg::commutator(&a, &u.adjoint().to_owned());
        prop_assert!(linalg::max_abs(&(lhs + rhs)) <= 1e-13);
    }

    #[test]
    fn conjugation_preserves_norm(seed in any::<u64>(), n in 2usize..12, t in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = hermitian(&mut rng, n, 1.0);
        let a = ConjugateOp::hermitian(hermitian(&mut rng, n, 2.0), 0).unwrap();
        let op = Operator::Dense(DenseOperator::new(s.clone(), 0));
        let moved = heisenberg_conjugate(&a, &op, t).unwrap();
        let (x, y) = (op.norm(0).unwrap(), moved.norm(0).unwrap());
        prop_assert!((x - y).abs() <= 1e-10 * x.max(1.0));
        // The commutator with A is conjugation-covariant as well.
        let c = commutator(&a, &op).unwrap();
        let moved_c = commutator(&a, &moved).unwrap();
        prop_assert!((c.norm(0).unwrap() - moved_c.norm(0).unwrap()).abs() <= 1e-9 * c.norm(0).unwrap().max(1.0));
    }

    #[test]
    fn window_projections_are_orthogonal_projections(seed in any::<u64>(), n in 2usize..20, lo in 0.0f64..3.0, width in 0.3f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let p = diagonalize_projection(&u, &SpectralWindow::new(lo, lo + width).unwrap(), BOUNDARY_GUARD).unwrap().matrix;
        prop_assert!(linalg::max_abs(&(&p * &p - &p)) <= 1e-12);
        prop_assert!(linalg::max_abs(&(&p - p.adjoint())) <= 1e-12);
        // E commutes with U.
        prop_assert!(linalg::max_abs(&(&p * &u - &u * &p)) <= 1e-11);
    }

    #[test]
    fn certificate_is_monotone_under_shrinking(seed in any::<u64>(), n in 4usize..20, lo in 0.0f64..2.0, width in 1.0f64..4.0, shrink in 0.05f64..0.45) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let form = hermitian(&mut rng, n, 1.0);
        let outer = SpectralWindow::new(lo, lo + width).unwrap();
        let inner = SpectralWindow::new(lo + shrink * width, lo + (1.0 - shrink) * width).unwrap();
        let a = certify_form(&u, &form, &outer, 0, 0).unwrap();
        let b = certify_form(&u, &form, &inner, 0, 0).unwrap();
        prop_assume!(!a.vacuous && !b.vacuous);
        prop_assert!(b.a_estimate >= a.a_estimate - 1e-12);
    }

    #[test]
    fn exponential_perturbation_respects_series_bound(seed in any::<u64>(), n in 1usize..12, scale in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = hermitian(&mut rng, n, scale);
        let e = exponential_perturbation(&b, 1e-14).unwrap();
        let nb = linalg::operator_norm(&b).unwrap();
        prop_assert!(e.defect_norm().unwrap() <= nb * nb.exp() + 1e-12);
        let a = hermitian(&mut rng, n, 1.0);
        let s = e.commutator_with(&a).unwrap();
        prop_assert!(s.difference <= 1e-10 * (1.0 + linalg::operator_norm(&s.direct).unwrap()));
    }

    #[test]
    fn weighted_resolvent_is_symmetric_in_eps(seed in any::<u64>(), n in 2usize..16, lambda in -2.0f64..2.0, eps in 0.01f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = unitary(&mut rng, n);
        let a = linalg::real_diag(&(0..n).map(|j| j as f64 - (n / 2) as f64).collect::<Vec<_>>());
        let w = weight_matrix(&a, 0.6).unwrap();
        let theta = linalg::gap_point(&u).unwrap();
        let up = weighted_resolvent_norm(&u, theta, &w, lambda, eps).unwrap();
        let down = weighted_resolvent_norm(&u, theta, &w, lambda, -eps).unwrap();
        prop_assert!((up - down).abs() <= 1e-8 * up);
    }

    #[test]
    fn lattice_cocycle_is_unitary_on_finite_vectors(seed in any::<u64>(), len in 1usize..20, offset in -30i64..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CocycleModel::build(1, &[(1, c64::new(0.0, -1.0 / (4.0 * PI))), (2, c64::new(0.01, 0.02))], (5f64.sqrt() - 1.0) / 2.0, 32).unwrap();
        let v = ComplexVector::new((0..len).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(), offset);
        let back = m.op().adjoint().apply(&m.op().apply(&v).unwrap()).unwrap();
        let err = back.axpy(c64::new(-1.0, 0.0), &v).norm();
        prop_assert!(err <= 1e-12 * v.norm());
    }
}

#[test]
fn compact_difference_stays_within_its_bound() {
    let shift = ShiftModel::build().unwrap();
    let sec = shift.section(24).unwrap();
    let outer = SpectralWindow::new(0.2, TAU - 0.2).unwrap();
    let base = certify_mourre(&sec, &outer, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        // V = e^{iB} with B supported on a 3×3 block near the origin.
        let mut b = Mat::<c64>::zeros(sec.dim(), sec.dim());
        let block = hermitian(&mut rng, 3, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                b[(23 + i, 23 + j)] = block[(i, j)];
            }
        }
        let v = exponential_perturbation(&b, 1e-14).unwrap().v;
        let inner = SpectralWindow::new(0.3, TAU - 0.3).unwrap();
        let p = perturbed_certificate(&sec, &v, &inner, &base).unwrap();
        assert!(p.rank_v_minus_one <= 3);
        assert!(p.difference_norm <= p.difference_bound + 1e-12);
    }
}
