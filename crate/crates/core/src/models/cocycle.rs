use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use faer::c64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::averaged::averaged_conjugate;
use super::{CommutatorModel, LatticeModel, ModelSection};
use crate::error::{Error, Result};
use crate::linalg::{self, cis};
use crate::operator::{ConjugateOp, Diagonal, LatticeOp, UnitaryOp};

/// Sampling grid for the Fourier coefficients of `g = e^{2πi f}`.
pub const G_HAT_GRID: usize = 4096;
/// Coefficients of `g` below this modulus are dropped (and counted as tail).
pub const G_HAT_THRESHOLD: f64 = 1e-15;

/// Cocycle `(Uφ)(x) = e^{2πi f(x)} φ(x+θ)`, `f = m·id + h`, in the Fourier
/// basis: `Û_{jk} = ĝ_{j−k} e^{2πikθ}`. The conjugate is `P = diag(2πk)`.
#[derive(Debug, Clone)]
pub struct CocycleModel {
    pub m: i64,
    /// Fourier coefficients of the real function `h`, both signs present.
    pub h_hat: BTreeMap<i64, c64>,
    pub theta: f64,
    pub half_width: usize,
    pub g_hat: BTreeMap<i64, c64>,
    /// ℓ² mass of the dropped coefficients of `g`.
    pub tail_mass: f64,
    pub warnings: Vec<String>,
    pub inner: LatticeModel,
}

impl CocycleModel {
    pub fn build(m: i64, h_hat: &[(i64, c64)], theta: f64, half_width: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("winding number m must be nonzero".into()));
        }
        if half_width < 8 {
            return Err(Error::InvalidParameter(format!("half width {half_width} < 8")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("θ = {theta} outside (0, 1)")));
        }
        let h_hat = real_spectrum(h_hat)?;
        let mut warnings = Vec::new();
        if let Some(w) = irrationality_warning(theta) {
            warnings.push(w);
        }
        let (g_hat, tail_mass) = g_coefficients(m, &h_hat)?;
        let g = LatticeOp::constant_bands(&g_hat.iter().map(|(&l, &z)| (l, z)).collect::<Vec<_>>());
        let rot = LatticeOp::multiplication(Arc::new(move |k| cis(TAU * k as f64 * theta)));
        let inner = LatticeModel::new(
            g.mul(&rot),
            Diagonal::Affine { slope: TAU, intercept: 0.0 },
            format!("cocycle(m={m}, θ={theta})"),
        )?;
        Ok(Self { m, h_hat, theta, half_width, g_hat, tail_mass, warnings, inner })
    }

    pub fn op(&self) -> &LatticeOp {
        self.inner.op()
    }

    /// Fourier coefficients of `h′`.
    pub fn h_prime_hat(&self) -> Vec<(i64, c64)> {
        h_prime(&self.h_hat)
    }

    /// Multiplication by `e^{2πix}` (the unit Fourier shift).
    pub fn rotation_generator() -> LatticeOp {
        LatticeOp::shift()
    }

    /// `P` with the sign of `m`, so that the averaged form is positive.
    pub fn signed_conjugate(&self) -> Diagonal {
        Diagonal::Affine { slope: TAU * self.m.signum() as f64, intercept: 0.0 }
    }

    /// `U*[P,U]` for the infinite model, as a lattice operator.
    pub fn form_op(&self) -> LatticeOp {
        self.inner.form_op()
    }
}

impl CommutatorModel for CocycleModel {
    fn label(&self) -> String {
        self.inner.label()
    }
    fn unitary(&self) -> &UnitaryOp {
        self.inner.unitary()
    }
    fn conjugate(&self) -> &ConjugateOp {
        self.inner.conjugate()
    }
    fn section(&self, k: usize) -> Result<ModelSection> {
        self.inner.section(k)
    }
}

/// Complete a coefficient list to the spectrum of a real function.
fn real_spectrum(h_hat: &[(i64, c64)]) -> Result<BTreeMap<i64, c64>> {
    let given: BTreeMap<i64, c64> = h_hat.iter().copied().collect();
    let mut out = BTreeMap::new();
    for (&l, &z) in &given {
        if l == 0 && z.im.abs() > 1e-14 {
            return Err(Error::InvalidParameter("ĥ_0 must be real for real h".into()));
        }
        if let Some(&w) = given.get(&-l) {
            if (w - z.conj()).norm() > 1e-14 {
                return Err(Error::InvalidParameter(format!(
                    "ĥ_{{-{l}}} is not the conjugate of ĥ_{l}: h would not be real"
                )));
            }
        }
        out.insert(l, z);
        out.insert(-l, z.conj());
    }
    Ok(out)
}

fn h_prime(h_hat: &BTreeMap<i64, c64>) -> Vec<(i64, c64)> {
    h_hat
        .iter()
        .filter(|(&l, _)| l != 0)
        .map(|(&l, &z)| (l, c64::new(0.0, TAU * l as f64) * z))
        .collect()
}

/// `ĝ` by sampling `g` on the uniform grid and a forward DFT.
fn g_coefficients(m: i64, h_hat: &BTreeMap<i64, c64>) -> Result<(BTreeMap<i64, c64>, f64)> {
    let n = G_HAT_GRID;
    if let Some((&l, _)) = h_hat.iter().find(|(&l, _)| l.unsigned_abs() as usize >= n / 4) {
        return Err(Error::InvalidParameter(format!(
            "harmonic {l} too high for the {n}-point sampling grid"
        )));
    }
    let mut buf: Vec<c64> = (0..n)
        .map(|k| {
            let x = k as f64 / n as f64;
            let h: f64 = h_hat.iter().map(|(&l, &z)| (z * cis(TAU * l as f64 * x)).re).sum();
            cis(TAU * (m as f64 * x + h))
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let mut out = BTreeMap::new();
    let mut tail = 0.0;
    let half = (n / 2) as i64;
    for l in (-half + 1)..=half {
        let z = buf[l.rem_euclid(n as i64) as usize] / n as f64;
        if z.norm() >= G_HAT_THRESHOLD {
            out.insert(l, z);
        } else {
            tail += z.norm_sqr();
        }
    }
    Ok((out, tail.sqrt()))
}

/// Warn when `θ` is within `1e−13` of a rational with denominator `≤ 10⁶`.
pub fn irrationality_warning(theta: f64) -> Option<String> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = theta;
    for _ in 0..64 {
        let a = x.floor();
        let (p2, q2) = (a as i64 * p1 + p0, a as i64 * q1 + q0);
        if q2 > 1_000_000 {
            return None;
        }
        if (theta - p2 as f64 / q2 as f64).abs() < 1e-13 {
            return Some(format!(
                "θ = {theta} is numerically rational ({p2}/{q2}); ergodic averaging degrades"
            ));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a;
        if frac == 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicBound {
    pub n: usize,
    pub sup: f64,
    pub argmax: f64,
    pub warnings: Vec<String>,
}

/// `sup_x |(1/n) Σ_{j=1}^n h′(x − jθ)|`, grid search refined by golden
/// section around the best grid points.
pub fn ergodic_average_bound(
    h_hat: &[(i64, c64)],
    theta: f64,
    n: usize,
    grid_size: usize,
) -> Result<ErgodicBound> {
    if n == 0 || grid_size < 8 {
        return Err(Error::InvalidParameter("need n ≥ 1 and at least 8 grid points".into()));
    }
    let spec = real_spectrum(h_hat)?;
    if spec.get(&0).is_some_and(|z| z.norm() > 0.0) {
        return Err(Error::Precondition("ergodic_average_bound: ∫h′ = 0 required (ĥ_0 must vanish)".into()));
    }
    let mut warnings = Vec::new();
    if let Some(w) = irrationality_warning(theta) {
        warnings.push(w);
    }
    let coeffs: Vec<(f64, c64)> = h_prime(&spec)
        .into_iter()
        .map(|(l, z)| {
            let lf = l as f64;
            let avg: c64 = (1..=n).map(|j| cis(-TAU * lf * j as f64 * theta)).sum::<c64>() / n as f64;
            (lf, z * avg)
        })
        .collect();
    let f = |x: f64| -> f64 {
        coeffs.iter().map(|&(l, a)| (a * cis(TAU * l * x)).re).sum::<f64>().abs()
    };
    let h = 1.0 / grid_size as f64;
    let mut samples: Vec<(f64, f64)> = (0..grid_size).map(|k| (f(k as f64 * h), k as f64 * h)).collect();
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = (samples.first().map_or(0.0, |s| s.0), 0.0);
    for &(_, x0) in samples.iter().take(8) {
        let (v, x) = golden_max(&f, x0 - h, x0 + h);
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(ErgodicBound { n, sup: best.0, argmax: best.1.rem_euclid(1.0), warnings })
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (f(x).max(fc).max(fd), x)
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleMourre {
    pub n: usize,
    pub half_width: usize,
    pub ergodic_bound: f64,
    pub min_eig: f64,
    /// `2π|m|(1 − bound)`, the lower bound of the averaged symbol.
    pub symbol_floor: f64,
    /// Tolerance from the dropped coefficients of `g`.
    pub tolerance: f64,
}

/// Smallest eigenvalue of the section of `U*[P_n, U]`.
pub fn mourre_constant_cocycle(model: &CocycleModel, n: usize) -> Result<CocycleMourre> {
    let hp: Vec<(i64, c64)> = model.h_hat.iter().map(|(&l, &z)| (l, z)).collect();
    let bound = ergodic_average_bound(&hp, model.theta, n, G_HAT_GRID)?.sup;
    if bound >= 0.5 {
        return Err(Error::Precondition(format!(
            "mourre_constant_cocycle: ergodic bound {bound:.6} at n = {n} is not below 1/2"
        )));
    }
    let k = model.half_width;
    let p = LatticeOp::diagonal(&model.signed_conjugate());
    let pn = averaged_conjugate(model.op(), &p, n);
    let u = model.op();
    let form = u.adjoint().mul(&pn.mul(u).sub(&u.mul(&pn)));
    let (sec, _) = linalg::hermitize(&form.section(k));
    let vals = linalg::hermitian_eigenvalues(&sec)?;
    let n_sites = (2 * k + 1) as f64;
    Ok(CocycleMourre {
        n,
        half_width: k,
        ergodic_bound: bound,
        min_eig: vals[0],
        symbol_floor: TAU * model.m.unsigned_abs() as f64 * (1.0 - bound),
        tolerance: 1e-9 + 4.0 * PI * n_sites * model.tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::operator::ComplexVector;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    pub(crate) fn cos_h() -> Vec<(i64, c64)> {
        vec![(1, c64::new(0.0, -1.0 / (4.0 * PI)))]
    }

    #[test]
    fn trivial_h_is_pure_superdiagonal() {
        let m = CocycleModel::build(1, &[], golden(), 32).unwrap();
        assert_eq!(m.g_hat.len(), 1);
        assert!((m.g_hat[&1] - ONE).norm() < 1e-15);
        let s = m.op().section(4);
        for j in 0..9 {
            for i in 0..9 {
                let e = if i == j + 1 { cis(TAU * (j as f64 - 4.0) * golden()) } else { ZERO };
                assert!((s[(i, j)] - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn apply_delta_with_no_h() {
        let m = CocycleModel::build(1, &[], 0.7, 16).unwrap();
        let v = m.op().apply(&ComplexVector::delta(0)).unwrap();
        assert!((v.get(1) - ONE).norm() < 1e-15);
    }

    #[test]
    fn commutator_no_h_is_two_pi_u() {
        let m = CocycleModel::build(1, &[], 0.7, 16).unwrap();
        let c = m.inner.commutator_op().section(6);
        let u = m.op().section(6);
        assert!(linalg::max_abs(&(&c - &linalg::scale(&u, c64::new(TAU, 0.0)))) < 1e-12);
    }

    #[test]
    fn bessel_coefficients() {
        // g = e^{2πix} e^{i sin 2πx}: ĝ_l = J_{l−1}(1).
        let m = CocycleModel::build(1, &cos_h(), golden(), 16).unwrap();
        let j0 = 0.765_197_686_557_966_6;
        let j1 = 0.440_050_585_744_933_5;
        assert!((m.g_hat[&1].re - j0).abs() < 1e-14);
        assert!((m.g_hat[&2].re - j1).abs() < 1e-14);
        assert!((m.g_hat[&0].re + j1).abs() < 1e-14);
    }

    #[test]
    fn ergodic_bound_rejects_mean() {
        let err = ergodic_average_bound(&[(0, c64::new(0.3, 0.0))], golden(), 3, 4096);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn rational_theta_is_flagged() {
        assert!(irrationality_warning(0.5).is_some());
        assert!(irrationality_warning(golden()).is_none());
        // h′ = cos(4πx) is resonant with θ = 1/2: the two-point orbit
        // average is h′ itself for every n.
        let resonant = [(2, c64::new(0.0, -1.0 / (8.0 * PI)))];
        for n in [1, 2, 7, 20] {
            let b = ergodic_average_bound(&resonant, 0.5, n, 4096).unwrap();
            assert!(!b.warnings.is_empty());
            assert!((b.sup - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_h_gives_zero_bound() {
        let b = ergodic_average_bound(&[], golden(), 5, 256).unwrap();
        assert_eq!(b.sup, 0.0);
    }

    #[test]
    fn small_tail() {
        let m = CocycleModel::build(1, &cos_h(), golden(), 16).unwrap();
        assert!(m.tail_mass < 1e-14);
        assert!(m.g_hat.len() < 40);
    }
}
