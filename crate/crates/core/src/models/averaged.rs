use faer::c64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operator::{ConjugateOp, LatticeOp, Operator, UnitaryOp};

/// `A_n = (1/n) Σ_{j=0}^{n−1} U^{−j} A U^{j}` as an exact lattice operator.
pub fn averaged_conjugate(u: &LatticeOp, a: &LatticeOp, n: usize) -> LatticeOp {
    let terms = (0..n as u32)
        .map(|j| {
            let uj = u.pow(j);
            uj.adjoint().mul(a).mul(&uj)
        })
        .collect();
    LatticeOp::sum(terms).scale(c64::new(1.0 / n as f64, 0.0))
}

#[derive(Debug, Clone)]
pub struct AveragedConjugate {
    pub n: usize,
    pub conjugate: ConjugateOp,
}

/// Averaged conjugate for a lattice or dense unitary.
pub fn averaged(u: &UnitaryOp, a: &ConjugateOp, n: usize) -> Result<AveragedConjugate> {
    if n == 0 {
        return Err(Error::InvalidParameter("averaging length n must be at least 1".into()));
    }
    let conjugate = match (&u.op, a.as_lattice()) {
        (Operator::Lattice(op), Some(al)) => ConjugateOp::Banded(averaged_conjugate(op, &al, n)),
        (Operator::Dense(d), _) => {
            let am = a.dense_on(d.offset, d.dim())?;
            let w = &d.mat;
            let mut acc = am.clone();
            let mut wj = linalg::identity(d.dim());
            for _ in 1..n {
                wj = w * &wj;
                acc += wj.adjoint() * &am * &wj;
            }
            let (h, _) = linalg::hermitize(&linalg::scale(&acc, c64::new(1.0 / n as f64, 0.0)));
            ConjugateOp::hermitian(h, d.offset)?
        }
        (Operator::Lattice(_), None) => {
            return Err(Error::Incompatible("dense conjugate with a lattice unitary".into()))
        }
    };
    Ok(AveragedConjugate { n, conjugate })
}

/// `‖[A_n, U] − (1/n) Σ_j U^{−j}[A,U]U^{j}‖` on the section `-k..=k`.
///
/// Lattice operands are compared exactly on the section rows; the section
/// must be wide enough to hold the `n`-fold conjugated bands.
pub fn averaged_lemma_residual(u: &LatticeOp, a: &LatticeOp, n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("averaging length n must be at least 1".into()));
    }
    let required = n * u.bandwidth().max(1);
    if k < required {
        return Err(Error::SectionTooSmall { required_k: required });
    }
    let an = averaged_conjugate(u, a, n);
    let lhs = an.mul(u).sub(&u.mul(&an));
    let comm = a.mul(u).sub(&u.mul(a));
    let rhs = LatticeOp::sum(
        (0..n as u32)
            .map(|j| {
                let uj = u.pow(j);
                uj.adjoint().mul(&comm).mul(&uj)
            })
            .collect(),
    )
    .scale(c64::new(1.0 / n as f64, 0.0));
    lhs.sub(&rhs).section_norm(k)
}

/// The same residual for dense matrices.
pub fn averaged_lemma_residual_dense(w: &CMat, a: &CMat, n: usize) -> Result<f64> {
    let nn = c64::new(1.0 / n as f64, 0.0);
    let mut an = a.clone();
    let comm = linalg::commutator(a, w);
    let mut rhs = comm.clone();
    let mut wj = linalg::identity(w.nrows());
    for _ in 1..n {
        wj = w * &wj;
        an += wj.adjoint() * a * &wj;
        rhs += wj.adjoint() * &comm * &wj;
    }
    let diff = linalg::commutator(&linalg::scale(&an, nn), w) - linalg::scale(&rhs, nn);
    linalg::operator_norm(&diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Diagonal;

    #[test]
    fn n_one_is_a() {
        let a = LatticeOp::diagonal(&Diagonal::number());
        let an = averaged_conjugate(&LatticeOp::shift(), &a, 1);
        let d = an.sub(&a).materialize(-10, 10);
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn shift_average_adds_constant() {
        let a = LatticeOp::diagonal(&Diagonal::number());
        for n in [2usize, 5] {
            let an = averaged_conjugate(&LatticeOp::shift(), &a, n);
            let expect = a.add(&LatticeOp::identity().scale(c64::new((n as f64 - 1.0) / 2.0, 0.0)));
            assert!(an.sub(&expect).materialize(-10, 10).max_abs() < 1e-13);
        }
    }

    #[test]
    fn section_too_small() {
        let a = LatticeOp::diagonal(&Diagonal::number());
        let u = LatticeOp::constant_bands(&[(3, crate::linalg::ONE)]);
        assert!(matches!(
            averaged_lemma_residual(&u, &a, 10, 20),
            Err(Error::SectionTooSmall { required_k: 30 })
        ));
    }
}
