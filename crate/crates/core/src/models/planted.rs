use std::f64::consts::PI;

use faer::{c64, Mat};

use super::LatticeModel;
use crate::error::Result;
use crate::linalg::{cis, CMat, ONE, ZERO};
use crate::operator::{ComplexVector, Diagonal, LatticeOp};

/// A shift multiplied by a local unitary `V` (with `V − 1` of finite rank).
#[derive(Debug, Clone)]
pub struct PlantedModel {
    pub inner: LatticeModel,
    /// First site of the block where `V` differs from the identity.
    pub block_start: i64,
    pub v_block: CMat,
    /// Exact eigenpair created by `V`, if any.
    pub eigenvalue: Option<c64>,
    pub eigenvector: Option<ComplexVector>,
}

/// `VU` with `V = e^{iπP₀} = 1 − 2P₀`.
pub fn planted_rank_one() -> Result<PlantedModel> {
    let block = Mat::from_fn(1, 1, |_, _| -ONE);
    let v = LatticeOp::local_block(0, &block);
    Ok(PlantedModel {
        inner: LatticeModel::new(v.mul(&LatticeOp::shift()), Diagonal::number(), "shift·(1−2P₀)")?,
        block_start: 0,
        v_block: block,
        eigenvalue: None,
        eigenvector: None,
    })
}

/// `VU` with `V` a 2×2 block on sites `{0, 1}` sending `e₀ ↦ e₁` and
/// `e₁ ↦ e^{iφ} e₀`, so that `e₀` is an eigenvector of `VU` with eigenvalue
/// `e^{iφ}`; the rest of the lattice carries a shift.
pub fn planted_eigenvalue(phi: f64) -> Result<PlantedModel> {
    let mu = cis(phi);
    let block = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => mu,
        (1, 0) => ONE,
        _ => ZERO,
    });
    let v = LatticeOp::local_block(0, &block);
    let label = format!("shift·V(planted e^{{i{:.4}}})", phi);
    Ok(PlantedModel {
        inner: LatticeModel::new(v.mul(&LatticeOp::shift()), Diagonal::number(), label)?,
        block_start: 0,
        v_block: block,
        eigenvalue: Some(mu),
        eigenvector: Some(ComplexVector::delta(0)),
    })
}

/// Planted eigenvalue at `−1`, which the Cayley map with base point `1`
/// sends to `λ = 0`.
pub fn planted_at_minus_one() -> Result<PlantedModel> {
    planted_eigenvalue(PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unitarity_defect, I};
    use crate::models::CommutatorModel;

    #[test]
    fn eigenvector_is_exact() {
        let m = planted_eigenvalue(0.7).unwrap();
        let v = m.inner.op().apply(&ComplexVector::delta(0)).unwrap();
        assert!((v.get(0) - cis(0.7)).norm() < 1e-15);
        assert!(v.axpy(-cis(0.7), &ComplexVector::delta(0)).norm() < 1e-15);
    }

    #[test]
    fn closures_are_unitary() {
        for m in [planted_rank_one().unwrap(), planted_at_minus_one().unwrap()] {
            let w = m.inner.op().closure(10, I).unwrap();
            assert!(unitarity_defect(&w) < 1e-15);
            assert!(m.inner.section(10).is_ok());
        }
    }
}
