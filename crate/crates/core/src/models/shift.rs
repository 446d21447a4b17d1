use super::{CommutatorModel, LatticeModel, ModelSection};
use crate::error::Result;
use crate::operator::{ConjugateOp, Diagonal, LatticeOp, UnitaryOp};

/// Bilateral shift `(Uφ)_n = φ_{n−1}` with the number operator.
#[derive(Debug, Clone)]
pub struct ShiftModel {
    pub inner: LatticeModel,
}

impl ShiftModel {
    pub fn build() -> Result<Self> {
        Ok(Self { inner: LatticeModel::new(LatticeOp::shift(), Diagonal::number(), "shift")? })
    }
}

impl CommutatorModel for ShiftModel {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn commutator_is_u_and_form_is_identity() {
        let m = ShiftModel::build().unwrap();
        let c = m.inner.commutator_op().materialize(-20, 20);
        let u = m.inner.op().materialize(-20, 20);
        let f = m.inner.form_op().materialize(-20, 20);
        for j in -20..=20 {
            assert_eq!(c.get(j, 1), u.get(j, 1));
            assert_eq!(f.get(j, 0), ONE);
            assert_eq!(f.get(j, -1).norm() + f.get(j, 1).norm(), 0.0);
        }
    }
}
