use faer::{c64, Mat};

use super::lattice::{Diagonal, LatticeOp};
use super::vector::ComplexVector;
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, ONE};

/// Dense matrix whose row/column `i` sits at lattice site `offset + i`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub mat: CMat,
    pub offset: i64,
}

impl DenseOperator {
    pub fn new(mat: CMat, offset: i64) -> Self {
        Self { mat, offset }
    }

    /// Centered section `-k..=k`.
    pub fn centered(mat: CMat) -> Self {
        let offset = -((mat.nrows() / 2) as i64);
        Self { mat, offset }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        let n = self.dim() as i64;
        if !v.is_empty() && (v.offset < self.offset || v.hi() >= self.offset + n) {
            return Err(Error::Incompatible(format!(
                "vector support {}..={} outside dense section {}..={}",
                v.offset,
                v.hi(),
                self.offset,
                self.offset + n - 1
            )));
        }
        let x: Vec<c64> = (0..n).map(|i| v.get(self.offset + i)).collect();
        Ok(ComplexVector::new(linalg::LinOp::apply(&self.mat, &x), self.offset))
    }
}

#[derive(Debug, Clone)]
pub enum Operator {
    Lattice(LatticeOp),
    Dense(DenseOperator),
}

impl Operator {
    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        match self {
            Operator::Lattice(op) => op.apply(v),
            Operator::Dense(d) => d.apply(v),
        }
    }

    /// Dense matrix on the section `-k..=k` (lattice) or the stored matrix.
    pub fn section(&self, k: usize) -> CMat {
        match self {
            Operator::Lattice(op) => op.section(k),
            Operator::Dense(d) => d.mat.clone(),
        }
    }

    /// Largest singular value on the section.
    pub fn norm(&self, k: usize) -> Result<f64> {
        match self {
            Operator::Lattice(op) => op.section_norm(k),
            Operator::Dense(d) => linalg::operator_norm(&d.mat),
        }
    }
}

/// A unitary operator, checked at construction.
#[derive(Debug, Clone)]
pub struct UnitaryOp {
    pub op: Operator,
    pub label: String,
}

impl UnitaryOp {
    pub fn dense(mat: CMat, offset: i64, label: impl Into<String>) -> Result<Self> {
        let n = mat.nrows();
        if mat.ncols() != n {
            return Err(Error::Dimension { expected: n, found: mat.ncols() });
        }
        let defect = linalg::unitarity_defect(&mat);
        let tolerance = 1e-12 * n.max(1) as f64;
        if defect > tolerance {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        Ok(Self { op: Operator::Dense(DenseOperator::new(mat, offset)), label: label.into() })
    }

    /// Lattice unitary, checked by round trips `U*U v = v` and `UU* v = v`
    /// on a fixed probe set.
    pub fn lattice(op: LatticeOp, label: impl Into<String>) -> Result<Self> {
        let mut defect = 0.0f64;
        for v in probe_vectors() {
            let a = op.apply_adjoint(&op.apply(&v)?)?;
            let b = op.apply(&op.apply_adjoint(&v)?)?;
            let d1 = a.axpy(-ONE, &v).norm() / v.norm();
            let d2 = b.axpy(-ONE, &v).norm() / v.norm();
            defect = defect.max(d1).max(d2);
        }
        if defect > 1e-12 {
            return Err(Error::NotUnitary { defect, tolerance: 1e-12 });
        }
        Ok(Self { op: Operator::Lattice(op), label: label.into() })
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        self.op.apply(v)
    }

    pub fn apply_adjoint(&self, v: &ComplexVector) -> Result<ComplexVector> {
        match &self.op {
            Operator::Lattice(op) => op.apply_adjoint(v),
            Operator::Dense(d) => {
                DenseOperator::new(linalg::adjoint(&d.mat), d.offset).apply(v)
            }
        }
    }

    pub fn as_lattice(&self) -> Option<&LatticeOp> {
        match &self.op {
            Operator::Lattice(op) => Some(op),
            Operator::Dense(_) => None,
        }
    }

    pub fn as_dense(&self) -> Option<&DenseOperator> {
        match &self.op {
            Operator::Dense(d) => Some(d),
            Operator::Lattice(_) => None,
        }
    }
}

fn probe_vectors() -> Vec<ComplexVector> {
    let mut out: Vec<ComplexVector> = (-3..=3).map(ComplexVector::delta).collect();
    let spread = (0..17)
        .map(|k| c64::new(((k * 7 % 5) as f64) - 2.0, ((k * 3 % 4) as f64) - 1.5))
        .collect();
    out.push(ComplexVector::new(spread, -8));
    out
}

/// Self-adjoint conjugate operator.
#[derive(Debug, Clone)]
pub enum ConjugateOp {
    Diagonal(Diagonal),
    Hermitian(DenseOperator),
    /// Banded Hermitian lattice operator (averaged conjugates).
    Banded(LatticeOp),
}

impl ConjugateOp {
    pub fn diagonal(a: Diagonal) -> Self {
        ConjugateOp::Diagonal(a)
    }

    pub fn hermitian(mat: CMat, offset: i64) -> Result<Self> {
        let n = mat.nrows();
        if mat.ncols() != n {
            return Err(Error::Dimension { expected: n, found: mat.ncols() });
        }
        let scale = linalg::operator_norm(&mat)?.max(f64::MIN_POSITIVE);
        let asymmetry = linalg::operator_norm(&(&mat - mat.adjoint()))?;
        let tolerance = 1e-12 * scale;
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        Ok(ConjugateOp::Hermitian(DenseOperator::new(mat, offset)))
    }

    /// `w(k) = ⟨a(k)⟩` for diagonal realizations.
    pub fn domain_weight(&self, k: i64) -> Option<f64> {
        match self {
            ConjugateOp::Diagonal(a) => Some(a.value(k).hypot(1.0)),
            _ => None,
        }
    }

    /// Matrix of `A` on sites `offset..offset+n`.
    pub fn dense_on(&self, offset: i64, n: usize) -> Result<CMat> {
        match self {
            ConjugateOp::Diagonal(a) => {
                let vals: Vec<f64> = (0..n as i64).map(|i| a.value(offset + i)).collect();
                Ok(linalg::real_diag(&vals))
            }
            ConjugateOp::Hermitian(d) => {
                if d.dim() != n || d.offset != offset {
                    return Err(Error::Incompatible(format!(
                        "Hermitian conjugate lives on {}+{}, requested {}+{}",
                        d.offset,
                        d.dim(),
                        offset,
                        n
                    )));
                }
                Ok(d.mat.clone())
            }
            ConjugateOp::Banded(op) => {
                Ok(op.materialize(offset, offset + n as i64 - 1).to_dense())
            }
        }
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        match self {
            ConjugateOp::Diagonal(a) => Ok(v.map_sites(|s, z| z * a.value(s))),
            ConjugateOp::Hermitian(d) => d.apply(v),
            ConjugateOp::Banded(op) => op.apply(v),
        }
    }

    pub fn as_lattice(&self) -> Option<LatticeOp> {
        match self {
            ConjugateOp::Diagonal(a) => Some(LatticeOp::diagonal(a)),
            ConjugateOp::Banded(op) => Some(op.clone()),
            ConjugateOp::Hermitian(_) => None,
        }
    }
}

fn dense_pair(a: &ConjugateOp, s: &DenseOperator) -> Result<CMat> {
    a.dense_on(s.offset, s.dim())
}

/// `[A, S] = AS − SA`. Lattice operands give an exact lattice operator.
pub fn commutator(a: &ConjugateOp, s: &Operator) -> Result<Operator> {
    match (a, s) {
        (ConjugateOp::Diagonal(d), Operator::Lattice(op)) => {
            Ok(Operator::Lattice(op.diag_commutator(d)))
        }
        (ConjugateOp::Banded(b), Operator::Lattice(op)) => {
            Ok(Operator::Lattice(b.mul(op).sub(&op.mul(b))))
        }
        (ConjugateOp::Hermitian(_), Operator::Lattice(_)) => Err(Error::Incompatible(
            "dense conjugate with a lattice operator; take a section first".into(),
        )),
        (_, Operator::Dense(sd)) => {
            let am = dense_pair(a, sd)?;
            Ok(Operator::Dense(DenseOperator::new(linalg::commutator(&am, &sd.mat), sd.offset)))
        }
    }
}

/// `e^{−itA} S e^{itA}` for `|t| ≤ 1`.
pub fn heisenberg_conjugate(a: &ConjugateOp, s: &Operator, t: f64) -> Result<Operator> {
    if !(t.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("conjugation time {t} outside [-1, 1]")));
    }
    match (a, s) {
        (ConjugateOp::Diagonal(d), Operator::Lattice(op)) => {
            Ok(Operator::Lattice(op.diag_conjugate(d, t)))
        }
        (ConjugateOp::Diagonal(d), Operator::Dense(sd)) => {
            let n = sd.dim();
            let vals: Vec<f64> = (0..n as i64).map(|i| d.value(sd.offset + i)).collect();
            let m = Mat::from_fn(n, n, |r, c| sd.mat[(r, c)] * cis(-t * (vals[r] - vals[c])));
            Ok(Operator::Dense(DenseOperator::new(m, sd.offset)))
        }
        (_, Operator::Dense(sd)) => {
            let am = dense_pair(a, sd)?;
            let plus = linalg::hermitian_function(&am, |x| cis(t * x))?;
            let m = plus.adjoint() * &sd.mat * &plus;
            Ok(Operator::Dense(DenseOperator::new(m, sd.offset)))
        }
        (_, Operator::Lattice(_)) => Err(Error::Incompatible(
            "non-diagonal conjugate with a lattice operator; take a section first".into(),
        )),
    }
}

/// Largest singular value of a dense operator.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    linalg::operator_norm(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_action() {
        let a = ConjugateOp::diagonal(Diagonal::number());
        let v = a.apply(&ComplexVector::delta(5)).unwrap();
        assert_eq!(v.get(5), c64::new(5.0, 0.0));
    }

    #[test]
    fn identity_commutes() {
        let a = ConjugateOp::diagonal(Diagonal::number());
        let c = commutator(&a, &Operator::Lattice(LatticeOp::identity())).unwrap();
        assert_eq!(c.norm(8).unwrap(), 0.0);
    }

    #[test]
    fn shift_conjugation_is_a_phase() {
        let a = ConjugateOp::diagonal(Diagonal::number());
        let u = Operator::Lattice(LatticeOp::shift());
        let t = 0.37;
        let h = heisenberg_conjugate(&a, &u, t).unwrap().section(10);
        let expect = linalg::scale(&u.section(10), cis(-t));
        assert!(linalg::max_abs(&(&h - &expect)) <= 1e-15);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = linalg::real_diag(&[1.0, 2.0]);
        assert!(matches!(UnitaryOp::dense(m, 0, "bad"), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = linalg::real_diag(&[1.0, 2.0]);
        m[(0, 1)] = c64::new(0.5, 0.0);
        assert!(matches!(ConjugateOp::hermitian(m, 0), Err(Error::NotHermitian { .. })));
    }
}
