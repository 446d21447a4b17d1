//! Concrete unitary models with their conjugate operators.

mod averaged;
mod cocycle;
mod dilation;
mod free_evolution;
mod planted;
mod shift;

pub use averaged::{
    averaged, averaged_conjugate, averaged_lemma_residual, averaged_lemma_residual_dense,
    AveragedConjugate,
};
pub use cocycle::{
    ergodic_average_bound, irrationality_warning, mourre_constant_cocycle, CocycleModel,
    CocycleMourre, ErgodicBound, G_HAT_THRESHOLD, G_HAT_GRID,
};
pub use dilation::DilationModel;
pub use free_evolution::FreeEvolutionModel;
pub use planted::{planted_at_minus_one, planted_eigenvalue, planted_rank_one, PlantedModel};
pub use shift::ShiftModel;

use faer::c64;

use crate::error::Result;
use crate::linalg::{self, CMat, I};
use crate::operator::{ConjugateOp, Diagonal, LatticeOp, UnitaryOp};

/// Bloch twist used to close lattice sections. With `τ = i` neither `±1`
/// is an eigenvalue of the closed shift, so `θ = ±1` stay admissible base
/// points for the Cayley transform.
pub const CLOSURE_TWIST: c64 = I;

/// A model realized on a finite section.
///
/// `unitary` is exactly unitary (periodic closure with twist for lattice
/// models). `form` is the commutator form `U*[A,U]` of the unbounded model
/// restricted to the section. The commutator of the closed section with the
/// truncated conjugate has zero trace against every spectral projection, so
/// positivity statements are made with `form`; purely algebraic identities
/// use the section itself.
#[derive(Debug, Clone)]
pub struct ModelSection {
    pub half_width: usize,
    pub offset: i64,
    pub unitary: CMat,
    pub conjugate: CMat,
    pub form: CMat,
    pub interior_margin: usize,
}

impl ModelSection {
    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// `[A, U]` computed on the section.
    pub fn commutator(&self) -> CMat {
        linalg::commutator(&self.conjugate, &self.unitary)
    }

    /// `U*[A, U]` computed on the section.
    pub fn section_form(&self) -> CMat {
        self.unitary.adjoint() * self.commutator()
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        let m = self.interior_margin.min(self.dim() / 2);
        m..self.dim() - m
    }
}

pub trait CommutatorModel: Send + Sync {
    fn label(&self) -> String;
    fn unitary(&self) -> &UnitaryOp;
    fn conjugate(&self) -> &ConjugateOp;
    /// Section of half-width `k`. Grid models ignore `k`.
    fn section(&self, k: usize) -> Result<ModelSection>;
}

/// Lattice unitary with a diagonal conjugate.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub u: UnitaryOp,
    pub a: ConjugateOp,
    op: LatticeOp,
    diag: Diagonal,
}

impl LatticeModel {
    pub fn new(op: LatticeOp, diag: Diagonal, label: impl Into<String>) -> Result<Self> {
        Ok(Self {
            u: UnitaryOp::lattice(op.clone(), label)?,
            a: ConjugateOp::Diagonal(diag.clone()),
            op,
            diag,
        })
    }

    pub fn op(&self) -> &LatticeOp {
        &self.op
    }

    pub fn diagonal(&self) -> &Diagonal {
        &self.diag
    }

    /// `[A, U]` as an exact lattice operator.
    pub fn commutator_op(&self) -> LatticeOp {
        self.op.diag_commutator(&self.diag)
    }

    /// `U*[A, U]` as an exact lattice operator.
    pub fn form_op(&self) -> LatticeOp {
        self.op.adjoint().mul(&self.commutator_op())
    }
}

impl CommutatorModel for LatticeModel {
    fn label(&self) -> String {
        self.u.label.clone()
    }
    fn unitary(&self) -> &UnitaryOp {
        &self.u
    }
    fn conjugate(&self) -> &ConjugateOp {
        &self.a
    }
    fn section(&self, k: usize) -> Result<ModelSection> {
        let offset = -(k as i64);
        let n = 2 * k + 1;
        Ok(ModelSection {
            half_width: k,
            offset,
            unitary: self.op.closure(k, CLOSURE_TWIST)?,
            conjugate: self.a.dense_on(offset, n)?,
            form: self.form_op().section(k),
            interior_margin: 4 * self.op.bandwidth().max(1),
        })
    }
}
