use super::{CommutatorModel, LatticeModel, ModelSection};
use crate::error::{Error, Result};
use crate::operator::{ConjugateOp, Diagonal, LatticeOp, UnitaryOp};

/// Dilation flow in logarithmic coordinates `y = ln x` on the grid `kΔy`.
///
/// The time-`t` flow is the exact shift `(U_t φ)_k = φ_{k+s}` with
/// `s = t/Δy`, and the conjugate is `A = −g` with `g(y) = 2y`.
#[derive(Debug, Clone)]
pub struct DilationModel {
    pub t: f64,
    pub dy: f64,
    pub steps: i64,
    pub half_width: usize,
    pub inner: LatticeModel,
}

impl DilationModel {
    pub fn build(t: f64, dy: f64, half_width: usize) -> Result<Self> {
        if !(dy > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("need Δy > 0 and finite t, got Δy = {dy}, t = {t}")));
        }
        if half_width < 8 {
            return Err(Error::InvalidParameter(format!("half width {half_width} < 8")));
        }
        let s = (t / dy).round();
        if (t - s * dy).abs() > 1e-12 * dy.max(t.abs()) {
            return Err(Error::InvalidParameter(format!(
                "flow time {t} is not an integer multiple of Δy = {dy}"
            )));
        }
        let steps = s as i64;
        let op = LatticeOp::constant_bands(&[(-steps, crate::linalg::ONE)]);
        let diag = Diagonal::Affine { slope: -2.0 * dy, intercept: 0.0 };
        let inner = LatticeModel::new(op, diag, format!("dilation(t={t})"))?;
        Ok(Self { t, dy, steps, half_width, inner })
    }

    /// Value of the constant form `U_t*[A,U_t] = 2t`.
    pub fn expected_form(&self) -> f64 {
        2.0 * self.t
    }
}

impl CommutatorModel for DilationModel {
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
