//! Exact banded operators on ℓ²(ℤ).
//!
//! Band convention: `(Xφ)_j = Σ_d X_d(j) φ_{j−d}`, so the bilateral shift
//! `(Uφ)_j = φ_{j−1}` is the single band `d = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat};

use super::vector::ComplexVector;
use crate::error::{Error, Result};
use crate::linalg::{cis, CMat, LinOp, ONE, ZERO};

pub type CoefFn = Arc<dyn Fn(i64) -> c64 + Send + Sync>;
pub type RealFn = Arc<dyn Fn(i64) -> f64 + Send + Sync>;

/// Default support cap for lattice application.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 20;

#[derive(Clone)]
pub enum Coefficient {
    Const(c64),
    Fn(CoefFn),
}

impl Coefficient {
    #[inline]
    pub fn at(&self, j: i64) -> c64 {
        match self {
            Coefficient::Const(z) => *z,
            Coefficient::Fn(f) => f(j),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(z) => write!(f, "Const({z})"),
            Coefficient::Fn(_) => write!(f, "Fn(..)"),
        }
    }
}

/// Real diagonal `a(j)`. The affine form keeps `a(j) − a(j−d) = slope·d`
/// exact, which matters for entrywise commutator identities.
#[derive(Clone)]
pub enum Diagonal {
    Affine { slope: f64, intercept: f64 },
    Table(RealFn),
}

impl Diagonal {
    pub fn number() -> Self {
        Diagonal::Affine { slope: 1.0, intercept: 0.0 }
    }

    pub fn value(&self, j: i64) -> f64 {
        match self {
            Diagonal::Affine { slope, intercept } => slope * j as f64 + intercept,
            Diagonal::Table(f) => f(j),
        }
    }

    /// `a(j) − a(j − d)`.
    pub fn diff(&self, j: i64, d: i64) -> f64 {
        match self {
            Diagonal::Affine { slope, .. } => slope * d as f64,
            Diagonal::Table(f) => f(j) - f(j - d),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Diagonal::Affine { slope, intercept } => {
                Diagonal::Affine { slope: c * slope, intercept: c * intercept }
            }
            Diagonal::Table(f) => {
                let f = f.clone();
                Diagonal::Table(Arc::new(move |j| c * f(j)))
            }
        }
    }
}

impl fmt::Debug for Diagonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagonal::Affine { slope, intercept } => {
                write!(f, "Affine {{ slope: {slope}, intercept: {intercept} }}")
            }
            Diagonal::Table(_) => write!(f, "Table(..)"),
        }
    }
}

#[derive(Debug)]
enum Node {
    Bands(BTreeMap<i64, Coefficient>),
    Sum(Vec<LatticeOp>),
    Product(LatticeOp, LatticeOp),
    Power(LatticeOp, u32),
    Scaled(c64, LatticeOp),
    Adjoint(LatticeOp),
    /// `[A, X]` for diagonal `A`.
    DiagCommutator(Diagonal, LatticeOp),
    /// `e^{−itA} X e^{itA}` for diagonal `A`.
    DiagConjugation(Diagonal, f64, LatticeOp),
}

/// Immutable expression tree of banded lattice operators.
#[derive(Debug, Clone)]
pub struct LatticeOp(Arc<Node>);

/// Rows `lo..=hi` of a banded operator, all bands `dmin..=dmax`.
#[derive(Debug, Clone)]
pub struct BandWindow {
    pub lo: i64,
    pub hi: i64,
    pub dmin: i64,
    pub dmax: i64,
    data: Vec<c64>,
}

impl BandWindow {
    pub fn zeros(lo: i64, hi: i64, dmin: i64, dmax: i64) -> Self {
        let rows = (hi - lo + 1).max(0) as usize;
        let width = (dmax - dmin + 1).max(0) as usize;
        Self { lo, hi, dmin, dmax, data: vec![ZERO; rows * width] }
    }

    #[inline]
    fn width(&self) -> usize {
        (self.dmax - self.dmin + 1) as usize
    }

    #[inline]
    fn idx(&self, j: i64, d: i64) -> usize {
        debug_assert!(j >= self.lo && j <= self.hi && d >= self.dmin && d <= self.dmax);
        (j - self.lo) as usize * self.width() + (d - self.dmin) as usize
    }

    /// Entry `X_d(j)`; zero outside the stored band range.
    #[inline]
    pub fn get(&self, j: i64, d: i64) -> c64 {
        if d < self.dmin || d > self.dmax {
            return ZERO;
        }
        assert!(j >= self.lo && j <= self.hi, "row {j} outside window {}..={}", self.lo, self.hi);
        self.data[self.idx(j, d)]
    }

    #[inline]
    pub fn set(&mut self, j: i64, d: i64, z: c64) {
        let i = self.idx(j, d);
        self.data[i] = z;
    }

    #[inline]
    fn add_to(&mut self, j: i64, d: i64, z: c64) {
        let i = self.idx(j, d);
        self.data[i] += z;
    }

    /// Matrix entry `X_{row, col}`.
    pub fn entry(&self, row: i64, col: i64) -> c64 {
        self.get(row, row - col)
    }

    /// Rows `lo..=hi` of `X·Y`; `y` must cover rows `lo − X.dmax ..= hi − X.dmin`.
    pub fn mul(x: &BandWindow, y: &BandWindow, lo: i64, hi: i64) -> BandWindow {
        let mut out = BandWindow::zeros(lo, hi, x.dmin + y.dmin, x.dmax + y.dmax);
        for j in lo..=hi {
            for d1 in x.dmin..=x.dmax {
                let a = x.get(j, d1);
                if a == ZERO {
                    continue;
                }
                let r = j - d1;
                let base = y.idx(r, y.dmin);
                let row = &y.data[base..base + y.width()];
                let obase = out.idx(j, d1 + y.dmin);
                for (k, b) in row.iter().enumerate() {
                    out.data[obase + k] += a * b;
                }
            }
        }
        out
    }

    /// Dense finite section on `lo..=hi` (open boundary).
    pub fn to_dense(&self) -> CMat {
        let n = (self.hi - self.lo + 1) as usize;
        let mut m: CMat = Mat::zeros(n, n);
        for j in self.lo..=self.hi {
            for d in self.dmin..=self.dmax {
                let c = j - d;
                if c >= self.lo && c <= self.hi {
                    m[((j - self.lo) as usize, (c - self.lo) as usize)] = self.get(j, d);
                }
            }
        }
        m
    }

    /// Largest entry modulus over the window.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The window with rows restricted to `lo..=hi`.
    pub fn rows(&self, lo: i64, hi: i64) -> BandWindow {
        let mut out = BandWindow::zeros(lo, hi, self.dmin, self.dmax);
        for j in lo..=hi {
            for d in self.dmin..=self.dmax {
                out.set(j, d, self.get(j, d));
            }
        }
        out
    }

    /// Linear-operator view of the open-boundary section (columns = rows).
    pub fn section_view(&self) -> SectionView<'_> {
        SectionView { w: self }
    }
}

/// The square section `lo..=hi` of a band window, applied without densifying.
pub struct SectionView<'a> {
    w: &'a BandWindow,
}

impl LinOp for SectionView<'_> {
    fn nrows(&self) -> usize {
        (self.w.hi - self.w.lo + 1) as usize
    }
    fn ncols(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[c64]) -> Vec<c64> {
        let w = self.w;
        (w.lo..=w.hi)
            .map(|j| {
                let mut s = ZERO;
                for d in w.dmin..=w.dmax {
                    let c = j - d;
                    if c >= w.lo && c <= w.hi {
                        s += w.get(j, d) * x[(c - w.lo) as usize];
                    }
                }
                s
            })
            .collect()
    }
    fn apply_adjoint(&self, y: &[c64]) -> Vec<c64> {
        let w = self.w;
        let mut out = vec![ZERO; self.nrows()];
        for j in w.lo..=w.hi {
            let yj = y[(j - w.lo) as usize];
            for d in w.dmin..=w.dmax {
                let c = j - d;
                if c >= w.lo && c <= w.hi {
                    out[(c - w.lo) as usize] += w.get(j, d).conj() * yj;
                }
            }
        }
        out
    }
}

impl LatticeOp {
    fn from_node(n: Node) -> Self {
        LatticeOp(Arc::new(n))
    }

    pub fn bands(bands: BTreeMap<i64, Coefficient>) -> Self {
        Self::from_node(Node::Bands(bands))
    }

    pub fn identity() -> Self {
        Self::constant_bands(&[(0, ONE)])
    }

    pub fn zero() -> Self {
        Self::constant_bands(&[(0, ZERO)])
    }

    /// Constant-coefficient (Laurent) operator `Σ c_d S^d`.
    pub fn constant_bands(bands: &[(i64, c64)]) -> Self {
        Self::bands(bands.iter().map(|&(d, z)| (d, Coefficient::Const(z))).collect())
    }

    /// Bilateral shift `(Uφ)_j = φ_{j−1}`.
    pub fn shift() -> Self {
        Self::constant_bands(&[(1, ONE)])
    }

    /// Multiplication by `f(j)`.
    pub fn multiplication(f: CoefFn) -> Self {
        let mut b = BTreeMap::new();
        b.insert(0, Coefficient::Fn(f));
        Self::bands(b)
    }

    pub fn diagonal(a: &Diagonal) -> Self {
        let a = a.clone();
        Self::multiplication(Arc::new(move |j| c64::new(a.value(j), 0.0)))
    }

    /// Identity plus a finite block: the operator acts as `block` on sites
    /// `start..start+m` and as the identity elsewhere.
    pub fn local_block(start: i64, block: &CMat) -> Self {
        let m = block.nrows() as i64;
        let block: Arc<Vec<Vec<c64>>> = Arc::new(
            (0..m as usize).map(|i| (0..m as usize).map(|j| block[(i, j)]).collect()).collect(),
        );
        let mut bands = BTreeMap::new();
        for d in -(m - 1)..=(m - 1) {
            let b = block.clone();
            let f: CoefFn = Arc::new(move |j| {
                let r = j - start;
                let c = j - d - start;
                if (0..m).contains(&r) && (0..m).contains(&c) {
                    b[r as usize][c as usize]
                } else if d == 0 {
                    ONE
                } else {
                    ZERO
                }
            });
            bands.insert(d, Coefficient::Fn(f));
        }
        Self::bands(bands)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_node(Node::Sum(vec![self.clone(), other.clone()]))
    }

    pub fn sum(terms: Vec<Self>) -> Self {
        if terms.is_empty() {
            return Self::zero();
        }
        Self::from_node(Node::Sum(terms))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Composition `self · other` (other applied first).
    pub fn mul(&self, other: &Self) -> Self {
        Self::from_node(Node::Product(self.clone(), other.clone()))
    }

    pub fn pow(&self, k: u32) -> Self {
        Self::from_node(Node::Power(self.clone(), k))
    }

    pub fn scale(&self, z: c64) -> Self {
        Self::from_node(Node::Scaled(z, self.clone()))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_node(Node::Adjoint(self.clone()))
    }

    /// `[A, self]` for diagonal `A`.
    pub fn diag_commutator(&self, a: &Diagonal) -> Self {
        Self::from_node(Node::DiagCommutator(a.clone(), self.clone()))
    }

    /// `e^{−itA} self e^{itA}` for diagonal `A`.
    pub fn diag_conjugate(&self, a: &Diagonal, t: f64) -> Self {
        Self::from_node(Node::DiagConjugation(a.clone(), t, self.clone()))
    }

    /// Structural band range `(dmin, dmax)`.
    pub fn band_range(&self) -> (i64, i64) {
        match &*self.0 {
            Node::Bands(b) => match (b.keys().next(), b.keys().next_back()) {
                (Some(&lo), Some(&hi)) => (lo, hi),
                _ => (0, 0),
            },
            Node::Sum(terms) => terms.iter().map(|t| t.band_range()).fold(
                (i64::MAX, i64::MIN),
                |(a, b), (c, d)| (a.min(c), b.max(d)),
            ),
            Node::Product(x, y) => {
                let (a, b) = x.band_range();
                let (c, d) = y.band_range();
                (a + c, b + d)
            }
            Node::Power(x, k) => {
                if *k == 0 {
                    (0, 0)
                } else {
                    let (a, b) = x.band_range();
                    (a * *k as i64, b * *k as i64)
                }
            }
            Node::Scaled(_, x) | Node::DiagCommutator(_, x) | Node::DiagConjugation(_, _, x) => {
                x.band_range()
            }
            Node::Adjoint(x) => {
                let (a, b) = x.band_range();
                (-b, -a)
            }
        }
    }

    /// Half bandwidth `max(|dmin|, |dmax|)`.
    pub fn bandwidth(&self) -> usize {
        let (a, b) = self.band_range();
        a.unsigned_abs().max(b.unsigned_abs()) as usize
    }

    /// Exact rows `lo..=hi` of the infinite operator.
    pub fn materialize(&self, lo: i64, hi: i64) -> BandWindow {
        match &*self.0 {
            Node::Bands(b) => {
                let (dmin, dmax) = self.band_range();
                let mut w = BandWindow::zeros(lo, hi, dmin, dmax);
                for (&d, coef) in b {
                    for j in lo..=hi {
                        w.set(j, d, coef.at(j));
                    }
                }
                w
            }
            Node::Sum(terms) => {
                let (dmin, dmax) = self.band_range();
                let mut w = BandWindow::zeros(lo, hi, dmin, dmax);
                for t in terms {
                    let tw = t.materialize(lo, hi);
                    for j in lo..=hi {
                        for d in tw.dmin..=tw.dmax {
                            w.add_to(j, d, tw.get(j, d));
                        }
                    }
                }
                w
            }
            Node::Product(x, y) => {
                let (xmin, xmax) = x.band_range();
                let xw = x.materialize(lo, hi);
                let yw = y.materialize(lo - xmax, hi - xmin);
                BandWindow::mul(&xw, &yw, lo, hi)
            }
            Node::Power(x, k) => {
                if *k == 0 {
                    return LatticeOp::identity().materialize(lo, hi);
                }
                let (xmin, xmax) = x.band_range();
                let k = *k as i64;
                // Factor i (0 = leftmost) is needed on rows lo − i·xmax ..= hi − i·xmin.
                let span_lo = (0..k).map(|i| lo - i * xmax).min().unwrap();
                let span_hi = (0..k).map(|i| hi - i * xmin).max().unwrap();
                let xw = x.materialize(span_lo, span_hi);
                let mut acc = xw.rows(lo - (k - 1) * xmax, hi - (k - 1) * xmin);
                for i in (0..k - 1).rev() {
                    acc = BandWindow::mul(&xw, &acc, lo - i * xmax, hi - i * xmin);
                }
                acc
            }
            Node::Scaled(z, x) => {
                let mut w = x.materialize(lo, hi);
                for v in &mut w.data {
                    *v *= z;
                }
                w
            }
            Node::Adjoint(x) => {
                let (xmin, xmax) = x.band_range();
                let xw = x.materialize(lo + xmin, hi + xmax);
                let mut w = BandWindow::zeros(lo, hi, -xmax, -xmin);
                for j in lo..=hi {
                    for d in -xmax..=-xmin {
                        w.set(j, d, xw.get(j - d, -d).conj());
                    }
                }
                w
            }
            Node::DiagCommutator(a, x) => {
                let mut w = x.materialize(lo, hi);
                for j in lo..=hi {
                    for d in w.dmin..=w.dmax {
                        let i = w.idx(j, d);
                        w.data[i] *= a.diff(j, d);
                    }
                }
                w
            }
            Node::DiagConjugation(a, t, x) => {
                let mut w = x.materialize(lo, hi);
                for j in lo..=hi {
                    for d in w.dmin..=w.dmax {
                        let i = w.idx(j, d);
                        w.data[i] *= cis(-t * a.diff(j, d));
                    }
                }
                w
            }
        }
    }

    /// Open-boundary section `P_K X P_K` on sites `-k..=k`.
    pub fn section(&self, k: usize) -> CMat {
        let k = k as i64;
        self.materialize(-k, k).to_dense()
    }

    /// Norm of the open-boundary section on `-k..=k`.
    pub fn section_norm(&self, k: usize) -> Result<f64> {
        let k = k as i64;
        let w = self.materialize(-k, k);
        crate::linalg::spectral_norm(&w.section_view(), Default::default())
    }

    /// Periodic closure on `-k..=k` with Bloch twist `τ` (`φ_{j+n} = τ φ_j`).
    ///
    /// The wrap is applied to each elementary band operator and then
    /// propagated through the algebra, so the closure of a product of
    /// unitary Laurent and diagonal factors is again unitary.
    pub fn closure(&self, k: usize, twist: c64) -> Result<CMat> {
        let n = 2 * k + 1;
        if self.bandwidth() >= n {
            return Err(Error::SectionTooSmall { required_k: self.bandwidth() });
        }
        let ki = k as i64;
        let ni = n as i64;
        Ok(match &*self.0 {
            Node::Bands(b) => {
                let mut m: CMat = Mat::zeros(n, n);
                for (&d, coef) in b {
                    for j in -ki..=ki {
                        let mut c = j - d;
                        let mut phase = ONE;
                        if c < -ki {
                            c += ni;
                            phase = twist.conj();
                        } else if c > ki {
                            c -= ni;
                            phase = twist;
                        }
                        m[((j + ki) as usize, (c + ki) as usize)] += coef.at(j) * phase;
                    }
                }
                m
            }
            Node::Sum(terms) => {
                let mut m: CMat = Mat::zeros(n, n);
                for t in terms {
                    m += t.closure(k, twist)?;
                }
                m
            }
            Node::Product(x, y) => x.closure(k, twist)? * y.closure(k, twist)?,
            Node::Power(x, p) => {
                let xc = x.closure(k, twist)?;
                let mut acc = crate::linalg::identity(n);
                for _ in 0..*p {
                    acc = &xc * &acc;
                }
                acc
            }
            Node::Scaled(z, x) => crate::linalg::scale(&x.closure(k, twist)?, *z),
            Node::Adjoint(x) => crate::linalg::adjoint(&x.closure(k, twist)?),
            Node::DiagCommutator(a, x) => {
                let xc = x.closure(k, twist)?;
                Mat::from_fn(n, n, |r, c| {
                    xc[(r, c)] * (a.value(r as i64 - ki) - a.value(c as i64 - ki))
                })
            }
            Node::DiagConjugation(a, t, x) => {
                let xc = x.closure(k, twist)?;
                Mat::from_fn(n, n, |r, c| {
                    xc[(r, c)] * cis(-t * (a.value(r as i64 - ki) - a.value(c as i64 - ki)))
                })
            }
        })
    }

    /// Exact action on a finitely supported vector.
    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        self.apply_capped(v, DEFAULT_SUPPORT_CAP)
    }

    pub fn apply_capped(&self, v: &ComplexVector, cap: usize) -> Result<ComplexVector> {
        self.act(v, false, cap)
    }

    pub fn apply_adjoint(&self, v: &ComplexVector) -> Result<ComplexVector> {
        self.act(v, true, DEFAULT_SUPPORT_CAP)
    }

    fn act(&self, v: &ComplexVector, adj: bool, cap: usize) -> Result<ComplexVector> {
        if v.is_empty() {
            return Ok(v.clone());
        }
        match &*self.0 {
            Node::Bands(b) => {
                let (dmin, dmax) = self.band_range();
                let (lo, hi) = if adj {
                    (v.offset - dmax, v.hi() - dmin)
                } else {
                    (v.offset + dmin, v.hi() + dmax)
                };
                let len = (hi - lo + 1) as usize;
                if len > cap {
                    return Err(Error::TruncationNeeded { required: len, cap });
                }
                let mut out = ComplexVector::zeros(lo, hi);
                for (&d, coef) in b {
                    for (i, &x) in v.entries.iter().enumerate() {
                        if x == ZERO {
                            continue;
                        }
                        let s = v.offset + i as i64;
                        if adj {
                            // (X*v)_{s−d} += conj(X_d(s)) v_s
                            out.entries[(s - d - lo) as usize] += coef.at(s).conj() * x;
                        } else {
                            // (Xv)_{s+d} += X_d(s+d) v_s
                            out.entries[(s + d - lo) as usize] += coef.at(s + d) * x;
                        }
                    }
                }
                Ok(out)
            }
            Node::Sum(terms) => {
                let mut acc = ComplexVector::new(Vec::new(), v.offset);
                for t in terms {
                    acc = acc.axpy(ONE, &t.act(v, adj, cap)?);
                }
                Ok(acc)
            }
            Node::Product(x, y) => {
                if adj {
                    y.act(&x.act(v, true, cap)?, true, cap)
                } else {
                    x.act(&y.act(v, false, cap)?, false, cap)
                }
            }
            Node::Power(x, k) => {
                let mut w = v.clone();
                for _ in 0..*k {
                    w = x.act(&w, adj, cap)?;
                }
                Ok(w)
            }
            Node::Scaled(z, x) => {
                let z = if adj { z.conj() } else { *z };
                Ok(x.act(v, adj, cap)?.scaled(z))
            }
            Node::Adjoint(x) => x.act(v, !adj, cap),
            Node::DiagCommutator(a, x) => {
                // [A,X]* = X*A − AX*
                let av = v.map_sites(|s, z| z * a.value(s));
                let xav = x.act(&av, adj, cap)?;
                let axv = x.act(v, adj, cap)?.map_sites(|s, z| z * a.value(s));
                Ok(if adj { xav.axpy(-ONE, &axv) } else { axv.axpy(-ONE, &xav) })
            }
            Node::DiagConjugation(a, t, x) => {
                let phased = v.map_sites(|s, z| z * cis(t * a.value(s)));
                Ok(x.act(&phased, adj, cap)?.map_sites(|s, z| z * cis(-t * a.value(s))))
            }
        }
    }
}
