//! Registry of runnable checks, their parameters and executors.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use faer::c64;
use mourre_core::cayley::{build_cayley, mourre_transfer, verify_identity_a, verify_identity_b};
use mourre_core::lap::{delta_kernel, lap_sweep, smooth_sum, wiener_diagnostic, LapConfig, SmoothTarget};
use mourre_core::linalg::{self, cis};
use mourre_core::models::{
    averaged_lemma_residual, averaged_lemma_residual_dense, ergodic_average_bound,
    mourre_constant_cocycle, CocycleModel, CommutatorModel, DilationModel, FreeEvolutionModel,
    LatticeModel, ShiftModel, G_HAT_GRID,
};
use mourre_core::mourre::{certify_mourre, count_window_eigenvalues, count_window_eigenvalues_lattice};
use mourre_core::operator::{serialize, ComplexVector, ConjugateOp, DenseOperator, Operator, SpectralWindow};
use mourre_core::regularity::{classify, log_grid, DivergenceFlag};
use mourre_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ModelSpec;

pub struct CheckInfo {
    pub name: &'static str,
    /// What the check certifies, in one line.
    pub anchor: &'static str,
    /// Whether the check's cells may run on the worker pool.
    pub parallel: bool,
    pub default_tolerance: f64,
}

const fn info(name: &'static str, anchor: &'static str, parallel: bool, default_tolerance: f64) -> CheckInfo {
    CheckInfo { name, anchor, parallel, default_tolerance }
}

/// Stable, alphabetical.
pub const REGISTRY: &[CheckInfo] = &[
    info("averaged_lemma", "commutator with the time-averaged conjugate equals the averaged commutator", false, 1e-10),
    info("certify_mourre", "strict Mourre estimate for the unitary on a spectral arc", false, 1e-12),
    info("count_window_eigenvalues", "section eigenvalues in an arc, screened by a lattice residual test", false, 1e-8),
    info("delta_kernel", "difference of interior and exterior resolvents is a positive Gram product", false, 1e-10),
    info("ergodic_average_bound", "uniform bound on Birkhoff averages of h' along the rotation", false, 1e-10),
    info("export_section", "operator section written in the binary or JSON interchange format", false, 1e-12),
    info("lap_sweep", "weighted resolvents of the Cayley transform stay bounded as eps decreases", true, 1e-6),
    info("mourre_constant_cocycle", "averaged conjugate yields a strict Mourre estimate for the cocycle", false, 1e-6),
    info("mourre_transfer", "Mourre constant of the Cayley transform is at least half that of the unitary", false, 1e-8),
    info("regularity", "C^{1,1} and C^{1+0} integrands of the conjugation group with their integrals", true, 1e-8),
    info("smooth_sum", "global U-smoothness of the weight <A>^{-s} through dyadic tails", false, 1e-10),
    info("verify_identity_a", "commutator of the Cayley resolvent at i reduces to that of U", false, 1e-12),
    info("verify_identity_b", "commutator of the Cayley transform through its resolvent", false, 1e-8),
    info("wiener_diagnostic", "Cesaro means of correlations bound the point-spectral mass of a probe", false, 1e-10),
];

pub fn lookup(name: &str) -> Option<&'static CheckInfo> {
    REGISTRY.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
}

/// Numeric table written as the check's CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutput {
    pub status: Status,
    pub payload: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub table: Option<Table>,
}

impl CheckOutput {
    fn new(status: Status) -> Self {
        Self { status, payload: BTreeMap::new(), notes: Vec::new(), table: None }
    }

    /// Non-finite values are kept out of the numeric payload and noted.
    fn put(&mut self, key: &str, v: f64) {
        if v.is_finite() {
            self.payload.insert(key.to_string(), v);
        } else {
            self.notes.push(format!("{key} = {v}"));
        }
    }

    fn table(&mut self, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.table = Some(Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows });
    }
}

fn bool_num(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

// ---- parameters ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyParams {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub k: Option<usize>,
    #[serde(default)]
    pub allowance_rank: usize,
    /// Expected Mourre constant, compared to the tolerance when given.
    pub expected_a: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    /// Angle of the base point; the widest spectral gap when omitted.
    pub theta: Option<f64>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferParams {
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "minus_one")]
    pub lo: f64,
    #[serde(default = "plus_one")]
    pub hi: f64,
    /// Mourre constant of the unitary; the bottom of the commutator form
    /// when omitted.
    pub a: Option<f64>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaParams {
    #[serde(default = "default_z")]
    pub z: [f64; 2],
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountParams {
    pub lo: f64,
    pub hi: f64,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicParams {
    pub n: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AveragingParams {
    pub n: usize,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityParams {
    #[serde(default = "default_regularity_ks")]
    pub k_schedule: Vec<usize>,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LapParams {
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_lap_ks")]
    pub ks: Vec<usize>,
    /// Largest accepted |slope| over the last stabilized decade.
    pub max_slope: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothParams {
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub site: i64,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_fallback")]
    pub fallback_k: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerParams {
    #[serde(default = "default_wiener_n")]
    pub n: usize,
    #[serde(default)]
    pub site: i64,
    /// Cesaro mean below which no point part is reported.
    #[serde(default = "default_wiener_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    Json,
    Binary,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportParams {
    #[serde(default)]
    pub format: ExportFormat,
    pub k: Option<usize>,
}

fn minus_one() -> f64 {
    -1.0
}
fn plus_one() -> f64 {
    1.0
}
fn default_z() -> [f64; 2] {
    [0.5, 0.3]
}
fn default_grid() -> usize {
    G_HAT_GRID
}
fn default_regularity_ks() -> Vec<usize> {
    vec![16, 32, 64]
}
fn default_t_min() -> f64 {
    1e-4
}
fn default_t_points() -> usize {
    64
}
fn default_lambdas() -> Vec<f64> {
    vec![0.0]
}
fn default_s() -> f64 {
    0.6
}
fn default_eps() -> Vec<f64> {
    vec![1e-1, 10f64.powf(-1.5), 1e-2]
}
fn default_lap_ks() -> Vec<usize> {
    vec![64, 128, 256]
}
fn default_k_max() -> u32 {
    6
}
fn default_fallback() -> usize {
    1024
}
fn default_wiener_n() -> usize {
    4096
}
fn default_wiener_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone)]
pub enum CheckParams {
    AveragedLemma(AveragingParams),
    CertifyMourre(CertifyParams),
    CountWindow(CountParams),
    DeltaKernel(DeltaParams),
    ErgodicBound(ErgodicParams),
    Export(ExportParams),
    Lap(LapParams),
    CocycleMourre(AveragingParams),
    Transfer(TransferParams),
    Regularity(RegularityParams),
    Smooth(SmoothParams),
    IdentityA(IdentityParams),
    IdentityB(IdentityParams),
    Wiener(WienerParams),
}

fn de<T: DeserializeOwned>(v: &Value) -> std::result::Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| e.to_string())
}

impl CheckParams {
    pub fn parse(op: &str, v: &Value) -> std::result::Result<Self, String> {
        Ok(match op {
            "averaged_lemma" => CheckParams::AveragedLemma(de(v)?),
            "certify_mourre" => CheckParams::CertifyMourre(de(v)?),
            "count_window_eigenvalues" => CheckParams::CountWindow(de(v)?),
            "delta_kernel" => CheckParams::DeltaKernel(de(v)?),
            "ergodic_average_bound" => CheckParams::ErgodicBound(de(v)?),
            "export_section" => CheckParams::Export(de(v)?),
            "lap_sweep" => CheckParams::Lap(de(v)?),
            "mourre_constant_cocycle" => CheckParams::CocycleMourre(de(v)?),
            "mourre_transfer" => CheckParams::Transfer(de(v)?),
            "regularity" => CheckParams::Regularity(de(v)?),
            "smooth_sum" => CheckParams::Smooth(de(v)?),
            "verify_identity_a" => CheckParams::IdentityA(de(v)?),
            "verify_identity_b" => CheckParams::IdentityB(de(v)?),
            "wiener_diagnostic" => CheckParams::Wiener(de(v)?),
            other => return Err(format!("unknown check op {other:?}")),
        })
    }
}

// ---- models ----

pub enum BuiltModel {
    Shift(ShiftModel, usize),
    FreeEvolution(FreeEvolutionModel),
    Cocycle(CocycleModel),
    Dilation(DilationModel),
}

impl BuiltModel {
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        Ok(match spec {
            ModelSpec::Shift(s) => {
                if s.half_width < 8 {
                    return Err(Error::InvalidParameter(format!("half width {} < 8", s.half_width)));
                }
                BuiltModel::Shift(ShiftModel::build()?, s.half_width)
            }
            ModelSpec::FreeEvolution(s) => {
                BuiltModel::FreeEvolution(FreeEvolutionModel::build(s.time, s.cutoff, s.points)?)
            }
            ModelSpec::Cocycle(s) => {
                let h: Vec<(i64, c64)> = s.h_hat.iter().map(|c| (c.k, c64::new(c.re, c.im))).collect();
                BuiltModel::Cocycle(CocycleModel::build(s.m, &h, s.theta, s.half_width)?)
            }
            ModelSpec::Dilation(s) => BuiltModel::Dilation(DilationModel::build(s.t, s.dy, s.half_width)?),
        })
    }

    fn model(&self) -> &dyn CommutatorModel {
        match self {
            BuiltModel::Shift(m, _) => m,
            BuiltModel::FreeEvolution(m) => m,
            BuiltModel::Cocycle(m) => m,
            BuiltModel::Dilation(m) => m,
        }
    }

    fn half_width(&self) -> usize {
        match self {
            BuiltModel::Shift(_, k) => *k,
            BuiltModel::FreeEvolution(m) => m.points / 2,
            BuiltModel::Cocycle(m) => m.half_width,
            BuiltModel::Dilation(m) => m.half_width,
        }
    }

    fn lattice(&self) -> Option<&LatticeModel> {
        match self {
            BuiltModel::Shift(m, _) => Some(&m.inner),
            BuiltModel::FreeEvolution(_) => None,
            BuiltModel::Cocycle(m) => Some(&m.inner),
            BuiltModel::Dilation(m) => Some(&m.inner),
        }
    }

    fn cocycle(&self, op: &str) -> Result<&CocycleModel> {
        match self {
            BuiltModel::Cocycle(m) => Ok(m),
            _ => Err(Error::Precondition(format!("{op} requires the cocycle model"))),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self {
            BuiltModel::Cocycle(m) => m.warnings.clone(),
            _ => Vec::new(),
        }
    }

    /// Unitary and conjugate as realization-agnostic operators.
    fn operators(&self) -> Result<(Operator, ConjugateOp)> {
        match (self.lattice(), self) {
            (Some(l), _) => Ok((Operator::Lattice(l.op().clone()), l.a.clone())),
            (None, BuiltModel::FreeEvolution(m)) => {
                let d = m.u.as_dense().expect("free evolution is dense");
                Ok((Operator::Dense(DenseOperator::new(d.mat.clone(), d.offset)), m.a.clone()))
            }
            _ => unreachable!("every non-lattice model is dense"),
        }
    }
}

// ---- execution ----

pub struct RunContext<'a> {
    pub model: &'a BuiltModel,
    pub out_dir: &'a Path,
    pub name: &'a str,
    pub tolerance: f64,
}

pub fn execute(params: &CheckParams, ctx: &RunContext) -> Result<CheckOutput> {
    let tol = ctx.tolerance;
    let model = ctx.model;
    let section = |k: Option<usize>| model.model().section(k.unwrap_or(model.half_width()));
    match params {
        CheckParams::CertifyMourre(p) => {
            let sec = section(p.k)?;
            let window = SpectralWindow::new(p.lo.unwrap_or(0.05), p.hi.unwrap_or(TAU - 0.05))?;
            let cert = certify_mourre(&sec, &window, p.allowance_rank)?;
            let expected_ok = p.expected_a.map_or(true, |a| (cert.a_estimate - a).abs() <= tol);
            let status = if cert.vacuous {
                Status::Flagged
            } else if cert.pass && expected_ok {
                Status::Pass
            } else {
                Status::Fail
            };
            let mut out = CheckOutput::new(status);
            out.put("a_estimate", cert.a_estimate);
            out.put("min_eig_after_allowance", cert.min_eig_after_allowance);
            out.put("allowance_norm", cert.compact_allowance.norm);
            out.put("allowance_rank", cert.compact_allowance.rank as f64);
            out.put("range_dim", cert.range_dim as f64);
            out.put("section_size", cert.section_size as f64);
            out.notes = cert.warnings;
            let rows = cert.compressed_spectrum.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect();
            out.table(&["index", "eigenvalue"], rows);
            Ok(out)
        }
        CheckParams::IdentityA(p) => {
            let sec = section(p.k)?;
            let theta = match p.theta {
                Some(phi) => cis(phi),
                None => linalg::gap_point(&sec.unitary)?,
            };
            let r = verify_identity_a(&sec.unitary, &sec.conjugate, theta)?;
            let n = sec.dim() as f64;
            let mut out = CheckOutput::new(if r <= tol * n { Status::Pass } else { Status::Fail });
            out.put("residual", r);
            out.put("bound", tol * n);
            out.put("theta", linalg::angle(theta));
            out.put("dim", n);
            Ok(out)
        }
        CheckParams::IdentityB(p) => {
            let sec = section(p.k)?;
            let theta = match p.theta {
                Some(phi) => cis(phi),
                None => linalg::gap_point(&sec.unitary)?,
            };
            let c = build_cayley(&sec.unitary, theta)?;
            let (r, cond) = verify_identity_b(&c, &sec.conjugate)?;
            let mut out = CheckOutput::new(if r <= tol * cond { Status::Pass } else { Status::Fail });
            out.put("residual", r);
            out.put("condition", cond);
            out.put("bound", tol * cond);
            out.put("theta", linalg::angle(theta));
            Ok(out)
        }
        CheckParams::Transfer(p) => {
            let sec = section(p.k)?;
            let a = match p.a {
                Some(a) => a,
                None => linalg::hermitian_eigenvalues(&linalg::hermitize(&sec.form).0)?[0],
            };
            let r = mourre_transfer(&sec, cis(p.theta), (p.lo, p.hi), a)?;
            let status = if r.vacuous {
                Status::Flagged
            } else if r.lhs_min_eig.is_some_and(|m| m >= r.bound - tol) {
                Status::Pass
            } else {
                Status::Fail
            };
            let mut out = CheckOutput::new(status);
            if let Some(m) = r.lhs_min_eig {
                out.put("min_eig", m);
            }
            out.put("bound", r.bound);
            out.put("a", a);
            out.put("rank", r.rank as f64);
            if r.vacuous {
                out.notes.push("no spectrum of the Cayley transform in the interval".into());
            }
            Ok(out)
        }
        CheckParams::DeltaKernel(p) => {
            let sec = section(p.k)?;
            let d = delta_kernel(&sec.unitary, c64::new(p.z[0], p.z[1]))?;
            let ok = d.factorization_residual <= tol && d.min_eig >= -tol;
            let mut out = CheckOutput::new(if ok { Status::Pass } else { Status::Fail });
            out.put("factorization_residual", d.factorization_residual);
            out.put("min_eig", d.min_eig);
            Ok(out)
        }
        CheckParams::CountWindow(p) => {
            let window = SpectralWindow::new(p.lo, p.hi)?;
            let mut out = CheckOutput::new(Status::Pass);
            match model.lattice() {
                Some(l) => {
                    let k = p.k.unwrap_or(model.half_width());
                    let sec = model.model().section(k)?;
                    let c = count_window_eigenvalues_lattice(l.op(), &sec.unitary, &window, tol)?;
                    out.put("count", c.count as f64);
                    if let Some(g) = c.genuine {
                        out.put("genuine", g as f64);
                    }
                    if let Some(f) = c.flag {
                        out.status = Status::Flagged;
                        out.notes.push(f);
                    }
                }
                None => {
                    let sec = section(p.k)?;
                    out.put("count", count_window_eigenvalues(&sec.unitary, &window)? as f64);
                }
            }
            Ok(out)
        }
        CheckParams::ErgodicBound(p) => {
            let m = model.cocycle("ergodic_average_bound")?;
            let h: Vec<(i64, c64)> = m.h_hat.iter().map(|(&l, &z)| (l, z)).collect();
            let b = ergodic_average_bound(&h, m.theta, p.n, p.grid)?;
            let mut out = CheckOutput::new(if b.warnings.is_empty() { Status::Pass } else { Status::Flagged });
            out.put("sup", b.sup);
            out.put("argmax", b.argmax);
            out.put("n", p.n as f64);
            out.notes = b.warnings;
            Ok(out)
        }
        CheckParams::CocycleMourre(p) => {
            let m = model.cocycle("mourre_constant_cocycle")?;
            let r = mourre_constant_cocycle(m, p.n)?;
            let ok = r.min_eig >= r.symbol_floor - r.tolerance - tol;
            let mut out = CheckOutput::new(if ok { Status::Pass } else { Status::Fail });
            out.put("min_eig", r.min_eig);
            out.put("symbol_floor", r.symbol_floor);
            out.put("ergodic_bound", r.ergodic_bound);
            out.put("truncation_tolerance", r.tolerance);
            Ok(out)
        }
        CheckParams::AveragedLemma(p) => {
            let r = match model.lattice() {
                Some(l) => {
                    let a = mourre_core::operator::LatticeOp::diagonal(l.diagonal());
                    averaged_lemma_residual(l.op(), &a, p.n, p.k.unwrap_or(model.half_width()))?
                }
                None => {
                    let sec = section(p.k)?;
                    averaged_lemma_residual_dense(&sec.unitary, &sec.conjugate, p.n)?
                }
            };
            let mut out = CheckOutput::new(if r <= tol { Status::Pass } else { Status::Fail });
            out.put("residual", r);
            Ok(out)
        }
        CheckParams::Regularity(p) => {
            let t = log_grid(p.t_min, p.t_points);
            let (u, a) = model.operators()?;
            let r = classify(|_| Ok((u.clone(), a.clone())), &t, &p.k_schedule)?;
            let converged = r.divergence_flag.c11 == DivergenceFlag::Converged
                && r.divergence_flag.c1plus0 == DivergenceFlag::Converged;
            let mut out = CheckOutput::new(if converged { Status::Pass } else { Status::Flagged });
            out.put("c11_integral", r.integral_estimates.c11);
            out.put("c1plus0_integral", r.integral_estimates.c1plus0);
            out.notes.push(format!("c11 {}, c1plus0 {}", r.divergence_flag.c11, r.divergence_flag.c1plus0));
            let k = *p.k_schedule.last().unwrap_or(&0) as f64;
            let rows = t
                .iter()
                .zip(&r.c11_integrand)
                .zip(&r.c1plus0_integrand)
                .map(|((t, a), b)| vec![*t, *a, *b, k])
                .collect();
            out.table(&["t", "c11_integrand", "c1plus0_integrand", "K"], rows);
            Ok(out)
        }
        CheckParams::Lap(p) => {
            let sweep = lap_sweep(model.model(), cis(p.theta), &p.lambdas, p.s, &p.eps, &p.ks, LapConfig::default())?;
            let mut out = CheckOutput::new(Status::Pass);
            match sweep.sup_bound {
                Some(s) => out.put("sup_bound", s),
                None => {
                    out.status = Status::Flagged;
                    out.notes.push("no (lambda, eps) cell stabilized".into());
                }
            }
            for li in 0..p.lambdas.len() {
                match sweep.last_decade_slope(li) {
                    Some(sl) => {
                        out.put(&format!("slope_{li}"), sl);
                        if p.max_slope.is_some_and(|m| sl.abs() > m) {
                            out.status = Status::Fail;
                        }
                    }
                    None => out.notes.push(format!("lambda[{li}]: too few stabilized points for a slope")),
                }
            }
            let mut rows = Vec::new();
            for (li, lambda) in p.lambdas.iter().enumerate() {
                for (ei, eps) in p.eps.iter().enumerate() {
                    for (ki, k) in p.ks.iter().enumerate() {
                        let stab = ki + 1 == p.ks.len() && sweep.stabilized[li][ei];
                        rows.push(vec![*lambda, *eps, *k as f64, sweep.norms[li][ei][ki], bool_num(stab)]);
                    }
                }
            }
            out.table(&["lambda", "eps", "K", "norm", "stabilized"], rows);
            Ok(out)
        }
        CheckParams::Smooth(p) => {
            let phi = ComplexVector::delta(p.site);
            // Partial sums at the ends of the dyadic blocks, N = 2^{k+1} − 1.
            let ends: Vec<usize> = (0..=p.k_max).map(|k| (1usize << (k + 1)) - 1).collect();
            let r = match model.lattice() {
                Some(l) => {
                    let target = SmoothTarget::Lattice { op: l.op(), a: l.diagonal(), fallback_k: p.fallback_k };
                    smooth_sum(&target, p.s, &phi, "<A>^{-s}", None, &ends, p.k_max)?
                }
                None => {
                    let sec = section(None)?;
                    let target = SmoothTarget::Dense { u: &sec.unitary, a: &sec.conjugate, projection: None };
                    smooth_sum(&target, p.s, &phi, "<A>^{-s}", None, &ends, p.k_max)?
                }
            };
            let tails: Vec<f64> = r.dyadic_tails.iter().map(|t| t.1).collect();
            let decreasing = tails.windows(2).skip(2).all(|w| w[1] < w[0]);
            let mut out = CheckOutput::new(if decreasing { Status::Pass } else { Status::Flagged });
            if let Some(last) = r.partial_sums.last() {
                out.put("partial_sum", *last);
            }
            if let Some(last) = tails.last() {
                out.put("last_tail", *last);
            }
            out.notes = r.notes;
            let rows = ends.iter().zip(&r.partial_sums).zip(&tails).map(|((n, s), t)| vec![*n as f64, *s, *t]).collect();
            out.table(&["N", "partial_sum", "tail"], rows);
            Ok(out)
        }
        CheckParams::Wiener(p) => {
            let l = model
                .lattice()
                .ok_or_else(|| Error::Precondition("wiener_diagnostic requires a lattice model".into()))?;
            let r = wiener_diagnostic(l.op(), &ComplexVector::delta(p.site), p.n)?;
            let mut out = CheckOutput::new(if r.cesaro < p.threshold { Status::Pass } else { Status::Flagged });
            out.put("cesaro", r.cesaro);
            out.put("c_fit", r.c_fit);
            if let Some(s) = r.cesaro_slope {
                out.put("cesaro_slope", s);
            }
            if let Some(s) = r.coeff_decay_fit {
                out.put("coeff_decay_fit", s);
            }
            out.notes.push(if r.cesaro < p.threshold {
                "no detectable point part".into()
            } else {
                format!("cesaro mean {:.3e} above threshold {:.1e}", r.cesaro, p.threshold)
            });
            let rows = r.dyadic.iter().map(|(n, c)| vec![*n as f64, *c, c * *n as f64]).collect();
            out.table(&["N", "cesaro", "fit"], rows);
            Ok(out)
        }
        CheckParams::Export(p) => {
            let sec = section(p.k)?;
            let defect = linalg::unitarity_defect(&sec.unitary);
            let path = ctx.out_dir.join(match p.format {
                ExportFormat::Json => format!("{}.json", ctx.name),
                ExportFormat::Binary => format!("{}.bin", ctx.name),
            });
            match p.format {
                ExportFormat::Json => std::fs::write(&path, serialize::to_json(&sec.unitary)?)?,
                ExportFormat::Binary => serialize::write_binary(&sec.unitary, BufWriter::new(File::create(&path)?))?,
            }
            let mut out = CheckOutput::new(if defect <= tol { Status::Pass } else { Status::Fail });
            out.put("dim", sec.dim() as f64);
            out.put("unitarity_defect", defect);
            out.notes.push(format!("wrote {}", path.display()));
            Ok(out)
        }
    }
}
