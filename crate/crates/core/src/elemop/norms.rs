//! Norm computations for elementary operators.
//!
//! For unit vectors `ξ, η` write `V = [a₁*ξ, …, a_ℓ*ξ]` and `W = [b₁η, …, b_ℓη]`
//! (both `n × ℓ`). Then `Q(a*, ξ) = V*V`, `Q(b, η) = W*W` and
//! `tgm(Q(a*, ξ), Q(b, η)) = ‖W V*‖₁`, the norm of the functional
//! `x ↦ ⟨T(x)η, ξ⟩`. The operator norm is the supremum over `ξ, η`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::hermitian::{
    polar_factor, psd_sqrt, spectral_norm, top_singular_pair, trace_norm, CMat, CVec, Psd,
};
use crate::numrange::{gram_at_state, CoefficientTuple, DensityMatrix, UnitVector};
use crate::optimizer::{
    maximize_density_pair, maximize_sphere_pair, maximize_spheres, maximize_unitary,
    DensityObjective, OptimizerConfig, OptimizerResult, SphereObjective, UnitaryObjective,
};
use crate::tgm::tgm;

use super::ElementaryOperator;

/// Allowed `|reported − recomputed|` for a certificate.
pub const CERT_TOL: f64 = 1e-6;
/// Allowed relative disagreement `|tgm − ‖WV*‖₁| / (1 + tgm)`.
pub const IDENTITY_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSettings {
    pub optimizer: OptimizerConfig,
    /// Largest `kn` allowed for amplified computations.
    pub max_dim: usize,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl NormSettings {
    pub fn with_optimizer(optimizer: OptimizerConfig) -> Self {
        Self {
            optimizer,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    TgmFormula,
    S1Formula,
    OracleUnitary,
    OracleFunctional,
    Amplified,
    FactorialState,
    HaagerupBound,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TgmFormula => "tgm_formula",
            Method::S1Formula => "s1_formula",
            Method::OracleUnitary => "oracle_unitary",
            Method::OracleFunctional => "oracle_functional",
            Method::Amplified => "amplified",
            Method::FactorialState => "factorial_state",
            Method::HaagerupBound => "haagerup_bound",
        }
    }
}

/// A point at which the reported value is attained.
#[derive(Debug, Clone)]
pub enum Certificate {
    Vectors {
        xi: UnitVector,
        eta: UnitVector,
    },
    Unitary {
        x: CMat,
    },
    States {
        rho1: DensityMatrix,
        rho2: DensityMatrix,
    },
}

#[derive(Debug, Clone)]
pub struct NormReport {
    pub value: f64,
    pub method: Method,
    pub certificate: Option<Certificate>,
    pub restarts_used: usize,
    pub converged: bool,
    pub converged_fraction: f64,
    pub seed: u64,
    /// `|value − value recomputed from the certificate|`.
    pub certificate_error: Option<f64>,
    /// Largest relative tgm/trace-norm disagreement seen during the search.
    pub identity_residual: Option<f64>,
    pub per_restart_values: Vec<f64>,
}

impl NormReport {
    fn from_search<P>(
        method: Method,
        cfg: &OptimizerConfig,
        result: &OptimizerResult<P>,
        certificate: Certificate,
        recomputed: f64,
    ) -> Self {
        Self {
            value: result.best_value,
            method,
            certificate: Some(certificate),
            restarts_used: cfg.restarts,
            converged: result.best_converged,
            converged_fraction: result.converged_fraction,
            seed: cfg.seed,
            certificate_error: Some((recomputed - result.best_value).abs()),
            identity_residual: None,
            per_restart_values: result.per_restart_values.clone(),
        }
    }

    pub fn certificate_ok(&self) -> bool {
        self.certificate_error.is_none_or(|e| e <= CERT_TOL)
    }

    pub fn identity_ok(&self) -> bool {
        self.identity_residual.is_none_or(|r| r <= IDENTITY_TOL)
    }
}

/// Norm of the functional `x ↦ ⟨T(x)η, ξ⟩` by both routes.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalNorm {
    /// `tgm(Q(a*, ξ), Q(b, η))`.
    pub value: f64,
    /// `‖Σⱼ (bⱼη)(aⱼ*ξ)*‖₁`.
    pub trace_norm_value: f64,
}

impl FunctionalNorm {
    pub fn residual(&self) -> f64 {
        (self.value - self.trace_norm_value).abs() / (1.0 + self.value)
    }
}

fn both_routes(
    a_adj: &CoefficientTuple,
    b: &CoefficientTuple,
    xi: &CVec,
    eta: &CVec,
) -> FunctionalNorm {
    let v = a_adj.images(xi);
    let w = b.images(eta);
    let value = tgm(&Psd::gram_of(&v), &Psd::gram_of(&w)).expect("equal Gram sizes");
    let trace_norm_value = trace_norm(&(&w * v.adjoint())).expect("finite images");
    FunctionalNorm {
        value,
        trace_norm_value,
    }
}

fn check_unit(t: &ElementaryOperator, v: &UnitVector) -> Result<()> {
    if v.dim() != t.dim() {
        return Err(Error::DimMismatch {
            expected: t.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// `tgm(Q(a*, ξ), Q(b, η))`, cross-checked against the trace norm of
/// `Σⱼ (bⱼη)(aⱼ*ξ)*`; disagreement beyond [`IDENTITY_TOL`] is an error.
pub fn functional_norm(
    t: &ElementaryOperator,
    xi: &UnitVector,
    eta: &UnitVector,
) -> Result<FunctionalNorm> {
    check_unit(t, xi)?;
    check_unit(t, eta)?;
    let r = both_routes(&t.a_adjoint(), t.b(), xi.as_ref(), eta.as_ref());
    if r.residual() > IDENTITY_TOL {
        return Err(Error::RouteMismatch {
            first: r.value,
            second: r.trace_norm_value,
        });
    }
    Ok(r)
}

/// Gradients of `‖W V*‖₁` in `ξ` and `η` from the polar factor `G` of `W V*`:
/// `∇_ξ = Σⱼ aⱼ (G* W)ⱼ`, `∇_η = Σⱼ bⱼ* (G V)ⱼ`.
fn trace_norm_gradient(
    a_adj: &CoefficientTuple,
    b: &CoefficientTuple,
    xi: &CVec,
    eta: &CVec,
    block: usize,
) -> CVec {
    let v = a_adj.images(xi);
    let w = b.images(eta);
    let g = polar_factor(&(&w * v.adjoint()));
    let (tuple, mixed) = if block == 0 {
        (a_adj, g.adjoint() * &w)
    } else {
        (b, &g * &v)
    };
    let mut out = CVec::zeros(xi.len());
    for (j, m) in tuple.matrices().iter().enumerate() {
        out += m.adjoint() * mixed.column(j);
    }
    out
}

fn record_max(cell: &AtomicU64, value: f64) {
    // non-negative floats order like their bit patterns
    cell.fetch_max(value.max(0.0).to_bits(), Ordering::Relaxed);
}

/// `(ξ, η) ↦ tgm(Q(a*, ξ), Q(b, η))`, optionally evaluated by the trace norm
/// alone.
struct FunctionalObjective {
    a_adj: CoefficientTuple,
    b: CoefficientTuple,
    trace_norm_only: bool,
    max_residual: AtomicU64,
}

impl FunctionalObjective {
    fn new(t: &ElementaryOperator, trace_norm_only: bool) -> Self {
        Self {
            a_adj: t.a_adjoint(),
            b: t.b().clone(),
            trace_norm_only,
            max_residual: AtomicU64::new(0),
        }
    }

    fn max_residual(&self) -> f64 {
        f64::from_bits(self.max_residual.load(Ordering::Relaxed))
    }
}

impl SphereObjective for FunctionalObjective {
    fn value(&self, blocks: &[CVec]) -> f64 {
        if self.trace_norm_only {
            let v = self.a_adj.images(&blocks[0]);
            let w = self.b.images(&blocks[1]);
            return trace_norm(&(&w * v.adjoint())).unwrap_or(f64::NAN);
        }
        let r = both_routes(&self.a_adj, &self.b, &blocks[0], &blocks[1]);
        record_max(&self.max_residual, r.residual());
        r.value
    }

    fn gradient(&self, blocks: &[CVec], block: usize) -> CVec {
        trace_norm_gradient(&self.a_adj, &self.b, &blocks[0], &blocks[1], block)
    }

    fn homogeneous_convex(&self) -> bool {
        true
    }
}

/// `‖T‖ = sup tgm(Q(a*, ξ), Q(b, η))` over unit `ξ, η`, by multistart ascent.
/// The value is always a lower bound on `‖T‖`.
pub fn norm_tgm(t: &ElementaryOperator, settings: &NormSettings) -> Result<NormReport> {
    norm_tgm_with(t, settings, Method::TgmFormula)
}

fn norm_tgm_with(
    t: &ElementaryOperator,
    settings: &NormSettings,
    method: Method,
) -> Result<NormReport> {
    let cfg = &settings.optimizer;
    let objective = FunctionalObjective::new(t, false);
    let result = maximize_sphere_pair(&objective, (t.dim(), t.dim()), cfg)?;
    let (xi, eta) = result.best_point.clone();
    let recomputed = both_routes(&objective.a_adj, &objective.b, xi.as_ref(), eta.as_ref()).value;
    let mut report = NormReport::from_search(
        method,
        cfg,
        &result,
        Certificate::Vectors { xi, eta },
        recomputed,
    );
    report.identity_residual = Some(objective.max_residual());
    Ok(report)
}

/// Independent oracle: the same supremum with the functional norm evaluated
/// only as a trace norm.
pub fn oracle_norm_functional(
    t: &ElementaryOperator,
    settings: &NormSettings,
) -> Result<NormReport> {
    let cfg = &settings.optimizer;
    let objective = FunctionalObjective::new(t, true);
    let result = maximize_sphere_pair(&objective, (t.dim(), t.dim()), cfg)?;
    let (xi, eta) = result.best_point.clone();
    let recomputed = objective.value(&[xi.as_ref().clone(), eta.as_ref().clone()]);
    Ok(NormReport::from_search(
        Method::OracleFunctional,
        cfg,
        &result,
        Certificate::Vectors { xi, eta },
        recomputed,
    ))
}

/// `trace √(⟨ξᵢ, ξⱼ⟩)ᵢⱼ` for the columns `ξⱼ` of `vectors`.
pub fn s1_vector_norm(vectors: &CMat) -> f64 {
    // entry (i, j) of the lemma's matrix is ⟨ξᵢ, ξⱼ⟩ = ξⱼ* ξᵢ, the transpose of
    // V*V; both have the same spectrum
    let gram = Psd::gram_of(vectors);
    psd_sqrt(&Psd::from_gram(gram.matrix().transpose()).expect("Gram matrix")).trace()
}

/// Columns of `√(Q(b, η)ᵗ) a*`: the tuple `(aα)*` with `α = √(Q(b, η)ᵗ)`,
/// `(aα)ⱼ* = Σᵢ conj(αᵢⱼ) aᵢ*`.
fn balanced_adjoint_tuple(a_adj: &CoefficientTuple, b: &CoefficientTuple, eta: &CVec) -> Vec<CMat> {
    let w = b.images(eta);
    let q_t = Psd::gram_of(&w).into_inner().transpose();
    let alpha = psd_sqrt(&Psd::from_gram(q_t).expect("Gram matrix")).into_inner();
    let n = a_adj.dim();
    (0..a_adj.len())
        .map(|j| {
            let mut acc = CMat::zeros(n, n);
            for (i, m) in a_adj.matrices().iter().enumerate() {
                acc += m * alpha[(i, j)].conj();
            }
            acc
        })
        .collect()
}

fn stack_images(tuple: &[CMat], xi: &CVec) -> CMat {
    let mut out = CMat::zeros(xi.len(), tuple.len());
    for (j, m) in tuple.iter().enumerate() {
        out.set_column(j, &(m * xi));
    }
    out
}

/// `ξ ↦ ‖(c₁ξ, …, c_ℓξ)‖_{S1}` for a fixed tuple `c`.
struct S1Inner<'a> {
    tuple: &'a [CMat],
}

impl SphereObjective for S1Inner<'_> {
    fn value(&self, blocks: &[CVec]) -> f64 {
        s1_vector_norm(&stack_images(self.tuple, &blocks[0]))
    }

    fn gradient(&self, blocks: &[CVec], _block: usize) -> CVec {
        let stacked = stack_images(self.tuple, &blocks[0]);
        let g = polar_factor(&stacked);
        let mut out = CVec::zeros(blocks[0].len());
        for (j, m) in self.tuple.iter().enumerate() {
            out += m.adjoint() * g.column(j);
        }
        out
    }

    fn homogeneous_convex(&self) -> bool {
        true
    }
}

/// `η ↦ ‖√(Q(b, η)ᵗ) a*‖_{S1}`, each evaluation an inner maximization over `ξ`.
struct S1Outer {
    a_adj: CoefficientTuple,
    b: CoefficientTuple,
    inner: OptimizerConfig,
}

impl S1Outer {
    fn inner_max(&self, eta: &CVec) -> Option<(f64, CVec)> {
        let tuple = balanced_adjoint_tuple(&self.a_adj, &self.b, eta);
        let r =
            maximize_spheres(&S1Inner { tuple: &tuple }, &[self.a_adj.dim()], &self.inner).ok()?;
        Some((r.best_value, r.best_point[0].as_ref().clone()))
    }
}

impl SphereObjective for S1Outer {
    fn value(&self, blocks: &[CVec]) -> f64 {
        self.inner_max(&blocks[0]).map_or(f64::NAN, |(v, _)| v)
    }

    fn gradient(&self, blocks: &[CVec], _block: usize) -> CVec {
        // envelope gradient at the inner maximizer
        match self.inner_max(&blocks[0]) {
            Some((_, xi)) => trace_norm_gradient(&self.a_adj, &self.b, &xi, &blocks[0], 1),
            None => CVec::from_element(blocks[0].len(), f64::NAN.into()),
        }
    }

    fn homogeneous_convex(&self) -> bool {
        true
    }
}

fn inner_config(cfg: &OptimizerConfig) -> OptimizerConfig {
    OptimizerConfig {
        restarts: 6,
        max_iters: 300,
        parallel: false,
        seed: cfg.seed ^ 0x5151_5151,
        ..*cfg
    }
}

/// `‖T‖ = sup_η ‖√(Q(b, η)ᵗ) a*‖_{S1}`, the S1 norm being the operator norm
/// from `H` into `(H^ℓ, ‖·‖_{S1})`, evaluated by an inner sphere maximization.
pub fn norm_s1(t: &ElementaryOperator, settings: &NormSettings) -> Result<NormReport> {
    let cfg = &settings.optimizer;
    let objective = S1Outer {
        a_adj: t.a_adjoint(),
        b: t.b().clone(),
        inner: inner_config(cfg),
    };
    let result = maximize_spheres(&objective, &[t.dim()], cfg)?;
    let eta = result.best_point[0].clone();
    let (_, xi) = objective
        .inner_max(eta.as_ref())
        .ok_or_else(|| Error::InvalidInput("inner maximization failed".into()))?;
    let tuple = balanced_adjoint_tuple(&objective.a_adj, &objective.b, eta.as_ref());
    let recomputed = s1_vector_norm(&stack_images(&tuple, &xi));
    let xi = UnitVector::new(xi)?;
    Ok(NormReport {
        value: result.best_value,
        method: Method::S1Formula,
        certificate: Some(Certificate::Vectors { xi, eta }),
        restarts_used: cfg.restarts,
        converged: result.best_converged,
        converged_fraction: result.converged_fraction,
        seed: cfg.seed,
        certificate_error: Some((recomputed - result.best_value).abs()),
        identity_residual: None,
        per_restart_values: result.per_restart_values,
    })
}

/// `U ↦ ‖T(U)‖` on unitaries.
struct UnitaryNorm<'a> {
    t: &'a ElementaryOperator,
}

impl UnitaryObjective for UnitaryNorm<'_> {
    fn value(&self, u: &CMat) -> f64 {
        self.t
            .apply(u)
            .and_then(|m| spectral_norm(&m))
            .unwrap_or(f64::NAN)
    }

    fn gradient(&self, u: &CMat) -> CMat {
        // d‖M‖ = Re u₁* dM v₁ with dM = Σ aⱼ dU bⱼ, so G = Σ aⱼ* u₁ v₁* bⱼ*
        let m = self.t.apply(u).expect("square unitary");
        let (_, left, right) = top_singular_pair(&m);
        let outer = &left * right.adjoint();
        let n = u.nrows();
        let mut g = CMat::zeros(n, n);
        for (a, b) in self.t.a().matrices().iter().zip(self.t.b().matrices()) {
            g += a.adjoint() * &outer * b.adjoint();
        }
        g
    }

    fn homogeneous_convex(&self) -> bool {
        true
    }
}

/// Independent oracle: `max ‖T(U)‖` over unitaries `U`, the extreme points of
/// the unit ball of `M_n` (where the convex function `x ↦ ‖Tx‖` peaks).
pub fn oracle_norm_unitary(t: &ElementaryOperator, settings: &NormSettings) -> Result<NormReport> {
    let cfg = &settings.optimizer;
    let objective = UnitaryNorm { t };
    let result = maximize_unitary(&objective, t.dim(), cfg)?;
    let x = result.best_point.clone();
    let recomputed = spectral_norm(&t.apply(&x)?)?;
    Ok(NormReport::from_search(
        Method::OracleUnitary,
        cfg,
        &result,
        Certificate::Unitary { x },
        recomputed,
    ))
}

/// `‖T‖_k = ‖T⁽ᵏ⁾‖`, computed by [`norm_tgm`] on the amplification.
pub fn knorm(t: &ElementaryOperator, k: usize, settings: &NormSettings) -> Result<NormReport> {
    let amplified = t.amplify(k, settings.max_dim)?;
    norm_tgm_with(&amplified, settings, Method::Amplified)
}

/// `(C₁, C₂) ↦ tgm(Q(a*, C₁C₁*), Q(b, C₂C₂*))` over unit-Frobenius `n × k` factors.
struct FactorialObjective {
    a_adj: CoefficientTuple,
    b: CoefficientTuple,
}

/// `nk × ℓ` matrix with columns `vec(cⱼ C)`.
fn factor_images(tuple: &CoefficientTuple, factor: &CMat) -> CMat {
    let rows = factor.nrows() * factor.ncols();
    let mut out = CMat::zeros(rows, tuple.len());
    for (j, m) in tuple.matrices().iter().enumerate() {
        let img = m * factor;
        out.set_column(j, &CVec::from_column_slice(img.as_slice()));
    }
    out
}

impl DensityObjective for FactorialObjective {
    fn value(&self, c1: &CMat, c2: &CMat) -> f64 {
        let (Ok(rho1), Ok(rho2)) = (
            DensityMatrix::from_factor(c1),
            DensityMatrix::from_factor(c2),
        ) else {
            return f64::NAN;
        };
        match (
            gram_at_state(&self.a_adj, &rho1),
            gram_at_state(&self.b, &rho2),
        ) {
            (Ok(x), Ok(y)) => tgm(&x, &y).unwrap_or(f64::NAN),
            _ => f64::NAN,
        }
    }

    fn gradient(&self, c1: &CMat, c2: &CMat, which: usize) -> CMat {
        // tgm(Q(a*, ρ₁), Q(b, ρ₂)) = ‖W V*‖₁ with V, W the stacked vec(cⱼ Cᵢ)
        let v = factor_images(&self.a_adj, c1);
        let w = factor_images(&self.b, c2);
        let g = polar_factor(&(&w * v.adjoint()));
        let (tuple, mixed, shape) = if which == 0 {
            (&self.a_adj, g.adjoint() * &w, c1)
        } else {
            (&self.b, &g * &v, c2)
        };
        let mut out = CMat::zeros(shape.nrows(), shape.ncols());
        for (j, m) in tuple.matrices().iter().enumerate() {
            let col = mixed.column(j);
            let as_matrix = CMat::from_column_slice(shape.nrows(), shape.ncols(), col.as_slice());
            out += m.adjoint() * as_matrix;
        }
        out
    }

    fn homogeneous_convex(&self) -> bool {
        true
    }
}

/// `‖T‖_k = sup tgm(Q(a*, ρ₁), Q(b, ρ₂))` over density matrices of rank at
/// most `k` (on `M_n` every pair of such states is admissible).
pub fn knorm_factorial(
    t: &ElementaryOperator,
    k: usize,
    settings: &NormSettings,
) -> Result<NormReport> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let dim = k * t.dim();
    if dim > settings.max_dim {
        return Err(Error::ResourceGuard {
            dim,
            max_dim: settings.max_dim,
        });
    }
    let cfg = &settings.optimizer;
    let objective = FactorialObjective {
        a_adj: t.a_adjoint(),
        b: t.b().clone(),
    };
    let result = maximize_density_pair(&objective, t.dim(), k, cfg)?;
    let pair = result.best_point.clone();
    let recomputed = tgm(
        &gram_at_state(&objective.a_adj, &pair.rho1)?,
        &gram_at_state(&objective.b, &pair.rho2)?,
    )?;
    Ok(NormReport::from_search(
        Method::FactorialState,
        cfg,
        &result,
        Certificate::States {
            rho1: pair.rho1,
            rho2: pair.rho2,
        },
        recomputed,
    ))
}

/// `‖T‖_cb`. For maps on `M_n`, `‖T‖_cb = ‖T‖_n`, and for `ℓ`-term elementary
/// operators `‖T‖_cb = ‖T‖_ℓ`; the smaller order is used.
pub fn cb_norm(t: &ElementaryOperator, settings: &NormSettings) -> Result<NormReport> {
    knorm(t, t.len().min(t.dim()), settings)
}
