//! Multistart local maximization over products of unit spheres, the unitary
//! group and pairs of bounded-rank density matrices.
//!
//! Restart `r` draws its starting point from the stream `(seed, r)` and runs
//! independently, so the per-restart values are identical whether restarts
//! are evaluated sequentially or in parallel. Reductions scan restarts in
//! index order and keep the first maximal value.
//!
//! Each iteration is a projected gradient step with step halving; a step is
//! accepted only if it strictly increases the objective. Objectives that are
//! convex and positively homogeneous in each block (norms of linear
//! functions of the block) also get a "full" step to the normalized gradient
//! (for the unitary group: the polar factor of the gradient). For such
//! objectives `f(g/‖g‖) ≥ Re⟨g, x⟩ = f(x)`, which makes the full step a
//! power-iteration update.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermitian::{c, expi_hermitian, unitary_polar, CMat, CVec, Hermitian};
use crate::numrange::{DensityMatrix, UnitVector};
use crate::random::Sampler;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub step_min: f64,
    /// Relative per-iteration improvement below which a restart has converged.
    pub value_tol: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            step_init: 1.0,
            step_min: 1e-12,
            value_tol: 1e-14,
            seed: 0,
            parallel: true,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        if self.step_min.is_nan() || self.step_min >= self.step_init || self.step_min <= 0.0 {
            return Err(Error::InvalidInput(
                "step_min must be positive and below step_init".into(),
            ));
        }
        if self.value_tol.is_nan() || self.value_tol <= 0.0 {
            return Err(Error::InvalidInput("value_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerResult<P> {
    pub best_value: f64,
    pub best_point: P,
    /// Final value of every restart that was not discarded, in restart order.
    pub per_restart_values: Vec<f64>,
    /// Restarts dropped because the objective or its gradient went non-finite.
    pub discarded: Vec<usize>,
    pub converged_fraction: f64,
    pub best_restart: usize,
    pub best_converged: bool,
}

/// Objective on a product of unit spheres.
pub trait SphereObjective: Sync {
    fn value(&self, blocks: &[CVec]) -> f64;

    /// Euclidean gradient `g` in block `block`, with `df = Re⟨dx, g⟩`.
    fn gradient(&self, blocks: &[CVec], block: usize) -> CVec;

    /// Convex and positively homogeneous in each block separately.
    fn homogeneous_convex(&self) -> bool {
        false
    }
}

/// Sphere objective built from closures.
pub struct FnSphere<V, G> {
    pub value: V,
    pub gradient: G,
    pub homogeneous_convex: bool,
}

impl<V, G> SphereObjective for FnSphere<V, G>
where
    V: Fn(&[CVec]) -> f64 + Sync,
    G: Fn(&[CVec], usize) -> CVec + Sync,
{
    fn value(&self, blocks: &[CVec]) -> f64 {
        (self.value)(blocks)
    }

    fn gradient(&self, blocks: &[CVec], block: usize) -> CVec {
        (self.gradient)(blocks, block)
    }

    fn homogeneous_convex(&self) -> bool {
        self.homogeneous_convex
    }
}

struct Run<P> {
    value: f64,
    point: P,
    converged: bool,
}

fn finite_vec(v: &CVec) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn finite_mat(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn run_restarts<P: Send>(
    cfg: &OptimizerConfig,
    run: impl Fn(usize) -> Option<Run<P>> + Sync,
) -> Result<OptimizerResult<P>> {
    cfg.validate()?;
    let runs: Vec<Option<Run<P>>> = if cfg.parallel {
        (0..cfg.restarts).into_par_iter().map(&run).collect()
    } else {
        (0..cfg.restarts).map(&run).collect()
    };

    let mut per_restart_values = Vec::with_capacity(runs.len());
    let mut discarded = Vec::new();
    let mut converged = 0usize;
    let mut best: Option<(usize, Run<P>)> = None;
    for (index, outcome) in runs.into_iter().enumerate() {
        let Some(outcome) = outcome else {
            discarded.push(index);
            continue;
        };
        per_restart_values.push(outcome.value);
        if outcome.converged {
            converged += 1;
        }
        let better = match &best {
            Some((_, current)) => outcome.value > current.value,
            None => true,
        };
        if better {
            best = Some((index, outcome));
        }
    }
    let (best_restart, best) = best
        .ok_or_else(|| Error::InvalidInput("objective was non-finite on every restart".into()))?;
    Ok(OptimizerResult {
        best_value: best.value,
        best_point: best.point,
        converged_fraction: converged as f64 / cfg.restarts as f64,
        per_restart_values,
        discarded,
        best_restart,
        best_converged: best.converged,
    })
}

fn normalized(v: CVec) -> Option<CVec> {
    let norm = v.norm();
    (norm > 0.0 && norm.is_finite()).then(|| v.unscale(norm))
}

/// One block update. Returns `None` when the objective or gradient is non-finite.
fn ascend_block(
    obj: &dyn SphereObjective,
    blocks: &mut [CVec],
    block: usize,
    value: f64,
    cfg: &OptimizerConfig,
) -> Option<f64> {
    let grad = obj.gradient(blocks, block);
    if !finite_vec(&grad) {
        return None;
    }
    let x = blocks[block].clone();
    let radial = x.dotc(&grad).re;
    let tangent = &grad - x.scale(radial);
    let tangent_norm = tangent.norm();

    let try_point = |blocks: &mut [CVec], candidate: CVec| -> Option<Option<f64>> {
        let previous = std::mem::replace(&mut blocks[block], candidate);
        let v = obj.value(blocks);
        if !v.is_finite() {
            return None;
        }
        if v > value {
            Some(Some(v))
        } else {
            blocks[block] = previous;
            Some(None)
        }
    };

    if obj.homogeneous_convex() {
        if let Some(full) = normalized(grad.clone()) {
            if let Some(v) = try_point(blocks, full)? {
                return Some(v);
            }
        }
    }
    if tangent_norm <= 1e-300 {
        return Some(value);
    }
    let direction = tangent.unscale(tangent_norm);
    let mut step = cfg.step_init;
    while step >= cfg.step_min {
        if let Some(candidate) = normalized(&x + direction.scale(step)) {
            if let Some(v) = try_point(blocks, candidate)? {
                return Some(v);
            }
        }
        step *= 0.5;
    }
    Some(value)
}

fn sphere_restart(
    obj: &dyn SphereObjective,
    dims: &[usize],
    cfg: &OptimizerConfig,
    restart: usize,
) -> Option<Run<Vec<CVec>>> {
    let mut sampler = Sampler::with_stream(cfg.seed, restart as u64);
    let mut blocks: Vec<CVec> = dims
        .iter()
        .map(|&d| sampler.unit_vector(d).into_inner())
        .collect();
    let mut value = obj.value(&blocks);
    if !value.is_finite() {
        return None;
    }
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let start = value;
        for block in 0..dims.len() {
            let next = ascend_block(obj, &mut blocks, block, value, cfg)?;
            debug_assert!(next >= value, "ascent decreased the objective");
            value = next;
        }
        if value - start <= cfg.value_tol * (1.0 + value.abs()) {
            converged = true;
            break;
        }
    }
    Some(Run {
        value,
        point: blocks,
        converged,
    })
}

/// Maximizes over the product of unit spheres of the given dimensions.
pub fn maximize_spheres(
    obj: &dyn SphereObjective,
    dims: &[usize],
    cfg: &OptimizerConfig,
) -> Result<OptimizerResult<Vec<UnitVector>>> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidInput(
            "sphere dimensions must be positive".into(),
        ));
    }
    let result = run_restarts(cfg, |r| sphere_restart(obj, dims, cfg, r))?;
    Ok(OptimizerResult {
        best_point: result
            .best_point
            .into_iter()
            .map(UnitVector::from_normalized)
            .collect(),
        best_value: result.best_value,
        per_restart_values: result.per_restart_values,
        discarded: result.discarded,
        converged_fraction: result.converged_fraction,
        best_restart: result.best_restart,
        best_converged: result.best_converged,
    })
}

/// Maximizes `f(ξ, η)` over unit `ξ ∈ ℂ^{dims.0}`, `η ∈ ℂ^{dims.1}`.
pub fn maximize_sphere_pair(
    obj: &dyn SphereObjective,
    dims: (usize, usize),
    cfg: &OptimizerConfig,
) -> Result<OptimizerResult<(UnitVector, UnitVector)>> {
    let result = maximize_spheres(obj, &[dims.0, dims.1], cfg)?;
    let mut point = result.best_point.into_iter();
    let xi = point.next().expect("two blocks");
    let eta = point.next().expect("two blocks");
    Ok(OptimizerResult {
        best_point: (xi, eta),
        best_value: result.best_value,
        per_restart_values: result.per_restart_values,
        discarded: result.discarded,
        converged_fraction: result.converged_fraction,
        best_restart: result.best_restart,
        best_converged: result.best_converged,
    })
}

/// Objective on `n × n` unitaries.
pub trait UnitaryObjective: Sync {
    fn value(&self, u: &CMat) -> f64;

    /// Euclidean gradient `G` with `df = Re tr(G* dU)`.
    fn gradient(&self, u: &CMat) -> CMat;

    /// Convex and positively homogeneous on all of `M_n`; the maximum over the
    /// unit ball is then attained at a unitary.
    fn homogeneous_convex(&self) -> bool {
        false
    }
}

pub struct FnUnitary<V, G> {
    pub value: V,
    pub gradient: G,
    pub homogeneous_convex: bool,
}

impl<V, G> UnitaryObjective for FnUnitary<V, G>
where
    V: Fn(&CMat) -> f64 + Sync,
    G: Fn(&CMat) -> CMat + Sync,
{
    fn value(&self, u: &CMat) -> f64 {
        (self.value)(u)
    }

    fn gradient(&self, u: &CMat) -> CMat {
        (self.gradient)(u)
    }

    fn homogeneous_convex(&self) -> bool {
        self.homogeneous_convex
    }
}

fn random_unitary_start(sampler: &mut Sampler, n: usize) -> CMat {
    let bound = std::f64::consts::PI * n as f64;
    let raw = CMat::from_fn(n, n, |_, _| {
        let z = sampler.complex_normal().scale(std::f64::consts::PI);
        if z.norm() > bound {
            z.scale(bound / z.norm())
        } else {
            z
        }
    });
    let h = Hermitian::from_gram(raw);
    expi_hermitian(&h).expect("finite Hermitian generator")
}

fn unitary_restart(
    obj: &dyn UnitaryObjective,
    n: usize,
    cfg: &OptimizerConfig,
    restart: usize,
) -> Option<Run<CMat>> {
    let mut sampler = Sampler::with_stream(cfg.seed, restart as u64);
    let mut u = random_unitary_start(&mut sampler, n);
    let mut value = obj.value(&u);
    if !value.is_finite() {
        return None;
    }
    let mut converged = false;
    'outer: for _ in 0..cfg.max_iters {
        let grad = obj.gradient(&u);
        if !finite_mat(&grad) {
            return None;
        }
        let mut accepted = None;
        if obj.homogeneous_convex() && grad.norm() > 0.0 {
            let candidate = unitary_polar(&grad);
            let v = obj.value(&candidate);
            if !v.is_finite() {
                return None;
            }
            if v > value {
                accepted = Some((candidate, v));
            }
        }
        if accepted.is_none() {
            // tangent direction U·iK with K = herm(i G* U)
            let a = (grad.adjoint() * &u).map(|z| z * c(0.0, 1.0));
            let k = (&a + a.adjoint()).scale(0.5);
            let k_norm = k.norm();
            if k_norm <= 1e-300 {
                converged = true;
                break 'outer;
            }
            let k = Hermitian::from_gram(k.unscale(k_norm));
            let mut step = cfg.step_init;
            while step >= cfg.step_min {
                let rotation = expi_hermitian(&Hermitian::from_gram(k.matrix().scale(step)))
                    .expect("finite generator");
                let candidate = &u * rotation;
                let v = obj.value(&candidate);
                if !v.is_finite() {
                    return None;
                }
                if v > value {
                    accepted = Some((candidate, v));
                    break;
                }
                step *= 0.5;
            }
        }
        match accepted {
            Some((candidate, v)) => {
                debug_assert!(v >= value);
                let improvement = v - value;
                u = candidate;
                value = v;
                if improvement <= cfg.value_tol * (1.0 + value.abs()) {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    Some(Run {
        value,
        point: u,
        converged,
    })
}

/// Maximizes over the unitary group `U(n)`. Starts are `exp(iH)` with `H` a
/// random Hermitian matrix whose entries are bounded by `π n`.
pub fn maximize_unitary(
    obj: &dyn UnitaryObjective,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizerResult<CMat>> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    run_restarts(cfg, |r| unitary_restart(obj, n, cfg, r))
}

/// Objective on pairs of density matrices `ρᵢ = Cᵢ Cᵢ*` given through their
/// `n × k` factors, normalized to unit Frobenius norm.
pub trait DensityObjective: Sync {
    fn value(&self, c1: &CMat, c2: &CMat) -> f64;

    /// Euclidean gradient with respect to factor `which` (0 or 1).
    fn gradient(&self, c1: &CMat, c2: &CMat, which: usize) -> CMat;

    fn homogeneous_convex(&self) -> bool {
        false
    }
}

pub struct FnDensity<V, G> {
    pub value: V,
    pub gradient: G,
    pub homogeneous_convex: bool,
}

impl<V, G> DensityObjective for FnDensity<V, G>
where
    V: Fn(&CMat, &CMat) -> f64 + Sync,
    G: Fn(&CMat, &CMat, usize) -> CMat + Sync,
{
    fn value(&self, c1: &CMat, c2: &CMat) -> f64 {
        (self.value)(c1, c2)
    }

    fn gradient(&self, c1: &CMat, c2: &CMat, which: usize) -> CMat {
        (self.gradient)(c1, c2, which)
    }

    fn homogeneous_convex(&self) -> bool {
        self.homogeneous_convex
    }
}

struct FactorAdapter<'a> {
    inner: &'a dyn DensityObjective,
    n: usize,
    k: usize,
}

impl FactorAdapter<'_> {
    fn unflatten(&self, v: &CVec) -> CMat {
        CMat::from_column_slice(self.n, self.k, v.as_slice())
    }
}

impl SphereObjective for FactorAdapter<'_> {
    fn value(&self, blocks: &[CVec]) -> f64 {
        self.inner
            .value(&self.unflatten(&blocks[0]), &self.unflatten(&blocks[1]))
    }

    fn gradient(&self, blocks: &[CVec], block: usize) -> CVec {
        let g = self.inner.gradient(
            &self.unflatten(&blocks[0]),
            &self.unflatten(&blocks[1]),
            block,
        );
        CVec::from_column_slice(g.as_slice())
    }

    fn homogeneous_convex(&self) -> bool {
        self.inner.homogeneous_convex()
    }
}

/// Density pairs found by [`maximize_density_pair`], with their factors.
#[derive(Debug, Clone)]
pub struct DensityPair {
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub factor1: CMat,
    pub factor2: CMat,
}

/// Maximizes over pairs of `n × n` density matrices of rank at most `k`,
/// parameterized as `ρ = C C* / trace(C C*)` with `C ∈ ℂ^{n×k}`.
pub fn maximize_density_pair(
    obj: &dyn DensityObjective,
    n: usize,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizerResult<DensityPair>> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    let adapter = FactorAdapter { inner: obj, n, k };
    let result = maximize_spheres(&adapter, &[n * k, n * k], cfg)?;
    let factor1 = adapter.unflatten(result.best_point[0].as_ref());
    let factor2 = adapter.unflatten(result.best_point[1].as_ref());
    Ok(OptimizerResult {
        best_point: DensityPair {
            rho1: DensityMatrix::from_factor(&factor1)?,
            rho2: DensityMatrix::from_factor(&factor2)?,
            factor1,
            factor2,
        },
        best_value: result.best_value,
        per_restart_values: result.per_restart_values,
        discarded: result.discarded,
        converged_fraction: result.converged_fraction,
        best_restart: result.best_restart,
        best_converged: result.best_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{spectral_norm, Psd};
    use crate::random::Sampler;
    use approx::assert_abs_diff_eq;

    fn small_cfg() -> OptimizerConfig {
        OptimizerConfig::default().with_restarts(16)
    }

    #[test]
    fn constant_sphere_objective() {
        let f = FnSphere {
            value: |_: &[CVec]| 2.5,
            gradient: |b: &[CVec], i: usize| CVec::zeros(b[i].len()),
            homogeneous_convex: false,
        };
        let r = maximize_sphere_pair(&f, (3, 2), &small_cfg()).unwrap();
        assert_eq!(r.best_value, 2.5);
        assert_eq!(r.converged_fraction, 1.0);
    }

    fn bilinear(m: &CMat) -> impl SphereObjective + '_ {
        // |⟨Mη, ξ⟩|
        FnSphere {
            value: move |b: &[CVec]| b[0].dotc(&(m * &b[1])).norm(),
            gradient: move |b: &[CVec], i: usize| {
                let inner = b[0].dotc(&(m * &b[1]));
                let phase = if inner.norm() > 0.0 {
                    inner / inner.norm()
                } else {
                    c(1.0, 0.0)
                };
                if i == 0 {
                    (m * &b[1]).map(|z| z * phase.conj())
                } else {
                    (m.adjoint() * &b[0]).map(|z| z * phase)
                }
            },
            homogeneous_convex: true,
        }
    }

    #[test]
    fn bilinear_form_reaches_spectral_norm() {
        let mut s = Sampler::new(17);
        for n in 1..=4 {
            let m = s.matrix(n, n);
            let r = maximize_sphere_pair(&bilinear(&m), (n, n), &small_cfg()).unwrap();
            assert_abs_diff_eq!(r.best_value, spectral_norm(&m).unwrap(), epsilon = 1e-6);
            assert_eq!(r.per_restart_values.len(), 16);
        }
    }

    #[test]
    fn gradient_steps_without_full_step() {
        let mut s = Sampler::new(19);
        let m = s.matrix(3, 3);
        let f = bilinear(&m);
        let plain = FnSphere {
            value: |b: &[CVec]| f.value(b),
            gradient: |b: &[CVec], i: usize| f.gradient(b, i),
            homogeneous_convex: false,
        };
        let r = maximize_sphere_pair(&plain, (3, 3), &small_cfg()).unwrap();
        assert_abs_diff_eq!(r.best_value, spectral_norm(&m).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn determinism_across_parallel_flag() {
        let mut s = Sampler::new(23);
        let m = s.matrix(3, 3);
        let f = bilinear(&m);
        let cfg = small_cfg().with_seed(99);
        let par = maximize_sphere_pair(&f, (3, 3), &cfg).unwrap();
        let seq = maximize_sphere_pair(&f, (3, 3), &cfg.sequential()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&par.per_restart_values), bits(&seq.per_restart_values));
        assert_eq!(par.best_restart, seq.best_restart);
    }

    #[test]
    fn restart_prefix_dominance() {
        let mut s = Sampler::new(29);
        let m = s.matrix(4, 4);
        let f = bilinear(&m);
        let mut previous = f64::NEG_INFINITY;
        for restarts in [1, 2, 4, 8] {
            let cfg = OptimizerConfig::default()
                .with_restarts(restarts)
                .with_seed(5);
            let r = maximize_sphere_pair(&f, (4, 4), &cfg).unwrap();
            assert!(r.best_value >= previous);
            previous = r.best_value;
        }
    }

    #[test]
    fn non_finite_restarts_are_discarded() {
        let f = FnSphere {
            value: |b: &[CVec]| if b[0][0].re > 0.0 { 1.0 } else { f64::NAN },
            gradient: |b: &[CVec], i: usize| CVec::zeros(b[i].len()),
            homogeneous_convex: false,
        };
        let r = maximize_sphere_pair(&f, (2, 2), &small_cfg()).unwrap();
        assert!(!r.discarded.is_empty());
        assert_eq!(r.per_restart_values.len() + r.discarded.len(), 16);
        assert_eq!(r.best_value, 1.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let f = FnSphere {
            value: |_: &[CVec]| 0.0,
            gradient: |b: &[CVec], i: usize| CVec::zeros(b[i].len()),
            homogeneous_convex: false,
        };
        let cfg = OptimizerConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(maximize_sphere_pair(&f, (2, 2), &cfg).is_err());
        let cfg = OptimizerConfig {
            step_min: 2.0,
            ..Default::default()
        };
        assert!(maximize_sphere_pair(&f, (2, 2), &cfg).is_err());
    }

    #[test]
    fn unitary_trace_objective() {
        let n = 3;
        let f = FnUnitary {
            value: |u: &CMat| u.trace().norm() / n as f64,
            gradient: |u: &CMat| {
                let t = u.trace();
                let phase = if t.norm() > 0.0 {
                    t / t.norm()
                } else {
                    c(1.0, 0.0)
                };
                CMat::identity(n, n).map(|z| z * phase / n as f64)
            },
            homogeneous_convex: true,
        };
        let r = maximize_unitary(&f, n, &small_cfg()).unwrap();
        assert_abs_diff_eq!(r.best_value, 1.0, epsilon = 1e-9);
        let constant = FnUnitary {
            value: |_: &CMat| -3.0,
            gradient: |u: &CMat| CMat::zeros(u.nrows(), u.ncols()),
            homogeneous_convex: false,
        };
        assert_eq!(
            maximize_unitary(&constant, 2, &small_cfg())
                .unwrap()
                .best_value,
            -3.0
        );
    }

    #[test]
    fn unitary_geodesic_steps_converge() {
        // Re tr(M U) is maximized at ‖M‖₁; disable the polar step to exercise
        // the exponential-map line search
        let mut s = Sampler::new(31);
        let m = s.matrix(3, 3);
        let f = FnUnitary {
            value: |u: &CMat| (&m * u).trace().re,
            gradient: |_: &CMat| m.adjoint(),
            homogeneous_convex: false,
        };
        let r = maximize_unitary(&f, 3, &small_cfg()).unwrap();
        let expected = crate::hermitian::trace_norm(&m).unwrap();
        assert_abs_diff_eq!(r.best_value, expected, epsilon = 1e-6);
    }

    #[test]
    fn density_linear_objective_reaches_top_eigenvalue() {
        let mut s = Sampler::new(37);
        let a = s.hermitian(3);
        let top = crate::hermitian::eig_hermitian(&a).unwrap().max();
        let lin = |c1: &CMat| (c1.adjoint() * a.matrix() * c1).trace().re;
        let f = FnDensity {
            value: |c1: &CMat, _: &CMat| lin(c1),
            gradient: |c1: &CMat, c2: &CMat, w: usize| {
                if w == 0 {
                    (a.matrix() * c1).scale(2.0)
                } else {
                    CMat::zeros(c2.nrows(), c2.ncols())
                }
            },
            homogeneous_convex: false,
        };
        let r = maximize_density_pair(&f, 3, 3, &small_cfg()).unwrap();
        assert_abs_diff_eq!(r.best_value, top, epsilon = 1e-6);
        let rho = &r.best_point.rho1;
        assert_abs_diff_eq!((rho.matrix() * a.matrix()).trace().re, top, epsilon = 1e-6);
    }

    #[test]
    fn density_rank_one_matches_sphere() {
        // with k = 1 the factor is a unit vector and ρ = ηη*
        let mut s = Sampler::new(41);
        let m = s.matrix(3, 3);
        let sphere = maximize_sphere_pair(&bilinear(&m), (3, 3), &small_cfg()).unwrap();
        let f = bilinear(&m);
        let dens = FnDensity {
            value: |c1: &CMat, c2: &CMat| {
                f.value(&[c1.column(0).into_owned(), c2.column(0).into_owned()])
            },
            gradient: |c1: &CMat, c2: &CMat, w: usize| {
                let g = f.gradient(&[c1.column(0).into_owned(), c2.column(0).into_owned()], w);
                CMat::from_column_slice(3, 1, g.as_slice())
            },
            homogeneous_convex: true,
        };
        let r = maximize_density_pair(&dens, 3, 1, &small_cfg()).unwrap();
        assert_abs_diff_eq!(r.best_value, sphere.best_value, epsilon = 1e-6);
        assert!(Psd::new(r.best_point.rho2.matrix().clone()).is_ok());
        let constant = FnDensity {
            value: |_: &CMat, _: &CMat| 4.0,
            gradient: |c1: &CMat, _: &CMat, _: usize| CMat::zeros(c1.nrows(), c1.ncols()),
            homogeneous_convex: false,
        };
        assert_eq!(
            maximize_density_pair(&constant, 2, 2, &small_cfg())
                .unwrap()
                .best_value,
            4.0
        );
    }
}
