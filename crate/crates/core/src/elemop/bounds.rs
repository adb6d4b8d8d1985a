//! Upper bounds on `‖T‖_cb` and growth estimates for `k ↦ ‖T‖_k`.

use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, CMat, Hermitian};

use super::norms::{cb_norm, knorm, NormSettings};
use super::ElementaryOperator;

/// Slack allowed in every growth inequality, relative to `max(1, rhs)`.
pub const GROWTH_TOL: f64 = 1e-5;

const LOG_SCALE_LIMIT: f64 = 30.0;
const GOLDEN_ITERS: usize = 80;
const BALANCE_SWEEPS: usize = 60;

fn largest_eigenvalue(weights: &[f64], squares: &[CMat]) -> f64 {
    let n = squares[0].nrows();
    let mut sum = CMat::zeros(n, n);
    for (w, s) in weights.iter().zip(squares) {
        sum += s * nalgebra::Complex::new(*w, 0.0);
    }
    eig_hermitian(&Hermitian::from_gram(sum)).map_or(f64::NAN, |e| e.max().max(0.0))
}

/// `√(‖Σ aⱼaⱼ*‖ ‖Σ bⱼ*bⱼ‖)`. With `balance`, the rewrites `aⱼ ↦ dⱼaⱼ`,
/// `bⱼ ↦ bⱼ/dⱼ` are searched as well and the smaller bound is returned.
pub fn haagerup_upper_bound(t: &ElementaryOperator, balance: bool) -> f64 {
    let aa: Vec<CMat> = t.a().matrices().iter().map(|a| a * a.adjoint()).collect();
    let bb: Vec<CMat> = t.b().matrices().iter().map(|b| b.adjoint() * b).collect();
    let l = aa.len();
    // log of the squared bound as a function of tⱼ = log dⱼ; convex in t
    let log_bound = |ts: &[f64]| {
        let wa: Vec<f64> = ts.iter().map(|t| (2.0 * t).exp()).collect();
        let wb: Vec<f64> = ts.iter().map(|t| (-2.0 * t).exp()).collect();
        largest_eigenvalue(&wa, &aa).ln() + largest_eigenvalue(&wb, &bb).ln()
    };
    let mut ts = vec![0.0; l];
    let plain = log_bound(&ts);
    if !plain.is_finite() {
        return 0.0;
    }
    if !balance || l < 2 {
        return (0.5 * plain).exp();
    }

    let mut current = plain;
    for _ in 0..BALANCE_SWEEPS {
        let before = current;
        for j in 0..l {
            let mut f = |x: f64| {
                let old = ts[j];
                ts[j] = x;
                let v = log_bound(&ts);
                ts[j] = old;
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            };
            let (x, v) = golden_section_min(&mut f, -LOG_SCALE_LIMIT, LOG_SCALE_LIMIT);
            if v < current {
                ts[j] = x;
                current = v;
            }
        }
        if before - current <= 1e-13 * before.abs().max(1.0) {
            break;
        }
    }
    (0.5 * current.min(plain)).exp()
}

fn golden_section_min(f: &mut impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + GROWTH_TOL * rhs.max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub k: usize,
    pub value: f64,
    /// `‖T‖_k ≤ max(k, √ℓ) ‖T‖`.
    pub max_bound: bool,
    /// `‖T‖_k ≤ min(k, √ℓ) ‖T‖`, the conjunction of the two estimates behind
    /// the max bound.
    pub min_bound: bool,
    /// `‖T‖_k ≤ (1 + 2√(k−1)/k) ‖T‖_{k−1}`; vacuous for `k = 1`.
    pub step_bound: bool,
    /// `‖T‖_k ≤ k₁ ‖T‖_{k₂}` for every factorization `k = k₁k₂`.
    pub product_bound: bool,
    /// `‖T‖_k ≥ ‖T‖_{k−1}` up to slack.
    pub monotone: bool,
    /// `‖T‖_k / (k ‖T‖)`.
    pub k_ratio: f64,
    /// `‖T‖_k / (√ℓ ‖T‖)`.
    pub sqrt_l_ratio: f64,
}

impl GrowthRow {
    pub fn all_hold(&self) -> bool {
        self.max_bound && self.min_bound && self.step_bound && self.product_bound && self.monotone
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub terms: usize,
    /// `‖T‖_cb`, when the order it needs fits under the dimension guard.
    pub cb: Option<f64>,
    /// `‖T‖_cb ≤ √ℓ ‖T‖`; `None` when the cb norm was not computed.
    pub cb_bound: Option<bool>,
}

impl GrowthTable {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(GrowthRow::all_hold) && self.cb_bound != Some(false)
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// `‖T‖_k` for `k = 1..=k_max` together with the growth estimates.
pub fn growth_check(
    t: &ElementaryOperator,
    k_max: usize,
    settings: &NormSettings,
) -> Result<GrowthTable> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    let dim = k_max * t.dim();
    if dim > settings.max_dim {
        return Err(Error::ResourceGuard {
            dim,
            max_dim: settings.max_dim,
        });
    }
    let values: Vec<f64> = (1..=k_max)
        .map(|k| knorm(t, k, settings).map(|r| r.value))
        .collect::<Result<_>>()?;
    let norm = values[0];
    let sqrt_l = (t.len() as f64).sqrt();
    let f = |k: usize| values[k - 1];

    let rows = (1..=k_max)
        .map(|k| {
            let kf = k as f64;
            let value = f(k);
            let step_bound = k == 1 || {
                let prev = (k - 1) as f64;
                within(value, (1.0 + 2.0 * prev.sqrt() / kf) * f(k - 1))
            };
            let product_bound = (1..=k)
                .filter(|k1| k % k1 == 0)
                .all(|k1| within(value, k1 as f64 * f(k / k1)));
            GrowthRow {
                k,
                value,
                max_bound: within(value, kf.max(sqrt_l) * norm),
                min_bound: within(value, kf.min(sqrt_l) * norm),
                step_bound,
                product_bound,
                monotone: k == 1 || value >= f(k - 1) - GROWTH_TOL * f(k - 1).max(1.0),
                k_ratio: ratio(value, kf * norm),
                sqrt_l_ratio: ratio(value, sqrt_l * norm),
            }
        })
        .collect();

    let cb_order = t.len().min(t.dim());
    let cb = if cb_order <= k_max {
        Some(f(cb_order))
    } else if cb_order * t.dim() <= settings.max_dim {
        Some(cb_norm(t, settings)?.value)
    } else {
        None
    };
    Ok(GrowthTable {
        rows,
        terms: t.len(),
        cb,
        cb_bound: cb.map(|cb| within(cb, sqrt_l * norm)),
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `‖T₁ ⊕ T₂‖_k = max(‖T₁‖_k, ‖T₂‖_k)` for operators on `M_{n₁} ⊕ M_{n₂}`.
pub fn direct_sum_knorm(
    t1: &ElementaryOperator,
    t2: &ElementaryOperator,
    k: usize,
    settings: &NormSettings,
) -> Result<f64> {
    Ok(knorm(t1, k, settings)?
        .value
        .max(knorm(t2, k, settings)?.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elemop::norm_tgm;
    use crate::hermitian::c;
    use crate::optimizer::OptimizerConfig;
    use crate::random::Sampler;
    use approx::assert_abs_diff_eq;

    fn settings(restarts: usize) -> NormSettings {
        NormSettings::with_optimizer(OptimizerConfig::default().with_restarts(restarts))
    }

    #[test]
    fn haagerup_examples() {
        assert_abs_diff_eq!(
            haagerup_upper_bound(&ElementaryOperator::identity(3), false),
            1.0,
            epsilon = 1e-12
        );
        for n in 2..=4 {
            let t = ElementaryOperator::transpose(n);
            assert_abs_diff_eq!(haagerup_upper_bound(&t, false), n as f64, epsilon = 1e-10);
            assert!(haagerup_upper_bound(&t, true) <= n as f64 + 1e-10);
        }
    }

    #[test]
    fn balancing_undoes_scaling() {
        let mut s = Sampler::new(11);
        let t = s.operator(3, 3);
        let alpha = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(10.0, 0.0),
            c(1.0, 0.0),
            c(0.1, 0.0),
        ]));
        let skewed = t.rewrite(&alpha).unwrap();
        let plain = haagerup_upper_bound(&skewed, false);
        let balanced = haagerup_upper_bound(&skewed, true);
        assert!(balanced < plain);
        assert_abs_diff_eq!(
            balanced,
            haagerup_upper_bound(&t, true),
            epsilon = 1e-6 * balanced
        );
    }

    #[test]
    fn haagerup_equality_for_commuting_products() {
        // x ↦ Σⱼ dⱼσⱼ pⱼ x pⱼ with orthogonal diagonal projections pⱼ
        let weights = [(3.0, 0.5), (0.2, 4.0), (1.0, 1.0)];
        let a = (0..3)
            .map(|j| super::super::matrix_unit(3, j, j).scale(weights[j].0))
            .collect();
        let b = (0..3)
            .map(|j| super::super::matrix_unit(3, j, j).scale(weights[j].1))
            .collect();
        let t = ElementaryOperator::new(a, b).unwrap();
        assert_abs_diff_eq!(haagerup_upper_bound(&t, false), 12.0, epsilon = 1e-10);
        let norm = norm_tgm(&t, &settings(16)).unwrap().value;
        assert_abs_diff_eq!(norm, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(haagerup_upper_bound(&t, true), norm, epsilon = 1e-6);
    }

    #[test]
    fn transpose_growth_is_linear() {
        let table = growth_check(&ElementaryOperator::transpose(3), 3, &settings(16)).unwrap();
        for (row, expected) in table.rows.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(row.value, expected, epsilon = 1e-6);
            assert_abs_diff_eq!(row.k_ratio, 1.0, epsilon = 1e-6);
        }
        assert!(table.all_hold());
        assert_abs_diff_eq!(table.cb.unwrap(), 3.0, epsilon = 1e-6);
    }

    #[test]
    fn first_row_growth_is_square_root() {
        let table = growth_check(
            &ElementaryOperator::first_row_transpose(4),
            4,
            &settings(16),
        )
        .unwrap();
        for row in &table.rows {
            assert_abs_diff_eq!(row.value, (row.k as f64).sqrt(), epsilon = 1e-6);
        }
        assert_abs_diff_eq!(table.rows[3].sqrt_l_ratio, 1.0, epsilon = 1e-6);
        assert!(table.all_hold());
    }

    #[test]
    fn direct_sum_plateau() {
        let st = settings(16);
        let id = ElementaryOperator::identity(3);
        let half_transpose = ElementaryOperator::transpose(3).scaled(0.5);
        let f: Vec<f64> = (1..=3)
            .map(|k| direct_sum_knorm(&id, &half_transpose, k, &st).unwrap())
            .collect();
        for (v, e) in f.iter().zip([1.0, 1.0, 1.5]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-6);
        }
    }

    #[test]
    fn guard_and_invalid_order() {
        let t = ElementaryOperator::identity(4);
        let st = NormSettings {
            max_dim: 8,
            ..settings(2)
        };
        assert!(matches!(
            growth_check(&t, 3, &st),
            Err(Error::ResourceGuard { .. })
        ));
        assert!(growth_check(&t, 0, &st).is_err());
    }
}
