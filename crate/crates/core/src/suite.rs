//! Randomized property checks for the tracial geometric mean and the norm
//! formula. Each trial draws its inputs from its own stream of the seed, so a
//! trial can be replayed alone and results do not depend on thread count.

use rayon::prelude::*;

use crate::elemop::{norm_tgm, ElementaryOperator, NormSettings};
use crate::hermitian::{singular_values, trace_norm, CMat, Psd};
use crate::numrange::{linearly_independent, CoefficientTuple};
use crate::optimizer::OptimizerConfig;
use crate::random::Sampler;
use crate::tgm::{compress, pinch, psd_combination, psd_sum, sharp_mean, tgm, tgm_transform_check};

/// Relative slack for inequalities unless a property states its own.
pub const PROPERTY_TOL: f64 = 1e-7;
/// Relative agreement required between `norm_tgm` of two representations.
pub const REWRITE_TOL: f64 = 1e-5;
const MAX_PSD_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Symmetry,
    ArithmeticGeometric,
    EqualityCase,
    SharpComparison,
    Monotonicity,
    Pinching,
    Subadditivity,
    ProductSubadditivity,
    SquaredSubadditivity,
    Concavity,
    TransformInvariance,
    TraceNormIdentity,
    RewriteInvariance,
    Independence,
}

impl Property {
    pub const ALL: [Property; 14] = [
        Property::Symmetry,
        Property::ArithmeticGeometric,
        Property::EqualityCase,
        Property::SharpComparison,
        Property::Monotonicity,
        Property::Pinching,
        Property::Subadditivity,
        Property::ProductSubadditivity,
        Property::SquaredSubadditivity,
        Property::Concavity,
        Property::TransformInvariance,
        Property::TraceNormIdentity,
        Property::RewriteInvariance,
        Property::Independence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Symmetry => "symmetry",
            Property::ArithmeticGeometric => "arithmetic_geometric",
            Property::EqualityCase => "equality_case",
            Property::SharpComparison => "sharp_comparison",
            Property::Monotonicity => "monotonicity",
            Property::Pinching => "pinching",
            Property::Subadditivity => "subadditivity",
            Property::ProductSubadditivity => "product_subadditivity",
            Property::SquaredSubadditivity => "squared_subadditivity",
            Property::Concavity => "concavity",
            Property::TransformInvariance => "transform_invariance",
            Property::TraceNormIdentity => "trace_norm_identity",
            Property::RewriteInvariance => "rewrite_invariance",
            Property::Independence => "independence",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// A failing trial with the inputs needed to replay it.
#[derive(Debug, Clone)]
pub struct Violation {
    pub trial: usize,
    pub detail: String,
    pub matrices: Vec<(String, CMat)>,
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub property: Property,
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs − rhs − slack` over all trials (negative when all hold).
    pub worst_excess: f64,
    pub first_violation: Option<Violation>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Optimizer restarts for properties that compute operator norms.
    pub restarts: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 16,
        }
    }
}

/// Outcome of one trial: the excess over the allowed slack, and the inputs.
struct Trial {
    excess: f64,
    detail: String,
    matrices: Vec<(String, CMat)>,
}

impl Trial {
    fn new(excess: f64, detail: String) -> Self {
        Self {
            excess,
            detail,
            matrices: Vec::new(),
        }
    }

    fn with(mut self, label: &str, m: &CMat) -> Self {
        self.matrices.push((label.to_string(), m.clone()));
        self
    }

    fn with_psd(self, label: &str, m: &Psd) -> Self {
        self.with(label, m.matrix())
    }

    fn error(detail: impl Into<String>) -> Self {
        Self::new(f64::INFINITY, detail.into())
    }
}

/// `lhs ≤ rhs` up to `tol · (1 + |rhs|)`; returns the excess.
fn leq(lhs: f64, rhs: f64, tol: f64) -> f64 {
    if lhs.is_nan() || rhs.is_nan() {
        return f64::INFINITY;
    }
    lhs - rhs - tol * (1.0 + rhs.abs())
}

fn close(lhs: f64, rhs: f64, tol: f64) -> f64 {
    leq(lhs, rhs, tol).max(leq(rhs, lhs, tol))
}

fn tg(x: &Psd, y: &Psd) -> f64 {
    tgm(x, y).unwrap_or(f64::NAN)
}

fn dim(s: &mut Sampler) -> usize {
    s.uniform_int(1, MAX_PSD_DIM)
}

pub fn run_property(property: Property, trials: usize, config: &SuiteConfig) -> PropertyOutcome {
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut s = Sampler::with_stream(config.seed, i as u64);
            run_trial(property, &mut s, config)
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut first = None;
    for (i, t) in results.into_iter().enumerate() {
        worst = worst.max(t.excess);
        if t.excess > 0.0 {
            violations += 1;
            if first.is_none() {
                first = Some(Violation {
                    trial: i,
                    detail: t.detail,
                    matrices: t.matrices,
                });
            }
        }
    }
    PropertyOutcome {
        property,
        trials,
        violations,
        worst_excess: worst,
        first_violation: first,
    }
}

fn run_trial(property: Property, s: &mut Sampler, config: &SuiteConfig) -> Trial {
    match property {
        Property::Symmetry => {
            let n = dim(s);
            let (x, y) = (s.psd_any_rank(n), s.psd_any_rank(n));
            let (a, b) = (tg(&x, &y), tg(&y, &x));
            Trial::new(
                close(a, b, PROPERTY_TOL),
                format!("tgm(X,Y) = {a}, tgm(Y,X) = {b}"),
            )
            .with_psd("x", &x)
            .with_psd("y", &y)
        }
        Property::ArithmeticGeometric => {
            let n = dim(s);
            let (x, y) = (s.psd_any_rank(n), s.psd_any_rank(n));
            let v = tg(&x, &y);
            let geo = (x.trace() * y.trace()).sqrt();
            let arith = (x.trace() + y.trace()) / 2.0;
            Trial::new(
                leq(v, geo, PROPERTY_TOL).max(leq(geo, arith, PROPERTY_TOL)),
                format!("tgm = {v}, geometric = {geo}, arithmetic = {arith}"),
            )
            .with_psd("x", &x)
            .with_psd("y", &y)
        }
        Property::EqualityCase => {
            let n = dim(s);
            let x = s.psd_any_rank(n);
            let scale = 3.0 * s.uniform();
            let y = Psd::from_gram(x.matrix().scale(scale)).expect("scaled PSD");
            let v = tg(&x, &y);
            let geo = (x.trace() * y.trace()).sqrt();
            Trial::new(close(v, geo, 1e-9), format!("tgm = {v}, geometric = {geo}"))
                .with_psd("x", &x)
                .with_psd("y", &y)
        }
        Property::SharpComparison => {
            let n = dim(s);
            let (x, y) = (s.psd(n, n), s.psd_any_rank(n));
            let mean = match sharp_mean(&x, &y) {
                Ok(m) => m,
                Err(e) => {
                    return Trial::error(e.to_string())
                        .with_psd("x", &x)
                        .with_psd("y", &y)
                }
            };
            let v = tg(&x, &y);
            let tr = mean.mean.trace();
            Trial::new(leq(tr, v, 1e-9), format!("trace(X#Y) = {tr}, tgm = {v}"))
                .with_psd("x", &x)
                .with_psd("y", &y)
        }
        Property::Monotonicity => {
            let n = dim(s);
            let (x, y) = (s.psd_any_rank(n), s.psd_any_rank(n));
            let x1 = psd_sum(&[x.clone(), s.psd_any_rank(n)]).expect("same size");
            let y1 = psd_sum(&[y.clone(), s.psd_any_rank(n)]).expect("same size");
            let (a, b) = (tg(&x, &y), tg(&x1, &y1));
            Trial::new(leq(a, b, 1e-9), format!("tgm(X,Y) = {a}, tgm(X1,Y1) = {b}"))
                .with_psd("x", &x)
                .with_psd("y", &y)
                .with_psd("x1", &x1)
                .with_psd("y1", &y1)
        }
        Property::Pinching => {
            let n = dim(s);
            let (x, y) = (s.psd_any_rank(n), s.psd_any_rank(n));
            let p = random_projection(s, n);
            let q = CMat::identity(n, n) - &p;
            let whole = tg(&x, &y);
            let pinched = match (pinch(&x, &p), pinch(&y, &p)) {
                (Ok(px), Ok(py)) => tg(&px, &py),
                _ => f64::NAN,
            };
            let split = match (
                compress(&x, &p),
                compress(&y, &p),
                compress(&x, &q),
                compress(&y, &q),
            ) {
                (Ok(a), Ok(b), Ok(c), Ok(d)) => tg(&a, &b) + tg(&c, &d),
                _ => f64::NAN,
            };
            Trial::new(
                leq(whole, pinched, PROPERTY_TOL).max(close(pinched, split, PROPERTY_TOL)),
                format!("tgm = {whole}, pinched = {pinched}, split = {split}"),
            )
            .with_psd("x", &x)
            .with_psd("y", &y)
            .with("p", &p)
        }
        Property::Subadditivity => {
            let n = dim(s);
            let y = s.psd_any_rank(n);
            let parts: Vec<Psd> = (0..s.uniform_int(1, 4))
                .map(|_| s.psd_any_rank(n))
                .collect();
            let total = psd_sum(&parts).expect("same size");
            let lhs = tg(&total, &y);
            let rhs: f64 = parts.iter().map(|x| tg(x, &y)).sum();
            let mut t = Trial::new(
                leq(lhs, rhs, PROPERTY_TOL),
                format!("tgm(ΣX, Y) = {lhs}, Σ tgm = {rhs}"),
            )
            .with_psd("y", &y);
            for (i, x) in parts.iter().enumerate() {
                t = t.with_psd(&format!("x{i}"), x);
            }
            t
        }
        Property::ProductSubadditivity | Property::SquaredSubadditivity => {
            let n = dim(s);
            let xs: Vec<Psd> = (0..s.uniform_int(1, 3))
                .map(|_| s.psd_any_rank(n))
                .collect();
            let ys: Vec<Psd> = (0..s.uniform_int(1, 3))
                .map(|_| s.psd_any_rank(n))
                .collect();
            let lhs = tg(
                &psd_sum(&xs).expect("same size"),
                &psd_sum(&ys).expect("same size"),
            );
            let pairs: Vec<f64> = xs
                .iter()
                .flat_map(|x| ys.iter().map(move |y| tg(x, y)))
                .collect();
            let (lhs, rhs) = if property == Property::ProductSubadditivity {
                (lhs, pairs.iter().sum())
            } else {
                let count = (xs.len() * ys.len()) as f64;
                (lhs * lhs, count * pairs.iter().map(|v| v * v).sum::<f64>())
            };
            let mut t = Trial::new(
                leq(lhs, rhs, PROPERTY_TOL),
                format!("lhs = {lhs}, rhs = {rhs}"),
            );
            for (i, x) in xs.iter().enumerate() {
                t = t.with_psd(&format!("x{i}"), x);
            }
            for (i, y) in ys.iter().enumerate() {
                t = t.with_psd(&format!("y{i}"), y);
            }
            t
        }
        Property::Concavity => {
            let n = dim(s);
            let (x1, x2, y) = (s.psd_any_rank(n), s.psd_any_rank(n), s.psd_any_rank(n));
            let t = s.uniform();
            let mixed = psd_combination(t, &x1, &x2).expect("same size");
            let lhs = tg(&mixed, &y);
            let rhs = t * tg(&x1, &y) + (1.0 - t) * tg(&x2, &y);
            Trial::new(
                leq(rhs, lhs, 1e-9),
                format!("t = {t}, tgm(mix) = {lhs}, mix of tgm = {rhs}"),
            )
            .with_psd("x1", &x1)
            .with_psd("x2", &x2)
            .with_psd("y", &y)
        }
        Property::TransformInvariance => {
            let n = dim(s);
            let (x, y) = (s.psd(n, n), s.psd(n, n));
            let alpha = if s.uniform() < 0.25 {
                s.unitary(n)
            } else {
                s.conditioned(n, 10.0)
            };
            match tgm_transform_check(&x, &y, &alpha) {
                Ok(c) => {
                    let slack = 1e-7 * (1.0 + c.rhs) * c.cond;
                    Trial::new(
                        (c.lhs - c.rhs).abs() - slack,
                        format!("lhs = {}, rhs = {}, cond = {}", c.lhs, c.rhs, c.cond),
                    )
                }
                Err(e) => Trial::error(e.to_string()),
            }
            .with_psd("x", &x)
            .with_psd("y", &y)
            .with("alpha", &alpha)
        }
        Property::TraceNormIdentity => {
            let n = s.uniform_int(1, MAX_PSD_DIM);
            let l = s.uniform_int(1, MAX_PSD_DIM);
            let (u, v) = (s.matrix(n, l), s.matrix(n, l));
            let lhs = tg(&Psd::gram_of(&v), &Psd::gram_of(&u));
            let rhs = trace_norm(&(&u * v.adjoint())).unwrap_or(f64::NAN);
            Trial::new(
                close(lhs, rhs, 1e-8),
                format!("tgm = {lhs}, trace norm = {rhs}"),
            )
            .with("u", &u)
            .with("v", &v)
        }
        Property::RewriteInvariance => {
            let n = s.uniform_int(2, 3);
            let l = s.uniform_int(1, 3);
            let t = s.operator(n, l);
            let alpha = s.conditioned(l, 10.0);
            let settings = NormSettings::with_optimizer(
                OptimizerConfig::default()
                    .with_restarts(config.restarts)
                    .with_seed(config.seed)
                    .sequential(),
            );
            let result = t.rewrite(&alpha).and_then(|r| {
                Ok((
                    norm_tgm(&t, &settings)?.value,
                    norm_tgm(&r, &settings)?.value,
                ))
            });
            let trial = match result {
                Ok((a, b)) => Trial::new(
                    (a - b).abs() - REWRITE_TOL * a.max(b),
                    format!("norm = {a}, rewritten norm = {b}"),
                ),
                Err(e) => Trial::error(e.to_string()),
            };
            let trial = operator_matrices(trial, &t);
            trial.with("alpha", &alpha)
        }
        Property::Independence => independence_trial(s),
    }
}

fn operator_matrices(mut trial: Trial, t: &ElementaryOperator) -> Trial {
    for (j, (a, b)) in t.a().matrices().iter().zip(t.b().matrices()).enumerate() {
        trial = trial.with(&format!("a{j}"), a).with(&format!("b{j}"), b);
    }
    trial
}

/// Orthogonal projection onto the span of a random number of columns of a
/// Haar unitary.
fn random_projection(s: &mut Sampler, n: usize) -> CMat {
    let rank = s.uniform_int(0, n);
    let u = s.unitary(n);
    let cols = u.columns(0, rank);
    cols * cols.adjoint()
}

/// Random tuples, a third of them built dependent (a repeated, scaled or
/// combined member, a zero member, or more members than `n²`).
fn independence_trial(s: &mut Sampler) -> Trial {
    let n = s.uniform_int(1, 3);
    let mut l = s.uniform_int(1, (n * n + 1).min(6));
    let dependent = s.uniform() < 1.0 / 3.0 && l >= 1;
    let mut mats: Vec<CMat> = (0..l).map(|_| s.matrix(n, n)).collect();
    if dependent {
        let kind = s.uniform_int(0, 2);
        let combo = match kind {
            0 => CMat::zeros(n, n),
            1 => mats[0].scale(s.normal()),
            _ => {
                let mut acc = CMat::zeros(n, n);
                for m in &mats {
                    acc += m * s.complex_normal();
                }
                acc
            }
        };
        mats.push(combo);
        l += 1;
    }
    let expected = vectorized_rank(&mats) == l;
    let tuple = CoefficientTuple::column(mats.clone()).expect("square tuple");
    let got = linearly_independent(&tuple).independent;
    let mut t = Trial::new(
        if got == expected { -1.0 } else { 1.0 },
        format!("independent = {got}, vectorized rank says {expected}"),
    );
    for (j, m) in mats.iter().enumerate() {
        t = t.with(&format!("b{j}"), m);
    }
    t
}

/// Rank of the `n² × ℓ` matrix whose columns are the entries of each member.
fn vectorized_rank(mats: &[CMat]) -> usize {
    let n = mats[0].nrows();
    let mut stacked = CMat::zeros(n * n, mats.len());
    for (j, m) in mats.iter().enumerate() {
        stacked.set_column(j, &crate::hermitian::CVec::from_column_slice(m.as_slice()));
    }
    let sv = singular_values(&stacked).expect("finite entries");
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&v| v > 1e-8 * top && top > 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Property::ALL {
            assert_eq!(Property::from_name(p.name()), Some(p));
        }
        assert_eq!(Property::from_name("nope"), None);
    }

    #[test]
    fn cheap_properties_hold() {
        let cfg = SuiteConfig::default();
        for p in Property::ALL {
            if p == Property::RewriteInvariance {
                continue;
            }
            let out = run_property(p, 100, &cfg);
            assert!(out.passed(), "{}: {:?}", p.name(), out.first_violation);
        }
    }

    #[test]
    fn outcome_is_deterministic() {
        let cfg = SuiteConfig {
            seed: 9,
            restarts: 4,
        };
        let a = run_property(Property::Pinching, 50, &cfg);
        let b = run_property(Property::Pinching, 50, &cfg);
        assert_eq!(a.worst_excess.to_bits(), b.worst_excess.to_bits());
    }

    #[test]
    fn violations_are_reported() {
        // a true inequality reversed must fail on every non-degenerate trial
        assert!(leq(2.0, 1.0, PROPERTY_TOL) > 0.0);
        assert!(leq(1.0, 1.0 + 1e-9, PROPERTY_TOL) < 0.0);
        assert!(close(f64::NAN, 1.0, PROPERTY_TOL).is_infinite());
    }
}
