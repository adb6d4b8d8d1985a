//! The tracial geometric mean `tgm(X, Y) = trace √(√X Y √X)` and its
//! companions: the `#` geometric mean and the pinching map.

use crate::error::{Error, Result};
use crate::hermitian::{
    c, condition_number, eig_hermitian, max_abs, psd_sqrt, zero_cutoff, CMat, Hermitian, Psd,
};

fn same_dim(x: &Psd, y: &Psd) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// Tracial geometric mean, evaluated as `Σ √λᵢ` over the eigenvalues of the
/// Hermitian matrix `√X Y √X` (the same spectrum as `XY`).
pub fn tgm(x: &Psd, y: &Psd) -> Result<f64> {
    same_dim(x, y)?;
    let root = psd_sqrt(x);
    let inner = root.matrix() * y.matrix() * root.matrix();
    let eig = eig_hermitian(&Hermitian::from_gram(inner))?;
    let cutoff = zero_cutoff(x.dim(), eig.max());
    Ok(eig
        .values
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|l| l.sqrt())
        .sum())
}

/// The `#` mean together with the diagonal shift applied to a singular base.
#[derive(Debug, Clone)]
pub struct SharpMean {
    pub mean: Psd,
    /// `ε` in `X + εI`; zero when `X` was positive definite.
    pub regularization: f64,
}

/// Smallest eigenvalue ratio `λ_min / λ_max` treated as positive definite.
const SINGULAR_RATIO: f64 = 1e-12;

/// `X # Y = √X (X^{-1/2} Y X^{-1/2})^{1/2} √X`.
///
/// A singular `X` is replaced by `X + εI`, `ε = 1e-10 · trace(X) / ℓ`, and the
/// shift is reported. `X = 0` is an error.
pub fn sharp_mean(x: &Psd, y: &Psd) -> Result<SharpMean> {
    same_dim(x, y)?;
    let dim = x.dim();
    let eig = x.eigen();
    if eig.max() <= 0.0 {
        return Err(Error::SingularBase);
    }
    let (base, regularization) = if eig.min() <= SINGULAR_RATIO * eig.max() {
        let eps = 1e-10 * x.trace() / dim as f64;
        let shifted = x.matrix() + CMat::identity(dim, dim).scale(eps);
        (Psd::from_gram(shifted)?, eps)
    } else {
        (x.clone(), 0.0)
    };
    let base_eig = base.eigen();
    let root = base_eig.map(|l| l.max(0.0).sqrt());
    let inv_root = base_eig.map(|l| 1.0 / l.sqrt());
    let inner = Psd::from_gram(&inv_root * y.matrix() * &inv_root)?;
    let mean = Psd::from_gram(&root * psd_sqrt(&inner).matrix() * &root)?;
    Ok(SharpMean {
        mean,
        regularization,
    })
}

/// Orthogonal projection check: `P = P* = P²` within `1e-9`.
pub fn check_projection(p: &CMat) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimMismatch {
            expected: p.nrows(),
            found: p.ncols(),
        });
    }
    let deviation = max_abs(&(p * p - p)).max(max_abs(&(p - p.adjoint())));
    if deviation > 1e-9 {
        return Err(Error::InvalidProjection { deviation });
    }
    Ok(())
}

/// Pinching `PXP + (I-P)X(I-P)`.
pub fn pinch(x: &Psd, p: &CMat) -> Result<Psd> {
    check_projection(p)?;
    if p.nrows() != x.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            found: p.nrows(),
        });
    }
    let q = CMat::identity(x.dim(), x.dim()) - p;
    Psd::from_gram(p * x.matrix() * p + &q * x.matrix() * &q)
}

/// `P X P` for a projection `P`.
pub fn compress(x: &Psd, p: &CMat) -> Result<Psd> {
    check_projection(p)?;
    Psd::from_gram(p * x.matrix() * p)
}

/// Both sides of the congruence invariance
/// `tgm(α* X α, α⁻¹ Y α⁻*) = tgm(X, Y)`.
#[derive(Debug, Clone, Copy)]
pub struct TransformCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub cond: f64,
}

impl TransformCheck {
    /// `|lhs - rhs| ≤ 1e-7 · (1 + rhs) · cond(α)`.
    pub fn holds(&self) -> bool {
        (self.lhs - self.rhs).abs() <= 1e-7 * (1.0 + self.rhs) * self.cond
    }
}

pub fn tgm_transform_check(x: &Psd, y: &Psd, alpha: &CMat) -> Result<TransformCheck> {
    same_dim(x, y)?;
    if alpha.nrows() != x.dim() || alpha.ncols() != x.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            found: alpha.nrows(),
        });
    }
    let cond = condition_number(alpha)?;
    if cond.is_nan() || cond > 1e12 {
        return Err(Error::IllConditioned { cond });
    }
    let inv = alpha
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { cond })?;
    let x2 = Psd::from_gram(alpha.adjoint() * x.matrix() * alpha)?;
    let y2 = Psd::from_gram(&inv * y.matrix() * inv.adjoint())?;
    Ok(TransformCheck {
        lhs: tgm(&x2, &y2)?,
        rhs: tgm(x, y)?,
        cond,
    })
}

/// Sum of PSD matrices of a common dimension.
pub fn psd_sum(items: &[Psd]) -> Result<Psd> {
    let first = items
        .first()
        .ok_or_else(|| Error::InvalidInput("empty sum".into()))?;
    let mut acc = first.matrix().clone();
    for item in &items[1..] {
        if item.dim() != first.dim() {
            return Err(Error::DimMismatch {
                expected: first.dim(),
                found: item.dim(),
            });
        }
        acc += item.matrix();
    }
    Psd::from_gram(acc)
}

/// `t X₁ + (1-t) X₂`.
pub fn psd_combination(t: f64, x1: &Psd, x2: &Psd) -> Result<Psd> {
    same_dim(x1, x2)?;
    Psd::from_gram(x1.matrix().scale(t) + x2.matrix().scale(1.0 - t))
}

/// Scalar multiple `s X`, `s ≥ 0`.
pub fn psd_scale(x: &Psd, s: f64) -> Result<Psd> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidInput(format!("negative scale {s}")));
    }
    Psd::from_gram(x.matrix().map(|z| z * c(s, 0.0)))
}
