//! Hermitian and positive semidefinite matrix calculus.
//!
//! Everything here reduces to one primitive, the Hermitian eigendecomposition.
//! Singular values come from the SVD, which is only used for the trace and
//! spectral norms and for polar factors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

/// Relative tolerance on `max|M - M*|` for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Relative tolerance (to the largest eigenvalue) for clamping negative eigenvalues.
pub const PSD_CLAMP_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn check_finite(m: &CMat) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("non-finite matrix entry".into()))
    }
}

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

/// `(M + M*) / 2`.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// A square matrix equal to its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMat);

impl Hermitian {
    /// Accepts `m` if it is Hermitian to within [`HERMITIAN_TOL`] (relative to
    /// its largest entry) and stores the exactly symmetrized form.
    pub fn new(m: CMat) -> Result<Self> {
        check_finite(&m)?;
        check_square(&m)?;
        let deviation = max_abs(&(&m - m.adjoint()));
        let tol = HERMITIAN_TOL * max_abs(&m).max(1.0);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Symmetrizes without checking. For matrices that are Hermitian
    /// analytically, such as Gram matrices assembled in floating point.
    pub fn from_gram(m: CMat) -> Self {
        Self(symmetrize(&m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }
}

/// Spectral decomposition `M = V diag(values) V*`, eigenvalues non-increasing.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigen {
    /// `V diag(f(λ)) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn eig_hermitian(m: &Hermitian) -> Result<Eigen> {
    check_finite(m.matrix())?;
    let n = m.dim();
    let decomposition = m.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        decomposition.eigenvalues[j]
            .partial_cmp(&decomposition.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order
        .iter()
        .map(|&i| decomposition.eigenvalues[i])
        .collect();
    let vectors = CMat::from_fn(n, n, |r, col| decomposition.eigenvectors[(r, order[col])]);
    Ok(Eigen { values, vectors })
}

/// A positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    mat: CMat,
    /// Most negative eigenvalue that was clamped to zero (0 when none was).
    eigen_floor: f64,
}

impl Psd {
    /// Validates a caller-supplied matrix: Hermitian per [`Hermitian::new`] and
    /// no eigenvalue below `-PSD_CLAMP_TOL * λ_max`.
    pub fn new(m: CMat) -> Result<Self> {
        Self::from_hermitian(Hermitian::new(m)?)
    }

    /// Symmetrizes an analytically PSD matrix (a Gram matrix, a congruence of
    /// a PSD matrix) and then applies the same eigenvalue check as [`Psd::new`].
    pub fn from_gram(m: CMat) -> Result<Self> {
        check_finite(&m)?;
        check_square(&m)?;
        Self::from_hermitian(Hermitian::from_gram(m))
    }

    fn from_hermitian(h: Hermitian) -> Result<Self> {
        let eig = eig_hermitian(&h)?;
        let tol = PSD_CLAMP_TOL * eig.max().abs();
        let floor = eig.min();
        if floor < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: floor,
                tol,
            });
        }
        if floor < 0.0 {
            Ok(Self {
                mat: symmetrize(&eig.map(|l| l.max(0.0))),
                eigen_floor: floor,
            })
        } else {
            Ok(Self {
                mat: h.into_inner(),
                eigen_floor: 0.0,
            })
        }
    }

    /// Gram matrix `W* W` of the columns of `w`; PSD by construction, so no
    /// eigenvalue check is made.
    pub fn gram_of(w: &CMat) -> Self {
        Self {
            mat: symmetrize(&(w.adjoint() * w)),
            eigen_floor: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim),
            eigen_floor: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn eigen(&self) -> Eigen {
        // the stored matrix is exactly Hermitian and finite
        eig_hermitian(&Hermitian(self.mat.clone())).expect("validated PSD matrix")
    }

    pub fn into_inner(self) -> CMat {
        self.mat
    }
}

/// Eigenvalues at or below `ZERO_EIGEN_FACTOR · dim · ε · λ_max` are treated as
/// roundoff of an exact zero wherever a square root is taken.
pub const ZERO_EIGEN_FACTOR: f64 = 16.0;

pub(crate) fn zero_cutoff(dim: usize, lambda_max: f64) -> f64 {
    ZERO_EIGEN_FACTOR * dim as f64 * f64::EPSILON * lambda_max.max(0.0)
}

/// Positive semidefinite square root.
pub fn psd_sqrt(x: &Psd) -> Psd {
    let eig = x.eigen();
    let cutoff = zero_cutoff(x.dim(), eig.max());
    let root = eig.map(|l| if l > cutoff { l.sqrt() } else { 0.0 });
    Psd {
        mat: symmetrize(&root),
        eigen_floor: 0.0,
    }
}

/// Singular values, non-increasing.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    check_finite(m)?;
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(sv)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Compact SVD `M = U diag(σ) V*` keeping singular values above
/// `rel_tol * σ_max`.
pub struct CompactSvd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn compact_svd(m: &CMat, rel_tol: f64) -> CompactSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V*").adjoint();
    let max = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| max > 0.0 && svd.singular_values[i] > rel_tol * max)
        .collect();
    CompactSvd {
        u: CMat::from_fn(u.nrows(), keep.len(), |r, j| u[(r, keep[j])]),
        sigma: keep.iter().map(|&i| svd.singular_values[i]).collect(),
        v: CMat::from_fn(v.nrows(), keep.len(), |r, j| v[(r, keep[j])]),
    }
}

/// Partial isometry `U V*` from the compact SVD of `m`: the gradient of the
/// trace norm at `m`, so `d‖M‖₁ = Re tr((UV*)* dM)`.
pub fn polar_factor(m: &CMat) -> CMat {
    let svd = compact_svd(m, 1e-10);
    &svd.u * svd.v.adjoint()
}

/// Unitary polar factor of a square matrix (the full `U V*`, including the
/// null directions), i.e. the nearest unitary.
pub fn unitary_polar(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.expect("requested U") * svd.v_t.expect("requested V*")
}

/// Largest singular value with its left and right singular vectors.
pub fn top_singular_pair(m: &CMat) -> (f64, CVec, CVec) {
    let svd = m.clone().svd(true, true);
    let (mut best, mut index) = (f64::NEG_INFINITY, 0);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > best {
            best = s;
            index = i;
        }
    }
    let u = svd.u.expect("requested U").column(index).into_owned();
    let v = svd.v_t.expect("requested V*").row(index).adjoint();
    (best, u, v)
}

/// Condition number `σ_max / σ_min`; infinite when singular.
pub fn condition_number(m: &CMat) -> Result<f64> {
    let sv = singular_values(m)?;
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

/// `exp(iH)` for Hermitian `H`.
pub fn expi_hermitian(h: &Hermitian) -> Result<CMat> {
    let eig = eig_hermitian(h)?;
    let mut scaled = eig.vectors.clone();
    for (j, &lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    Ok(scaled * eig.vectors.adjoint())
}

/// Projection onto the PSD cone: negative eigenvalues set to zero.
pub fn psd_projection(m: &Hermitian) -> Result<Psd> {
    let eig = eig_hermitian(m)?;
    Ok(Psd {
        mat: symmetrize(&eig.map(|l| l.max(0.0))),
        eigen_floor: eig.min().min(0.0),
    })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;
    use approx::assert_abs_diff_eq;

    fn diag(values: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v, 0.0)),
        ))
    }

    #[test]
    fn identity_eigen() {
        let eig = eig_hermitian(&Hermitian::new(CMat::identity(2, 2)).unwrap()).unwrap();
        assert_eq!(eig.values.len(), 2);
        for v in &eig.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
        }
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert!(max_abs(&(gram - CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn diagonal_eigen_sorted() {
        let eig = eig_hermitian(&Hermitian::new(diag(&[1.0, 3.0])).unwrap()).unwrap();
        assert_abs_diff_eq!(eig.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-14);
        // first eigenvector is ±e₂ up to phase
        assert_abs_diff_eq!(eig.vectors[(1, 0)].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut s = Sampler::new(11);
        for n in 1..=7 {
            let h = s.hermitian(n);
            let eig = eig_hermitian(&h).unwrap();
            let rebuilt = eig.map(|l| l);
            let scale = 1.0 + spectral_norm(h.matrix()).unwrap();
            assert!(max_abs(&(rebuilt - h.matrix())) <= 1e-10 * scale);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian_and_non_finite() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
        let mut m = CMat::identity(2, 2);
        m[(0, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(Hermitian::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sqrt_examples() {
        let r = psd_sqrt(&Psd::identity(3));
        assert!(max_abs(&(r.matrix() - CMat::identity(3, 3))) < 1e-14);
        let r = psd_sqrt(&Psd::new(diag(&[4.0, 9.0])).unwrap());
        assert!(max_abs(&(r.matrix() - diag(&[2.0, 3.0]))) < 1e-14);

        let x = CMat::from_row_slice(
            2,
            2,
            &[c(1.25, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.25, 0.0)],
        );
        let expected =
            CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        let r = psd_sqrt(&Psd::new(x).unwrap());
        assert!(max_abs(&(r.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn not_psd_rejected_small_negatives_clamped() {
        assert!(matches!(
            Psd::new(diag(&[1.0, -0.1])),
            Err(Error::NotPsd { .. })
        ));
        let p = Psd::new(diag(&[1.0, -1e-12])).unwrap();
        assert_abs_diff_eq!(p.eigen_floor(), -1e-12, epsilon = 1e-20);
        assert!(p.eigen().min() >= 0.0);
    }

    #[test]
    fn sqrt_reconstructs() {
        let mut s = Sampler::new(3);
        for n in 1..=6 {
            let x = s.psd(n, n);
            let r = psd_sqrt(&x);
            let scale = 1.0 + spectral_norm(x.matrix()).unwrap();
            assert!(max_abs(&(r.matrix() * r.matrix() - x.matrix())) <= 1e-10 * scale);
            assert!(r.eigen().min() >= -1e-12);
            // fourth root raised to the fourth power
            let q = psd_sqrt(&r);
            let q2 = q.matrix() * q.matrix();
            assert!(max_abs(&(&q2 * &q2 - x.matrix())) <= 1e-8 * scale);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&CMat::zeros(3, 3)).unwrap(), 0.0);
        let mut s = Sampler::new(5);
        let u = s.unit_vector(4);
        let v = s.unit_vector(4);
        let rank_one = u.as_ref() * v.as_ref().adjoint();
        assert_abs_diff_eq!(trace_norm(&rank_one).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spectral_norm(&rank_one).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_matches_gram_root() {
        let mut s = Sampler::new(9);
        for n in 1..=6 {
            let m = s.matrix(n, n);
            let root = psd_sqrt(&Psd::from_gram(m.adjoint() * &m).unwrap());
            let expected = root.trace();
            assert_abs_diff_eq!(
                trace_norm(&m).unwrap(),
                expected,
                epsilon = 1e-9 * (1.0 + expected)
            );
        }
    }

    #[test]
    fn spectral_norm_examples() {
        assert_abs_diff_eq!(
            spectral_norm(&CMat::identity(4, 4)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            spectral_norm(&diag(&[2.0, -5.0])).unwrap(),
            5.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn spectral_norm_dominates_sampling() {
        let mut s = Sampler::new(21);
        let m = s.matrix(2, 2);
        let norm = spectral_norm(&m).unwrap();
        let sampled = (0..10_000)
            .map(|_| (&m * s.unit_vector(2).as_ref()).norm())
            .fold(0.0, f64::max);
        assert!(sampled <= norm + 1e-12);
        assert!(
            norm - sampled <= 1e-3 * norm.max(1.0),
            "gap {}",
            norm - sampled
        );
    }

    #[test]
    fn expi_is_unitary() {
        let mut s = Sampler::new(2);
        let h = s.hermitian(4);
        let u = expi_hermitian(&h).unwrap();
        assert!(max_abs(&(u.adjoint() * &u - CMat::identity(4, 4))) < 1e-12);
    }
}
