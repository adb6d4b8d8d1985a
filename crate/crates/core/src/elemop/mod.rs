//! Elementary operators `T(x) = Σⱼ aⱼ x bⱼ` on `M_n`.

mod bounds;
mod norms;

pub use bounds::{
    direct_sum_knorm, growth_check, haagerup_upper_bound, GrowthRow, GrowthTable, GROWTH_TOL,
};
pub use norms::{
    cb_norm, functional_norm, knorm, knorm_factorial, norm_s1, norm_tgm, oracle_norm_functional,
    oracle_norm_unitary, s1_vector_norm, Certificate, FunctionalNorm, Method, NormReport,
    NormSettings, CERT_TOL, DEFAULT_MAX_DIM, IDENTITY_TOL,
};

use crate::error::{Error, Result};
use crate::hermitian::{c, condition_number, kron, CMat};
use crate::numrange::{CoefficientTuple, Orientation};

/// Condition numbers above this are rejected by [`ElementaryOperator::rewrite`].
pub const MAX_COND: f64 = 1e12;

/// `T(x) = Σⱼ aⱼ x bⱼ` with a row `a` and a column `b` of `n × n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryOperator {
    a: CoefficientTuple,
    b: CoefficientTuple,
}

impl ElementaryOperator {
    pub fn new(a: Vec<CMat>, b: Vec<CMat>) -> Result<Self> {
        Self::from_tuples(CoefficientTuple::row(a)?, CoefficientTuple::column(b)?)
    }

    pub fn from_tuples(a: CoefficientTuple, b: CoefficientTuple) -> Result<Self> {
        if a.orientation() != Orientation::Row || b.orientation() != Orientation::Column {
            return Err(Error::InvalidInput(
                "expected a row tuple a and a column tuple b".into(),
            ));
        }
        if a.len() != b.len() {
            return Err(Error::DimMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        if a.dim() != b.dim() {
            return Err(Error::DimMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(Self { a, b })
    }

    /// Matrix size `n`.
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Number of terms `ℓ`.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &CoefficientTuple {
        &self.a
    }

    pub fn b(&self) -> &CoefficientTuple {
        &self.b
    }

    /// The column `a* = [a₁*, …, a_ℓ*]ᵗ`.
    pub fn a_adjoint(&self) -> CoefficientTuple {
        self.a.adjoint()
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        let n = self.dim();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: if x.nrows() != n { x.nrows() } else { x.ncols() },
            });
        }
        let mut out = CMat::zeros(n, n);
        for (a, b) in self.a.matrices().iter().zip(self.b.matrices()) {
            out += a * x * b;
        }
        Ok(out)
    }

    /// The same operator written as `(aα) ⊙ (α⁻¹b)`.
    pub fn rewrite(&self, alpha: &CMat) -> Result<Self> {
        let l = self.len();
        if alpha.nrows() != l || alpha.ncols() != l {
            return Err(Error::DimMismatch {
                expected: l,
                found: alpha.nrows(),
            });
        }
        let cond = condition_number(alpha)?;
        if cond.is_nan() || cond > MAX_COND {
            return Err(Error::IllConditioned { cond });
        }
        let inverse = alpha
            .clone()
            .try_inverse()
            .ok_or(Error::IllConditioned { cond })?;
        let n = self.dim();
        let combine =
            |weights: &dyn Fn(usize, usize) -> num_complex::Complex64, mats: &[CMat], j: usize| {
                let mut acc = CMat::zeros(n, n);
                for (i, m) in mats.iter().enumerate() {
                    acc += m.map(|z| z * weights(i, j));
                }
                acc
            };
        // (aα)ⱼ = Σᵢ aᵢ αᵢⱼ and (α⁻¹b)ⱼ = Σᵢ (α⁻¹)ⱼᵢ bᵢ
        let a = (0..l)
            .map(|j| combine(&|i, j| alpha[(i, j)], self.a.matrices(), j))
            .collect();
        let b = (0..l)
            .map(|j| combine(&|i, j| inverse[(j, i)], self.b.matrices(), j))
            .collect();
        Self::new(a, b)
    }

    /// The amplification `T⁽ᵏ⁾` acting entrywise on `M_k(M_n) ≅ M_{kn}`, where
    /// block `(p, q)` of a `kn × kn` matrix is its `n × n` submatrix at rows
    /// `pn..`, columns `qn..`. Its coefficients are `I_k ⊗ aⱼ` and `I_k ⊗ bⱼ`.
    pub fn amplify(&self, k: usize, max_dim: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "amplification order must be at least 1".into(),
            ));
        }
        let dim = k * self.dim();
        if dim > max_dim {
            return Err(Error::ResourceGuard { dim, max_dim });
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let eye = CMat::identity(k, k);
        let lift = |m: &CMat| kron(&eye, m);
        Self::new(
            self.a.matrices().iter().map(lift).collect(),
            self.b.matrices().iter().map(lift).collect(),
        )
    }

    /// `s·T`, scaling the row coefficients.
    pub fn scaled(&self, s: f64) -> Self {
        let a = self.a.matrices().iter().map(|m| m.scale(s)).collect();
        Self::new(a, self.b.matrices().to_vec()).expect("same shapes")
    }

    /// `x ↦ a x b`.
    pub fn single(a: CMat, b: CMat) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    /// The identity map on `M_n`.
    pub fn identity(n: usize) -> Self {
        Self::single(CMat::identity(n, n), CMat::identity(n, n)).expect("square")
    }

    /// The transpose `x ↦ xᵗ = Σᵢⱼ eᵢⱼ x eᵢⱼ`, `ℓ = n²`.
    pub fn transpose(n: usize) -> Self {
        let units: Vec<CMat> = (0..n)
            .flat_map(|i| (0..n).map(move |j| matrix_unit(n, i, j)))
            .collect();
        Self::new(units.clone(), units).expect("square")
    }

    /// First row of the transpose, `x ↦ e₁₁xᵗ = Σⱼ e₁ⱼ x e₁ⱼ`, `ℓ = n`.
    pub fn first_row_transpose(n: usize) -> Self {
        let units: Vec<CMat> = (0..n).map(|j| matrix_unit(n, 0, j)).collect();
        Self::new(units.clone(), units).expect("square")
    }
}

/// `e_ij`, the matrix with a single 1 at `(i, j)`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = c(1.0, 0.0);
    m
}
