//! Gram forms of coefficient tuples and the matrix numerical range.
//!
//! For a column `b = [b₁, …, b_ℓ]ᵗ` and a unit vector `η`,
//! `Q(b, η)ᵢⱼ = ⟨bⱼη, bᵢη⟩` is the Gram matrix of the vectors `bⱼη`;
//! `Q(b, ρ)ᵢⱼ = trace(ρ bᵢ* bⱼ)` replaces the vector state by a density matrix.

use crate::error::{Error, Result};
use crate::hermitian::{c, eig_hermitian, frobenius, CMat, CVec, Hermitian, Psd};
use crate::optimizer::{maximize_sphere_pair, OptimizerConfig, SphereObjective};

/// Relative eigenvalue gap for membership in the top eigenspace.
pub const EIGENGAP_TOL: f64 = 1e-8;
/// Rank threshold `λ_min > INDEP_TOL · λ_max` for the Hilbert–Schmidt Gram matrix.
pub const INDEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Row,
    Column,
}

/// `ℓ` square matrices of a common size `n`, read as a row or a column.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTuple {
    mats: Vec<CMat>,
    n: usize,
    orientation: Orientation,
}

impl CoefficientTuple {
    pub fn new(mats: Vec<CMat>, orientation: Orientation) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidInput("coefficient tuple is empty".into()))?;
        let n = first.nrows();
        for m in &mats {
            crate::hermitian::check_finite(m)?;
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimMismatch {
                    expected: n,
                    found: if m.nrows() != n { m.nrows() } else { m.ncols() },
                });
            }
        }
        Ok(Self {
            mats,
            n,
            orientation,
        })
    }

    pub fn column(mats: Vec<CMat>) -> Result<Self> {
        Self::new(mats, Orientation::Column)
    }

    pub fn row(mats: Vec<CMat>) -> Result<Self> {
        Self::new(mats, Orientation::Row)
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.mats
    }

    /// Entrywise adjoint with the orientation flipped; `a*` for a row `a`.
    pub fn adjoint(&self) -> Self {
        Self {
            mats: self.mats.iter().map(|m| m.adjoint()).collect(),
            n: self.n,
            orientation: match self.orientation {
                Orientation::Row => Orientation::Column,
                Orientation::Column => Orientation::Row,
            },
        }
    }

    fn require_column(&self) -> Result<()> {
        match self.orientation {
            Orientation::Column => Ok(()),
            Orientation::Row => Err(Error::InvalidInput(
                "Gram forms take a column tuple; use the adjoint of a row".into(),
            )),
        }
    }

    /// `n × ℓ` matrix with columns `bⱼ v`.
    pub(crate) fn images(&self, v: &CVec) -> CMat {
        let mut out = CMat::zeros(self.n, self.mats.len());
        for (j, m) in self.mats.iter().enumerate() {
            out.set_column(j, &(m * v));
        }
        out
    }

    /// `Σⱼ bⱼ* bⱼ`.
    pub fn square_sum(&self) -> Hermitian {
        let mut acc = CMat::zeros(self.n, self.n);
        for m in &self.mats {
            acc += m.adjoint() * m;
        }
        Hermitian::from_gram(acc)
    }
}

/// A normalized vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(CVec);

impl UnitVector {
    /// Normalizes `v`; `None` for zero or non-finite input.
    pub fn normalize(v: CVec) -> Option<Self> {
        let norm = v.norm();
        (norm > 0.0 && norm.is_finite()).then(|| Self(v.unscale(norm)))
    }

    pub fn new(v: CVec) -> Result<Self> {
        Self::normalize(v).ok_or_else(|| Error::InvalidInput("cannot normalize vector".into()))
    }

    pub(crate) fn from_normalized(v: CVec) -> Self {
        debug_assert!((v.norm() - 1.0).abs() <= 1e-12);
        Self(v)
    }

    /// Standard basis vector `e_k` of `ℂⁿ`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = CVec::zeros(n);
        v[k] = c(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> CVec {
        self.0
    }

    /// `ηη*`.
    pub fn projector(&self) -> CMat {
        &self.0 * self.0.adjoint()
    }
}

impl AsRef<CVec> for UnitVector {
    fn as_ref(&self) -> &CVec {
        &self.0
    }
}

/// Unit-trace PSD matrix of rank at most `rank_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    rank_bound: usize,
}

/// Eigenvalues above this count towards the rank of a density matrix.
const DENSITY_RANK_EPS: f64 = 1e-10;

impl DensityMatrix {
    pub fn new(mat: CMat, rank_bound: usize) -> Result<Self> {
        let psd = Psd::new(mat).map_err(|e| Error::InvalidState(e.to_string()))?;
        let trace = psd.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let rank = psd
            .eigen()
            .values
            .iter()
            .filter(|&&l| l > DENSITY_RANK_EPS)
            .count();
        if rank > rank_bound {
            return Err(Error::InvalidState(format!(
                "rank {rank} exceeds bound {rank_bound}"
            )));
        }
        Ok(Self {
            mat: psd.into_inner(),
            rank_bound,
        })
    }

    /// `C C* / trace(C C*)` with rank bound `C.ncols()`.
    pub fn from_factor(factor: &CMat) -> Result<Self> {
        let gram = factor * factor.adjoint();
        let trace = gram.trace().re;
        if trace <= 0.0 || !trace.is_finite() {
            return Err(Error::InvalidState("zero factor".into()));
        }
        Ok(Self {
            mat: crate::hermitian::symmetrize(&gram.unscale(trace)),
            rank_bound: factor.ncols(),
        })
    }

    /// Vector state `ηη*`.
    pub fn pure(eta: &UnitVector) -> Self {
        Self {
            mat: eta.projector(),
            rank_bound: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }
}

/// Block matrix `Q(b) = (bᵢ* bⱼ)ᵢⱼ ∈ M_ℓ(M_n)` as an `ℓn × ℓn` matrix.
pub fn gram_block(b: &CoefficientTuple) -> Result<Psd> {
    b.require_column()?;
    let n = b.dim();
    let l = b.len();
    let mut out = CMat::zeros(l * n, l * n);
    for (i, bi) in b.matrices().iter().enumerate() {
        for (j, bj) in b.matrices().iter().enumerate() {
            out.view_mut((i * n, j * n), (n, n))
                .copy_from(&(bi.adjoint() * bj));
        }
    }
    Psd::from_gram(out)
}

fn check_vector(b: &CoefficientTuple, dim: usize) -> Result<()> {
    if dim != b.dim() {
        return Err(Error::DimMismatch {
            expected: b.dim(),
            found: dim,
        });
    }
    Ok(())
}

/// `Q(b, η)ᵢⱼ = ⟨bⱼη, bᵢη⟩`.
pub fn gram_at_vector(b: &CoefficientTuple, eta: &UnitVector) -> Result<Psd> {
    b.require_column()?;
    check_vector(b, eta.dim())?;
    let w = b.images(eta.as_ref());
    Psd::from_gram(w.adjoint() * w)
}

/// `Q(b, ρ)ᵢⱼ = trace(ρ bᵢ* bⱼ)`.
pub fn gram_at_state(b: &CoefficientTuple, rho: &DensityMatrix) -> Result<Psd> {
    b.require_column()?;
    check_vector(b, rho.dim())?;
    let l = b.len();
    // trace(ρ bᵢ* bⱼ) = Σ conj(bᵢ) ∘ (bⱼ ρ)
    let right: Vec<CMat> = b.matrices().iter().map(|m| m * rho.matrix()).collect();
    let q = CMat::from_fn(l, l, |i, j| {
        b.matrices()[i]
            .iter()
            .zip(right[j].iter())
            .map(|(x, y)| x.conj() * y)
            .sum()
    });
    Psd::from_gram(q)
}

/// Top eigenspace of `Σⱼ bⱼ* bⱼ`.
#[derive(Debug, Clone)]
pub struct ExtremalRange {
    /// `‖Σ bⱼ* bⱼ‖`, the largest trace of a matrix in the numerical range.
    pub max_trace: f64,
    /// Orthonormal columns spanning the eigenspace of the top eigenvalue.
    pub basis: CMat,
}

pub fn extremal_range_basis(b: &CoefficientTuple) -> ExtremalRange {
    let eig = eig_hermitian(&b.square_sum()).expect("finite coefficients");
    let top = eig.max();
    let cutoff = top - EIGENGAP_TOL * top.abs().max(f64::MIN_POSITIVE);
    let count = eig
        .values
        .iter()
        .take_while(|&&l| l >= cutoff)
        .count()
        .max(1);
    ExtremalRange {
        max_trace: top,
        basis: eig.vectors.columns(0, count).into_owned(),
    }
}

/// Result of the heuristic search for a common point of
/// `W_{m,e}(a*)` and `W_{m,e}(b)`.
#[derive(Debug, Clone)]
pub struct EqualityGap {
    /// Smallest `‖Q(a*, ξ) − Q(b, η)‖_F` found.
    pub gap: f64,
    pub xi: UnitVector,
    pub eta: UnitVector,
    pub per_restart_gaps: Vec<f64>,
    pub converged_fraction: f64,
}

/// `−‖X(u) − Y(v)‖²_F` where `X(u) = Q(a*, Eₐu)`, `Y(v) = Q(b, E_b v)`.
struct GapObjective<'a> {
    a_adj: &'a CoefficientTuple,
    b: &'a CoefficientTuple,
    basis_a: CMat,
    basis_b: CMat,
}

impl GapObjective<'_> {
    fn lift(&self, blocks: &[CVec]) -> (CVec, CVec) {
        (&self.basis_a * &blocks[0], &self.basis_b * &blocks[1])
    }

    fn difference(&self, xi: &CVec, eta: &CVec) -> CMat {
        let va = self.a_adj.images(xi);
        let wb = self.b.images(eta);
        va.adjoint() * va - wb.adjoint() * wb
    }
}

impl SphereObjective for GapObjective<'_> {
    fn value(&self, blocks: &[CVec]) -> f64 {
        let (xi, eta) = self.lift(blocks);
        -frobenius(&self.difference(&xi, &eta)).powi(2)
    }

    fn gradient(&self, blocks: &[CVec], block: usize) -> CVec {
        // for X(ξ)ᵢⱼ = ξ* cᵢ* cⱼ ξ and D = X − Y, d‖D‖² = 4 Re⟨dξ, Σᵢⱼ Dⱼᵢ cᵢ* cⱼ ξ⟩
        let (xi, eta) = self.lift(blocks);
        let d = self.difference(&xi, &eta);
        let (tuple, point, basis, sign) = if block == 0 {
            (self.a_adj, &xi, &self.basis_a, 1.0)
        } else {
            (self.b, &eta, &self.basis_b, -1.0)
        };
        let images = tuple.images(point);
        // Σⱼ Dⱼᵢ cⱼ ξ for each i, then apply cᵢ*
        let mixed = &images * &d;
        let mut g = CVec::zeros(point.len());
        for (i, ci) in tuple.matrices().iter().enumerate() {
            g += ci.adjoint() * mixed.column(i);
        }
        // maximize −‖D‖²
        (basis.adjoint() * g).scale(-4.0 * sign)
    }
}

/// Multistart estimate of `inf ‖Q(a*, ξ) − Q(b, η)‖_F` over unit `ξ`, `η` in
/// the top eigenspaces of `Σ aⱼaⱼ*` and `Σ bⱼ*bⱼ`. A gap near zero is
/// evidence of equality `‖T‖ = ‖a‖‖b‖`; it is not a certificate either way.
pub fn haagerup_equality_gap(
    a: &CoefficientTuple,
    b: &CoefficientTuple,
    cfg: &OptimizerConfig,
) -> Result<EqualityGap> {
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
    let a_adj = match a.orientation() {
        Orientation::Row => a.adjoint(),
        Orientation::Column => a.clone(),
    };
    b.require_column()?;
    let basis_a = extremal_range_basis(&a_adj).basis;
    let basis_b = extremal_range_basis(b).basis;
    let dims = (basis_a.ncols(), basis_b.ncols());
    let objective = GapObjective {
        a_adj: &a_adj,
        b,
        basis_a,
        basis_b,
    };
    let result = maximize_sphere_pair(&objective, dims, cfg)?;
    let (u, v) = &result.best_point;
    let (xi, eta) = objective.lift(&[u.as_ref().clone(), v.as_ref().clone()]);
    Ok(EqualityGap {
        gap: (-result.best_value).max(0.0).sqrt(),
        xi: UnitVector::new(xi)?,
        eta: UnitVector::new(eta)?,
        per_restart_gaps: result
            .per_restart_values
            .iter()
            .map(|v| (-v).max(0.0).sqrt())
            .collect(),
        converged_fraction: result.converged_fraction,
    })
}

#[derive(Debug, Clone)]
pub struct Independence {
    pub independent: bool,
    /// `Σₖ Q(b, eₖ)`, the Hilbert–Schmidt Gram matrix `(trace bᵢ* bⱼ)`.
    pub witness: Psd,
}

/// Linear independence of the tuple through the positive definiteness of
/// `Σₖ Q(b, eₖ)` over the standard basis.
pub fn linearly_independent(b: &CoefficientTuple) -> Independence {
    let column = match b.orientation() {
        Orientation::Column => b.clone(),
        Orientation::Row => CoefficientTuple {
            orientation: Orientation::Column,
            ..b.clone()
        },
    };
    let l = column.len();
    let mut acc = CMat::zeros(l, l);
    for k in 0..column.dim() {
        let q =
            gram_at_vector(&column, &UnitVector::basis(column.dim(), k)).expect("dimensions agree");
        acc += q.matrix();
    }
    let witness = Psd::from_gram(acc).expect("sum of Gram matrices");
    let eig = witness.eigen();
    Independence {
        independent: eig.max() > 0.0 && eig.min() > INDEP_TOL * eig.max(),
        witness,
    }
}
