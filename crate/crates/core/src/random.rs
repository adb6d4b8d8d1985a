//! Seeded generators for random test instances.
//!
//! Every stream is a ChaCha generator keyed by `(seed, stream)`, so instance
//! `i` of a family does not depend on how many instances came before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::elemop::ElementaryOperator;
use crate::hermitian::{c, CMat, CVec, Hermitian, Psd};
use crate::numrange::{DensityMatrix, UnitVector};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    /// Standard complex Gaussian (real and imaginary parts N(0, 1/2)).
    pub fn complex_normal(&mut self) -> num_complex::Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(s * self.normal(), s * self.normal())
    }

    pub fn vector(&mut self, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| self.complex_normal())
    }

    pub fn unit_vector(&mut self, n: usize) -> UnitVector {
        loop {
            if let Some(u) = UnitVector::normalize(self.vector(n)) {
                return u;
            }
        }
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    pub fn hermitian(&mut self, n: usize) -> Hermitian {
        let g = self.matrix(n, n);
        Hermitian::from_gram(g)
    }

    /// `G G*` with `G` an `n × rank` Gaussian matrix.
    pub fn psd(&mut self, n: usize, rank: usize) -> Psd {
        let g = self.matrix(n, rank);
        Psd::from_gram(&g * g.adjoint()).expect("Gram matrix is PSD")
    }

    /// PSD matrix whose rank is drawn uniformly from `1..=n`, occasionally zero.
    pub fn psd_any_rank(&mut self, n: usize) -> Psd {
        if self.uniform() < 0.02 {
            return Psd::from_gram(CMat::zeros(n, n)).expect("zero is PSD");
        }
        let rank = self.uniform_int(1, n);
        self.psd(n, rank)
    }

    /// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
    pub fn unitary(&mut self, n: usize) -> CMat {
        let g = self.matrix(n, n);
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c(1.0, 0.0)
            };
            for z in q.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
        q
    }

    /// Invertible matrix with condition number at most `max_cond`:
    /// `U diag(s) V` with singular values in `[1, max_cond]`.
    pub fn conditioned(&mut self, n: usize, max_cond: f64) -> CMat {
        let u = self.unitary(n);
        let v = self.unitary(n);
        let s = CVec::from_fn(n, |_, _| c(1.0 + (max_cond - 1.0) * self.uniform(), 0.0));
        u * CMat::from_diagonal(&s) * v
    }

    pub fn density(&mut self, n: usize, rank: usize) -> DensityMatrix {
        let g = self.matrix(n, rank);
        DensityMatrix::from_factor(&g).expect("non-zero factor")
    }

    /// Operator with `l` Gaussian coefficient pairs on `M_n`.
    pub fn operator(&mut self, n: usize, l: usize) -> ElementaryOperator {
        let a = (0..l).map(|_| self.matrix(n, n)).collect();
        let b = (0..l).map(|_| self.matrix(n, n)).collect();
        ElementaryOperator::new(a, b).expect("consistent shapes")
    }
}
