//! Norms of elementary operators `x ↦ Σⱼ aⱼ x bⱼ` on `M_n`, computed through
//! the tracial geometric mean `tgm(X, Y) = trace √(√X Y √X)`.

pub mod elemop;
pub mod error;
pub mod hermitian;
pub mod numrange;
pub mod optimizer;
pub mod random;
pub mod suite;
pub mod tgm;

pub use elemop::{ElementaryOperator, NormReport, NormSettings};
pub use error::{Error, Result};
pub use hermitian::{CMat, CVec, Hermitian, Psd};
pub use numrange::{CoefficientTuple, DensityMatrix, UnitVector};
pub use optimizer::{OptimizerConfig, OptimizerResult};
