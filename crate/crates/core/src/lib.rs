//! spinekit: exact computational engine for beta = L^2 log-gas ensembles.
//!
//! For even charge L, the M-particle ensemble with interaction
//! `prod |x_i - x_j|^(L^2)` lives naturally in the exterior algebra of an
//! LM-dimensional space: each particle is a degree-L monomial-curve blade,
//! the partition function is the hyperpfaffian of the Gram L-form of the
//! measure, and a quantized momentum grading collapses everything onto a
//! small sector basis (`2P+1` sectors instead of `C(LM, L)` blades).
//!
//! Everything downstream of the float-tagged stretch paths is exact: the
//! coefficient ring is arbitrary-precision rational, and the identity checks
//! (confluent Vandermonde, sector-graded quadratic relations, shift
//! derivative routes, bilinear insertion/annihilation pairing) assert literal
//! equality, not tolerances.

pub mod algebra;
pub mod correlation;
pub mod error;
pub mod hirota;
pub mod moments;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod spine;
pub mod tau;

pub use algebra::{Blade, DualBlade, SparseForm};
pub use error::{Error, Result};
pub use moments::{MomentKind, MomentSequence};
pub use poly::{LaurentPoly, MomentPoly};
pub use scalar::{Rat, Ring};
pub use spine::{SpineBasis, SpineContext};
pub use tau::{Budget, GramForm, PairConstantTable, TauPolynomial, WedgeStrategy};
