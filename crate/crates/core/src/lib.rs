//! Multiple p-summing norms of multilinear operators on finite-dimensional
//! ℓ_r spaces, computed as L_p norms against products of stable measures.

// `!(x > 0.0)` is how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod stable;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Executor;
pub use scalar::{Field, Scalar};
pub mod multilinear;
pub mod serde_exponent;
pub mod summing;
pub mod asymptotics;

pub use multilinear::{Codomain, Coefficients, MultilinearOperator};
pub use stable::StableLaw;
pub use summing::{estimate_pi, integral_moment, regime_classify, MonteCarlo, NormEstimate, RegimeKind, RegimeTag};
