//! m-linear operators on `ℓ_r^N`: representation, evaluation, classical
//! norms and the special families used by the experiments.

mod build;
mod io;
mod norms;
mod operator;

pub use build::{compose_diagonal, make_phi, random_dense_operator, random_sign_operator, sign_tensor};
pub use io::{OperatorDocument, RepresentationTag, FORMAT_TAG};
pub(crate) use norms::{open_slot, real_coefficients};
pub use norms::{hilbert_schmidt_norm, sup_norm, sup_norm_with, SupNormEstimate, SupNormOptions, SupScalar};
pub use operator::{
    CoeffScalar, Codomain, Coefficients, Kernel, MultilinearOperator, Representation, MAX_DENSE_ENTRIES,
};
