//! One-dimensional stable laws, their product measures and moment
//! constants.

mod constant;
mod law;
mod special;

pub use constant::{
    absolute_moment_closed_form, absolute_moment_quadrature, constant_c, MomentConstant, AGREEMENT_TOL,
};
pub use law::{
    closed_form_cdf, sample_stable, sample_stable_vector, sample_stable_with, Sampler, StableLaw, StableScalar,
    CHUNK,
};
pub use special::{gamma_fn, gamma_ratio, ln_gamma};
