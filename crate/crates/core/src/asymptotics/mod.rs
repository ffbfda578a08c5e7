//! Growth rates and structural inequalities: limit orders of the diagonal
//! operator, the Γ-ratio bound and its optimality, contraction by
//! coefficient multipliers, and inclusion between summing exponents.

mod contraction;
mod gamma;
mod inclusion;
mod limit;

pub use contraction::{
    contraction_check, contraction_envelope, equivalence_condition, ContractionReport, EnvelopeReport, SignPattern,
};
pub use gamma::{gamma_ratio_bound, gaussian_radial_moment, optimality_witness, GammaBoundReport, OptimalityReport};
pub use inclusion::{inclusion_ratio, InclusionCodomain, InclusionKind, InclusionPoint, InclusionReport};
pub use limit::{
    lambda_formula, limit_order_fit, limit_region, FitOptions, LimitOrderQuery, LimitRegion, SlopeFit, SweepPoint,
};
