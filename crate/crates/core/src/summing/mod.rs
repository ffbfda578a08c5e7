//! Multiple `p`-summing norms: regime classification, stable-measure
//! integral estimates and definition-based lower bounds.

mod domination;
mod estimate;
mod regime;
mod weak;

pub use domination::{moment_monotonicity, pietsch_domination_check, DominationReport, MonotonicityReport, TestFunctions};
pub use estimate::{
    estimate_pi, estimate_pi_run, integral_moment, Aggregator, normalized_moments, sampling_law, MomentRun, MonteCarlo,
    NormEstimate, NormalizedMoment, Quantity, UncertaintyKind,
};
pub use regime::{regime_classify, RegimeBranch, RegimeKind, RegimeTag};
pub use weak::{
    basis_lower_bound, basis_weak_norm, search_lower_bound, weak_p_norm, SearchOptions, SearchResult, WeakMethod,
    WeakNormOptions, WeakPNorm, MAX_ENUMERATION,
};
