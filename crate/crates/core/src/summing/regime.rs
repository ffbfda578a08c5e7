use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::conjugate_exponent;

/// How the stable-measure integral relates to `π_p` for given exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    Unknown,
    /// The normalized integral is a lower bound for `π_p`.
    LowerBoundOnly,
    /// Equivalent to `π_p` up to constants independent of `N`.
    Equivalent,
    /// Equal to `π_p`.
    Exact,
}

/// The condition that produced a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeBranch {
    /// `r = q = 2`.
    ExactHilbert,
    /// `r = 2` and either `p < q < 2` or `p = q`.
    ExactHilbertDomain,
    /// `p < r' < 2` and either `p < q ≤ 2` or `p = q`.
    ExactStableDomain,
    /// `r = 2` and `p, q < 2`.
    EquivalentHilbertSubquadratic,
    /// `r = 2` and `q ≤ p`.
    EquivalentHilbertDominated,
    /// `p < r' < 2` and `q ≤ 2`.
    EquivalentStableDomain,
    /// `r = 2` or `p < r' < 2`, any codomain.
    LowerBound,
    None,
}

impl RegimeBranch {
    pub fn code(self) -> &'static str {
        match self {
            RegimeBranch::ExactHilbert => "exact-a",
            RegimeBranch::ExactHilbertDomain => "exact-b",
            RegimeBranch::ExactStableDomain => "exact-c",
            RegimeBranch::EquivalentHilbertSubquadratic => "equivalent-i-1",
            RegimeBranch::EquivalentHilbertDominated => "equivalent-i-2",
            RegimeBranch::EquivalentStableDomain => "equivalent-i-3",
            RegimeBranch::LowerBound => "lower-ii",
            RegimeBranch::None => "none",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            RegimeBranch::ExactHilbert => "exact: r = q = 2",
            RegimeBranch::ExactHilbertDomain => "exact: r = 2 and (p < q < 2 or p = q)",
            RegimeBranch::ExactStableDomain => "exact: p < r' < 2 and (p < q <= 2 or p = q)",
            RegimeBranch::EquivalentHilbertSubquadratic => "equivalent: r = 2 and p, q < 2",
            RegimeBranch::EquivalentHilbertDominated => "equivalent: r = 2 and q <= p",
            RegimeBranch::EquivalentStableDomain => "equivalent: p < r' < 2 and q <= 2",
            RegimeBranch::LowerBound => "lower bound only: r = 2 or p < r' < 2",
            RegimeBranch::None => "no integral formula: need r = 2 or p < r' < 2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegimeTag {
    pub kind: RegimeKind,
    pub branch: RegimeBranch,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} ({})", self.kind, self.branch.describe())
    }
}

/// Classifies `(r, q, p)`: domain `ℓ_r`, codomain `ℓ_q` (use `q = 2` for
/// scalar forms), summing exponent `p`. The strongest applicable tag wins;
/// boundary ties follow the non-strict inequalities as stated.
pub fn regime_classify(r: f64, q: f64, p: f64) -> Result<RegimeTag> {
    if !(r >= 1.0) || !(q >= 1.0) || !(p > 0.0) || p.is_nan() {
        return Err(Error::param(format!("need r ≥ 1, q ≥ 1, p > 0 (got r={r}, q={q}, p={p})")));
    }
    let rc = conjugate_exponent(r);
    let hilbert = r == 2.0;
    let stable = p < rc && rc < 2.0;
    let tag = |kind, branch| Ok(RegimeTag { kind, branch });

    if hilbert && q == 2.0 {
        return tag(RegimeKind::Exact, RegimeBranch::ExactHilbert);
    }
    if hilbert && ((p < q && q < 2.0) || p == q) {
        return tag(RegimeKind::Exact, RegimeBranch::ExactHilbertDomain);
    }
    if stable && ((p < q && q <= 2.0) || p == q) {
        return tag(RegimeKind::Exact, RegimeBranch::ExactStableDomain);
    }
    if hilbert && p < 2.0 && q < 2.0 {
        return tag(RegimeKind::Equivalent, RegimeBranch::EquivalentHilbertSubquadratic);
    }
    if hilbert && q <= p {
        return tag(RegimeKind::Equivalent, RegimeBranch::EquivalentHilbertDominated);
    }
    if stable && q <= 2.0 {
        return tag(RegimeKind::Equivalent, RegimeBranch::EquivalentStableDomain);
    }
    if hilbert || stable {
        return tag(RegimeKind::LowerBoundOnly, RegimeBranch::LowerBound);
    }
    tag(RegimeKind::Unknown, RegimeBranch::None)
}
