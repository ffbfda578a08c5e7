use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::{Codomain, MultilinearOperator};
use crate::rng;
use crate::summing::{estimate_pi, regime_classify, MonteCarlo, NormEstimate, RegimeKind};

/// Codomain each side of the comparison is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InclusionCodomain {
    /// Keep every operator's own codomain.
    AsGiven,
    /// Measure the `π_{p_i}` side in `ℓ_{p_i}`, so both sides sit in the
    /// `p = q` case.
    MatchSummingExponent,
}

/// What the exponents predict for `π_{p₁}/π_{p₂}` over a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionKind {
    /// `p₁, p₂ ≥ q`: the classes coincide, so the ratio stays bounded
    /// above and below.
    Coincidence,
    /// `p₁ ≤ p₂ = q`: `π_{p₂} ≲ π_{p₁}`, the ratio stays bounded below.
    Inclusion,
    /// Neither relation applies (including codomains that differ per side).
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionPoint {
    pub n: usize,
    pub first: NormEstimate,
    pub second: NormEstimate,
    /// `π̂_{p₁} / π̂_{p₂}`.
    pub ratio: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub p1: f64,
    pub p2: f64,
    pub kind: InclusionKind,
    pub points: Vec<InclusionPoint>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

fn side(op: &MultilinearOperator, p: f64, codomain: InclusionCodomain) -> Result<MultilinearOperator> {
    match codomain {
        InclusionCodomain::AsGiven => Ok(op.clone()),
        InclusionCodomain::MatchSummingExponent => {
            if p < 1.0 {
                return Err(Error::param("matching the codomain needs p ≥ 1"));
            }
            let dim = op.codomain().dim();
            op.with_codomain(Codomain::sequence(p, dim)?)
        }
    }
}

fn usable(kind: RegimeKind) -> bool {
    matches!(kind, RegimeKind::Exact | RegimeKind::Equivalent)
}

/// Tracks `π̂_{p₁}(T)/π̂_{p₂}(T)` over a family of operators. Both sides must
/// be in an exact or equivalent regime.
pub fn inclusion_ratio(
    family: &[MultilinearOperator],
    p1: f64,
    p2: f64,
    r: f64,
    codomain: InclusionCodomain,
    mc: &MonteCarlo,
) -> Result<InclusionReport> {
    if family.is_empty() {
        return Err(Error::param("empty operator family"));
    }
    let kind = match codomain {
        InclusionCodomain::MatchSummingExponent => InclusionKind::None,
        InclusionCodomain::AsGiven => {
            let q = family[0].codomain().exponent().unwrap_or(2.0);
            if family.iter().any(|op| op.codomain().exponent().unwrap_or(2.0) != q) {
                InclusionKind::None
            } else if p1 >= q && p2 >= q {
                InclusionKind::Coincidence
            } else if p1 <= p2 && p2 == q {
                InclusionKind::Inclusion
            } else {
                InclusionKind::None
            }
        }
    };
    let mut points = Vec::with_capacity(family.len());
    for (i, op) in family.iter().enumerate() {
        let a = side(op, p1, codomain)?;
        let b = side(op, p2, codomain)?;
        for (x, p) in [(&a, p1), (&b, p2)] {
            let q = x.codomain().exponent().unwrap_or(2.0);
            let tag = regime_classify(r, q, p)?;
            if !usable(tag.kind) {
                return Err(Error::Refused(format!("(r, q, p) = ({r}, {q}, {p}): {tag}")));
            }
        }
        let point_mc = mc.with_seed(rng::substream(mc.seed, i as u64));
        let first = estimate_pi(&a, p1, r, &point_mc)?;
        let second = estimate_pi(&b, p2, r, &point_mc)?;
        let ratio = if second.value > 0.0 { first.value / second.value } else { f64::NAN };
        let rel = (first.relative_uncertainty().powi(2) + second.relative_uncertainty().powi(2)).sqrt();
        points.push(InclusionPoint { n: op.dim(), ratio, uncertainty: ratio * rel, first, second });
    }
    let min_ratio = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(InclusionReport { p1, p2, kind, points, min_ratio, max_ratio })
}
