use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::{random_dense_operator, Codomain, MultilinearOperator};
use crate::rng::{self, tag};
use crate::scalar::conjugate_exponent;
use crate::summing::{estimate_pi, MonteCarlo, NormEstimate};

/// Whether `(r, q, p)` satisfies one of the conditions under which the
/// integral is equivalent to `π_p`: `r = 2` with `p, q < 2` or `q ≤ p`, or
/// `p < r' < 2` with `q ≤ 2`.
pub fn equivalence_condition(r: f64, q: f64, p: f64) -> bool {
    let rc = conjugate_exponent(r);
    (r == 2.0 && ((p < 2.0 && q < 2.0) || q <= p)) || (p < rc && rc < 2.0 && q <= 2.0)
}

/// Coefficient multipliers `α` indexed like the operator's basis tuples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignPattern {
    Ones,
    /// `-1` at one flat tuple index, `+1` elsewhere.
    SingleFlip { index: usize },
    RandomSigns { seed: u64 },
}

impl SignPattern {
    pub fn build(&self, m: usize, n: usize) -> Result<Vec<f64>> {
        let len = n.pow(m as u32);
        match *self {
            SignPattern::Ones => Ok(vec![1.0; len]),
            SignPattern::SingleFlip { index } => {
                if index >= len {
                    return Err(Error::param(format!("flip index {index} out of range for {len} tuples")));
                }
                let mut a = vec![1.0; len];
                a[index] = -1.0;
                Ok(a)
            }
            SignPattern::RandomSigns { seed } => {
                let mut rng = rng::stream_rng(seed, rng::substream(tag::EXPERIMENT, 1));
                Ok((0..len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub alpha_sup: f64,
    pub base: NormEstimate,
    pub modified: NormEstimate,
    /// `π̂_p(T_α) / (‖α‖_∞ π̂_p(T))`.
    pub ratio: f64,
    /// Half-width for `ratio` from the two relative uncertainties.
    pub uncertainty: f64,
}

fn ratio_report(base: NormEstimate, modified: NormEstimate, alpha_sup: f64) -> ContractionReport {
    let den = alpha_sup * base.value;
    let ratio = if den > 0.0 { modified.value / den } else { 0.0 };
    let rel = (base.relative_uncertainty().powi(2) + modified.relative_uncertainty().powi(2)).sqrt();
    ContractionReport { alpha_sup, ratio, uncertainty: ratio * rel, base, modified }
}

/// Compares `π̂_p(T_α)` against `‖α‖_∞ π̂_p(T)` using the same draws for both
/// (common random numbers). Refuses parameters outside the equivalence
/// conditions.
pub fn contraction_check(
    op: &MultilinearOperator,
    alpha: &[f64],
    p: f64,
    r: f64,
    mc: &MonteCarlo,
) -> Result<ContractionReport> {
    let q = op.codomain().exponent().unwrap_or(2.0);
    if !equivalence_condition(r, q, p) {
        return Err(Error::Refused(format!(
            "(r, q, p) = ({r}, {q}, {p}) is outside the conditions for contraction"
        )));
    }
    let alpha_sup = alpha.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let modified_op = op.hadamard(alpha)?;
    let base = estimate_pi(op, p, r, mc)?;
    let modified = estimate_pi(&modified_op, p, r, mc)?;
    Ok(ratio_report(base, modified, alpha_sup))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub n: usize,
    pub operator_seed: u64,
    pub base: NormEstimate,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Largest contraction ratio over `patterns` random sign patterns on a
/// random Gaussian operator `ℓ_r^N × ⋯ → ℓ_q^N`. The base estimate is
/// computed once.
#[allow(clippy::too_many_arguments)]
pub fn contraction_envelope(
    m: usize,
    n: usize,
    q: f64,
    r: f64,
    p: f64,
    patterns: usize,
    operator_seed: u64,
    mc: &MonteCarlo,
) -> Result<EnvelopeReport> {
    if !equivalence_condition(r, q, p) {
        return Err(Error::Refused(format!(
            "(r, q, p) = ({r}, {q}, {p}) is outside the conditions for contraction"
        )));
    }
    let op = random_dense_operator(m, n, r, Codomain::sequence(q, n)?, false, operator_seed)?;
    let base = estimate_pi(&op, p, r, mc)?;
    let mut ratios = Vec::with_capacity(patterns);
    for k in 0..patterns {
        let alpha = SignPattern::RandomSigns { seed: rng::substream(operator_seed, k as u64) }.build(m, n)?;
        let modified = estimate_pi(&op.hadamard(&alpha)?, p, r, mc)?;
        ratios.push(ratio_report(base.clone(), modified, 1.0).ratio);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(EnvelopeReport { n, operator_seed, base, ratios, max_ratio })
}
