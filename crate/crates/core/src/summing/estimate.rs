use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::regime::{regime_classify, RegimeKind, RegimeTag};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::multilinear::{CoeffScalar, Kernel, MultilinearOperator};
use crate::rng::{self, tag};
use crate::scalar::{conjugate_exponent, Field};
use crate::stable::{StableLaw, StableScalar};
use crate::stats::{self, MEDIAN_EFFICIENCY, Z95};

/// How per-block means are combined into one estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    /// Mean after dropping the `⌈K/64⌉` largest and smallest of the `K`
    /// block means.
    #[default]
    TrimmedMean,
    /// Median of the block means.
    Median,
}

impl Aggregator {
    pub fn trim(self, blocks: usize) -> usize {
        match self {
            Aggregator::TrimmedMean if blocks >= 3 => blocks.div_ceil(64).min((blocks - 1) / 2),
            Aggregator::TrimmedMean => 0,
            Aggregator::Median => blocks.saturating_sub(1) / 2,
        }
    }

    pub fn center(self, means: &[f64]) -> f64 {
        match self {
            Aggregator::TrimmedMean => stats::trimmed_mean(means, self.trim(means.len())),
            Aggregator::Median => stats::median(means),
        }
    }

    /// Standard error of [`Aggregator::center`] estimated from the block
    /// spread.
    fn spread_se(self, means: &[f64]) -> f64 {
        let k = means.len() as f64;
        match self {
            Aggregator::TrimmedMean => {
                let se = stats::trimmed_mean_se(means, self.trim(means.len()));
                if se.is_nan() {
                    0.0
                } else {
                    se
                }
            }
            Aggregator::Median => MEDIAN_EFFICIENCY * stats::mad_sigma(means) / k.sqrt(),
        }
    }

    /// Inflation of the standard error over the plain mean's for
    /// near-normal block means.
    fn efficiency(self) -> f64 {
        match self {
            Aggregator::TrimmedMean => 1.0,
            Aggregator::Median => MEDIAN_EFFICIENCY,
        }
    }
}

/// Sampling plan for the Monte Carlo integrals. Results depend only on
/// `(n_samples, blocks, seed, field)`; the executor changes speed, never
/// numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub n_samples: usize,
    pub blocks: usize,
    pub seed: u64,
    pub field: Field,
    #[serde(default)]
    pub aggregator: Aggregator,
    /// Multiplies every stable draw and every moment constant; π-values do
    /// not depend on it.
    #[serde(default = "unit_scale")]
    pub law_scale: f64,
    #[serde(skip)]
    pub exec: Executor,
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            n_samples: 1_000_000,
            blocks: 64,
            seed: 0,
            field: Field::Real,
            aggregator: Aggregator::default(),
            law_scale: 1.0,
            exec: Executor::default(),
        }
    }
}

impl MonteCarlo {
    pub fn new(n_samples: usize, blocks: usize, seed: u64) -> Self {
        MonteCarlo { n_samples, blocks, seed, ..Default::default() }
    }

    pub fn with_field(self, field: Field) -> Self {
        MonteCarlo { field, ..self }
    }

    pub fn with_executor(self, exec: Executor) -> Self {
        MonteCarlo { exec, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        MonteCarlo { seed, ..self }
    }

    pub fn with_aggregator(self, aggregator: Aggregator) -> Self {
        MonteCarlo { aggregator, ..self }
    }

    pub fn with_law_scale(self, law_scale: f64) -> Self {
        MonteCarlo { law_scale, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.blocks == 0 {
            return Err(Error::param("need at least one block"));
        }
        if self.n_samples < self.blocks {
            return Err(Error::param(format!(
                "sample size {} is below the block count {}",
                self.n_samples, self.blocks
            )));
        }
        Ok(())
    }

    fn block_len(&self, b: usize) -> usize {
        self.n_samples / self.blocks + usize::from(b < self.n_samples % self.blocks)
    }
}

/// How the reported half-width was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncertaintyKind {
    /// Sample variance of the integrand (finite second moment).
    Variance,
    /// Spread of the block means; used when the integrand has infinite
    /// variance (`2p ≥` stability index).
    HeavyTailBlockSpread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `(∫ ‖T(z)‖^p dμ)^{1/p}` before normalization.
    RawMoment,
    /// The raw moment divided by `c_{r',p}^m`.
    SummingNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub quantity: Quantity,
    pub value: f64,
    /// Half-width of a nominal 95% interval.
    pub uncertainty: f64,
    pub uncertainty_kind: UncertaintyKind,
    pub n_samples: usize,
    pub blocks: usize,
    pub seed: u64,
    pub field: Field,
    pub aggregator: Aggregator,
    pub regime: RegimeTag,
    pub p: f64,
    #[serde(with = "crate::serde_exponent")]
    pub r: f64,
    /// Codomain exponent; `None` for scalar forms.
    #[serde(with = "crate::serde_exponent::option")]
    pub q: Option<f64>,
    pub arity: usize,
    pub dim: usize,
    /// Stability index of the sampling measure, `r'`.
    pub stability_index: f64,
    /// Divisor applied to the raw moment (`c_{r',p}^m`, or 1 for raw).
    pub normalization: f64,
}

impl NormEstimate {
    pub fn relative_uncertainty(&self) -> f64 {
        if self.value > 0.0 {
            self.uncertainty / self.value
        } else {
            0.0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// An estimate together with the per-block means of `‖T(z)‖^p`, in block
/// order, for resampling.
#[derive(Debug, Clone)]
pub struct MomentRun {
    pub estimate: NormEstimate,
    pub block_means: Vec<f64>,
}

impl MomentRun {
    /// The estimate recomputed from a resampled set of block means.
    pub fn value_from_blocks(&self, means: &[f64]) -> f64 {
        let m = self.estimate.aggregator.center(means).max(0.0);
        m.powf(1.0 / self.estimate.p) / self.estimate.normalization
    }
}

/// Block statistics for several exponents of the same norm samples.
struct Blocks {
    counts: Vec<usize>,
    /// `means[e][b]`: mean of `‖T(z)‖^{exps[e]}` over block `b`.
    means: Vec<Vec<f64>>,
    /// `m2[e][b]`: sum of squared deviations within block `b`.
    m2: Vec<Vec<f64>>,
}

#[inline]
fn power(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

fn run_blocks<S: CoeffScalar + StableScalar>(
    op: &MultilinearOperator,
    law: &StableLaw,
    exps: &[f64],
    mc: &MonteCarlo,
) -> Result<Blocks> {
    law.check_field::<S>()?;
    Kernel::<S>::new(op)?;
    let n = op.dim();
    let m = op.arity();
    let sampler = law.sampler();
    let per_block = mc.exec.map(mc.blocks, |b| {
        let mut rng = rng::stream_rng(mc.seed, rng::substream(tag::ESTIMATE, b as u64));
        let mut kernel = Kernel::<S>::new(op).expect("field checked above");
        let mut z = vec![S::zero(); m * n];
        let mut mean = vec![0.0; exps.len()];
        let mut m2 = vec![0.0; exps.len()];
        let count = mc.block_len(b);
        for i in 0..count {
            sampler.fill(&mut rng, &mut z);
            let parts: Vec<&[S]> = z.chunks_exact(n).collect();
            let norm = kernel.eval_norm(&parts);
            let k = (i + 1) as f64;
            for e in 0..exps.len() {
                let v = power(norm, exps[e]);
                let d = v - mean[e];
                mean[e] += d / k;
                m2[e] += d * (v - mean[e]);
            }
        }
        (count, mean, m2)
    });
    let mut out = Blocks {
        counts: Vec::with_capacity(mc.blocks),
        means: vec![Vec::with_capacity(mc.blocks); exps.len()],
        m2: vec![Vec::with_capacity(mc.blocks); exps.len()],
    };
    for (count, mean, m2) in per_block {
        out.counts.push(count);
        for e in 0..exps.len() {
            out.means[e].push(mean[e]);
            out.m2[e].push(m2[e]);
        }
    }
    Ok(out)
}

fn sample_blocks(op: &MultilinearOperator, law: &StableLaw, exps: &[f64], mc: &MonteCarlo) -> Result<Blocks> {
    mc.validate()?;
    match mc.field {
        Field::Real => run_blocks::<f64>(op, law, exps, mc),
        Field::Complex => run_blocks::<Complex64>(op, law, exps, mc),
    }
}

/// Block-aggregated point estimate of `E‖T(z)‖^p` and its 95% half-width.
fn summarize(blocks: &Blocks, e: usize, heavy: bool, agg: Aggregator) -> (f64, f64) {
    let means = &blocks.means[e];
    let center = agg.center(means).max(0.0);
    let half = if heavy {
        Z95 * agg.spread_se(means)
    } else {
        let n: usize = blocks.counts.iter().sum();
        let grand = means.iter().zip(&blocks.counts).map(|(m, &c)| m * c as f64).sum::<f64>() / n as f64;
        let within: f64 = blocks.m2[e].iter().sum();
        let between: f64 = means.iter().zip(&blocks.counts).map(|(m, &c)| c as f64 * (m - grand).powi(2)).sum();
        let var = (within + between) / (n.max(2) - 1) as f64;
        Z95 * agg.efficiency() * (var / n as f64).sqrt()
    };
    (center, half)
}

/// Moves a half-width on `M` to one on `M^{1/p}` by the delta method.
fn root_with_uncertainty(center: f64, half: f64, p: f64) -> (f64, f64) {
    if center <= 0.0 {
        return (0.0, 0.0);
    }
    let value = center.powf(1.0 / p);
    (value, half * value / (p * center))
}

fn is_heavy(law: &StableLaw, p: f64) -> bool {
    !law.is_gaussian() && 2.0 * p >= law.index()
}

/// Codomain exponent used for classification; scalar forms count as `ℓ_2^1`.
pub(crate) fn classification_exponent(op: &MultilinearOperator) -> f64 {
    op.codomain().exponent().unwrap_or(2.0)
}

/// The stable law for domain `ℓ_r`: index `r'`. Requires `r ≥ 2` and, for
/// `r > 2`, `p < r'` so that the integrand has a finite `p`-th moment.
pub fn sampling_law(r: f64, p: f64, field: Field) -> Result<StableLaw> {
    if !(p > 0.0) {
        return Err(Error::param(format!("summing exponent must be positive, got {p}")));
    }
    if !(r >= 2.0) {
        return Err(Error::domain(format!(
            "no stable measure for domain exponent r = {r}: the index r' would exceed 2"
        )));
    }
    let s = conjugate_exponent(r);
    if r > 2.0 && p >= s {
        return Err(Error::domain(format!(
            "p = {p} ≥ r' = {s}: the integrand has no finite p-th moment"
        )));
    }
    StableLaw::new(s, field)
}

fn build_run(op: &MultilinearOperator, p: f64, r: f64, mc: &MonteCarlo, normalize: bool) -> Result<MomentRun> {
    let law = sampling_law(r, p, mc.field)?.scaled(mc.law_scale)?;
    let q = classification_exponent(op);
    let regime = regime_classify(r, q, p)?;
    if normalize && regime.kind == RegimeKind::Unknown {
        return Err(Error::Refused(format!(
            "(r, q, p) = ({r}, {q}, {p}) is outside every integral formula; {}",
            regime.branch.describe()
        )));
    }
    let normalization = if normalize {
        law.moment_constant(p)?.powi(op.arity() as i32)
    } else {
        1.0
    };
    let blocks = sample_blocks(op, &law, &[p], mc)?;
    let heavy = is_heavy(&law, p);
    let (center, half) = summarize(&blocks, 0, heavy, mc.aggregator);
    let (raw, raw_half) = root_with_uncertainty(center, half, p);
    let estimate = NormEstimate {
        quantity: if normalize { Quantity::SummingNorm } else { Quantity::RawMoment },
        value: raw / normalization,
        uncertainty: raw_half / normalization,
        uncertainty_kind: if heavy { UncertaintyKind::HeavyTailBlockSpread } else { UncertaintyKind::Variance },
        n_samples: mc.n_samples,
        blocks: mc.blocks,
        seed: mc.seed,
        field: mc.field,
        aggregator: mc.aggregator,
        regime,
        p,
        r,
        q: op.codomain().exponent(),
        arity: op.arity(),
        dim: op.dim(),
        stability_index: law.index(),
        normalization,
    };
    Ok(MomentRun { estimate, block_means: blocks.means.into_iter().next().unwrap_or_default() })
}

/// `(∫ ‖T(z¹,…,zᵐ)‖^p dμ_{r'}(z¹)⋯dμ_{r'}(zᵐ))^{1/p}` from block means.
/// `r` is the domain exponent used for sampling and classification.
pub fn integral_moment(op: &MultilinearOperator, p: f64, r: f64, mc: &MonteCarlo) -> Result<NormEstimate> {
    Ok(build_run(op, p, r, mc, false)?.estimate)
}

/// The integral moment divided by `c_{r',p}^m`. Refuses parameter sets
/// with no integral formula.
pub fn estimate_pi(op: &MultilinearOperator, p: f64, r: f64, mc: &MonteCarlo) -> Result<NormEstimate> {
    Ok(build_run(op, p, r, mc, true)?.estimate)
}

/// [`estimate_pi`] keeping the block means.
pub fn estimate_pi_run(op: &MultilinearOperator, p: f64, r: f64, mc: &MonteCarlo) -> Result<MomentRun> {
    build_run(op, p, r, mc, true)
}

/// `c_{s,p}^{-m} (∫ ‖T‖^p dμ_s^m)^{1/p}` for several `p` from one sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMoment {
    pub p: f64,
    pub value: f64,
    pub uncertainty: f64,
}

/// Normalized moments of `‖T(z)‖` under an arbitrary stable law, all
/// exponents evaluated on the same draws.
pub fn normalized_moments(
    op: &MultilinearOperator,
    law: &StableLaw,
    exponents: &[f64],
    mc: &MonteCarlo,
) -> Result<Vec<NormalizedMoment>> {
    if law.field() != mc.field {
        return Err(Error::Field("law and sampling plan disagree on the field".into()));
    }
    let mut constants = Vec::with_capacity(exponents.len());
    for &p in exponents {
        constants.push(law.moment_constant(p)?.powi(op.arity() as i32));
    }
    let blocks = sample_blocks(op, law, exponents, mc)?;
    Ok(exponents
        .iter()
        .enumerate()
        .map(|(e, &p)| {
            let (center, half) = summarize(&blocks, e, is_heavy(law, p), mc.aggregator);
            let (v, h) = root_with_uncertainty(center, half, p);
            NormalizedMoment { p, value: v / constants[e], uncertainty: h / constants[e] }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilinear::{hilbert_schmidt_norm, make_phi, Codomain, Coefficients};
    use crate::stable::constant_c;
    use crate::scalar::lq_norm;

    fn linear(alpha: Vec<f64>, r: f64) -> MultilinearOperator {
        let n = alpha.len();
        MultilinearOperator::dense(1, n, r, Codomain::Scalar, Coefficients::Real(alpha)).unwrap()
    }

    fn within(est: &NormEstimate, target: f64, k: f64) -> bool {
        (est.value - target).abs() <= k * est.uncertainty
    }

    #[test]
    fn single_coordinate_complex_gaussian() {
        let mut alpha = vec![0.0; 5];
        alpha[0] = 1.0;
        let op = linear(alpha, 2.0);
        let mc = MonteCarlo::new(200_000, 64, 3).with_field(Field::Complex);
        let est = estimate_pi(&op, 2.0, 2.0, &mc).unwrap();
        assert!(within(&est, 1.0, 3.0), "{est:?}");
        let raw = integral_moment(&op, 2.0, 2.0, &mc).unwrap();
        assert!(within(&raw, 1.0, 3.0), "{raw:?}");
        assert_eq!(raw.quantity, Quantity::RawMoment);
    }

    #[test]
    fn linear_form_in_stable_domain() {
        let op = linear(vec![1.0, 1.0, 0.0, 0.0], 3.0);
        let est = estimate_pi(&op, 1.0, 3.0, &MonteCarlo::new(400_000, 64, 11)).unwrap();
        let target = 2f64.powf(2.0 / 3.0);
        assert_eq!(est.uncertainty_kind, UncertaintyKind::HeavyTailBlockSpread);
        let med = estimate_pi(&op, 1.0, 3.0, &MonteCarlo::new(400_000, 64, 11).with_aggregator(Aggregator::Median))
            .unwrap();
        assert!(within(&med, target, 3.0), "{med:?}");
        assert!(within(&est, target, 3.0), "{} vs {target} ± {}", est.value, est.uncertainty);
        assert!((est.value - target).abs() / target < 0.03);
    }

    #[test]
    fn phi_into_l1_with_p_equal_q() {
        let op = make_phi(1, 16, 1.0).unwrap();
        let est = estimate_pi(&op, 1.0, 2.0, &MonteCarlo::new(100_000, 64, 5)).unwrap();
        assert_eq!(est.regime.kind, RegimeKind::Exact);
        assert!(within(&est, 16.0, 3.0), "{est:?}");
    }

    #[test]
    fn bilinear_p2_matches_hilbert_schmidt() {
        let op = crate::multilinear::random_dense_operator(2, 4, 2.0, Codomain::Scalar, false, 8).unwrap();
        let hs = hilbert_schmidt_norm(&op).unwrap();
        let est = estimate_pi(&op, 2.0, 2.0, &MonteCarlo::new(200_000, 64, 1)).unwrap();
        assert!(within(&est, hs, 3.0), "{} vs {hs} ± {}", est.value, est.uncertainty);
    }

    #[test]
    fn raw_moment_of_phi() {
        // raw moment of Φ_N into ℓ_p^N is c^m N^{1/p}
        let op = make_phi(2, 8, 1.0).unwrap();
        let raw = integral_moment(&op, 1.0, 2.0, &MonteCarlo::new(100_000, 32, 9)).unwrap();
        let c = constant_c(2.0, 1.0, Field::Real).unwrap().value;
        assert!(within(&raw, c * c * 8.0, 3.0), "{raw:?}");
    }

    #[test]
    fn homogeneity_is_exact_under_common_draws() {
        let op = crate::multilinear::random_dense_operator(2, 3, 2.0, Codomain::sequence(1.5, 3).unwrap(), false, 2)
            .unwrap();
        let mc = MonteCarlo::new(20_000, 16, 4);
        let base = estimate_pi(&op, 1.0, 2.0, &mc).unwrap();
        for lambda in [0.5, 2.0, -3.0] {
            let scaled = estimate_pi(&op.scaled(lambda), 1.0, 2.0, &mc).unwrap();
            let expect = lambda.abs() * base.value;
            assert!((scaled.value - expect).abs() <= 1e-9 * expect, "{lambda}");
        }
    }

    #[test]
    fn law_scale_cancels() {
        for (field, r, p) in [(Field::Real, 2.0, 1.0), (Field::Real, 3.0, 1.0), (Field::Complex, 2.5, 1.2)] {
            let op = crate::multilinear::random_dense_operator(2, 3, r, Codomain::sequence(1.5, 2).unwrap(), false, 6)
                .unwrap();
            let mc = MonteCarlo::new(20_000, 16, 5).with_field(field);
            let base = estimate_pi(&op, p, r, &mc).unwrap();
            let scaled = estimate_pi(&op, p, r, &mc.with_law_scale(2.0)).unwrap();
            assert!((scaled.value - base.value).abs() <= 1e-12 * base.value, "{field:?}");
            assert!((scaled.uncertainty - base.uncertainty).abs() <= 1e-10 * base.uncertainty);
            let raw = integral_moment(&op, p, r, &mc).unwrap().value;
            let raw2 = integral_moment(&op, p, r, &mc.with_law_scale(2.0)).unwrap().value;
            assert!((raw2 - 4.0 * raw).abs() <= 1e-12 * raw2);
        }
        assert!(estimate_pi(&make_phi(1, 2, 1.0).unwrap(), 1.0, 2.0, &MonteCarlo::new(100, 4, 0).with_law_scale(0.0)).is_err());
    }

    #[test]
    fn deterministic_across_executors() {
        let op = make_phi(2, 6, 1.5).unwrap();
        let mc = MonteCarlo::new(30_000, 16, 77);
        let a = estimate_pi(&op, 1.0, 2.0, &mc.with_executor(Executor::Sequential)).unwrap();
        let b = estimate_pi(&op, 1.0, 2.0, &mc.with_executor(Executor::Parallel)).unwrap();
        let c = crate::exec::with_threads(Some(3), || estimate_pi(&op, 1.0, 2.0, &mc).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn errors() {
        let op = linear(vec![1.0, 2.0], 3.0);
        let mc = MonteCarlo::new(1000, 10, 0);
        assert!(matches!(estimate_pi(&op, 1.6, 3.0, &mc), Err(Error::Domain(_))));
        assert!(matches!(estimate_pi(&op, 1.0, 1.5, &mc), Err(Error::Domain(_))));
        assert!(matches!(estimate_pi(&op, 1.0, 2.0, &MonteCarlo::new(5, 10, 0)), Err(Error::Parameter(_))));
        // r = 4, q = 3: lower bound only, still estimable; r' ≤ p never is
        let phi = make_phi(1, 3, 3.0).unwrap();
        let est = estimate_pi(&phi, 1.0, 4.0, &mc).unwrap();
        assert_eq!(est.regime.kind, RegimeKind::LowerBoundOnly);
        let complex = MultilinearOperator::dense(
            1,
            1,
            2.0,
            Codomain::Scalar,
            Coefficients::Complex(vec![Complex64::new(0.0, 1.0)]),
        )
        .unwrap();
        assert!(matches!(estimate_pi(&complex, 1.0, 2.0, &mc), Err(Error::Field(_))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let op = make_phi(1, 4, 2.0).unwrap();
        let est = estimate_pi(&op, 1.0, 2.0, &MonteCarlo::new(5000, 8, 1)).unwrap();
        let back = NormEstimate::from_json(&est.to_json()).unwrap();
        assert_eq!(est, back);
        assert_eq!(est.value.to_bits(), back.value.to_bits());
    }

    #[test]
    fn normalized_moments_share_draws() {
        let op = linear(vec![0.3, -1.0, 0.5], 2.0);
        let law = StableLaw::new(1.5, Field::Real).unwrap();
        let mom = normalized_moments(&op, &law, &[0.5, 1.0], &MonteCarlo::new(200_000, 64, 2)).unwrap();
        // linear images scale by the ℓ_s norm of the coefficients
        let target = lq_norm(&[0.3, -1.0, 0.5], 1.5);
        for m in &mom {
            assert!((m.value - target).abs() <= 3.0 * m.uncertainty + 0.01 * target, "{m:?}");
        }
    }
}
