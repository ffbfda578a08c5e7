use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate_pi, integral_moment, normalized_moments, MonteCarlo, NormEstimate, NormalizedMoment};
use super::regime::RegimeKind;
use super::weak::{weak_p_norm, WeakNormOptions};
use crate::error::{Error, Result};
use crate::multilinear::{Kernel, MultilinearOperator};
use crate::rng::{self, tag};
use crate::scalar::lq_norm;
use crate::stable::{constant_c, StableLaw};

/// Vector-valued test functions `f_j` fed to the domination inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunctions {
    /// `f_j ≡ x_j` with `x_j` a random unit vector of `ℓ_r^N`.
    ConstantUnit { trials: usize },
    /// Simple functions taking two random values with random weights.
    TwoPoint { trials: usize },
    /// `f_j(w) = w` on `(ℝ^N, μ_{r'})`; the left side is the raw integral
    /// moment from an independent seed.
    StableIdentity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub source: TestFunctions,
    pub pi: NormEstimate,
    pub trials: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
    /// Smallest `rhs + tolerance − lhs`.
    pub margin: f64,
    pub violations: usize,
    pub pass: bool,
    /// All weak norms on the right side were exact.
    pub certified: bool,
}

fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn norm_at(kernel: &mut Kernel<'_, Complex64>, z: &[&Vec<f64>]) -> f64 {
    let zc: Vec<Vec<Complex64>> = z.iter().map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
    let parts: Vec<&[Complex64]> = zc.iter().map(|v| v.as_slice()).collect();
    kernel.eval_norm(&parts)
}

/// Checks `(∫ ‖T(f¹,…,fᵐ)‖^p)^{1/p} ≤ π_p(T) · Π_j sup_{‖x*‖ ≤ 1} (∫ |x*∘f_j|^p)^{1/p}`
/// with `π_p` taken from [`estimate_pi`]; each side is allowed three
/// uncertainties of slack. Requires an exact regime.
pub fn pietsch_domination_check(
    op: &MultilinearOperator,
    p: f64,
    r: f64,
    source: TestFunctions,
    mc: &MonteCarlo,
) -> Result<DominationReport> {
    let pi = estimate_pi(op, p, r, mc)?;
    if pi.regime.kind != RegimeKind::Exact {
        return Err(Error::Refused(format!(
            "domination needs the exact value of π_p; regime is {}",
            pi.regime
        )));
    }
    let n = op.dim();
    let m = op.arity();
    let slack = 1.0 + 3.0 * pi.relative_uncertainty();
    let mut kernel = Kernel::<Complex64>::new(op)?;
    let mut report = DominationReport {
        source,
        pi: pi.clone(),
        trials: 0,
        worst_ratio: 0.0,
        margin: f64::INFINITY,
        violations: 0,
        pass: true,
        certified: true,
    };
    let mut record = |lhs: f64, rhs: f64, tolerance: f64| {
        report.trials += 1;
        if rhs > 0.0 {
            report.worst_ratio = report.worst_ratio.max(lhs / rhs);
        }
        let margin = rhs + tolerance - lhs;
        report.margin = report.margin.min(margin);
        if margin < 0.0 {
            report.violations += 1;
        }
    };
    match source {
        TestFunctions::ConstantUnit { trials } => {
            for t in 0..trials {
                let mut rng = rng::stream_rng(mc.seed, rng::substream(tag::DOMINATION, t as u64));
                let xs: Vec<Vec<f64>> = (0..m)
                    .map(|_| {
                        let v = random_vector(&mut rng, n);
                        let norm = lq_norm(&v, r);
                        v.into_iter().map(|x| x / norm).collect()
                    })
                    .collect();
                let refs: Vec<&Vec<f64>> = xs.iter().collect();
                let lhs = norm_at(&mut kernel, &refs);
                record(lhs, pi.value, pi.value * (slack - 1.0));
            }
        }
        TestFunctions::TwoPoint { trials } => {
            let mut certified = true;
            for t in 0..trials {
                let mut rng = rng::stream_rng(mc.seed, rng::substream(tag::DOMINATION, t as u64));
                let mut atoms = Vec::with_capacity(m);
                let mut weights = Vec::with_capacity(m);
                let mut factor = 1.0;
                for k in 0..m {
                    let pair = [random_vector(&mut rng, n), random_vector(&mut rng, n)];
                    let w: f64 = rng.random_range(0.05..0.95);
                    let w = [w, 1.0 - w];
                    let scaled: Vec<Vec<f64>> = pair
                        .iter()
                        .zip(&w)
                        .map(|(v, wi)| v.iter().map(|x| x * wi.powf(1.0 / p)).collect())
                        .collect();
                    let opts = WeakNormOptions { seed: rng::substream(mc.seed, (t * m + k) as u64), ..Default::default() };
                    let weak = weak_p_norm(&scaled, p, r, &opts)?;
                    certified &= weak.exact;
                    factor *= weak.value;
                    atoms.push(pair);
                    weights.push(w);
                }
                let mut sum = 0.0;
                for choice in 0..(1usize << m) {
                    let mut weight = 1.0;
                    let z: Vec<&Vec<f64>> = (0..m)
                        .map(|k| {
                            let a = (choice >> k) & 1;
                            weight *= weights[k][a];
                            &atoms[k][a]
                        })
                        .collect();
                    sum += weight * norm_at(&mut kernel, &z).powf(p);
                }
                let rhs = pi.value * factor;
                record(sum.powf(1.0 / p), rhs, rhs * (slack - 1.0));
            }
            report.certified = certified;
        }
        TestFunctions::StableIdentity => {
            let independent = mc.with_seed(rng::substream(mc.seed, tag::DOMINATION));
            let lhs = integral_moment(op, p, r, &independent)?;
            let c = pi.normalization;
            let rhs = pi.value * c;
            let tolerance = 3.0 * (lhs.uncertainty.powi(2) + (pi.uncertainty * c).powi(2)).sqrt();
            record(lhs.value, rhs, tolerance);
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

/// Normalized moments at two exponents `q ≤ p` under the same draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub s: f64,
    /// `c_{s,p}^{-m} (∫|T|^p)^{1/p}`.
    pub upper_exponent: NormalizedMoment,
    /// `c_{s,q}^{-m} (∫|T|^q)^{1/q}`.
    pub lower_exponent: NormalizedMoment,
    /// `upper ≤ lower` within three combined uncertainties.
    pub holds: bool,
}

/// For scalar forms: `c_{s,p}^{-m}‖T‖_{L_p(μ_s)} ≤ c_{s,q}^{-m}‖T‖_{L_q(μ_s)}`
/// whenever `q ≤ p < s ≤ 2`, or `s = 2` and `q ≤ p`.
pub fn moment_monotonicity(op: &MultilinearOperator, s: f64, q: f64, p: f64, mc: &MonteCarlo) -> Result<MonotonicityReport> {
    if op.codomain().exponent().is_some() {
        return Err(Error::param("moment monotonicity applies to scalar forms"));
    }
    let admissible = q > 0.0 && q <= p && (p < s && s <= 2.0 || s == 2.0);
    if !admissible {
        return Err(Error::domain(format!("need 0 < q ≤ p < s ≤ 2 or s = 2 (got s={s}, q={q}, p={p})")));
    }
    // reject non-integrable exponents early with the constant's message
    constant_c(s, p, mc.field)?;
    let law = StableLaw::new(s, mc.field)?;
    let moments = normalized_moments(op, &law, &[p, q], mc)?;
    let (upper, lower) = (moments[0].clone(), moments[1].clone());
    let tol = 3.0 * (upper.uncertainty.powi(2) + lower.uncertainty.powi(2)).sqrt();
    Ok(MonotonicityReport { s, holds: upper.value <= lower.value + tol, upper_exponent: upper, lower_exponent: lower })
}
