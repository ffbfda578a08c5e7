use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::{random_sign_operator, sup_norm_with, MultilinearOperator, SupNormOptions};
use crate::scalar::Field;
use crate::stable::{constant_c, ln_gamma};
use crate::summing::{estimate_pi, MonteCarlo, NormEstimate};

/// `E‖g‖_2^p` for a standard Gaussian vector of `ℓ_2^N` (real: `N(0, I)`;
/// complex: density `π^{-N} e^{-|z|²}`).
pub fn gaussian_radial_moment(n: usize, p: f64, field: Field) -> Result<f64> {
    if n == 0 || !(p > 0.0) {
        return Err(Error::param("need N ≥ 1 and p > 0"));
    }
    let nf = n as f64;
    let log = match field {
        Field::Complex => ln_gamma(nf + p / 2.0)? - ln_gamma(nf)?,
        Field::Real => 0.5 * p * std::f64::consts::LN_2 + ln_gamma((nf + p) / 2.0)? - ln_gamma(nf / 2.0)?,
    };
    Ok(log.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaBoundReport {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub field: Field,
    /// `(E‖g‖^p)^{m/p}`; over the complex field `(Γ(N+p/2)/Γ(N))^{m/p}`.
    pub radial_factor: f64,
    /// `c_{2,p}^{-m}`.
    pub normalization: f64,
    pub sup_norm: f64,
    pub bound: f64,
    pub estimate: NormEstimate,
    pub slack: f64,
    /// `estimate / bound`.
    pub ratio: f64,
    pub pass: bool,
}

/// Checks `π̂_p(T) ≤ c_{2,p}^{-m} (E‖g‖^p)^{m/p} ‖T‖`, i.e. the integral
/// formula with each Gaussian vector split into radius and direction,
/// allowing three uncertainties of slack. Domain must be `ℓ_2`.
pub fn gamma_ratio_bound(
    op: &MultilinearOperator,
    p: f64,
    mc: &MonteCarlo,
    sup: &SupNormOptions,
) -> Result<GammaBoundReport> {
    if op.domain_exponent() != 2.0 {
        return Err(Error::domain(format!(
            "the Γ-ratio bound is stated on ℓ_2 domains, got r = {}",
            op.domain_exponent()
        )));
    }
    let (n, m) = (op.dim(), op.arity());
    let estimate = estimate_pi(op, p, 2.0, mc)?;
    let sup_norm = sup_norm_with(op, mc.field, sup, mc.exec)?.value;
    let radial_factor = gaussian_radial_moment(n, p, mc.field)?.powf(m as f64 / p);
    let normalization = constant_c(2.0, p, mc.field)?.value.powi(-(m as i32));
    let bound = normalization * radial_factor * sup_norm;
    let slack = 1.0 + 3.0 * estimate.relative_uncertainty();
    let ratio = if bound > 0.0 { estimate.value / bound } else { 0.0 };
    let pass = estimate.value <= bound * slack;
    Ok(GammaBoundReport { n, m, p, field: mc.field, radial_factor, normalization, sup_norm, bound, estimate, slack, ratio, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub m: usize,
    pub n: usize,
    pub q: f64,
    pub p: f64,
    pub seed: u64,
    /// `(Σ ‖T_N(e_{j₁},…,e_{j_m})‖_q^p)^{1/p}`.
    pub basis_sum: f64,
    pub sup_norm: f64,
    /// `basis_sum / (N^{m/p} ‖T_N‖)`.
    pub ratio: f64,
}

/// Evaluates the basis-sum inequality on `T_N = i_{2q} ∘ T̃_N`, `T̃_N` a random
/// `±1` tensor. A ratio bounded away from zero uniformly in `N` shows the
/// `N^{m/p}` growth cannot be improved.
pub fn optimality_witness(m: usize, n: usize, q: f64, p: f64, seed: u64, sup: &SupNormOptions) -> Result<OptimalityReport> {
    if !(p > 0.0) {
        return Err(Error::param(format!("summing exponent must be positive, got {p}")));
    }
    let op = random_sign_operator(m, n, q, seed)?;
    let tuples = n.pow(m as u32);
    let codomain = op.codomain();
    let mut sum = 0.0;
    for t in 0..tuples {
        sum += codomain.norm(&op.basis_image::<f64>(t)?).powf(p);
    }
    let basis_sum = sum.powf(1.0 / p);
    let sup_norm = sup_norm_with(&op, Field::Real, &SupNormOptions { seed, ..*sup }, Default::default())?.value;
    let ratio = basis_sum / ((n as f64).powf(m as f64 / p) * sup_norm);
    Ok(OptimalityReport { m, n, q, p, seed, basis_sum, sup_norm, ratio })
}
