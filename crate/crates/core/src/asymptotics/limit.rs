use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::{compose_diagonal, make_phi};
use crate::rng::{self, tag};
use crate::scalar::conjugate_exponent;
use crate::stats::{quantile, weighted_line_fit};
use crate::summing::{estimate_pi_run, MomentRun, MonteCarlo, RegimeKind};

/// Which closed form governs `λ_m(Π_1, r, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitRegion {
    /// `q ≤ r' ≤ 2`: `1/q`.
    CodomainDominated,
    /// `r' ≤ q ≤ 2`: `1/r'`.
    DomainDominated,
    /// `2mq/(2+mq) < r ≤ 2`, `q ≤ 2`: `1/q + m/2 − m/r`.
    Interpolating,
    /// `1 ≤ r ≤ 2mq/(2+mq)`: `0`.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitOrderQuery {
    pub m: usize,
    #[serde(with = "crate::serde_exponent")]
    pub r: f64,
    pub q: f64,
    pub p: f64,
}

impl LimitOrderQuery {
    pub fn new(m: usize, r: f64, q: f64) -> Self {
        LimitOrderQuery { m, r, q, p: 1.0 }
    }
}

/// Region of `(m, r, q)` and its limit order. The regions share their
/// boundaries, where the formulas agree; the first match in the order
/// listed in [`LimitRegion`] is reported.
pub fn limit_region(m: usize, r: f64, q: f64) -> Result<(LimitRegion, f64)> {
    if m == 0 || !(r >= 1.0) || !(q >= 1.0) {
        return Err(Error::param(format!("need m ≥ 1, r ≥ 1, q ≥ 1 (got m={m}, r={r}, q={q})")));
    }
    let rc = conjugate_exponent(r);
    let mf = m as f64;
    let threshold = 2.0 * mf * q / (2.0 + mf * q);
    if q <= rc && rc <= 2.0 {
        Ok((LimitRegion::CodomainDominated, 1.0 / q))
    } else if rc <= q && q <= 2.0 {
        Ok((LimitRegion::DomainDominated, 1.0 / rc))
    } else if threshold < r && r <= 2.0 && q <= 2.0 {
        Ok((LimitRegion::Interpolating, 1.0 / q + mf / 2.0 - mf / r))
    } else if r <= threshold && q <= 2.0 {
        Ok((LimitRegion::Bounded, 0.0))
    } else {
        Err(Error::domain(format!("(m, r, q) = ({m}, {r}, {q}) lies outside every limit-order region")))
    }
}

/// `λ_m(Π_1, r, q)`.
pub fn lambda_formula(m: usize, r: f64, q: f64) -> Result<f64> {
    Ok(limit_region(m, r, q)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub estimate: f64,
    pub uncertainty: f64,
    pub seed: u64,
    /// For `r < 2`: support size of the flat diagonal attaining the
    /// maximum.
    pub support: Option<usize>,
    pub regime: RegimeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub query: LimitOrderQuery,
    pub region: LimitRegion,
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: (f64, f64),
    pub predicted: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SlopeFit {
    /// One row per dimension, plot-ready.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("n,estimate,uncertainty,seed,support\n");
        for p in &self.points {
            let support = p.support.map(|k| k.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{:.16e},{:.16e},{},{}\n", p.n, p.estimate, p.uncertainty, p.seed, support));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub bootstrap: usize,
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { bootstrap: 200, tolerance: 0.1 }
    }
}

/// Support sizes `1, 2, 4, …` up to and including `n`.
fn supports(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k < n).collect();
    out.push(n);
    out
}

/// `π̂_p(Φ_N)` for one dimension. For `r ≥ 2` the operator is estimated
/// directly. For `r < 2` the norm is the supremum of `π_p(Φ_N ∘ D_σ)` over
/// diagonals with `‖σ‖_t ≤ 1`, `1/t = 1/r − 1/2`, each composition acting
/// on `ℓ_2^N`; the supremum is taken over flat `σ` supported on `k`
/// coordinates, and only those coordinates are sampled.
fn sweep_point(query: &LimitOrderQuery, n: usize, mc: &MonteCarlo) -> Result<(SweepPoint, MomentRun)> {
    let (m, r, q, p) = (query.m, query.r, query.q, query.p);
    if r >= 2.0 {
        let op = make_phi(m, n, q)?.with_domain_exponent(r)?;
        let run = estimate_pi_run(&op, p, r, mc)?;
        let e = &run.estimate;
        let point =
            SweepPoint { n, estimate: e.value, uncertainty: e.uncertainty, seed: mc.seed, support: None, regime: e.regime.kind };
        return Ok((point, run));
    }
    let inv_t = 1.0 / r - 0.5;
    let mut best: Option<(usize, MomentRun)> = None;
    for k in supports(n) {
        let level = (k as f64).powf(-inv_t);
        let op = compose_diagonal(&make_phi(m, k, q)?, &vec![vec![level; k]; m])?;
        let run = estimate_pi_run(&op, p, 2.0, &mc.with_seed(rng::substream(mc.seed, k as u64)))?;
        if best.as_ref().is_none_or(|(_, b)| run.estimate.value > b.estimate.value) {
            best = Some((k, run));
        }
    }
    let (k, run) = best.expect("at least one support size");
    let e = &run.estimate;
    let point = SweepPoint {
        n,
        estimate: e.value,
        uncertainty: e.uncertainty,
        seed: e.seed,
        support: Some(k),
        regime: e.regime.kind,
    };
    Ok((point, run))
}

fn weights(runs: &[MomentRun]) -> Vec<f64> {
    runs.iter().map(|r| 1.0 / r.estimate.relative_uncertainty().max(1e-6).powi(2)).collect()
}

/// Estimates `π̂_p(Φ_N)` over `n_list` and fits the growth exponent on
/// log–log axes (weights `1/rel-uncertainty²`), with a percentile
/// bootstrap interval from resampled block means.
pub fn limit_order_fit(query: &LimitOrderQuery, n_list: &[usize], mc: &MonteCarlo, opts: &FitOptions) -> Result<SlopeFit> {
    let (region, predicted) = limit_region(query.m, query.r, query.q)?;
    if n_list.len() < 4 {
        return Err(Error::param("a slope fit needs at least four dimensions"));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("dimensions must be positive and strictly increasing"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    let mut runs = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let (point, run) = sweep_point(query, n, &mc.with_seed(rng::substream(mc.seed, n as u64)))?;
        if point.regime == RegimeKind::Unknown {
            return Err(Error::Refused(format!("no integral formula at N = {n}")));
        }
        points.push(point);
        runs.push(run);
    }
    let x: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.estimate.max(f64::MIN_POSITIVE).ln()).collect();
    let w = weights(&runs);
    let (intercept, slope) = weighted_line_fit(&x, &y, &w);

    let mut rng = rng::stream_rng(mc.seed, tag::BOOTSTRAP);
    let mut slopes = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let yb: Vec<f64> = runs
            .iter()
            .map(|run| {
                let k = run.block_means.len();
                let resampled: Vec<f64> = (0..k).map(|_| run.block_means[rng.random_range(0..k)]).collect();
                run.value_from_blocks(&resampled).max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        slopes.push(weighted_line_fit(&x, &yb, &w).1);
    }
    let slope_ci = if slopes.is_empty() {
        (slope, slope)
    } else {
        (quantile(&slopes, 0.025).min(slope), quantile(&slopes, 0.975).max(slope))
    };
    let pass = match region {
        LimitRegion::Bounded => slope <= predicted + opts.tolerance,
        _ => (slope - predicted).abs() <= opts.tolerance,
    };
    Ok(SlopeFit { query: *query, region, points, slope, intercept, slope_ci, predicted, tolerance: opts.tolerance, pass })
}
