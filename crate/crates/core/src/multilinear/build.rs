use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::{Codomain, Coefficients, MultilinearOperator, Representation};
use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// `Φ_N(x¹,…,xᵐ) = Σ_j x¹_j⋯xᵐ_j e_j` from `ℓ_2^N` into `ℓ_q^N`.
pub fn make_phi(m: usize, n: usize, q: f64) -> Result<MultilinearOperator> {
    MultilinearOperator::diagonal(m, n, 2.0, q, Coefficients::Real(vec![1.0; m * n]))
}

/// `(x¹,…,xᵐ) ↦ T(σ¹·x¹, …, σᵐ·xᵐ)` with coordinatewise products.
pub fn compose_diagonal(op: &MultilinearOperator, sigma: &[Vec<f64>]) -> Result<MultilinearOperator> {
    let (m, n) = (op.arity(), op.dim());
    if sigma.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: sigma.len() });
    }
    for row in sigma {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
    }
    match op.representation() {
        Representation::Diagonal(w) => {
            let w = match w {
                Coefficients::Real(w) => {
                    Coefficients::Real(w.iter().enumerate().map(|(i, x)| x * sigma[i / n][i % n]).collect())
                }
                Coefficients::Complex(w) => {
                    Coefficients::Complex(w.iter().enumerate().map(|(i, x)| x * sigma[i / n][i % n]).collect())
                }
            };
            let q = op.codomain().exponent().unwrap_or(2.0);
            MultilinearOperator::diagonal(m, n, op.domain_exponent(), q, w)
        }
        Representation::Dense(c) => {
            let mdim = op.codomain().dim();
            let tuples = n.pow(m as u32);
            let weight: Vec<f64> = (0..tuples)
                .map(|t| {
                    let mut rem = t;
                    let mut prod = 1.0;
                    for k in (0..m).rev() {
                        prod *= sigma[k][rem % n];
                        rem /= n;
                    }
                    prod
                })
                .collect();
            let c = match c {
                Coefficients::Real(a) => {
                    Coefficients::Real(a.iter().enumerate().map(|(i, x)| x * weight[i / mdim]).collect())
                }
                Coefficients::Complex(a) => {
                    Coefficients::Complex(a.iter().enumerate().map(|(i, x)| x * weight[i / mdim]).collect())
                }
            };
            MultilinearOperator::dense(m, n, op.domain_exponent(), op.codomain(), c)
        }
    }
}

/// i.i.d. `±1` entries of an `(m+1)`-tensor, reproducible from `seed`.
pub fn sign_tensor(m: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    let len = super::operator::checked_power(n, m + 1)?;
    if len > super::operator::MAX_DENSE_ENTRIES {
        return Err(Error::TooLarge { entries: len, limit: super::operator::MAX_DENSE_ENTRIES });
    }
    let mut rng = rng::stream_rng(seed, rng::substream(tag::OPERATOR, 1));
    Ok((0..len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
}

/// `T_N = i_{2q} ∘ T̃_N`: a random `±1` `(m+1)`-tensor read as an m-linear
/// map `ℓ_2^N × ⋯ → ℓ_q^N`.
pub fn random_sign_operator(m: usize, n: usize, q: f64, seed: u64) -> Result<MultilinearOperator> {
    let signs = sign_tensor(m, n, seed)?;
    MultilinearOperator::dense(m, n, 2.0, Codomain::sequence(q, n)?, Coefficients::Real(signs))
}

/// Dense operator with i.i.d. standard Gaussian coefficients (complex
/// coefficients use the circular Gaussian with unit variance).
pub fn random_dense_operator(
    m: usize,
    n: usize,
    r: f64,
    codomain: Codomain,
    complex: bool,
    seed: u64,
) -> Result<MultilinearOperator> {
    let len = super::operator::checked_power(n, m)?.saturating_mul(codomain.dim() as u128);
    if len > super::operator::MAX_DENSE_ENTRIES {
        return Err(Error::TooLarge { entries: len, limit: super::operator::MAX_DENSE_ENTRIES });
    }
    let mut rng = rng::stream_rng(seed, rng::substream(tag::OPERATOR, 2));
    let coeffs = if complex {
        Coefficients::Complex(
            (0..len)
                .map(|_| {
                    let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect(),
        )
    } else {
        Coefficients::Real((0..len).map(|_| rng.sample(StandardNormal)).collect())
    };
    MultilinearOperator::dense(m, n, r, codomain, coeffs)
}
