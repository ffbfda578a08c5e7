use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::operator::{CoeffScalar, Codomain, Coefficients, MultilinearOperator, Representation};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::rng::{self, tag};
use crate::scalar::{conjugate_exponent, holder_extremal, lq_norm, Field, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SupNormOptions {
    fn default() -> Self {
        SupNormOptions { restarts: 32, tol: 1e-10, max_iter: 500, seed: 0 }
    }
}

/// A certified lower estimate of `‖T‖ = sup ‖T(x¹,…,xᵐ)‖` over unit-ball
/// inputs, with the maximizing inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNormEstimate {
    pub value: f64,
    /// Every restart stagnated below `tol` before the iteration cap.
    pub converged: bool,
    pub restart: usize,
    pub argmax: Vec<Vec<Complex64>>,
}

/// `Σ_j c_j x_j`
#[inline]
fn dot<S: Scalar>(c: &[S], x: &[S]) -> S {
    let mut acc = S::zero();
    for (a, b) in c.iter().zip(x) {
        acc += *a * *b;
    }
    acc
}

/// Scalar tensor `Σ_i w_i a[·, i]` of a dense operator (length `N^m`).
fn contract_codomain<S: Scalar>(coeffs: &[S], mdim: usize, w: &[S]) -> Vec<S> {
    coeffs.chunks_exact(mdim).map(|row| dot(row, w)).collect()
}

/// Functional `c` with `c_j = ⟨w, T(x¹,…,e_j,…,xᵐ)⟩` (slot `k` open).
pub(crate) fn open_slot<S: CoeffScalar>(op: &MultilinearOperator, coeffs: &[S], w: &[S], x: &[Vec<S>], k: usize) -> Vec<S> {
    let n = op.dim();
    let m = op.arity();
    match op.representation() {
        Representation::Diagonal(_) => (0..n)
            .map(|j| {
                let mut v = w[j];
                for l in 0..m {
                    v = v * coeffs[l * n + j];
                    if l != k {
                        v = v * x[l][j];
                    }
                }
                v
            })
            .collect(),
        Representation::Dense(_) => {
            let mut t = contract_codomain(coeffs, op.codomain().dim(), w);
            // contract slots from the fastest down, leaving slot k; the open
            // index sits below slot l exactly when l < k
            for l in (0..m).rev() {
                if l != k {
                    let inner = if l < k { n } else { 1 };
                    t = contract_middle(&t, &x[l], n, inner);
                }
            }
            t
        }
    }
}

/// Contracts the index of size `n` that has `inner` entries below it.
fn contract_middle<S: Scalar>(t: &[S], x: &[S], n: usize, inner: usize) -> Vec<S> {
    let outer = t.len() / (n * inner);
    let mut out = vec![S::zero(); outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (j, &xj) in x.iter().enumerate() {
            let src = &t[(o * n + j) * inner..(o * n + j + 1) * inner];
            for (d, &a) in dst.iter_mut().zip(src) {
                *d += xj * a;
            }
        }
    }
    out
}

fn random_unit<S: SupScalar, R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<S> {
    let v: Vec<S> = (0..n).map(|_| S::gaussian(rng)).collect();
    let norm = lq_norm(&v, r);
    v.into_iter().map(|x| x.scale(1.0 / norm)).collect()
}

pub trait SupScalar: CoeffScalar {
    fn gaussian<R: Rng>(rng: &mut R) -> Self;
    fn to_complex(self) -> Complex64;
}

impl SupScalar for f64 {
    fn gaussian<R: Rng>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl SupScalar for Complex64 {
    fn gaussian<R: Rng>(rng: &mut R) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

struct Run<S> {
    value: f64,
    converged: bool,
    x: Vec<Vec<S>>,
}

fn alternating<S: SupScalar>(op: &MultilinearOperator, coeffs: &[S], opts: &SupNormOptions, restart: usize) -> Run<S> {
    let n = op.dim();
    let m = op.arity();
    let r = op.domain_exponent();
    let codomain = op.codomain();
    let mut rng = rng::stream_rng(opts.seed, rng::substream(tag::SUP_NORM, restart as u64));
    let mut x: Vec<Vec<S>> = (0..m).map(|_| random_unit(&mut rng, n, r)).collect();
    let mut kernel = super::operator::Kernel::<S>::new(op).expect("field checked by caller");
    let mut eval = |x: &[Vec<S>]| -> Vec<S> {
        let refs: Vec<&[S]> = x.iter().map(|v| v.as_slice()).collect();
        kernel.eval_unchecked(&refs).to_vec()
    };
    let mut y = eval(&x);
    let mut value = codomain.norm(&y);
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let w: Vec<S> = match codomain {
            Codomain::Scalar => vec![y[0].align_phase()],
            Codomain::Sequence { q, .. } => {
                let w = holder_extremal(&y, conjugate_exponent(q));
                if w.iter().all(|v| v.modulus() == 0.0) {
                    // restart from a coordinate functional when T(x) = 0
                    let mut e = vec![S::zero(); y.len()];
                    e[0] = S::one();
                    e
                } else {
                    w
                }
            }
        };
        for k in 0..m {
            let c = open_slot(op, coeffs, &w, &x, k);
            let next = holder_extremal(&c, r);
            if next.iter().any(|v| v.modulus() > 0.0) {
                x[k] = next;
            }
        }
        y = eval(&x);
        let next_value = codomain.norm(&y);
        let gain = next_value - value;
        value = value.max(next_value);
        if gain.abs() <= opts.tol * value.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Run { value, converged, x }
}

fn sup_norm_in<S: SupScalar>(op: &MultilinearOperator, opts: &SupNormOptions, exec: Executor) -> Result<SupNormEstimate> {
    let coeffs = match op.representation() {
        Representation::Dense(c) | Representation::Diagonal(c) => S::view(c)?,
    };
    let runs = exec.map(opts.restarts, |i| alternating::<S>(op, &coeffs, opts, i));
    // best-of in restart order; ties keep the earliest
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = i;
        }
    }
    Ok(SupNormEstimate {
        value: runs[best].value,
        converged: runs.iter().all(|r| r.converged),
        restart: best,
        argmax: runs[best].x.iter().map(|v| v.iter().map(|s| s.to_complex()).collect()).collect(),
    })
}

/// Lower estimate of the operator norm by alternating maximization: with
/// all slots but one fixed (and a norming functional on the codomain) the
/// best input is the Hölder-extremal vector of a linear functional. Best
/// of `restarts` random starts.
pub fn sup_norm(op: &MultilinearOperator, field: Field, opts: &SupNormOptions) -> Result<SupNormEstimate> {
    sup_norm_with(op, field, opts, Executor::default())
}

pub fn sup_norm_with(
    op: &MultilinearOperator,
    field: Field,
    opts: &SupNormOptions,
    exec: Executor,
) -> Result<SupNormEstimate> {
    if opts.restarts == 0 {
        return Err(Error::param("sup_norm needs at least one restart"));
    }
    match field {
        Field::Real => sup_norm_in::<f64>(op, opts, exec),
        Field::Complex => sup_norm_in::<Complex64>(op, opts, exec),
    }
}

/// `(Σ ‖T(e_{j₁},…,e_{j_m})‖²)^{1/2}`, defined for scalar forms and
/// operators into `ℓ_2^M`.
pub fn hilbert_schmidt_norm(op: &MultilinearOperator) -> Result<f64> {
    if let Codomain::Sequence { q, .. } = op.codomain() {
        if q != 2.0 {
            return Err(Error::domain(format!("Hilbert–Schmidt norm needs an ℓ_2 codomain, got ℓ_{q}")));
        }
    }
    let n = op.dim();
    let m = op.arity();
    let sum_sq = match op.representation() {
        Representation::Dense(c) => c.moduli().iter().map(|v| v * v).sum::<f64>(),
        Representation::Diagonal(w) => {
            let w = w.moduli();
            (0..n).map(|j| (0..m).map(|k| w[k * n + j].powi(2)).product::<f64>()).sum()
        }
    };
    Ok(sum_sq.sqrt())
}

/// Real coefficients as a plain slice, if the operator is real.
pub(crate) fn real_coefficients(op: &MultilinearOperator) -> Option<&[f64]> {
    match op.representation() {
        Representation::Dense(Coefficients::Real(v)) | Representation::Diagonal(Coefficients::Real(v)) => Some(v),
        _ => None,
    }
}
