use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::{open_slot, real_coefficients, Kernel, MultilinearOperator, Representation};
use crate::rng::{self, tag};
use crate::scalar::{conjugate_exponent, holder_extremal, lq_norm};

/// Largest family size for which `p = 1` is solved by sign enumeration.
pub const MAX_ENUMERATION: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakNormOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for WeakNormOptions {
    fn default() -> Self {
        WeakNormOptions { restarts: 64, tol: 1e-9, max_iter: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeakMethod {
    SingleVector,
    CanonicalBasis,
    SignEnumeration,
    Spectral,
    Ascent,
}

/// `w_p((y_j)) = sup_{‖γ‖_{r'} ≤ 1} (Σ_j |⟨γ, y_j⟩|^p)^{1/p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakPNorm {
    pub p: f64,
    pub value: f64,
    /// The functional attaining `value`.
    pub certificate: Vec<f64>,
    /// `true` when `value` is the exact supremum rather than a lower
    /// estimate from ascent.
    pub exact: bool,
    pub method: WeakMethod,
}

fn objective(family: &[Vec<f64>], gamma: &[f64], p: f64) -> f64 {
    let s: f64 = family
        .iter()
        .map(|y| y.iter().zip(gamma).map(|(a, b)| a * b).sum::<f64>().abs().powf(p))
        .sum();
    s.powf(1.0 / p)
}

/// Index `i` with `family[j] = ±e_{i}`, if every vector is a signed basis
/// vector and together they cover each coordinate once.
fn is_canonical_basis(family: &[Vec<f64>]) -> bool {
    let n = family[0].len();
    if family.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for y in family {
        let mut hit = None;
        for (i, &v) in y.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if v.abs() != 1.0 || hit.is_some() {
                return false;
            }
            hit = Some(i);
        }
        match hit {
            Some(i) if !seen[i] => seen[i] = true,
            _ => return false,
        }
    }
    true
}

/// `max_ε ‖Σ ε_j y_j‖_r` over sign vectors, visiting them in Gray-code
/// order with `ε_0 = +1` fixed.
fn sign_enumeration(family: &[Vec<f64>], r: f64) -> (f64, Vec<f64>) {
    let n = family[0].len();
    let j = family.len();
    let mut sum = vec![0.0; n];
    for y in family {
        for (s, v) in sum.iter_mut().zip(y) {
            *s += v;
        }
    }
    let mut signs = vec![1.0; j];
    let mut best = (lq_norm(&sum, r), sum.clone());
    for step in 1u64..(1u64 << (j - 1)) {
        let flip = step.trailing_zeros() as usize + 1;
        signs[flip] = -signs[flip];
        let k = 2.0 * signs[flip];
        for (s, v) in sum.iter_mut().zip(&family[flip]) {
            *s += k * v;
        }
        let val = lq_norm(&sum, r);
        if val > best.0 {
            best = (val, sum.clone());
        }
    }
    let certificate = holder_extremal(&best.1, conjugate_exponent(r));
    (best.0, certificate)
}

/// Largest singular value of the matrix with columns `y_j`.
fn spectral(family: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = family[0].len();
    let y = DMatrix::from_fn(n, family.len(), |i, j| family[j][i]);
    let gram = &y * y.transpose();
    let eig = SymmetricEigen::new(gram);
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let v = eig.eigenvectors.column(idx);
    (lambda.max(0.0).sqrt(), v.iter().copied().collect())
}

fn ascent(family: &[Vec<f64>], p: f64, r: f64, opts: &WeakNormOptions) -> (f64, Vec<f64>) {
    let n = family[0].len();
    let rc = conjugate_exponent(r);
    let mut starts: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    starts.extend(family.iter().map(|y| holder_extremal(y, rc)));
    starts.push(holder_extremal(&vec![1.0; n], rc));
    let mut rng = rng::stream_rng(opts.seed, tag::WEAK_NORM);
    for _ in 0..opts.restarts {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = lq_norm(&g, rc);
        starts.push(g.iter().map(|v| v / norm).collect());
    }

    let mut best = (f64::NEG_INFINITY, starts[0].clone());
    for start in starts {
        let mut gamma = start;
        let mut current = objective(family, &gamma, p);
        if current > best.0 {
            best = (current, gamma.clone());
        }
        for _ in 0..opts.max_iter {
            // linearize Σ|⟨γ,y⟩|^p and move to the ball point norming it
            let mut grad = vec![0.0; n];
            for y in family {
                let a: f64 = y.iter().zip(&gamma).map(|(u, v)| u * v).sum();
                if a == 0.0 {
                    continue;
                }
                let k = a.abs().powf(p - 1.0) * a.signum();
                for (g, v) in grad.iter_mut().zip(y) {
                    *g += k * v;
                }
            }
            if grad.iter().all(|g| *g == 0.0) {
                break;
            }
            let next = holder_extremal(&grad, rc);
            let value = objective(family, &next, p);
            let improved = value > current;
            if improved {
                gamma = next;
                if value > best.0 {
                    best = (value, gamma.clone());
                }
            }
            if !improved || value - current <= opts.tol * value {
                break;
            }
            current = value;
        }
    }
    best
}

/// Weak `p`-norm of a real family in `ℓ_r^N`. Exact for a single vector,
/// the canonical basis, `p = 1` (sign enumeration, up to
/// [`MAX_ENUMERATION`] vectors) and `p = r = 2` (spectral norm); otherwise
/// a certified lower estimate by multi-start ascent.
pub fn weak_p_norm(family: &[Vec<f64>], p: f64, r: f64, opts: &WeakNormOptions) -> Result<WeakPNorm> {
    if family.is_empty() {
        return Err(Error::param("weak norm of an empty family"));
    }
    if !(p > 0.0) || !(r >= 1.0) {
        return Err(Error::param(format!("need p > 0 and r ≥ 1 (got p={p}, r={r})")));
    }
    let n = family[0].len();
    if n == 0 {
        return Err(Error::param("vectors must have positive dimension"));
    }
    if let Some(bad) = family.iter().find(|y| y.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let rc = conjugate_exponent(r);
    let (value, certificate, exact, method) = if family.len() == 1 {
        let y = &family[0];
        (lq_norm(y, r), holder_extremal(y, rc), true, WeakMethod::SingleVector)
    } else if is_canonical_basis(family) {
        let expo = (1.0 / p - 1.0 / rc).max(0.0);
        let cert = if expo > 0.0 {
            holder_extremal(&vec![1.0; n], rc)
        } else {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        };
        ((n as f64).powf(expo), cert, true, WeakMethod::CanonicalBasis)
    } else if p == 1.0 && family.len() <= MAX_ENUMERATION {
        let (v, c) = sign_enumeration(family, r);
        (v, c, true, WeakMethod::SignEnumeration)
    } else if p == 2.0 && r == 2.0 {
        let (v, c) = spectral(family);
        (v, c, true, WeakMethod::Spectral)
    } else {
        let (v, c) = ascent(family, p, r, opts);
        (v, c, false, WeakMethod::Ascent)
    };
    Ok(WeakPNorm { p, value, certificate, exact, method })
}

/// `w_p` of the canonical basis of `ℓ_r^N`.
pub fn basis_weak_norm(n: usize, p: f64, r: f64) -> f64 {
    (n as f64).powf((1.0 / p - 1.0 / conjugate_exponent(r)).max(0.0))
}

/// Norms `‖T(e_{j₁},…,e_{j_m})‖` over all tuples with a nonzero image.
fn basis_image_norms(op: &MultilinearOperator) -> Result<Vec<f64>> {
    let n = op.dim();
    let m = op.arity();
    let codomain = op.codomain();
    match op.representation() {
        Representation::Diagonal(w) => {
            let w = w.moduli();
            Ok((0..n).map(|j| (0..m).map(|k| w[k * n + j]).product()).collect())
        }
        Representation::Dense(_) => {
            let tuples = n.pow(m as u32);
            let mut out = Vec::with_capacity(tuples);
            for t in 0..tuples {
                let norm = match real_coefficients(op) {
                    Some(_) => codomain.norm(&op.basis_image::<f64>(t)?),
                    None => codomain.norm(&op.basis_image::<Complex64>(t)?),
                };
                out.push(norm);
            }
            Ok(out)
        }
    }
}

/// `(Σ ‖T(e_{j₁},…,e_{j_m})‖^p)^{1/p} / w_p(basis)^m`, the summing
/// inequality tested on canonical basis families; a lower bound for `π_p`.
pub fn basis_lower_bound(op: &MultilinearOperator, p: f64, r: f64) -> Result<f64> {
    if !(p > 0.0) || !(r >= 1.0) {
        return Err(Error::param(format!("need p > 0 and r ≥ 1 (got p={p}, r={r})")));
    }
    let num: f64 = basis_image_norms(op)?.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p);
    Ok(num / basis_weak_norm(op.dim(), p, r).powi(op.arity() as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub family_size: usize,
    pub restarts: usize,
    /// Proposal rounds per restart; each round visits every slot.
    pub rounds: usize,
    pub seed: u64,
    pub weak: WeakNormOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            family_size: 4,
            restarts: 4,
            rounds: 30,
            seed: 0,
            weak: WeakNormOptions { restarts: 8, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Best ratio found (never below `basis_value`).
    pub value: f64,
    pub basis_value: f64,
    /// Ratio reached by each restart, in order.
    pub per_restart: Vec<f64>,
    /// Every weak norm behind `value` was computed exactly, so `value` is a
    /// rigorous lower bound for `π_p`.
    pub certified: bool,
    /// The families attaining `value` (empty when the basis bound won).
    pub families: Vec<Vec<Vec<f64>>>,
}

/// Evaluates families and their gradients against a real operator.
struct Summation<'a> {
    op: &'a MultilinearOperator,
    coeffs: &'a [f64],
    kernel: Kernel<'a, f64>,
    p: f64,
    r: f64,
}

struct Ratio {
    value: f64,
    exact: bool,
}

impl<'a> Summation<'a> {
    fn tuples(&self, j: usize) -> usize {
        j.pow(self.op.arity() as u32)
    }

    fn tuple(&self, mut t: usize, j: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = t % j;
            t /= j;
        }
    }

    /// `Σ ‖T(x¹_{j₁},…)‖^p`.
    fn numerator(&mut self, fam: &[Vec<Vec<f64>>]) -> f64 {
        let j = fam[0].len();
        let mut idx = vec![0; fam.len()];
        let mut sum = 0.0;
        for t in 0..self.tuples(j) {
            self.tuple(t, j, &mut idx);
            let parts: Vec<&[f64]> = idx.iter().enumerate().map(|(k, &i)| fam[k][i].as_slice()).collect();
            sum += self.kernel.eval_norm(&parts).powf(self.p);
        }
        sum
    }

    /// Gradient of the numerator with respect to the vectors of slot `k`.
    fn gradient(&mut self, fam: &[Vec<Vec<f64>>], k: usize) -> Vec<Vec<f64>> {
        let j = fam[0].len();
        let n = self.op.dim();
        let codomain = self.op.codomain();
        let dual = codomain.exponent().map(conjugate_exponent).unwrap_or(f64::INFINITY);
        let mut grad = vec![vec![0.0; n]; j];
        let mut idx = vec![0; fam.len()];
        for t in 0..self.tuples(j) {
            self.tuple(t, j, &mut idx);
            let parts: Vec<&[f64]> = idx.iter().enumerate().map(|(l, &i)| fam[l][i].as_slice()).collect();
            let y = self.kernel.eval_unchecked(&parts).to_vec();
            let norm = codomain.norm(&y);
            if norm == 0.0 {
                continue;
            }
            let w = holder_extremal(&y, dual);
            let x: Vec<Vec<f64>> = parts.iter().map(|v| v.to_vec()).collect();
            let c = open_slot(self.op, self.coeffs, &w, &x, k);
            let scale = self.p * norm.powf(self.p - 1.0);
            for (g, v) in grad[idx[k]].iter_mut().zip(&c) {
                *g += scale * v;
            }
        }
        grad
    }

    fn weak(&self, family: &[Vec<f64>], opts: &WeakNormOptions) -> WeakPNorm {
        weak_p_norm(family, self.p, self.r, opts).expect("families are nonempty and consistent")
    }

    fn ratio(&mut self, fam: &[Vec<Vec<f64>>], weak: &[WeakPNorm]) -> Ratio {
        let den: f64 = weak.iter().map(|w| w.value).product();
        if den <= 0.0 {
            return Ratio { value: 0.0, exact: true };
        }
        let num = self.numerator(fam).powf(1.0 / self.p);
        Ratio { value: num / den, exact: weak.iter().all(|w| w.exact) }
    }
}

fn frobenius(v: &[Vec<f64>]) -> f64 {
    v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Searches for families `(x^k_j)_{j ≤ J}` maximizing
/// `(Σ ‖T(x¹_{j₁},…,xᵐ_{j_m})‖^p)^{1/p} / Π_k w_p(x^k)`: slot-wise hill
/// climbing mixing gradient and random proposals, each accepted only when
/// the ratio (with weak norms recomputed) improves. The canonical-basis
/// bound is included, so the result is at least [`basis_lower_bound`].
/// Real operators only.
pub fn search_lower_bound(op: &MultilinearOperator, p: f64, r: f64, opts: &SearchOptions) -> Result<SearchResult> {
    if opts.family_size == 0 {
        return Err(Error::param("family size must be at least 1"));
    }
    let coeffs = real_coefficients(op)
        .ok_or_else(|| Error::Field("lower-bound search supports real operators only".into()))?;
    let basis_value = basis_lower_bound(op, p, r)?;
    let n = op.dim();
    let m = op.arity();
    let j = opts.family_size;
    let mut sum = Summation { op, coeffs, kernel: Kernel::new(op)?, p, r };

    let mut best = SearchResult {
        value: basis_value,
        basis_value,
        per_restart: Vec::with_capacity(opts.restarts),
        certified: true,
        families: Vec::new(),
    };
    for restart in 0..opts.restarts {
        let mut rng = rng::stream_rng(opts.seed, rng::substream(tag::SEARCH, restart as u64));
        let mut fam: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|_| {
                (0..j)
                    .map(|i| {
                        if restart == 0 && i < n {
                            let mut e = vec![0.0; n];
                            e[i] = 1.0;
                            e
                        } else {
                            (0..n).map(|_| rng.sample(StandardNormal)).collect()
                        }
                    })
                    .collect()
            })
            .collect();
        let wopts = |k: usize, round: usize| WeakNormOptions {
            seed: rng::substream(opts.seed ^ restart as u64, (round * m + k) as u64),
            ..opts.weak
        };
        let mut weak: Vec<WeakPNorm> = (0..m).map(|k| sum.weak(&fam[k], &wopts(k, 0))).collect();
        let mut current = sum.ratio(&fam, &weak);
        let mut step = vec![0.3; m];
        for round in 0..opts.rounds {
            for k in 0..m {
                let scale = frobenius(&fam[k]).max(1e-300);
                let direction: Vec<Vec<f64>> = if round % 2 == 0 {
                    let g = sum.gradient(&fam, k);
                    let gn = frobenius(&g);
                    if gn == 0.0 {
                        continue;
                    }
                    g.into_iter().map(|v| v.into_iter().map(|x| x / gn).collect()).collect()
                } else {
                    let g: Vec<Vec<f64>> =
                        (0..j).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
                    let gn = frobenius(&g);
                    g.into_iter().map(|v| v.into_iter().map(|x| x / gn).collect()).collect()
                };
                let proposal: Vec<Vec<f64>> = fam[k]
                    .iter()
                    .zip(&direction)
                    .map(|(x, d)| x.iter().zip(d).map(|(a, b)| a + step[k] * scale * b).collect())
                    .collect();
                let old = std::mem::replace(&mut fam[k], proposal);
                let new_weak = sum.weak(&fam[k], &wopts(k, round + 1));
                let old_weak = std::mem::replace(&mut weak[k], new_weak);
                let candidate = sum.ratio(&fam, &weak);
                if candidate.value > current.value {
                    current = candidate;
                    step[k] = (step[k] * 1.5).min(2.0);
                } else {
                    fam[k] = old;
                    weak[k] = old_weak;
                    step[k] *= 0.6;
                }
            }
        }
        best.per_restart.push(current.value);
        if current.value > best.value {
            best.value = current.value;
            best.certified = current.exact;
            best.families = fam;
        }
    }
    Ok(best)
}
