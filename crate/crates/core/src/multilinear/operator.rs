use std::borrow::Cow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lq_norm, Field, Scalar};

/// Largest dense tensor (`N^m · M` entries) the crate will allocate.
pub const MAX_DENSE_ENTRIES: u128 = 100_000_000;

/// Target space of an operator: the scalar field or `ℓ_q^M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Codomain {
    Scalar,
    Sequence {
        #[serde(with = "crate::serde_exponent")]
        q: f64,
        dim: usize,
    },
}

impl Codomain {
    pub fn sequence(q: f64, dim: usize) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::param(format!("codomain exponent must be ≥ 1, got {q}")));
        }
        if dim == 0 {
            return Err(Error::param("codomain dimension must be ≥ 1"));
        }
        Ok(Codomain::Sequence { q, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Codomain::Scalar => 1,
            Codomain::Sequence { dim, .. } => *dim,
        }
    }

    /// The exponent used to measure outputs. Scalars carry the absolute
    /// value, which every ℓ_q norm reduces to in dimension one; `None`
    /// marks that case.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Codomain::Scalar => None,
            Codomain::Sequence { q, .. } => Some(*q),
        }
    }

    #[inline]
    pub fn norm<S: Scalar>(&self, y: &[S]) -> f64 {
        match self {
            Codomain::Scalar => y[0].modulus(),
            Codomain::Sequence { q, .. } => lq_norm(y, *q),
        }
    }
}

/// Flat coefficient storage over either field.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Real(v) => v.len(),
            Coefficients::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self) -> Field {
        match self {
            Coefficients::Real(_) => Field::Real,
            Coefficients::Complex(_) => Field::Complex,
        }
    }

    pub fn moduli(&self) -> Vec<f64> {
        match self {
            Coefficients::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Coefficients::Complex(v) => v.iter().map(|x| x.norm()).collect(),
        }
    }

    fn map_real(&self, f: impl Fn(usize, f64) -> f64, g: impl Fn(usize, Complex64) -> Complex64) -> Self {
        match self {
            Coefficients::Real(v) => Coefficients::Real(v.iter().enumerate().map(|(i, &x)| f(i, x)).collect()),
            Coefficients::Complex(v) => {
                Coefficients::Complex(v.iter().enumerate().map(|(i, &x)| g(i, x)).collect())
            }
        }
    }

    pub(crate) fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Coefficients::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Coefficients::Complex(v) => v.clone(),
        }
    }
}

/// Scalars that can read an operator's coefficients.
pub trait CoeffScalar: Scalar {
    fn view(c: &Coefficients) -> Result<Cow<'_, [Self]>>;
}

impl CoeffScalar for f64 {
    fn view(c: &Coefficients) -> Result<Cow<'_, [f64]>> {
        match c {
            Coefficients::Real(v) => Ok(Cow::Borrowed(v)),
            Coefficients::Complex(_) => {
                Err(Error::Field("complex coefficients cannot be evaluated over the real field".into()))
            }
        }
    }
}

impl CoeffScalar for Complex64 {
    fn view(c: &Coefficients) -> Result<Cow<'_, [Complex64]>> {
        match c {
            Coefficients::Real(_) => Ok(Cow::Owned(c.to_complex())),
            Coefficients::Complex(v) => Ok(Cow::Borrowed(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Coefficient vectors `a[j₁,…,j_m] ∈ 𝕂^M` stored row-major with `j₁`
    /// slowest and the codomain index fastest.
    Dense(Coefficients),
    /// `(x¹,…,xᵐ) ↦ Σ_j σ¹_j x¹_j ⋯ σᵐ_j xᵐ_j e_j`; rows stored one after
    /// another (`m·N` entries).
    Diagonal(Coefficients),
}

/// An m-linear map `ℓ_r^N × ⋯ × ℓ_r^N → codomain`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearOperator {
    arity: usize,
    dim: usize,
    r: f64,
    codomain: Codomain,
    repr: Representation,
}

pub(crate) fn checked_power(n: usize, m: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..m {
        acc = acc.saturating_mul(n as u128);
    }
    Ok(acc)
}

fn guard(entries: u128) -> Result<()> {
    if entries > MAX_DENSE_ENTRIES {
        return Err(Error::TooLarge { entries, limit: MAX_DENSE_ENTRIES });
    }
    Ok(())
}

impl MultilinearOperator {
    pub fn dense(arity: usize, dim: usize, r: f64, codomain: Codomain, coeffs: Coefficients) -> Result<Self> {
        Self::check_shape(arity, dim, r)?;
        let entries = checked_power(dim, arity)?.saturating_mul(codomain.dim() as u128);
        guard(entries)?;
        if coeffs.len() as u128 != entries {
            return Err(Error::DimensionMismatch { expected: entries as usize, got: coeffs.len() });
        }
        Ok(MultilinearOperator { arity, dim, r, codomain, repr: Representation::Dense(coeffs) })
    }

    /// Diagonal operator into `ℓ_q^N` with the given weight rows.
    pub fn diagonal(arity: usize, dim: usize, r: f64, q: f64, weights: Coefficients) -> Result<Self> {
        Self::check_shape(arity, dim, r)?;
        if weights.len() != arity * dim {
            return Err(Error::DimensionMismatch { expected: arity * dim, got: weights.len() });
        }
        Ok(MultilinearOperator {
            arity,
            dim,
            r,
            codomain: Codomain::sequence(q, dim)?,
            repr: Representation::Diagonal(weights),
        })
    }

    fn check_shape(arity: usize, dim: usize, r: f64) -> Result<()> {
        if arity == 0 || dim == 0 {
            return Err(Error::param("arity and dimension must be at least 1"));
        }
        if !(r >= 1.0) {
            return Err(Error::param(format!("domain exponent must be ≥ 1, got {r}")));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_exponent(&self) -> f64 {
        self.r
    }

    pub fn codomain(&self) -> Codomain {
        self.codomain
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn field(&self) -> Field {
        match &self.repr {
            Representation::Dense(c) | Representation::Diagonal(c) => c.field(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Representation::Diagonal(_))
    }

    /// Same operator, viewed on `ℓ_r^N` for a different `r`.
    pub fn with_domain_exponent(&self, r: f64) -> Result<Self> {
        Self::check_shape(self.arity, self.dim, r)?;
        let mut out = self.clone();
        out.r = r;
        Ok(out)
    }

    /// Same coefficients measured in a different codomain norm.
    pub fn with_codomain(&self, codomain: Codomain) -> Result<Self> {
        if codomain.dim() != self.codomain.dim() {
            return Err(Error::DimensionMismatch { expected: self.codomain.dim(), got: codomain.dim() });
        }
        if self.is_diagonal() && matches!(codomain, Codomain::Scalar) {
            return Err(Error::param("diagonal operators map into a sequence space"));
        }
        let mut out = self.clone();
        out.codomain = codomain;
        Ok(out)
    }

    /// Dense expansion of the operator (identity on dense operators).
    pub fn to_dense(&self) -> Result<Self> {
        let weights = match &self.repr {
            Representation::Dense(_) => return Ok(self.clone()),
            Representation::Diagonal(w) => w,
        };
        let (m, n) = (self.arity, self.dim);
        guard(checked_power(n, m + 1)?)?;
        let stride_diag: usize = (0..m).map(|k| n.pow(k as u32)).sum::<usize>() * n + 1;
        let total = n.pow(m as u32 + 1);
        let coeffs = match weights {
            Coefficients::Real(w) => {
                let mut a = vec![0.0; total];
                for j in 0..n {
                    a[j * stride_diag] = (0..m).map(|k| w[k * n + j]).product();
                }
                Coefficients::Real(a)
            }
            Coefficients::Complex(w) => {
                let mut a = vec![Complex64::new(0.0, 0.0); total];
                for j in 0..n {
                    a[j * stride_diag] = (0..m).map(|k| w[k * n + j]).product();
                }
                Coefficients::Complex(a)
            }
        };
        MultilinearOperator::dense(m, n, self.r, self.codomain, coeffs)
    }

    /// `λ·T`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            Representation::Dense(c) => *c = c.map_real(|_, x| x * lambda, |_, x| x * lambda),
            Representation::Diagonal(w) => {
                // scale only the first row
                let n = self.dim;
                *w = w.map_real(
                    |i, x| if i < n { x * lambda } else { x },
                    |i, x| if i < n { x * lambda } else { x },
                );
            }
        }
        out
    }

    /// Multiplies the dense coefficient vector at each index tuple by the
    /// matching entry of `alpha` (length `N^m`).
    pub fn hadamard(&self, alpha: &[f64]) -> Result<Self> {
        let dense = self.to_dense()?;
        let len = self.dim.pow(self.arity as u32);
        if alpha.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: alpha.len() });
        }
        let mdim = self.codomain.dim();
        let coeffs = match &dense.repr {
            Representation::Dense(c) => c.map_real(|i, x| x * alpha[i / mdim], |i, x| x * alpha[i / mdim]),
            Representation::Diagonal(_) => unreachable!(),
        };
        MultilinearOperator::dense(self.arity, self.dim, self.r, self.codomain, coeffs)
    }

    /// Relabels domain coordinates in every slot: `(Tπ)(x) = T(x∘π)`,
    /// with `perm[j]` the new position of coordinate `j`.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim;
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::param("not a permutation"));
            }
        }
        let dense = self.to_dense()?;
        let m = self.arity;
        let mdim = self.codomain.dim();
        let tuples = n.pow(m as u32);
        let source = |t: usize| {
            // new tuple t = (p(j₁),…,p(j_m)) reads old tuple (j₁,…,j_m)
            let mut rem = t;
            let mut digits = vec![0usize; m];
            for k in (0..m).rev() {
                digits[k] = rem % n;
                rem /= n;
            }
            let mut inv = vec![0usize; n];
            for (j, &p) in perm.iter().enumerate() {
                inv[p] = j;
            }
            digits.iter().fold(0usize, |acc, &d| acc * n + inv[d])
        };
        let coeffs = match &dense.repr {
            Representation::Dense(Coefficients::Real(a)) => {
                let mut out = vec![0.0; a.len()];
                for t in 0..tuples {
                    let s = source(t);
                    out[t * mdim..(t + 1) * mdim].copy_from_slice(&a[s * mdim..(s + 1) * mdim]);
                }
                Coefficients::Real(out)
            }
            Representation::Dense(Coefficients::Complex(a)) => {
                let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
                for t in 0..tuples {
                    let s = source(t);
                    out[t * mdim..(t + 1) * mdim].copy_from_slice(&a[s * mdim..(s + 1) * mdim]);
                }
                Coefficients::Complex(out)
            }
            Representation::Diagonal(_) => unreachable!(),
        };
        MultilinearOperator::dense(m, n, self.r, self.codomain, coeffs)
    }

    /// `T(e_{j₁},…,e_{j_m})` for the tuple with flat index `t` (row-major,
    /// `j₁` slowest).
    pub fn basis_image<S: CoeffScalar>(&self, t: usize) -> Result<Vec<S>> {
        let n = self.dim;
        match &self.repr {
            Representation::Dense(c) => {
                let c = S::view(c)?;
                let mdim = self.codomain.dim();
                Ok(c[t * mdim..(t + 1) * mdim].to_vec())
            }
            Representation::Diagonal(w) => {
                let w = S::view(w)?;
                let mut out = vec![S::zero(); n];
                let j = t % n;
                let mut rem = t;
                let mut same = true;
                for _ in 0..self.arity {
                    same &= rem % n == j;
                    rem /= n;
                }
                if same {
                    let mut v = S::one();
                    for k in 0..self.arity {
                        v = v * w[k * n + j];
                    }
                    out[j] = v;
                }
                Ok(out)
            }
        }
    }

    /// Evaluates `T(z¹,…,zᵐ)`.
    pub fn evaluate<S: CoeffScalar>(&self, z: &[&[S]]) -> Result<Vec<S>> {
        let mut k = Kernel::new(self)?;
        Ok(k.eval(z)?.to_vec())
    }
}

/// Reusable evaluation state for one operator: coefficient view plus
/// scratch buffers, so Monte Carlo loops do not allocate per sample.
pub struct Kernel<'a, S: CoeffScalar> {
    op: &'a MultilinearOperator,
    coeffs: Cow<'a, [S]>,
    buf_a: Vec<S>,
    buf_b: Vec<S>,
}

impl<'a, S: CoeffScalar> Kernel<'a, S> {
    pub fn new(op: &'a MultilinearOperator) -> Result<Self> {
        let coeffs = match &op.repr {
            Representation::Dense(c) | Representation::Diagonal(c) => S::view(c)?,
        };
        let len = match &op.repr {
            Representation::Dense(_) => op.dim.pow(op.arity as u32 - 1) * op.codomain.dim(),
            Representation::Diagonal(_) => op.dim,
        };
        Ok(Kernel { op, coeffs, buf_a: vec![S::zero(); len], buf_b: vec![S::zero(); len] })
    }

    pub fn operator(&self) -> &MultilinearOperator {
        self.op
    }

    fn check(&self, z: &[&[S]]) -> Result<()> {
        if z.len() != self.op.arity {
            return Err(Error::DimensionMismatch { expected: self.op.arity, got: z.len() });
        }
        for v in z {
            if v.len() != self.op.dim {
                return Err(Error::DimensionMismatch { expected: self.op.dim, got: v.len() });
            }
        }
        Ok(())
    }

    pub fn eval(&mut self, z: &[&[S]]) -> Result<&[S]> {
        self.check(z)?;
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without shape checks; `z` must hold `m` slices of length
    /// `N`.
    #[inline]
    pub fn eval_unchecked(&mut self, z: &[&[S]]) -> &[S] {
        let n = self.op.dim;
        let m = self.op.arity;
        match &self.op.repr {
            Representation::Diagonal(_) => {
                let w = &self.coeffs;
                let out = &mut self.buf_a[..n];
                for j in 0..n {
                    let mut v = w[j] * z[0][j];
                    for k in 1..m {
                        v = v * (w[k * n + j] * z[k][j]);
                    }
                    out[j] = v;
                }
                &self.buf_a[..n]
            }
            Representation::Dense(_) => {
                let mdim = self.op.codomain.dim();
                // contract the slowest index first
                let mut rest = self.coeffs.len() / n;
                contract(&self.coeffs, z[0], rest, &mut self.buf_a[..rest]);
                for zk in z.iter().skip(1) {
                    let next = rest / n;
                    let (src, dst) = (&self.buf_a[..rest], &mut self.buf_b[..next]);
                    contract(src, zk, next, dst);
                    std::mem::swap(&mut self.buf_a, &mut self.buf_b);
                    rest = next;
                }
                debug_assert_eq!(rest, mdim);
                &self.buf_a[..mdim]
            }
        }
    }

    /// Norm of `T(z)` in the codomain.
    #[inline]
    pub fn eval_norm(&mut self, z: &[&[S]]) -> f64 {
        let codomain = self.op.codomain;
        codomain.norm(self.eval_unchecked(z))
    }
}

/// `dst[i] = Σ_j x[j]·src[j·len + i]`.
#[inline]
fn contract<S: Scalar>(src: &[S], x: &[S], len: usize, dst: &mut [S]) {
    for v in dst.iter_mut() {
        *v = S::zero();
    }
    for (j, &xj) in x.iter().enumerate() {
        let row = &src[j * len..(j + 1) * len];
        for (d, &a) in dst.iter_mut().zip(row) {
            *d += xj * a;
        }
    }
}
