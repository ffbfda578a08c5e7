use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::rng::{self, tag};
use crate::scalar::{Field, Scalar};

/// Symmetric `s`-stable law on the real line or rotation-invariant law on
/// the complex plane.
///
/// Normalization: for `s < 2` the real law has characteristic function
/// `exp(-|t|^s)`; the complex law is `√(2A)·(G₁ + iG₂)` with `A` positive
/// `(s/2)`-stable (Laplace transform `exp(-λ^{s/2})`), whose real part again
/// has characteristic function `exp(-|t|^s)`. At `s = 2` the real law is the
/// standard normal and the complex law is the circular Gaussian with
/// `E|Z|² = 1`.
///
/// [`StableLaw::scaled`] multiplies every draw by a constant; moment
/// constants from [`StableLaw::moment_constant`] scale with it, so every
/// normalized quantity is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    s: f64,
    field: Field,
    #[serde(default = "unit_scale")]
    scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl StableLaw {
    pub fn new(s: f64, field: Field) -> Result<Self> {
        if !(s > 0.0 && s <= 2.0) {
            return Err(Error::domain(format!("stability index must lie in (0, 2], got {s}")));
        }
        Ok(StableLaw { s, field, scale: 1.0 })
    }

    pub fn gaussian(field: Field) -> Self {
        StableLaw { s: 2.0, field, scale: 1.0 }
    }

    pub fn index(&self) -> f64 {
        self.s
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_gaussian(&self) -> bool {
        self.s == 2.0
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The law of `λZ`.
    pub fn scaled(self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param(format!("law scale must be positive and finite, got {lambda}")));
        }
        Ok(StableLaw { scale: self.scale * lambda, ..self })
    }

    /// `(E|λZ|^q)^{1/q} = λ c_{s,q}`.
    pub fn moment_constant(&self, q: f64) -> Result<f64> {
        Ok(self.scale * super::constant::constant_c(self.s, q, self.field)?.value)
    }

    /// A ready-to-use sampler with the per-law constants precomputed.
    pub fn sampler(&self) -> Sampler {
        let s = self.s;
        let a = 0.5 * s;
        Sampler {
            law: *self,
            inv_s: 1.0 / s,
            tail_exp: (1.0 - s) / s,
            sub_a: a,
            sub_inv_a: 1.0 / a,
            sub_tail: (1.0 - a) / a,
        }
    }

    pub(crate) fn check_field<S: Scalar>(&self) -> Result<()> {
        if S::FIELD != self.field {
            return Err(Error::Field(format!(
                "law is over the {} field but {} scalars were requested",
                self.field,
                S::FIELD
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sampler {
    law: StableLaw,
    inv_s: f64,
    tail_exp: f64,
    sub_a: f64,
    sub_inv_a: f64,
    sub_tail: f64,
}

impl Sampler {
    pub fn law(&self) -> StableLaw {
        self.law
    }

    #[inline]
    pub fn real<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.law.scale * self.unit_real(rng)
    }

    /// Chambers–Mallows–Stuck draw of the real symmetric law.
    #[inline]
    fn unit_real<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.law.s;
        if s == 2.0 {
            return StandardNormal.sample(rng);
        }
        let u: f64 = Open01.sample(rng);
        let v = PI * (u - 0.5);
        if s == 1.0 {
            return v.tan();
        }
        let w: f64 = Exp1.sample(rng);
        (s * v).sin() / v.cos().powf(self.inv_s) * ((v - s * v).cos() / w).powf(self.tail_exp)
    }

    /// Kanter's draw of the positive `(s/2)`-stable subordinator.
    #[inline]
    fn subordinator<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.sub_a;
        let u: f64 = Open01.sample(rng);
        let u = PI * u;
        let e: f64 = Exp1.sample(rng);
        (a * u).sin() / u.sin().powf(self.sub_inv_a) * (((1.0 - a) * u).sin() / e).powf(self.sub_tail)
    }

    /// Draw of the rotation-invariant complex law.
    #[inline]
    pub fn complex<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let g1: f64 = StandardNormal.sample(rng);
        let g2: f64 = StandardNormal.sample(rng);
        let radius = if self.law.s == 2.0 {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            (2.0 * self.subordinator(rng)).sqrt()
        };
        let k = self.law.scale * radius;
        Complex64::new(g1 * k, g2 * k)
    }

    #[inline]
    pub fn draw<S: StableScalar, R: Rng + ?Sized>(&self, rng: &mut R) -> S {
        S::draw(self, rng)
    }

    /// Fills `out` with i.i.d. draws.
    #[inline]
    pub fn fill<S: StableScalar, R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [S]) {
        for v in out.iter_mut() {
            *v = S::draw(self, rng);
        }
    }
}

/// Scalars the stable sampler can produce.
pub trait StableScalar: Scalar {
    fn draw<R: Rng + ?Sized>(sampler: &Sampler, rng: &mut R) -> Self;
}

impl StableScalar for f64 {
    #[inline]
    fn draw<R: Rng + ?Sized>(sampler: &Sampler, rng: &mut R) -> Self {
        sampler.real(rng)
    }
}

impl StableScalar for Complex64 {
    #[inline]
    fn draw<R: Rng + ?Sized>(sampler: &Sampler, rng: &mut R) -> Self {
        sampler.complex(rng)
    }
}

/// Samples per counter-based chunk in [`sample_stable`].
pub const CHUNK: usize = 4096;

/// `count` i.i.d. draws from `law`, deterministic in `(seed, count)`.
pub fn sample_stable<S: StableScalar>(law: &StableLaw, count: usize, seed: u64) -> Result<Vec<S>> {
    sample_stable_with(law, count, seed, Executor::default())
}

pub fn sample_stable_with<S: StableScalar>(
    law: &StableLaw,
    count: usize,
    seed: u64,
    exec: Executor,
) -> Result<Vec<S>> {
    if count == 0 {
        return Err(Error::param("sample count must be at least 1"));
    }
    law.check_field::<S>()?;
    let sampler = law.sampler();
    let chunks = count.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| {
        let mut rng = rng::stream_rng(seed, rng::substream(tag::SAMPLER, c as u64));
        let len = CHUNK.min(count - c * CHUNK);
        let mut out = vec![S::zero(); len];
        sampler.fill(&mut rng, &mut out);
        out
    });
    Ok(parts.concat())
}

/// `count` vectors of dimension `dim` with i.i.d. coordinates from `law`.
pub fn sample_stable_vector<S: StableScalar>(
    law: &StableLaw,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<S>>> {
    if dim == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    let total = dim
        .checked_mul(count)
        .ok_or_else(|| Error::param("dim * count overflows"))?;
    let flat = sample_stable::<S>(law, total, seed)?;
    Ok(flat.chunks_exact(dim).map(<[S]>::to_vec).collect())
}

/// Cumulative distribution function of the real law where it has a
/// closed form (`s = 1` Cauchy and `s = 2` standard normal).
pub fn closed_form_cdf(law: &StableLaw, x: f64) -> Option<f64> {
    if law.field != Field::Real {
        return None;
    }
    if law.s == 1.0 {
        Some(0.5 + x.atan() / PI)
    } else if law.s == 2.0 {
        Some(0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2))
    } else {
        None
    }
}
