//! Real and complex scalars behind one small trait so that operators,
//! samplers and estimators share code paths for both fields.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    const FIELD: Field;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn scale(self, k: f64) -> Self;

    /// `conj(self) / |self|`, or zero at the origin. Multiplying `self` by
    /// this phase yields `|self|`.
    fn align_phase(self) -> Self {
        let m = self.modulus();
        if m == 0.0 {
            Self::zero()
        } else {
            self.conj().scale(1.0 / m)
        }
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn align_phase(self) -> Self {
        if self > 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// ℓ_q norm of a vector, `q` in `[1, ∞]` (values below one give the
/// quasi-norm `(Σ|x|^q)^{1/q}`).
pub fn lq_norm<S: Scalar>(x: &[S], q: f64) -> f64 {
    if q.is_infinite() {
        return x.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    }
    if q == 2.0 {
        return x.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt();
    }
    if q == 1.0 {
        return x.iter().map(|v| v.modulus()).sum();
    }
    x.iter().map(|v| v.modulus().powf(q)).sum::<f64>().powf(1.0 / q)
}

/// Hölder conjugate `q/(q-1)`, with `1 ↔ ∞`.
pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// Unit vector in ℓ_r norming the functional `c`, i.e. the `x` with
/// `‖x‖_r ≤ 1` maximizing `|Σ c_j x_j|`. The attained value is `‖c‖_{r'}`.
pub fn holder_extremal<S: Scalar>(c: &[S], r: f64) -> Vec<S> {
    let dual = conjugate_exponent(r);
    let mut x = vec![S::zero(); c.len()];
    if r.is_infinite() {
        for (xi, ci) in x.iter_mut().zip(c) {
            *xi = ci.align_phase();
        }
        return x;
    }
    if r == 1.0 {
        // all mass on one largest coordinate
        let (best, _) = c
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |acc, (i, v)| if v.modulus() > acc.1 { (i, v.modulus()) } else { acc });
        if !c.is_empty() && c[best].modulus() > 0.0 {
            x[best] = c[best].align_phase();
        }
        return x;
    }
    let norm = lq_norm(c, dual);
    if norm == 0.0 {
        return x;
    }
    for (xi, ci) in x.iter_mut().zip(c) {
        let m = ci.modulus();
        if m > 0.0 {
            *xi = ci.align_phase().scale((m / norm).powf(dual - 1.0));
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponent(2.0), 2.0);
        assert!((conjugate_exponent(3.0) - 1.5).abs() < 1e-15);
        assert_eq!(conjugate_exponent(1.0), f64::INFINITY);
        assert_eq!(conjugate_exponent(f64::INFINITY), 1.0);
    }

    #[test]
    fn holder_attains_dual_norm() {
        let c = [3.0, -4.0, 1.0];
        for r in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let x = holder_extremal(&c, r);
            assert!(lq_norm(&x, r) <= 1.0 + 1e-12);
            let val: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            let want = lq_norm(&c, conjugate_exponent(r));
            assert!((val - want).abs() < 1e-12 * want, "r={r}: {val} vs {want}");
        }
    }

    #[test]
    fn complex_holder() {
        let c = [Complex64::new(1.0, 1.0), Complex64::new(0.0, -2.0)];
        let x = holder_extremal(&c, 2.0);
        let val: Complex64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((val.im).abs() < 1e-14);
        assert!((val.re - lq_norm(&c, 2.0)).abs() < 1e-14);
    }
}
