use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::law::StableLaw;
use super::special::gamma_fn;
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::scalar::Field;

/// Relative agreement required between the closed form and the quadrature
/// route before a constant is accepted.
pub const AGREEMENT_TOL: f64 = 1e-6;

/// `c_{s,q} = (E|Z|^q)^{1/q}` for the one-dimensional law, with both routes
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstant {
    pub s: f64,
    pub q: f64,
    pub field: Field,
    pub value: f64,
    pub closed_form: f64,
    pub quadrature: f64,
}

impl MomentConstant {
    pub fn relative_disagreement(&self) -> f64 {
        ((self.closed_form - self.quadrature) / self.closed_form).abs()
    }
}

fn validate(s: f64, q: f64) -> Result<()> {
    StableLaw::new(s, Field::Real)?;
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::domain(format!("moment order must be positive and finite, got {q}")));
    }
    if s < 2.0 && q >= s {
        return Err(Error::domain(format!(
            "the {q}-th moment of an {s}-stable law diverges (need q < s)"
        )));
    }
    Ok(())
}

/// `E|Z|^q` from Gamma-function identities.
pub fn absolute_moment_closed_form(s: f64, q: f64, field: Field) -> Result<f64> {
    validate(s, q)?;
    let g = gamma_fn;
    let v = match (field, s == 2.0) {
        (Field::Real, true) => 2f64.powf(q / 2.0) * g((q + 1.0) / 2.0)? / PI.sqrt(),
        (Field::Complex, true) => g(1.0 + q / 2.0)?,
        (Field::Real, false) => {
            2f64.powf(q) * g((1.0 + q) / 2.0)? * g(1.0 - q / s)? / (PI.sqrt() * g(1.0 - q / 2.0)?)
        }
        (Field::Complex, false) => 2f64.powf(q) * g(1.0 + q / 2.0)? * g(1.0 - q / s)? / g(1.0 - q / 2.0)?,
    };
    Ok(v)
}

/// `E|X|^q` for the real law (`s < 2`) through the characteristic
/// function: `|x|^q = K_q^{-1} ∫_0^∞ (1 − cos tx) t^{-1-q} dt`, so
/// `E|X|^q = K_q^{-1} ∫_0^∞ (1 − e^{-t^s}) t^{-1-q} dt`. With `t = e^u` the
/// integrand is smooth; both tails are summed analytically.
fn real_stable_moment_quadrature(s: f64, q: f64) -> Result<f64> {
    let left = (100f64).ln() / s; // e^{-s·left} = 0.01
    let right = (50f64).ln() / s; // e^{s·right} = 50
    let body = integrate(
        |u: f64| -(-(s * u).exp()).exp_m1() * (-q * u).exp(),
        -left,
        right,
        1e-14,
        1e-12,
    );
    // ∫_{-∞}^{-left} (1 − e^{-y}) e^{-qu} du with y = e^{su}: series in y
    let mut lower = 0.0;
    let mut fact = 1.0;
    for k in 1..=12 {
        fact *= k as f64;
        let rate = k as f64 * s - q;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        lower += sign / fact * (-rate * left).exp() / rate;
    }
    // above `right` the factor 1 − e^{-y} equals 1 to within e^{-50}
    let upper = (-q * right).exp() / q;
    let k_q = PI / (2.0 * gamma_fn(1.0 + q)? * (PI * q / 2.0).sin());
    Ok((body.value + lower + upper) / k_q)
}

/// `E|X|^q` for a standard normal by integrating the density, with
/// `x = e^u` to remove the endpoint singularity.
fn normal_moment_quadrature(q: f64) -> f64 {
    let c = 2.0 / (2.0 * PI).sqrt();
    let left = 40.0 / (q + 1.0);
    let right = 40f64.ln();
    let body = integrate(
        |u: f64| {
            let x = u.exp();
            c * ((q + 1.0) * u).exp() * (-0.5 * x * x).exp()
        },
        -left,
        right,
        1e-15,
        1e-13,
    );
    body.value + c * (-(q + 1.0) * left).exp() / (q + 1.0)
}

/// `E|cos Θ|^q` for uniform `Θ`.
fn mean_abs_cos_power(q: f64) -> f64 {
    // θ = π/2 − e^u near the zero of cos keeps the integrand smooth
    let near = integrate(
        |u: f64| {
            let phi = u.exp();
            phi.sin().powf(q) * phi
        },
        -60.0,
        (PI / 4.0).ln(),
        1e-16,
        1e-13,
    );
    let far = integrate(|t: f64| t.cos().powf(q), 0.0, PI / 4.0, 1e-16, 1e-13);
    (near.value + far.value) / (PI / 2.0)
}

/// `E|Z|^q` by numerical quadrature, independent of the Gamma closed forms.
/// Complex laws are reduced to the real part via rotation invariance:
/// `E|Re Z|^q = E|Z|^q · E|cos Θ|^q`.
pub fn absolute_moment_quadrature(s: f64, q: f64, field: Field) -> Result<f64> {
    validate(s, q)?;
    let real_part = if s == 2.0 {
        let m = normal_moment_quadrature(q);
        match field {
            Field::Real => return Ok(m),
            // Re Z ~ N(0, 1/2)
            Field::Complex => m * 0.5f64.powf(q / 2.0),
        }
    } else {
        let m = real_stable_moment_quadrature(s, q)?;
        if field == Field::Real {
            return Ok(m);
        }
        m
    };
    Ok(real_part / mean_abs_cos_power(q))
}

/// `c_{s,q}`: the `q`-th moment root of the one-dimensional law. The closed
/// form and the quadrature route must agree to [`AGREEMENT_TOL`].
pub fn constant_c(s: f64, q: f64, field: Field) -> Result<MomentConstant> {
    let closed = absolute_moment_closed_form(s, q, field)?.powf(1.0 / q);
    let quad = absolute_moment_quadrature(s, q, field)?.powf(1.0 / q);
    let c = MomentConstant { s, q, field, value: closed, closed_form: closed, quadrature: quad };
    if !(c.relative_disagreement() <= AGREEMENT_TOL) {
        return Err(Error::domain(format!(
            "c_(s={s}, q={q}) routes disagree: closed form {closed}, quadrature {quad}"
        )));
    }
    Ok(c)
}
