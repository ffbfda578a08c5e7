use crate::error::{Error, Result};

/// Gamma function on the positive reals.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Natural log of the Gamma function on the positive reals.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `Γ(x + a) / Γ(x)` computed through log-gamma so large `x` does not
/// overflow.
pub fn gamma_ratio(x: f64, a: f64) -> Result<f64> {
    Ok((ln_gamma(x + a)? - ln_gamma(x)?).exp())
}
