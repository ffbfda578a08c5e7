//! Small statistics toolkit: Kolmogorov–Smirnov tests, median-of-means,
//! weighted least squares.

/// One-sample KS statistic `sup |F_n − F|`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic Kolmogorov critical coefficient `c(α)` with
/// `P(√n·D > c) = α`.
fn kolmogorov_coefficient(alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt()
}

pub fn ks_critical_one(n: usize, alpha: f64) -> f64 {
    kolmogorov_coefficient(alpha) / (n as f64).sqrt()
}

pub fn ks_critical_two(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    kolmogorov_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n.is_multiple_of(2) {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    } else {
        v[n / 2]
    }
}

/// Median absolute deviation around the median, scaled by 1.4826 to be a
/// consistent estimate of the standard deviation under normality.
pub fn mad_sigma(values: &[f64]) -> f64 {
    let m = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    1.482_602_218_505_602 * median(&dev)
}

/// Mean of `values` after dropping the `trim` smallest and `trim` largest.
pub fn trimmed_mean(values: &[f64], trim: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.len() <= 2 * trim {
        return median(&v);
    }
    let kept = &v[trim..v.len() - trim];
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Standard error of [`trimmed_mean`] from the winsorized variance
/// (Tukey–McLaughlin).
pub fn trimmed_mean_se(values: &[f64], trim: usize) -> f64 {
    let n = values.len();
    if n < 2 || n <= 2 * trim {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[trim], v[n - 1 - trim]);
    let w: Vec<f64> = v.iter().map(|x| x.clamp(lo, hi)).collect();
    let mean = w.iter().sum::<f64>() / n as f64;
    let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let kept = (n - 2 * trim) as f64;
    var.sqrt() * (n as f64).sqrt() / kept
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// `sqrt(π/2)`: asymptotic inflation of the median's standard error over
/// the mean's for near-normal data.
pub const MEDIAN_EFFICIENCY: f64 = 1.253_314_137_315_500_3;

/// Weighted least-squares line `y ≈ a + b·x`; returns `(a, b)`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        sxy += wi * (xi - mx) * (yi - my);
        sxx += wi * (xi - mx) * (xi - mx);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Empirical quantile with linear interpolation, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_mean_drops_extremes() {
        let v = [100.0, 1.0, 2.0, 3.0, -50.0];
        assert_eq!(trimmed_mean(&v, 1), 2.0);
        assert_eq!(trimmed_mean(&v, 0), 56.0 / 5.0);
        assert_eq!(trimmed_mean(&v, 3), 2.0);
        // winsorized to [1, 3]: the standard error of the plain mean of that
        let se = trimmed_mean_se(&v, 1);
        let w = [3.0, 1.0, 2.0, 3.0, 1.0];
        let m = 2.0;
        let var = w.iter().map(|x: &f64| (x - m).powi(2)).sum::<f64>() / 4.0;
        assert!((se - var.sqrt() * 5f64.sqrt() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn median_and_mad() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((mad_sigma(&[1.0, 2.0, 3.0, 4.0, 5.0]) - 1.4826).abs() < 1e-3);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.2).collect();
        assert!((ks_two_sample(&a, &b) - 0.2).abs() < 0.01);
        assert!(ks_one_sample(&a, |x| x.clamp(0.0, 1.0)) < 0.002);
    }

    #[test]
    fn critical_values() {
        // tabulated c(0.01) = 1.6276
        assert!((ks_critical_one(1, 0.01) - 1.6276).abs() < 1e-3);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (a, b) = weighted_line_fit(&x, &y, &[1.0, 2.0, 3.0, 4.0]);
        assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
    }
}
