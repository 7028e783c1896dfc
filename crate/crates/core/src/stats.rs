//! Small statistics toolkit: batch means, least squares with a Student-t
//! interval, and the one-sample Kolmogorov–Smirnov statistic.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64) -> Self {
        Estimate { mean, stderr }
    }
}

/// Mean of `series` with the standard error from `n_batches` contiguous
/// batches (the tail that does not fill a batch is dropped from the error).
pub fn batch_means(series: &[f64], n_batches: usize) -> Estimate {
    let n = series.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let b = n_batches.min(n);
    let size = n / b;
    if b < 2 || size == 0 {
        return Estimate::new(mean, f64::NAN);
    }
    let batch: Vec<f64> = (0..b)
        .map(|i| series[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bm = batch.iter().sum::<f64>() / b as f64;
    let var = batch.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate::new(mean, (var / b as f64).sqrt())
}

/// Plain mean and standard error of independent values.
pub fn mean_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Estimate::new(mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate::new(mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% interval for the slope.
    pub slope_ci: (f64, f64),
    pub points: usize,
}

/// Ordinary least squares `y ≈ a + b x`; needs at least three points.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).ok()?.inverse_cdf(0.975);
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr: se,
        slope_ci: (slope - t * se, slope + t * se),
        points: n,
    })
}

/// `sup_x |F_n(x) − Φ(x)|` against the standard normal.
pub fn ks_statistic_normal(xs: &[f64]) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the KS statistic for `n` samples.
pub fn ks_critical_99(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_series() {
        let e = batch_means(&[2.0; 100], 10);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn ols_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, -3.0, -5.0];
        let fit = ols(&xs, &ys).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.slope_ci.1 - fit.slope_ci.0 < 1e-9);
        assert!(ols(&xs[..2], &ys[..2]).is_none());
    }

    #[test]
    fn ks_on_quantiles_is_small() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect();
        assert!(ks_statistic_normal(&xs) <= 0.5 / n as f64 + 1e-9);
        assert!((ks_critical_99(10000) - 0.016276).abs() < 1e-9);
    }
}
