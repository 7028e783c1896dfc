//! Numerically stable scalar helpers.

use std::f64::consts::LN_2;

/// `ln(2 cosh x)` without overflow.
#[inline]
pub fn log_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

#[inline]
pub fn log_cosh(x: f64) -> f64 {
    log_2cosh(x) - LN_2
}

/// `e^x / (2 cosh x) = 1 / (1 + e^{-2x})`.
#[inline]
pub fn plus_probability(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-2.0 * x).exp())
    } else {
        let e = (2.0 * x).exp();
        e / (1.0 + e)
    }
}

/// Streaming `ln Σ e^{x_i}`.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        self.push_scaled(other.max, other.scaled);
    }

    fn push_scaled(&mut self, max: f64, scaled: f64) {
        if max <= self.max {
            self.scaled += scaled * (max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - max).exp() + scaled;
            self.max = max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    xs.iter().for_each(|&x| acc.push(x));
    acc.value()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_2cosh_matches_direct_and_survives_large_arguments() {
        for x in [-3.0, -0.5, 0.0, 0.1, 2.0, 7.5] {
            assert!((log_2cosh(x) - (2.0 * f64::cosh(x)).ln()).abs() < 1e-14);
        }
        assert!((log_2cosh(1000.0) - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn plus_probability_is_logistic() {
        for x in [-800.0, -2.0, 0.0, 0.3, 800.0] {
            let p = plus_probability(x);
            assert!((0.0..=1.0).contains(&p));
            assert!((p + plus_probability(-x) - 1.0).abs() < 1e-15);
        }
        assert!((plus_probability(0.7) - 0.7f64.exp() / (2.0 * 0.7f64.cosh())).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_merge() {
        let xs = [1.0, -2.0, 700.0, 699.0, f64::NEG_INFINITY];
        let mut a = LogSumExp::new();
        let mut b = LogSumExp::new();
        xs[..2].iter().for_each(|&x| a.push(x));
        xs[2..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let expected = 700.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((a.value() - expected).abs() < 1e-12);
        assert!((log_sum_exp(&xs) - expected).abs() < 1e-12);
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
