//! Log-domain arithmetic for quantities that overflow `f64` when exponentiated.

/// `ln(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(exp(a) + exp(b) + exp(c))`, the log-length of a triangle.
#[inline]
pub fn log_sum_exp3(a: f64, b: f64, c: f64) -> f64 {
    let hi = a.max(b).max(c);
    hi + ((a - hi).exp() + (b - hi).exp() + (c - hi).exp()).ln()
}

/// Streaming log-sum-exp accumulator (one pass, rescales on a new maximum).
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSumExp {
    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    /// Adds `count` copies of `exp(x)`.
    #[inline]
    pub fn push_weighted(&mut self, x: f64, count: f64) {
        if count > 0.0 {
            self.push(x + count.ln());
        }
    }

    pub fn value(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum_for_moderate_values() {
        let xs = [0.3, -1.2, 2.5, 0.0, 1.0];
        let direct = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        let acc: LogSumExp = xs.iter().copied().collect();
        assert!((acc.value() - direct).abs() < 1e-14);
        assert!((log_add_exp(0.3, -1.2) - (0.3f64.exp() + (-1.2f64).exp()).ln()).abs() < 1e-15);
        assert!((log_sum_exp3(0.0, 0.0, 0.0) - 3f64.ln()).abs() == 0.0);
    }

    #[test]
    fn survives_huge_exponents() {
        let acc: LogSumExp = [800.0, 800.0, 10.0].into_iter().collect();
        assert!((acc.value() - (800.0 + 2f64.ln())).abs() < 1e-12);
        let mut w = LogSumExp::default();
        w.push_weighted(0.0, 1e6);
        w.push(700.0);
        assert!((w.value() - 700.0).abs() < 1e-12);
        assert_eq!(LogSumExp::default().value(), f64::NEG_INFINITY);
    }
}
