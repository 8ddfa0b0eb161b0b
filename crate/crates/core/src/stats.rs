//! Order-fixed summation and sample moments.

use serde::{Deserialize, Serialize};

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and standard error of the mean, summed in slice order.
    pub fn of_mean(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Estimate { value: f64::NAN, se: f64::NAN };
        }
        let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
        if xs.len() < 2 {
            return Estimate { value: mean, se: f64::NAN };
        }
        let ss = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().value();
        Estimate {
            value: mean,
            se: (ss / (n - 1.0) / n).sqrt(),
        }
    }

    /// Binomial proportion with standard error `sqrt(p(1-p)/n)`.
    pub fn of_proportion(hits: u64, n: u64) -> Estimate {
        let p = hits as f64 / n as f64;
        Estimate {
            value: p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_se(&self, other: &Estimate) -> f64 {
        self.se.hypot(other.se)
    }
}

pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
