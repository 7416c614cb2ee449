//! Summary statistics with a fixed left-to-right summation order.

use serde::Serialize;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn stddev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn max(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NAN, f64::max)
}

pub fn min(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NAN, f64::min)
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).fold(f64::NAN, f64::max)
}

/// RMS deviation from the mean relative to the RMS value; 0 for an
/// identically zero series.
pub fn relative_spread(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let scale = rms(x);
    if scale == 0.0 {
        return 0.0;
    }
    let m = mean(x);
    rms(&x.iter().map(|v| v - m).collect::<Vec<_>>()) / scale
}

/// Finite entries of a series.
pub fn finite(x: &[f64]) -> Vec<f64> {
    x.iter().copied().filter(|v| v.is_finite()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// Summary over the finite entries of a series.
    pub fn of(x: &[f64]) -> Self {
        let v = finite(x);
        Self {
            count: v.len(),
            mean: mean(&v),
            stddev: stddev(&v),
            min: min(&v),
            max: max(&v),
        }
    }

    pub fn relative_stddev(&self) -> f64 {
        self.stddev / self.mean.abs()
    }
}
