//! The NN operators built from samples f(k/n) on an integer interval [a, b]:
//! the normalized operator F_n, the simplified operator (no normalizer), and
//! its derivatives n^s sum f(k/n) phi^{(s)}(n x - k).

use crate::density::DensityKernel;
use crate::error::{Error, Result};
use crate::kahan::KahanSum;

/// Certified tail mass below which far nodes are skipped. The threshold is
/// consulted only through the decay certificates, so the skip is itself
/// certified, not heuristic; it keeps evaluation O(1) per point instead of
/// O(n).
pub const OPERATOR_SKIP_EPS: f64 = 1e-16;

/// Samples f(k/n), k = n a .. n b, on the integer interval [a, b].
#[derive(Debug, Clone)]
pub struct GridSample {
    pub n: u32,
    pub interval: (i64, i64),
    /// values[i] = f((n a + i) / n).
    pub values: Vec<f64>,
}

impl GridSample {
    pub fn k_range(&self) -> (i64, i64) {
        (
            self.n as i64 * self.interval.0,
            self.n as i64 * self.interval.1,
        )
    }

    pub fn value_at(&self, k: i64) -> f64 {
        let (lo, _) = self.k_range();
        self.values[(k - lo) as usize]
    }
}

/// Evaluate f at every node k/n. The operators never see f itself.
pub fn sample_function(
    f: impl Fn(f64) -> f64,
    n: u32,
    interval: (i64, i64),
) -> Result<GridSample> {
    let (a, b) = interval;
    if n == 0 || a >= b {
        return Err(Error::InvalidInterval { n, a, b });
    }
    let lo = n as i64 * a;
    let hi = n as i64 * b;
    let mut values = Vec::with_capacity((hi - lo + 1) as usize);
    for k in lo..=hi {
        let v = f(k as f64 / n as f64);
        if !v.is_finite() {
            return Err(Error::NonFiniteInput(v));
        }
        values.push(v);
    }
    Ok(GridSample {
        n,
        interval,
        values,
    })
}

/// Node window contributing more than the skip threshold at u = n x,
/// clipped to the sample range.
fn window(kernel: &DensityKernel, sample: &GridSample, s: usize, x: f64) -> Result<(i64, i64)> {
    let r = kernel.radius_for_tail(s, 0.0, OPERATOR_SKIP_EPS)?;
    let u = sample.n as f64 * x;
    let (lo, hi) = sample.k_range();
    Ok((lo.max((u - r).ceil() as i64), hi.min((u + r).floor() as i64)))
}

/// Simplified operator: sum f(k/n) phi(n x - k), no normalizer.
pub fn nn_operator_simplified(
    kernel: &DensityKernel,
    sample: &GridSample,
    x: f64,
) -> Result<f64> {
    weighted_sum(kernel, sample, 0, x)
}

/// Normalized operator F_n(f, x): the simplified sum divided by the
/// truncated mass sum phi(n x - k) over the same nodes.
pub fn nn_operator(kernel: &DensityKernel, sample: &GridSample, x: f64) -> Result<f64> {
    let (lo, hi) = window(kernel, sample, 0, x)?;
    let u = sample.n as f64 * x;
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for k in lo..=hi {
        let w = kernel.phi(0, u - k as f64)?;
        num.add(sample.value_at(k) * w);
        den.add(w);
    }
    let mass = den.value();
    // The truncated mass can only degenerate when x sits far outside [a, b];
    // dividing by it there would amplify skipped-tail noise unboundedly.
    if mass <= 1e3 * OPERATOR_SKIP_EPS {
        return Err(Error::Config(format!(
            "degenerate normalizer {mass:.3e} at x = {x}; evaluate inside the sample interval"
        )));
    }
    Ok(num.value() / mass)
}

/// Derivative of the simplified operator:
/// n^s sum f(k/n) phi^{(s)}(n x - k).
pub fn nn_operator_derivative(
    kernel: &DensityKernel,
    sample: &GridSample,
    s: usize,
    x: f64,
) -> Result<f64> {
    let base = weighted_sum(kernel, sample, s, x)?;
    Ok((sample.n as f64).powi(s as i32) * base)
}

fn weighted_sum(kernel: &DensityKernel, sample: &GridSample, s: usize, x: f64) -> Result<f64> {
    let (lo, hi) = window(kernel, sample, s, x)?;
    let u = sample.n as f64 * x;
    let mut acc = KahanSum::new();
    for k in lo..=hi {
        acc.add(sample.value_at(k) * kernel.phi(s, u - k as f64)?);
    }
    Ok(acc.value())
}
