//! Convergence studies: sup-error measurement on the shrunken interval
//! I_delta, empirical-order regression, modulus of continuity, the
//! quantitative error bounds for simultaneous approximation, and
//! Voronovskaja residual tracking.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::DensityKernel;
use crate::error::{Error, Result};
use crate::moments::{absolute_moment, algebraic_moment, bound_constant};
use crate::operators::{
    nn_operator_derivative, nn_operator_simplified, sample_function, GridSample,
};

/// Default sup-estimation grid on I_delta.
pub const DEFAULT_GRID: usize = 241;
/// Absolute-moment grid used inside the bound evaluators.
const MOMENT_GRID: usize = 1024;
/// |A_j| below this counts as a vanishing moment when gating Voronovskaja
/// hypotheses; above it (for j = m) as a usable non-zero limit constant.
const MOMENT_GATE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Constant,
    Identity,
    Square,
    Sin,
    DampedOsc,
}

/// A test function with closed-form derivatives of every order and
/// closed-form upper bounds for the sup-norms entering the error bounds.
#[derive(Debug, Clone)]
pub struct TestFunction {
    id: &'static str,
    kind: Kind,
}

pub const FUNCTION_IDS: [&str; 5] = ["constant", "identity", "square", "sin", "damped-osc"];

impl TestFunction {
    pub fn by_id(id: &str) -> Result<Self> {
        let kind = match id {
            "constant" => Kind::Constant,
            "identity" => Kind::Identity,
            "square" => Kind::Square,
            "sin" => Kind::Sin,
            "damped-osc" => Kind::DampedOsc,
            other => {
                return Err(Error::Config(format!(
                    "unknown function id {other:?}; known: {FUNCTION_IDS:?}"
                )))
            }
        };
        Ok(Self {
            id: match kind {
                Kind::Constant => "constant",
                Kind::Identity => "identity",
                Kind::Square => "square",
                Kind::Sin => "sin",
                Kind::DampedOsc => "damped-osc",
            },
            kind,
        })
    }

    pub fn id(&self) -> &'static str {
        self.id
    }

    /// f^{(order)}(x), closed form.
    pub fn eval(&self, order: usize, x: f64) -> f64 {
        match self.kind {
            Kind::Constant => {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Identity => match order {
                0 => x,
                1 => 1.0,
                _ => 0.0,
            },
            Kind::Square => match order {
                0 => x * x,
                1 => 2.0 * x,
                2 => 2.0,
                _ => 0.0,
            },
            Kind::Sin => (x + order as f64 * std::f64::consts::FRAC_PI_2).sin(),
            // f(x) = e^{-x} sin 2x = Im e^{(-1+2i)x}; differentiate the
            // exponential and take imaginary parts.
            Kind::DampedOsc => {
                let z = Complex64::new(-1.0, 2.0);
                (z.powu(order as u32) * (z * x).exp()).im
            }
        }
    }

    /// Closed-form upper bound for sup of |f^{(order)}| on [a, b].
    pub fn sup_norm(&self, order: usize, interval: (i64, i64)) -> f64 {
        let (a, b) = interval;
        let edge = (a.abs().max(b.abs())) as f64;
        match self.kind {
            Kind::Constant => {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Identity => match order {
                0 => edge,
                1 => 1.0,
                _ => 0.0,
            },
            Kind::Square => match order {
                0 => edge * edge,
                1 => 2.0 * edge,
                2 => 2.0,
                _ => 0.0,
            },
            Kind::Sin => 1.0,
            // |(-1+2i)^s e^{(-1+2i)x}| = 5^{s/2} e^{-x} <= 5^{s/2} e^{-a}.
            Kind::DampedOsc => 5.0f64.powf(order as f64 / 2.0) * (-(a as f64)).exp(),
        }
    }
}

/// Grid estimate of the modulus of continuity
/// sup { |g(x) - g(t)| : x, t in [lo, hi], |x - t| <= h },
/// with a refinement pass around the maximizing pair. Lower estimate.
pub fn modulus_of_continuity(
    g: impl Fn(f64) -> f64,
    h: f64,
    interval: (f64, f64),
    grid_resolution: usize,
) -> f64 {
    assert!(h > 0.0 && grid_resolution >= 2);
    let (lo, hi) = interval;
    let scan = |lo: f64, hi: f64, res: usize| -> (f64, f64, f64) {
        let step = (hi - lo) / res as f64;
        let vals: Vec<f64> = (0..=res).map(|i| g(lo + i as f64 * step)).collect();
        let w = (h / step).floor() as usize;
        let mut best = 0.0;
        let mut best_pair = (lo, lo);
        for i in 0..=res {
            for j in (i + 1)..=(i + w).min(res) {
                let d = (vals[j] - vals[i]).abs();
                if d > best {
                    best = d;
                    best_pair = (lo + i as f64 * step, lo + j as f64 * step);
                }
            }
        }
        (best, best_pair.0, best_pair.1)
    };
    let (mut best, px, pt) = scan(lo, hi, grid_resolution);
    // Refine in a window around the maximizer; keeps the pair constraint
    // |x - t| <= h because the window itself has width <= h + 2 steps only
    // when re-checked below.
    let step = (hi - lo) / grid_resolution as f64;
    let rlo = (px - step).max(lo);
    let rhi = (pt + step).min(hi);
    if rhi > rlo {
        let fine = 256;
        let fstep = (rhi - rlo) / fine as f64;
        let vals: Vec<f64> = (0..=fine).map(|i| g(rlo + i as f64 * fstep)).collect();
        let w = (h / fstep).floor() as usize;
        for i in 0..=fine {
            for j in (i + 1)..=(i + w).min(fine) {
                best = best.max((vals[j] - vals[i]).abs());
            }
        }
    }
    best
}

/// Grid sup of |approx - target| on [a + delta, b - delta]. Interior points
/// are jittered deterministically from `seed` so grid-aligned error nodes
/// cannot hide structure; endpoints stay fixed.
pub fn sup_error(
    approx: impl Fn(f64) -> Result<f64>,
    target: impl Fn(f64) -> f64,
    delta: f64,
    interval: (i64, i64),
    grid_resolution: usize,
    seed: u64,
) -> Result<f64> {
    let lo = interval.0 as f64 + delta;
    let hi = interval.1 as f64 - delta;
    if !(hi > lo) || grid_resolution < 2 {
        return Err(Error::Config(format!(
            "empty evaluation interval [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (grid_resolution - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..grid_resolution {
        let mut x = lo + i as f64 * step;
        if i > 0 && i + 1 < grid_resolution {
            x += step * (rng.gen::<f64>() - 0.5);
        }
        worst = worst.max((approx(x)? - target(x)).abs());
    }
    Ok(worst)
}

/// omega(f^{(s)}, h) upper bound from the closed-form next derivative,
/// capped by the trivial 2 sup bound.
fn modulus_upper(tf: &TestFunction, s: usize, h: f64, interval: (i64, i64)) -> f64 {
    (h * tf.sup_norm(s + 1, interval)).min(2.0 * tf.sup_norm(s, interval))
}

/// Quantitative bound for |d^s F-tilde_n(f) - f^{(s)}| on I_delta:
///
///   2 sum_{i=0..s} (||f^{(i)}||/i!) Rbar_{beta,s,i} n^{s-i-(beta-i+1)/2}
/// + (omega(f^{(s)}, 1/n)/s!) [M_s(phi^{(s)}) + M_{s+1}(phi^{(s)})].
pub fn theoretical_bound_simultaneous(
    kernel: &DensityKernel,
    tf: &TestFunction,
    s: usize,
    n: u32,
    delta: f64,
    interval: (i64, i64),
) -> Result<f64> {
    let beta = kernel.beta();
    if beta <= (2 * s.max(1)) as f64 {
        return Err(Error::HypothesisViolation(format!(
            "polynomial decay exponent {beta} <= 2 * {s} for the simultaneous bound"
        )));
    }
    let c_s = kernel.phi_decay_constants()[s].c;
    let nf = n as f64;
    let mut residual = 0.0;
    let mut fact = 1.0;
    for i in 0..=s {
        if i > 0 {
            fact *= i as f64;
        }
        let rbar = bound_constant(beta, i, delta, c_s)?;
        residual += (tf.sup_norm(i, interval) / fact)
            * rbar
            * nf.powf(s as f64 - i as f64 - (beta - i as f64 + 1.0) / 2.0);
    }
    let m_s = absolute_moment(kernel, s, s as f64, MOMENT_GRID)?;
    let m_s1 = absolute_moment(kernel, s, s as f64 + 1.0, MOMENT_GRID)?;
    let moments = m_s.value + m_s.tail_bound + m_s1.value + m_s1.tail_bound;
    let s_fact: f64 = (1..=s).product::<usize>() as f64;
    Ok(2.0 * residual + modulus_upper(tf, s, 1.0 / nf, interval) / s_fact * moments)
}

/// Gate the Voronovskaja hypotheses: alpha > 2m, A_j(phi) = 0 for
/// j = 1..m-1, A_m(phi) != 0. The moment scan is numerical, so "zero" and
/// "non-zero" are separated by MOMENT_GATE.
fn check_voronovskaja_hypotheses(kernel: &DensityKernel, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Config("voronovskaja needs m >= 1".into()));
    }
    let alpha = kernel.alpha();
    if alpha <= (2 * m) as f64 {
        return Err(Error::HypothesisViolation(format!(
            "integrable decay exponent {alpha} <= 2m = {}",
            2 * m
        )));
    }
    for j in 1..m {
        let a = algebraic_moment(kernel, 0, j as u32, 0.25, 1e-10)?.value;
        if a.abs() > MOMENT_GATE {
            return Err(Error::HypothesisViolation(format!(
                "moment A_{j} = {a:.3e} does not vanish"
            )));
        }
    }
    let a_m = algebraic_moment(kernel, 0, m as u32, 0.25, 1e-10)?.value;
    if a_m.abs() <= MOMENT_GATE {
        return Err(Error::HypothesisViolation(format!(
            "limit moment A_{m} = {a_m:.3e} vanishes; no order-{m} Voronovskaja formula"
        )));
    }
    Ok(a_m)
}

/// Bound on |n^m (F-tilde_n f - f)(x) - f^{(m)}(x) A_m / m!| on I_delta.
pub fn theoretical_bound_voronovskaja(
    kernel: &DensityKernel,
    tf: &TestFunction,
    m: usize,
    n: u32,
    delta: f64,
    interval: (i64, i64),
) -> Result<f64> {
    check_voronovskaja_hypotheses(kernel, m)?;
    let alpha = kernel.alpha();
    let c_0 = kernel.phi_decay_constants()[0].c;
    let nf = n as f64;
    let mut residual = 0.0;
    let mut fact = 1.0;
    for i in 0..=m {
        if i > 0 {
            fact *= i as f64;
        }
        let rbar = bound_constant(alpha, i, delta, c_0)?;
        residual += (tf.sup_norm(i, interval) / fact)
            * rbar
            * nf.powf(m as f64 - i as f64 - (alpha - i as f64 + 1.0) / 2.0);
    }
    let m_m = absolute_moment(kernel, 0, m as f64, MOMENT_GRID)?;
    let m_m1 = absolute_moment(kernel, 0, m as f64 + 1.0, MOMENT_GRID)?;
    let moments = m_m.value + m_m.tail_bound + m_m1.value + m_m1.tail_bound;
    let m_fact: f64 = (1..=m).product::<usize>() as f64;
    Ok(2.0 * residual + modulus_upper(tf, m, 1.0 / nf, interval) / m_fact * moments)
}

/// The predicted Voronovskaja limit f^{(m)}(x) A_m(x) / m!.
pub fn voronovskaja_limit(
    kernel: &DensityKernel,
    tf: &TestFunction,
    m: usize,
    x: f64,
) -> Result<f64> {
    let a_m = algebraic_moment(kernel, 0, m as u32, x, 1e-10)?.value;
    let m_fact: f64 = (1..=m).product::<usize>() as f64;
    Ok(tf.eval(m, x) * a_m / m_fact)
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub s: usize,
    pub n: u32,
    pub sup_error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct OrderFit {
    pub s: usize,
    pub order: f64,
    pub fit_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub orders: Vec<OrderFit>,
}

impl ConvergenceReport {
    pub fn order_for(&self, s: usize) -> f64 {
        self.orders
            .iter()
            .find(|o| o.s == s)
            .map(|o| o.order)
            .unwrap_or(f64::NAN)
    }

    pub fn bound_dominates(&self) -> bool {
        self.rows.iter().all(|r| r.sup_error <= r.bound)
    }
}

fn check_n_list(n_list: &[u32]) -> Result<()> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::Config(format!(
            "n_list must be strictly increasing with >= 2 entries, got {n_list:?}"
        )));
    }
    Ok(())
}

/// Least squares on (log n, log error), dropping the first (pre-asymptotic)
/// point; returns (-slope, rms fit residual).
fn empirical_order(ns: &[u32], errors: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errors)
        .skip(1)
        .map(|(&n, &e)| ((n as f64).ln(), e.max(1e-30).ln()))
        .collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    (-slope, (rss / len).sqrt())
}

/// Per (s, n): sup error of d^s F-tilde_n against f^{(s)} on I_delta (the
/// normalized operator for s = 0 is reported through `eval`, not here),
/// paired with the theorem bound; per s: the fitted empirical order.
pub fn convergence_study(
    kernel: &DensityKernel,
    tf: &TestFunction,
    s_list: &[usize],
    n_list: &[u32],
    delta: f64,
    interval: (i64, i64),
    grid_resolution: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    check_n_list(n_list)?;
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for &s in s_list {
        let mut errors = Vec::new();
        for &n in n_list {
            let sample = sample_function(|t| tf.eval(0, t), n, interval)?;
            let err = sup_error(
                |x| operator_order(kernel, &sample, s, x),
                |x| tf.eval(s, x),
                delta,
                interval,
                grid_resolution,
                seed,
            )?;
            let bound = theoretical_bound_simultaneous(kernel, tf, s, n, delta, interval)?;
            rows.push(ConvergenceRow {
                s,
                n,
                sup_error: err,
                bound,
            });
            errors.push(err);
        }
        let (order, fit_residual) = empirical_order(n_list, &errors);
        orders.push(OrderFit {
            s,
            order,
            fit_residual,
        });
    }
    Ok(ConvergenceReport { rows, orders })
}

fn operator_order(
    kernel: &DensityKernel,
    sample: &GridSample,
    s: usize,
    x: f64,
) -> Result<f64> {
    if s == 0 {
        nn_operator_simplified(kernel, sample, x)
    } else {
        nn_operator_derivative(kernel, sample, s, x)
    }
}

#[derive(Debug, Clone)]
pub struct VoronovskajaRow {
    pub n: u32,
    pub x: f64,
    pub scaled_residual: f64,
    pub predicted_limit: f64,
    pub abs_deviation: f64,
    pub bound: f64,
}

/// Scaled residuals n^m (F-tilde_n f - f)(x) against the predicted limit,
/// with the theorem bound per row. Fails fast when the order-m hypotheses
/// do not hold for this kernel.
pub fn voronovskaja_study(
    kernel: &DensityKernel,
    tf: &TestFunction,
    m: usize,
    n_list: &[u32],
    x_list: &[f64],
    delta: f64,
    interval: (i64, i64),
) -> Result<Vec<VoronovskajaRow>> {
    check_n_list(n_list)?;
    check_voronovskaja_hypotheses(kernel, m)?;
    let lo = interval.0 as f64 + delta;
    let hi = interval.1 as f64 - delta;
    let mut rows = Vec::new();
    for &x in x_list {
        if !(lo <= x && x <= hi) {
            return Err(Error::Config(format!(
                "x = {x} outside the guaranteed interval [{lo}, {hi}]"
            )));
        }
        let predicted = voronovskaja_limit(kernel, tf, m, x)?;
        for &n in n_list {
            let sample = sample_function(|t| tf.eval(0, t), n, interval)?;
            let approx = nn_operator_simplified(kernel, &sample, x)?;
            let scaled = (n as f64).powi(m as i32) * (approx - tf.eval(0, x));
            rows.push(VoronovskajaRow {
                n,
                x,
                scaled_residual: scaled,
                predicted_limit: predicted,
                abs_deviation: (scaled - predicted).abs(),
                bound: theoretical_bound_voronovskaja(kernel, tf, m, n, delta, interval)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigmoid::Sigmoidal;
    use std::sync::Arc;

    fn kernel() -> DensityKernel {
        DensityKernel::new(Arc::new(Sigmoidal::logistic(4, 8.0, 8.0).unwrap())).unwrap()
    }

    #[test]
    fn corpus_derivatives_consistent() {
        let h = 1e-4;
        for id in FUNCTION_IDS {
            let tf = TestFunction::by_id(id).unwrap();
            for s in 0..=3usize {
                for i in 0..30 {
                    let x = 0.1 + i as f64 * 0.1;
                    let fd = (tf.eval(s, x + h) - tf.eval(s, x - h)) / (2.0 * h);
                    let exact = tf.eval(s + 1, x);
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (fd - exact).abs() / scale <= 1e-6,
                        "{id} s={s} x={x}: {fd} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn corpus_sup_norms_dominate_samples() {
        for id in FUNCTION_IDS {
            let tf = TestFunction::by_id(id).unwrap();
            for s in 0..=4usize {
                let sup = tf.sup_norm(s, (0, 3));
                for i in 0..=300 {
                    let x = i as f64 * 0.01;
                    assert!(
                        tf.eval(s, x).abs() <= sup + 1e-12,
                        "{id} s={s} x={x}: {} > {sup}",
                        tf.eval(s, x)
                    );
                }
            }
        }
    }

    #[test]
    fn unknown_function_rejected() {
        assert!(matches!(
            TestFunction::by_id("nope"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn modulus_basics() {
        let w = modulus_of_continuity(|x| x, 0.1, (0.0, 3.0), 2000);
        assert!((w - 0.1).abs() <= 2e-3, "{w}");
        assert_eq!(modulus_of_continuity(|_| 4.2, 0.3, (0.0, 3.0), 500), 0.0);
        // Monotone in h and subadditive.
        let tf = TestFunction::by_id("damped-osc").unwrap();
        let g = |x: f64| tf.eval(0, x);
        let w1 = modulus_of_continuity(g, 0.05, (0.0, 3.0), 2000);
        let w2 = modulus_of_continuity(g, 0.1, (0.0, 3.0), 2000);
        assert!(w2 >= w1);
        assert!(w2 <= 2.0 * w1 * 1.01, "{w2} vs {w1}");
    }

    #[test]
    fn sup_error_basics() {
        let f = |x: f64| x.sin();
        assert_eq!(
            sup_error(|x| Ok(f(x)), f, 0.25, (0, 3), 241, 0).unwrap(),
            0.0
        );
        let off = sup_error(|x| Ok(f(x) + 1e-3), f, 0.25, (0, 3), 241, 0).unwrap();
        assert!((off - 1e-3).abs() < 1e-15);
        // Resolution stability on a smooth error profile.
        let tf = TestFunction::by_id("sin").unwrap();
        let k = kernel();
        let sample = sample_function(|t| tf.eval(0, t), 40, (0, 3)).unwrap();
        let coarse = sup_error(
            |x| nn_operator_simplified(&k, &sample, x),
            |x| tf.eval(0, x),
            0.25,
            (0, 3),
            241,
            0,
        )
        .unwrap();
        let fine = sup_error(
            |x| nn_operator_simplified(&k, &sample, x),
            |x| tf.eval(0, x),
            0.25,
            (0, 3),
            482,
            0,
        )
        .unwrap();
        assert!((coarse - fine).abs() <= 0.1 * fine.max(coarse));
    }

    #[test]
    fn bound_decreases_and_dominates() {
        let k = kernel();
        let tf = TestFunction::by_id("sin").unwrap();
        let mut prev = f64::INFINITY;
        for n in [20u32, 40, 80, 160] {
            let b = theoretical_bound_simultaneous(&k, &tf, 1, n, 0.25, (0, 3)).unwrap();
            assert!(b > 0.0 && b < prev, "n={n}: {b}");
            prev = b;
            let sample = sample_function(|t| tf.eval(0, t), n, (0, 3)).unwrap();
            let err = sup_error(
                |x| nn_operator_derivative(&k, &sample, 1, x),
                |x| tf.eval(1, x),
                0.25,
                (0, 3),
                121,
                0,
            )
            .unwrap();
            assert!(err <= b, "n={n}: measured {err} > bound {b}");
        }
    }

    #[test]
    fn hypothesis_gates() {
        // beta = 3 <= 2 * 2: the simultaneous bound at s = 2 must refuse.
        let weak = DensityKernel::new(Arc::new(Sigmoidal::logistic(4, 3.0, 3.0).unwrap())).unwrap();
        let tf = TestFunction::by_id("sin").unwrap();
        assert!(matches!(
            theoretical_bound_simultaneous(&weak, &tf, 2, 50, 0.25, (0, 3)),
            Err(Error::HypothesisViolation(_))
        ));
        // m = 3 for the logistic: A_3 = 0, so no order-3 limit formula.
        let k = kernel();
        assert!(matches!(
            theoretical_bound_voronovskaja(&k, &tf, 3, 50, 0.25, (0, 3)),
            Err(Error::HypothesisViolation(_))
        ));
        // m = 2 passes: A_1 = 0, A_2 != 0.
        assert!(theoretical_bound_voronovskaja(&k, &tf, 2, 50, 0.25, (0, 3)).unwrap() > 0.0);
    }

    #[test]
    fn convergence_study_orders() {
        let k = kernel();
        let tf = TestFunction::by_id("sin").unwrap();
        let report =
            convergence_study(&k, &tf, &[0, 1], &[20, 40, 80, 160], 0.25, (0, 3), 121, 0)
                .unwrap();
        assert!(report.bound_dominates());
        let order0 = report.order_for(0);
        assert!((order0 - 2.0).abs() <= 0.2, "order {order0}");
        assert!(report.order_for(1) >= 0.9);
        for s in [0usize, 1] {
            let errs: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.s == s)
                .map(|r| r.sup_error)
                .collect();
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "s={s}: {errs:?}");
        }
    }

    #[test]
    fn constant_function_annihilates() {
        let k = kernel();
        let tf = TestFunction::by_id("constant").unwrap();
        let report =
            convergence_study(&k, &tf, &[1, 2], &[20, 40], 0.25, (0, 3), 61, 0).unwrap();
        for row in &report.rows {
            // Exact annihilation up to the m^n_0(phi^{(s)}) boundary decay:
            // the nearest interval endpoint is n * delta nodes away, so the
            // residual is n^s e^{-n delta} scale, not round-off scale.
            let tail_scale = 10.0 * (row.n as f64).powi(row.s as i32)
                * (-0.25 * row.n as f64).exp();
            assert!(
                row.sup_error <= tail_scale,
                "s={} n={}: {} > {tail_scale}",
                row.s,
                row.n,
                row.sup_error
            );
        }
        for s in [1usize, 2] {
            let errs: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.s == s)
                .map(|r| r.sup_error)
                .collect();
            assert!(errs[1] < errs[0], "s={s}: {errs:?}");
        }
    }

    #[test]
    fn voronovskaja_square() {
        let k = kernel();
        let tf = TestFunction::by_id("square").unwrap();
        let rows = voronovskaja_study(&k, &tf, 2, &[100, 200, 400], &[1.5], 0.25, (0, 3)).unwrap();
        // f'' = 2, predicted limit = A_2.
        for row in &rows {
            assert!((row.predicted_limit - 3.6232).abs() < 1e-3);
            assert!(row.abs_deviation <= row.bound, "n={}", row.n);
        }
        let last = rows.last().unwrap();
        assert!((last.scaled_residual - 3.6232).abs() <= 0.05 * 3.6232);
    }

    #[test]
    fn voronovskaja_linear_residual_vanishes() {
        let k = kernel();
        let tf = TestFunction::by_id("identity").unwrap();
        let rows = voronovskaja_study(&k, &tf, 2, &[100, 200], &[1.5], 0.25, (0, 3)).unwrap();
        for row in &rows {
            assert!(row.scaled_residual.abs() <= 1e-6, "n={}: {}", row.n, row.scaled_residual);
        }
    }

    #[test]
    fn bad_n_list_rejected() {
        let k = kernel();
        let tf = TestFunction::by_id("sin").unwrap();
        for bad in [vec![50u32], vec![50, 50], vec![80, 40]] {
            assert!(matches!(
                convergence_study(&k, &tf, &[0], &bad, 0.25, (0, 3), 61, 0),
                Err(Error::Config(_))
            ));
        }
    }
}
