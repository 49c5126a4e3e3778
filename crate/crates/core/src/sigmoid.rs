//! Catalog of sigmoidal activations with exact derivative evaluation.
//!
//! Each catalog entry evaluates sigma^{(s)} through a closed-form polynomial
//! recurrence, never through numerical differentiation:
//!
//! * logistic: sigma^{(s)}(x) = u(1-u) * q_s(u) with u = sigma(x), where
//!   q_{s+1}(u) = (1-2u) q_s(u) + u(1-u) q_s'(u), q_1 = 1;
//! * tanh entry sigma_h(x) = (1 + tanh x)/2: sigma_h^{(s)}(x) = sech^2(x) * q_s(t)
//!   with t = tanh x, q_{s+1}(t) = -2t q_s(t) + (1-t^2) q_s'(t), q_1 = 1/2.
//!
//! Factoring out u(1-u) (resp. sech^2) keeps full relative accuracy in the
//! tails, where the raw polynomials would cancel catastrophically.

use crate::error::{Error, Result};

/// Highest derivative order the precomputed tables cover.
pub const MAX_ORDER: usize = 6;

/// Default scan window for the decay-constant fit.
pub const DEFAULT_SCAN: (f64, f64) = (1.0, 80.0);
const SCAN_GRID: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationKind {
    Logistic,
    Tanh,
}

/// The pair (K_s, C_s): |sigma^{(s)}(x)| <= C_s |x|^{-exponent-1} for |x| >= K_s.
#[derive(Debug, Clone, Copy)]
pub struct DecayConstants {
    pub k: f64,
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub name: String,
    pub worst: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// A sigmoidal activation with exact derivative evaluators and verified
/// decay metadata.
#[derive(Debug, Clone)]
pub struct Sigmoidal {
    id: String,
    kind: ActivationKind,
    max_order: usize,
    alpha: f64,
    beta: f64,
    /// q_s coefficient tables, index s-1 for s = 1..=max_order.
    factors: Vec<Vec<f64>>,
    /// lambda in |sigma^{(s)}(x)| <= D_s e^{-lambda |x|} (s >= 1) and
    /// sigma(x) <= D_0 e^{lambda x} (x <= 0).
    exp_rate: f64,
    exp_coeffs: Vec<f64>,
    /// Fitted (K_s, C_s); index 0 is the left-tail alpha certificate for
    /// sigma itself, index s >= 1 certifies sigma^{(s)} against beta.
    decay: Vec<DecayConstants>,
}

/// Numerically stable logistic value.
fn stable_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| j as f64 * c)
        .collect()
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

/// a(x) * (c0 + c1 x + c2 x^2)
fn poly_mul_quadratic(a: &[f64], c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + 2];
    for (i, &c) in a.iter().enumerate() {
        out[i] += c * c0;
        out[i + 1] += c * c1;
        out[i + 2] += c * c2;
    }
    out
}

/// Fit (K, C) such that f(x) <= C x^{-exponent-1} on the scan window, with a
/// 10% safety factor on C. Fails when f decays too slowly for the requested
/// exponent (the scanned product keeps growing at the right edge).
pub fn fit_tail_constants(
    f: impl Fn(f64) -> f64,
    exponent: f64,
    scan: (f64, f64),
    grid: usize,
) -> Result<DecayConstants> {
    let (k_min, x_max) = scan;
    if !(k_min > 0.0 && x_max > k_min) {
        return Err(Error::FitFailure(format!("bad scan window {scan:?}")));
    }
    let step = (x_max - k_min) / (grid - 1) as f64;
    let products: Vec<f64> = (0..grid)
        .map(|i| {
            let x = k_min + i as f64 * step;
            f(x) * x.powf(exponent + 1.0)
        })
        .collect();
    let (argmax, &max) = products
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan grid");
    if !max.is_finite() {
        return Err(Error::FitFailure("scanned product overflowed".into()));
    }
    // Unbounded growth shows up as a maximum pinned to the right edge that is
    // still rising there.
    let tail_start = grid - grid / 50 - 1;
    if argmax >= tail_start && products[grid - 1] > products[grid - 1 - grid / 10] {
        return Err(Error::FitFailure(format!(
            "product f(x) * x^{} still increasing at scan edge x = {x_max}",
            exponent + 1.0
        )));
    }
    Ok(DecayConstants {
        k: k_min,
        c: 1.1 * max,
    })
}

impl Sigmoidal {
    pub fn logistic(max_order: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::build("logistic", ActivationKind::Logistic, max_order, alpha, beta)
    }

    pub fn tanh(max_order: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::build("tanh", ActivationKind::Tanh, max_order, alpha, beta)
    }

    /// Catalog lookup by string id with the default regime beta = alpha = 2m + 2,
    /// under which both the simultaneous-approximation and the Voronovskaja
    /// bounds apply.
    pub fn by_id(id: &str, max_order: usize) -> Result<Self> {
        let exp = (2 * max_order + 2) as f64;
        match id {
            "logistic" => Self::logistic(max_order, exp, exp),
            "tanh" => Self::tanh(max_order, exp, exp),
            other => Err(Error::Config(format!("unknown activation id: {other}"))),
        }
    }

    fn build(
        id: &str,
        kind: ActivationKind,
        max_order: usize,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if max_order < 2 || max_order > MAX_ORDER {
            return Err(Error::OrderOutOfRange {
                order: max_order,
                max: MAX_ORDER,
            });
        }
        if !(alpha > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!(
                "inadmissible decay exponents alpha={alpha}, beta={beta}"
            )));
        }
        let mut factors: Vec<Vec<f64>> = Vec::with_capacity(max_order);
        let (first, exp_rate): (Vec<f64>, f64) = match kind {
            ActivationKind::Logistic => (vec![1.0], 1.0),
            ActivationKind::Tanh => (vec![0.5], 2.0),
        };
        factors.push(first);
        for _ in 1..max_order {
            let q = factors.last().unwrap();
            let dq = poly_derivative(q);
            let next = match kind {
                // (1-2u) q + u(1-u) q'
                ActivationKind::Logistic => poly_add(
                    &poly_mul_quadratic(q, 1.0, -2.0, 0.0),
                    &poly_mul_quadratic(&dq, 0.0, 1.0, -1.0),
                ),
                // -2t q + (1-t^2) q'
                ActivationKind::Tanh => poly_add(
                    &poly_mul_quadratic(q, 0.0, -2.0, 0.0),
                    &poly_mul_quadratic(&dq, 1.0, 0.0, -1.0),
                ),
            };
            factors.push(next);
        }
        let prefactor_bound = match kind {
            ActivationKind::Logistic => 1.0, // u(1-u) <= e^{-|x|}
            ActivationKind::Tanh => 4.0,     // sech^2 x <= 4 e^{-2|x|}
        };
        let mut exp_coeffs = vec![1.0]; // sigma(x) <= e^{lambda x}, x <= 0
        for q in &factors {
            let coeff_sum: f64 = q.iter().map(|c| c.abs()).sum();
            exp_coeffs.push(prefactor_bound * coeff_sum);
        }
        let mut sig = Self {
            id: id.to_string(),
            kind,
            max_order,
            alpha,
            beta,
            factors,
            exp_rate,
            exp_coeffs,
            decay: Vec::new(),
        };
        sig.decay = sig.fit_decay_constants(beta, DEFAULT_SCAN)?;
        Ok(sig)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn decay_constants(&self) -> &[DecayConstants] {
        &self.decay
    }

    /// Certified exponential tail: |sigma^{(s)}(x)| <= coeffs[s] e^{-rate |x|}
    /// for s >= 1 (for s = 0 the bound reads sigma(x) <= coeffs[0] e^{rate x},
    /// x <= 0).
    pub fn exp_tail(&self) -> (f64, &[f64]) {
        (self.exp_rate, &self.exp_coeffs)
    }

    /// Replace the fitted decay constants (used to exercise axiom failures).
    pub fn with_decay_override(mut self, decay: Vec<DecayConstants>) -> Self {
        self.decay = decay;
        self
    }

    /// sigma^{(s)}(x), exact to machine precision.
    pub fn eval(&self, s: usize, x: f64) -> Result<f64> {
        if s > self.max_order {
            return Err(Error::OrderOutOfRange {
                order: s,
                max: self.max_order,
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFiniteInput(x));
        }
        if s == 0 {
            return Ok(match self.kind {
                ActivationKind::Logistic => stable_logistic(x),
                ActivationKind::Tanh => stable_logistic(2.0 * x),
            });
        }
        // sigma - 1/2 odd  =>  sigma^{(s)}(x) = (-1)^{s+1} sigma^{(s)}(-x);
        // evaluate on the left tail where the factored form is well conditioned.
        let xa = -x.abs();
        let sign = if x > 0.0 && s % 2 == 0 { -1.0 } else { 1.0 };
        let q = &self.factors[s - 1];
        let val = match self.kind {
            ActivationKind::Logistic => {
                let e = xa.exp();
                let w = e / ((1.0 + e) * (1.0 + e)); // u(1-u), full relative accuracy
                w * horner(q, stable_logistic(xa))
            }
            ActivationKind::Tanh => {
                let e = (2.0 * xa).exp();
                let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
                sech2 * horner(q, xa.tanh())
            }
        };
        Ok(sign * val)
    }

    /// Fit (K_s, C_s) per order against the polynomial bound
    /// |sigma^{(s)}(x)| <= C_s |x|^{-beta-1}; the s = 0 entry certifies the
    /// left tail of sigma itself against alpha.
    pub fn fit_decay_constants(&self, beta: f64, scan: (f64, f64)) -> Result<Vec<DecayConstants>> {
        let mut out = Vec::with_capacity(self.max_order + 1);
        out.push(fit_tail_constants(
            |x| self.eval(0, -x).expect("finite scan point"),
            self.alpha,
            scan,
            SCAN_GRID,
        )?);
        for s in 1..=self.max_order {
            out.push(fit_tail_constants(
                |x| self.eval(s, x).expect("finite scan point").abs(),
                beta,
                scan,
                SCAN_GRID,
            )?);
        }
        Ok(out)
    }

    /// Check (Sigma 1)-(Sigma 4) on a sample grid. Failures are report
    /// entries, never errors.
    pub fn verify_axioms(&self, grid: &[f64], tol: f64) -> AxiomReport {
        let mut checks = Vec::new();
        let sig = |x: f64| self.eval(0, x).expect("finite grid point");

        // (Sigma 1) sigma(x) - 1/2 odd.
        let worst_odd = grid
            .iter()
            .map(|&x| (sig(x) + sig(-x) - 1.0).abs())
            .fold(0.0_f64, f64::max);
        checks.push(AxiomCheck {
            name: "sigma1-odd-symmetry".into(),
            worst: worst_odd,
            pass: worst_odd <= tol,
        });

        // (Sigma 2) concavity on x >= 0.
        let worst_concavity = grid
            .iter()
            .filter(|&&x| x >= 0.0)
            .map(|&x| self.eval(2, x).expect("finite grid point"))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(AxiomCheck {
            name: "sigma2-concavity".into(),
            worst: worst_concavity.max(0.0),
            pass: worst_concavity <= tol,
        });

        // Monotone with limits 0 and 1, tails judged against the certified
        // exponential bound.
        let mut sorted = grid.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut worst_mono = 0.0_f64;
        for pair in sorted.windows(2) {
            worst_mono = worst_mono.max(sig(pair[0]) - sig(pair[1]));
        }
        let x_max = sorted.last().copied().unwrap_or(0.0);
        let tail = self.exp_coeffs[0] * (-self.exp_rate * x_max).exp();
        worst_mono = worst_mono.max((1.0 - sig(x_max)) - tail);
        worst_mono = worst_mono.max(sig(-x_max) - tail);
        checks.push(AxiomCheck {
            name: "monotone-limits".into(),
            worst: worst_mono.max(0.0),
            pass: worst_mono <= tol,
        });

        // (Sigma 3) left tail of sigma against the fitted alpha certificate.
        let d0 = &self.decay[0];
        let worst_s3 = grid
            .iter()
            .filter(|&&x| x <= -d0.k)
            .map(|&x| sig(x) * x.abs().powf(self.alpha + 1.0) - d0.c)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        checks.push(AxiomCheck {
            name: "sigma3-left-decay".into(),
            worst: worst_s3,
            pass: worst_s3 <= tol,
        });

        // (Sigma 4) per-order derivative decay certificates.
        for s in 1..=self.max_order {
            let ds = &self.decay[s];
            let worst = grid
                .iter()
                .filter(|&&x| x.abs() >= ds.k)
                .map(|&x| {
                    self.eval(s, x).expect("finite grid point").abs()
                        * x.abs().powf(self.beta + 1.0)
                        - ds.c
                })
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0);
            checks.push(AxiomCheck {
                name: format!("sigma4-order-{s}"),
                worst,
                pass: worst <= tol,
            });
        }

        AxiomReport { checks }
    }
}

/// Uniform grid of `n` points on [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}
