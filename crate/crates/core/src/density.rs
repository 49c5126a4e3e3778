//! The density (kernel) function phi(x) = [sigma(x+1) - sigma(x-1)] / 2 and
//! its derivatives, with certified effective-support truncation.
//!
//! Every infinite sum elsewhere in the crate is truncated at a radius that
//! comes from the decay certificates stored here, never from heuristics; the
//! certified tail mass is surfaced to callers so it can be added to reported
//! error budgets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::sigmoid::{fit_tail_constants, DecayConstants, Sigmoidal, DEFAULT_SCAN};

/// phi and its derivatives, optionally rescaled as x -> phi(x/c)/c.
///
/// The rescale is only used as a Strang-Fix control kernel; catalog use has
/// c = 1. Immutable after construction except the radius memo, which is a
/// thread-safe cache of pure computations.
#[derive(Debug)]
pub struct DensityKernel {
    sig: Arc<Sigmoidal>,
    scale: f64,
    /// Fitted polynomial certificates for phi^{(s)} itself (index 0 against
    /// alpha, s >= 1 against beta), already adjusted for the rescale.
    phi_decay: Vec<DecayConstants>,
    radius_cache: Mutex<HashMap<(usize, u64), f64>>,
}

impl DensityKernel {
    pub fn new(sig: Arc<Sigmoidal>) -> Result<Self> {
        Self::rescaled(sig, 1.0)
    }

    /// Kernel x -> phi(x/scale) / scale.
    pub fn rescaled(sig: Arc<Sigmoidal>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("bad kernel scale {scale}")));
        }
        let kernel = Self {
            sig,
            scale,
            phi_decay: Vec::new(),
            radius_cache: Mutex::new(HashMap::new()),
        };
        let mut phi_decay = Vec::with_capacity(kernel.max_order() + 1);
        for s in 0..=kernel.max_order() {
            let exponent = if s == 0 {
                kernel.sig.alpha()
            } else {
                kernel.sig.beta()
            };
            let base = fit_tail_constants(
                |x| kernel.phi_unscaled(s, x).expect("finite scan point").abs(),
                exponent,
                DEFAULT_SCAN,
                4000,
            )?;
            // |phi_c^{(s)}(x)| = |phi^{(s)}(x/c)| / c^{s+1}
            //                 <= C c^{exponent - s} |x|^{-exponent-1}, |x| >= c K.
            phi_decay.push(DecayConstants {
                k: base.k * scale,
                c: base.c * scale.powf(exponent - s as f64),
            });
        }
        Ok(Self {
            phi_decay,
            ..kernel
        })
    }

    pub fn sigmoid(&self) -> &Arc<Sigmoidal> {
        &self.sig
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_order(&self) -> usize {
        self.sig.max_order()
    }

    pub fn alpha(&self) -> f64 {
        self.sig.alpha()
    }

    pub fn beta(&self) -> f64 {
        self.sig.beta()
    }

    pub fn phi_decay_constants(&self) -> &[DecayConstants] {
        &self.phi_decay
    }

    /// phi^{(s)}(y) for the unscaled kernel, evaluated via evenness on the
    /// left tail where the sigmoid evaluators keep full relative accuracy.
    fn phi_unscaled(&self, s: usize, y: f64) -> Result<f64> {
        let ya = -y.abs();
        let raw = 0.5 * (self.sig.eval(s, ya + 1.0)? - self.sig.eval(s, ya - 1.0)?);
        // phi even => phi^{(s)}(y) = (-1)^s phi^{(s)}(-y).
        if y > 0.0 && s % 2 == 1 {
            Ok(-raw)
        } else {
            Ok(raw)
        }
    }

    /// Kernel derivative value phi_c^{(s)}(x).
    pub fn phi(&self, s: usize, x: f64) -> Result<f64> {
        if s > self.max_order() {
            return Err(Error::OrderOutOfRange {
                order: s,
                max: self.max_order(),
            });
        }
        let v = self.phi_unscaled(s, x / self.scale)?;
        Ok(v / self.scale.powi(s as i32 + 1))
    }

    /// Certified exponential tail (rate, coeff):
    /// |phi_c^{(s)}(x)| <= coeff * e^{-rate |x|} for |x| >= scale.
    pub fn exp_tail(&self, s: usize) -> (f64, f64) {
        let (rate, coeffs) = self.sig.exp_tail();
        let f = if s == 0 {
            coeffs[0] * (0.5 * rate.exp())
        } else {
            coeffs[s] * rate.cosh()
        };
        (
            rate / self.scale,
            f / self.scale.powi(s as i32 + 1),
        )
    }

    /// Smallest certified R with |phi^{(s)}(x)| <= eps for |x| >= R.
    /// Monotone non-increasing in eps; memoized per (s, eps).
    pub fn support_radius(&self, s: usize, eps: f64) -> f64 {
        assert!(eps > 0.0, "support radius needs eps > 0");
        let key = (s, eps.to_bits());
        if let Some(&r) = self.radius_cache.lock().unwrap().get(&key) {
            return r;
        }
        let (rate, coeff) = self.exp_tail(s);
        let r_exp = if coeff <= eps {
            self.scale
        } else {
            ((coeff / eps).ln() / rate).max(self.scale)
        };
        let d = &self.phi_decay[s];
        let exponent = if s == 0 { self.alpha() } else { self.beta() };
        let r_poly = d.k.max((d.c / eps).powf(1.0 / (exponent + 1.0)));
        let r = r_exp.min(r_poly);
        self.radius_cache.lock().unwrap().insert(key, r);
        r
    }

    /// Certified bound on sum over integers k with |k - u| >= dist of
    /// |phi^{(s)}(u - k)| |k - u|^nu, for any real u. Returns infinity when
    /// `dist` is too small for the bound shapes to be monotone there.
    pub fn tail_sum_bound(&self, s: usize, nu: f64, dist: f64) -> f64 {
        let mut best = f64::INFINITY;

        // Exponential route: per side, sum coeff e^{-rate d} d^nu over
        // d = dist, dist+1, ... (the bound is decreasing for d >= nu/rate).
        let (rate, coeff) = self.exp_tail(s);
        if dist >= self.scale.max(nu / rate) && dist > 0.0 {
            let g = |d: f64| coeff * (-rate * d).exp() * d.powf(nu);
            let mut side = 0.0;
            let mut j = 0.0;
            loop {
                let d = dist + j;
                let term = g(d);
                let ratio = (-rate).exp() * ((d + 1.0) / d).powf(nu);
                if ratio < 0.9 {
                    side += term / (1.0 - ratio);
                    break;
                }
                side += term;
                j += 1.0;
                if j > 10_000.0 {
                    side = f64::INFINITY;
                    break;
                }
            }
            best = best.min(2.0 * side);
        }

        // Polynomial route: terms <= C d^{nu - exponent - 1}.
        let d0 = &self.phi_decay[s];
        let exponent = if s == 0 { self.alpha() } else { self.beta() };
        if dist >= d0.k && exponent > nu {
            let side =
                d0.c * (dist.powf(nu - exponent - 1.0) + dist.powf(nu - exponent) / (exponent - nu));
            best = best.min(2.0 * side);
        }

        best
    }

    /// Smallest truncation distance whose certified tail is <= eps.
    pub fn radius_for_tail(&self, s: usize, nu: f64, eps: f64) -> Result<f64> {
        let (rate, _) = self.exp_tail(s);
        let mut r = self
            .support_radius(s, eps)
            .max(nu / rate + 1.0)
            .max(self.scale)
            .max(1.0);
        for _ in 0..200 {
            if self.tail_sum_bound(s, nu, r) <= eps {
                return Ok(r);
            }
            r *= 1.25;
        }
        Err(Error::DivergenceRisk {
            nu,
            exponent: if s == 0 { self.alpha() } else { self.beta() },
        })
    }

    /// Certified bound on the integral of |t|^nu |phi(t)| over |t| >= r
    /// (exponential route; used to pick Fourier integration windows).
    pub fn tail_integral_bound(&self, nu: u32, r: f64) -> f64 {
        let (rate, coeff) = self.exp_tail(0);
        if r < self.scale {
            return f64::INFINITY;
        }
        // int_r^inf t^nu e^{-rate t} dt, closed form for integer nu.
        let mut sum = 0.0;
        let mut fall = 1.0; // nu! / (nu - i)!
        for i in 0..=nu {
            sum += fall * r.powi((nu - i) as i32) / rate.powi(i as i32 + 1);
            fall *= (nu - i) as f64;
        }
        2.0 * coeff * (-rate * r).exp() * sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahan::KahanSum;
    use rand::{Rng, SeedableRng};

    fn kernel() -> DensityKernel {
        DensityKernel::new(Arc::new(Sigmoidal::logistic(4, 8.0, 8.0).unwrap())).unwrap()
    }

    #[test]
    fn point_values() {
        let k = kernel();
        // (sigma(1) - sigma(-1)) / 2 and (sigma(2) - sigma(0)) / 2 in closed form.
        assert!((k.phi(0, 0.0).unwrap() - 0.23105857863000487).abs() < 1e-15);
        assert!((k.phi(0, 1.0).unwrap() - 0.19039853898894122).abs() < 1e-15);
        assert!(k.phi(0, 1.0).unwrap() > 0.0);
        assert_eq!(k.phi(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn evenness_and_unimodality() {
        let k = kernel();
        let mut prev = k.phi(0, -30.0).unwrap();
        for i in 1..=300 {
            let x = -30.0 + i as f64 * 0.1;
            let v = k.phi(0, x).unwrap();
            assert!((v - k.phi(0, -x).unwrap()).abs() <= 1e-16 + 1e-12 * v.abs());
            assert!(v >= 0.0);
            if x <= 0.0 {
                assert!(v >= prev - 1e-15, "not non-decreasing at {x}");
            } else {
                assert!(v <= prev + 1e-15, "not non-increasing at {x}");
            }
            prev = v;
        }
    }

    #[test]
    fn derivative_consistency() {
        let k = kernel();
        let h = 1e-4;
        for s in 1..=3 {
            for i in 0..100 {
                let x = -8.0 + 16.0 * (i as f64 + 0.5) / 100.0;
                let fd = (k.phi(s - 1, x + h).unwrap() - k.phi(s - 1, x - h).unwrap()) / (2.0 * h);
                let exact = k.phi(s, x).unwrap();
                let scale = exact.abs().max(1e-10);
                assert!((fd - exact).abs() / scale <= 1e-6, "s={s} x={x}");
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let k = kernel();
        let r = k.support_radius(0, 1e-14);
        let tail = k.tail_sum_bound(0, 0.0, r);
        assert!(tail <= 1e-10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: f64 = rng.gen();
            let mut acc = KahanSum::new();
            let lo = (x - r).floor() as i64;
            let hi = (x + r).ceil() as i64;
            for kk in lo..=hi {
                acc.add(k.phi(0, x - kk as f64).unwrap());
            }
            assert!(
                (acc.value() - 1.0).abs() <= 1e-10,
                "x={x}: {}",
                acc.value()
            );
        }
    }

    #[test]
    fn support_radius_certified_and_monotone() {
        let k = kernel();
        let r12 = k.support_radius(0, 1e-12);
        assert!(r12 <= 35.0, "r={r12}");
        assert!(k.support_radius(0, 1e-6) <= r12);
        for &eps in &[1e-6, 1e-12] {
            let r = k.support_radius(0, eps);
            for i in 0..200 {
                let x = r + i as f64 * 0.25;
                assert!(k.phi(0, x).unwrap().abs() <= eps);
            }
        }
    }

    #[test]
    fn polynomial_radius_route() {
        // Invert the (Sigma 4) style bound directly.
        let k = kernel();
        let d = &k.phi_decay_constants()[1];
        let eps = 1e-9;
        let expect = d.k.max((d.c / eps).powf(1.0 / (k.beta() + 1.0)));
        // The kernel may certify a smaller radius via the exponential tail.
        assert!(k.support_radius(1, eps) <= expect);
    }

    #[test]
    fn radius_cache_is_consistent_across_threads() {
        let k = Arc::new(kernel());
        let mut handles = Vec::new();
        for _ in 0..8 {
            let k = Arc::clone(&k);
            handles.push(std::thread::spawn(move || k.support_radius(2, 1e-13)));
        }
        let values: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn rescaled_kernel_certificates_hold() {
        let sig = Arc::new(Sigmoidal::logistic(4, 8.0, 8.0).unwrap());
        let k = DensityKernel::rescaled(Arc::clone(&sig), 0.5).unwrap();
        let base = DensityKernel::new(sig).unwrap();
        let x = 0.7;
        let expect = base.phi(1, x / 0.5).unwrap() / 0.25;
        assert!((k.phi(1, x).unwrap() - expect).abs() < 1e-15);
        let (rate, coeff) = k.exp_tail(0);
        for i in 0..100 {
            let x = 0.5 + i as f64 * 0.2;
            assert!(k.phi(0, x).unwrap().abs() <= coeff * (-rate * x).exp());
        }
    }
}
