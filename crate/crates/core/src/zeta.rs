//! Certified evaluation of the Riemann zeta function for real p > 1.
//!
//! Direct series up to N terms plus the Euler-Maclaurin tail
//! N^{1-p}/(p-1) - N^{-p}/2 + p N^{-p-1}/12; the residual is bounded by the
//! next term p(p+1)(p+2) N^{-p-3}/720, and N is grown until that bound
//! meets the target.

use crate::error::{Error, Result};
use crate::kahan::KahanSum;

#[derive(Debug, Clone, Copy)]
pub struct CertifiedValue {
    pub value: f64,
    pub error_bound: f64,
}

pub const ZETA_TARGET: f64 = 1e-13;

pub fn zeta(p: f64) -> Result<CertifiedValue> {
    if !(p > 1.0) {
        return Err(Error::ZetaDivergence(p));
    }
    let remainder = |n: f64| p * (p + 1.0) * (p + 2.0) * n.powf(-p - 3.0) / 720.0;
    let mut n: u64 = 16;
    while remainder(n as f64) > ZETA_TARGET && n < (1 << 24) {
        n *= 2;
    }
    let mut acc = KahanSum::new();
    for k in 1..=n {
        acc.add((k as f64).powf(-p));
    }
    let nf = n as f64;
    let value = acc.value() + nf.powf(1.0 - p) / (p - 1.0) - 0.5 * nf.powf(-p)
        + p * nf.powf(-p - 1.0) / 12.0;
    Ok(CertifiedValue {
        value,
        error_bound: remainder(nf),
    })
}
