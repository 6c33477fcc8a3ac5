//! Gauss hypergeometric function ₂F₁(a, b; c; −x) on the negative real axis.
//!
//! Near the origin the Pfaff transform maps −x to w = x/(1+x) ∈ [0, 1):
//!
//! ```text
//! ₂F₁(a, b; c; −x) = (1+x)^{-b} ₂F₁(c−a, b; c; x/(1+x))
//! ```
//!
//! For the interference pattern a = −δ, b = u ∈ ℕ, c = 1 − δ (δ = 2/e) the
//! argument-inversion formula collapses: its first hypergeometric factor is
//! identically one and every gamma ratio reduces to an elementary product,
//!
//! ```text
//! ₂F₁(−δ, u; 1−δ; −x) = πδ/sin(πδ) · Π_{k<u}(1 + δ/k) · x^δ
//!                       + δ/(u+δ) · x^{-u} · ₂F₁(u, u+δ; u+δ+1; −1/x).
//! ```
//!
//! The two series converge at rates x/(1+x) and 1/x; those are equal at the
//! golden ratio, which is where the evaluator switches.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::sum::CompensatedSum;

/// Crossover between the Pfaff series and argument inversion.
pub const CROSSOVER: f64 = 1.618_033_988_749_895;

const MAX_TERMS: usize = 2_000_000;

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.floor()
}

fn is_positive_integer(v: f64) -> bool {
    v >= 1.0 && v == v.floor()
}

/// ₂F₁(a, b; c; −x) for x ≥ 0.
///
/// Fast, full-precision paths exist for terminating series and for the
/// `c = 1 + a, a ∈ (−1, 0), b ∈ ℕ` pattern; other parameters fall back to
/// the Pfaff series and fail with [`Error::Numeric`] when it converges too
/// slowly.
pub fn gauss_2f1_neg(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("argument x = {x} must be finite and non-negative")));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) {
        return Ok(terminating(a, b, c, -x));
    }
    if is_nonpositive_integer(b) {
        return Ok(terminating(b, a, c, -x));
    }

    let interference_pattern = a > -1.0 && a < 0.0 && (c - 1.0 - a).abs() <= 4.0 * f64::EPSILON && is_positive_integer(b);
    if interference_pattern && x > CROSSOVER {
        return Ok(inverted_pattern(-a, b as u32, x));
    }
    pfaff(a, b, c, x)
}

/// The unicast interference kernel ₂F₁(−δ, u; 1−δ; −x).
pub fn interference_2f1(delta: f64, u: u32, x: f64) -> Result<f64> {
    gauss_2f1_neg(-delta, u as f64, 1.0 - delta, x)
}

fn terminating(m: f64, other: f64, c: f64, z: f64) -> f64 {
    // m is a non-positive integer: the series stops after |m| terms.
    let n = (-m) as usize;
    let mut term = 1.0;
    let mut acc = CompensatedSum::new();
    acc.add(term);
    for k in 0..n {
        let k = k as f64;
        term *= (m + k) * (other + k) / ((c + k) * (k + 1.0)) * z;
        acc.add(term);
    }
    acc.value()
}

fn pfaff(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let w = x / (1.0 + x);
    let p = c - a;
    let mut term = 1.0;
    let mut acc = CompensatedSum::new();
    acc.add(term);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (p + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * w;
        acc.add(term);
        let s = acc.value();
        if term.abs() <= f64::EPSILON * 0.25 * s.abs() && nf > b.abs() + p.abs() {
            // Remaining tail bounded by a geometric series once terms shrink.
            let ratio = (p + nf + 1.0) * (b + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * w;
            if ratio.abs() < 1.0 {
                return Ok(s * (1.0 + x).powf(-b));
            }
        }
        if !s.is_finite() {
            break;
        }
    }
    Err(Error::Numeric(format!(
        "hypergeometric series for (a={a}, b={b}, c={c}, x={x}) did not converge"
    )))
}

fn inverted_pattern(delta: f64, u: u32, x: f64) -> f64 {
    let mut lead = PI * delta / (PI * delta).sin();
    for k in 1..u {
        lead *= 1.0 + delta / k as f64;
    }
    let b = u as f64;
    let z = -1.0 / x;
    let mut term = 1.0;
    let mut acc = CompensatedSum::new();
    acc.add(term);
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        term *= (b + nf) * (b + delta + nf) / ((b + delta + 1.0 + nf) * (nf + 1.0)) * z;
        acc.add(term);
        n += 1;
        if term.abs() <= f64::EPSILON * 0.25 * acc.value().abs() && nf > b {
            break;
        }
        if n > 10_000 {
            break;
        }
    }
    lead * x.powf(delta) + delta / (b + delta) * x.powf(-b) * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(gauss_2f1_neg(-0.5, 3.0, 0.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn terminating_polynomial() {
        // a = −1: 1 + b·x/c
        let v = gauss_2f1_neg(-1.0, 4.0, 2.5, 3.0).unwrap();
        assert!((v - (1.0 + 4.0 * 3.0 / 2.5)).abs() < 1e-14);
    }

    #[test]
    fn rejects_pole_in_c() {
        assert!(matches!(gauss_2f1_neg(0.5, 1.0, -2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gauss_2f1_neg(0.5, 1.0, 2.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn branches_agree_at_crossover() {
        for &e in &[3.0, 3.76, 4.0] {
            let delta = 2.0 / e;
            for u in 1..=8u32 {
                let x = CROSSOVER * (1.0 + 1e-12);
                let inv = inverted_pattern(delta, u, x);
                let series = pfaff(-delta, u as f64, 1.0 - delta, x).unwrap();
                assert!(((inv - series) / series).abs() < 1e-13, "e={e} u={u}: {inv} vs {series}");
            }
        }
    }

    #[test]
    fn u_equal_one_closed_form_at_half_delta() {
        // δ = 1/2, u = 1: ₂F₁(−½, 1; ½; −x) = 1 + √x·atan(√x)
        for &x in &[0.3, 1.0, 2.0, 50.0, 1e5] {
            let s = f64::sqrt(x);
            let exact = 1.0 + s * s.atan();
            let v = interference_2f1(0.5, 1, x).unwrap();
            assert!(((v - exact) / exact).abs() < 1e-13, "x={x}: {v} vs {exact}");
        }
    }
}
