//! Independent oracles for the shot-noise outage integral and its load
//! derivatives.
//!
//! * e = 4 (δ = ½): the Rayleigh shot noise is Lévy distributed and the
//!   outage is `erfc(π² y / 4)` in closed form.
//! * general e: Zolotarev's non-oscillatory integral for the CDF of a
//!   one-sided stable law, evaluated on a dense composite rule.

use std::f64::consts::PI;

mod common;

use common::zolotarev_outage;
use hycast::specfun::{differentiate_under_integral, outage_of_load, QuadratureSpec};
use statrs::function::erf::erfc;

#[test]
fn levy_closed_form_at_exponent_four() {
    let spec = QuadratureSpec::default();
    for &y in &[1e-4, 1e-2, 0.05, 0.1, 0.2, 0.4, 0.8, 2.0] {
        let got = outage_of_load(y, 4.0, &spec).unwrap();
        let want = erfc(PI * PI * y / 4.0);
        assert!((got - want).abs() < 1e-9, "y={y}: {got} vs {want}");
    }
}

#[test]
fn zolotarev_oracle_agrees_with_levy() {
    for &y in &[0.01, 0.1, 0.5] {
        let z = zolotarev_outage(y, 4.0);
        let want = erfc(PI * PI * y / 4.0);
        assert!((z - want).abs() < 1e-10, "{z} {want}");
    }
}

#[test]
fn zolotarev_oracle_at_reference_exponent() {
    let spec = QuadratureSpec::default();
    for &e in &[2.5, 3.0, 3.76, 4.5] {
        for &y in &[1e-3, 0.02, 0.08, 0.2, 0.5, 1.5] {
            let got = outage_of_load(y, e, &spec).unwrap();
            let want = zolotarev_outage(y, e);
            assert!((got - want).abs() < 1e-8, "e={e} y={y}: {got} vs {want}");
        }
    }
}

#[test]
fn load_derivatives_match_finite_differences() {
    let spec = QuadratureSpec::default();
    for &e in &[3.0, 3.76, 4.0] {
        for &y in &[0.01, 0.1, 0.4, 1.0] {
            let d = differentiate_under_integral(y, e, &spec).unwrap();
            // derivatives in s = ln y
            let h = 1e-3;
            let f = |s: f64| zolotarev_outage(s.exp(), e);
            let s = y.ln();
            let d1 = (f(s + h) - f(s - h)) / (2.0 * h);
            let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
            assert!((d.d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "e={e} y={y}: {} vs {d1}", d.d1);
            assert!((d.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()), "e={e} y={y}: {} vs {d2}", d.d2);
        }
    }
}
