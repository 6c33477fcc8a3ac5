//! Oracles shared by the integration tests. Each is independent of the
//! library's own numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use dashu_float::FBig;

/// Rayleigh shot-noise outage Ψ(y) from Zolotarev's non-oscillatory integral
/// for the CDF of a one-sided stable law.
pub fn zolotarev_outage(load: f64, e: f64) -> f64 {
    let delta = 2.0 / e;
    let k0 = PI * PI * delta / (PI * delta).sin();
    let scale = (load * k0).powf(1.0 / (1.0 - delta));
    let kanter = |phi: f64| {
        ((1.0 - delta) * phi).sin() / (delta * phi).sin() * ((delta * phi).sin() / phi.sin()).powf(1.0 / (1.0 - delta))
    };
    // Composite 3-point Gauss–Legendre on 4000 panels; the integrand is smooth
    // on (0, π) and flat at both ends.
    let n = 4000;
    let h = PI / n as f64;
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut acc = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights) {
            let phi = mid + 0.5 * h * x;
            acc += w * 0.5 * h * (-kanter(phi) * scale).exp();
        }
    }
    acc / PI
}

/// ₂F₁(−δ, u; 1−δ; −x) by the Pfaff transform on the first parameter,
///
/// ```text
/// ₂F₁(a, b; c; −x) = (1+x)^{−a} ₂F₁(a, c−b; c; x/(1+x)),
/// ```
///
/// summed in 256-bit floating point. With c − a − (c − b) = u + δ > 0 the
/// series converges on all of [0, 1), and its terms keep one sign from the
/// u-th on.
const BITS: usize = 256;

fn big(x: f64) -> FBig {
    FBig::try_from(x).unwrap().with_precision(BITS).value()
}

pub fn hyp2f1_oracle(delta: f64, u: u32, x: f64) -> f64 {
    let (a, b, c) = (big(-delta), big(1.0 - delta - u as f64), big(1.0 - delta));
    let xb = big(x);
    let w = &xb / (big(1.0) + &xb);
    let mut term = big(1.0);
    let mut sum = big(1.0);
    let tiny = big(1e-24);
    let mut n = 0u64;
    loop {
        let nb = big(n as f64);
        term = term * (&a + &nb) * (&b + &nb) / ((&c + &nb) * (&nb + big(1.0))) * &w;
        sum += &term;
        n += 1;
        let small = {
            let t = if term < big(0.0) { -term.clone() } else { term.clone() };
            let s = if sum < big(0.0) { -sum.clone() } else { sum.clone() };
            t < &tiny * s
        };
        if n > u as u64 + 2 && small {
            break;
        }
        assert!(n < 10_000_000, "oracle series did not converge");
    }
    // (1+x)^δ in double precision: relative error a few ulp.
    sum.to_f64().value() * (delta * x.ln_1p()).exp()
}
