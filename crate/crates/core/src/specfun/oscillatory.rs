//! Fourier-type integrals for the shot-noise outage of a multipoint multicast.
//!
//! With δ = 2/e, the outage of a file is the CDF of the Rayleigh-faded
//! shot noise, written as a sine transform of the real part of its
//! characteristic function. After scaling the integration variable by the
//! decoding threshold it depends on one dimensionless "load"
//! `y = λ_h p_n (g_α/γ_R)^{-δ}`:
//!
//! ```text
//! Ψ(y) = (2/π) ∫₀^∞ cos(a y x^δ) exp(−b y x^δ) sin(x)/x dx,
//! a = π²/(e cos(π/e)),  b = π²/(e sin(π/e)).
//! ```
//!
//! Writing `w = y (b + i a) x^δ`, the integrand is `Re[exp(−w)] sin(x)/x`, and
//! its logarithmic derivatives in `y` replace `exp(−w)` by `−w exp(−w)` and
//! `(w² − w) exp(−w)`. All three are integrated on half-periods of `sin x`;
//! the partial sums are accelerated with Wynn's epsilon algorithm once the
//! exponential envelope no longer bounds the tail directly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::quad::{integrate_vec, Estimate, QuadratureSpec};

/// Coefficient `(b + i a)` multiplying `y x^δ` in the exponent.
pub fn load_coefficient(e: f64) -> Complex64 {
    let t = PI / e;
    Complex64::new(PI * PI / (e * t.sin()), PI * PI / (e * t.cos()))
}

/// Dimensionless load `λ_h p_n (g_α / γ_R)^{-δ}`.
pub fn outage_load(p_scaled: f64, g_alpha: f64, gamma_r: f64, e: f64) -> f64 {
    let delta = 2.0 / e;
    p_scaled * (g_alpha / gamma_r).powf(-delta)
}

/// Outage and its first two logarithmic derivatives with respect to the load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadDerivatives {
    /// Ψ(y)
    pub value: f64,
    /// y Ψ'(y)
    pub d1: f64,
    /// y² Ψ''(y) + y Ψ'(y)
    pub d2: f64,
}

impl LoadDerivatives {
    pub const NO_MULTICAST: LoadDerivatives = LoadDerivatives {
        value: 1.0,
        d1: 0.0,
        d2: 0.0,
    };
}

/// Full multicast outage of one file: the right-hand side of the shot-noise
/// inversion formula. `p_scaled = λ_h p_n`.
pub fn oscillatory_integral_mc_outage(
    p_scaled: f64,
    g_alpha: f64,
    gamma_r: f64,
    e: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_shape(e)?;
    if !(g_alpha > 0.0) || !(gamma_r > 0.0) || !(p_scaled >= 0.0) {
        return Err(Error::Domain(format!(
            "need p_scaled ≥ 0, g_alpha > 0, gamma_r > 0 (got {p_scaled}, {g_alpha}, {gamma_r})"
        )));
    }
    if p_scaled == 0.0 {
        return Ok(1.0);
    }
    outage_of_load(outage_load(p_scaled, g_alpha, gamma_r, e), e, spec)
}

/// Ψ(y) alone.
pub fn outage_of_load(load: f64, e: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_shape(e)?;
    if load == 0.0 {
        return Ok(1.0);
    }
    let c = load * load_coefficient(e);
    let delta = 2.0 / e;
    let est = sine_transform(
        |x| {
            let w = c * x.powf(delta);
            [(-w.re).exp() * w.im.cos() * sinc(x)]
        },
        |x| (-(c.re * x.powf(delta))).exp() / x,
        (c.norm()).powf(-1.0 / delta),
        spec,
    )?;
    Ok(clamp_probability(est.value[0], spec.abs_tol))
}

/// Ψ, yΨ' and y²Ψ''+yΨ' from the analytically differentiated integrand.
pub fn differentiate_under_integral(load: f64, e: f64, spec: &QuadratureSpec) -> Result<LoadDerivatives> {
    check_shape(e)?;
    if !(load >= 0.0) {
        return Err(Error::Domain(format!("load must be non-negative, got {load}")));
    }
    if load == 0.0 {
        return Ok(LoadDerivatives::NO_MULTICAST);
    }
    let c = load * load_coefficient(e);
    let delta = 2.0 / e;
    let est = sine_transform(
        |x| {
            let w = c * x.powf(delta);
            let ew = (-w).exp();
            let s = sinc(x);
            [ew.re * s, (-w * ew).re * s, ((w * w - w) * ew).re * s]
        },
        |x| {
            let w = c * x.powf(delta);
            let n = w.norm();
            (-w.re).exp() * (1.0 + n + n * n) / x
        },
        (c.norm()).powf(-1.0 / delta),
        spec,
    )?;
    Ok(LoadDerivatives {
        value: clamp_probability(est.value[0], spec.abs_tol),
        d1: est.value[1],
        d2: est.value[2],
    })
}

fn check_shape(e: f64) -> Result<()> {
    if !(e > 2.0) || !e.is_finite() {
        return Err(Error::Domain(format!("path-loss exponent must exceed 2, got {e}")));
    }
    Ok(())
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

fn clamp_probability(v: f64, abs_tol: f64) -> f64 {
    debug_assert!(
        v >= -10.0 * abs_tol - 1e-9 && v <= 1.0 + 10.0 * abs_tol + 1e-9,
        "outage integral escaped [0,1]: {v}"
    );
    v.clamp(0.0, 1.0)
}

/// `(2/π) ∫₀^∞ f(x) dx` where `f` carries a `sin x` factor.
///
/// `envelope(x)` bounds `|f|` for all components beyond `x` up to the
/// oscillation; `scale` is where the modulation starts to decay.
fn sine_transform<const K: usize, F, G>(
    mut f: F,
    envelope: G,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<K>>
where
    F: FnMut(f64) -> [f64; K],
    G: Fn(f64) -> f64,
{
    const MIN_TERMS_FOR_EXTRAPOLATION: usize = 10;
    const WINDOW: usize = 40;

    let half_period = spec.oscillation_period_hint.map_or(PI, |p| 0.5 * p);
    let max_panels = spec.max_subdivisions.max(MIN_TERMS_FOR_EXTRAPOLATION + 3);
    // Tolerance per panel; the accelerated tail gets the same budget.
    let panel_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 0.05,
        rel_tol: spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
        oscillation_period_hint: None,
    };

    // First half-period: geometric breakpoints around the modulation scale
    // resolve the x^δ cusp at the origin.
    let mut breaks = vec![0.0];
    if scale.is_finite() && scale < half_period {
        let mut b = scale / 64.0;
        while b < half_period {
            breaks.push(b);
            b *= 4.0;
        }
    }
    breaks.push(half_period);
    let mut total: Estimate<K> = Estimate {
        value: [0.0; K],
        error: [0.0; K],
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let part = integrate_vec(&mut f, w[0], w[1], &panel_spec)?;
        total.accumulate(&part);
    }

    let mut partial_sums: Vec<[f64; K]> = vec![total.value];
    let mut extrapolated: Vec<[f64; K]> = Vec::new();
    let mut k = 1usize;
    loop {
        let x0 = k as f64 * half_period;
        // Direct truncation: the rest of the integral is below the bound.
        let env = envelope(x0);
        if env * 2.0 * half_period < 0.02 * spec.abs_tol * PI / 2.0 && envelope(x0 + half_period) <= env {
            return Ok(scaled(total));
        }
        let part = integrate_vec(&mut f, x0, x0 + half_period, &panel_spec)?;
        total.accumulate(&part);
        partial_sums.push(total.value);
        k += 1;

        if partial_sums.len() > MIN_TERMS_FOR_EXTRAPOLATION {
            let start = partial_sums.len().saturating_sub(WINDOW);
            let window = &partial_sums[start..];
            let mut est = [0.0; K];
            for (c, slot) in est.iter_mut().enumerate() {
                let seq: Vec<f64> = window.iter().map(|s| s[c]).collect();
                *slot = wynn_epsilon(&seq);
            }
            extrapolated.push(est);
            let n = extrapolated.len();
            if n >= 3 {
                let (e0, e1, e2) = (&extrapolated[n - 1], &extrapolated[n - 2], &extrapolated[n - 3]);
                let converged = (0..K).all(|c| {
                    let tol = spec.abs_tol.max(spec.rel_tol * e0[c].abs()) * PI / 2.0;
                    (e0[c] - e1[c]).abs() + (e0[c] - e2[c]).abs() < tol
                });
                if converged {
                    let mut out = total;
                    for c in 0..K {
                        out.value[c] = e0[c];
                        out.error[c] += (e0[c] - e1[c]).abs() + (e0[c] - e2[c]).abs();
                    }
                    return Ok(scaled(out));
                }
            }
        }
        if k >= max_panels {
            return Err(Error::Quadrature {
                partial: 2.0 / PI * extrapolated.last().map_or(total.value[0], |e| e[0]),
                error_bound: 2.0 / PI * total.max_error() + envelope(k as f64 * half_period),
                subdivisions: k,
            });
        }
    }
}

fn scaled<const K: usize>(mut est: Estimate<K>) -> Estimate<K> {
    for c in 0..K {
        est.value[c] *= 2.0 / PI;
        est.error[c] *= 2.0 / PI;
    }
    est
}

/// Wynn's epsilon algorithm: highest even-column estimate from the last entry.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n < 3 {
        return *seq.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = seq.to_vec();
    let mut best = seq[n - 1];
    let mut col = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                // Column has converged exactly; the current even estimate stands.
                return if col.is_multiple_of(2) { cur[cur.len() - 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        col += 1;
        if col.is_multiple_of(2) {
            let candidate = next[next.len() - 1];
            if candidate.is_finite() {
                best = candidate;
            }
        }
        prev = cur;
        cur = next;
    }
    best
}
