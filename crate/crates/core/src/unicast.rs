//! Single-point unicast with zero-forcing beamforming: average bandwidth per
//! cell, unicast outage and their differential trade-off.
//!
//! The desired-link gain is Γ(L−u+1, 1); its CDF is replaced by
//! `(1 − e^{−ξx})^{L−u+1}` with `ξ = ((L−u+1)!)^{-1/(L−u+1)}` (exact when
//! L−u+1 = 1), which expands into binomially weighted exponentials and hence
//! into Laplace transforms of the Γ(u, 1)-faded interference field. Each
//! transform reduces to `1 / ₂F₁(−δ, u; 1−δ; −ξ l η)`.
//!
//! Noise is not part of these closed forms: they are interference-limited.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::specfun::hyp2f1::interference_2f1;
use crate::specfun::quad::QuadratureSpec;
use crate::specfun::stieltjes::weighted_stieltjes_integral;
use crate::specfun::sum::compensated_sum;

/// Alternating binomial weights `f_{l,u} = (−1)^{l+1} C(L−u+1, l)`,
/// l = 1..=L−u+1, computed exactly in integers.
pub fn binomial_signs(n_antennas: usize, u: usize) -> Result<Vec<i128>> {
    check_u(n_antennas, u)?;
    let order = n_antennas - u + 1;
    if order > 120 {
        return Err(Error::Domain(format!("diversity order {order} too large for exact weights")));
    }
    let mut out = Vec::with_capacity(order);
    let mut c: i128 = 1;
    for l in 1..=order {
        c = c * (order - l + 1) as i128 / l as i128;
        out.push(if l % 2 == 1 { c } else { -c });
    }
    Ok(out)
}

/// `ξ = ((L−u+1)!)^{-1/(L−u+1)}`
pub fn xi(n_antennas: usize, u: usize) -> Result<f64> {
    check_u(n_antennas, u)?;
    let order = n_antennas - u + 1;
    let log_fact = compensated_sum((2..=order).map(|k| (k as f64).ln()));
    Ok((-log_fact / order as f64).exp())
}

fn check_u(n_antennas: usize, u: usize) -> Result<()> {
    if u == 0 || u > n_antennas {
        return Err(Error::Domain(format!("multiplexing order u = {u} outside 1..={n_antennas}")));
    }
    Ok(())
}

/// Precomputed per-(scenario, u) quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct UnicastEval {
    pub u: usize,
    pub w_uc: f64,
    pub o_uc: f64,
    pub w_th: f64,
    pub xi: f64,
    pub binom_signs: Vec<i128>,
}

/// Laplace-transform kernel `C_{l,u}` as a function of the SINR target.
#[derive(Debug, Clone)]
struct Coverage {
    delta: f64,
    u: u32,
    xi: f64,
    weights: Vec<f64>,
}

impl Coverage {
    fn new(scenario: &Scenario, u: usize) -> Result<Self> {
        let signs = binomial_signs(scenario.n_antennas, u)?;
        Ok(Coverage {
            delta: scenario.delta(),
            u: u as u32,
            xi: xi(scenario.n_antennas, u)?,
            weights: signs.iter().map(|&s| s as f64).collect(),
        })
    }

    /// `C_{l,u}` at SINR target `gamma` (l is 1-based).
    fn term(&self, l: usize, gamma: f64) -> Result<f64> {
        if !gamma.is_finite() {
            return Ok(0.0);
        }
        let x = self.xi * l as f64 * gamma;
        if !x.is_finite() {
            return Ok(0.0);
        }
        Ok(1.0 / interference_2f1(self.delta, self.u, x)?)
    }

    /// `Σ_l f_{l,u} C_{l,u}(γ)`: probability that SINR ≥ γ.
    fn success(&self, gamma: f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.weights.len());
        for (i, w) in self.weights.iter().enumerate() {
            terms.push(w * self.term(i + 1, gamma)?);
        }
        Ok(compensated_sum(terms))
    }
}

/// `η(w) = 2^{R/w} − 1`, the SINR needed to carry rate R in bandwidth w.
fn required_sinr(rate: f64, w: f64) -> f64 {
    (rate / w).exp2() - 1.0
}

/// Unicast outage at an explicit SINR threshold.
pub fn unicast_outage_at(scenario: &Scenario, u: usize, gamma_th: f64) -> Result<f64> {
    if !(gamma_th > 0.0) {
        return Err(Error::Domain(format!("SINR threshold must be positive, got {gamma_th}")));
    }
    let cov = Coverage::new(scenario, u)?;
    Ok((1.0 - cov.success(gamma_th)?).clamp(0.0, 1.0))
}

/// `O^UC(u, γ_th) = 1 − Σ_l f_{l,u} / ₂F₁(−δ, u; 1−δ; −ξ l γ_th)`
pub fn unicast_outage(scenario: &Scenario, u: usize) -> Result<f64> {
    unicast_outage_at(scenario, u, scenario.sinr_threshold)
}

/// Average per-user bandwidth below the threshold,
/// `E[w 1(w ≤ w_th)] = Σ_l f_{l,u} ∫₀^{w_th} w dC_{l,u}(w)`, in Hz.
pub fn mean_user_bandwidth(scenario: &Scenario, u: usize, gamma_th: f64) -> Result<f64> {
    if !(gamma_th > 0.0) {
        return Err(Error::Domain(format!("SINR threshold must be positive, got {gamma_th}")));
    }
    let cov = Coverage::new(scenario, u)?;
    let rate = scenario.stream_rate;
    // Work in v = w / R so tolerances are scale-free.
    let v_th = 1.0 / (1.0 + gamma_th).log2();
    let spec = QuadratureSpec::with_tolerances(1e-14, 1e-12);
    let mut parts = Vec::with_capacity(cov.weights.len());
    for (i, weight) in cov.weights.iter().enumerate() {
        let l = i + 1;
        let kernel = |v: f64| cov.term(l, required_sinr(1.0, v)).unwrap_or(f64::NAN);
        let part = weighted_stieltjes_integral(kernel, v_th, &spec)?;
        if !part.is_finite() {
            return Err(Error::Numeric("hypergeometric kernel failed inside quadrature".into()));
        }
        parts.push(weight * part);
    }
    Ok(rate * compensated_sum(parts).max(0.0))
}

/// Users multiplexed per resource share the bandwidth, and a typical cell
/// holds `λ_u^eff/λ_b` users on average: `W^UC = (λ_u^eff/λ_b)/u · E[w 1(w ≤ w_th)]`.
pub fn bandwidth_prefactor(u: usize, ue_bs_ratio: f64) -> f64 {
    ue_bs_ratio / u as f64
}

/// Average unicast bandwidth consumed per cell. Depends on the intensities
/// only through `ue_bs_ratio = λ_u^eff / λ_b`.
pub fn unicast_bandwidth(scenario: &Scenario, u: usize, ue_bs_ratio: f64) -> Result<f64> {
    unicast_bandwidth_at(scenario, u, ue_bs_ratio, scenario.sinr_threshold)
}

pub fn unicast_bandwidth_at(scenario: &Scenario, u: usize, ue_bs_ratio: f64, gamma_th: f64) -> Result<f64> {
    if !(ue_bs_ratio >= 0.0) || !ue_bs_ratio.is_finite() {
        return Err(Error::Domain(format!("UE/BS ratio must be finite and non-negative, got {ue_bs_ratio}")));
    }
    Ok(bandwidth_prefactor(u, ue_bs_ratio) * mean_user_bandwidth(scenario, u, gamma_th)?)
}

pub fn evaluate(scenario: &Scenario, u: usize, ue_bs_ratio: f64) -> Result<UnicastEval> {
    Ok(UnicastEval {
        u,
        w_uc: unicast_bandwidth(scenario, u, ue_bs_ratio)?,
        o_uc: unicast_outage(scenario, u)?,
        w_th: scenario.bandwidth_threshold(),
        xi: xi(scenario.n_antennas, u)?,
        binom_signs: binomial_signs(scenario.n_antennas, u)?,
    })
}

/// Both sides of the bandwidth/outage trade-off
/// `dW^UC/dγ_th = −w_th · (λ_u^eff/λ_b)/u · dO^UC/dγ_th`, by central
/// differences of the two closed forms. Returns `(lhs, rhs)`.
pub fn tradeoff_sides(scenario: &Scenario, u: usize, ue_bs_ratio: f64, gamma_th: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) || !(gamma_th > h) {
        return Err(Error::Domain(format!("need γ_th > h > 0 (γ_th = {gamma_th}, h = {h})")));
    }
    let w = |g: f64| unicast_bandwidth_at(scenario, u, ue_bs_ratio, g);
    let o = |g: f64| unicast_outage_at(scenario, u, g);
    let lhs = (w(gamma_th + h)? - w(gamma_th - h)?) / (2.0 * h);
    let d_out = (o(gamma_th + h)? - o(gamma_th - h)?) / (2.0 * h);
    let w_th = scenario.stream_rate / (1.0 + gamma_th).log2();
    let rhs = -w_th * bandwidth_prefactor(u, ue_bs_ratio) * d_out;
    Ok((lhs, rhs))
}

/// `|LHS − RHS|` of the trade-off identity.
pub fn tradeoff_identity_residual(scenario: &Scenario, u: usize, ue_bs_ratio: f64, gamma_th: f64, h: f64) -> Result<f64> {
    let (lhs, rhs) = tradeoff_sides(scenario, u, ue_bs_ratio, gamma_th, h)?;
    Ok((lhs - rhs).abs())
}
