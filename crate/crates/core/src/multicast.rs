//! Orthogonal multipoint multicast: per-file outage, aggregate outage and the
//! effective multicast bandwidth.
//!
//! Outage of file `n` depends on the policy only through the load
//! `y_n = λ_h p_n t_n^{-δ}` with threshold `t_n = (2^{1/β_n} − 1) Σ_l β_l / γ_R`.
//! Derivatives with respect to `p` and `β` follow from the load derivatives
//! by the chain rule on `ln y_n`.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::popularity::PopularityVector;
use crate::scenario::{Policy, Scenario};
use crate::specfun::oscillatory::{differentiate_under_integral, outage_of_load, LoadDerivatives};
use crate::specfun::quad::QuadratureSpec;
use crate::specfun::sum::compensated_sum;

/// `H_w = Σ_{i=1}^{D} 1/i`
pub fn harmonic_factor(depth: usize) -> f64 {
    compensated_sum((1..=depth).map(|i| 1.0 / i as f64))
}

/// `W_eff^MC = H_w R Σ β_n`
pub fn multicast_bandwidth(scenario: &Scenario, policy: &Policy) -> f64 {
    scenario.harmonic_factor() * scenario.stream_rate * policy.beta_sum()
}

/// `ln(2^{1/β} − 1)` and its first two derivatives in β.
fn log_rate_gap(beta: f64) -> (f64, f64, f64) {
    let q = std::f64::consts::LN_2 / beta;
    let emq = (-q).exp();
    let value = q + (-emq).ln_1p();
    let dq = 1.0 / (1.0 - emq); // dφ/dq
    let d1 = -(q / beta) * dq;
    let d2 = -emq * dq * dq * (q / beta).powi(2) + 2.0 * q / (beta * beta) * dq;
    (value, d1, d2)
}

/// Outage of one file together with everything needed for its first and
/// second derivatives in `p_n` and in every `β_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FileSensitivity {
    pub load: LoadDerivatives,
    p: f64,
    /// d ln(2^{1/β_n}−1) / dβ_n and its derivative.
    phi1: f64,
    phi2: f64,
    inv_beta_sum: f64,
    delta: f64,
    active: bool,
}

impl FileSensitivity {
    fn inactive() -> Self {
        FileSensitivity {
            load: LoadDerivatives::NO_MULTICAST,
            p: 0.0,
            phi1: 0.0,
            phi2: 0.0,
            inv_beta_sum: 0.0,
            delta: 0.0,
            active: false,
        }
    }

    pub fn outage(&self) -> f64 {
        self.load.value
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    // d ln y_n / dβ_m, for m == n (own) and m != n (other).
    fn dlog_own(&self) -> f64 {
        -self.delta * (self.phi1 + self.inv_beta_sum)
    }

    fn dlog_other(&self) -> f64 {
        -self.delta * self.inv_beta_sum
    }

    fn dlog_beta(&self, own: bool) -> f64 {
        if own {
            self.dlog_own()
        } else {
            self.dlog_other()
        }
    }

    /// ∂O_n/∂p_n
    pub fn d_p(&self) -> f64 {
        if !self.active {
            return 0.0;
        }
        self.load.d1 / self.p
    }

    /// ∂²O_n/∂p_n²
    pub fn d_pp(&self) -> f64 {
        if !self.active {
            return 0.0;
        }
        (self.load.d2 - self.load.d1) / (self.p * self.p)
    }

    /// ∂O_n/∂β_m; `own` selects m == n.
    pub fn d_beta(&self, own: bool) -> f64 {
        if !self.active {
            return 0.0;
        }
        self.load.d1 * self.dlog_beta(own)
    }

    /// ∂²O_n/∂p_n∂β_m
    pub fn d_p_beta(&self, own: bool) -> f64 {
        if !self.active {
            return 0.0;
        }
        self.load.d2 * self.dlog_beta(own) / self.p
    }

    /// ∂²O_n/∂β_i∂β_j with `own_i = (i == n)`, `own_j = (j == n)`.
    pub fn d_beta_beta(&self, own_i: bool, own_j: bool) -> f64 {
        if !self.active {
            return 0.0;
        }
        let s2 = self.inv_beta_sum * self.inv_beta_sum;
        let second = if own_i && own_j { self.phi2 } else { 0.0 } - s2;
        self.load.d2 * self.dlog_beta(own_i) * self.dlog_beta(own_j) - self.load.d1 * self.delta * second
    }
}

/// Evaluates multicast outages for one scenario, memoising the quadrature
/// by load value (outage depends on the policy only through the load).
#[derive(Debug)]
pub struct MulticastModel {
    lambda_hn: f64,
    gamma_r: f64,
    exponent: f64,
    spec: QuadratureSpec,
    memo: Mutex<HashMap<u64, LoadDerivatives>>,
}

const MEMO_LIMIT: usize = 1 << 20;

impl Clone for MulticastModel {
    fn clone(&self) -> Self {
        MulticastModel::with_spec(self.lambda_hn, self.gamma_r, self.exponent, self.spec)
    }
}

impl MulticastModel {
    pub fn new(scenario: &Scenario) -> Self {
        Self::with_spec(
            scenario.lambda_hn,
            scenario.gamma_r(),
            scenario.pathloss_exponent,
            QuadratureSpec::default(),
        )
    }

    pub fn with_spec(lambda_hn: f64, gamma_r: f64, exponent: f64, spec: QuadratureSpec) -> Self {
        MulticastModel {
            lambda_hn,
            gamma_r,
            exponent,
            spec,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn delta(&self) -> f64 {
        2.0 / self.exponent
    }

    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    /// Load `y_n` of a file with cache weight `p_n`, own bandwidth `β_n` and
    /// total multicast bandwidth `Σβ`. Zero when the file is not multicast.
    pub fn load(&self, p_n: f64, beta_n: f64, beta_sum: f64) -> f64 {
        if p_n <= 0.0 || beta_n <= 0.0 {
            return 0.0;
        }
        let (gap, _, _) = log_rate_gap(beta_n);
        let log_t = gap + beta_sum.ln() - self.gamma_r.ln();
        self.lambda_hn * p_n * (-self.delta() * log_t).exp()
    }

    fn load_derivatives(&self, load: f64) -> Result<LoadDerivatives> {
        if load == 0.0 {
            return Ok(LoadDerivatives::NO_MULTICAST);
        }
        let key = load.to_bits();
        if let Some(d) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*d);
        }
        let d = differentiate_under_integral(load, self.exponent, &self.spec)?;
        let mut memo = self.memo.lock().expect("memo lock");
        if memo.len() >= MEMO_LIMIT {
            memo.clear();
        }
        memo.insert(key, d);
        Ok(d)
    }

    /// Outage of one file, `β` given in full so the shared sum is exact.
    pub fn file_outage(&self, p_n: f64, beta_n: f64, beta_sum: f64) -> Result<f64> {
        let load = self.load(p_n, beta_n, beta_sum);
        if load == 0.0 {
            return Ok(1.0);
        }
        if let Some(d) = self.memo.lock().expect("memo lock").get(&load.to_bits()) {
            return Ok(d.value);
        }
        outage_of_load(load, self.exponent, &self.spec)
    }

    pub fn sensitivity(&self, p_n: f64, beta_n: f64, beta_sum: f64) -> Result<FileSensitivity> {
        let load = self.load(p_n, beta_n, beta_sum);
        if load == 0.0 {
            return Ok(FileSensitivity::inactive());
        }
        let (_, phi1, phi2) = log_rate_gap(beta_n);
        Ok(FileSensitivity {
            load: self.load_derivatives(load)?,
            p: p_n,
            phi1,
            phi2,
            inv_beta_sum: 1.0 / beta_sum,
            delta: self.delta(),
            active: true,
        })
    }

    pub fn sensitivities(&self, p: &[f64], beta: &[f64]) -> Result<Vec<FileSensitivity>> {
        let s = compensated_sum(beta.iter().copied());
        p.iter().zip(beta).map(|(&pn, &bn)| self.sensitivity(pn, bn, s)).collect()
    }

    pub fn per_file_outage(&self, p: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
        let s = compensated_sum(beta.iter().copied());
        p.iter().zip(beta).map(|(&pn, &bn)| self.file_outage(pn, bn, s)).collect()
    }
}

/// Evaluated multicast component.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastEval {
    pub per_file_outage: Vec<f64>,
    pub aggregate_outage: f64,
    pub w_mc_eff: f64,
    /// `2^{α_n} − 1` per file (infinite for files without bandwidth).
    pub rate_gaps: Vec<f64>,
    /// `Σ_l 1/α_l = Σ_l β_l`
    pub inv_alpha_sum: f64,
}

/// Outage of file `n` under `policy` (1 when it has no cache replicas or no
/// multicast bandwidth).
pub fn file_outage(scenario: &Scenario, p_n: f64, beta: &[f64], n: usize) -> Result<f64> {
    if n >= beta.len() {
        return Err(Error::Domain(format!("file index {n} outside library of {}", beta.len())));
    }
    MulticastModel::new(scenario).file_outage(p_n, beta[n], compensated_sum(beta.iter().copied()))
}

/// `O^MC = Σ_n f_n O_n^MC`
pub fn aggregate_outage(scenario: &Scenario, policy: &Policy, popularity: &PopularityVector) -> Result<f64> {
    Ok(evaluate(&MulticastModel::new(scenario), scenario, policy, popularity)?.aggregate_outage)
}

pub fn evaluate(
    model: &MulticastModel,
    scenario: &Scenario,
    policy: &Policy,
    popularity: &PopularityVector,
) -> Result<MulticastEval> {
    if popularity.len() != policy.beta.len() || policy.cache_weights.len() != policy.beta.len() {
        return Err(Error::Domain("policy and popularity lengths differ".into()));
    }
    let per_file_outage = model.per_file_outage(&policy.cache_weights, &policy.beta)?;
    let aggregate_outage = compensated_sum(per_file_outage.iter().zip(popularity.probs()).map(|(o, f)| o * f));
    Ok(MulticastEval {
        aggregate_outage: aggregate_outage.clamp(0.0, 1.0),
        per_file_outage,
        w_mc_eff: multicast_bandwidth(scenario, policy),
        rate_gaps: policy
            .beta
            .iter()
            .map(|&b| if b > 0.0 { (1.0 / b).exp2() - 1.0 } else { f64::INFINITY })
            .collect(),
        inv_alpha_sum: policy.beta_sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::zipf;

    #[test]
    fn harmonic_small_depths() {
        assert_eq!(harmonic_factor(1), 1.0);
        assert_eq!(harmonic_factor(2), 1.5);
    }

    #[test]
    fn harmonic_depth_226_is_six() {
        let direct: f64 = (1..=226).map(|i| 1.0 / i as f64).sum();
        assert!((harmonic_factor(226) - direct).abs() < 1e-13);
        assert!((harmonic_factor(226) - 6.0).abs() < 1e-4);
    }

    #[test]
    fn bandwidth_arithmetic() {
        let s = Scenario {
            n_files: 2,
            cache_capacity: 1,
            harmonic_depth: 1,
            stream_rate: 1e6,
            ..Scenario::reference()
        };
        let p = Policy {
            cache_weights: vec![0.0; 2],
            beta: vec![1e-6, 1e-6],
            mux_order: 1,
        };
        assert!((multicast_bandwidth(&s, &p) - 2.0).abs() < 1e-12);
        assert_eq!(multicast_bandwidth(&s, &Policy::unicast_only(2, 1)), 0.0);
    }

    #[test]
    fn reference_uniform_unit_efficiency_bandwidth() {
        let s = Scenario::reference();
        let p = Policy {
            cache_weights: vec![0.1; 100],
            beta: vec![1.0; 100],
            mux_order: 8,
        };
        let w = multicast_bandwidth(&s, &p);
        assert!((w - harmonic_factor(226) * 1e6 * 100.0).abs() < 1e-3);
        assert!((w / 6.0e8 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn conventions_for_unserved_files() {
        let s = Scenario::reference();
        let beta = vec![0.2; 100];
        assert_eq!(file_outage(&s, 0.0, &beta, 0).unwrap(), 1.0);
        let mut beta0 = beta.clone();
        beta0[3] = 0.0;
        assert_eq!(file_outage(&s, 0.5, &beta0, 3).unwrap(), 1.0);
    }

    #[test]
    fn rate_gap_derivatives() {
        for &b in &[0.05, 0.3, 1.0, 4.0] {
            let h = 1e-5 * b;
            let (v, d1, d2) = log_rate_gap(b);
            let (vp, d1p, _) = log_rate_gap(b + h);
            let (vm, d1m, _) = log_rate_gap(b - h);
            assert!((v - ((1.0 / b).exp2() - 1.0).ln()).abs() < 1e-12 * v.abs().max(1.0));
            assert!(((vp - vm) / (2.0 * h) - d1).abs() < 1e-6 * d1.abs());
            assert!(((d1p - d1m) / (2.0 * h) - d2).abs() < 1e-6 * d2.abs());
        }
    }

    #[test]
    fn all_uncached_means_full_outage() {
        let s = Scenario::reference();
        let f = zipf(100, 0.6).unwrap();
        let p = Policy {
            cache_weights: vec![0.0; 100],
            beta: vec![0.1; 100],
            mux_order: 8,
        };
        assert_eq!(aggregate_outage(&s, &p, &f).unwrap(), 1.0);
    }

    #[test]
    fn single_file_aggregate_is_file_outage() {
        let s = Scenario {
            n_files: 1,
            cache_capacity: 1,
            ..Scenario::reference()
        };
        let f = zipf(1, 0.6).unwrap();
        let p = Policy {
            cache_weights: vec![0.4],
            beta: vec![0.05],
            mux_order: 1,
        };
        let agg = aggregate_outage(&s, &p, &f).unwrap();
        let one = file_outage(&s, 0.4, &p.beta, 0).unwrap();
        assert_eq!(agg, one);
    }
}
