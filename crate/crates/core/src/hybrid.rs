//! Hybrid delivery: multicast serves what it can, unicast serves the UEs the
//! multicast layer leaves in outage.

use crate::error::{Error, Result};
use crate::multicast::{self, MulticastModel};
use crate::popularity::{zipf, PopularityVector};
use crate::scenario::{DeliveryMetrics, Policy, Scenario};
use crate::specfun::oscillatory::outage_of_load;
use crate::unicast;

/// UE/BS ratio of the full (unthinned) unicast demand.
pub fn demand_ratio(scenario: &Scenario) -> f64 {
    scenario.lambda_ue / scenario.lambda_bs
}

/// Combines the two layers. `w_uc` is the unicast bandwidth at the full
/// demand `λ_u/λ_b`; thinning by the multicast outage enters through
/// `w_tot = w_mc_eff + w_uc · o_mc`.
pub fn compose(w_mc_eff: f64, o_mc: f64, w_uc: f64, o_uc: f64) -> DeliveryMetrics {
    DeliveryMetrics {
        w_mc_eff,
        w_uc,
        w_tot: w_mc_eff + w_uc * o_mc,
        o_mc,
        o_uc,
        o_tot: o_uc * o_mc,
    }
}

pub fn evaluate(scenario: &Scenario, policy: &Policy, popularity: &PopularityVector) -> Result<DeliveryMetrics> {
    evaluate_with(&MulticastModel::new(scenario), scenario, policy, popularity)
}

/// As [`evaluate`], reusing a multicast model (and its memo).
pub fn evaluate_with(
    model: &MulticastModel,
    scenario: &Scenario,
    policy: &Policy,
    popularity: &PopularityVector,
) -> Result<DeliveryMetrics> {
    policy.validate(scenario)?;
    let mc = multicast::evaluate(model, scenario, policy, popularity)?;
    let uc = unicast::evaluate(scenario, policy.mux_order, demand_ratio(scenario))?;
    Ok(compose(mc.w_mc_eff, mc.aggregate_outage, uc.w_uc, uc.o_uc))
}

/// Pure unicast: nothing cached, no multicast bandwidth.
pub fn spuc_only_baseline(scenario: &Scenario, u: usize) -> Result<DeliveryMetrics> {
    let popularity = zipf(scenario.n_files, scenario.zipf_skew)?;
    evaluate(scenario, &Policy::unicast_only(scenario.n_files, u), &popularity)
}

/// Pure unicast with the multiplexing order that minimises bandwidth.
pub fn best_spuc_baseline(scenario: &Scenario) -> Result<(usize, DeliveryMetrics)> {
    let mut best: Option<(usize, DeliveryMetrics)> = None;
    for u in 1..=scenario.n_antennas {
        let m = spuc_only_baseline(scenario, u)?;
        if best.as_ref().is_none_or(|(_, b)| m.w_tot < b.w_tot) {
            best = Some((u, m));
        }
    }
    best.ok_or_else(|| Error::Domain("no multiplexing order available".into()))
}

/// Pure multicast baseline and the policy that realises it.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub policy: Policy,
    pub metrics: DeliveryMetrics,
}

/// Pure multicast: the M most popular files are cached everywhere (`p = 1`)
/// and share one bandwidth `β̄`, the smallest that brings each of them down
/// to `target_outage`. Other files are always in outage, and nothing is
/// served by unicast, so `o_uc = 1` and `w_uc = 0`.
pub fn ompmc_only_baseline(scenario: &Scenario, target_outage: f64) -> Result<Baseline> {
    scenario.validate()?;
    if !(target_outage > 0.0) {
        return Err(Error::Domain(format!("target outage must be positive, got {target_outage}")));
    }
    let n = scenario.n_files;
    let m = scenario.cache_capacity;
    let popularity = zipf(n, scenario.zipf_skew)?;
    let mut policy = Policy::unicast_only(n, 1);
    if target_outage < 1.0 {
        let beta = shared_bandwidth_for_outage(scenario, m, target_outage)?;
        policy.cache_weights[..m].fill(1.0);
        policy.beta[..m].fill(beta);
    }
    let model = MulticastModel::new(scenario);
    let mc = multicast::evaluate(&model, scenario, &policy, &popularity)?;
    Ok(Baseline {
        metrics: compose(mc.w_mc_eff, mc.aggregate_outage, 0.0, 1.0),
        policy,
    })
}

/// Bisection on `ln β̄`; the outage of `files` fully cached files sharing
/// `β̄` each falls monotonically from 1 (β̄ → 0) to the floor reached with
/// unlimited bandwidth, `Ψ(λ_h (files · ln 2 / γ_R)^{-δ})`.
fn shared_bandwidth_for_outage(scenario: &Scenario, files: usize, target: f64) -> Result<f64> {
    let model = MulticastModel::new(scenario);
    let k = files as f64;
    let outage = |beta: f64| model.file_outage(1.0, beta, k * beta);
    let floor_load = scenario.lambda_hn * (k * std::f64::consts::LN_2 / scenario.gamma_r()).powf(-scenario.delta());
    let floor = outage_of_load(floor_load, scenario.pathloss_exponent, &Default::default())?;
    if target <= floor {
        return Err(Error::Numeric(format!(
            "target outage {target:e} is below the unlimited-bandwidth floor {floor:e}"
        )));
    }
    let (mut lo, mut hi) = (1e-3f64.ln(), 1e3f64.ln());
    while outage(lo.exp())? < target {
        lo -= 2.0;
        if lo < -700.0 {
            return Err(Error::Numeric("bandwidth bracket failed below".into()));
        }
    }
    while outage(hi.exp())? > target {
        hi += 2.0;
        if hi > 700.0 {
            return Err(Error::Numeric("bandwidth bracket failed above".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if outage(mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(hi.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_invariants() {
        let m = compose(3.0, 0.25, 8.0, 0.5);
        assert_eq!(m.w_tot, 5.0);
        assert_eq!(m.o_tot, 0.125);
    }

    #[test]
    fn degenerate_policy_is_pure_unicast() {
        let s = Scenario::reference();
        let m = spuc_only_baseline(&s, 4).unwrap();
        assert_eq!(m.o_mc, 1.0);
        assert_eq!(m.w_mc_eff, 0.0);
        let w = unicast::unicast_bandwidth(&s, 4, s.lambda_ue / s.lambda_bs).unwrap();
        assert_eq!(m.w_tot, w);
        assert_eq!(m.o_tot, unicast::unicast_outage(&s, 4).unwrap());
    }

    #[test]
    fn saturated_multicast_removes_unicast() {
        let s = Scenario {
            n_files: 5,
            cache_capacity: 5,
            lambda_hn: 2000.0,
            ..Scenario::reference()
        };
        let policy = Policy {
            cache_weights: vec![1.0; 5],
            beta: vec![5.0; 5],
            mux_order: 8,
        };
        let m = evaluate(&s, &policy, &zipf(5, 0.6).unwrap()).unwrap();
        assert!(m.o_mc < 1e-6, "{m:?}");
        assert!(m.o_tot < 1e-6);
        assert!(m.w_tot - m.w_mc_eff < 1e-6 * m.w_uc);
    }

    #[test]
    fn ompmc_full_target_costs_nothing() {
        let b = ompmc_only_baseline(&Scenario::reference(), 1.0).unwrap();
        assert_eq!(b.metrics.w_tot, 0.0);
        assert_eq!(b.metrics.o_tot, 1.0);
    }

    #[test]
    fn ompmc_meets_its_target() {
        let s = Scenario {
            lambda_hn: 200.0,
            ..Scenario::reference()
        };
        let b = ompmc_only_baseline(&s, 0.05).unwrap();
        let beta = b.policy.beta[0];
        assert!(beta > 0.0);
        let o = multicast::file_outage(&s, 1.0, &b.policy.beta, 0).unwrap();
        assert!((o - 0.05).abs() < 1e-9, "{o}");
        assert!(b.policy.beta[10..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ompmc_unreachable_target() {
        let s = Scenario {
            lambda_hn: 0.01,
            ..Scenario::reference()
        };
        assert!(ompmc_only_baseline(&s, 0.01).is_err());
    }
}
