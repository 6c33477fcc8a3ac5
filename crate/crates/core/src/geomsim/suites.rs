//! Fixed cross-checks of the analytic model against simulation, shared by
//! the command line and the test suites.

use serde::Serialize;

use super::{mc_multicast_outage, mc_unicast, verify_lemma1, Estimate};
use crate::error::{Error, Result};
use crate::hybrid::demand_ratio;
use crate::multicast::MulticastModel;
use crate::scenario::Scenario;
use crate::unicast;

/// One analytic value confronted with its simulated counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub analytic: f64,
    pub estimate: Estimate,
    pub z: f64,
    pub relative_gap: f64,
    /// Largest accepted `|z|`.
    pub z_limit: f64,
    /// Largest accepted relative gap, if any.
    pub gap_limit: Option<f64>,
}

impl Check {
    fn new(suite: &'static str, name: String, analytic: f64, estimate: Estimate, z_limit: f64, gap_limit: Option<f64>) -> Self {
        Check {
            suite,
            name,
            analytic,
            z: estimate.z_score(analytic),
            relative_gap: if analytic == 0.0 && estimate.mean == 0.0 {
                0.0
            } else {
                estimate.relative_gap(analytic)
            },
            estimate,
            z_limit,
            gap_limit,
        }
    }

    pub fn passed(&self) -> bool {
        self.z.abs() < self.z_limit && self.gap_limit.is_none_or(|g| self.relative_gap <= g)
    }
}

/// Three `(λ, S, P)` triples for the probability generating functional
/// identity: a step pair, a polynomial pair and a smooth exponential pair.
pub fn lemma1_suite(replications: u64, seed: u64) -> Result<Vec<Check>> {
    let cases: [(&str, f64, &(dyn Fn(f64) -> f64 + Sync), &(dyn Fn(f64) -> f64 + Sync), f64, &[f64]); 3] = [
        (
            "step",
            5.0,
            &|r| if r < 0.5 { 1.0 } else { 0.0 },
            &|r| if r < 0.5 { 0.5 } else { 1.0 },
            0.5,
            &[],
        ),
        ("polynomial", 2.0, &|r| (1.0 - r).powi(2), &|r| 0.2 + 0.8 * r, 1.0, &[]),
        ("exponential", 1.0, &|r| (-r).exp(), &|r| 1.0 - 0.3 * (-r).exp(), 6.0, &[]),
    ];
    cases
        .iter()
        .enumerate()
        .map(|(i, (name, lambda, s, p, radius, breaks))| {
            let r = verify_lemma1(*lambda, *s, *p, *radius, breaks, replications, seed.wrapping_add(i as u64))?;
            Ok(Check::new("lemma1", format!("{name} λ={lambda}"), r.rhs, r.lhs, 3.0, None))
        })
        .collect()
}

/// Unicast bandwidth and outage at `u = L`, where the interference model is
/// exact, over `windows` simulated torus windows.
pub fn unicast_suite(scenario: &Scenario, windows: u64, seed: u64) -> Result<Vec<Check>> {
    let u = scenario.n_antennas;
    let ratio = demand_ratio(scenario);
    let analytic = unicast::evaluate(scenario, u, ratio)?;
    let mc = mc_unicast(scenario, u, ratio, windows, seed)?;
    Ok(vec![
        Check::new("unicast", format!("w_uc u={u}"), analytic.w_uc, mc.w_uc, 3.0, Some(0.02)),
        Check::new("unicast", format!("o_uc u={u}"), analytic.o_uc, mc.o_uc, 3.0, Some(0.02)),
    ])
}

/// Bandwidth `β` at which a fully cached file, alone in the band, has
/// analytic outage `target` (or 1 when the floor is above the target).
fn beta_for_outage(model: &MulticastModel, target: f64) -> Result<f64> {
    let outage = |beta: f64| model.file_outage(1.0, beta, beta);
    if outage(1e3)? > target {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1e-4f64.ln(), 1e3f64.ln());
    if outage(lo.exp())? < target {
        return Err(Error::Numeric(format!("outage below {target} even at β = 1e-4")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if outage(mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Shot-noise outage of one fully cached file at caching-HN intensities
/// `λ_h p ∈ {10, 50, 200}`, with the bandwidth set for an analytic outage
/// near 0.3.
pub fn multicast_suite(scenario: &Scenario, replications: u64, seed: u64) -> Result<Vec<Check>> {
    [10.0, 50.0, 200.0]
        .iter()
        .enumerate()
        .map(|(i, &load)| {
            let s = Scenario {
                lambda_hn: load,
                ..scenario.clone()
            };
            let model = MulticastModel::new(&s);
            let beta = beta_for_outage(&model, 0.3)?;
            let analytic = model.file_outage(1.0, beta, beta)?;
            let mc = mc_multicast_outage(&s, 1.0, &[beta], 0, replications, seed.wrapping_add(i as u64))?;
            Ok(Check::new("multicast", format!("λp={load} β={beta:.6}"), analytic, mc, 3.0, Some(0.03)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_requires_both_limits() {
        let est = Estimate {
            mean: 1.0,
            stderr: 0.01,
            replications: 100,
        };
        assert!(Check::new("t", "a".into(), 1.01, est, 3.0, Some(0.02)).passed());
        assert!(!Check::new("t", "b".into(), 1.05, est, 3.0, Some(0.02)).passed());
        assert!(!Check::new("t", "c".into(), 1.01, est, 3.0, Some(0.001)).passed());
    }

    #[test]
    fn multicast_targets_moderate_outage() {
        let model = MulticastModel::new(&Scenario {
            lambda_hn: 50.0,
            ..Scenario::reference()
        });
        let beta = beta_for_outage(&model, 0.3).unwrap();
        assert!((model.file_outage(1.0, beta, beta).unwrap() - 0.3).abs() < 1e-9);
    }
}
