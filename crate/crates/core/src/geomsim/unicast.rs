use std::f64::consts::PI;

use rand::RngExt;
use rand_distr::{Distribution, Gamma, Poisson};

use super::points::torus_dist2;
use super::{replicate, Estimate};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::specfun::quad::{integrate, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnicastSimOptions {
    /// Mean number of BSs per torus window; fixes the window side.
    pub bs_per_window: f64,
    /// Mean number of simulated UEs per cell. When the requested UE/BS ratio
    /// is larger, UEs are thinned and their bandwidth reweighted by the
    /// inverse retention probability, which keeps the per-cell estimator
    /// unbiased.
    pub ue_per_cell: f64,
}

impl Default for UnicastSimOptions {
    fn default() -> Self {
        UnicastSimOptions {
            bs_per_window: 200.0,
            ue_per_cell: 10.0,
        }
    }
}

/// Simulated unicast layer.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct UnicastMc {
    /// Bandwidth consumed per cell, Hz.
    pub w_uc: Estimate,
    /// Fraction of UEs below the SINR threshold.
    pub o_uc: Estimate,
    pub cells: u64,
    pub ues: u64,
}

pub fn mc_unicast(scenario: &Scenario, u: usize, ue_bs_ratio: f64, replications: u64, seed: u64) -> Result<UnicastMc> {
    mc_unicast_with(scenario, u, ue_bs_ratio, replications, seed, UnicastSimOptions::default())
}

/// `∫_{φ ∈ [0, π/4]} sec(φ)^{2−e} dφ · 8 / (e − 2)`: mean of `Σ r^{-e}` over
/// a unit-intensity PPP outside the square `[−1, 1]²`.
fn outside_square_constant(e: f64) -> Result<f64> {
    let est = integrate(|phi: f64| phi.cos().powf(e - 2.0), 0.0, PI / 4.0, &QuadratureSpec::default())?;
    Ok(8.0 * est.value[0] / (e - 2.0))
}

/// BS and UE PPPs on a torus, nearest-BS association, ZFB effective gains
/// `g ~ Γ(L−u+1, 1)` and `g_j ~ Γ(u, 1)`, thresholded bandwidth
/// `R / log₂(1 + SINR)`, per-cell sum divided by `u`.
///
/// Interferers inside the window are simulated at their nearest image; the
/// rest of the plane contributes its mean power. The noise term, when not
/// interference-limited, is taken over a bandwidth of `R` Hz.
pub fn mc_unicast_with(
    scenario: &Scenario,
    u: usize,
    ue_bs_ratio: f64,
    replications: u64,
    seed: u64,
    opts: UnicastSimOptions,
) -> Result<UnicastMc> {
    let l = scenario.n_antennas;
    if u == 0 || u > l {
        return Err(Error::Domain(format!("multiplexing order u = {u} outside 1..={l}")));
    }
    if !(ue_bs_ratio > 0.0) || !ue_bs_ratio.is_finite() {
        return Err(Error::Domain(format!("UE/BS ratio must be positive, got {ue_bs_ratio}")));
    }
    if !(opts.bs_per_window >= 4.0) || !(opts.ue_per_cell > 0.0) {
        return Err(Error::Domain("simulation window needs ≥ 4 BSs and a positive UE sample".into()));
    }
    let lambda_b = scenario.lambda_bs;
    let side = (opts.bs_per_window / lambda_b).sqrt();
    let sim_ratio = ue_bs_ratio.min(opts.ue_per_cell);
    let weight = ue_bs_ratio / sim_ratio;
    let e = scenario.pathloss_exponent;
    let half = 0.5 * side;
    let far_field = lambda_b * u as f64 * half.powf(2.0 - e) * outside_square_constant(e)?;
    let noise = if scenario.interference_limited {
        0.0
    } else {
        scenario.stream_rate / scenario.bs_snr_density()
    };
    let gamma_th = scenario.sinr_threshold;
    let rate = scenario.stream_rate;
    let desired = Gamma::new((l - u + 1) as f64, 1.0).expect("positive shape");
    let cross = Gamma::new(u as f64, 1.0).expect("positive shape");
    let bs_count = Poisson::new(opts.bs_per_window).expect("positive mean");
    let ue_mean = sim_ratio * opts.bs_per_window;
    let ue_count = Poisson::new(ue_mean).expect("positive mean");

    let per_rep = replicate(replications, seed, |rng| {
        let n_bs = bs_count.sample(rng) as usize;
        if n_bs == 0 {
            return (0.0, 0.0, 0.0, 0.0);
        }
        let bs: Vec<[f64; 2]> = (0..n_bs)
            .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
            .collect();
        let n_ue = ue_count.sample(rng) as usize;
        let mut d2 = vec![0.0; n_bs];
        let mut bandwidth = 0.0;
        let mut outages = 0.0;
        for _ in 0..n_ue {
            let ue = [rng.random::<f64>() * side, rng.random::<f64>() * side];
            let mut nearest = 0;
            for (j, b) in bs.iter().enumerate() {
                d2[j] = torus_dist2(ue, *b, side);
                if d2[j] < d2[nearest] {
                    nearest = j;
                }
            }
            let mut interference = far_field;
            for (j, &dj) in d2.iter().enumerate() {
                if j != nearest {
                    interference += cross.sample(rng) * dj.powf(-0.5 * e);
                }
            }
            let signal = desired.sample(rng) * d2[nearest].powf(-0.5 * e);
            let sinr = signal / (noise + interference);
            if sinr >= gamma_th {
                bandwidth += rate / sinr.ln_1p() * std::f64::consts::LN_2;
            } else {
                outages += 1.0;
            }
        }
        (weight * bandwidth / u as f64, n_bs as f64, outages, n_ue as f64)
    });
    let w_pairs: Vec<(f64, f64)> = per_rep.iter().map(|r| (r.0, r.1)).collect();
    let o_pairs: Vec<(f64, f64)> = per_rep.iter().map(|r| (r.2, r.3)).collect();
    Ok(UnicastMc {
        w_uc: Estimate::from_ratio(&w_pairs),
        o_uc: Estimate::from_ratio(&o_pairs),
        cells: per_rep.iter().map(|r| r.1 as u64).sum(),
        ues: per_rep.iter().map(|r| r.3 as u64).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_constant_for_e4() {
        // ∫ cos²φ over [0, π/4] = π/8 + 1/4
        let c = outside_square_constant(4.0).unwrap();
        assert!((c - 4.0 * (PI / 8.0 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn unreachable_threshold() {
        let s = Scenario {
            sinr_threshold: 1e12,
            ..Scenario::reference()
        };
        let opts = UnicastSimOptions {
            bs_per_window: 50.0,
            ue_per_cell: 4.0,
        };
        let r = mc_unicast_with(&s, 8, 100.0, 4, 1, opts).unwrap();
        assert_eq!(r.w_uc.mean, 0.0);
        assert_eq!(r.o_uc.mean, 1.0);
    }

    #[test]
    fn rejects_bad_u() {
        assert!(mc_unicast(&Scenario::reference(), 9, 10.0, 1, 1).is_err());
    }
}
