use std::f64::consts::PI;

use rand_distr::{Distribution, Exp1};

use super::{replicate, Estimate};
use crate::error::{Error, Result};
use crate::popularity::PopularityVector;
use crate::scenario::{Policy, Scenario};
use crate::specfun::sum::{compensated_sum, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MulticastSimOptions {
    /// Number of nearest caching HNs simulated exactly. Points beyond the
    /// last one, at distance `r_K`, contribute their conditional mean power
    /// `λp · 2π r_K^{2−e} / (e − 2)`. With `K` points the neglected
    /// fluctuation is of relative order `K^{1−e/2}` times the fluctuation of
    /// the retained sum, far below Monte Carlo noise for `K` in the hundreds.
    pub nearest_points: usize,
}

impl Default for MulticastSimOptions {
    fn default() -> Self {
        MulticastSimOptions { nearest_points: 256 }
    }
}

/// Shot-noise estimate of the outage of file `n`: a typical UE at the origin
/// sees the HNs caching the file, a PPP of intensity `λ_h p_n`, with Rayleigh
/// fading, and fails when `w_n log₂(1 + SNR) ≤ R`.
pub fn mc_multicast_outage(
    scenario: &Scenario,
    p_n: f64,
    beta: &[f64],
    n: usize,
    replications: u64,
    seed: u64,
) -> Result<Estimate> {
    mc_multicast_outage_with(scenario, p_n, beta, n, replications, seed, MulticastSimOptions::default())
}

pub fn mc_multicast_outage_with(
    scenario: &Scenario,
    p_n: f64,
    beta: &[f64],
    n: usize,
    replications: u64,
    seed: u64,
    opts: MulticastSimOptions,
) -> Result<Estimate> {
    let beta_n = *beta
        .get(n)
        .ok_or_else(|| Error::Domain(format!("file index {n} outside library of {}", beta.len())))?;
    if !(0.0..=1.0).contains(&p_n) {
        return Err(Error::Domain(format!("cache weight {p_n} outside [0, 1]")));
    }
    if opts.nearest_points == 0 {
        return Err(Error::Domain("at least one simulated HN is required".into()));
    }
    let intensity = scenario.lambda_hn * p_n;
    if intensity == 0.0 || beta_n <= 0.0 {
        return Ok(Estimate::exact(1.0, replications));
    }
    // All multicast files share the OFDM band H_w R Σβ, so the noise power
    // seen by file n scales with the total allocation.
    let bandwidth = scenario.harmonic_factor() * scenario.stream_rate * compensated_sum(beta.iter().copied());
    let snr_scale = scenario.effective_tx_snr_density() / bandwidth;
    let sinr_needed = (1.0 / beta_n).exp2() - 1.0;
    let power_needed = sinr_needed / snr_scale;
    let e = scenario.pathloss_exponent;
    let k = opts.nearest_points;

    let outcomes = replicate(replications, seed, |rng| {
        // Distances in increasing order: π λ r_k² are the arrival times of a
        // unit-rate Poisson process.
        let mut arrival = 0.0;
        let mut power = 0.0;
        for _ in 0..k {
            arrival += <Exp1 as Distribution<f64>>::sample(&Exp1, rng);
            let r2 = arrival / (PI * intensity);
            let fade: f64 = Exp1.sample(rng);
            power += fade * r2.powf(-0.5 * e);
            if power > power_needed {
                return 0.0;
            }
        }
        let r2 = arrival / (PI * intensity);
        power += intensity * 2.0 * PI * r2.powf(1.0 - 0.5 * e) / (e - 2.0);
        if power > power_needed {
            0.0
        } else {
            1.0
        }
    });
    Ok(Estimate::from_samples(&outcomes))
}

/// Popularity-weighted multicast outage of a whole policy. Replications
/// are split across files in proportion to popularity (at least one each)
/// and the per-file estimates recombined as a stratified mean; file `n`
/// uses the seed `seed + n`.
pub fn mc_aggregate_outage(
    scenario: &Scenario,
    policy: &Policy,
    popularity: &PopularityVector,
    replications: u64,
    seed: u64,
) -> Result<Estimate> {
    policy.validate(scenario)?;
    let f = popularity.probs();
    if f.len() != policy.beta.len() {
        return Err(Error::Domain("popularity and policy sizes differ".into()));
    }
    let mut mean = CompensatedSum::new();
    let mut var = CompensatedSum::new();
    for (n, &f_n) in f.iter().enumerate() {
        let reps = ((replications as f64 * f_n).ceil() as u64).max(1);
        let est = mc_multicast_outage(scenario, policy.cache_weights[n], &policy.beta, n, reps, seed.wrapping_add(n as u64))?;
        mean.add(f_n * est.mean);
        if est.stderr.is_finite() {
            var.add((f_n * est.stderr).powi(2));
        }
    }
    Ok(Estimate {
        mean: mean.value(),
        stderr: var.value().sqrt(),
        replications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncached_file_always_fails() {
        let s = Scenario::reference();
        let e = mc_multicast_outage(&s, 0.0, &[1.0; 100], 0, 10, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
    }

    #[test]
    fn dense_helpers_never_fail() {
        let s = Scenario {
            lambda_hn: 1e7,
            ..Scenario::reference()
        };
        let e = mc_multicast_outage(&s, 1.0, &[1.0; 100], 0, 2000, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let s = Scenario::reference();
        let beta = [0.05; 100];
        let a = mc_multicast_outage(&s, 0.5, &beta, 3, 500, 42).unwrap();
        let b = mc_multicast_outage(&s, 0.5, &beta, 3, 500, 42).unwrap();
        assert_eq!(a, b);
    }
}
