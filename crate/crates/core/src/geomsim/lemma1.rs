use std::f64::consts::PI;

use rand::RngExt;
use rand_distr::{Distribution, Poisson};

use super::{replicate, Estimate};
use crate::error::{Error, Result};
use crate::specfun::quad::{integrate_breaks, QuadratureSpec};
use crate::specfun::sum::CompensatedSum;

/// Radially symmetric function of the distance to the origin, in km.
pub type RadialFn<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Lemma1Report {
    pub lhs: Estimate,
    pub rhs: f64,
    pub z: f64,
}

/// Checks `E{Π_k P(x_k) Σ_k S(x_k)} = λ ∫SP · exp(λ ∫(P − 1))` for a PPP of
/// intensity `λ`. `S` and `1 − P` must vanish beyond `support_radius`;
/// `breaks` lists radii where either function jumps, so the plane integrals
/// are computed piecewise.
pub fn verify_lemma1(
    intensity: f64,
    s: RadialFn<'_>,
    p: RadialFn<'_>,
    support_radius: f64,
    breaks: &[f64],
    replications: u64,
    seed: u64,
) -> Result<Lemma1Report> {
    if !(intensity >= 0.0) || !(support_radius > 0.0) {
        return Err(Error::Domain("need intensity ≥ 0 and a positive support radius".into()));
    }
    let mut knots = vec![0.0];
    knots.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < support_radius));
    knots.push(support_radius);
    knots.sort_by(f64::total_cmp);
    let spec = QuadratureSpec::with_tolerances(1e-13, 1e-12);
    let planar = integrate_breaks(
        |r| [2.0 * PI * r * s(r) * p(r), 2.0 * PI * r * (p(r) - 1.0)],
        &knots,
        &spec,
    )?;
    let rhs = intensity * planar.value[0] * (intensity * planar.value[1]).exp();

    let mean_count = intensity * PI * support_radius * support_radius;
    let count = (mean_count > 0.0).then(|| Poisson::new(mean_count).expect("positive mean"));
    let samples = replicate(replications, seed, |rng| {
        let n = count.as_ref().map_or(0, |c| c.sample(rng) as usize);
        let mut product = 1.0;
        let mut total = CompensatedSum::new();
        for _ in 0..n {
            let r = support_radius * rng.random::<f64>().sqrt();
            product *= p(r);
            total.add(s(r));
        }
        product * total.value()
    });
    let lhs = Estimate::from_samples(&samples);
    Ok(Lemma1Report {
        lhs,
        rhs,
        z: lhs.z_score(rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_test_function() {
        let r = verify_lemma1(5.0, &|_| 0.0, &|_| 0.5, 1.0, &[], 100, 1).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.lhs.mean, 0.0);
        assert_eq!(r.z, 0.0);
    }

    #[test]
    fn campbell_limit() {
        let r = verify_lemma1(3.0, &|r| 1.0 - r, &|_| 1.0, 1.0, &[], 20_000, 2).unwrap();
        // λ 2π ∫ r(1−r) dr = λπ/3
        assert!((r.rhs - PI).abs() < 1e-12);
        assert!(r.z.abs() < 4.0, "{r:?}");
    }
}
