use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::cache::sample_cache;
use super::substream;
use crate::error::{Error, Result};
use crate::scenario::{Policy, Scenario};

pub type Point = [f64; 2];

/// Homogeneous PPP of `intensity` points per km² on `[0, side)²`.
pub fn sample_ppp_with<R: Rng + ?Sized>(intensity: f64, side: f64, rng: &mut R) -> Vec<Point> {
    let mean = intensity * side * side;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("finite positive mean").sample(rng) as usize;
    (0..count)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect()
}

pub fn sample_ppp(intensity: f64, side: f64, seed: u64) -> Vec<Point> {
    sample_ppp_with(intensity, side, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Squared distance between two points of a torus with period `side`.
pub(crate) fn torus_dist2(a: Point, b: Point, side: f64) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs();
        d.min(side - d)
    };
    let dx = wrap(a[0] - b[0]);
    let dy = wrap(a[1] - b[1]);
    dx * dx + dy * dy
}

/// One spatial snapshot of the network on a wrap-around square.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub side: f64,
    pub hn_points: Vec<Point>,
    pub bs_points: Vec<Point>,
    pub ue_points: Vec<Point>,
    /// Real file ids cached at each HN (the remaining slots hold fillers).
    pub cache_contents: Vec<Vec<usize>>,
    seed: u64,
}

const FADING_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

impl NetworkRealization {
    pub fn sample(scenario: &Scenario, policy: &Policy, side: f64, seed: u64) -> Result<Self> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::Domain(format!("window side must be positive, got {side}")));
        }
        let mut rng = substream(seed, 0);
        let hn_points = sample_ppp_with(scenario.lambda_hn, side, &mut rng);
        let bs_points = sample_ppp_with(scenario.lambda_bs, side, &mut rng);
        let ue_points = sample_ppp_with(scenario.lambda_ue, side, &mut rng);
        let cache_contents = hn_points
            .iter()
            .map(|_| sample_cache(&policy.cache_weights, scenario.cache_capacity, &mut rng).map(|d| d.files))
            .collect::<Result<_>>()?;
        Ok(NetworkRealization {
            side,
            hn_points,
            bs_points,
            ue_points,
            cache_contents,
            seed,
        })
    }

    /// Rayleigh power gain `|h|² ~ Exp(1)` of the link from transmitter `tx`
    /// to receiver `rx`, drawn on demand but fixed for the realization.
    pub fn link_fading(&self, tx: usize, rx: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ FADING_KEY);
        rng.set_stream(((tx as u64) << 32) | rx as u64);
        Exp1.sample(&mut rng)
    }

    pub fn torus_distance(&self, a: Point, b: Point) -> f64 {
        torus_dist2(a, b, self.side).sqrt()
    }

    pub fn to_point_list(&self) -> PointList {
        let tag = |kind: PointKind, pts: &[Point]| pts.iter().map(move |&p| (kind, p)).collect::<Vec<_>>();
        let mut points = tag(PointKind::Hn, &self.hn_points);
        points.extend(tag(PointKind::Bs, &self.bs_points));
        points.extend(tag(PointKind::Ue, &self.ue_points));
        PointList { points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Hn,
    Bs,
    Ue,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::Hn => "hn",
            PointKind::Bs => "bs",
            PointKind::Ue => "ue",
        }
    }
}

impl FromStr for PointKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hn" => Ok(PointKind::Hn),
            "bs" => Ok(PointKind::Bs),
            "ue" => Ok(PointKind::Ue),
            other => Err(Error::Parse(format!("unknown point kind {other:?}"))),
        }
    }
}

/// Plain-text point dump: one `kind x y` row per point, `#` comments and
/// blank lines ignored on input.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointList {
    pub points: Vec<(PointKind, Point)>,
}

impl PointList {
    pub fn of_kind(&self, kind: PointKind) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().filter(move |(k, _)| *k == kind).map(|(_, p)| *p)
    }
}

impl fmt::Display for PointList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (kind, [x, y]) in &self.points {
            writeln!(f, "{} {x:?} {y:?}", kind.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for PointList {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |e: Error| Error::Parse(format!("line {}: {}", no + 1, e));
            let mut fields = line.split_whitespace();
            let (Some(kind), Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Parse(format!("line {}: expected `kind x y`", no + 1)));
            };
            let kind: PointKind = kind.parse().map_err(at)?;
            let coord = |s: &str| -> Result<f64> {
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse(format!("line {}: bad coordinate {s:?}", no + 1))),
                }
            };
            points.push((kind, [coord(x)?, coord(y)?]));
        }
        Ok(PointList { points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_is_empty() {
        assert!(sample_ppp(0.0, 3.0, 1).is_empty());
    }

    #[test]
    fn seeded_determinism() {
        assert_eq!(sample_ppp(30.0, 1.0, 5), sample_ppp(30.0, 1.0, 5));
        assert_ne!(sample_ppp(30.0, 1.0, 5), sample_ppp(30.0, 1.0, 6));
    }

    #[test]
    fn torus_wraps() {
        assert!((torus_dist2([0.05, 0.5], [0.95, 0.5], 1.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn point_list_round_trip() {
        let s = Scenario {
            lambda_ue: 40.0,
            ..Scenario::reference()
        };
        let mut policy = Policy::unicast_only(s.n_files, 1);
        policy.cache_weights[..10].fill(1.0);
        let net = NetworkRealization::sample(&s, &policy, 0.3, 9).unwrap();
        assert!(net.cache_contents.iter().all(|c| c == &(0..10).collect::<Vec<_>>()));
        let list = net.to_point_list();
        let back: PointList = list.to_string().parse().unwrap();
        assert_eq!(back, list);
        assert_eq!(back.of_kind(PointKind::Bs).count(), net.bs_points.len());
    }

    #[test]
    fn fading_is_fixed_per_link() {
        let s = Scenario::reference();
        let net = NetworkRealization::sample(&s, &Policy::unicast_only(s.n_files, 1), 0.1, 3).unwrap();
        assert_eq!(net.link_fading(2, 7), net.link_fading(2, 7));
        assert_ne!(net.link_fading(2, 7), net.link_fading(7, 2));
    }

    #[test]
    fn parse_errors() {
        assert!("hn 1 2\n# c\n\nbs 0.5 -1e3".parse::<PointList>().is_ok());
        for bad in ["xx 1 2", "hn 1", "hn 1 2 3", "ue nan 0", "bs 1 inf", "hn a b"] {
            assert!(matches!(bad.parse::<PointList>(), Err(Error::Parse(_))), "{bad}");
        }
    }
}
