//! Adaptive Gauss–Kronrod (10/21-point) quadrature over finite intervals.
//!
//! The integrator is generic over a fixed number of output components so that
//! an integrand and its parameter derivatives can share every function
//! evaluation. Subdivision is driven by the largest component error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits for the numerical integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Period of the dominant oscillation, when known. Used to cap the length
    /// of a single Kronrod panel.
    pub oscillation_period_hint: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-11,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            oscillation_period_hint: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::invalid(
                "quadrature",
                "tolerances must be strictly positive",
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid(
                "quadrature",
                "max_subdivisions must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Result of an integration: value and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub evaluations: usize,
}

impl<const K: usize> Estimate<K> {
    fn zero() -> Self {
        Estimate {
            value: [0.0; K],
            error: [0.0; K],
            evaluations: 0,
        }
    }

    pub(crate) fn accumulate(&mut self, other: &Estimate<K>) {
        for k in 0..K {
            self.value[k] += other.value[k];
            self.error[k] += other.error[k];
        }
        self.evaluations += other.evaluations;
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().cloned().fold(0.0, f64::max)
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_123_813_200,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod abscissae 1, 3, 5, 7, 9.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
pub fn gauss_kronrod_21<const K: usize, F>(f: &mut F, a: f64, b: f64) -> Estimate<K>
where
    F: FnMut(f64) -> [f64; K],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut kronrod = [0.0; K];
    let mut gauss = [0.0; K];
    let mut abs_sum = [0.0; K];
    let mut samples = [[0.0; K]; 21];
    samples[20] = fc;
    for k in 0..K {
        kronrod[k] = WGK[10] * fc[k];
        abs_sum[k] = WGK[10] * fc[k].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
        for k in 0..K {
            kronrod[k] += WGK[j] * (f1[k] + f2[k]);
            abs_sum[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
    }

    let mut out = Estimate::zero();
    out.evaluations = 21;
    for k in 0..K {
        let mean = 0.5 * kronrod[k];
        let mut asc = WGK[10] * (fc[k] - mean).abs();
        for j in 0..10 {
            asc += WGK[j] * ((samples[2 * j][k] - mean).abs() + (samples[2 * j + 1][k] - mean).abs());
        }
        let resasc = asc * half.abs();
        let resabs = abs_sum[k] * half.abs();
        let mut err = ((kronrod[k] - gauss[k]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        out.value[k] = kronrod[k] * half;
        out.error[k] = err;
    }
    out
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    est: Estimate<K>,
    key: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const K: usize> Eq for Panel<K> {}
impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn accepted<const K: usize>(value: &[f64; K], error: &[f64; K], spec: &QuadratureSpec) -> bool {
    (0..K).all(|k| error[k] <= spec.abs_tol.max(spec.rel_tol * value[k].abs()))
}

/// Adaptive integration of a vector-valued integrand over `[a, b]`.
pub fn integrate_vec<const K: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<K>>
where
    F: FnMut(f64) -> [f64; K],
{
    if a == b {
        return Ok(Estimate::zero());
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("non-finite interval [{a}, {b}]")));
    }

    let first = gauss_kronrod_21(&mut f, a, b);
    if accepted(&first.value, &first.error, spec) {
        return Ok(first);
    }

    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        key: first.max_error(),
        est: first,
    });
    let mut total = first;
    let mut panels = 1usize;

    while panels < spec.max_subdivisions {
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval no longer representable; keep it as is.
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_21(&mut f, worst.a, mid);
        let right = gauss_kronrod_21(&mut f, mid, worst.b);
        for k in 0..K {
            total.value[k] += left.value[k] + right.value[k] - worst.est.value[k];
            total.error[k] += left.error[k] + right.error[k] - worst.est.error[k];
        }
        total.evaluations += left.evaluations + right.evaluations;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            key: left.max_error(),
            est: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            key: right.max_error(),
            est: right,
        });
        panels += 1;

        if accepted(&total.value, &total.error, spec) {
            // Resum from panels to shed the drift of the running update.
            let mut exact = Estimate::zero();
            for p in heap.iter() {
                exact.accumulate(&p.est);
            }
            exact.evaluations = total.evaluations;
            return Ok(exact);
        }
    }

    Err(Error::Quadrature {
        partial: total.value[0],
        error_bound: total.max_error(),
        subdivisions: panels,
    })
}

/// Adaptive integration of a scalar integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate<1>>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x| [f(x)], a, b, spec)
}

/// Integrates over consecutive panels delimited by `points` (sorted).
pub fn integrate_breaks<const K: usize, F>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate<K>>
where
    F: FnMut(f64) -> [f64; K],
{
    let mut total = Estimate::zero();
    for w in points.windows(2) {
        let part = integrate_vec(&mut f, w[0], w[1], spec)?;
        total.accumulate(&part);
    }
    Ok(total)
}
