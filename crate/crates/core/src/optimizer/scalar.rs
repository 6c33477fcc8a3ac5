//! Bracketed scalar minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`; returns
/// `(x, f(x))`. Stops when the bracket is shorter than `tol`.
pub fn golden_section<F, E>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Minimum of `f` over `[a, b]`: scan `points` equally spaced abscissae,
/// then refine around the best one by golden section. Endpoints are
/// candidates too.
pub fn scan_then_refine<F, E>(mut f: F, a: f64, b: f64, points: usize, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let points = points.max(3);
    let h = (b - a) / (points - 1) as f64;
    let mut best = (a, f(a)?);
    for k in 1..points {
        let x = a + h * k as f64;
        let fx = f(x)?;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let refined = golden_section(&mut f, lo, hi, tol)?;
    Ok(if refined.1 < best.1 { refined } else { best })
}
