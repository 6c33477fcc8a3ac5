use crate::error::{Error, Result};
use crate::specfun::quad::{integrate, QuadratureSpec};

/// `∫₀^{w_th} w df(w)` computed by parts as `w_th f(w_th) − ∫₀^{w_th} f(w) dw`.
///
/// `f` is never differentiated; it only has to be finite on `(0, w_th]` with
/// `w f(w) → 0` at the origin.
pub fn weighted_stieltjes_integral<F>(f: F, w_th: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(w_th > 0.0) || !w_th.is_finite() {
        return Err(Error::Domain(format!("upper limit must be positive and finite, got {w_th}")));
    }
    let at_top = f(w_th);
    if !at_top.is_finite() {
        return Err(Error::Domain(format!("f({w_th}) is not finite")));
    }
    let area = integrate(&f, 0.0, w_th, spec)?;
    let near_zero = f(w_th * 1e-12) * w_th * 1e-12;
    if !area.value[0].is_finite() || !near_zero.is_finite() || near_zero.abs() > spec.abs_tol.max(1e-9) {
        return Err(Error::Domain("integrand diverges at the origin".into()));
    }
    Ok(w_th * at_top - area.value[0])
}
