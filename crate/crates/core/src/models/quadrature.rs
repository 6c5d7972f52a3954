//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// ∫_a^b f with a relative tolerance on the whole integral.
///
/// The interval is first cut into `panels` pieces; a coarse pass sets the
/// absolute budget, which is then shared among panels by width.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rtol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut coarse = Vec::with_capacity(panels);
    let mut scale = 0.0;
    let mut total = 0.0;
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        let x1 = if p + 1 == panels { b } else { x0 + h };
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(xm), f(x1));
        if !(f0.is_finite() && fm.is_finite() && f1.is_finite()) {
            return Err(Error::Quadrature(format!("integrand is not finite on [{x0:.6e}, {x1:.6e}]")));
        }
        let s = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        scale += (x1 - x0) / 6.0 * (f0.abs() + 4.0 * fm.abs() + f1.abs());
        total += s;
        coarse.push((x0, x1, f0, fm, f1, s));
    }
    let budget = rtol * total.abs().max(1e-3 * scale).max(f64::MIN_POSITIVE);
    let mut sum = 0.0;
    for &(x0, x1, f0, fm, f1, s) in &coarse {
        let tol = budget * (x1 - x0) / (b - a);
        sum += refine(&f, x0, x1, f0, fm, f1, s, tol, MAX_DEPTH)?;
    }
    if !sum.is_finite() {
        return Err(Error::Quadrature("integrand produced a non-finite value".into()));
    }
    Ok(sum)
}

#[allow(clippy::too_many_arguments)]
fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Quadrature(format!("integrand is not finite on [{a:.6e}, {b:.6e}]")));
    }
    if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 * m.abs().max(1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "no convergence on [{a:.6e}, {b:.6e}] (local error {:.3e})",
            delta.abs()
        )));
    }
    Ok(refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}
