//! Browser bindings. Each call returns a flat row-major table so the page can
//! read it straight out of a `Float64Array`.

use corrpic_core::models::damped_ho::{damped_ho_exact, damped_ho_lindblad, damped_ho_mll, damped_ho_tcl2, DampedHoParams};
use corrpic_core::models::dephasing::{dephasing_populations, DephasingMethod, DephasingParams};
use corrpic_core::models::jc::{jc_extract_coefficients, jc_state, JcParams};
use corrpic_core::solvers::{TimeGrid, Trajectory};
use wasm_bindgen::prelude::*;

const MAX_STEPS: usize = 20_000;
const MAX_MODES: usize = 600;

fn grid(horizon: f64, steps: usize) -> Result<TimeGrid, String> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(format!("steps must be in 1..={MAX_STEPS}"));
    }
    TimeGrid::span(horizon, steps).map_err(|e| e.to_string())
}

fn interleave(times: &[f64], columns: &[&[f64]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len() * (columns.len() + 1));
    for (k, t) in times.iter().enumerate() {
        out.push(*t);
        out.extend(columns.iter().map(|c| c[k]));
    }
    out
}

fn column<'a>(traj: &'a Trajectory, name: &str) -> Result<&'a [f64], String> {
    traj.observable(name).ok_or_else(|| format!("missing {name}"))
}

/// Rows of (τ, exact, MLL, Redfield) excited-state populations, atom starting excited.
pub fn dephasing_table(beta: f64, eta: f64, omega_c: f64, horizon: f64, steps: usize) -> Result<Vec<f64>, String> {
    let p = DephasingParams::new(beta, eta, omega_c, 0.0);
    let g = grid(horizon, steps)?;
    let run = |m| dephasing_populations(&p, m, g).map_err(|e| e.to_string());
    let (ex, mll, red) = (run(DephasingMethod::ExactTcl2)?, run(DephasingMethod::Mll)?, run(DephasingMethod::Redfield)?);
    Ok(interleave(&g.times(), &[column(&ex, "pop_e")?, column(&mll, "pop_e")?, column(&red, "pop_e")?]))
}

/// (γ₁, γ₂, σ_z shift, excited population) read off the exact state at τ.
pub fn jc_table(r1: f64, lambda: f64, omega0: f64, tau: f64) -> Result<Vec<f64>, String> {
    if !(0.0..=1.0).contains(&r1) {
        return Err("r1 must lie in [0, 1]".into());
    }
    let p = JcParams::new(r1, lambda, omega0);
    let c = jc_extract_coefficients(&p, tau).map_err(|e| e.to_string())?;
    let psi = jc_state(&p, tau).map_err(|e| e.to_string())?;
    Ok(vec![c.gamma1, c.gamma2, c.omega_tilde, psi[0].norm_sqr()])
}

/// Rows of (τ, exact, MLL, Lindblad, TCL2) populations of |1⟩.
pub fn damped_ho_table(omega0: f64, omega_c: f64, modes: usize, horizon: f64, steps: usize) -> Result<Vec<f64>, String> {
    if modes == 0 || modes > MAX_MODES {
        return Err(format!("modes must be in 1..={MAX_MODES}"));
    }
    let p = DampedHoParams::new(omega0, omega_c, modes);
    let g = grid(horizon, steps)?;
    let ex = damped_ho_exact(&p, g).map_err(|e| e.to_string())?;
    let mll = damped_ho_mll(&p, g).map_err(|e| e.to_string())?;
    let lind = damped_ho_lindblad(&p, g).map_err(|e| e.to_string())?;
    let tcl2 = damped_ho_tcl2(&p, g).map_err(|e| e.to_string())?;
    Ok(interleave(
        &g.times(),
        &[column(&ex, "pop_1")?, column(&mll, "pop_1")?, column(&lind, "pop_1")?, column(&tcl2, "pop_1")?],
    ))
}

#[wasm_bindgen(js_name = dephasingTable)]
pub fn dephasing_table_js(beta: f64, eta: f64, omega_c: f64, horizon: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    dephasing_table(beta, eta, omega_c, horizon, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = jcTable)]
pub fn jc_table_js(r1: f64, lambda: f64, omega0: f64, tau: f64) -> Result<Vec<f64>, JsError> {
    jc_table(r1, lambda, omega0, tau).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = dampedHoTable)]
pub fn damped_ho_table_js(omega0: f64, omega_c: f64, modes: usize, horizon: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    damped_ho_table(omega0, omega_c, modes, horizon, steps).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dephasing_rows_start_excited() {
        let t = dephasing_table(1.0, 0.5, 100.0, 0.1, 10).unwrap();
        assert_eq!(t.len(), 11 * 4);
        assert_eq!(&t[..4], &[0.0, 1.0, 1.0, 1.0]);
        assert!(t.chunks(4).all(|r| r[1..].iter().all(|v| (0.5..=1.0).contains(v))));
    }

    #[test]
    fn jc_rates_vanish_at_start() {
        let v = jc_table(0.6, 1.0, 1.0, 0.0).unwrap();
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
        assert!((v[3] - 0.36).abs() < 1e-12);
        assert!(jc_table(1.5, 1.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn damped_ho_rows() {
        let t = damped_ho_table(1.0, 5.0, 40, 2.0, 20).unwrap();
        assert_eq!(t.len(), 21 * 5);
        assert!(t[1..5].iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(damped_ho_table(1.0, 5.0, 0, 2.0, 20).is_err());
        assert!(damped_ho_table(1.0, 5.0, 10, 2.0, 0).is_err());
    }
}
