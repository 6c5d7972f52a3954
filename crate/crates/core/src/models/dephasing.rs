//! Two-level atom coupled through σ_x to a thermal bosonic bath.
//!
//! H = ω₀σ₊σ₋ + Σ ω_n b†b − σ_x ⊗ O, O = Σ κ_n(b + b†), with the couplings
//! summarized by an Ohmic J(ω). Level 0 is the excited state.

use super::spectral::{bose, coth, one_minus_cos_over, one_minus_cos_over_sq, SpectralDensity, SpectralKind, Trig};
use std::f64::consts::FRAC_PI_4;
use crate::error::{Error, Result};
use crate::linalg::{pauli_x, ComplexMatrix, C64, I};
use crate::solvers::{rk4_evolve, TimeGrid, Trajectory};

const PANELS: usize = 64;

#[derive(Clone, Debug)]
pub struct DephasingParams {
    pub beta: f64,
    pub eta: f64,
    pub omega_c: f64,
    pub omega0: f64,
    /// Initial system state; |e⟩⟨e| unless set otherwise.
    pub rho_s0: ComplexMatrix,
}

impl DephasingParams {
    pub fn new(beta: f64, eta: f64, omega_c: f64, omega0: f64) -> Self {
        Self {
            beta,
            eta,
            omega_c,
            omega0,
            rho_s0: ComplexMatrix::diag_real(&[1.0, 0.0]),
        }
    }

    pub fn density(&self) -> SpectralDensity {
        SpectralDensity::lorentz_sq(self.eta, self.omega_c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::Parameter(format!("inverse temperature must be positive, got {}", self.beta)));
        }
        if !self.omega0.is_finite() {
            return Err(Error::Parameter("transition frequency must be finite".into()));
        }
        self.density().validate()
    }

    pub fn h_s(&self) -> ComplexMatrix {
        ComplexMatrix::diag_real(&[self.omega0, 0.0])
    }

    fn rho_ee0(&self) -> f64 {
        self.rho_s0[(0, 0)].re
    }

    fn require_degenerate_levels(&self, what: &str) -> Result<()> {
        if self.omega0 != 0.0 {
            return Err(Error::Unsupported(format!("{what} is implemented for ω₀ = 0 only")));
        }
        Ok(())
    }
}

/// Cov(O, O) = ∫ J(ω) coth(βω/2) dω.
pub fn dephasing_cov(p: &DephasingParams) -> Result<f64> {
    p.validate()?;
    let beta = p.beta;
    p.density().integrate(|w| coth(beta * w / 2.0), PANELS)
}

/// γ(τ) = 2∫ J(ω) coth(βω/2) sin(ωτ)/ω dω.
pub fn tcl2_rate(p: &DephasingParams, tau: f64) -> Result<f64> {
    let beta = p.beta;
    Ok(2.0 * p.density().fourier(Some(beta), tau, Trig::Sin)?)
}

/// ∫₀^τ γ = 2∫ J(ω) coth(βω/2)(1 − cos ωτ)/ω² dω.
pub fn tcl2_exponent(p: &DephasingParams, tau: f64) -> Result<f64> {
    let beta = p.beta;
    Ok(2.0 * p.density().integrate(|w| coth(beta * w / 2.0) * one_minus_cos_over_sq(w, tau), PANELS)?)
}

/// Λ(τ) = ∫ J(ω)(1 − cos ωτ)/ω dω, the commutator part of the bath memory.
pub fn memory_shift(p: &DephasingParams, tau: f64) -> Result<f64> {
    let d = p.density();
    if d.kind == SpectralKind::OhmicLorentzSq && tau * d.omega_c >= 10.0 {
        // far from the small-τ cancellation: ∫J/ω is η ω_c π/4
        return Ok(d.eta * d.omega_c * FRAC_PI_4 - d.fourier(None, tau, Trig::Cos)?);
    }
    d.integrate(|w| one_minus_cos_over(w, tau), PANELS)
}

/// (S(β, ω₀), S(β, −ω₀)) with S(β, ω) = 2(n(β, ω) + 1)J(ω).
pub fn redfield_rates(p: &DephasingParams) -> Result<(f64, f64)> {
    p.validate()?;
    let w = p.omega0.abs();
    if w * p.beta < 1e-8 {
        // J(ω) ≈ ηω near zero, so both tend to 2η/β
        let s = 2.0 * p.eta / p.beta;
        return Ok((s, s));
    }
    let j = p.density().j(w);
    let n = bose(p.beta, w);
    let emit = 2.0 * (n + 1.0) * j;
    let absorb = 2.0 * n * j;
    Ok(if p.omega0 > 0.0 { (emit, absorb) } else { (absorb, emit) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DephasingMethod {
    Mll,
    ExactTcl2,
    Redfield,
}

/// Closed-form excited-state populations.
pub fn dephasing_populations(p: &DephasingParams, method: DephasingMethod, grid: TimeGrid) -> Result<Trajectory> {
    p.validate()?;
    let r0 = p.rho_ee0();
    let times = grid.times();
    let values: Vec<f64> = match method {
        DephasingMethod::Mll => {
            let cov = dephasing_cov(p)?;
            times
                .iter()
                .map(|&t| {
                    let s = t - grid.t0;
                    0.5 + (r0 - 0.5) * (-2.0 * s * s * cov).exp()
                })
                .collect()
        }
        DephasingMethod::ExactTcl2 => {
            p.require_degenerate_levels("the exact dephasing solution")?;
            times
                .iter()
                .map(|&t| Ok(0.5 + (r0 - 0.5) * (-2.0 * tcl2_exponent(p, t - grid.t0)?).exp()))
                .collect::<Result<_>>()?
        }
        DephasingMethod::Redfield => {
            let (s_plus, s_minus) = redfield_rates(p)?;
            let total = s_plus + s_minus;
            times
                .iter()
                .map(|&t| {
                    let e = (-total * (t - grid.t0)).exp();
                    s_minus / total * (1.0 - e) + r0 * e
                })
                .collect()
        }
    };
    Ok(Trajectory::from_values(grid, "pop_e", values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DephasingEquation {
    Mll,
    Tcl2,
    TlUll2,
    Redfield,
}

/// Integrates the 2×2 master equation of the chosen method with RK4.
pub fn dephasing_evolve(p: &DephasingParams, eq: DephasingEquation, grid: TimeGrid) -> Result<Trajectory> {
    p.validate()?;
    let h_s = p.h_s();
    match eq {
        DephasingEquation::Mll => {
            let cov = dephasing_cov(p)?;
            local_evolve(&h_s, &p.rho_s0, grid, |s| Ok((2.0 * s * cov, 0.0)))
        }
        DephasingEquation::Tcl2 => {
            p.require_degenerate_levels("TCL2 for this model")?;
            local_evolve(&h_s, &p.rho_s0, grid, |s| Ok((tcl2_rate(p, s)?, 0.0)))
        }
        DephasingEquation::TlUll2 => {
            p.require_degenerate_levels("time-local ULL2 for this model")?;
            local_evolve(&h_s, &p.rho_s0, grid, |s| Ok((tcl2_rate(p, s)?, memory_shift(p, s)?)))
        }
        DephasingEquation::Redfield => redfield_evolve(p, grid),
    }
}

/// dρ/dt = −i[H_S, ρ] + γ(s)(σ_xρσ_x − ρ) − 2i⟨σ_x⟩Λ(s)[σ_x, ρ]
///
/// `coefficients(s)` returns (γ(s), Λ(s)); they are tabulated on the RK4
/// half-step grid before integrating.
fn local_evolve(h_s: &ComplexMatrix, rho0: &ComplexMatrix, grid: TimeGrid, coefficients: impl Fn(f64) -> Result<(f64, f64)>) -> Result<Trajectory> {
    let table: Vec<(f64, f64)> = (0..=2 * grid.steps)
        .map(|k| coefficients(k as f64 * grid.dt / 2.0))
        .collect::<Result<_>>()?;
    let sx = pauli_x();
    let t0 = grid.t0;
    let half = grid.dt / 2.0;
    let rhs = |t: f64, rho: &ComplexMatrix| {
        let k = ((t - t0) / half).round() as usize;
        let (gamma, shift) = table[k.min(table.len() - 1)];
        let mut out = h_s.commutator(rho).scale(-I);
        let flip = sx.matmul(rho).matmul(&sx);
        out.axpy(C64::new(gamma, 0.0), &(&flip - rho));
        if shift != 0.0 {
            let mean_x = crate::ull::mean(rho, &sx).re;
            out.axpy(C64::new(0.0, -2.0 * mean_x * shift), &sx.commutator(rho));
        }
        out.hermitian_part()
    };
    Ok(rk4_evolve(rhs, rho0, grid)?.with_population("pop_e", 0))
}

/// Redfield equation with S(β, ±ω₀) in matrix form.
pub fn redfield_evolve(p: &DephasingParams, grid: TimeGrid) -> Result<Trajectory> {
    let (s_plus, s_minus) = redfield_rates(p)?;
    let h_s = p.h_s();
    let up = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let down = up.adjoint();
    let n_e = up.matmul(&down);
    let n_g = down.matmul(&up);
    let rhs = |_: f64, rho: &ComplexMatrix| {
        let mut out = h_s.commutator(rho).scale(-I);
        let mut d = up.matmul(rho).matmul(&up);
        d += &down.matmul(rho).matmul(&down);
        let mut acc = d.scale_real(s_plus + s_minus);
        acc.axpy(C64::new(2.0 * s_minus, 0.0), &up.matmul(rho).matmul(&down));
        acc.axpy(C64::new(-s_minus, 0.0), &n_g.anticommutator(rho));
        acc.axpy(C64::new(2.0 * s_plus, 0.0), &down.matmul(rho).matmul(&up));
        acc.axpy(C64::new(-s_plus, 0.0), &n_e.anticommutator(rho));
        out.axpy(C64::new(0.5, 0.0), &acc);
        out.hermitian_part()
    };
    Ok(rk4_evolve(rhs, &p.rho_s0, grid)?.with_population("pop_e", 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::spectral::sin_over;
    use crate::linalg::{annihilation, kron, hermitian_eig};
    use crate::solvers::{tcl2_evolve, tl_ull2_evolve, OpenSystem};

    fn standard(beta: f64) -> DephasingParams {
        DephasingParams::new(beta, 0.5, 100.0, 0.0)
    }

    /// Composite Simpson on a uniform grid (n even), an independent check on
    /// the adaptive quadrature.
    fn uniform_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    fn lorentz_tail(eta: f64, wc: f64, w: f64) -> f64 {
        eta * wc * wc / (2.0 * (1.0 + w * w / (wc * wc)))
    }

    #[test]
    fn covariance_against_uniform_grid() {
        for beta in [1.0, 100.0] {
            let p = standard(beta);
            let d = p.density();
            // integrand is J coth(βω/2), limit 2η/β at zero
            let f = |w: f64| if w == 0.0 { 2.0 * p.eta / beta } else { d.j(w) * coth(beta * w / 2.0) };
            let upper = 2.0e5;
            let want = uniform_simpson(f, 0.0, 200.0, 400_000) + uniform_simpson(f, 200.0, upper, 2_000_000) + lorentz_tail(p.eta, p.omega_c, upper);
            let got = dephasing_cov(&p).unwrap();
            assert!(((got - want) / want).abs() < 1e-8, "β={beta}: {got} vs {want}");
        }
    }

    #[test]
    fn covariance_limits() {
        let mut p = standard(1.0);
        p.eta = 0.0;
        assert_eq!(dephasing_cov(&p).unwrap(), 0.0);
        // β → ∞: the vacuum value ∫J
        let p = DephasingParams::new(1e9, 0.5, 100.0, 0.0);
        let got = dephasing_cov(&p).unwrap();
        assert!((got / p.density().total_weight() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mll_is_gaussian_and_matches_integrated_equation() {
        let p = standard(1.0);
        let cov = dephasing_cov(&p).unwrap();
        let grid = TimeGrid::span(0.05, 500).unwrap();
        let closed = dephasing_populations(&p, DephasingMethod::Mll, grid).unwrap();
        let pop = closed.observable("pop_e").unwrap();
        assert_eq!(pop[0], 1.0);
        for (k, t) in grid.times().iter().enumerate() {
            assert!((pop[k] - (0.5 + 0.5 * (-2.0 * t * t * cov).exp())).abs() < 1e-15);
        }
        let ode = dephasing_evolve(&p, DephasingEquation::Mll, grid).unwrap();
        let pe = ode.observable("pop_e").unwrap();
        for (a, b) in pop.iter().zip(pe) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn tcl2_rate_is_derivative_of_exponent() {
        let p = standard(1.0);
        let h = 1e-5;
        for tau in [0.001, 0.01, 0.2] {
            let fd = (tcl2_exponent(&p, tau + h).unwrap() - tcl2_exponent(&p, tau - h).unwrap()) / (2.0 * h);
            let g = tcl2_rate(&p, tau).unwrap();
            assert!(((fd - g) / g).abs() < 1e-5, "τ={tau}: {fd} vs {g}");
        }
        assert_eq!(tcl2_rate(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tcl2_equation_reproduces_exact_closed_form() {
        let p = standard(1.0);
        let grid = TimeGrid::span(0.1, 400).unwrap();
        let exact = dephasing_populations(&p, DephasingMethod::ExactTcl2, grid).unwrap();
        let ode = dephasing_evolve(&p, DephasingEquation::Tcl2, grid).unwrap();
        for (a, b) in exact.observable("pop_e").unwrap().iter().zip(ode.observable("pop_e").unwrap()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn redfield_closed_form_and_rate() {
        let p = standard(1.0);
        let (sp, sm) = redfield_rates(&p).unwrap();
        assert!((sp + sm - 4.0 * p.eta / p.beta).abs() < 1e-12);
        let grid = TimeGrid::span(2.0, 400).unwrap();
        let closed = dephasing_populations(&p, DephasingMethod::Redfield, grid).unwrap();
        let ode = redfield_evolve(&p, grid).unwrap();
        for (k, t) in grid.times().iter().enumerate() {
            let want = 0.5 * (1.0 - (-2.0 * t).exp()) + (-2.0 * t).exp();
            assert!((closed.observable("pop_e").unwrap()[k] - want).abs() < 1e-14);
            assert!((ode.observable("pop_e").unwrap()[k] - want).abs() < 1e-9);
        }
        // detailed balance away from ω₀ = 0
        let q = DephasingParams::new(2.0, 0.5, 100.0, 1.5);
        let (sp, sm) = redfield_rates(&q).unwrap();
        assert!((sm / sp - (-2.0f64 * 1.5).exp()).abs() < 1e-12);
        let far = dephasing_populations(&q, DephasingMethod::Redfield, TimeGrid::span(200.0, 10).unwrap()).unwrap();
        let end = *far.observable("pop_e").unwrap().last().unwrap();
        assert!((end - sm / (sp + sm)).abs() < 1e-12);
    }

    #[test]
    fn tl_ull2_coincides_with_tcl2_from_excited_state() {
        for beta in [1.0, 100.0] {
            let p = standard(beta);
            let grid = TimeGrid::span(0.05, 100).unwrap();
            let a = dephasing_evolve(&p, DephasingEquation::Tcl2, grid).unwrap();
            let b = dephasing_evolve(&p, DephasingEquation::TlUll2, grid).unwrap();
            for (x, y) in a.observable("pop_e").unwrap().iter().zip(b.observable("pop_e").unwrap()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nonzero_frequency_rejected_where_closed_forms_need_it() {
        let p = DephasingParams::new(1.0, 0.5, 100.0, 1.0);
        let grid = TimeGrid::span(1.0, 10).unwrap();
        assert!(dephasing_populations(&p, DephasingMethod::ExactTcl2, grid).is_err());
        assert!(dephasing_evolve(&p, DephasingEquation::TlUll2, grid).is_err());
        assert!(dephasing_evolve(&p, DephasingEquation::Mll, grid).is_ok());
    }

    /// Two bosonic modes at low temperature: the generic interaction-picture
    /// solvers must agree with the 2×2 forms built from the discrete J.
    #[test]
    fn two_by_two_forms_match_generic_solvers_on_discrete_bath() {
        let beta = 3.0;
        let modes = [(1.0, 0.35), (1.7, 0.25)];
        let cut = 10;
        let a = annihilation(cut);
        let id = ComplexMatrix::identity(cut);
        let ops = [kron(&a, &id), kron(&id, &a)];
        let mut h_b = ComplexMatrix::zeros(cut * cut, cut * cut);
        let mut obs = ComplexMatrix::zeros(cut * cut, cut * cut);
        for ((w, k), b) in modes.iter().zip(&ops) {
            h_b.axpy(C64::new(*w, 0.0), &b.adjoint().matmul(b));
            obs.axpy(C64::new(*k, 0.0), &(b + &b.adjoint()));
        }
        let eig = hermitian_eig(&h_b).unwrap();
        let thermal = eig.apply_fn(|e| C64::new((-beta * e).exp(), 0.0));
        let rho_b0 = thermal.scale_real(1.0 / thermal.trace().re);
        let rho_s0 = ComplexMatrix::from_real(2, 2, &[0.8, 0.3, 0.3, 0.2]);
        let model = OpenSystem {
            h_s: ComplexMatrix::zeros(2, 2),
            h_b,
            h_i: kron(&pauli_x(), &obs).scale_real(-1.0),
            rho_s0: rho_s0.clone(),
            rho_b0,
        };
        let grid = TimeGrid::span(1.5, 150).unwrap();
        let rate = |s: f64| -> f64 { modes.iter().map(|(w, k)| 2.0 * k * k * coth(beta * w / 2.0) * sin_over(*w, s)).sum() };
        let shift = |s: f64| -> f64 { modes.iter().map(|(w, k)| k * k * one_minus_cos_over(*w, s)).sum() };
        let h0 = ComplexMatrix::zeros(2, 2);
        let small_tcl2 = local_evolve(&h0, &rho_s0, grid, |s| Ok((rate(s), 0.0))).unwrap();
        let small_tl = local_evolve(&h0, &rho_s0, grid, |s| Ok((rate(s), shift(s)))).unwrap();
        let big_tcl2 = tcl2_evolve(&model, grid).unwrap();
        let big_tl = tl_ull2_evolve(&model, grid).unwrap();
        for k in [50, 100, 150] {
            assert!((&small_tcl2.states[k] - &big_tcl2.states[k]).frobenius_norm() < 1e-8);
            assert!((&small_tl.states[k] - &big_tl.states[k]).frobenius_norm() < 1e-8);
        }
        // the coherent start makes the two equations differ
        assert!((&small_tl.states[150] - &small_tcl2.states[150]).frobenius_norm() > 1e-3);
    }
}
