//! Harmonic oscillator damped by M bath oscillators at zero temperature.
//!
//! H = ω₀a†a + Σ ω_k b_k†b_k + Σ g_k(a†b_k + a b_k†), ω_k = 0.1k, g_k = √J(ω_k)
//! with J(ω) = (ω/π)e^{−ω/ω_c}. The initial state (c₀|0⟩ + c₁|1⟩) ⊗ |vac⟩
//! never leaves the span of |0,vac⟩, |1,vac⟩ and |0,1_k⟩.

use super::quadrature::integrate;
use super::spectral::{one_minus_cos_over, one_minus_cos_over_sq, sin_over, SpectralDensity};
use crate::error::{Error, Result};
use crate::linalg::{annihilation, hermitian_eig, kron, ComplexMatrix, C64, I, ZERO};
use crate::solvers::{
    dephase_in_eigenbasis, lindblad_evolve, nz2_evolve, rk4_evolve, ull2_evolve, MemoryOptions, MemoryOutput,
    OpenSystem, TimeGrid, Trajectory,
};
use std::f64::consts::PI;

/// Spacing of the default bath frequency grid.
pub const MODE_SPACING: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct DampedHoParams {
    pub omega0: f64,
    pub omega_c: f64,
    pub modes: usize,
    pub c0: C64,
    pub c1: C64,
    /// Replaces ω_k = 0.1k when set; length must equal `modes`.
    pub omega_k: Option<Vec<f64>>,
}

impl DampedHoParams {
    /// Starts in |1⟩.
    pub fn new(omega0: f64, omega_c: f64, modes: usize) -> Self {
        Self {
            omega0,
            omega_c,
            modes,
            c0: ZERO,
            c1: C64::new(1.0, 0.0),
            omega_k: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::Parameter("at least one bath mode is required".into()));
        }
        let norm = self.c0.norm_sqr() + self.c1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("|c0|² + |c1|² = {norm}")));
        }
        if let Some(w) = &self.omega_k {
            if w.len() != self.modes {
                return Err(Error::Parameter(format!("{} mode frequencies given for {} modes", w.len(), self.modes)));
            }
        }
        if !self.omega0.is_finite() {
            return Err(Error::Parameter("oscillator frequency must be finite".into()));
        }
        self.density().validate()
    }

    pub fn density(&self) -> SpectralDensity {
        SpectralDensity::exponential(self.omega_c)
    }
}

/// (ω_k, g_k) with g_k = √J(ω_k).
pub fn damped_ho_bath(p: &DampedHoParams) -> Result<(Vec<f64>, Vec<f64>)> {
    p.validate()?;
    let omegas = match &p.omega_k {
        Some(w) => w.clone(),
        None => (1..=p.modes).map(|k| MODE_SPACING * k as f64).collect(),
    };
    let j = p.density();
    let g = omegas.iter().map(|&w| j.j(w).sqrt()).collect();
    Ok((omegas, g))
}

/// G = Σ g_k².
pub fn coupling_sum(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum()
}

/// Hamiltonian on {|0,vac⟩, |1,vac⟩, |0,1_1⟩, …, |0,1_M⟩}.
pub fn sector_hamiltonian(p: &DampedHoParams) -> Result<ComplexMatrix> {
    let (w, g) = damped_ho_bath(p)?;
    let n = p.modes + 2;
    let mut h = ComplexMatrix::zeros(n, n);
    h[(1, 1)] = C64::new(p.omega0, 0.0);
    for k in 0..p.modes {
        h[(2 + k, 2 + k)] = C64::new(w[k], 0.0);
        h[(1, 2 + k)] = C64::new(g[k], 0.0);
        h[(2 + k, 1)] = C64::new(g[k], 0.0);
    }
    Ok(h)
}

fn sector_initial(p: &DampedHoParams) -> Vec<C64> {
    let mut psi = vec![ZERO; p.modes + 2];
    psi[0] = p.c0;
    psi[1] = p.c1;
    psi
}

/// System state on {|0⟩, |1⟩} from a sector amplitude vector.
fn sector_system_state(psi: &[C64]) -> ComplexMatrix {
    let p1 = psi[1].norm_sqr();
    let p0: f64 = psi[0].norm_sqr() + psi[2..].iter().map(|z| z.norm_sqr()).sum::<f64>();
    let coh = psi[0] * psi[1].conj();
    ComplexMatrix::from_vec(2, 2, vec![C64::new(p0, 0.0), coh, coh.conj(), C64::new(p1, 0.0)])
}

/// Exact dynamics in the single-excitation sector, eigensolved once.
pub fn damped_ho_exact(p: &DampedHoParams, grid: TimeGrid) -> Result<Trajectory> {
    let h = sector_hamiltonian(p)?;
    let eig = hermitian_eig(&h)?;
    let psi0 = sector_initial(p);
    let n = psi0.len();
    let v = &eig.vectors;
    // amplitudes in the energy basis
    let coeff: Vec<C64> = (0..n).map(|m| (0..n).map(|x| v[(x, m)].conj() * psi0[x]).sum()).collect();
    let mut states = Vec::with_capacity(grid.steps + 1);
    for t in grid.times() {
        let s = t - grid.t0;
        let rotated: Vec<C64> = coeff
            .iter()
            .zip(&eig.values)
            .map(|(c, e)| c * C64::from_polar(1.0, -e * s))
            .collect();
        let psi: Vec<C64> = (0..n).map(|x| (0..n).map(|m| v[(x, m)] * rotated[m]).sum()).collect();
        states.push(sector_system_state(&psi));
    }
    Ok(Trajectory::new(grid, states).with_population("pop_1", 1))
}

/// ρ*₁₁ of the energy-dephased initial state.
pub fn damped_ho_asymptotic(p: &DampedHoParams) -> Result<f64> {
    let h = sector_hamiltonian(p)?;
    let psi0 = sector_initial(p);
    let rho0 = ComplexMatrix::outer(&psi0, &psi0);
    let (rho, min_gap, degenerate) = dephase_in_eigenbasis(&h, &rho0)?;
    if degenerate || min_gap <= 1e-9 {
        return Err(Error::Unsupported(format!(
            "sector spectrum is (nearly) degenerate, smallest gap {min_gap:.3e}"
        )));
    }
    Ok(rho[(1, 1)].re)
}

fn detunings(p: &DampedHoParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (w, g) = damped_ho_bath(p)?;
    Ok((w.iter().map(|wk| p.omega0 - wk).collect(), g))
}

/// (γ(τ), κ(τ)) = (Σ g² sin(Δτ)/Δ, Σ 2g² sin²(Δτ/2)/Δ), Δ_k = ω₀ − ω_k.
pub fn tcl2_coefficients(p: &DampedHoParams, tau: f64) -> Result<(f64, f64)> {
    let (d, g) = detunings(p)?;
    let mut gamma = 0.0;
    let mut kappa = 0.0;
    for (dk, gk) in d.iter().zip(&g) {
        gamma += gk * gk * sin_over(*dk, tau);
        kappa += gk * gk * one_minus_cos_over(*dk, tau);
    }
    Ok((gamma, kappa))
}

/// TCL2 excited population |c₁|² exp(−2Σ g²(1 − cos Δτ)/Δ²).
pub fn tcl2_population(p: &DampedHoParams, tau: f64) -> Result<f64> {
    let (d, g) = detunings(p)?;
    let expo: f64 = d.iter().zip(&g).map(|(dk, gk)| gk * gk * one_minus_cos_over_sq(*dk, tau)).sum();
    Ok(p.c1.norm_sqr() * (-2.0 * expo).exp())
}

fn lowering() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])
}

fn initial_system(p: &DampedHoParams) -> ComplexMatrix {
    let psi = [p.c0, p.c1];
    ComplexMatrix::outer(&psi, &psi)
}

/// Σ g²(Δτ − sin Δτ)/Δ², the integral of κ.
fn tcl2_phase(d: &[f64], g: &[f64], tau: f64) -> f64 {
    d.iter()
        .zip(g)
        .map(|(dk, gk)| {
            let x = dk * tau;
            let v = if x.abs() < 1e-3 {
                dk * tau * tau * tau / 6.0 * (1.0 - x * x / 20.0)
            } else {
                (x - x.sin()) / (dk * dk)
            };
            gk * gk * v
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

fn two_level_state(p0: f64, p1: f64, coh10: C64) -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![C64::new(p0, 0.0), coh10.conj(), coh10, C64::new(p1, 0.0)])
}

/// Closed solution of the TCL2 equation: ρ₁₁ = |c₁|²e^{−2Γ}, ρ₁₀ = c₁c₀* e^{−iω₀τ − iK − Γ}.
pub fn damped_ho_tcl2(p: &DampedHoParams, grid: TimeGrid) -> Result<Trajectory> {
    let (d, g) = detunings(p)?;
    let mut states = Vec::with_capacity(grid.steps + 1);
    for t in grid.times() {
        let tau = t - grid.t0;
        let big_gamma: f64 = d.iter().zip(&g).map(|(dk, gk)| gk * gk * one_minus_cos_over_sq(*dk, tau)).sum();
        let phase = p.omega0 * tau + tcl2_phase(&d, &g, tau);
        let p1 = p.c1.norm_sqr() * (-2.0 * big_gamma).exp();
        let coh = p.c1 * p.c0.conj() * C64::from_polar((-big_gamma).exp(), -phase);
        states.push(two_level_state(1.0 - p1, p1, coh));
    }
    if let Some(k) = states.iter().position(|m| !m.is_finite()) {
        return Err(Error::NonFinite { step: k, time: grid.time(k) });
    }
    Ok(Trajectory::new(grid, states).with_population("pop_1", 1))
}

/// Closed solution of the MLL equation: ρ₁₁ = |c₁|²e^{−Gτ²}, ρ₁₀ = c₁c₀* e^{−iω₀τ − Gτ²/2}.
pub fn damped_ho_mll(p: &DampedHoParams, grid: TimeGrid) -> Result<Trajectory> {
    let (_, g) = damped_ho_bath(p)?;
    let big_g = coupling_sum(&g);
    let states = grid
        .times()
        .iter()
        .map(|t| {
            let tau = t - grid.t0;
            let decay = big_g * tau * tau;
            let p1 = p.c1.norm_sqr() * (-decay).exp();
            let coh = p.c1 * p.c0.conj() * C64::from_polar((-decay / 2.0).exp(), -p.omega0 * tau);
            two_level_state(1.0 - p1, p1, coh)
        })
        .collect();
    Ok(Trajectory::new(grid, states).with_population("pop_1", 1))
}

/// −i(ω₀ + κ(τ))[a†a, ρ] + γ(τ)(2aρa† − {a†a, ρ}) in the Schrödinger picture,
/// integrated with RK4. Stiff at large G; the closed form is preferred.
pub fn damped_ho_tcl2_equation(p: &DampedHoParams, grid: TimeGrid) -> Result<Trajectory> {
    let table: Vec<(f64, f64)> = (0..=2 * grid.steps)
        .map(|k| tcl2_coefficients(p, k as f64 * grid.dt / 2.0))
        .collect::<Result<_>>()?;
    let a = lowering();
    let num = a.adjoint().matmul(&a);
    let half = grid.dt / 2.0;
    let t0 = grid.t0;
    let w0 = p.omega0;
    let rhs = |t: f64, rho: &ComplexMatrix| {
        let k = (((t - t0) / half).round() as usize).min(table.len() - 1);
        let (gamma, kappa) = table[k];
        let mut out = num.commutator(rho).scale(C64::new(0.0, -(w0 + kappa)));
        let jump = a.matmul(rho).matmul_adj(&a).scale_real(2.0);
        out.axpy(C64::new(gamma, 0.0), &(&jump - &num.anticommutator(rho)));
        out.hermitian_part()
    };
    Ok(rk4_evolve(rhs, &initial_system(p), grid)?.with_population("pop_1", 1))
}

/// −i[ω₀a†a, ρ] + Gτ(2aρa† − {a†a, ρ}) integrated with RK4.
pub fn damped_ho_mll_equation(p: &DampedHoParams, grid: TimeGrid) -> Result<Trajectory> {
    let (_, g) = damped_ho_bath(p)?;
    let big_g = coupling_sum(&g);
    let a = lowering();
    let num = a.adjoint().matmul(&a);
    let t0 = grid.t0;
    let w0 = p.omega0;
    let rhs = |t: f64, rho: &ComplexMatrix| {
        let mut out = num.commutator(rho).scale(C64::new(0.0, -w0));
        let jump = a.matmul(rho).matmul_adj(&a).scale_real(2.0);
        out.axpy(C64::new(big_g * (t - t0), 0.0), &(&jump - &num.anticommutator(rho)));
        out.hermitian_part()
    };
    Ok(rk4_evolve(rhs, &initial_system(p), grid)?.with_population("pop_1", 1))
}

/// (δ, γ) = (P∫J(ω)/(ω₀ − ω) dω, πJ(ω₀)).
///
/// The principal value excludes [ω₀ − ε, ω₀ + ε] and removes the odd powers
/// of ε by two Richardson steps, starting from ε = 2h with h = ω₀/1000.
pub fn lindblad_coefficients(p: &DampedHoParams) -> Result<(f64, f64)> {
    p.validate()?;
    let j = p.density();
    let w0 = p.omega0;
    if !(w0 > 0.0) {
        return Err(Error::Parameter("the Lindblad shift needs ω₀ > 0".into()));
    }
    let upper = 50.0 * p.omega_c;
    let f = |w: f64| j.j(w) / (w0 - w);
    let excluded = |eps: f64| -> Result<f64> {
        Ok(integrate(f, 0.0, w0 - eps, 64, 1e-12)? + integrate(f, w0 + eps, upper.max(w0 + 2.0 * eps), 256, 1e-12)?)
    };
    let eps = 2.0 * w0 / 1000.0;
    let (e1, e2, e4) = (excluded(eps)?, excluded(eps / 2.0)?, excluded(eps / 4.0)?);
    let r1 = 2.0 * e2 - e1;
    let r2 = 2.0 * e4 - e2;
    let delta = (8.0 * r2 - r1) / 7.0;
    Ok((delta, PI * j.j(w0)))
}

/// Weak-coupling Lindblad equation with constant shift and rate.
pub fn damped_ho_lindblad(p: &DampedHoParams, grid: TimeGrid) -> Result<Trajectory> {
    let (delta, gamma) = lindblad_coefficients(p)?;
    let a = lowering();
    let h = a.adjoint().matmul(&a).scale_real(p.omega0 + delta);
    Ok(lindblad_evolve(&h, &[gamma], &[a], &initial_system(p), grid)?.with_population("pop_1", 1))
}

/// Finite bath representation used by the generic solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BathTruncation {
    /// System {|0⟩, |1⟩}, bath {|vac⟩, |1_k⟩}: dimension 2(M + 1).
    Sector,
    /// Fock cuts per oscillator: dimension system_cut · mode_cut^M.
    Fock { system_cut: usize, mode_cut: usize },
}

/// Largest joint dimension accepted when building a truncated model.
pub const MAX_TRUNCATED_DIM: usize = 1024;

pub fn damped_ho_open_system(p: &DampedHoParams, truncation: BathTruncation) -> Result<OpenSystem> {
    let (w, g) = damped_ho_bath(p)?;
    let m = p.modes;
    let (a, bath_ops, h_b) = match truncation {
        BathTruncation::Sector => {
            let d_b = m + 1;
            if 2 * d_b > MAX_TRUNCATED_DIM {
                return Err(Error::Unsupported(format!("sector model of dimension {} is too large", 2 * d_b)));
            }
            let mut e = vec![0.0; d_b];
            e[1..].copy_from_slice(&w);
            let ops: Vec<ComplexMatrix> = (0..m)
                .map(|k| {
                    let mut b = ComplexMatrix::zeros(d_b, d_b);
                    b[(0, k + 1)] = C64::new(1.0, 0.0);
                    b
                })
                .collect();
            (annihilation(2), ops, ComplexMatrix::diag_real(&e))
        }
        BathTruncation::Fock { system_cut, mode_cut } => {
            if system_cut < 2 || mode_cut < 2 {
                return Err(Error::Parameter("Fock cuts must be at least 2".into()));
            }
            let d_b = mode_cut.checked_pow(m as u32).unwrap_or(usize::MAX);
            if d_b.saturating_mul(system_cut) > MAX_TRUNCATED_DIM {
                return Err(Error::Unsupported(format!("Fock model with {m} modes exceeds dimension {MAX_TRUNCATED_DIM}")));
            }
            let single = annihilation(mode_cut);
            let ops: Vec<ComplexMatrix> = (0..m)
                .map(|k| {
                    let mut op = ComplexMatrix::identity(1);
                    for j in 0..m {
                        let f = if j == k { single.clone() } else { ComplexMatrix::identity(mode_cut) };
                        op = kron(&op, &f);
                    }
                    op
                })
                .collect();
            let mut h_b = ComplexMatrix::zeros(d_b, d_b);
            for (b, wk) in ops.iter().zip(&w) {
                h_b.axpy(C64::new(*wk, 0.0), &b.adjoint().matmul(b));
            }
            (annihilation(system_cut), ops, h_b)
        }
    };
    let d_s = a.rows();
    let d_b = h_b.rows();
    let mut h_i = ComplexMatrix::zeros(d_s * d_b, d_s * d_b);
    let ad = a.adjoint();
    for (b, gk) in bath_ops.iter().zip(&g) {
        h_i.axpy(C64::new(*gk, 0.0), &kron(&ad, b));
        h_i.axpy(C64::new(*gk, 0.0), &kron(&a, &b.adjoint()));
    }
    let mut psi = vec![ZERO; d_s];
    psi[0] = p.c0;
    psi[1] = p.c1;
    let mut vac = vec![0.0; d_b];
    vac[0] = 1.0;
    Ok(OpenSystem {
        h_s: ad.matmul(&a).scale_real(p.omega0),
        h_b,
        h_i,
        rho_s0: ComplexMatrix::outer(&psi, &psi),
        rho_b0: ComplexMatrix::diag_real(&vac),
    })
}

pub fn damped_ho_ull2(p: &DampedHoParams, truncation: BathTruncation, grid: TimeGrid, opts: MemoryOptions) -> Result<MemoryOutput> {
    let model = damped_ho_open_system(p, truncation)?;
    let mut out = ull2_evolve(&model, grid, opts)?;
    out.trajectory = out.trajectory.with_population("pop_1", 1);
    Ok(out)
}

pub fn damped_ho_nz2(p: &DampedHoParams, truncation: BathTruncation, grid: TimeGrid, opts: MemoryOptions) -> Result<MemoryOutput> {
    let model = damped_ho_open_system(p, truncation)?;
    let mut out = nz2_evolve(&model, grid, opts)?;
    out.trajectory = out.trajectory.with_population("pop_1", 1);
    Ok(out)
}

/// −i[H, ρ] helper kept for the small-instance oracles.
#[allow(dead_code)]
fn unitary_rhs(h: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    h.commutator(rho).scale(-I)
}
