//! Resonant Jaynes–Cummings model started in r₁|e,0⟩ + r₂|g,1⟩.
//!
//! System level 0 is |e⟩, Fock states are ordered by occupation.

use crate::correlation::JointState;
use crate::error::{Error, Result};
use crate::linalg::{annihilation, kron, pauli_z, BipartiteDims, ComplexMatrix, C64, RANK_CUTOFF, ZERO};
use crate::ull::{build_basis, exact_generator, UllGenerator};

/// Distance to α₁ = ±1 below which the closed forms are not evaluated.
pub const POLE_GUARD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcParams {
    pub r1: f64,
    pub r2: f64,
    pub lambda: f64,
    pub omega0: f64,
    pub fock_cut: usize,
}

impl JcParams {
    /// r₂ = √(1 − r₁²), default Fock cut 2.
    pub fn new(r1: f64, lambda: f64, omega0: f64) -> Self {
        Self {
            r1,
            r2: (1.0 - r1 * r1).max(0.0).sqrt(),
            lambda,
            omega0,
            fock_cut: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.r1 * self.r1 + self.r2 * self.r2 - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("r1² + r2² = {}", self.r1 * self.r1 + self.r2 * self.r2)));
        }
        if self.fock_cut < 2 {
            return Err(Error::Parameter("Fock cut must be at least 2".into()));
        }
        if !self.lambda.is_finite() || !self.omega0.is_finite() {
            return Err(Error::Parameter("coupling and frequency must be finite".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims::new(2, self.fock_cut)
    }

    /// (α₁, α₂) = (1 − 2r₁²)(cos 2λτ, sin 2λτ)
    pub fn alphas(&self, tau: f64) -> (f64, f64) {
        let q = 1.0 - 2.0 * self.r1 * self.r1;
        let x = 2.0 * self.lambda * tau;
        (q * x.cos(), q * x.sin())
    }
}

pub struct JcHamiltonian {
    pub h_s: ComplexMatrix,
    pub h_b: ComplexMatrix,
    pub h_i: ComplexMatrix,
    pub h_sb: ComplexMatrix,
}

/// H_S = (ω₀/2)σ_z, H_B = ω₀ a†a, H_I = λ(σ₊⊗a + σ₋⊗a†).
pub fn jc_hamiltonian(p: &JcParams) -> Result<JcHamiltonian> {
    p.validate()?;
    let a = annihilation(p.fock_cut);
    let up = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let h_s = pauli_z().scale_real(p.omega0 / 2.0);
    let h_b = a.adjoint().matmul(&a).scale_real(p.omega0);
    let h_i = (&kron(&up, &a) + &kron(&up.adjoint(), &a.adjoint())).scale_real(p.lambda);
    let mut h_sb = kron(&h_s, &ComplexMatrix::identity(p.fock_cut));
    h_sb += &kron(&ComplexMatrix::identity(2), &h_b);
    h_sb += &h_i;
    Ok(JcHamiltonian { h_s, h_b, h_i, h_sb })
}

fn index(p: &JcParams, excited: bool, n: usize) -> usize {
    (if excited { 0 } else { p.fock_cut }) + n
}

pub fn jc_initial_state(p: &JcParams) -> Result<Vec<C64>> {
    jc_state(p, 0.0)
}

/// |ψ(τ)⟩ = e^{−iω₀τ/2}[(r₁cos λτ − ir₂ sin λτ)|e,0⟩ + (−ir₁ sin λτ + r₂cos λτ)|g,1⟩]
pub fn jc_state(p: &JcParams, tau: f64) -> Result<Vec<C64>> {
    p.validate()?;
    let (s, c) = (p.lambda * tau).sin_cos();
    let phase = C64::from_polar(1.0, -p.omega0 * tau / 2.0);
    let mut psi = vec![ZERO; 2 * p.fock_cut];
    psi[index(p, true, 0)] = phase * C64::new(p.r1 * c, -p.r2 * s);
    psi[index(p, false, 1)] = phase * C64::new(p.r2 * c, -p.r1 * s);
    Ok(psi)
}

/// Closed-form state and correlation operator at time τ.
pub fn jc_exact(p: &JcParams, tau: f64) -> Result<(Vec<C64>, ComplexMatrix)> {
    let psi = jc_state(p, tau)?;
    let (a1, a2) = p.alphas(tau);
    let n = 2 * p.fock_cut;
    let mut chi = ComplexMatrix::zeros(n, n);
    let (e0, g1) = (index(p, true, 0), index(p, false, 1));
    let (e1, g0) = (index(p, true, 1), index(p, false, 0));
    let r = p.r1 * p.r1;
    let diag_in = (1.0 + 4.0 * r - 4.0 * r * r - a1 * a1 + a2 * a2) / 8.0;
    let diag_out = (a1 * a1 - 1.0) / 4.0;
    chi[(e0, e0)] = C64::new(diag_in, 0.0);
    chi[(g1, g1)] = C64::new(diag_in, 0.0);
    chi[(e1, e1)] = C64::new(diag_out, 0.0);
    chi[(g0, g0)] = C64::new(diag_out, 0.0);
    let rr = p.r1 * p.r2;
    chi[(e0, g1)] = C64::new(rr, -a2 / 2.0);
    chi[(g1, e0)] = C64::new(rr, a2 / 2.0);
    Ok((psi, chi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcCoefficients {
    /// rate attached to σ₋
    pub gamma1: f64,
    /// rate attached to σ₊
    pub gamma2: f64,
    /// σ_z shift on top of H_S
    pub omega_tilde: f64,
}

/// γ₁ = −λα₂/(2(1 − α₁)), γ₂ = λα₂/(2(1 + α₁)),
/// ω̃ = 4λr₁r₂α₁/(1 + 4r₁² − 4r₁⁴ − (α₁² − α₂²)).
pub fn jc_ull_coefficients(p: &JcParams, tau: f64) -> Result<JcCoefficients> {
    p.validate()?;
    let (a1, a2) = p.alphas(tau);
    if (1.0 - a1).abs() < POLE_GUARD || (1.0 + a1).abs() < POLE_GUARD {
        return Err(Error::Parameter(format!("α₁ = {a1} is at a pole of the rates")));
    }
    let r = p.r1 * p.r1;
    let l = p.lambda;
    Ok(JcCoefficients {
        gamma1: -l * a2 / (2.0 * (1.0 - a1)),
        gamma2: l * a2 / (2.0 * (1.0 + a1)),
        omega_tilde: 4.0 * l * p.r1 * p.r2 * a1 / (1.0 + 4.0 * r - 4.0 * r * r - (a1 * a1 - a2 * a2)),
    })
}

/// The same three numbers read off the generator built from the exact state.
pub fn jc_extract_coefficients(p: &JcParams, tau: f64) -> Result<JcCoefficients> {
    let ham = jc_hamiltonian(p)?;
    let psi = jc_state(p, tau)?;
    let state = JointState::pure(&psi, p.dims())?;
    let basis = build_basis(2)?;
    let gen = exact_generator(&ham.h_sb, &state, &basis, RANK_CUTOFF)?;
    let a = &gen.covariance.a;
    // σ₋ = (S₁ − iS₂)/√2, so its coefficient vector in L = Σ conj(v_j) S_j is (1, i, 0)/√2
    let r = 1.0 / 2f64.sqrt();
    let quad = |v: [C64; 3]| -> f64 {
        let mut acc = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                acc += v[i].conj() * a[(i, j)] * v[j];
            }
        }
        acc.re
    };
    let minus = [C64::new(r, 0.0), C64::new(0.0, r), ZERO];
    let plus = [C64::new(r, 0.0), C64::new(0.0, -r), ZERO];
    let h = &gen.generator.h_eff;
    let omega_tilde = (h[(0, 0)].re - h[(1, 1)].re) / 2.0 - p.omega0 / 2.0;
    Ok(JcCoefficients {
        gamma1: quad(minus),
        gamma2: quad(plus),
        omega_tilde,
    })
}

/// ULL generator assembled from the closed-form coefficients.
pub fn jc_closed_generator(p: &JcParams, tau: f64) -> Result<UllGenerator> {
    let c = jc_ull_coefficients(p, tau)?;
    let down = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let h_eff = pauli_z().scale_real(p.omega0 / 2.0 + c.omega_tilde);
    Ok(UllGenerator {
        h_eff,
        rates: vec![c.gamma1, c.gamma2],
        jumps: vec![down.clone(), down.adjoint()],
    })
}
