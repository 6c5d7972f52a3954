//! Ohmic spectral densities and integrals against them.

use super::quadrature::integrate;
use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Relative tolerance for spectral integrals.
pub const SPECTRAL_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralKind {
    /// J(ω) = ηω(1 + ω²/ω_c²)⁻²
    OhmicLorentzSq,
    /// J(ω) = (ω/π)e^{−ω/ω_c}; η is ignored.
    OhmicExp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDensity {
    pub kind: SpectralKind,
    pub eta: f64,
    pub omega_c: f64,
}

impl SpectralDensity {
    pub fn lorentz_sq(eta: f64, omega_c: f64) -> Self {
        Self {
            kind: SpectralKind::OhmicLorentzSq,
            eta,
            omega_c,
        }
    }

    pub fn exponential(omega_c: f64) -> Self {
        Self {
            kind: SpectralKind::OhmicExp,
            eta: 1.0 / PI,
            omega_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > 0.0) || !self.omega_c.is_finite() {
            return Err(Error::Parameter(format!("cutoff must be positive, got {}", self.omega_c)));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Parameter(format!("coupling strength must be non-negative, got {}", self.eta)));
        }
        Ok(())
    }

    pub fn j(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        match self.kind {
            SpectralKind::OhmicLorentzSq => {
                let r = omega / self.omega_c;
                self.eta * omega / ((1.0 + r * r) * (1.0 + r * r))
            }
            SpectralKind::OhmicExp => omega / PI * (-omega / self.omega_c).exp(),
        }
    }

    /// ∫₀^∞ J(ω) g(ω) dω for a bounded-growth weight g.
    ///
    /// The Lorentzian-squared density is integrated over the whole half-line
    /// through ω = ω_c tan θ, which turns J dω into ηω_c² sin θ cos θ dθ. The
    /// exponential one is cut at 50ω_c, where the remainder is below e⁻⁵⁰
    /// relative for weights growing at most polynomially.
    pub fn integrate(&self, g: impl Fn(f64) -> f64, panels: usize) -> Result<f64> {
        self.validate()?;
        if self.eta == 0.0 {
            return Ok(0.0);
        }
        let wc = self.omega_c;
        // geometric breakpoints ω_c·2⁻ᵏ resolve features at small ω, such as
        // the thermal peak of coth(βω/2) at low temperature
        let mut cuts: Vec<f64> = (1..=GEOMETRIC_CUTS).rev().map(|k| wc * 0.5f64.powi(k as i32)).collect();
        match self.kind {
            SpectralKind::OhmicLorentzSq => {
                let eta = self.eta;
                let f = |theta: f64| {
                    if theta >= FRAC_PI_2 {
                        return 0.0;
                    }
                    // sin θ cos θ = (ω/ω_c) cos²θ keeps ω·g(ω) finite at the floor
                    let omega = (wc * theta.tan()).max(wc * OMEGA_FLOOR);
                    let c = theta.cos();
                    eta * wc * omega * c * c * g(omega)
                };
                let mut edges = vec![0.0];
                edges.extend(cuts.iter().map(|w| (w / wc).atan()));
                piecewise(f, &edges, FRAC_PI_2, panels)
            }
            SpectralKind::OhmicExp => {
                let f = |omega: f64| {
                    let omega = omega.max(wc * OMEGA_FLOOR);
                    self.j(omega) * g(omega)
                };
                cuts.insert(0, 0.0);
                piecewise(f, &cuts, 50.0 * wc, panels)
            }
        }
    }

    /// ∫₀^∞ J(ω) w(ω) trig(ωτ)/ω dω, where w(ω) = coth(βω/2) for finite β
    /// and 1 otherwise.
    ///
    /// For the Lorentzian-squared density and many oscillations the range is
    /// split at Ω: below it the integrand is summed directly, above it the
    /// remainder comes from repeated integration by parts, since w = 1 there
    /// to double precision.
    pub fn fourier(&self, beta: Option<f64>, tau: f64, trig: Trig) -> Result<f64> {
        self.validate()?;
        let weight = |w: f64| match beta {
            Some(b) => coth(b * w / 2.0),
            None => 1.0,
        };
        let phase = |w: f64| match trig {
            Trig::Sin => sin_over(w, tau),
            Trig::Cos => (w * tau).cos() / w,
        };
        let wc = self.omega_c;
        let split = (20.0 * wc).max(beta.map_or(0.0, |b| 80.0 / b));
        if self.kind != SpectralKind::OhmicLorentzSq || split * tau.abs() < FOURIER_SWITCH {
            return self.integrate(|w| weight(w) * phase(w), FOURIER_PANELS);
        }
        let f = |w: f64| {
            let w = w.max(wc * OMEGA_FLOOR);
            self.j(w) * weight(w) * phase(w)
        };
        let mut edges = vec![0.0];
        edges.extend((1..=GEOMETRIC_CUTS).rev().map(|k| wc * 0.5f64.powi(k as i32)));
        edges.push(wc);
        let panels = FOURIER_PANELS + (4.0 * split * tau.abs() / PI).ceil() as usize;
        let body = piecewise(f, &edges, split, panels)?;
        Ok(body + self.lorentz_tail(split, tau, trig))
    }

    /// ∫_Ω^∞ h(ω) trig(ωτ) dω with h = J/ω = η(1 + ω²/ω_c²)⁻², by parts.
    fn lorentz_tail(&self, split: f64, tau: f64, trig: Trig) -> f64 {
        let c2 = self.omega_c * self.omega_c;
        let k = self.eta * c2 * c2;
        let w = split;
        let u = c2 + w * w;
        let h = [
            k / (u * u),
            -4.0 * k * w / (u * u * u),
            k * (-4.0 / (u * u * u) + 24.0 * w * w / u.powi(4)),
            k * (72.0 * w / u.powi(4) - 192.0 * w.powi(3) / u.powi(5)),
        ];
        let (s, c) = (w * tau).sin_cos();
        match trig {
            Trig::Sin => h[0] * c / tau - h[1] * s / tau.powi(2) - h[2] * c / tau.powi(3) + h[3] * s / tau.powi(4),
            Trig::Cos => -h[0] * s / tau - h[1] * c / tau.powi(2) + h[2] * s / tau.powi(3) + h[3] * c / tau.powi(4),
        }
    }

    /// ∫₀^∞ J(ω) dω, closed form.
    pub fn total_weight(&self) -> f64 {
        match self.kind {
            SpectralKind::OhmicLorentzSq => self.eta * self.omega_c * self.omega_c / 2.0,
            SpectralKind::OhmicExp => self.omega_c * self.omega_c / PI,
        }
    }
}

const GEOMETRIC_CUTS: usize = 40;

const FOURIER_PANELS: usize = 64;

/// Minimum Ωτ for the split evaluation; the by-parts series needs many
/// oscillations beyond Ω.
const FOURIER_SWITCH: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

/// Smallest frequency, relative to ω_c, the integrands are evaluated at.
const OMEGA_FLOOR: f64 = 1e-200;

/// Sum over [e₀, e₁], …, [e_last, end]; the final piece gets `panels`.
fn piecewise(f: impl Fn(f64) -> f64, edges: &[f64], end: f64, panels: usize) -> Result<f64> {
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(&f, w[0], w[1], 2, SPECTRAL_RTOL)?;
    }
    Ok(total + integrate(&f, *edges.last().unwrap_or(&0.0), end, panels, SPECTRAL_RTOL)?)
}

/// coth(x), with the small-argument series.
pub fn coth(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 / x + x / 3.0
    } else if x > 20.0 {
        1.0
    } else {
        1.0 / x.tanh()
    }
}

/// Bose occupation 1/(e^{βω} − 1).
pub fn bose(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// sin(ωτ)/ω, equal to τ at ω = 0.
pub fn sin_over(omega: f64, tau: f64) -> f64 {
    let x = omega * tau;
    if x.abs() < 1e-4 {
        tau * (1.0 - x * x / 6.0)
    } else {
        x.sin() / omega
    }
}

/// (1 − cos ωτ)/ω² = 2 sin²(ωτ/2)/ω², equal to τ²/2 at ω = 0.
pub fn one_minus_cos_over_sq(omega: f64, tau: f64) -> f64 {
    let x = omega * tau;
    if x.abs() < 1e-4 {
        tau * tau / 2.0 * (1.0 - x * x / 12.0)
    } else {
        let s = (x / 2.0).sin();
        2.0 * s * s / (omega * omega)
    }
}

/// (1 − cos ωτ)/ω, equal to ωτ²/2 near ω = 0.
pub fn one_minus_cos_over(omega: f64, tau: f64) -> f64 {
    omega * one_minus_cos_over_sq(omega, tau)
}
