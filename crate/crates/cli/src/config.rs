//! Scenario files: TOML with dotted keys or `[section]` tables.

use crate::CliError;
use corrpic_core::models::{DampedHoParams, DephasingParams, JcParams};
use corrpic_core::solvers::TimeGrid;
use corrpic_core::{ComplexMatrix, C64};
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    JaynesCummings,
    Dephasing,
    DampedHo,
    RandomValidate,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::JaynesCummings => "jaynes_cummings",
            ModelKind::Dephasing => "dephasing",
            ModelKind::DampedHo => "damped_ho",
            ModelKind::RandomValidate => "random_validate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Mll,
    Ull2,
    TlUll2,
    Tcl2,
    Redfield,
    Nz2,
    Lindblad,
    Asymptotic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mll => "mll",
            Method::Ull2 => "ull2",
            Method::TlUll2 => "tl_ull2",
            Method::Tcl2 => "tcl2",
            Method::Redfield => "redfield",
            Method::Nz2 => "nz2",
            Method::Lindblad => "lindblad",
            Method::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub t0: f64,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub steps: usize,
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<TimeGrid, CliError> {
        let dt = match (self.dt, self.horizon) {
            (Some(dt), None) => dt,
            (None, Some(h)) if self.steps == 0 => {
                if !(h >= 0.0) {
                    return Err(CliError::Config(format!("grid.horizon must be non-negative, got {h}")));
                }
                1.0
            }
            (None, Some(h)) => h / self.steps as f64,
            _ => return Err(CliError::Config("grid needs exactly one of grid.dt and grid.horizon".into())),
        };
        TimeGrid::new(self.t0, dt, self.steps).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JcConfig {
    pub r1: f64,
    pub lambda: f64,
    pub omega0: f64,
    #[serde(default = "default_fock_cut")]
    pub fock_cut: usize,
}

fn default_fock_cut() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingConfig {
    pub beta: f64,
    pub eta: f64,
    pub omega_c: f64,
    #[serde(default)]
    pub omega0: f64,
    /// Initial excited population.
    #[serde(default = "one")]
    pub rho_ee: f64,
    #[serde(default)]
    pub rho_eg_re: f64,
    #[serde(default)]
    pub rho_eg_im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKind {
    #[default]
    Sector,
    Fock,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampedHoConfig {
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(default = "default_cutoff")]
    pub omega_c: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub c0_re: f64,
    #[serde(default)]
    pub c0_im: f64,
    #[serde(default = "one")]
    pub c1_re: f64,
    #[serde(default)]
    pub c1_im: f64,
    pub omega_k: Option<Vec<f64>>,
    #[serde(default)]
    pub truncation: TruncationKind,
    #[serde(default = "default_fock_cut")]
    pub system_cut: usize,
    #[serde(default = "default_fock_cut")]
    pub mode_cut: usize,
    /// Bath-history budget of the memory solvers, MiB.
    pub history_cap_mib: Option<usize>,
}

fn default_cutoff() -> f64 {
    5.0
}

fn default_modes() -> usize {
    255
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default)]
    pub seed: u64,
    pub instances: usize,
    /// Entries like "2x3" (system × bath).
    #[serde(default = "default_dims")]
    pub dims: Vec<String>,
    #[serde(default)]
    pub mutate: bool,
}

pub fn default_dims() -> Vec<String> {
    vec!["2x2".into(), "2x3".into(), "3x3".into()]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub methods: Vec<Method>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    pub jaynes_cummings: Option<JcConfig>,
    pub dephasing: Option<DephasingConfig>,
    pub damped_ho: Option<DampedHoConfig>,
    pub random_validate: Option<ValidateConfig>,
}

/// Which methods each model supports. For the Jaynes–Cummings model the
/// perturbative solvers need an uncorrelated start (r₁ ∈ {0, 1}).
pub fn applicable(model: ModelKind, method: Method) -> bool {
    use Method::*;
    match model {
        ModelKind::JaynesCummings => matches!(method, Exact | Asymptotic | Mll | Ull2 | Nz2 | Tcl2 | TlUll2),
        ModelKind::Dephasing => matches!(method, Exact | Mll | Tcl2 | TlUll2 | Redfield),
        ModelKind::DampedHo => matches!(method, Exact | Mll | Lindblad | Tcl2 | Ull2 | Nz2 | Asymptotic),
        ModelKind::RandomValidate => false,
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<(), CliError> {
        let present = [
            (ModelKind::JaynesCummings, self.jaynes_cummings.is_some()),
            (ModelKind::Dephasing, self.dephasing.is_some()),
            (ModelKind::DampedHo, self.damped_ho.is_some()),
            (ModelKind::RandomValidate, self.random_validate.is_some()),
        ];
        for (kind, has) in present {
            if has && kind != self.model {
                return Err(CliError::Config(format!("section [{kind}] given for model {}", self.model)));
            }
            if !has && kind == self.model {
                return Err(CliError::Config(format!("model {kind} needs a [{kind}] section")));
            }
        }
        if self.model == ModelKind::RandomValidate {
            if !self.methods.is_empty() {
                return Err(CliError::Config("random_validate takes no methods".into()));
            }
            return Ok(());
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("no methods requested".into()));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("a method is listed twice".into()));
        }
        for m in &self.methods {
            if !applicable(self.model, *m) {
                return Err(CliError::Config(format!("method {} does not apply to model {}", m.name(), self.model)));
            }
        }
        if let Some(jc) = &self.jaynes_cummings {
            let product = jc.r1 == 0.0 || jc.r1 == 1.0;
            if let Some(m) = self.methods.iter().find(|m| !matches!(m, Method::Exact | Method::Asymptotic)) {
                if !product {
                    return Err(CliError::Config(format!(
                        "method {} needs an uncorrelated start (r1 = 0 or 1), got r1 = {}",
                        m.name(),
                        jc.r1
                    )));
                }
            }
        }
        let needs_grid = self.methods.iter().any(|m| *m != Method::Asymptotic);
        match &self.grid {
            Some(g) => {
                g.to_grid()?;
            }
            None if needs_grid => return Err(CliError::Config("missing grid section".into())),
            None => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        match &self.grid {
            Some(g) => g.to_grid(),
            None => TimeGrid::new(0.0, 1.0, 0).map_err(|e| CliError::Config(e.to_string())),
        }
    }

    pub fn prefix(&self) -> String {
        self.output.prefix.clone().unwrap_or_else(|| self.model.to_string())
    }
}

impl JcConfig {
    pub fn params(&self) -> Result<JcParams, CliError> {
        if !(0.0..=1.0).contains(&self.r1) {
            return Err(CliError::Config(format!("jaynes_cummings.r1 must lie in [0, 1], got {}", self.r1)));
        }
        let mut p = JcParams::new(self.r1, self.lambda, self.omega0);
        p.fock_cut = self.fock_cut;
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

impl DephasingConfig {
    pub fn params(&self) -> Result<DephasingParams, CliError> {
        let mut p = DephasingParams::new(self.beta, self.eta, self.omega_c, self.omega0);
        let pe = self.rho_ee;
        let coh = C64::new(self.rho_eg_re, self.rho_eg_im);
        if !(0.0..=1.0).contains(&pe) || coh.norm_sqr() > pe * (1.0 - pe) + 1e-15 {
            return Err(CliError::Config("dephasing initial state is not a density matrix".into()));
        }
        p.rho_s0 = ComplexMatrix::from_vec(2, 2, vec![C64::new(pe, 0.0), coh, coh.conj(), C64::new(1.0 - pe, 0.0)]);
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

impl DampedHoConfig {
    pub fn params(&self) -> Result<DampedHoParams, CliError> {
        let mut p = DampedHoParams::new(self.omega0, self.omega_c, self.modes);
        p.c0 = C64::new(self.c0_re, self.c0_im);
        p.c1 = C64::new(self.c1_re, self.c1_im);
        p.omega_k = self.omega_k.clone();
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

/// Parses "2x3" into (2, 3).
pub fn parse_dims(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("dimension pair must look like 2x3, got {s:?}"));
    let (a, b) = s.trim().split_once('x').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a < 2 || b < 1 || a * b > 64 {
        return Err(CliError::Config(format!("{s}: need d_S ≥ 2, d_B ≥ 1 and d_S·d_B ≤ 64")));
    }
    Ok((a, b))
}
