//! Dispatch of configured methods and CSV output.

use crate::config::{parse_dims, DampedHoConfig, JcConfig, Method, ModelKind, ScenarioConfig, TruncationKind};
use crate::parallel::map_ordered;
use crate::validate::{run_validation, ValidateOptions, ValidationReport};
use crate::CliError;
use corrpic_core::correlation::JointState;
use corrpic_core::models::damped_ho::{
    damped_ho_asymptotic, damped_ho_exact, damped_ho_lindblad, damped_ho_mll, damped_ho_nz2, damped_ho_tcl2,
    damped_ho_ull2, BathTruncation,
};
use corrpic_core::models::dephasing::{dephasing_evolve, dephasing_populations, DephasingEquation, DephasingMethod};
use corrpic_core::models::jc::{jc_hamiltonian, jc_initial_state};
use corrpic_core::solvers::{
    asymptotic_state, exact_evolve, mll_evolve, nz2_evolve, tcl2_evolve, tl_ull2_evolve, ull2_evolve, MemoryOptions,
    OpenSystem, TimeGrid, Trajectory,
};
use corrpic_core::ull::build_basis;
use corrpic_core::{ComplexMatrix, C64};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One CSV worth of data.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub method: Method,
    pub column: &'static str,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    fn from_trajectory(method: Method, column: &'static str, traj: &Trajectory) -> Result<Self, CliError> {
        let values = traj
            .observable(column)
            .ok_or_else(|| CliError::Numeric(format!("{} produced no {column} series", method.name())))?
            .to_vec();
        Self::new(method, column, traj.times(), values)
    }

    fn constant(method: Method, column: &'static str, grid: TimeGrid, value: f64) -> Result<Self, CliError> {
        let times = grid.times();
        let values = vec![value; times.len()];
        Self::new(method, column, times, values)
    }

    fn new(method: Method, column: &'static str, times: Vec<f64>, values: Vec<f64>) -> Result<Self, CliError> {
        if times.len() != values.len() {
            return Err(CliError::Numeric(format!("{}: {} times but {} values", method.name(), times.len(), values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(CliError::Numeric(format!("{}: non-finite value at t = {}", method.name(), times[k])));
        }
        Ok(Self { method, column, times, values })
    }

    /// `time,<column>` with 17 significant digits and `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.times.len() + 1));
        let _ = writeln!(out, "time,{}", self.column);
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.16e},{v:.16e}");
        }
        out
    }
}

fn core_err(method: Method, e: corrpic_core::Error) -> CliError {
    CliError::from_core(e).context(method.name())
}

fn jc_product_start(cfg: &JcConfig) -> Result<(OpenSystem, JointState, ComplexMatrix), CliError> {
    let p = cfg.params()?;
    let ham = jc_hamiltonian(&p).map_err(CliError::from_core)?;
    let psi = jc_initial_state(&p).map_err(CliError::from_core)?;
    let state = JointState::pure(&psi, p.dims()).map_err(CliError::from_core)?;
    // only used when r₁ ∈ {0, 1}: |e,0⟩ or |g,1⟩
    let (s, b) = if p.r1 == 1.0 { (0, 0) } else { (1, 1) };
    let mut rho_s0 = ComplexMatrix::zeros(2, 2);
    rho_s0[(s, s)] = C64::new(1.0, 0.0);
    let mut rho_b0 = ComplexMatrix::zeros(p.fock_cut, p.fock_cut);
    rho_b0[(b, b)] = C64::new(1.0, 0.0);
    let model = OpenSystem {
        h_s: ham.h_s,
        h_b: ham.h_b,
        h_i: ham.h_i,
        rho_s0,
        rho_b0,
    };
    Ok((model, state, ham.h_sb))
}

fn run_jc(cfg: &JcConfig, method: Method, grid: TimeGrid) -> Result<Series, CliError> {
    const COL: &str = "pop_e";
    let (model, state, h_sb) = jc_product_start(cfg)?;
    let err = |e| core_err(method, e);
    let traj = match method {
        Method::Exact => exact_evolve(&h_sb, &state, grid).map_err(err)?.system,
        Method::Asymptotic => {
            let star = asymptotic_state(&h_sb, &state).map_err(err)?;
            return Series::constant(method, COL, grid, star.rho_s[(0, 0)].re);
        }
        Method::Mll => mll_evolve(&model, &build_basis(2).map_err(err)?, grid).map_err(err)?,
        Method::Ull2 => ull2_evolve(&model, grid, MemoryOptions::default()).map_err(err)?.trajectory,
        Method::Nz2 => nz2_evolve(&model, grid, MemoryOptions::default()).map_err(err)?.trajectory,
        Method::Tcl2 => tcl2_evolve(&model, grid).map_err(err)?,
        Method::TlUll2 => tl_ull2_evolve(&model, grid).map_err(err)?,
        other => return Err(CliError::Config(format!("method {} does not apply to jaynes_cummings", other.name()))),
    };
    Series::from_trajectory(method, COL, &traj.with_population(COL, 0))
}

fn run_dephasing(cfg: &ScenarioConfig, method: Method, grid: TimeGrid) -> Result<Series, CliError> {
    let p = cfg.dephasing.as_ref().expect("checked at parse time").params()?;
    let err = |e| core_err(method, e);
    let traj = match method {
        Method::Exact => dephasing_populations(&p, DephasingMethod::ExactTcl2, grid),
        Method::Mll => dephasing_populations(&p, DephasingMethod::Mll, grid),
        Method::Tcl2 => dephasing_evolve(&p, DephasingEquation::Tcl2, grid),
        Method::TlUll2 => dephasing_evolve(&p, DephasingEquation::TlUll2, grid),
        Method::Redfield => dephasing_evolve(&p, DephasingEquation::Redfield, grid),
        other => return Err(CliError::Config(format!("method {} does not apply to dephasing", other.name()))),
    }
    .map_err(err)?;
    Series::from_trajectory(method, "pop_e", &traj)
}

fn truncation(cfg: &DampedHoConfig) -> BathTruncation {
    match cfg.truncation {
        TruncationKind::Sector => BathTruncation::Sector,
        TruncationKind::Fock => BathTruncation::Fock {
            system_cut: cfg.system_cut,
            mode_cut: cfg.mode_cut,
        },
    }
}

fn run_damped_ho(cfg: &DampedHoConfig, method: Method, grid: TimeGrid) -> Result<Series, CliError> {
    const COL: &str = "pop_1";
    let p = cfg.params()?;
    let err = |e| core_err(method, e);
    let mut opts = MemoryOptions::default();
    if let Some(mib) = cfg.history_cap_mib {
        opts.history_cap_bytes = mib.saturating_mul(1 << 20);
    }
    let traj = match method {
        Method::Exact => damped_ho_exact(&p, grid),
        Method::Mll => damped_ho_mll(&p, grid),
        Method::Lindblad => damped_ho_lindblad(&p, grid),
        Method::Tcl2 => damped_ho_tcl2(&p, grid),
        Method::Ull2 => damped_ho_ull2(&p, truncation(cfg), grid, opts).map(|o| o.trajectory),
        Method::Nz2 => damped_ho_nz2(&p, truncation(cfg), grid, opts).map(|o| o.trajectory),
        Method::Asymptotic => return Series::constant(method, COL, grid, damped_ho_asymptotic(&p).map_err(err)?),
        other => return Err(CliError::Config(format!("method {} does not apply to damped_ho", other.name()))),
    }
    .map_err(err)?;
    Series::from_trajectory(method, COL, &traj)
}

/// Computes every requested method; independent methods run on up to `threads` workers.
pub fn compute(cfg: &ScenarioConfig, threads: usize) -> Result<Vec<Series>, CliError> {
    let grid = cfg.grid()?;
    let results = map_ordered(&cfg.methods, threads, |&m| match cfg.model {
        ModelKind::JaynesCummings => run_jc(cfg.jaynes_cummings.as_ref().expect("checked at parse time"), m, grid),
        ModelKind::Dephasing => run_dephasing(cfg, m, grid),
        ModelKind::DampedHo => run_damped_ho(cfg.damped_ho.as_ref().expect("checked at parse time"), m, grid),
        ModelKind::RandomValidate => Err(CliError::Config("random_validate has no trajectories".into())),
    });
    results.into_iter().collect()
}

pub fn validation_options(cfg: &ScenarioConfig, threads: usize) -> Result<ValidateOptions, CliError> {
    let v = cfg
        .random_validate
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [random_validate] section".into()))?;
    Ok(ValidateOptions {
        seed: v.seed,
        instances: v.instances,
        dims: v.dims.iter().map(|s| parse_dims(s)).collect::<Result<_, _>>()?,
        mutate: v.mutate,
        threads,
    })
}

pub enum RunOutput {
    Csv(Vec<PathBuf>),
    Report(PathBuf, ValidationReport),
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs a scenario and writes `<prefix>_<method>.csv` files (or the
/// validation report) into `out_dir`, falling back to `output.dir`, then ".".
pub fn run(cfg: &ScenarioConfig, out_dir: Option<&Path>, threads: usize) -> Result<RunOutput, CliError> {
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let prefix = cfg.prefix();
    if cfg.model == ModelKind::RandomValidate {
        let report = run_validation(&validation_options(cfg, threads)?);
        let path = dir.join(format!("{prefix}_validation.txt"));
        write_file(&path, &format!("{report}\n"))?;
        return Ok(RunOutput::Report(path, report));
    }
    let series = compute(cfg, threads)?;
    let mut paths = Vec::with_capacity(series.len());
    for s in &series {
        let path = dir.join(format!("{prefix}_{}.csv", s.method.name()));
        write_file(&path, &s.to_csv())?;
        paths.push(path);
    }
    Ok(RunOutput::Csv(paths))
}

/// ρ*₁₁-type value: the model's population observable in the asymptotic state.
pub fn asymptotic_population(cfg: &ScenarioConfig) -> Result<f64, CliError> {
    let err = |e| core_err(Method::Asymptotic, e);
    match cfg.model {
        ModelKind::DampedHo => {
            let p = cfg.damped_ho.as_ref().expect("checked at parse time").params()?;
            damped_ho_asymptotic(&p).map_err(err)
        }
        ModelKind::JaynesCummings => {
            let (_, state, h_sb) = jc_product_start(cfg.jaynes_cummings.as_ref().expect("checked at parse time"))?;
            Ok(asymptotic_state(&h_sb, &state).map_err(err)?.rho_s[(0, 0)].re)
        }
        other => Err(CliError::Config(format!("no asymptotic state for model {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dephasing_cfg(steps: usize) -> ScenarioConfig {
        ScenarioConfig::parse(&format!(
            r#"
model = "dephasing"
methods = ["mll", "tcl2", "redfield"]
grid.horizon = 0.2
grid.steps = {steps}
dephasing = {{ beta = 1.0, eta = 0.5, omega_c = 100.0 }}
"#
        ))
        .unwrap()
    }

    #[test]
    fn csv_shape_and_digits() {
        let series = compute(&dephasing_cfg(20), 2).unwrap();
        assert_eq!(series.len(), 3);
        let csv = series[0].to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,pop_e");
        assert_eq!(lines.len(), 22);
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0");
        let v: f64 = lines[5].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, series[0].values[4]);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn zero_steps_give_initial_row_only() {
        let series = compute(&dephasing_cfg(0), 1).unwrap();
        for s in series {
            assert_eq!(s.to_csv().lines().count(), 2);
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let a = compute(&dephasing_cfg(30), 1).unwrap();
        let b = compute(&dephasing_cfg(30), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jc_product_start_runs_generic_solvers() {
        let cfg = ScenarioConfig::parse(
            r#"
model = "jaynes_cummings"
methods = ["exact", "mll", "tcl2", "asymptotic"]
grid = { horizon = 0.5, steps = 50 }
jaynes_cummings = { r1 = 1.0, lambda = 1.0, omega0 = 1.0 }
"#,
        )
        .unwrap();
        let series = compute(&cfg, 2).unwrap();
        let exact = &series[0].values;
        // cos²(λτ) for the excited start
        for (t, v) in series[0].times.iter().zip(exact) {
            assert!((v - t.cos().powi(2)).abs() < 1e-10);
        }
        assert!((series[3].values[0] - 0.5).abs() < 1e-10);
    }
}
