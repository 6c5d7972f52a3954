//! Random-instance checks of the parent operator and the exact generator.

use crate::parallel::map_ordered;
use corrpic_core::correlation::{check_null_compatibility, correlate, decompose, solve_parent, JointState};
use corrpic_core::linalg::{kron, partial_trace, BipartiteDims, ComplexMatrix, TraceOut, I, RANK_CUTOFF};
use corrpic_core::random::{random_density, random_hermitian};
use corrpic_core::ull::{build_basis, exact_generator, ull_rhs};
use corrpic_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

pub const ULL_TOL: f64 = 1e-8;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
pub const NULL_TOL: f64 = 1e-10;
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Size of the traceful term added to χ in mutation mode.
pub const MUTATION: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct ValidateOptions {
    pub seed: u64,
    pub instances: usize,
    pub dims: Vec<(usize, usize)>,
    pub mutate: bool,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_residual: f64,
    pub threshold: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.threshold
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub instances: usize,
    pub mutated: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances {}{}", self.instances, if self.mutated { " (mutated)" } else { "" })?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<16} max {:.3e}  threshold {:.0e}  {}",
                c.name,
                c.max_residual,
                c.threshold,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Residuals {
    ull: f64,
    reconstruction: f64,
    null: f64,
    structure: f64,
}

/// One instance: random H_SB with ‖H_I‖ up to 5‖H_S‖ and a random joint
/// state of random rank (pure ones included).
fn instance(seed: u64, k: usize, ds: usize, db: usize) -> (ComplexMatrix, JointState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let n = ds * db;
    let h_s = random_hermitian(&mut rng, ds, 1.0);
    let h_b = random_hermitian(&mut rng, db, 1.0);
    let coupling = 5.0 * rng.gen::<f64>();
    let h_i = random_hermitian(&mut rng, n, coupling);
    let mut h = kron(&h_s, &ComplexMatrix::identity(db));
    h = &h + &kron(&ComplexMatrix::identity(ds), &h_b);
    h = &h + &h_i;
    let rank = rng.gen_range(1..=n);
    let state = JointState::new(random_density(&mut rng, n, rank), BipartiteDims::new(ds, db)).expect("random density is valid");
    (h, state)
}

fn residuals(h: &ComplexMatrix, state: &JointState, mutate: bool) -> Result<Residuals, Error> {
    let mut dec = decompose(state)?;
    if mutate {
        let n = dec.dims.joint();
        dec.chi = &dec.chi + &ComplexMatrix::identity(n).scale_real(MUTATION / n as f64);
    }
    let null = check_null_compatibility(&dec, RANK_CUTOFF)?;
    let reconstruction = match solve_parent(&dec, RANK_CUTOFF) {
        Ok(parent) => {
            // rebuild the joint state and compare with the one we started from
            let product = dec.product();
            let rebuilt = &product + &correlate(&parent.h_chi, &product)?;
            let scale = (&state.rho - &product).frobenius_norm().max(1e-12);
            (&rebuilt - &state.rho).frobenius_norm() / scale
        }
        Err(Error::Reconstruction(r)) => r.max(f64::MIN_POSITIVE),
        Err(e) => return Err(e),
    };
    let eg = exact_generator(h, state, &build_basis(state.dims.d_s)?, RANK_CUTOFF)?;
    let rhs = ull_rhs(&eg.rho_s, &eg.generator);
    let want = partial_trace(&h.hermitian_commutator(&state.rho).scale(-I), state.dims, TraceOut::Bath)?;
    Ok(Residuals {
        ull: (&rhs - &want).frobenius_norm(),
        reconstruction,
        null,
        structure: rhs.trace().norm().max(rhs.hermiticity_defect()),
    })
}

pub fn run_validation(opts: &ValidateOptions) -> ValidationReport {
    let dims = if opts.dims.is_empty() { vec![(2, 2)] } else { opts.dims.clone() };
    let jobs: Vec<usize> = (0..opts.instances).collect();
    let results = map_ordered(&jobs, opts.threads, |&k| {
        let (ds, db) = dims[k % dims.len()];
        let (h, state) = instance(opts.seed, k, ds, db);
        residuals(&h, &state, opts.mutate)
    });
    let mut worst = Residuals::default();
    for r in results {
        // a failed instance counts as an infinite residual on every check
        let r = r.unwrap_or(Residuals {
            ull: f64::INFINITY,
            reconstruction: f64::INFINITY,
            null: f64::INFINITY,
            structure: f64::INFINITY,
        });
        worst.ull = worst.ull.max(nan_as_inf(r.ull));
        worst.reconstruction = worst.reconstruction.max(nan_as_inf(r.reconstruction));
        worst.null = worst.null.max(nan_as_inf(r.null));
        worst.structure = worst.structure.max(nan_as_inf(r.structure));
    }
    ValidationReport {
        instances: opts.instances,
        mutated: opts.mutate,
        checks: vec![
            Check { name: "ull_exactness", max_residual: worst.ull, threshold: ULL_TOL },
            Check { name: "reconstruction", max_residual: worst.reconstruction, threshold: RECONSTRUCTION_TOL },
            Check { name: "null_compat", max_residual: worst.null, threshold: NULL_TOL },
            Check { name: "trace_hermitian", max_residual: worst.structure, threshold: STRUCTURE_TOL },
        ],
    }
}

fn nan_as_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}
