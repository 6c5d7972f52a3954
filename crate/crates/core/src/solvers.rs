//! Time evolution: the joint unitary oracle, Markovian and weak-correlation
//! generators, and the second-order baselines.
//!
//! The memory-carrying solvers (ULL2, NZ2) and the time-local second-order
//! ones (TCL2, time-local ULL2) work in the interaction picture of
//! H₀ = H_S + H_B, written in the eigenbasis of H_S ⊗ H_B so that H_I(t) is an
//! elementwise phase of H_I. Reported states are always Schrödinger-picture
//! system states in the caller's basis.

use crate::correlation::JointState;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, kron, partial_trace, trace_bath_weighted, trace_system_weighted, unitary_exp,
    BipartiteDims, ComplexMatrix, TraceOut, C64, I, ONE, ZERO,
};
use crate::ull::{mll_generator, ull_rhs, OperatorBasis, UllGenerator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::Parameter(format!("time step must be positive and finite, got {dt}")));
        }
        Ok(Self { t0, dt, steps })
    }

    /// Grid covering [0, horizon] with the given number of steps.
    pub fn span(horizon: f64, steps: usize) -> Result<Self> {
        let steps = steps.max(1);
        Self::new(0.0, horizon / steps as f64, steps)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<ComplexMatrix>,
    pub observables: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<ComplexMatrix>) -> Self {
        Self {
            grid,
            states,
            observables: Vec::new(),
        }
    }

    /// Records ⟨level|ρ|level⟩ under `name`.
    pub fn with_population(mut self, name: &str, level: usize) -> Self {
        let values = self.states.iter().map(|r| r[(level, level)].re).collect();
        self.observables.push((name.to_string(), values));
        self
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Scalar-only trajectory (closed forms): one observable, no states.
    pub fn from_values(grid: TimeGrid, name: &str, values: Vec<f64>) -> Self {
        Self {
            grid,
            states: Vec::new(),
            observables: vec![(name.to_string(), values)],
        }
    }
}

fn check_finite(m: &ComplexMatrix, step: usize, time: f64) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { step, time })
    }
}

/// Classical fourth-order Runge–Kutta on a matrix-valued state.
pub fn rk4_evolve<F>(mut rhs: F, initial: &ComplexMatrix, grid: TimeGrid) -> Result<Trajectory>
where
    F: FnMut(f64, &ComplexMatrix) -> ComplexMatrix,
{
    let h = grid.dt;
    let mut states = Vec::with_capacity(grid.steps + 1);
    let mut rho = initial.clone();
    states.push(rho.clone());
    for k in 0..grid.steps {
        let t = grid.time(k);
        let k1 = rhs(t, &rho);
        let mut tmp = rho.clone();
        tmp.axpy(C64::new(h / 2.0, 0.0), &k1);
        let k2 = rhs(t + h / 2.0, &tmp);
        let mut tmp = rho.clone();
        tmp.axpy(C64::new(h / 2.0, 0.0), &k2);
        let k3 = rhs(t + h / 2.0, &tmp);
        let mut tmp = rho.clone();
        tmp.axpy(C64::new(h, 0.0), &k3);
        let k4 = rhs(t + h, &tmp);
        rho.axpy(C64::new(h / 6.0, 0.0), &k1);
        rho.axpy(C64::new(h / 3.0, 0.0), &k2);
        rho.axpy(C64::new(h / 3.0, 0.0), &k3);
        rho.axpy(C64::new(h / 6.0, 0.0), &k4);
        check_finite(&rho, k + 1, grid.time(k + 1))?;
        states.push(rho.clone());
    }
    Ok(Trajectory::new(grid, states))
}

/// Largest joint dimension accepted by the dense unitary oracle.
pub const MAX_EXACT_DIM: usize = 1024;

#[derive(Clone, Debug)]
pub struct ExactTrajectory {
    pub system: Trajectory,
    pub joint: Vec<ComplexMatrix>,
}

/// ρ(t) = U ρ(0) U† with U = exp(−iH(t − t0)), from a single eigendecomposition.
pub fn exact_evolve(h_sb: &ComplexMatrix, state: &JointState, grid: TimeGrid) -> Result<ExactTrajectory> {
    let n = state.dims.joint();
    if n > MAX_EXACT_DIM {
        return Err(Error::Unsupported(format!(
            "joint dimension {n} exceeds the dense oracle limit {MAX_EXACT_DIM}"
        )));
    }
    let eig = hermitian_eig(h_sb)?;
    let v = &eig.vectors;
    let rho_e = v.adjoint().matmul(&state.rho).matmul(v);
    let mut joint = Vec::with_capacity(grid.steps + 1);
    let mut system = Vec::with_capacity(grid.steps + 1);
    for k in 0..=grid.steps {
        let s = grid.time(k) - grid.t0;
        // energy basis: ρ_mn e^{−i(E_m − E_n)s}
        let rot = rho_e.phase_rotate(&eig.values, -s);
        let rho = v.matmul(&rot).matmul_adj(v).hermitian_part();
        system.push(partial_trace(&rho, state.dims, TraceOut::Bath)?);
        joint.push(rho);
    }
    Ok(ExactTrajectory {
        system: Trajectory::new(grid, system),
        joint,
    })
}

/// A finite system–bath problem with an uncorrelated initial state.
#[derive(Clone, Debug)]
pub struct OpenSystem {
    pub h_s: ComplexMatrix,
    pub h_b: ComplexMatrix,
    pub h_i: ComplexMatrix,
    pub rho_s0: ComplexMatrix,
    pub rho_b0: ComplexMatrix,
}

impl OpenSystem {
    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims::new(self.h_s.rows(), self.h_b.rows())
    }

    pub fn h_sb(&self) -> ComplexMatrix {
        let dims = self.dims();
        let mut h = kron(&self.h_s, &ComplexMatrix::identity(dims.d_b));
        h += &kron(&ComplexMatrix::identity(dims.d_s), &self.h_b);
        h += &self.h_i;
        h
    }

    pub fn initial_state(&self) -> JointState {
        JointState::product(&self.rho_s0, &self.rho_b0)
    }

    fn validate(&self) -> Result<()> {
        let dims = self.dims();
        let ok = self.h_s.is_square()
            && self.h_b.is_square()
            && self.rho_s0.rows() == dims.d_s
            && self.rho_b0.rows() == dims.d_b
            && self.h_i.rows() == dims.joint()
            && self.h_i.is_square();
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("open-system operators have inconsistent shapes".into()))
        }
    }
}

/// Markovian Lindblad-like evolution with rates frozen at the initial covariances.
pub fn mll_evolve(model: &OpenSystem, basis: &OperatorBasis, grid: TimeGrid) -> Result<Trajectory> {
    model.validate()?;
    let gen = mll_generator(&model.h_s, &model.h_b, &model.h_i, &model.rho_s0, &model.rho_b0, basis)?;
    let t0 = grid.t0;
    rk4_evolve(|t, rho| ull_rhs(rho, &gen.at(t - t0)), &model.rho_s0, grid)
}

/// Constant-coefficient Lindblad evolution −i[H, ρ] + Σ γ(2LρL† − {L†L, ρ}).
pub fn lindblad_evolve(h: &ComplexMatrix, rates: &[f64], jumps: &[ComplexMatrix], rho0: &ComplexMatrix, grid: TimeGrid) -> Result<Trajectory> {
    let gen = UllGenerator {
        h_eff: h.clone(),
        rates: rates.to_vec(),
        jumps: jumps.to_vec(),
    };
    rk4_evolve(|_, rho| ull_rhs(rho, &gen), rho0, grid)
}

/// Interaction-picture bookkeeping in the eigenbasis of H_S ⊗ H_B.
#[derive(Clone, Debug)]
struct Frame {
    dims: BipartiteDims,
    us: ComplexMatrix,
    es: Vec<f64>,
    ub: ComplexMatrix,
    joint_energies: Vec<f64>,
    h_i: ComplexMatrix,
}

impl Frame {
    fn new(model: &OpenSystem) -> Result<Self> {
        model.validate()?;
        let dims = model.dims();
        let s = hermitian_eig(&model.h_s)?;
        let b = hermitian_eig(&model.h_b)?;
        let u = kron(&s.vectors, &b.vectors);
        let h_i = u.adjoint().matmul(&model.h_i).matmul(&u);
        let h_i = drop_roundoff(&h_i, 1e-15 * model.h_i.max_abs());
        let joint_energies = s
            .values
            .iter()
            .flat_map(|&a| b.values.iter().map(move |&e| a + e))
            .collect();
        Ok(Self {
            dims,
            us: s.vectors,
            es: s.values,
            ub: b.vectors,
            joint_energies,
            h_i,
        })
    }

    fn to_frame_s(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.us.adjoint().matmul(rho).matmul(&self.us)
    }

    fn to_frame_b(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.ub.adjoint().matmul(rho).matmul(&self.ub)
    }

    /// Interaction-picture system state at elapsed time s, back to the lab basis.
    fn system_lab(&self, rho: &ComplexMatrix, s: f64) -> ComplexMatrix {
        let r = rho.phase_rotate(&self.es, -s);
        self.us.matmul(&r).matmul_adj(&self.us).hermitian_part()
    }

    fn h_i_at(&self, s: f64) -> ComplexMatrix {
        self.h_i.phase_rotate(&self.joint_energies, s)
    }

    /// ∫₀^s H_I(u) du, elementwise.
    fn h_i_integral(&self, s: f64) -> ComplexMatrix {
        let n = self.h_i.rows();
        let e = &self.joint_energies;
        ComplexMatrix::from_fn(n, n, |x, y| {
            let h = self.h_i[(x, y)];
            if h.re == 0.0 && h.im == 0.0 {
                return ZERO;
            }
            let d = e[x] - e[y];
            let w = if (d * s).abs() < 1e-8 {
                // series of (e^{ids} − 1)/(id)
                C64::new(s, d * s * s / 2.0)
            } else {
                (C64::from_polar(1.0, d * s) - ONE) / C64::new(0.0, d)
            };
            h * w
        })
    }
}

fn drop_roundoff(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let mut out = m.clone();
    for z in out.as_mut_slice() {
        if z.norm() <= tol {
            *z = ZERO;
        }
    }
    out
}

/// Integrand history for the memory-carrying solvers.
///
/// The trapezoidal memory integral is accumulated step by step, which is the
/// same sum as re-running the composite rule over the stored history. System
/// states are always kept; bath states only while they fit under the cap.
#[derive(Clone, Debug)]
pub struct MemoryKernel {
    pub times: Vec<f64>,
    pub rho_s: Vec<ComplexMatrix>,
    pub rho_b: Vec<ComplexMatrix>,
    pub bath_history_complete: bool,
    integral: ComplexMatrix,
    last_integrand: ComplexMatrix,
    cap_bytes: usize,
}

impl MemoryKernel {
    fn new(n: usize, cap_bytes: usize) -> Self {
        Self {
            times: Vec::new(),
            rho_s: Vec::new(),
            rho_b: Vec::new(),
            bath_history_complete: true,
            integral: ComplexMatrix::zeros(n, n),
            last_integrand: ComplexMatrix::zeros(n, n),
            cap_bytes,
        }
    }

    fn record(&mut self, t: f64, rho_s: &ComplexMatrix, rho_b: &ComplexMatrix) {
        if let Some(&last) = self.times.last() {
            debug_assert!(t > last);
        }
        self.times.push(t);
        self.rho_s.push(rho_s.clone());
        let bytes = (self.rho_b.len() + 1) * rho_b.rows() * rho_b.cols() * std::mem::size_of::<C64>();
        if self.bath_history_complete && bytes <= self.cap_bytes {
            self.rho_b.push(rho_b.clone());
        } else {
            self.bath_history_complete = false;
            self.rho_b.clear();
        }
    }

    /// Integral through the last recorded point plus a trial trapezoid panel.
    fn trial(&self, dt: f64, next_integrand: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.integral.clone();
        out.axpy(C64::new(dt / 2.0, 0.0), &self.last_integrand);
        out.axpy(C64::new(dt / 2.0, 0.0), next_integrand);
        out
    }

    fn commit(&mut self, integral: ComplexMatrix, integrand: ComplexMatrix) {
        self.integral = integral;
        self.last_integrand = integrand;
    }

    pub fn integral(&self) -> &ComplexMatrix {
        &self.integral
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MemoryOptions {
    /// Upper bound on retained bath history, in bytes.
    pub history_cap_bytes: usize,
}

impl Default for MemoryOptions {
    fn default() -> Self {
        Self {
            history_cap_bytes: 256 << 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MemoryOutput {
    pub trajectory: Trajectory,
    pub memory: MemoryKernel,
    /// Final bath marginal in the lab basis.
    pub final_bath: ComplexMatrix,
}

/// Shared pieces of H̃_I(s) at one instant.
struct Local {
    h: ComplexMatrix,
    a_s: ComplexMatrix,
    a_b: ComplexMatrix,
}

impl Frame {
    fn local(&self, s: f64, rho_s: &ComplexMatrix, rho_b: &ComplexMatrix, with_bath_mean: bool) -> Local {
        let h = self.h_i_at(s);
        let a_s = trace_bath_weighted(&h, rho_b, self.dims);
        let a_b = if with_bath_mean {
            trace_system_weighted(&h, rho_s, self.dims)
        } else {
            ComplexMatrix::zeros(self.dims.d_b, self.dims.d_b)
        };
        Local { h, a_s, a_b }
    }

    /// −i[H̃, ρ_S⊗ρ_B] where H̃ = H − a_s⊗I − I⊗a_b (a_b may be zero).
    fn correlating(&self, loc: &Local, rho_s: &ComplexMatrix, rho_b: &ComplexMatrix, tilde: bool) -> ComplexMatrix {
        let p = kron(rho_s, rho_b);
        let mut c = loc.h.hermitian_commutator(&p);
        if tilde {
            c -= &kron(&loc.a_s.hermitian_commutator(rho_s), rho_b);
            c -= &kron(rho_s, &loc.a_b.hermitian_commutator(rho_b));
        }
        c.scale(-I)
    }

    /// (−i[a_s, ρ_S] − i Tr_B[H, χ], −i[a_b, ρ_B] − i Tr_S[H, χ])
    fn marginal_rates(&self, loc: &Local, rho_s: &ComplexMatrix, rho_b: &ComplexMatrix, chi: &ComplexMatrix, bath: bool) -> (ComplexMatrix, Option<ComplexMatrix>) {
        let hc = loc.h.hermitian_commutator(chi);
        let mut ds = loc.a_s.hermitian_commutator(rho_s);
        ds += &partial_trace(&hc, self.dims, TraceOut::Bath).expect("frame dims");
        let ds = ds.scale(-I).hermitian_part();
        let db = if bath {
            let mut db = loc.a_b.hermitian_commutator(rho_b);
            db += &partial_trace(&hc, self.dims, TraceOut::System).expect("frame dims");
            Some(db.scale(-I).hermitian_part())
        } else {
            None
        };
        (ds, db)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MemoryScheme {
    /// Co-evolving bath, effective interaction H̃_I.
    Ull2,
    /// Frozen bath ρ_B(0), bare interaction.
    Nz2,
}

fn memory_evolve(model: &OpenSystem, grid: TimeGrid, opts: MemoryOptions, scheme: MemoryScheme) -> Result<MemoryOutput> {
    let frame = Frame::new(model)?;
    let n = frame.dims.joint();
    let tilde = scheme == MemoryScheme::Ull2;
    let bath_moves = scheme == MemoryScheme::Ull2;
    let dt = grid.dt;

    let mut rs = frame.to_frame_s(&model.rho_s0);
    let mut rb = frame.to_frame_b(&model.rho_b0);
    let mut memory = MemoryKernel::new(n, opts.history_cap_bytes);

    let loc = frame.local(0.0, &rs, &rb, tilde);
    let f0 = frame.correlating(&loc, &rs, &rb, tilde);
    memory.commit(ComplexMatrix::zeros(n, n), f0);
    memory.record(grid.t0, &rs, &rb);
    let mut rates = frame.marginal_rates(&loc, &rs, &rb, memory.integral(), bath_moves);

    let mut states = vec![frame.system_lab(&rs, 0.0)];
    for k in 0..grid.steps {
        let s1 = (k + 1) as f64 * dt;
        // predictor
        let mut rs_p = rs.clone();
        rs_p.axpy(C64::new(dt, 0.0), &rates.0);
        let mut rb_p = rb.clone();
        if let Some(db) = &rates.1 {
            rb_p.axpy(C64::new(dt, 0.0), db);
        }
        let loc_p = frame.local(s1, &rs_p, &rb_p, tilde);
        let f_p = frame.correlating(&loc_p, &rs_p, &rb_p, tilde);
        let chi_p = memory.trial(dt, &f_p);
        let rates_p = frame.marginal_rates(&loc_p, &rs_p, &rb_p, &chi_p, bath_moves);
        // corrector
        rs.axpy(C64::new(dt / 2.0, 0.0), &rates.0);
        rs.axpy(C64::new(dt / 2.0, 0.0), &rates_p.0);
        rs = rs.hermitian_part();
        if let (Some(d0), Some(d1)) = (&rates.1, &rates_p.1) {
            rb.axpy(C64::new(dt / 2.0, 0.0), d0);
            rb.axpy(C64::new(dt / 2.0, 0.0), d1);
            rb = rb.hermitian_part();
        }
        let loc = frame.local(s1, &rs, &rb, tilde);
        let f = frame.correlating(&loc, &rs, &rb, tilde);
        let chi = memory.trial(dt, &f);
        rates = frame.marginal_rates(&loc, &rs, &rb, &chi, bath_moves);
        memory.commit(chi, f);
        memory.record(grid.time(k + 1), &rs, &rb);
        check_finite(&rs, k + 1, grid.time(k + 1))?;
        states.push(frame.system_lab(&rs, s1));
    }
    let s_end = grid.horizon();
    let rb_lab = rb.phase_rotate(
        &hermitian_eig(&model.h_b)?.values,
        -s_end,
    );
    let final_bath = frame.ub.matmul(&rb_lab).matmul_adj(&frame.ub).hermitian_part();
    Ok(MemoryOutput {
        trajectory: Trajectory::new(grid, states),
        memory,
        final_bath,
    })
}

/// Second-order weak-correlation equations: system and bath marginals driven
/// by χ⁽¹⁾(t) = −i∫₀ᵗ [H̃_I(s), ρ_S(s)⊗ρ_B(s)] ds (interaction picture),
/// Heun predictor–corrector with trapezoidal memory.
pub fn ull2_evolve(model: &OpenSystem, grid: TimeGrid, opts: MemoryOptions) -> Result<MemoryOutput> {
    memory_evolve(model, grid, opts, MemoryScheme::Ull2)
}

/// Second-order Nakajima–Zwanzig equation with the bath frozen at ρ_B(0).
pub fn nz2_evolve(model: &OpenSystem, grid: TimeGrid, opts: MemoryOptions) -> Result<MemoryOutput> {
    memory_evolve(model, grid, opts, MemoryScheme::Nz2)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LocalScheme {
    Tcl2,
    TlUll2,
}

fn time_local_evolve(model: &OpenSystem, grid: TimeGrid, scheme: LocalScheme) -> Result<Trajectory> {
    let frame = Frame::new(model)?;
    let rb = frame.to_frame_b(&model.rho_b0);
    let rs0 = frame.to_frame_s(&model.rho_s0);
    let dims = frame.dims;
    let t0 = grid.t0;
    let rhs = |t: f64, rs: &ComplexMatrix| -> ComplexMatrix {
        let s = t - t0;
        let h = frame.h_i_at(s);
        let k = frame.h_i_integral(s);
        let p = kron(rs, &rb);
        let mut y = k.hermitian_commutator(&p);
        if scheme == LocalScheme::TlUll2 {
            let ks = trace_bath_weighted(&k, &rb, dims);
            let kb = trace_system_weighted(&k, rs, dims);
            y -= &kron(&ks.hermitian_commutator(rs), &rb);
            y -= &kron(rs, &kb.hermitian_commutator(&rb));
        }
        // y ← −i[K̃, ρ_S⊗ρ_B], Hermitian
        let y = y.scale(-I);
        let a_s = trace_bath_weighted(&h, &rb, dims);
        let mut out = a_s.hermitian_commutator(rs);
        out += &partial_trace(&h.hermitian_commutator(&y), dims, TraceOut::Bath).expect("frame dims");
        out.scale(-I).hermitian_part()
    };
    let traj = rk4_evolve(rhs, &rs0, grid)?;
    let states = traj
        .states
        .iter()
        .enumerate()
        .map(|(k, r)| frame.system_lab(r, k as f64 * grid.dt))
        .collect();
    Ok(Trajectory::new(grid, states))
}

/// TCL2: −∫₀ᵗ Tr_B[H_I(t), [H_I(s), ρ_S(t)⊗ρ_B(0)]] ds.
pub fn tcl2_evolve(model: &OpenSystem, grid: TimeGrid) -> Result<Trajectory> {
    time_local_evolve(model, grid, LocalScheme::Tcl2)
}

/// Time-local ULL2: as TCL2 but with H̃_I evaluated at ρ_S(t) and ρ_B(0).
pub fn tl_ull2_evolve(model: &OpenSystem, grid: TimeGrid) -> Result<Trajectory> {
    time_local_evolve(model, grid, LocalScheme::TlUll2)
}

#[derive(Clone, Debug)]
pub struct AsymptoticState {
    pub rho_sb: ComplexMatrix,
    pub rho_s: ComplexMatrix,
    /// Smallest gap between distinct eigenvalues.
    pub min_gap: f64,
    pub degenerate: bool,
}

/// Relative gap below which eigenvalues are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Σ_E P_E ρ P_E over the eigenspaces of `h`, with the smallest spectral gap.
pub fn dephase_in_eigenbasis(h: &ComplexMatrix, rho: &ComplexMatrix) -> Result<(ComplexMatrix, f64, bool)> {
    let eig = hermitian_eig(h)?;
    let scale = eig.values.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let n = eig.values.len();
    let mut block = vec![0usize; n];
    let mut min_gap = f64::INFINITY;
    let mut degenerate = false;
    for k in 1..n {
        let gap = eig.values[k] - eig.values[k - 1];
        if gap <= DEGENERACY_TOL * scale {
            degenerate = true;
            block[k] = block[k - 1];
        } else {
            min_gap = min_gap.min(gap);
            block[k] = block[k - 1] + 1;
        }
    }
    if degenerate {
        log_warning("degenerate spectrum: projecting onto eigenspaces");
    }
    let v = &eig.vectors;
    let rho_e = v.adjoint().matmul(rho).matmul(v);
    let dephased = ComplexMatrix::from_fn(n, n, |i, j| if block[i] == block[j] { rho_e[(i, j)] } else { ZERO });
    Ok((v.matmul(&dephased).matmul_adj(v).hermitian_part(), min_gap, degenerate))
}

/// Dephased initial state Σ_E P_E ρ(0) P_E over the eigenspaces of H_SB.
pub fn asymptotic_state(h_sb: &ComplexMatrix, state: &JointState) -> Result<AsymptoticState> {
    let (rho_sb, min_gap, degenerate) = dephase_in_eigenbasis(h_sb, &state.rho)?;
    let rho_s = partial_trace(&rho_sb, state.dims, TraceOut::Bath)?;
    Ok(AsymptoticState {
        rho_sb,
        rho_s,
        min_gap,
        degenerate,
    })
}

fn log_warning(msg: &str) {
    eprintln!("warning: {msg}");
}

/// Propagator helper for tests and models: U ρ U† with U = exp(−iHt).
pub fn unitary_step(h: &ComplexMatrix, rho: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let u = unitary_exp(h, t)?;
    Ok(u.matmul(rho).matmul_adj(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};
    use crate::random::{random_density, random_hermitian};
    use crate::ull::build_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rk4_constant_and_rotation() {
        let grid = TimeGrid::new(0.0, 0.01, 100).unwrap();
        let rho0 = ComplexMatrix::diag_real(&[0.3, 0.7]);
        let traj = rk4_evolve(|_, r| ComplexMatrix::zeros(r.rows(), r.cols()), &rho0, grid).unwrap();
        assert!(traj.states.iter().all(|s| s == &rho0));

        let h = pauli_z().scale_real(0.5);
        let plus = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let traj = rk4_evolve(|_, r| h.commutator(r).scale(-I), &plus, grid).unwrap();
        let want = unitary_step(&h, &plus, 1.0).unwrap();
        assert!((&traj.states[100] - &want).frobenius_norm() < 1e-9);
    }

    #[test]
    fn rk4_reports_non_finite() {
        let grid = TimeGrid::new(0.0, 0.1, 5).unwrap();
        let rho0 = ComplexMatrix::identity(2);
        let err = rk4_evolve(|_, r| r.scale_real(f64::NAN), &rho0, grid).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 1, .. }));
    }

    #[test]
    fn exact_conserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = BipartiteDims::new(2, 3);
        let h = random_hermitian(&mut rng, 6, 3.0);
        let state = JointState::new(random_density(&mut rng, 6, 2), dims).unwrap();
        let grid = TimeGrid::new(0.0, 0.2, 20).unwrap();
        let out = exact_evolve(&h, &state, grid).unwrap();
        assert!((&out.joint[0] - &state.rho).frobenius_norm() < 1e-12);
        let e0 = h.matmul(&state.rho).trace();
        for rho in &out.joint {
            assert!((h.matmul(rho).trace() - e0).norm() < 1e-10);
        }
        let direct = unitary_step(&h, &state.rho, 4.0).unwrap();
        assert!((&out.joint[20] - &direct).frobenius_norm() < 1e-10);
    }

    fn small_model(rng: &mut ChaCha8Rng, coupling: f64) -> OpenSystem {
        let h_s = random_hermitian(rng, 2, 1.0);
        let h_b = random_hermitian(rng, 3, 1.0);
        let dims = BipartiteDims::new(2, 3);
        let raw = random_hermitian(rng, 6, 1.0);
        let (_, _, h_i) = crate::ull::split_hamiltonian(&raw, dims).unwrap();
        OpenSystem {
            h_s,
            h_b,
            h_i: h_i.scale_real(coupling),
            rho_s0: random_density(rng, 2, 2),
            rho_b0: random_density(rng, 3, 3),
        }
    }

    #[test]
    fn zero_interaction_gives_free_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut model = small_model(&mut rng, 1.0);
        model.h_i = ComplexMatrix::zeros(6, 6);
        let grid = TimeGrid::new(0.0, 0.01, 50).unwrap();
        let want = unitary_step(&model.h_s, &model.rho_s0, 0.5).unwrap();
        let basis = build_basis(2).unwrap();
        let runs = [
            mll_evolve(&model, &basis, grid).unwrap(),
            ull2_evolve(&model, grid, MemoryOptions::default()).unwrap().trajectory,
            nz2_evolve(&model, grid, MemoryOptions::default()).unwrap().trajectory,
            tcl2_evolve(&model, grid).unwrap(),
            tl_ull2_evolve(&model, grid).unwrap(),
        ];
        for traj in &runs {
            assert!((&traj.states[50] - &want).frobenius_norm() < 1e-8);
        }
        let out = ull2_evolve(&model, grid, MemoryOptions::default()).unwrap();
        let bath_want = unitary_step(&model.h_b, &model.rho_b0, 0.5).unwrap();
        assert!((&out.final_bath - &bath_want).frobenius_norm() < 1e-8);
    }

    #[test]
    fn approximations_agree_with_exact_at_short_times() {
        // Every method is exact through second order for an uncorrelated start.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = small_model(&mut rng, 1.0);
        let basis = build_basis(2).unwrap();
        let errs = |dt: f64| -> Vec<f64> {
            let grid = TimeGrid::new(0.0, dt / 20.0, 20).unwrap();
            let exact = exact_evolve(&model.h_sb(), &model.initial_state(), grid).unwrap();
            let want = &exact.system.states[20];
            let runs = [
                mll_evolve(&model, &basis, grid).unwrap(),
                ull2_evolve(&model, grid, MemoryOptions::default()).unwrap().trajectory,
            ];
            runs.iter().map(|t| (&t.states[20] - want).frobenius_norm()).collect()
        };
        let a = errs(0.02);
        let b = errs(0.01);
        for (x, y) in a.iter().zip(&b) {
            let slope = (x / y).log2();
            assert!(slope > 2.7, "slope {slope}");
        }
    }

    #[test]
    fn ull2_memory_converges_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = small_model(&mut rng, 1.0);
        let end = |steps: usize| {
            let grid = TimeGrid::span(1.0, steps).unwrap();
            ull2_evolve(&model, grid, MemoryOptions::default()).unwrap().trajectory.states[steps].clone()
        };
        let (a, b, c) = (end(50), end(100), end(200));
        let r = (&a - &b).frobenius_norm() / (&b - &c).frobenius_norm();
        assert!((2.0..=16.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn tl_ull2_differs_from_tcl2_only_through_system_mean() {
        // With ⟨S⟩ = 0 along the motion the two time-local equations agree.
        let d_b = 3;
        let b = random_hermitian(&mut ChaCha8Rng::seed_from_u64(5), d_b, 1.0);
        let rho_b0 = ComplexMatrix::diag_real(&[0.5, 0.3, 0.2]);
        let mean = crate::ull::mean(&rho_b0, &b);
        let b = &b - &ComplexMatrix::identity(d_b).scale(mean);
        let model = OpenSystem {
            h_s: ComplexMatrix::zeros(2, 2),
            h_b: ComplexMatrix::diag_real(&[0.0, 0.7, 1.3]),
            h_i: kron(&pauli_x(), &b),
            rho_s0: ComplexMatrix::diag_real(&[1.0, 0.0]),
            rho_b0,
        };
        let grid = TimeGrid::new(0.0, 0.01, 100).unwrap();
        let a = tcl2_evolve(&model, grid).unwrap();
        let t = tl_ull2_evolve(&model, grid).unwrap();
        for (x, y) in a.states.iter().zip(&t.states) {
            assert!((x - y).frobenius_norm() < 1e-12);
        }
        // A coherent start breaks the identity.
        let mut model = model;
        model.rho_s0 = ComplexMatrix::from_real(2, 2, &[0.9, 0.3, 0.3, 0.1]);
        let a = tcl2_evolve(&model, grid).unwrap();
        let t = tl_ull2_evolve(&model, grid).unwrap();
        assert!((&a.states[100] - &t.states[100]).frobenius_norm() > 1e-6);
    }

    #[test]
    fn memory_keeps_history_until_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let model = small_model(&mut rng, 0.5);
        let grid = TimeGrid::new(0.0, 0.05, 10).unwrap();
        let out = ull2_evolve(&model, grid, MemoryOptions::default()).unwrap();
        assert_eq!(out.memory.times.len(), 11);
        assert_eq!(out.memory.rho_b.len(), 11);
        assert!(out.memory.times.windows(2).all(|w| w[1] > w[0]));
        let tight = MemoryOptions { history_cap_bytes: 16 * 9 * 3 };
        let out = ull2_evolve(&model, grid, tight).unwrap();
        assert!(!out.memory.bath_history_complete);
        assert_eq!(out.memory.rho_s.len(), 11);
    }

    #[test]
    fn asymptotic_state_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dims = BipartiteDims::new(2, 2);
        let h = random_hermitian(&mut rng, 4, 2.0);
        let state = JointState::new(random_density(&mut rng, 4, 4), dims).unwrap();
        let a = asymptotic_state(&h, &state).unwrap();
        assert!(h.commutator(&a.rho_sb).frobenius_norm() < 1e-10);
        assert!(!a.degenerate);
        // already stationary
        let eig = hermitian_eig(&h).unwrap();
        let diag = eig.apply_fn(|x| C64::new((-x).exp(), 0.0));
        let diag = diag.scale_real(1.0 / diag.trace().re);
        let st = JointState::new(diag.clone(), dims).unwrap();
        let b = asymptotic_state(&h, &st).unwrap();
        assert!((&b.rho_sb - &diag).frobenius_norm() < 1e-12);
    }

    #[test]
    fn asymptotic_state_of_single_product_coupling_is_uncorrelated() {
        // H = S⊗B: eigenprojectors are products, so ρ* factorizes.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = ComplexMatrix::diag_real(&[1.0, -0.4]);
        let b = ComplexMatrix::diag_real(&[0.3, 1.1, -0.8]);
        let h = kron(&s, &b);
        let rs = random_density(&mut rng, 2, 2);
        let rb = random_density(&mut rng, 3, 3);
        let a = asymptotic_state(&h, &JointState::product(&rs, &rb)).unwrap();
        let dec = crate::correlation::decompose(&JointState::new(a.rho_sb.clone(), BipartiteDims::new(2, 3)).unwrap()).unwrap();
        assert!(dec.chi.frobenius_norm() < 1e-12);
    }
}
