//! The universal Lindblad-like generator and its Markovian specialization.
//!
//! Conventions: the system operator basis is Hilbert–Schmidt orthonormal with
//! S₀ = I/√d. The interaction has no S₀ component, so bath-only terms belong
//! to H_B (see [`split_hamiltonian`]).

use crate::correlation::{decompose, solve_parent, JointState};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, kron, partial_trace, trace_bath_weighted, trace_system_weighted, BipartiteDims,
    ComplexMatrix, TraceOut, C64, I, ZERO,
};

#[derive(Clone, Debug)]
pub struct OperatorBasis {
    pub d: usize,
    pub elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Expansion coefficients Tr[S_k m].
    pub fn coefficients(&self, m: &ComplexMatrix) -> Vec<C64> {
        self.elements
            .iter()
            .map(|s| crate::linalg::hs_inner(s, m).expect("basis and operator dims agree"))
            .collect()
    }

    /// Re-mix the traceless elements with a real orthogonal matrix (row-major,
    /// side d²−1). The result is again orthonormal, Hermitian and shares S₀.
    pub fn rotated(&self, orth: &[f64]) -> Self {
        let k = self.len() - 1;
        assert_eq!(orth.len(), k * k);
        let mut elements = vec![self.elements[0].clone()];
        for i in 0..k {
            let mut s = ComplexMatrix::zeros(self.d, self.d);
            for j in 0..k {
                s.axpy(C64::new(orth[i * k + j], 0.0), &self.elements[j + 1]);
            }
            elements.push(s);
        }
        Self { d: self.d, elements }
    }
}

/// Normalized generalized Gell-Mann basis: I/√d, then the symmetric,
/// antisymmetric and diagonal families.
pub fn build_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::Parameter(format!("basis dimension must be at least 2, got {d}")));
    }
    let r2 = 1.0 / 2f64.sqrt();
    let mut elements = vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())];
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = ComplexMatrix::zeros(d, d);
            s[(j, k)] = C64::new(r2, 0.0);
            s[(k, j)] = C64::new(r2, 0.0);
            elements.push(s);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = ComplexMatrix::zeros(d, d);
            s[(j, k)] = C64::new(0.0, -r2);
            s[(k, j)] = C64::new(0.0, r2);
            elements.push(s);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut s = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            s[(j, j)] = C64::new(norm, 0.0);
        }
        s[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        elements.push(s);
    }
    Ok(OperatorBasis { d, elements })
}

/// Components Tr_S[(S_k ⊗ I) op], one bath operator per basis element.
pub fn expand_bipartite(op: &ComplexMatrix, basis: &OperatorBasis, dims: BipartiteDims) -> Result<Vec<ComplexMatrix>> {
    if basis.d != dims.d_s || !op.is_square() || op.rows() != dims.joint() {
        return Err(Error::Dimension(format!(
            "cannot expand a {}x{} operator over a d={} basis with dims ({}, {})",
            op.rows(),
            op.cols(),
            basis.d,
            dims.d_s,
            dims.d_b
        )));
    }
    Ok(basis
        .elements
        .iter()
        .map(|s| trace_system_weighted(op, s, dims))
        .collect())
}

pub fn reassemble(basis: &OperatorBasis, components: &[ComplexMatrix]) -> ComplexMatrix {
    let d_b = components[0].rows();
    let mut out = ComplexMatrix::zeros(basis.d * d_b, basis.d * d_b);
    for (s, b) in basis.elements.iter().zip(components) {
        out += &kron(s, b);
    }
    out
}

/// Canonical split H_SB = H_S⊗I + I⊗H_B + H_I with Tr_S H_I = 0, Tr_B H_I = 0
/// and Tr H_S = 0. Constant energy offsets end up in H_B.
pub fn split_hamiltonian(h_sb: &ComplexMatrix, dims: BipartiteDims) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let total = h_sb.trace() / (dims.joint() as f64);
    let h_b = partial_trace(h_sb, dims, TraceOut::System)?.scale_real(1.0 / dims.d_s as f64);
    let mut h_s = partial_trace(h_sb, dims, TraceOut::Bath)?.scale_real(1.0 / dims.d_b as f64);
    h_s.axpy(-total, &ComplexMatrix::identity(dims.d_s));
    let h_i = &(h_sb - &kron(&h_s, &ComplexMatrix::identity(dims.d_b))) - &kron(&ComplexMatrix::identity(dims.d_s), &h_b);
    Ok((h_s, h_b, h_i))
}

#[derive(Clone, Debug)]
pub struct InteractionExpansion {
    pub basis: OperatorBasis,
    pub dims: BipartiteDims,
    /// H_I components, index 0 included (and zero for a canonical split).
    pub bath_ops: Vec<ComplexMatrix>,
    /// H_χ components, index 0 included.
    pub bath_parent_ops: Vec<ComplexMatrix>,
}

impl InteractionExpansion {
    pub fn new(basis: OperatorBasis, dims: BipartiteDims, h_i: &ComplexMatrix, h_chi: &ComplexMatrix) -> Result<Self> {
        let bath_ops = expand_bipartite(h_i, &basis, dims)?;
        let bath_parent_ops = expand_bipartite(h_chi, &basis, dims)?;
        Ok(Self {
            basis,
            dims,
            bath_ops,
            bath_parent_ops,
        })
    }
}

/// c_ij = ⟨B_i B_j^χ⟩ for i, j ≥ 1, the c_i0 column, and the split C = A + iB.
#[derive(Clone, Debug)]
pub struct CovarianceData {
    pub c: ComplexMatrix,
    pub c0: Vec<C64>,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl CovarianceData {
    pub fn from_parts(c: ComplexMatrix, c0: Vec<C64>) -> Self {
        let ca = c.adjoint();
        let a = (&c + &ca).scale_real(0.5);
        let b = (&c - &ca).scale(C64::new(0.0, -0.5));
        Self { c, c0, a, b }
    }
}

pub fn covariance_matrix(rho_b: &ComplexMatrix, exp: &InteractionExpansion) -> CovarianceData {
    let n = exp.basis.len();
    let mut c = ComplexMatrix::zeros(n - 1, n - 1);
    let mut c0 = vec![ZERO; n - 1];
    for i in 1..n {
        // ρ_B B_i, reused for every j
        let rb_bi = rho_b.matmul(&exp.bath_ops[i]);
        for j in 0..n {
            let v = expectation(&rb_bi, &exp.bath_parent_ops[j]);
            if j == 0 {
                c0[i - 1] = v;
            } else {
                c[(i - 1, j - 1)] = v;
            }
        }
    }
    CovarianceData::from_parts(c, c0)
}

fn expectation(rho: &ComplexMatrix, op: &ComplexMatrix) -> C64 {
    let n = rho.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc
}

/// ⟨H_I⟩_B + Σ_i 2 Im(c_i0) S_i S₀ + Σ_ij b_ij S_i S_j
pub fn lamb_shift(exp: &InteractionExpansion, cov: &CovarianceData, rho_b: &ComplexMatrix) -> ComplexMatrix {
    let basis = &exp.basis;
    let n = basis.len();
    let s0 = 1.0 / (basis.d as f64).sqrt();
    let mut h = ComplexMatrix::zeros(basis.d, basis.d);
    for i in 1..n {
        let mean = expectation(rho_b, &exp.bath_ops[i]);
        let w = mean + C64::new(2.0 * cov.c0[i - 1].im * s0, 0.0);
        h.axpy(w, &basis.elements[i]);
    }
    for i in 1..n {
        for j in 1..n {
            let bij = cov.b[(i - 1, j - 1)];
            if bij.norm() == 0.0 {
                continue;
            }
            h.axpy(bij, &basis.elements[i].matmul(&basis.elements[j]));
        }
    }
    h.hermitian_part()
}

#[derive(Clone, Debug)]
pub struct UllGenerator {
    pub h_eff: ComplexMatrix,
    pub rates: Vec<f64>,
    pub jumps: Vec<ComplexMatrix>,
}

impl UllGenerator {
    pub fn free(h_s: &ComplexMatrix) -> Self {
        Self {
            h_eff: h_s.hermitian_part(),
            rates: Vec::new(),
            jumps: Vec::new(),
        }
    }
}

/// Rates are the eigenvalues of A; L_m = Σ_j conj(V_jm) S_j for eigenvector columns V.
pub fn build_generator(h_s: &ComplexMatrix, exp: &InteractionExpansion, cov: &CovarianceData, rho_b: &ComplexMatrix) -> Result<UllGenerator> {
    let lamb = lamb_shift(exp, cov, rho_b);
    let h_eff = (h_s + &lamb).hermitian_part();
    let (rates, jumps) = diagonalize_rates(&exp.basis, &cov.a)?;
    Ok(UllGenerator { h_eff, rates, jumps })
}

pub fn diagonalize_rates(basis: &OperatorBasis, a: &ComplexMatrix) -> Result<(Vec<f64>, Vec<ComplexMatrix>)> {
    let eig = hermitian_eig(&a.hermitian_part())?;
    let k = a.rows();
    let jumps = (0..k)
        .map(|m| {
            let mut l = ComplexMatrix::zeros(basis.d, basis.d);
            for j in 0..k {
                l.axpy(eig.vectors[(j, m)].conj(), &basis.elements[j + 1]);
            }
            l
        })
        .collect();
    Ok((eig.values, jumps))
}

/// −i[h_eff, ρ] + Σ_m γ_m (2 L ρ L† − {L†L, ρ})
pub fn ull_rhs(rho_s: &ComplexMatrix, gen: &UllGenerator) -> ComplexMatrix {
    let mut out = gen.h_eff.commutator(rho_s).scale(-I);
    for (&g, l) in gen.rates.iter().zip(&gen.jumps) {
        if g == 0.0 {
            continue;
        }
        let lr = l.matmul(rho_s);
        let lrl = lr.matmul_adj(l);
        let ldl = l.adjoint().matmul(l);
        let anti = ldl.anticommutator(rho_s);
        out.axpy(C64::new(2.0 * g, 0.0), &lrl);
        out.axpy(C64::new(-g, 0.0), &anti);
    }
    out.hermitian_part()
}

/// Σ_ij a_ij (2 S_j ρ S_i − {S_i S_j, ρ}), the undiagonalized dissipator.
pub fn dissipator_from_a(rho_s: &ComplexMatrix, basis: &OperatorBasis, a: &ComplexMatrix) -> ComplexMatrix {
    let k = a.rows();
    let mut out = ComplexMatrix::zeros(basis.d, basis.d);
    for i in 0..k {
        for j in 0..k {
            let aij = a[(i, j)];
            if aij.norm() == 0.0 {
                continue;
            }
            let si = &basis.elements[i + 1];
            let sj = &basis.elements[j + 1];
            let jump = sj.matmul(rho_s).matmul(si).scale_real(2.0);
            let anti = si.matmul(sj).anticommutator(rho_s);
            out.axpy(aij, &(&jump - &anti));
        }
    }
    out
}

/// Everything needed to evaluate the exact generator at one instant.
#[derive(Clone, Debug)]
pub struct ExactGenerator {
    pub generator: UllGenerator,
    pub expansion: InteractionExpansion,
    pub covariance: CovarianceData,
    pub rho_s: ComplexMatrix,
    pub rho_b: ComplexMatrix,
    pub parent_residual: f64,
}

/// Builds the ULL generator of a joint state under a full Hamiltonian.
pub fn exact_generator(h_sb: &ComplexMatrix, state: &JointState, basis: &OperatorBasis, rank_cutoff: f64) -> Result<ExactGenerator> {
    let dims = state.dims;
    let (h_s, _h_b, h_i) = split_hamiltonian(h_sb, dims)?;
    let dec = decompose(state)?;
    let parent = solve_parent(&dec, rank_cutoff)?;
    let expansion = InteractionExpansion::new(basis.clone(), dims, &h_i, &parent.h_chi)?;
    let covariance = covariance_matrix(&dec.rho_b, &expansion);
    let generator = build_generator(&h_s, &expansion, &covariance, &dec.rho_b)?;
    Ok(ExactGenerator {
        generator,
        expansion,
        covariance,
        rho_s: dec.rho_s,
        rho_b: dec.rho_b,
        parent_residual: parent.residual,
    })
}

/// Tr_B(−i[H_SB, ρ_SB]), the Schrödinger-picture reduced derivative.
pub fn reduced_derivative(h_sb: &ComplexMatrix, state: &JointState) -> Result<ComplexMatrix> {
    let comm = h_sb.hermitian_commutator(&state.rho).scale(-I);
    partial_trace(&comm, state.dims, TraceOut::Bath)
}

/// MLL generator: h(τ) = h_const + τ·h_linear, rates τ·γ_m with fixed jumps.
#[derive(Clone, Debug)]
pub struct MllGenerator {
    pub h_const: ComplexMatrix,
    pub h_linear: ComplexMatrix,
    pub unit_rates: Vec<f64>,
    pub jumps: Vec<ComplexMatrix>,
}

impl MllGenerator {
    pub fn at(&self, tau: f64) -> UllGenerator {
        let mut h = self.h_const.clone();
        h.axpy(C64::new(tau, 0.0), &self.h_linear);
        UllGenerator {
            h_eff: h,
            rates: self.unit_rates.iter().map(|g| g * tau).collect(),
            jumps: self.jumps.clone(),
        }
    }
}

/// Markovian coefficients at elapsed time τ after an uncorrelated instant.
///
/// Returns the covariance data (a_ij = τ Cov(B_i, B_j), b_ij = 0 up to roundoff)
/// and the Lamb-shift-like term
/// ⟨H_I⟩ − iτ Tr_B[H_I [H̃_B, ρ_B]] − 2τ Σ ⟨S_j⟩ Im⟨B_i B_j⟩ S_i.
pub fn mll_coefficients(
    tau: f64,
    h_b: &ComplexMatrix,
    h_i: &ComplexMatrix,
    rho_s0: &ComplexMatrix,
    rho_b0: &ComplexMatrix,
    basis: &OperatorBasis,
) -> Result<(CovarianceData, ComplexMatrix)> {
    let dims = BipartiteDims::new(rho_s0.rows(), rho_b0.rows());
    let bath_ops = expand_bipartite(h_i, basis, dims)?;
    let n = basis.len();
    let means: Vec<C64> = bath_ops.iter().map(|b| expectation(rho_b0, b)).collect();
    let s_means: Vec<C64> = basis.elements.iter().map(|s| expectation(rho_s0, s)).collect();
    let second = |i: usize, j: usize| expectation(rho_b0, &bath_ops[i].matmul(&bath_ops[j]));

    let mut c = ComplexMatrix::zeros(n - 1, n - 1);
    for i in 1..n {
        for j in 1..n {
            c[(i - 1, j - 1)] = (second(i, j) - means[i] * means[j]) * tau;
        }
    }
    let sqrt_d = (basis.d as f64).sqrt();
    let c0: Vec<C64> = (1..n)
        .map(|i| {
            let s: C64 = (1..n).map(|k| s_means[k] * second(i, k)).sum();
            -s * tau * sqrt_d
        })
        .collect();
    let cov = CovarianceData::from_parts(c, c0);

    // H̃_B = H_B + Tr_S[ρ_S0 H_I]
    let h_b_tilde = h_b + &trace_system_weighted(h_i, rho_s0, dims);
    let drift = h_b_tilde.commutator(rho_b0);
    let mean_h_i = trace_bath_weighted(h_i, rho_b0, dims);
    let drift_term = trace_bath_weighted(h_i, &drift, dims).scale(C64::new(0.0, -tau));
    let mut lamb = &mean_h_i + &drift_term;
    for i in 1..n {
        let w: f64 = (1..n).map(|j| (s_means[j] * second(i, j).im).re).sum();
        lamb.axpy(C64::new(-2.0 * tau * w, 0.0), &basis.elements[i]);
    }
    Ok((cov, lamb.hermitian_part()))
}

/// Assembles the MLL generator from the τ = 0 and τ = 1 coefficients.
pub fn mll_generator(
    h_s: &ComplexMatrix,
    h_b: &ComplexMatrix,
    h_i: &ComplexMatrix,
    rho_s0: &ComplexMatrix,
    rho_b0: &ComplexMatrix,
    basis: &OperatorBasis,
) -> Result<MllGenerator> {
    let (_, lamb0) = mll_coefficients(0.0, h_b, h_i, rho_s0, rho_b0, basis)?;
    let (cov1, lamb1) = mll_coefficients(1.0, h_b, h_i, rho_s0, rho_b0, basis)?;
    let (unit_rates, jumps) = diagonalize_rates(basis, &cov1.a)?;
    Ok(MllGenerator {
        h_const: (h_s + &lamb0).hermitian_part(),
        h_linear: &lamb1 - &lamb0,
        unit_rates,
        jumps,
    })
}

/// Tr[ρ op]
pub fn mean(rho: &ComplexMatrix, op: &ComplexMatrix) -> C64 {
    expectation(rho, op)
}
