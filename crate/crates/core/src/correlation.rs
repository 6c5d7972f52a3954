//! Marginals, correlation operator and the correlation parent operator.

use crate::error::{Error, Result};
use crate::linalg::{
    kron, null_projector, partial_trace, pseudo_inverse, BipartiteDims, ComplexMatrix, TraceOut, C64, I,
};

/// Relative tolerance on the parent-operator reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct JointState {
    pub rho: ComplexMatrix,
    pub dims: BipartiteDims,
}

impl JointState {
    /// Checks Hermiticity, trace and positivity before accepting `rho`.
    pub fn new(rho: ComplexMatrix, dims: BipartiteDims) -> Result<Self> {
        if !rho.is_square() || rho.rows() != dims.joint() {
            return Err(Error::Dimension(format!(
                "joint state is {}x{}, dims ({}, {})",
                rho.rows(),
                rho.cols(),
                dims.d_s,
                dims.d_b
            )));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let defect = rho.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.2e})")));
        }
        let eig = crate::linalg::hermitian_eig(&rho)?;
        if eig.values[0] < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", eig.values[0])));
        }
        Ok(Self { rho, dims })
    }

    pub fn product(rho_s: &ComplexMatrix, rho_b: &ComplexMatrix) -> Self {
        Self {
            rho: kron(rho_s, rho_b),
            dims: BipartiteDims::new(rho_s.rows(), rho_b.rows()),
        }
    }

    pub fn pure(psi: &[C64], dims: BipartiteDims) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi, psi), dims)
    }
}

/// ρ_SB = ρ_S ⊗ ρ_B + χ
#[derive(Clone, Debug)]
pub struct CorrelationDecomposition {
    pub rho_s: ComplexMatrix,
    pub rho_b: ComplexMatrix,
    pub chi: ComplexMatrix,
    pub dims: BipartiteDims,
}

impl CorrelationDecomposition {
    pub fn product(&self) -> ComplexMatrix {
        kron(&self.rho_s, &self.rho_b)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.product() + &self.chi
    }
}

#[derive(Clone, Debug)]
pub struct CorrelationParent {
    pub h_chi: ComplexMatrix,
    /// ‖−i⟦H_χ, ρ_S⊗ρ_B⟧ − χ‖_F / max(‖χ‖_F, 1e-300)
    pub residual: f64,
}

pub fn decompose(state: &JointState) -> Result<CorrelationDecomposition> {
    let tr = state.rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    let rho_s = partial_trace(&state.rho, state.dims, TraceOut::Bath)?;
    let rho_b = partial_trace(&state.rho, state.dims, TraceOut::System)?;
    let chi = &state.rho - &kron(&rho_s, &rho_b);
    Ok(CorrelationDecomposition {
        rho_s,
        rho_b,
        chi,
        dims: state.dims,
    })
}

/// ⟦A, B⟧ = AB − B†A†
pub fn gen_commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square() {
        return Err(Error::Dimension("generalized commutator operands differ".into()));
    }
    let ab = a.matmul(b);
    Ok(&ab - &ab.adjoint())
}

/// χ' = −i⟦H_χ, ρ_S⊗ρ_B⟧
pub fn correlate(h_chi: &ComplexMatrix, product: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(gen_commutator(h_chi, product)?.scale(-I))
}

/// Null-space projector of ρ_S⊗ρ_B assembled from the factor range projectors.
pub fn product_null_projector(dec: &CorrelationDecomposition, rank_cutoff: f64) -> Result<ComplexMatrix> {
    let ps = null_projector(&dec.rho_s, rank_cutoff)?;
    let pb = null_projector(&dec.rho_b, rank_cutoff)?;
    let rs = &ComplexMatrix::identity(dec.dims.d_s) - &ps;
    let rb = &ComplexMatrix::identity(dec.dims.d_b) - &pb;
    Ok(&ComplexMatrix::identity(dec.dims.joint()) - &kron(&rs, &rb))
}

/// ‖P₀ χ P₀‖_F
pub fn check_null_compatibility(dec: &CorrelationDecomposition, rank_cutoff: f64) -> Result<f64> {
    let p0 = product_null_projector(dec, rank_cutoff)?;
    Ok(p0.matmul(&dec.chi).matmul(&p0).frobenius_norm())
}

/// H_χ = (i/2)(I + P₀) χ (ρ_S⁺ ⊗ ρ_B⁺), the branch with vanishing gauge terms.
pub fn solve_parent(dec: &CorrelationDecomposition, rank_cutoff: f64) -> Result<CorrelationParent> {
    let p0 = product_null_projector(dec, rank_cutoff)?;
    let inv = kron(
        &pseudo_inverse(&dec.rho_s, rank_cutoff)?,
        &pseudo_inverse(&dec.rho_b, rank_cutoff)?,
    );
    let left = &ComplexMatrix::identity(dec.dims.joint()) + &p0;
    let h_chi = left.matmul(&dec.chi).matmul(&inv).scale(C64::new(0.0, 0.5));
    let back = correlate(&h_chi, &dec.product())?;
    let chi_norm = dec.chi.frobenius_norm();
    let residual = (&back - &dec.chi).frobenius_norm() / chi_norm.max(1e-300);
    let residual = if chi_norm == 0.0 { 0.0 } else { residual };
    if residual > RECONSTRUCTION_TOL && chi_norm > 1e-14 {
        return Err(Error::Reconstruction(residual));
    }
    Ok(CorrelationParent { h_chi, residual })
}
