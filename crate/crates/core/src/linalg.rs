//! Dense complex matrices and the handful of decompositions the formalism needs.
//!
//! Storage is row-major. Products skip exact-zero entries of the left factor,
//! which keeps sparse interaction Hamiltonians cheap without a sparse type.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default relative rank cutoff for pseudo-inverses and null projectors.
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Subsystem dimensions of a bipartite Hilbert space, system first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteDims {
    pub d_s: usize,
    pub d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_s: usize, d_b: usize) -> Self {
        Self { d_s, d_b }
    }

    pub fn joint(&self) -> usize {
        self.d_s * self.d_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOut {
    /// Trace over the system, leaving the bath.
    System,
    /// Trace over the bath, leaving the system.
    Bath,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    pub fn diag(d: &[C64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// self += s * other
    pub fn axpy(&mut self, s: C64, other: &Self) {
        self.check_same_shape(other);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// ‖M − M†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// (M + M†)/2
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        assert!(self.is_square());
        Self::from_fn(n, n, |i, j| 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj()))
    }

    /// Matrix product. Zero entries of `self` are skipped.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let (n, m) = (self.rows, rhs.cols);
        let mut out = Self::zeros(n, m);
        for i in 0..n {
            let orow = &mut out.data[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &rhs.data[k * m..(k + 1) * m];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// self · rhs†, without forming the adjoint.
    pub fn matmul_adj(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "inner dimensions differ");
        let (n, m, k) = (self.rows, rhs.rows, self.cols);
        Self::from_fn(n, m, |i, j| {
            let a = &self.data[i * k..(i + 1) * k];
            let b = &rhs.data[j * k..(j + 1) * k];
            a.iter().zip(b).map(|(&x, &y)| x * y.conj()).sum()
        })
    }

    /// [self, rhs] for Hermitian operands, as X − X† with X = self·rhs.
    pub fn hermitian_commutator(&self, rhs: &Self) -> Self {
        let x = self.matmul(rhs);
        let n = x.rows;
        Self::from_fn(n, n, |i, j| x.data[i * n + j] - x.data[j * n + i].conj())
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn anticommutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) + &rhs.matmul(self)
    }

    /// Conjugate by a diagonal phase: out_ij = m_ij · e^{i(e_i − e_j)t}.
    pub fn phase_rotate(&self, energies: &[f64], t: f64) -> Self {
        let n = self.rows;
        assert_eq!(energies.len(), n);
        let phases: Vec<C64> = energies.iter().map(|&e| C64::from_polar(1.0, e * t)).collect();
        Self::from_fn(n, n, |i, j| {
            let x = self.data[i * n + j];
            if x.re == 0.0 && x.im == 0.0 {
                x
            } else {
                x * phases[i] * phases[j].conj()
            }
        })
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! elementwise {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                self.check_same_shape(rhs);
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a $op b).collect(),
                }
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(ONE, rhs);
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(-ONE, rhs);
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self.matmul(&rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    let oc = ac * bc;
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            for k in 0..br {
                let row = (i * br + k) * oc + j * bc;
                for l in 0..bc {
                    out.data[row + l] = x * b.data[k * bc + l];
                }
            }
        }
    }
    out
}

fn check_joint(m: &ComplexMatrix, dims: BipartiteDims) -> Result<()> {
    if !m.is_square() || m.rows != dims.joint() {
        return Err(Error::Dimension(format!(
            "expected a {n}x{n} joint operator for dims ({}, {}), got {}x{}",
            dims.d_s,
            dims.d_b,
            m.rows,
            m.cols,
            n = dims.joint()
        )));
    }
    Ok(())
}

pub fn partial_trace(m: &ComplexMatrix, dims: BipartiteDims, side: TraceOut) -> Result<ComplexMatrix> {
    check_joint(m, dims)?;
    let BipartiteDims { d_s, d_b } = dims;
    let n = dims.joint();
    let out = match side {
        TraceOut::Bath => ComplexMatrix::from_fn(d_s, d_s, |a, b| {
            (0..d_b).map(|k| m.data[(a * d_b + k) * n + b * d_b + k]).sum()
        }),
        TraceOut::System => ComplexMatrix::from_fn(d_b, d_b, |k, l| {
            (0..d_s).map(|a| m.data[(a * d_b + k) * n + a * d_b + l]).sum()
        }),
    };
    Ok(out)
}

/// Tr_B[(I ⊗ y) · x] for a joint `x` and bath operator `y`, without forming the product.
pub fn trace_bath_weighted(x: &ComplexMatrix, y: &ComplexMatrix, dims: BipartiteDims) -> ComplexMatrix {
    let BipartiteDims { d_s, d_b } = dims;
    let n = dims.joint();
    let mut out = ComplexMatrix::zeros(d_s, d_s);
    // (I⊗y x)_{(a k),(b k)} = Σ_l y_{kl} x_{(a l),(b k)}
    for a in 0..d_s {
        for l in 0..d_b {
            let row = (a * d_b + l) * n;
            for b in 0..d_s {
                for k in 0..d_b {
                    let xv = x.data[row + b * d_b + k];
                    if xv.re == 0.0 && xv.im == 0.0 {
                        continue;
                    }
                    out.data[a * d_s + b] += y.data[k * d_b + l] * xv;
                }
            }
        }
    }
    out
}

/// Tr_S[(y ⊗ I) · x] for a joint `x` and system operator `y`.
pub fn trace_system_weighted(x: &ComplexMatrix, y: &ComplexMatrix, dims: BipartiteDims) -> ComplexMatrix {
    let BipartiteDims { d_s, d_b } = dims;
    let n = dims.joint();
    let mut out = ComplexMatrix::zeros(d_b, d_b);
    // Σ_{a,c} y_{ac} x_{(c k),(a l)}
    for c in 0..d_s {
        for k in 0..d_b {
            let row = (c * d_b + k) * n;
            for a in 0..d_s {
                let yv = y.data[a * d_s + c];
                if yv.re == 0.0 && yv.im == 0.0 {
                    continue;
                }
                for l in 0..d_b {
                    let xv = x.data[row + a * d_b + l];
                    if xv.re == 0.0 && xv.im == 0.0 {
                        continue;
                    }
                    out.data[k * d_b + l] += yv * xv;
                }
            }
        }
    }
    out
}

pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Dimension(format!(
            "hs_inner of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, &y)| x.conj() * y).sum())
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| C64::new(x, 0.0))
    }

    /// V f(Λ) V†
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        self.vectors.matmul(&ComplexMatrix::diag(&fv)).matmul_adj(&self.vectors)
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows).map(|i| self.vectors[(i, k)]).collect()
    }
}

const HERMITIAN_TOL: f64 = 1e-10;

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eig of {}x{} matrix", m.rows, m.cols)));
    }
    let scale = m.frobenius_norm().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.data[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.data[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a.data[p * n + p].re;
                let aqq = a.data[q * n + q].re;
                // Skip rotations that cannot change the diagonal in floating point.
                if mag < 1e-18 * (app.abs() + aqq.abs()) {
                    a.data[p * n + q] = ZERO;
                    a.data[q * n + p] = ZERO;
                    continue;
                }
                let u = apq / mag;
                let zeta = (aqq - app) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J restricted to (p, q): [[c, s], [-s·ū, c·ū]]
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -u.conj() * s;
                let jqq = u.conj() * c;
                for k in 0..n {
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    a.data[k * n + p] = akp * jpp + akq * jqp;
                    a.data[k * n + q] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a.data[p * n + k];
                    let aqk = a.data[q * n + k];
                    a.data[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a.data[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a.data[p * n + q] = ZERO;
                a.data[q * n + p] = ZERO;
                a.data[p * n + p].im = 0.0;
                a.data[q * n + q].im = 0.0;
                for k in 0..n {
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = vkp * jpp + vkq * jqp;
                    v.data[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.data[i * n + i].re.total_cmp(&a.data[j * n + j].re));
    let values = order.iter().map(|&i| a.data[i * n + i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.data[r * n + order[c]]);
    Ok(HermitianEig { values, vectors })
}

/// exp(−i·t·H) for Hermitian H.
pub fn unitary_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.apply_fn(|x| C64::from_polar(1.0, -x * t)))
}

fn cutoff_of(eig: &HermitianEig, rank_cutoff: f64) -> f64 {
    let lmax = eig.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    rank_cutoff * lmax
}

/// Moore–Penrose pseudo-inverse of a Hermitian PSD matrix.
pub fn pseudo_inverse(m: &ComplexMatrix, rank_cutoff: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let cut = cutoff_of(&eig, rank_cutoff);
    Ok(eig.apply_fn(|x| if x > cut && x != 0.0 { C64::new(1.0 / x, 0.0) } else { ZERO }))
}

/// Projector onto the eigenvectors with eigenvalue ≤ rank_cutoff·λ_max.
pub fn null_projector(m: &ComplexMatrix, rank_cutoff: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let cut = cutoff_of(&eig, rank_cutoff);
    Ok(eig.apply_fn(|x| if x > cut { ZERO } else { ONE }))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Truncated bosonic annihilation operator on `cut` Fock levels.
pub fn annihilation(cut: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(cut, cut);
    for n in 1..cut {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_psd_rank};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn kron_identity_and_pauli() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        let zi = kron(&pauli_z(), &ComplexMatrix::identity(2));
        assert_eq!(zi, ComplexMatrix::diag_real(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_against_index_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 3, 3);
        let b = random_matrix(&mut rng, 2, 2);
        let k = kron(&a, &b);
        for i in 0..3 {
            for j in 0..3 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(2 * i + p, 2 * j + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = 1.0 / 2f64.sqrt();
        let psi = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let rho = ComplexMatrix::outer(&psi, &psi);
        let dims = BipartiteDims::new(2, 2);
        let r = partial_trace(&rho, dims, TraceOut::Bath).unwrap();
        assert!(close(&r, &ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_hermitian(&mut rng, 4, 1.0);
        let dims = BipartiteDims::new(2, 2);
        let got = partial_trace(&m, dims, TraceOut::System).unwrap();
        let mut want = ComplexMatrix::zeros(2, 2);
        for k in 0..2 {
            for l in 0..2 {
                let mut acc = ZERO;
                for a in 0..2 {
                    acc += m[(a * 2 + k, a * 2 + l)];
                }
                want[(k, l)] = acc;
            }
        }
        assert!(close(&got, &want, 1e-14));
        assert!(partial_trace(&m, BipartiteDims::new(3, 2), TraceOut::Bath).is_err());
    }

    #[test]
    fn weighted_traces_match_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = BipartiteDims::new(3, 2);
        let x = random_matrix(&mut rng, 6, 6);
        let yb = random_matrix(&mut rng, 2, 2);
        let ys = random_matrix(&mut rng, 3, 3);
        let want_s = partial_trace(&kron(&ComplexMatrix::identity(3), &yb).matmul(&x), dims, TraceOut::Bath).unwrap();
        let want_b = partial_trace(&kron(&ys, &ComplexMatrix::identity(2)).matmul(&x), dims, TraceOut::System).unwrap();
        assert!(close(&trace_bath_weighted(&x, &yb, dims), &want_s, 1e-12));
        assert!(close(&trace_system_weighted(&x, &ys, dims), &want_b, 1e-12));
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let e = hermitian_eig(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.column(0);
        // (|0⟩ − |1⟩)/√2 up to phase
        assert!(((v0[0] + v0[1]).norm()) < 1e-14);
        assert!((v0[0].norm() - 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 6, 17, 64] {
            let m = random_hermitian(&mut rng, n, 1.0);
            let e = hermitian_eig(&m).unwrap();
            assert!((&e.reconstruct() - &m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
            let vv = e.vectors.matmul_adj(&e.vectors);
            assert!(close(&vv, &ComplexMatrix::identity(n), 1e-10));
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    fn taylor_exp(a: &ComplexMatrix) -> ComplexMatrix {
        // scaling and squaring around a 30-term Taylor series
        let norm = a.frobenius_norm();
        let mut s = 0;
        while norm / 2f64.powi(s) > 0.5 {
            s += 1;
        }
        let b = a.scale_real(1.0 / 2f64.powi(s));
        let n = a.rows();
        let mut term = ComplexMatrix::identity(n);
        let mut sum = ComplexMatrix::identity(n);
        for k in 1..30 {
            term = term.matmul(&b).scale_real(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn unitary_exp_cases() {
        let h = pauli_x();
        assert!(close(&unitary_exp(&h, 0.0).unwrap(), &ComplexMatrix::identity(2), 1e-15));
        let u = unitary_exp(&h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(close(&u, &pauli_x().scale(-I), 1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 5, 1.0);
        let u = unitary_exp(&h, 0.37).unwrap();
        let t = taylor_exp(&h.scale(C64::new(0.0, -0.37)));
        assert!(close(&u, &t, 1e-10));
    }

    #[test]
    fn unitary_exp_large_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_hermitian(&mut rng, 8, 1.0);
        let t = 50.0 / h.frobenius_norm();
        let u = unitary_exp(&h, t).unwrap();
        assert!(close(&u.matmul_adj(&u), &ComplexMatrix::identity(8), 1e-10));
    }

    #[test]
    fn pseudo_inverse_cases() {
        assert!(close(&pseudo_inverse(&ComplexMatrix::identity(2), RANK_CUTOFF).unwrap(), &ComplexMatrix::identity(2), 1e-15));
        let p = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert!(close(&pseudo_inverse(&p, RANK_CUTOFF).unwrap(), &p, 1e-15));
        assert_eq!(pseudo_inverse(&ComplexMatrix::zeros(3, 3), RANK_CUTOFF).unwrap(), ComplexMatrix::zeros(3, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_psd_rank(&mut rng, 4, 2);
        let pi = pseudo_inverse(&m, RANK_CUTOFF).unwrap();
        assert!(close(&m.matmul(&pi).matmul(&m), &m, 1e-9));
        assert!(close(&pi.matmul(&m).matmul(&pi), &pi, 1e-9));
        assert!(m.matmul(&pi).hermiticity_defect() < 1e-9);
        assert!(pi.matmul(&m).hermiticity_defect() < 1e-9);
    }

    #[test]
    fn null_projector_cases() {
        assert!(null_projector(&ComplexMatrix::identity(2), RANK_CUTOFF).unwrap().frobenius_norm() < 1e-15);
        let p = null_projector(&ComplexMatrix::diag_real(&[1.0, 0.0]), RANK_CUTOFF).unwrap();
        assert!(close(&p, &ComplexMatrix::diag_real(&[0.0, 1.0]), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_psd_rank(&mut rng, 5, 3);
        let p0 = null_projector(&m, RANK_CUTOFF).unwrap();
        assert!(p0.matmul(&m).frobenius_norm() < 1e-9);
        assert!(close(&p0.matmul(&p0), &p0, 1e-10));
        assert!(p0.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn hs_inner_cases() {
        assert_eq!(hs_inner(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap(), C64::new(2.0, 0.0));
        assert_eq!(hs_inner(&pauli_x(), &pauli_y()).unwrap(), ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 3, 3);
        let b = random_matrix(&mut rng, 3, 3);
        assert!((hs_inner(&a, &b).unwrap() - hs_inner(&b, &a).unwrap().conj()).norm() < 1e-14);
        assert!(hs_inner(&a, &ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn hermitian_commutator_matches_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_hermitian(&mut rng, 4, 1.0);
        let b = random_hermitian(&mut rng, 4, 1.0);
        assert!(close(&a.hermitian_commutator(&b), &a.commutator(&b), 1e-13));
    }

    #[test]
    fn matmul_adj_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 2, 4);
        assert!(close(&a.matmul_adj(&b), &a.matmul(&b.adjoint()), 1e-13));
    }
}
