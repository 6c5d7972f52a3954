//! Seeded random operators and states for property checks and the validation harness.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix, C64};

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Hermitian matrix rescaled to Frobenius norm `norm`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize, norm: f64) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    let h = g.hermitian_part();
    let f = h.frobenius_norm();
    if f == 0.0 {
        h
    } else {
        h.scale_real(norm / f)
    }
}

/// Positive semidefinite matrix G G† of the given rank.
pub fn random_psd_rank(rng: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, rank);
    g.matmul_adj(&g)
}

/// Density matrix of the given rank (rank = n gives full-rank mixed states, 1 a pure state).
pub fn random_density(rng: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let m = random_psd_rank(rng, n, rank);
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

pub fn random_pure_state(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-distributed unitary via Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        for c in &cols {
            let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}
