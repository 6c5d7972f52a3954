use corrpic_core::correlation::{check_null_compatibility, correlate, decompose, solve_parent, JointState};
use corrpic_core::linalg::{
    hermitian_eig, kron, partial_trace, pseudo_inverse, unitary_exp, BipartiteDims, ComplexMatrix, TraceOut, C64,
    RANK_CUTOFF,
};
use corrpic_core::random::{random_density, random_hermitian, random_matrix, random_psd_rank};
use corrpic_core::solvers::{lindblad_evolve, mll_evolve, OpenSystem, TimeGrid};
use corrpic_core::ull::{build_basis, exact_generator, mll_generator, ull_rhs};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const DIMS: [usize; 3] = [2, 3, 4];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// H_S⊗I + I⊗H_B + H_I with ‖H_I‖_F = coupling·‖H_S‖_F.
fn hamiltonian(r: &mut ChaCha8Rng, ds: usize, db: usize, coupling: f64) -> ComplexMatrix {
    let h_s = random_hermitian(r, ds, 1.0);
    let h_b = random_hermitian(r, db, 1.0);
    let h_i = random_hermitian(r, ds * db, coupling);
    let mut h = kron(&h_s, &ComplexMatrix::identity(db));
    h = &h + &kron(&ComplexMatrix::identity(ds), &h_b);
    &h + &h_i
}

fn state(r: &mut ChaCha8Rng, ds: usize, db: usize, pure: bool) -> JointState {
    let n = ds * db;
    let rank = if pure { 1 } else { r.gen_range(2..=n) };
    JointState::new(random_density(r, n, rank), BipartiteDims::new(ds, db)).unwrap()
}

/// Real orthogonal matrix from Gram–Schmidt on Gaussian rows.
fn random_orthogonal(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    while rows.len() < k {
        let mut v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(r)).collect();
        for u in &rows {
            let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            rows.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    rows.concat()
}

fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eig(&m.hermitian_part()).unwrap().values.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eig(&m.hermitian_part()).unwrap().values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), i in 0usize..3, j in 0usize..3) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, DIMS[i], DIMS[i]);
        let b = random_matrix(&mut r, DIMS[j], DIMS[j]);
        let dims = BipartiteDims::new(DIMS[i], DIMS[j]);
        let got = partial_trace(&kron(&a, &b), dims, TraceOut::Bath).unwrap();
        let want = a.scale(b.trace());
        prop_assert!((&got - &want).max_abs() <= 1e-12 * (1.0 + want.max_abs()));
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=64) {
        let mut r = rng(seed);
        let m = random_hermitian(&mut r, n, 3.0);
        let eig = hermitian_eig(&m).unwrap();
        prop_assert!((&eig.reconstruct() - &m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn propagator_is_unitary(seed in any::<u64>(), n in 2usize..=16, t in 0.0f64..1.0) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n, 1.0);
        // ‖H‖·t up to 50
        let u = unitary_exp(&h, 50.0 * t).unwrap();
        let defect = &u.matmul_adj(&u) - &ComplexMatrix::identity(n);
        prop_assert!(defect.max_abs() <= 1e-10);
    }

    #[test]
    fn pseudo_inverse_penrose_conditions(seed in any::<u64>(), n in 2usize..=10, deficit in 1usize..=3) {
        let mut r = rng(seed);
        let rank = n.saturating_sub(deficit).max(1);
        let m = random_psd_rank(&mut r, n, rank);
        let p = pseudo_inverse(&m, RANK_CUTOFF).unwrap();
        let scale = m.frobenius_norm().max(1.0) * p.frobenius_norm().max(1.0);
        prop_assert!((&m.matmul(&p).matmul(&m) - &m).frobenius_norm() <= 1e-9 * scale * m.frobenius_norm());
        prop_assert!((&p.matmul(&m).matmul(&p) - &p).frobenius_norm() <= 1e-9 * scale * p.frobenius_norm());
        let mp = m.matmul(&p);
        let pm = p.matmul(&m);
        prop_assert!(mp.hermiticity_defect() <= 1e-9 * scale);
        prop_assert!(pm.hermiticity_defect() <= 1e-9 * scale);
    }

    #[test]
    fn parent_operator_round_trip(seed in any::<u64>(), i in 0usize..3, j in 0usize..3, pure in any::<bool>()) {
        let mut r = rng(seed);
        let st = state(&mut r, DIMS[i], DIMS[j], pure);
        let dec = decompose(&st).unwrap();
        let chi = &dec.chi;
        prop_assert!(partial_trace(chi, dec.dims, TraceOut::Bath).unwrap().max_abs() <= 1e-12);
        prop_assert!(partial_trace(chi, dec.dims, TraceOut::System).unwrap().max_abs() <= 1e-12);
        prop_assert!(check_null_compatibility(&dec, RANK_CUTOFF).unwrap() <= 1e-10);
        let parent = solve_parent(&dec, RANK_CUTOFF).unwrap();
        let back = correlate(&parent.h_chi, &dec.product()).unwrap();
        prop_assert!(back.hermiticity_defect() <= 1e-12);
        prop_assert!((&back - chi).frobenius_norm() <= 1e-8 * chi.frobenius_norm().max(1e-300));
    }

    #[test]
    fn ull_generator_is_exact(seed in any::<u64>(), i in 0usize..3, j in 0usize..3, coupling in 0.0f64..5.0, pure in any::<bool>()) {
        let mut r = rng(seed);
        let (ds, db) = (DIMS[i], DIMS[j]);
        let h = hamiltonian(&mut r, ds, db, coupling);
        let st = state(&mut r, ds, db, pure);
        let basis = build_basis(ds).unwrap();
        let eg = exact_generator(&h, &st, &basis, RANK_CUTOFF).unwrap();
        let rhs = ull_rhs(&eg.rho_s, &eg.generator);
        let comm = h.hermitian_commutator(&st.rho).scale(-corrpic_core::linalg::I);
        let want = partial_trace(&comm, st.dims, TraceOut::Bath).unwrap();
        prop_assert!((&rhs - &want).frobenius_norm() <= 1e-8);
        prop_assert!(rhs.trace().norm() <= 1e-12);
        prop_assert!(rhs.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn ull_rhs_is_basis_independent(seed in any::<u64>(), i in 0usize..3, j in 0usize..3) {
        let mut r = rng(seed);
        let (ds, db) = (DIMS[i], DIMS[j]);
        let h = hamiltonian(&mut r, ds, db, 2.0);
        let st = state(&mut r, ds, db, false);
        let basis = build_basis(ds).unwrap();
        let rotated = basis.rotated(&random_orthogonal(&mut r, ds * ds - 1));
        let a = exact_generator(&h, &st, &basis, RANK_CUTOFF).unwrap();
        let b = exact_generator(&h, &st, &rotated, RANK_CUTOFF).unwrap();
        let diff = &ull_rhs(&a.rho_s, &a.generator) - &ull_rhs(&b.rho_s, &b.generator);
        prop_assert!(diff.frobenius_norm() <= 1e-10);
    }

    #[test]
    fn fixed_generator_is_linear_on_mixtures(seed in any::<u64>(), i in 0usize..3, j in 0usize..3, w in 0.0f64..1.0) {
        let mut r = rng(seed);
        let (ds, db) = (DIMS[i], DIMS[j]);
        let h = hamiltonian(&mut r, ds, db, 1.0);
        let st = state(&mut r, ds, db, false);
        let eg = exact_generator(&h, &st, &build_basis(ds).unwrap(), RANK_CUTOFF).unwrap();
        let r1 = random_density(&mut r, ds, ds);
        let r2 = random_density(&mut r, ds, 1);
        let mix = &r1.scale_real(w) + &r2.scale_real(1.0 - w);
        let lhs = ull_rhs(&mix, &eg.generator);
        let rhs = &ull_rhs(&r1, &eg.generator).scale_real(w) + &ull_rhs(&r2, &eg.generator).scale_real(1.0 - w);
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-12 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn mll_rates_are_nonnegative(seed in any::<u64>(), i in 0usize..3, j in 0usize..3, tau in 0.0f64..10.0) {
        let mut r = rng(seed);
        let (ds, db) = (DIMS[i], DIMS[j]);
        let h = hamiltonian(&mut r, ds, db, 3.0);
        let (h_s, h_b, h_i) = corrpic_core::ull::split_hamiltonian(&h, BipartiteDims::new(ds, db)).unwrap();
        let rho_s = random_density(&mut r, ds, ds);
        let rank = r.gen_range(1..=db);
        let rho_b = random_density(&mut r, db, rank);
        let gen = mll_generator(&h_s, &h_b, &h_i, &rho_s, &rho_b, &build_basis(ds).unwrap()).unwrap();
        let at = gen.at(tau);
        prop_assert!(at.rates.iter().all(|g| *g >= -1e-12 * (1.0 + tau)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mll_and_lindblad_trajectories_stay_physical(seed in any::<u64>(), i in 0usize..2, j in 0usize..2) {
        let mut r = rng(seed);
        let (ds, db) = (DIMS[i], DIMS[j]);
        let h = hamiltonian(&mut r, ds, db, 1.0);
        let (h_s, h_b, h_i) = corrpic_core::ull::split_hamiltonian(&h, BipartiteDims::new(ds, db)).unwrap();
        let model = OpenSystem {
            h_s: h_s.clone(),
            h_b,
            h_i,
            rho_s0: random_density(&mut r, ds, 1),
            rho_b0: random_density(&mut r, db, db),
        };
        let grid = TimeGrid::span(2.0, 400).unwrap();
        let traj = mll_evolve(&model, &build_basis(ds).unwrap(), grid).unwrap();
        for s in &traj.states {
            prop_assert!(min_eigenvalue(s) >= -1e-6 && max_eigenvalue(s) <= 1.0 + 1e-6);
        }
        let jumps: Vec<ComplexMatrix> = (0..2).map(|_| random_matrix(&mut r, ds, ds)).collect();
        let rates = [0.3, 0.7];
        let traj = lindblad_evolve(&h_s, &rates, &jumps, &model.rho_s0, grid).unwrap();
        for s in &traj.states {
            prop_assert!(min_eigenvalue(s) >= -1e-6 && max_eigenvalue(s) <= 1.0 + 1e-6);
            prop_assert!((s.trace() - C64::new(1.0, 0.0)).norm() <= 1e-10);
        }
    }
}
