//! Kernel/range splitting, Schur families, singular chains and germ reduction.

use cone_ext::chains::*;
use cone_ext::fixtures::{self, EngineeredPencil};
use cone_ext::pairing::iota;
use cone_ext::series::{LaurentGerm, Series};
use cone_ext::{CMat, CVec, ConeError, Poly, Tolerances, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sigma_identity(d: usize) -> Poly {
    Poly::linear(CMat::zeros(d, d), CMat::identity(d, d))
}

fn sigma_squared() -> Poly {
    Poly::scalar(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

fn jordan() -> Poly {
    let a0 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    Poly::linear(a0, CMat::identity(2, 2))
}

fn chains_of(p: &Poly, s0: C64) -> Chains {
    singular_chains(p, s0, default_truncation(p.dim() * p.degree(), 1), &tol()).unwrap()
}

type Chains = SingularChainBasis<f64>;

fn vec_germ(center: C64, low: i32, coeffs: Vec<Vec<C64>>) -> LaurentGerm<f64> {
    let d = coeffs[0].len();
    Series::new(center, low, coeffs.into_iter().map(CVec::from_vec).collect(), true, CVec::zeros(d))
}

#[test]
fn split_of_identity_pencil_is_everything() {
    let s = kernel_range_split(&sigma_identity(2), c(0.0, 0.0), &tol()).unwrap();
    assert_eq!(s.kernel_dim(), 2);
    assert_eq!(s.corange.ncols(), 2);
}

#[test]
fn split_of_sigma_squared() {
    let s = kernel_range_split(&sigma_squared(), c(0.0, 0.0), &tol()).unwrap();
    assert_eq!((s.kernel.ncols(), s.corange.ncols()), (1, 1));
}

#[test]
fn split_of_jordan_block() {
    let s = kernel_range_split(&jordan(), c(0.0, 0.0), &tol()).unwrap();
    assert_eq!(s.kernel_dim(), 1);
    assert!((s.kernel[(0, 0)].norm() - 1.0).abs() < 1e-14 && s.kernel[(1, 0)].norm() < 1e-14);
    assert!((s.corange[(1, 0)].norm() - 1.0).abs() < 1e-14 && s.corange[(0, 0)].norm() < 1e-14);
}

#[test]
fn split_rejects_regular_points() {
    let err = kernel_range_split(&sigma_squared(), c(0.5, 0.0), &tol()).unwrap_err();
    assert!(matches!(err, ConeError::NotSpectral(_)));
}

#[test]
fn schur_family_examples() {
    let f = schur_family(&sigma_squared(), c(0.0, 0.0), 4, &tol()).unwrap().family;
    assert!((f.at(2)[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    assert!(f.at(0)[(0, 0)].norm() < 1e-14 && f.at(1)[(0, 0)].norm() < 1e-14);

    let f = schur_family(&sigma_identity(2), c(0.0, 0.0), 4, &tol()).unwrap().family;
    assert!((f.at(1) - CMat::identity(2, 2)).norm() < 1e-14);
    assert!(f.at(0).norm() < 1e-14);

    // Jordan block: the 1x1 complement is -sigma^2 up to the unit phases of
    // the singular vectors.
    let sf = schur_family(&jordan(), c(0.0, 0.0), 6, &tol()).unwrap();
    let f = &sf.family;
    assert!(f.at(0)[(0, 0)].norm() < 1e-14 && f.at(1)[(0, 0)].norm() < 1e-14);
    assert!((f.at(2)[(0, 0)].norm() - 1.0).abs() < 1e-13);
    for k in 3..=6 {
        assert!(f.at(k)[(0, 0)].norm() < 1e-13);
    }
    let phase = sf.split.corange[(1, 0)].conj() * sf.split.kernel[(0, 0)];
    assert!((f.at(2)[(0, 0)] / phase + c(1.0, 0.0)).norm() < 1e-13);
}

#[test]
fn sigma_squared_has_one_double_chain() {
    let b = chains_of(&sigma_squared(), c(0.0, 0.0));
    assert_eq!(b.mults, vec![2]);
    let pp = b.chains[0].principal();
    assert!((pp.at(-2)[0].norm() - 1.0).abs() < 1e-14);
    assert!(pp.at(-1)[0].norm() < 1e-14);
}

#[test]
fn identity_pencil_has_simple_chains() {
    for d in 1..=4 {
        let b = chains_of(&sigma_identity(d), c(0.0, 0.0));
        assert_eq!(b.mults, vec![1; d]);
        let lead = CMat::from_columns(&b.leading());
        assert!((lead.adjoint() * &lead - CMat::identity(d, d)).norm() < 1e-13);
    }
}

#[test]
fn constant_equivalence_of_smith_form() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut rand_mat = || CMat::identity(3, 3) + CMat::from_fn(3, 3, |_, _| c(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)));
    let (e, f) = (rand_mat(), rand_mat());
    let diag = Poly::diagonal(&[
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0)],
    ]);
    let p = diag.sandwich(&e, &f);
    let b = singular_chains(&p, c(0.0, 0.0), 8, &tol()).unwrap();
    assert_eq!(b.mults, vec![3, 1]);
    assert_eq!(rank_multiplicities(&p, c(0.0, 0.0), &tol()), vec![3, 1]);
}

fn check_engineered(e: &EngineeredPencil) {
    let b = singular_chains(&e.p, e.sigma0, default_truncation(e.mults.iter().sum(), 1), &tol()).unwrap();
    assert_eq!(b.mults, e.mults);
    let total: usize = e.mults.iter().sum();
    assert_eq!(e.p.det_winding(e.sigma0, 0.05, 512).unwrap(), total as i64);
    // Orthonormal leading coefficients.
    let lead = CMat::from_columns(&b.leading());
    let n = lead.ncols();
    assert!((lead.adjoint() * &lead - CMat::identity(n, n)).norm() < 1e-8);
}

#[test]
fn engineered_multiplicities_are_recovered() {
    for e in fixtures::engineered_pencils(2024, 40, 4, 3) {
        check_engineered(&e);
    }
}

#[test]
fn adjoint_has_the_same_multiplicities() {
    for e in fixtures::engineered_pencils(77, 40, 4, 3) {
        let a = singular_chains(&e.p, e.sigma0, 8, &tol()).unwrap();
        let b = singular_chains(&e.p.star(), e.sigma0.conj(), 8, &tol()).unwrap();
        assert_eq!(a.mults, b.mults);
        let dual = a.dual().unwrap();
        assert_eq!(dual.mults, a.mults);
        assert!((dual.sigma0 - e.sigma0.conj()).norm() < 1e-14);
    }
}

#[test]
fn positive_pencils_have_even_multiplicities() {
    for e in fixtures::positive_pencils(9, 30, 3, 2) {
        let b = singular_chains(&e.p, e.sigma0, 10, &tol()).unwrap();
        assert!(b.mults.iter().all(|m| m % 2 == 0), "{:?}", b.mults);
        assert_eq!(b.mults, e.mults);
    }
}

#[test]
fn chains_annihilate_to_holomorphic() {
    for e in fixtures::engineered_pencils(5, 20, 3, 3) {
        let b = singular_chains(&e.p, e.sigma0, 8, &tol()).unwrap();
        let pg = cone_ext::series::matrix_germ_from_poly(&e.p, e.sigma0);
        for ch in &b.chains {
            let image = cone_ext::series::mat_vec(&pg, ch);
            assert!(image.principal().max_norm() < 1e-8 * ch.max_norm().max(1.0));
        }
    }
}

#[test]
fn reduce_basis_element_gives_unit_coordinate() {
    let p = fixtures::sigma2_i2().p0().clone();
    let b = chains_of(&p, c(0.0, 0.0));
    for j in 0..b.mults.len() {
        for l in 0..b.mults[j] {
            let g = reduce_germ(&b.element(j, l), &b, &tol()).unwrap();
            for (jj, row) in g.coords.iter().enumerate() {
                for (ll, &x) in row.iter().enumerate() {
                    let want = if (jj, ll) == (j, l) { 1.0 } else { 0.0 };
                    assert!((x - c(want, 0.0)).norm() < 1e-12);
                }
            }
            assert!(g.residual_norm() < 1e-12);
        }
    }
}

#[test]
fn reduce_cex1_germ() {
    let b = chains_of(&sigma_squared(), c(0.0, 0.0));
    let lead = b.chains[0].at(-2)[0];
    let (u1, u0) = (c(0.3, -0.2), c(1.1, 0.4));
    let u = vec_germ(c(0.0, 0.0), -2, vec![vec![u1], vec![u0]]);
    let g = reduce_germ(&u, &b, &tol()).unwrap();
    assert!((g.coords[0][0] * lead - u1).norm() < 1e-13);
    assert!((g.coords[0][1] * lead - u0).norm() < 1e-13);
}

#[test]
fn germ_outside_the_chain_span_is_rejected() {
    // diag(sigma, 1): the chains live in e_1 only.
    let p = Poly::diagonal(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0)]]);
    let b = chains_of(&p, c(0.0, 0.0));
    let u = vec_germ(c(0.0, 0.0), -1, vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]);
    assert!(matches!(reduce_germ(&u, &b, &tol()), Err(ConeError::NotInSpan { .. })));
    let w = vec_germ(c(0.1, 0.0), -1, vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]);
    assert!(matches!(reduce_germ(&w, &b, &tol()), Err(ConeError::BasePointMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduce_inverts_combine(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let e = &fixtures::engineered_pencils(seed, 1, 3, 3)[0];
        let b = singular_chains(&e.p, e.sigma0, 8, &tol()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let coords: Vec<Vec<C64>> = b.mults.iter()
            .map(|&m| (0..m).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .collect();
        let u = combine_chains(&coords, &b);
        let back = reduce_germ(&u, &b, &tol()).unwrap();
        for (x, y) in back.flatten().iter().zip(coords.iter().flatten()) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }
}

#[test]
fn truncation_is_doubled_when_too_short() {
    let p = Poly::scalar(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    assert!(matches!(singular_chains_at(&p, c(0.0, 0.0), 2, &tol()), Err(ConeError::TruncationTooShort { .. })));
    let b = singular_chains(&p, c(0.0, 0.0), 2, &tol()).unwrap();
    assert_eq!(b.mults, vec![4]);
    assert!(b.truncation >= 4);
}

fn iota_table(b: &Chains) -> Vec<Vec<LaurentGerm<f64>>> {
    let hol: Vec<LaurentGerm<f64>> = b.chains.iter().zip(&b.mults).map(|(ch, &m)| ch.mul_pow(m as i32)).collect();
    hol.iter()
        .map(|bi| {
            hol.iter()
                .map(|bj| {
                    let g = iota(bi, bj).unwrap();
                    Series::new(g.center, g.low, g.coeffs.iter().map(|&z| CVec::from_element(1, z)).collect(), true, CVec::zeros(1))
                })
                .collect()
        })
        .collect()
}

#[test]
fn holomorphic_gram_schmidt_normalizes() {
    // sigma I_2 with its chains mixed by a constant invertible matrix.
    let mix = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.7, 0.2), c(-0.3, 0.1), c(1.2, 0.0)]);
    let p = sigma_identity(2).sandwich(&mix, &CMat::identity(2, 2));
    let b = chains_of(&p, c(0.0, 0.0));
    let g = holomorphic_gram_schmidt(&b, &tol()).unwrap();
    assert_eq!(g.mults, b.mults);
    let table = iota_table(&g);
    let order = g.truncation as i32;
    for (i, row) in table.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            for n in 0..order {
                let want = if i == j && n == 0 { 1.0 } else { 0.0 };
                assert!((f.at(n)[0] - c(want, 0.0)).norm() < 1e-10, "({i},{j}) order {n}");
            }
        }
    }
    // Idempotent up to tolerance.
    let gg = holomorphic_gram_schmidt(&g, &tol()).unwrap();
    for (a, b) in gg.chains.iter().zip(&g.chains) {
        assert!(a.sub(b).principal().max_norm() < 1e-10);
    }
}

#[test]
fn holomorphic_gram_schmidt_scalar_and_errors() {
    let b = chains_of(&sigma_squared(), c(0.0, 0.0));
    let g = holomorphic_gram_schmidt(&b, &tol()).unwrap();
    let f = &iota_table(&g)[0][0];
    assert!((f.at(0)[0] - c(1.0, 0.0)).norm() < 1e-12);
    for n in 1..g.truncation as i32 {
        assert!(f.at(n)[0].norm() < 1e-12);
    }
    let q = Poly::scalar(&[c(-0.25, 0.0), c(0.0, -1.0), c(1.0, 0.0)]);
    let bq = chains_of(&q, c(0.0, 0.5));
    assert!(matches!(holomorphic_gram_schmidt(&bq, &tol()), Err(ConeError::NotRealPoint(_))));
}
