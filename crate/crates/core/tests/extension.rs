//! Strip spectrum, extended basis and the lattice of domains.

use cone_ext::extension::{
    adjoint_domain, domain_stability, friedrichs_domain, global_basis, half_domain, holomorphy_residual, is_selfadjoint,
    min_equals_max, relative_index, saturate_decompose, saturation_check, shift_count, strip_spectrum, DomainSubspace,
};
use cone_ext::mellin::{CutoffProfile, Dictionary};
use cone_ext::pairing::pairing_gram;
use cone_ext::{fixtures, Basis, ConeError, Domain, Gram, Model, Poly, Tolerances, C64};
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn scalar_model(coeffs: &[(f64, f64)], label: &str) -> Model {
    let p = Poly::scalar(&coeffs.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>());
    Model::stationary(2.0, p, label).unwrap()
}

fn setup(m: &Model) -> (Basis, Gram) {
    let t = tol();
    let b = global_basis(m, &t).unwrap();
    let g = pairing_gram(m, &b, &b, &t).unwrap();
    (b, g)
}

fn dictionary(b: &Basis) -> Dictionary {
    Dictionary::standard(b, CutoffProfile::default(), &tol()).unwrap()
}

fn random_subspace(rng: &mut impl Rng, labels: Vec<cone_ext::extension::BasisLabel>, n: usize) -> Domain {
    let k = rng.random_range(0..=n);
    let vecs: Vec<Vec<C64>> =
        (0..k).map(|_| (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
    if k == 0 {
        DomainSubspace::zero(labels)
    } else {
        DomainSubspace::from_vectors(labels, &vecs)
    }
}

#[test]
fn shift_counts() {
    assert_eq!(shift_count(0.6, 2.0), 1);
    assert_eq!(shift_count(0.0, 2.0), 0);
    assert_eq!(shift_count(-0.6, 2.0), 0);
    assert_eq!(shift_count(2.5, 6.0), 5);
}

#[test]
fn a06_strip_spectrum() {
    let ss = strip_spectrum(&fixtures::cex1_a06(), &tol()).unwrap();
    let n_at = |z: C64| {
        let i = ss.sigma.iter().position(|p| (p.sigma0 - z).norm() < 1e-10).unwrap();
        ss.shifts[i]
    };
    assert_eq!(n_at(c(0.0, 0.6)), 1);
    assert_eq!(n_at(c(0.0, 0.0)), 0);
    assert_eq!(n_at(c(0.0, -0.6)), 0);
    assert!(ss.sigma_prime.iter().any(|z| (z - c(0.0, -0.4)).norm() < 1e-10));
}

#[test]
fn dimension_is_total_algebraic_multiplicity() {
    let t = tol();
    for m in fixtures::zoo() {
        let ss = strip_spectrum(&m, &t).unwrap();
        let b = global_basis(&m, &t).unwrap();
        let total: usize = ss.sigma.iter().map(|p| p.algebraic_mult).sum();
        assert_eq!(b.dim(), total, "{}", m.label());
    }
}

#[test]
fn min_equals_max_cases() {
    let t = tol();
    assert!(!min_equals_max(&fixtures::cex1_a2(), &t).unwrap());
    assert!(min_equals_max(&fixtures::shifted(), &t).unwrap());
    assert!(min_equals_max(&scalar_model(&[(4.0, 0.0), (0.0, 0.0), (1.0, 0.0)], "s4"), &t).unwrap());
}

#[test]
fn extended_basis_is_holomorphic() {
    let t = tol();
    for m in fixtures::zoo() {
        let b = global_basis(&m, &t).unwrap();
        for e in b.elements() {
            let r = holomorphy_residual(&m, e);
            assert!(r < 1e-10, "{} {}: {r}", m.label(), e.label());
        }
    }
}

#[test]
fn shift_recursion_one_step() {
    // sigma^2 + 1/4 with P_1 = 1: the element at i/2 picks up a part at -i/2.
    let t = tol();
    let m = fixtures::shift_coupled();
    let b = global_basis(&m, &t).unwrap();
    let pb = b.point(c(0.0, 0.5), &t).unwrap();
    assert_eq!(pb.n_shift, 1);
    let e = &pb.elements[0];
    assert_eq!(e.parts.len(), 2);
    assert!((e.parts[1].center - c(0.0, -0.5)).norm() < 1e-12);
    // -i/2 is itself spectral, so the shifted part has a double pole whose
    // leading coefficient is fixed by P_0 x = -P_1 psi(sigma + i).
    let lead = e.parts[0].at(-1)[0];
    let double = e.parts[1].at(-2)[0];
    let expected = -lead / c(0.0, -1.0);
    assert!((double - expected).norm() < 1e-10, "{double} vs {expected}");
    assert!(holomorphy_residual(&m, e) < 1e-12);
}

#[test]
fn cex1_adjoint_of_diagonal_line() {
    let t = tol();
    let m = fixtures::cex1_a2();
    let (b, g) = setup(&m);
    let dict = dictionary(&b);
    let gd = dict.gram(&g);
    assert!((gd[(0, 1)] - c(0.0, 1.0)).norm() < 1e-10 && (gd[(1, 0)] - c(0.0, 1.0)).norm() < 1e-10);
    let d = dict.domain(b.labels(), &[vec![c(1.0, 0.0), c(1.0, 0.0)]]);
    let perp = adjoint_domain(&d, &g, &t).unwrap();
    let expected = dict.domain(b.labels(), &[vec![c(1.0, 0.0), c(-1.0, 0.0)]]);
    assert!(perp.same_as(&expected, &t));
    assert!(!is_selfadjoint(&d, &g, &m, &t).unwrap());
}

#[test]
fn cex1_selfadjoint_family() {
    let t = tol();
    let m = fixtures::cex1_a2();
    let (b, g) = setup(&m);
    let dict = dictionary(&b);
    for k in 0..8 {
        let lam = k as f64 * 0.7;
        let e = C64::from_polar(1.0, lam);
        let d = dict.domain(b.labels(), &[vec![e + 1.0, e - 1.0]]);
        assert!(is_selfadjoint(&d, &g, &m, &t).unwrap(), "lambda = {lam}");
    }
    assert!(!is_selfadjoint(&DomainSubspace::full(b.labels()), &g, &m, &t).unwrap());
    assert!(!is_selfadjoint(&DomainSubspace::zero(b.labels()), &g, &m, &t).unwrap());
}

#[test]
fn b05_selfadjoint_lines() {
    let t = tol();
    let m = fixtures::beta_minus_b05();
    let (b, g) = setup(&m);
    let dict = dictionary(&b);
    for lam in [0.0, std::f64::consts::FRAC_PI_2, 1.234] {
        let d = dict.domain(b.labels(), &[vec![c(1.0, 0.0), C64::from_polar(1.0, lam)]]);
        assert!(is_selfadjoint(&d, &g, &m, &t).unwrap());
    }
    let d = dict.domain(b.labels(), &[vec![c(1.0, 0.0), c(2.0, 0.0)]]);
    assert!(!is_selfadjoint(&d, &g, &m, &t).unwrap());
}

#[test]
fn selfadjointness_needs_a_symmetric_model() {
    let t = tol();
    let m = fixtures::random_nonsymmetric();
    let (b, g) = setup(&m);
    let d = DomainSubspace::zero(b.labels());
    assert!(matches!(is_selfadjoint(&d, &g, &m, &t), Err(ConeError::NotSymmetric { .. })));
}

#[test]
fn adjoint_is_an_involution_on_random_subspaces() {
    let t = tol();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for m in fixtures::zoo() {
        let b = global_basis(&m, &t).unwrap();
        if b.dim() == 0 {
            continue;
        }
        let star = m.formal_adjoint();
        let bs = global_basis(&star, &t).unwrap();
        let g = pairing_gram(&m, &b, &bs, &t).unwrap();
        let gs = pairing_gram(&star, &bs, &b, &t).unwrap();
        for _ in 0..20 {
            let d = random_subspace(&mut rng, b.labels(), b.dim());
            let perp = adjoint_domain(&d, &g, &t).unwrap();
            assert_eq!(perp.dim(), b.dim() - d.dim());
            let back = adjoint_domain(&perp, &gs, &t).unwrap();
            assert!(back.same_as(&d, &t), "{}", m.label());
        }
    }
}

#[test]
fn cex1_saturation() {
    let t = tol();
    let b = global_basis(&fixtures::cex1_a2(), &t).unwrap();
    let dict = dictionary(&b);
    let omega = dict.domain(b.labels(), &[vec![c(1.0, 0.0), c(0.0, 0.0)]]);
    let log = dict.domain(b.labels(), &[vec![c(0.0, 0.0), c(1.0, 0.0)]]);
    assert!(saturation_check(&omega, &b, &t));
    assert!(!saturation_check(&log, &b, &t));
    assert!(saturation_check(&DomainSubspace::full(b.labels()), &b, &t));
    assert!(matches!(saturate_decompose(&log, &b, &t), Err(ConeError::NotInvariant { .. })));
}

#[test]
fn saturated_domains_split_by_point() {
    let t = tol();
    let b = global_basis(&fixtures::cex1_a06(), &t).unwrap();
    let parts = saturate_decompose(&DomainSubspace::full(b.labels()), &b, &t).unwrap();
    let dims: usize = parts.iter().map(|(_, d)| d.dim()).sum();
    assert_eq!(dims, b.dim());
    let at_zero = parts.iter().find(|(z, _)| z.norm() < 1e-10).unwrap();
    assert_eq!(at_zero.1.dim(), 2);
}

#[test]
fn half_domains() {
    let t = tol();
    let b = global_basis(&fixtures::sigma2_i2(), &t).unwrap();
    let h = half_domain(&b, c(0.0, 0.0), &t).unwrap();
    assert_eq!(h.dim(), 2);

    let b = global_basis(&fixtures::sigma4(), &t).unwrap();
    let h = half_domain(&b, c(0.0, 0.0), &t).unwrap();
    let kept: Vec<usize> = b.elements().enumerate().filter(|(i, _)| {
        let unit = DomainSubspace::coordinate_span(b.labels(), &[*i]);
        unit.is_subspace_of(&h, &t)
    }).map(|(_, e)| e.l).collect();
    assert_eq!(kept, vec![2, 3]);

    let cubic = scalar_model(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], "cubic");
    let b = global_basis(&cubic, &t).unwrap();
    assert!(matches!(half_domain(&b, c(0.0, 0.0), &t), Err(ConeError::OddMultiplicity { mult: 3, .. })));
    let b = global_basis(&fixtures::beta_plus(), &t).unwrap();
    assert!(matches!(half_domain(&b, c(0.0, 0.5), &t), Err(ConeError::NotRealPoint(_))));
}

#[test]
fn friedrichs_domains() {
    let t = tol();
    let m = fixtures::beta_plus();
    let b = global_basis(&m, &t).unwrap();
    let f = friedrichs_domain(&m, &b, &t).unwrap();
    let below = DomainSubspace::coordinate_span(b.labels(), &b.indices_at(c(0.0, -0.5), &t));
    assert!(f.same_as(&below, &t));

    let m = fixtures::beta_minus_b05();
    let b = global_basis(&m, &t).unwrap();
    assert!(matches!(friedrichs_domain(&m, &b, &t), Err(ConeError::NotPositive { .. })));

    let m = fixtures::random_nonsymmetric();
    let b = global_basis(&m, &t).unwrap();
    assert!(matches!(friedrichs_domain(&m, &b, &t), Err(ConeError::NotSymmetric { .. })));

    for m in [fixtures::cex1_a2(), fixtures::cex1_a06(), fixtures::alpha_perturbed(), fixtures::sigma4()] {
        let (b, g) = setup(&m);
        let f = friedrichs_domain(&m, &b, &t).unwrap();
        assert!(is_selfadjoint(&f, &g, &m, &t).unwrap(), "{}", m.label());
        assert!(saturation_check(&f, &b, &t), "{}", m.label());
    }
}

#[test]
fn cex1_friedrichs_is_omega() {
    let t = tol();
    let m = fixtures::cex1_a2();
    let b = global_basis(&m, &t).unwrap();
    let dict = dictionary(&b);
    let f = friedrichs_domain(&m, &b, &t).unwrap();
    let omega = dict.domain(b.labels(), &[vec![c(1.0, 0.0), c(0.0, 0.0)]]);
    assert!(f.angle_to(&omega).unwrap() < 1e-8);
}

#[test]
fn relative_indices() {
    let t = tol();
    let b = global_basis(&fixtures::cex1_a2(), &t).unwrap();
    let dmin: Domain = DomainSubspace::zero(b.labels());
    let dmax = DomainSubspace::full(b.labels());
    assert_eq!(relative_index(&dmin, &dmax), 2);
    assert_eq!(relative_index(&dmax, &dmax), 0);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for m in fixtures::zoo() {
        let b = global_basis(&m, &t).unwrap();
        let n = b.dim();
        let (lo, hi) = (DomainSubspace::zero(b.labels()), DomainSubspace::full(b.labels()));
        for _ in 0..20 {
            let d1 = random_subspace(&mut rng, b.labels(), n);
            let extra = random_subspace(&mut rng, b.labels(), n);
            let d2 = d1.sum(&extra);
            let d3 = d2.sum(&random_subspace(&mut rng, b.labels(), n));
            assert!(d1.is_subspace_of(&d2, &t), "{}", m.label());
            assert!(d2.is_subspace_of(&d3, &t), "{}", m.label());
            assert_eq!(relative_index(&d1, &d2) + relative_index(&d2, &d3), relative_index(&d1, &d3));
            assert_eq!(relative_index(&lo, &d1) + relative_index(&d1, &hi), n as i64);
        }
    }
}

#[test]
fn domain_stability_cases() {
    let t = tol();
    let r = domain_stability(&fixtures::alpha_perturbed(), &fixtures::cex1_a06(), &t).unwrap();
    assert!(r.friedrichs_domains_equal);
    // P_1 enters the shift from 0.6i to -0.4i, so the maximal domains differ.
    assert!(!r.coefficient_criterion);
    assert!(!r.max_domains_equal);

    // With nu = 5/2 a change in P_2 is invisible: N(0.6i) = 1.
    let a06 = fixtures::cex1_a06();
    let p2 = Poly::constant(cone_ext::CMat::identity(2, 2) * c(0.7, 0.0));
    let m0 = Model::new(2.5, vec![a06.p0().clone()], "m0").unwrap();
    let m1 = Model::new(2.5, vec![a06.p0().clone(), Poly::zero(2), p2], "m1").unwrap();
    let r = domain_stability(&m0, &m1, &t).unwrap();
    assert!(r.bases_coincide && r.max_domains_equal && r.friedrichs_domains_equal);

    let r = domain_stability(&fixtures::beta_plus(), &fixtures::beta_minus_b05(), &t).unwrap();
    assert!(!r.max_domains_equal);
    assert!(!r.friedrichs_domains_equal);

    assert!(matches!(
        domain_stability(&fixtures::cex1_a2(), &fixtures::cex1_a06(), &t),
        Err(ConeError::DimensionMismatch(_))
    ));
}

#[test]
fn domain_json_lists_labels() {
    let b = global_basis(&fixtures::cex1_a2(), &tol()).unwrap();
    let d: Domain = DomainSubspace::coordinate_span(b.labels(), &[1]);
    let v = d.to_json();
    assert_eq!(v["dim"], 1);
    assert!(v.to_string().contains("(0,0,0,1)"));
}
