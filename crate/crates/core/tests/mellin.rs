//! Cut-off Mellin transforms, weighted inner products and the x-space pairing.

use cone_ext::extension::global_basis;
use cone_ext::mellin::{
    basis_functions, green_pairing_direct, green_pairing_with, mellin_germ, phi, phi_derivatives, phi_taylor,
    weighted_inner, CutoffProfile, Dictionary, ModelFunction,
};
use cone_ext::pairing::pairing_gram;
use cone_ext::{fixtures, ConeError, Model, Tolerances, C64};
use rand::{Rng, SeedableRng};

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn profiles() -> [CutoffProfile; 2] {
    [CutoffProfile::default(), CutoffProfile::new(0.1, 0.5).unwrap()]
}

/// Composite Simpson rule in `x`, independent of the `t = log x` machinery.
fn simpson(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * (h / 3.0)
}

#[test]
fn phi_at_zero_is_i() {
    for p in profiles() {
        assert!((phi(&p, c(0.0, 0.0), 1e-12).unwrap() - I).norm() < 1e-10);
    }
}

#[test]
fn phi_taylor_matches_derivatives() {
    let p = CutoffProfile::default();
    let center = c(0.3, 0.1);
    let taylor = phi_taylor(&p, center, 5, 0.5, 128, 1e-12).unwrap();
    let direct = phi_derivatives(&p, center, 4, 1e-12).unwrap();
    let mut fact = 1.0;
    for n in 0..5 {
        if n > 0 {
            fact *= n as f64;
        }
        let d = direct[n] / fact;
        assert!((taylor[n] - d).norm() < 1e-9 * d.norm().max(1.0), "n = {n}: {} vs {d}", taylor[n]);
    }
    // Cauchy estimates on the same circle.
    let bound = (0..64)
        .map(|k| phi(&p, center + C64::from_polar(0.5, k as f64 * std::f64::consts::TAU / 64.0), 1e-12).unwrap().norm())
        .fold(0.0, f64::max);
    for (n, t) in taylor.iter().enumerate() {
        assert!(t.norm() * 0.5f64.powi(n as i32) <= bound * 1.01);
    }
}

#[test]
fn omega_germ() {
    let t = tol();
    let p = CutoffProfile::default();
    let g = mellin_germ(&ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 0, p), c(0.0, 0.0), 3, &t).unwrap();
    assert_eq!(g.low, -1);
    assert!((g.at(-1)[0] - I).norm() < 1e-14);
    // Regular part of Phi(sigma)/sigma.
    let taylor = phi_taylor(&p, c(0.0, 0.0), 4, 0.5, 128, 1e-12).unwrap();
    for n in 0..3 {
        assert!((g.at(n)[0] - taylor[n as usize + 1]).norm() < 1e-8);
    }
}

#[test]
fn log_germ() {
    let t = tol();
    let p = CutoffProfile::default();
    // i omega log x has transform Phi/sigma^2 - Phi'/sigma.
    let u = ModelFunction::monomial(I, c(0.0, 0.0), 1, p);
    let g = mellin_germ(&u, c(0.0, 0.0), 0, &t).unwrap();
    assert_eq!(g.low, -2);
    assert!((g.at(-2)[0] - I).norm() < 1e-14);
    assert!(g.at(-1)[0].norm() < 1e-14);
    let mt = u.transform();
    for s in [c(0.7, 0.2), c(-1.1, -0.4)] {
        let d = phi_derivatives(&p, s, 1, 1e-12).unwrap();
        let expected = d[0] / (s * s) - d[1] / s;
        assert!((mt.value(s).unwrap() - expected).norm() < 1e-10);
    }
}

#[test]
fn power_germ() {
    let t = tol();
    let p = CutoffProfile::default();
    let b = 0.5;
    let u = ModelFunction::monomial(c(1.0, 0.0), c(b, 0.0), 0, p);
    let g = mellin_germ(&u, c(b, 0.0), 0, &t).unwrap();
    assert!((g.at(-1)[0] - I).norm() < 1e-14);
    assert_eq!(mellin_germ(&u, c(-b, 0.0), 0, &t).unwrap().pole_order(0.0), 0);
    let s = c(0.1, 0.3);
    let expected = phi(&p, s - b, 1e-12).unwrap() / (s - b);
    assert!((u.transform().value(s).unwrap() - expected).norm() < 1e-10);
}

#[test]
fn weighted_inner_products() {
    let p = CutoffProfile::default();
    let om = |x: f64| p.omega(x);
    let omega = ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 0, p);

    let v = weighted_inner(&omega, &omega, 2.0).unwrap();
    let oracle = simpson(|x| c(om(x).powi(2) * x, 0.0), 0.0, 1.0, 20000);
    assert!(v.im.abs() < 1e-12 && v.re > 0.0);
    assert!((v - oracle).norm() < 1e-9, "{v} vs {oracle}");

    let b = 0.5;
    let up = ModelFunction::monomial(c(1.0, 0.0), c(b, 0.0), 0, p);
    let um = ModelFunction::monomial(c(1.0, 0.0), c(-b, 0.0), 0, p);
    let v = weighted_inner(&up, &um, 2.0).unwrap();
    let oracle = simpson(|x| om(x).powi(2) * (C64::new(0.0, 2.0 * b) * x.ln()).exp() * x, 1e-12, 1.0, 200000);
    assert!((v - oracle).norm() < 1e-7, "{v} vs {oracle}");

    let lg = ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 1, p);
    let v = weighted_inner(&lg, &omega, 2.0).unwrap();
    let oracle = simpson(|x| c(if x > 0.0 { om(x).powi(2) * x.ln() * x } else { 0.0 }, 0.0), 0.0, 1.0, 200000);
    assert!(v.is_finite() && (v - oracle).norm() < 1e-7, "{v} vs {oracle}");

    // x^{-2} against itself with nu = 2 is not integrable.
    let bad = ModelFunction::monomial(c(1.0, 0.0), c(0.0, 2.0), 0, p);
    assert!(matches!(weighted_inner(&bad, &bad, 2.0), Err(ConeError::Divergent { .. })));
}

#[test]
fn green_examples() {
    let p = CutoffProfile::default();
    let cex1 = fixtures::cex1_a2();
    let omega = ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 0, p);
    let psi1 = ModelFunction::monomial(I, c(0.0, 0.0), 1, p);
    assert!((green_pairing_direct(&cex1, &omega, &psi1).unwrap() - I).norm() < 1e-6);
    assert!(green_pairing_direct(&cex1, &omega, &omega).unwrap().norm() < 1e-6);

    let b05 = fixtures::beta_minus_b05();
    let up = ModelFunction::monomial(c(1.0, 0.0), c(0.5, 0.0), 0, p);
    let um = ModelFunction::monomial(c(1.0, 0.0), c(-0.5, 0.0), 0, p);
    assert!((green_pairing_direct(&b05, &up, &up).unwrap() - I).norm() < 1e-6);
    assert!((green_pairing_direct(&b05, &um, &um).unwrap() + I).norm() < 1e-6);
    assert!(green_pairing_direct(&b05, &up, &um).unwrap().norm() < 1e-6);

    assert!(matches!(green_pairing_direct(&fixtures::cex1_a06(), &omega, &omega), Err(ConeError::NotScalar(2))));
}

#[test]
fn green_pairing_is_cutoff_independent() {
    let t = tol();
    let [p0, p1] = profiles();
    for m in [fixtures::cex1_a2(), fixtures::beta_minus_b05(), fixtures::beta_plus()] {
        let b = global_basis(&m, &t).unwrap();
        let elems: Vec<_> = b.elements().cloned().collect();
        let f0 = basis_functions(&elems, p0);
        let f1 = basis_functions(&elems, p1);
        for i in 0..elems.len() {
            for j in 0..elems.len() {
                let a = green_pairing_with(&m, &f0[i], &f0[j], &t).unwrap();
                let z = green_pairing_with(&m, &f1[i], &f1[j], &t).unwrap();
                assert!((a - z).norm() < 1e-8, "{} ({i},{j}): {a} vs {z}", m.label());
            }
        }
    }
}

#[test]
fn symmetric_self_pairings_are_imaginary() {
    let t = tol();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for m in [fixtures::cex1_a2(), fixtures::beta_minus_b05(), fixtures::beta_plus(), fixtures::sigma4()] {
        let b = global_basis(&m, &t).unwrap();
        let elems: Vec<_> = b.elements().cloned().collect();
        let fs = basis_functions(&elems, CutoffProfile::default());
        for _ in 0..5 {
            let mut u = ModelFunction::new(Vec::new(), CutoffProfile::default());
            for f in &fs {
                u = u.add(&f.scale(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
            }
            let v = green_pairing_with(&m, &u, &u, &t).unwrap();
            assert!(v.re.abs() < 1e-8, "{}: {v}", m.label());
        }
    }
}

#[test]
fn green_matches_gram_on_scalar_models() {
    let t = tol();
    let models: Vec<Model> = vec![
        fixtures::cex1_a2(),
        fixtures::beta_plus(),
        fixtures::beta_minus_b05(),
        fixtures::shift_coupled(),
        fixtures::sigma4(),
    ];
    for m in models {
        let b = global_basis(&m, &t).unwrap();
        let bs = global_basis(&m.formal_adjoint(), &t).unwrap();
        let g = pairing_gram(&m, &b, &bs, &t).unwrap();
        let fu = basis_functions(&b.elements().cloned().collect::<Vec<_>>(), CutoffProfile::default());
        let fv = basis_functions(&bs.elements().cloned().collect::<Vec<_>>(), CutoffProfile::default());
        for (i, u) in fu.iter().enumerate() {
            for (j, v) in fv.iter().enumerate() {
                let x = green_pairing_with(&m, u, v, &t).unwrap();
                assert!((x - g.g[(i, j)]).norm() < 1e-6, "{} ({i},{j}): {x} vs {}", m.label(), g.g[(i, j)]);
            }
        }
    }
}

#[test]
fn dictionaries() {
    let t = tol();
    let b = global_basis(&fixtures::cex1_a2(), &t).unwrap();
    let d = Dictionary::standard(&b, CutoffProfile::default(), &t).unwrap();
    assert_eq!(d.names, vec!["omega".to_string(), "omega (i log x)".to_string()]);
    let v = vec![c(0.3, -1.0), c(2.0, 0.5)];
    let back = d.from_raw(&d.to_raw(&v)).unwrap();
    assert!(v.iter().zip(&back).all(|(a, z)| (a - z).norm() < 1e-12));

    let one = vec![ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 0, CutoffProfile::default())];
    assert!(matches!(Dictionary::new(vec!["omega".into()], one, &b, &t), Err(ConeError::DimensionMismatch(_))));

    let twice = vec![
        ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 0, CutoffProfile::default()),
        ModelFunction::monomial(c(2.0, 0.0), c(0.0, 0.0), 0, CutoffProfile::default()),
    ];
    assert!(Dictionary::new(vec!["a".into(), "b".into()], twice, &b, &t).is_err());

    let sc = global_basis(&fixtures::shift_coupled(), &t).unwrap();
    assert!(matches!(Dictionary::standard(&sc, CutoffProfile::default(), &t), Err(ConeError::InvalidModel(_))));
}
