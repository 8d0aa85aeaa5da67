//! The generic core instantiated at `f32` with loosened tolerances.

use cone_ext::extension::{adjoint_domain, friedrichs_domain, global_basis, is_selfadjoint, DomainSubspace};
use cone_ext::pairing::pairing_gram;
use cone_ext::spectrum::boundary_spectrum;
use cone_ext::{ConeModel, Cx, MatrixPolynomial, Strip, Tolerances};

fn tol32() -> Tolerances {
    Tolerances {
        rank: 1e-4,
        cluster: 1e-3,
        edge: 1e-3,
        sym: 1e-5,
        pos: 1e-5,
        res: 1e-4,
        det: 1e-4,
        angle: 1e-4,
        coincide: 1e-6,
        lead: 1e-3,
        contour_agree: 1e-4,
        ..Tolerances::default()
    }
}

fn scalar(coeffs: &[f32]) -> MatrixPolynomial<f32> {
    MatrixPolynomial::scalar(&coeffs.iter().map(|&a| Cx::new(a, 0.0)).collect::<Vec<_>>())
}

#[test]
fn cex1_in_single_precision() {
    let t = tol32();
    let m = ConeModel::<f32>::stationary(2.0, scalar(&[0.0, 0.0, 1.0]), "cex1_f32").unwrap();
    let pts = boundary_spectrum(&m, Strip::new(-1.0, 1.0), &t).unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].algebraic_mult, 2);

    let b = global_basis(&m, &t).unwrap();
    let g = pairing_gram(&m, &b, &b, &t).unwrap();
    // Raw chain basis: [sigma^-1, sigma^-2] up to the phase convention; the Gram is antidiagonal.
    assert!(g.g[(0, 0)].norm() < 1e-5 && g.g[(1, 1)].norm() < 1e-5);
    assert!((g.g[(0, 1)].norm() - 1.0).abs() < 1e-5);

    let f = friedrichs_domain(&m, &b, &t).unwrap();
    assert_eq!(f.dim(), 1);
    assert!(is_selfadjoint(&f, &g, &m, &t).unwrap());
    let perp = adjoint_domain(&DomainSubspace::zero(b.labels()), &g, &t).unwrap();
    assert_eq!(perp.dim(), 2);
}

#[test]
fn b05_spectrum_in_single_precision() {
    let t = tol32();
    let m = ConeModel::<f32>::stationary(2.0, scalar(&[-0.25, 0.0, 1.0]), "b05_f32").unwrap();
    let b = global_basis(&m, &t).unwrap();
    assert_eq!(b.dim(), 2);
    let g = pairing_gram(&m, &b, &b, &t).unwrap();
    assert!((g.g[(0, 0)] + Cx::new(0.0, 1.0)).norm() < 1e-4, "{}", g.g);
    assert!((g.g[(1, 1)] - Cx::new(0.0, 1.0)).norm() < 1e-4);
}
