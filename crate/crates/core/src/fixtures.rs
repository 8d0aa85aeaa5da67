//! Seeded test families and the named model zoo used by tests and the CLI.

use crate::model::ConeModel;
use crate::polynomial::MatrixPolynomial;
use crate::scalar::{CMat, Cx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Cx<f64>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat<f64> {
    CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
}

/// `I + 0.3 R` plus a small `sigma`-dependent part: invertible near the origin.
fn near_identity_family(rng: &mut ChaCha8Rng, n: usize) -> MatrixPolynomial<f64> {
    let a0 = CMat::identity(n, n) + random_matrix(rng, n, 0.3);
    let a1 = random_matrix(rng, n, 0.1);
    MatrixPolynomial::linear(a0, a1)
}

fn diag_powers(n: usize, sigma0: C, mults: &[usize]) -> MatrixPolynomial<f64> {
    let entries: Vec<Vec<C>> = (0..n)
        .map(|i| {
            let mu = mults.get(i).copied().unwrap_or(0);
            // (sigma - sigma0)^mu by repeated multiplication.
            let mut p = vec![c(1.0, 0.0)];
            for _ in 0..mu {
                let mut q = vec![c(0.0, 0.0); p.len() + 1];
                for (k, &a) in p.iter().enumerate() {
                    q[k + 1] += a;
                    q[k] -= a * sigma0;
                }
                p = q;
            }
            p
        })
        .collect();
    MatrixPolynomial::diagonal(&entries)
}

/// A pencil `E(sigma) diag((sigma - sigma0)^{mu_j}, 1, ...) F(sigma)` with known partial multiplicities.
#[derive(Debug, Clone)]
pub struct EngineeredPencil {
    pub p: MatrixPolynomial<f64>,
    pub sigma0: C,
    /// Nonincreasing.
    pub mults: Vec<usize>,
}

/// Seeded engineered pencils with `d <= max_dim` and `mu_j <= max_mu`.
pub fn engineered_pencils(seed: u64, count: usize, max_dim: usize, max_mu: usize) -> Vec<EngineeredPencil> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.random_range(1..=max_dim);
            let r = rng.random_range(1..=d);
            let mut mults: Vec<usize> = (0..r).map(|_| rng.random_range(1..=max_mu)).collect();
            mults.sort_unstable_by(|a, b| b.cmp(a));
            let sigma0 = c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let e = near_identity_family(&mut rng, d);
            let f = near_identity_family(&mut rng, d);
            let p = e.mul(&diag_powers(d, sigma0, &mults)).mul(&f);
            EngineeredPencil { p, sigma0, mults }
        })
        .collect()
}

/// Seeded `Q^* Q` pencils vanishing at a real point, with `Q` of the engineered form.
pub fn positive_pencils(seed: u64, count: usize, max_dim: usize, max_mu: usize) -> Vec<EngineeredPencil> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.random_range(1..=max_dim);
            let r = rng.random_range(1..=d);
            let mut k: Vec<usize> = (0..r).map(|_| rng.random_range(1..=max_mu)).collect();
            k.sort_unstable_by(|a, b| b.cmp(a));
            let sigma0 = c(rng.random_range(-0.5..0.5), 0.0);
            let e = near_identity_family(&mut rng, d);
            let f = near_identity_family(&mut rng, d);
            let q = e.mul(&diag_powers(d, sigma0, &k)).mul(&f);
            let p = q.star().mul(&q);
            EngineeredPencil { p, sigma0, mults: k.iter().map(|m| 2 * m).collect() }
        })
        .collect()
}

fn scalar(coeffs: &[(f64, f64)]) -> MatrixPolynomial<f64> {
    MatrixPolynomial::scalar(&coeffs.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>())
}

/// Scalar mode `sigma^2` with `nu = 2`.
pub fn cex1_a2() -> ConeModel<f64> {
    ConeModel::stationary(2.0, scalar(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]), "cex1_a2").expect("valid")
}

/// Modes `k = 0, 1` with `a = 0.6`: `diag(sigma^2, sigma^2 + 0.36)`, `nu = 2`.
pub fn cex1_a06() -> ConeModel<f64> {
    let p0 = MatrixPolynomial::diagonal(&[vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.36, 0.0), c(0.0, 0.0), c(1.0, 0.0)]]);
    ConeModel::stationary(2.0, p0, "cex1_a06").expect("valid")
}

/// `sigma^2 + b^2` with `b = 0.5`.
pub fn beta_plus() -> ConeModel<f64> {
    ConeModel::stationary(2.0, scalar(&[(0.25, 0.0), (0.0, 0.0), (1.0, 0.0)]), "beta_plus").expect("valid")
}

/// `sigma^2 - b^2` with `b = 0.5`.
pub fn beta_minus_b05() -> ConeModel<f64> {
    ConeModel::stationary(2.0, scalar(&[(-0.25, 0.0), (0.0, 0.0), (1.0, 0.0)]), "beta_minus_b05").expect("valid")
}

/// `a06` with the coefficient of the second mode perturbed at first order in `x`.
pub fn alpha_perturbed() -> ConeModel<f64> {
    let base = cex1_a06();
    let p1 = MatrixPolynomial::constant(CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(0.3, 0.0)])));
    ConeModel::new(2.0, vec![base.p0().clone(), p1], "alpha_perturbed").expect("valid")
}

/// Spectrum `{2i, 4i}`, outside the strip for `nu = 2`.
pub fn shifted() -> ConeModel<f64> {
    ConeModel::stationary(2.0, scalar(&[(-8.0, 0.0), (0.0, -6.0), (1.0, 0.0)]), "shifted").expect("valid")
}

/// The non-diagonalizable pencil `[[sigma, 1], [0, sigma]]`.
pub fn jordan2() -> ConeModel<f64> {
    let a0 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    ConeModel::stationary(2.0, MatrixPolynomial::linear(a0, CMat::identity(2, 2)), "jordan2").expect("valid")
}

/// `sigma^2 + 1/4` coupled at first order: `0.5 i` shifts onto `-0.5 i`.
pub fn shift_coupled() -> ConeModel<f64> {
    let p0 = scalar(&[(0.25, 0.0), (0.0, 0.0), (1.0, 0.0)]);
    let p1 = MatrixPolynomial::constant(CMat::from_element(1, 1, c(1.0, 0.0)));
    ConeModel::new(2.0, vec![p0, p1], "shift_coupled").expect("valid")
}

/// `sigma^4`: one chain of length four at a real point.
pub fn sigma4() -> ConeModel<f64> {
    ConeModel::stationary(2.0, scalar(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]), "sigma4").expect("valid")
}

/// `sigma^2 I_2`.
pub fn sigma2_i2() -> ConeModel<f64> {
    let z = CMat::zeros(2, 2);
    let p = MatrixPolynomial::new(vec![z.clone(), z, CMat::identity(2, 2)]).expect("valid");
    ConeModel::stationary(2.0, p, "sigma2_i2").expect("valid")
}

/// A seeded nonsymmetric `2 x 2` model with `nu = 3` and nonzero `P_1`, `P_2`.
pub fn random_nonsymmetric() -> ConeModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a0 = random_matrix(&mut rng, 2, 0.6);
    let a1 = random_matrix(&mut rng, 2, 0.4);
    let p0 = MatrixPolynomial::new(vec![a0, a1, CMat::identity(2, 2)]).expect("valid");
    let p1 = MatrixPolynomial::linear(random_matrix(&mut rng, 2, 0.3), random_matrix(&mut rng, 2, 0.1));
    let p2 = MatrixPolynomial::constant(random_matrix(&mut rng, 2, 0.2));
    ConeModel::new(3.0, vec![p0, p1, p2], "random_nonsymmetric").expect("valid")
}

/// Every named model.
pub fn zoo() -> Vec<ConeModel<f64>> {
    vec![
        cex1_a2(),
        cex1_a06(),
        beta_plus(),
        beta_minus_b05(),
        alpha_perturbed(),
        shifted(),
        jordan2(),
        shift_coupled(),
        sigma4(),
        sigma2_i2(),
        random_nonsymmetric(),
    ]
}

/// Looks a zoo model up by label.
pub fn by_name(name: &str) -> Option<ConeModel<f64>> {
    zoo().into_iter().find(|m| m.label() == name)
}
