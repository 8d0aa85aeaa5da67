//! The pairing `iota`, local residue pairings, the global adjoint pairing
//! Gram matrix, and contour quadrature as an independent route.

use crate::chains::{reduce_germ, SingularChainBasis};
use crate::config::Tolerances;
use crate::error::{point, ConeError, Result};
use crate::extension::{BasisLabel, GlobalBasis};
use crate::linalg;
use crate::model::ConeModel;
use crate::polynomial::MatrixPolynomial;
use crate::scalar::{cabs, czero, iunit, CMat, CVec, Cx, Real};
use crate::series::{mat_vec, matrix_germ_from_poly, product, same_point, LaurentGerm, ScalarGerm, Series};
use serde_json::{json, Value};

/// `iota(u, v)(sigma) = <u(sigma), v(conj sigma)>` for `u` at `sigma0` and `v` at `conj sigma0`.
pub fn iota<T: Real>(u: &LaurentGerm<T>, v: &LaurentGerm<T>) -> Result<ScalarGerm<T>> {
    if !same_point(u.center, v.center.conj(), T::lit(1e-9)) {
        return Err(ConeError::BasePointMismatch { left: point(u.center), right: point(v.center) });
    }
    let w = v.theta().with_center(u.center);
    Ok(product(u, &w, czero(), |a: &CVec<T>, b: &CVec<T>| {
        a.iter().zip(b.iter()).fold(czero(), |s, (x, y)| s + *x * *y)
    }))
}

/// The conjugation `Theta(f)(sigma) = conj f(conj sigma)` on germs.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConjugationMap;

impl ConjugationMap {
    pub fn apply<T: Real>(&self, f: &ScalarGerm<T>) -> ScalarGerm<T> {
        f.theta()
    }

    pub fn apply_vec<T: Real>(&self, f: &LaurentGerm<T>) -> LaurentGerm<T> {
        f.theta()
    }
}

/// `i sum_j sum_k u_jk conj(v_{j, mu_j - k - 1})` from chain coordinates;
/// `basis_star` must be the dual basis of `basis`.
pub fn residue_pairing_local<T: Real>(
    u: &LaurentGerm<T>,
    v: &LaurentGerm<T>,
    basis: &SingularChainBasis<T>,
    basis_star: &SingularChainBasis<T>,
    tol: &Tolerances,
) -> Result<Cx<T>> {
    let cu = reduce_germ(u, basis, tol)?;
    let cv = reduce_germ(v, basis_star, tol)?;
    Ok(local_form(&cu.coords, &cv.coords, iunit()))
}

/// The bilinear-sesquilinear form of the local residue pairing with a given prefactor.
pub fn local_form<T: Real>(u: &[Vec<Cx<T>>], v: &[Vec<Cx<T>>], factor: Cx<T>) -> Cx<T> {
    let mut acc = czero::<T>();
    for (uj, vj) in u.iter().zip(v) {
        let mu = uj.len();
        for k in 0..mu {
            acc += uj[k] * vj[mu - k - 1].conj();
        }
    }
    factor * acc
}

/// `i Res iota(u, P_0^* v)`: the local pairing from principal parts and the
/// adjoint symbol, valid whenever `P_0^* pp(v)` is holomorphic.
pub fn residue_pairing<T: Real>(u: &LaurentGerm<T>, v: &LaurentGerm<T>, p0: &MatrixPolynomial<T>) -> Result<Cx<T>> {
    let pstar = matrix_germ_from_poly(&p0.star(), v.center);
    let w = mat_vec(&pstar, &v.principal());
    let s = iota(&u.principal(), &w)?;
    Ok(iunit::<T>() * s.at(-1))
}

/// Something that can be evaluated as a vector-valued function of `sigma`.
pub trait Meromorphic<T: Real> {
    fn eval_at(&self, sigma: Cx<T>) -> CVec<T>;
}

impl<T: Real> Meromorphic<T> for LaurentGerm<T> {
    fn eval_at(&self, sigma: Cx<T>) -> CVec<T> {
        self.eval(sigma)
    }
}

/// A circle `|sigma - center| = radius`.
#[derive(Debug, Clone, Copy)]
pub struct Circle<T: Real> {
    pub center: Cx<T>,
    pub radius: T,
}

impl<T: Real> Circle<T> {
    pub fn new(center: Cx<T>, radius: T) -> Self {
        Circle { center, radius }
    }

    /// Half the distance to the nearest other point, capped at 1.
    pub fn default_for(center: Cx<T>, others: &[Cx<T>]) -> Self {
        let mut r = T::one();
        for &o in others {
            let d = cabs(o - center);
            if d > T::lit(1e-12) && d / T::lit(2.0) < r {
                r = d / T::lit(2.0);
            }
        }
        Circle { center, radius: r }
    }

    pub fn check(&self, avoid: &[Cx<T>], tol: &Tolerances) -> Result<()> {
        for &p in avoid {
            if (cabs(p - self.center) - self.radius).abs().to_f64_lossy() < tol.edge {
                return Err(ConeError::ContourTouchesSpectrum {
                    center: point(self.center),
                    radius: self.radius.to_f64_lossy(),
                    point: point(p),
                });
            }
        }
        Ok(())
    }
}

/// `(1/2 pi) \oint <P_0(sigma) u(sigma), v(conj sigma)> d sigma` by the trapezoid rule.
pub fn contour_pairing<T: Real>(
    u: &dyn Meromorphic<T>,
    v: &dyn Meromorphic<T>,
    p0: &MatrixPolynomial<T>,
    gamma: Circle<T>,
    n_nodes: usize,
) -> Cx<T> {
    let mut acc = czero::<T>();
    let two_pi = T::two_pi();
    for k in 0..n_nodes {
        let th = two_pi * T::lit(k as f64) / T::lit(n_nodes as f64);
        let e = Cx::new(th.cos(), th.sin()) * gamma.radius;
        let s = gamma.center + e;
        let pu = p0.eval(s) * u.eval_at(s);
        let vv = v.eval_at(s.conj());
        let f = vv.dotc(&pu);
        acc += f * iunit::<T>() * e;
    }
    acc / Cx::new(T::lit(n_nodes as f64), T::zero())
}

/// [`contour_pairing`] with node doubling until successive values agree.
pub fn contour_pairing_adaptive<T: Real>(
    u: &dyn Meromorphic<T>,
    v: &dyn Meromorphic<T>,
    p0: &MatrixPolynomial<T>,
    gamma: Circle<T>,
    avoid: &[Cx<T>],
    tol: &Tolerances,
) -> Result<(Cx<T>, usize)> {
    gamma.check(avoid, tol)?;
    let mut n = tol.contour_nodes.max(8);
    let mut prev = contour_pairing(u, v, p0, gamma, n);
    while n < tol.contour_max_nodes {
        n *= 2;
        let cur = contour_pairing(u, v, p0, gamma, n);
        if cabs(cur - prev).to_f64_lossy() <= tol.contour_agree * cabs(cur).to_f64_lossy().max(1.0) {
            return Ok((cur, n));
        }
        prev = cur;
    }
    Ok((prev, n))
}

/// Gram matrix `G[a, b] = [Psi_a, Psi*_b]` between global bases of `A` and `A^*`.
#[derive(Debug, Clone)]
pub struct PairingGram<T: Real> {
    pub rows: Vec<BasisLabel>,
    pub cols: Vec<BasisLabel>,
    pub g: CMat<T>,
}

/// `Some(tau)` when `a - conj(b) = i tau` with `tau` a nonnegative integer.
pub fn conjugate_shift<T: Real>(a: Cx<T>, b: Cx<T>, tol: &Tolerances) -> Option<usize> {
    let w = a - b.conj();
    let eps = T::lit(tol.cluster) * crate::scalar::scale_of(a).max(crate::scalar::scale_of(b));
    if w.re.abs() > eps {
        return None;
    }
    let t = w.im.round();
    if t < -eps || (w.im - t).abs() > eps {
        return None;
    }
    t.to_usize().or(Some(0))
}

/// Gram matrix of the adjoint pairing via residues of the shifted parts.
pub fn pairing_gram<T: Real>(
    model: &ConeModel<T>,
    basis_e: &GlobalBasis<T>,
    basis_estar: &GlobalBasis<T>,
    tol: &Tolerances,
) -> Result<PairingGram<T>> {
    pairing_gram_with_factor(model, basis_e, basis_estar, iunit(), tol)
}

/// [`pairing_gram`] with the contour prefactor exposed (the mutation fixture flips its sign).
pub fn pairing_gram_with_factor<T: Real>(
    model: &ConeModel<T>,
    basis_e: &GlobalBasis<T>,
    basis_estar: &GlobalBasis<T>,
    factor: Cx<T>,
    tol: &Tolerances,
) -> Result<PairingGram<T>> {
    let q = model.formal_adjoint().normal_ordered().indicial().to_vec();
    let rows = basis_e.labels();
    let cols = basis_estar.labels();
    let ea: Vec<_> = basis_e.elements().collect();
    let eb: Vec<_> = basis_estar.elements().collect();
    let mut g = CMat::<T>::zeros(ea.len(), eb.len());
    for (a, ua) in ea.iter().enumerate() {
        for (b, vb) in eb.iter().enumerate() {
            let Some(tau) = conjugate_shift(ua.sigma0, vb.sigma0, tol) else {
                continue;
            };
            let mut acc = czero::<T>();
            for th in 0..=tau {
                let Some(u) = ua.parts.get(tau - th) else { continue };
                let center = vb.sigma0 - iunit::<T>() * T::lit(th as f64);
                let d = model.dim();
                let mut gsum: LaurentGerm<T> = Series::zero(center, CVec::zeros(d));
                for thp in 0..=th {
                    let k = th - thp;
                    let (Some(qk), Some(part)) = (q.get(k), vb.parts.get(thp)) else { continue };
                    let shifted = part.argument_shift(iunit::<T>() * T::lit(k as f64)).with_center(center);
                    let qg = matrix_germ_from_poly(qk, center);
                    gsum = gsum.add(&mat_vec(&qg, &shifted));
                }
                let uc = u.with_center(center.conj());
                let s = iota(&uc, &gsum)?;
                acc += s.at(-1);
            }
            g[(a, b)] = factor * acc;
        }
    }
    Ok(PairingGram { rows, cols, g })
}

impl<T: Real> PairingGram<T> {
    /// Indices of rows (or columns) belonging to a point.
    fn indices(labels: &[BasisLabel], z: (f64, f64)) -> Vec<usize> {
        labels.iter().enumerate().filter(|(_, l)| l.sigma0 == z).map(|(i, _)| i).collect()
    }

    /// The block between points `z` (rows) and `w` (columns).
    pub fn block(&self, z: (f64, f64), w: (f64, f64)) -> CMat<T> {
        let r = Self::indices(&self.rows, z);
        let c = Self::indices(&self.cols, w);
        CMat::from_fn(r.len(), c.len(), |i, j| self.g[(r[i], c[j])])
    }

    /// Distinct row points in order.
    pub fn row_points(&self) -> Vec<(f64, f64)> {
        distinct(&self.rows)
    }

    pub fn col_points(&self) -> Vec<(f64, f64)> {
        distinct(&self.cols)
    }

    /// Re-expresses the Gram in other coordinates: `M_r^T G conj(M_c)`.
    pub fn change_basis(&self, m_rows: &CMat<T>, m_cols: &CMat<T>) -> CMat<T> {
        m_rows.transpose() * &self.g * m_cols.map(|z| z.conj())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
        let header = std::iter::once(String::new()).chain(self.cols.iter().map(|l| l.to_string()));
        w.write_record(header).expect("in-memory csv");
        for (i, r) in self.rows.iter().enumerate() {
            let cells = (0..self.cols.len()).map(|j| format_complex(self.g[(i, j)]));
            w.write_record(std::iter::once(r.to_string()).chain(cells)).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 labels")
    }

    pub fn to_json(&self) -> Value {
        let g: Vec<Vec<[f64; 2]>> = (0..self.g.nrows())
            .map(|i| (0..self.g.ncols()).map(|j| crate::scalar::pair(self.g[(i, j)])).collect())
            .collect();
        json!({
            "rows": self.rows.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "cols": self.cols.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "gram": g,
        })
    }
}

fn distinct(labels: &[BasisLabel]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for l in labels {
        if !out.contains(&l.sigma0) {
            out.push(l.sigma0);
        }
    }
    out
}

/// `a+bi` / `a-bi` with 15 significant digits.
pub fn format_complex<T: Real>(z: Cx<T>) -> String {
    let re = crate::scalar::round_sig(z.re.to_f64_lossy(), 15);
    let im = crate::scalar::round_sig(z.im.to_f64_lossy(), 15);
    if im < 0.0 || (im == 0.0 && im.is_sign_negative()) {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

/// One conjugate-pair block in a nondegeneracy check.
#[derive(Debug, Clone)]
pub struct BlockDeterminant {
    pub row_point: (f64, f64),
    pub col_point: (f64, f64),
    pub tau: usize,
    pub abs_det: f64,
}

#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    pub ok: bool,
    pub blocks: Vec<BlockDeterminant>,
}

/// `|det|` after row normalization on every conjugate-pair block; with
/// `per_point = false` the full matrix is checked as well.
pub fn nondegeneracy_check<T: Real>(g: &PairingGram<T>, per_point: bool, tol: &Tolerances) -> NondegeneracyReport {
    let mut blocks = Vec::new();
    let mut ok = true;
    for z in g.row_points() {
        for w in g.col_points() {
            let zc: Cx<T> = crate::scalar::cx(z.0, z.1);
            let wc: Cx<T> = crate::scalar::cx(w.0, w.1);
            if conjugate_shift(zc, wc, tol) != Some(0) {
                continue;
            }
            let b = g.block(z, w);
            let det = if b.nrows() == b.ncols() {
                cabs(linalg::determinant(&linalg::row_normalize(&b))).to_f64_lossy()
            } else {
                0.0
            };
            ok &= det > tol.det;
            blocks.push(BlockDeterminant { row_point: z, col_point: w, tau: 0, abs_det: det });
        }
    }
    if !per_point {
        let det = if g.g.nrows() == g.g.ncols() {
            if g.g.nrows() == 0 {
                1.0
            } else {
                cabs(linalg::determinant(&linalg::row_normalize(&g.g))).to_f64_lossy()
            }
        } else {
            0.0
        };
        ok &= det > tol.det;
    }
    NondegeneracyReport { ok, blocks }
}
