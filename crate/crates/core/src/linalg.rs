//! Dense linear-algebra helpers on top of nalgebra's SVD and LU.

use crate::scalar::{cabs, czero, CMat, CVec, Real};
use nalgebra::DMatrix;

/// Full SVD `a = u * diag(s) * v^H` with square `u` (m×m) and `v` (n×n).
/// Singular values are sorted descending; missing ones are zero.
pub struct FullSvd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

pub fn full_svd<T: Real>(a: &CMat<T>) -> FullSvd<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return FullSvd { u: CMat::identity(m, m), s: vec![], v: CMat::identity(n, n) };
    }
    // nalgebra loses accuracy on zero-padded inputs with repeated singular
    // values, so take the thin SVD of the tall orientation and complete it.
    if m >= n {
        let svd = a.clone().svd(true, true);
        let s: Vec<T> = svd.singular_values.iter().copied().collect();
        let u = complete(svd.u.expect("u requested"));
        FullSvd { u, s, v: svd.v_t.expect("v requested").adjoint() }
    } else {
        let svd = a.adjoint().svd(true, true);
        let s: Vec<T> = svd.singular_values.iter().copied().collect();
        let v = complete(svd.u.expect("u requested"));
        FullSvd { u: svd.v_t.expect("v requested").adjoint(), s, v }
    }
}

/// Extends orthonormal columns to a square unitary matrix.
fn complete<T: Real>(q: CMat<T>) -> CMat<T> {
    let (n, r) = q.shape();
    let mut out = CMat::<T>::zeros(n, n);
    out.columns_mut(0, r).copy_from(&q);
    for filled in r..n {
        // Project every unit vector and keep the one with the largest remainder.
        let mut best: Option<(T, CVec<T>)> = None;
        for e in 0..n {
            let mut v = CVec::<T>::zeros(n);
            v[e] = nalgebra::Complex::new(T::one(), T::zero());
            for _ in 0..2 {
                for j in 0..filled {
                    let c = out.column(j).dotc(&v);
                    v -= out.column(j) * c;
                }
            }
            let nv = v.norm();
            if best.as_ref().is_none_or(|(b, _)| nv > *b) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("n > 0");
        out.set_column(filled, &(v / nalgebra::Complex::new(nv, T::zero())));
    }
    out
}

/// Numerical rank with threshold `rel * s_max` (absolute floor `rel` when `a` is tiny).
pub fn rank<T: Real>(a: &CMat<T>, rel: T) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let s = a.clone().singular_values();
    let smax = s.iter().fold(T::zero(), |m, &x| if x > m { x } else { m });
    let thr = rel * smax;
    s.iter().filter(|&&x| x > thr && x > T::zero()).count()
}

/// Orthonormal basis of the null space of `a` (columns), threshold `rel * s_max`.
pub fn null_space<T: Real>(a: &CMat<T>, rel: T) -> CMat<T> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    let f = full_svd(a);
    let smax = f.s.first().copied().unwrap_or(T::zero());
    let thr = rel * smax;
    let r = f.s.iter().filter(|&&x| x > thr && x > T::zero()).count();
    f.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column span of `a`.
pub fn range_basis<T: Real>(a: &CMat<T>, rel: T) -> CMat<T> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return CMat::zeros(m, 0);
    }
    let f = full_svd(a);
    let smax = f.s.first().copied().unwrap_or(T::zero());
    let thr = rel * smax;
    let r = f.s.iter().filter(|&&x| x > thr && x > T::zero()).count();
    f.u.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b` with relative cutoff `rel`.
pub fn lstsq<T: Real>(a: &CMat<T>, b: &CMat<T>, rel: T) -> CMat<T> {
    let (m, n) = a.shape();
    if n == 0 {
        return CMat::zeros(0, b.ncols());
    }
    if m == 0 {
        return CMat::zeros(n, b.ncols());
    }
    let f = full_svd(a);
    let smax = f.s.first().copied().unwrap_or(T::zero());
    let thr = rel * smax;
    let uhb = f.u.adjoint() * b;
    let mut y = CMat::<T>::zeros(n, b.ncols());
    for (i, &si) in f.s.iter().enumerate() {
        if si > thr && si > T::zero() && i < n {
            for c in 0..b.ncols() {
                y[(i, c)] = uhb[(i, c)] / nalgebra::Complex::new(si, T::zero());
            }
        }
    }
    f.v * y
}

/// 2-norm condition number (infinite for singular matrices).
pub fn cond<T: Real>(a: &CMat<T>) -> T {
    if a.nrows() == 0 {
        return T::one();
    }
    let s = a.clone().singular_values();
    let smax = s.iter().fold(T::zero(), |m, &x| if x > m { x } else { m });
    let smin = s.iter().fold(smax, |m, &x| if x < m { x } else { m });
    if smin <= T::zero() {
        T::max_value().unwrap_or(smax / T::min_value().unwrap_or(T::one()))
    } else {
        smax / smin
    }
}

pub fn inverse<T: Real>(a: &CMat<T>) -> Option<CMat<T>> {
    if a.nrows() == 0 {
        return Some(CMat::zeros(0, 0));
    }
    a.clone().lu().try_inverse()
}

pub fn determinant<T: Real>(a: &CMat<T>) -> crate::Cx<T> {
    if a.nrows() == 0 {
        return nalgebra::Complex::new(T::one(), T::zero());
    }
    a.clone().lu().determinant()
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |m, &z| {
        let v = cabs(z);
        if v > m {
            v
        } else {
            m
        }
    })
}

/// Sine of the largest principal angle between the column spans of two
/// orthonormal bases of equal dimension; `None` when dimensions differ.
pub fn max_principal_sine<T: Real>(qa: &CMat<T>, qb: &CMat<T>) -> Option<T> {
    if qa.ncols() != qb.ncols() || qa.nrows() != qb.nrows() {
        return None;
    }
    if qa.ncols() == 0 {
        return Some(T::zero());
    }
    let proj = qa - qb * (qb.adjoint() * qa);
    let s = proj.singular_values();
    Some(s.iter().fold(T::zero(), |m, &x| if x > m { x } else { m }))
}

/// Scales every row of `a` to unit 2-norm (zero rows stay zero).
pub fn row_normalize<T: Real>(a: &CMat<T>) -> CMat<T> {
    let mut out = a.clone();
    for i in 0..a.nrows() {
        let n = a.row(i).norm();
        if n > T::zero() {
            for j in 0..a.ncols() {
                out[(i, j)] = a[(i, j)] / nalgebra::Complex::new(n, T::zero());
            }
        }
    }
    out
}

/// Stacks column vectors into a matrix with `rows` rows.
pub fn hstack<T: Real>(rows: usize, cols: &[CVec<T>]) -> CMat<T> {
    let mut m = CMat::<T>::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Multiplies a vector so its largest-modulus entry is real and positive.
pub fn phase_fix<T: Real>(v: &CVec<T>) -> crate::Cx<T> {
    let mut best = czero::<T>();
    let mut bm = T::zero();
    for &z in v.iter() {
        // Strict improvement by a relative margin keeps the choice stable
        // under round-off between nearly equal entries.
        if cabs(z) > bm * (T::one() + T::lit(1e-9)) {
            bm = cabs(z);
            best = z;
        }
    }
    if bm == T::zero() {
        return nalgebra::Complex::new(T::one(), T::zero());
    }
    best.conj() / nalgebra::Complex::new(bm, T::zero())
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    DMatrix::identity(n, n)
}
