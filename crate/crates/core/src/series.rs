//! Truncated Laurent series at a point, with scalar, vector or matrix coefficients.
//!
//! A series stores the coefficients of `(sigma - center)^n` for
//! `n = low .. low + coeffs.len()`. When `exact` is set the coefficients
//! beyond the stored range are zero; otherwise they are unknown and the
//! series is only valid up to `low + coeffs.len()` (its precision).

use crate::scalar::{cabs, cone, czero, CMat, CVec, Cx, Real};

/// Coefficient algebra needed by [`Series`].
pub trait Coef<T: Real>: Clone + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, c: Cx<T>) -> Self;
    fn magnitude(&self) -> T;
    fn conjugated(&self) -> Self;
}

impl<T: Real> Coef<T> for Cx<T> {
    fn zero_like(&self) -> Self {
        czero()
    }
    fn plus(&self, o: &Self) -> Self {
        *self + *o
    }
    fn minus(&self, o: &Self) -> Self {
        *self - *o
    }
    fn times(&self, c: Cx<T>) -> Self {
        *self * c
    }
    fn magnitude(&self) -> T {
        cabs(*self)
    }
    fn conjugated(&self) -> Self {
        self.conj()
    }
}

impl<T: Real> Coef<T> for CVec<T> {
    fn zero_like(&self) -> Self {
        CVec::zeros(self.len())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, c: Cx<T>) -> Self {
        self * c
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
    fn conjugated(&self) -> Self {
        self.map(|z| z.conj())
    }
}

impl<T: Real> Coef<T> for CMat<T> {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, c: Cx<T>) -> Self {
        self * c
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
    fn conjugated(&self) -> Self {
        self.map(|z| z.conj())
    }
}

#[derive(Debug, Clone)]
pub struct Series<T: Real, C: Coef<T>> {
    pub center: Cx<T>,
    pub low: i32,
    pub coeffs: Vec<C>,
    pub exact: bool,
    zero: C,
}

/// Vector-valued Laurent germ.
pub type LaurentGerm<T> = Series<T, CVec<T>>;
/// Scalar Laurent germ.
pub type ScalarGerm<T> = Series<T, Cx<T>>;
/// Matrix-valued Laurent germ.
pub type MatrixGerm<T> = Series<T, CMat<T>>;

impl<T: Real, C: Coef<T>> Series<T, C> {
    pub fn new(center: Cx<T>, low: i32, coeffs: Vec<C>, exact: bool, zero: C) -> Self {
        Series { center, low, coeffs, exact, zero: zero.zero_like() }
    }

    /// The zero germ (exact).
    pub fn zero(center: Cx<T>, zero: C) -> Self {
        Series { center, low: 0, coeffs: Vec::new(), exact: true, zero: zero.zero_like() }
    }

    /// Exact constant germ.
    pub fn constant(center: Cx<T>, c: C) -> Self {
        let zero = c.zero_like();
        Series { center, low: 0, coeffs: vec![c], exact: true, zero }
    }

    pub fn zero_coef(&self) -> C {
        self.zero.clone()
    }

    /// First exponent whose coefficient is unknown (`None` when exact).
    pub fn prec(&self) -> Option<i32> {
        if self.exact {
            None
        } else {
            Some(self.low + self.coeffs.len() as i32)
        }
    }

    /// One past the highest stored exponent.
    pub fn end(&self) -> i32 {
        self.low + self.coeffs.len() as i32
    }

    /// Coefficient of `(sigma - center)^n`, `None` if unknown.
    pub fn get(&self, n: i32) -> Option<C> {
        if n < self.low {
            return Some(self.zero.clone());
        }
        let idx = (n - self.low) as usize;
        if idx < self.coeffs.len() {
            Some(self.coeffs[idx].clone())
        } else if self.exact {
            Some(self.zero.clone())
        } else {
            None
        }
    }

    /// Coefficient of `(sigma - center)^n`; panics when unknown.
    pub fn at(&self, n: i32) -> C {
        self.get(n).unwrap_or_else(|| panic!("coefficient {n} beyond precision {:?}", self.prec()))
    }

    /// Lowest exponent with a coefficient above `tol`, if any among the known ones.
    pub fn valuation(&self, tol: T) -> Option<i32> {
        self.coeffs.iter().position(|c| c.magnitude() > tol).map(|i| self.low + i as i32)
    }

    /// Pole order `max(0, -valuation)`.
    pub fn pole_order(&self, tol: T) -> usize {
        match self.valuation(tol) {
            Some(v) if v < 0 => (-v) as usize,
            _ => 0,
        }
    }

    /// Removes negligible leading coefficients so `low` is the valuation.
    pub fn trimmed(&self, tol: T) -> Self {
        let mut out = self.clone();
        let skip = out.coeffs.iter().take_while(|c| c.magnitude() <= tol).count();
        if skip == out.coeffs.len() && out.exact {
            return Self::zero(self.center, self.zero.clone());
        }
        out.coeffs.drain(0..skip);
        out.low += skip as i32;
        out
    }

    /// Sets coefficients below `tol` at exponent `n < bound` to exact zero.
    pub fn clear_below(&self, bound: i32, tol: T) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if self.low + (i as i32) < bound && c.magnitude() <= tol {
                *c = self.zero.clone();
            }
        }
        out
    }

    /// The principal part (exponents `< 0`), exact.
    pub fn principal(&self) -> Self {
        let hi = self.end().min(0);
        let coeffs: Vec<C> = (self.low..hi).map(|n| self.at(n)).collect();
        Series { center: self.center, low: self.low.min(hi), coeffs, exact: true, zero: self.zero.clone() }
    }

    /// The regular part (exponents `>= 0`).
    pub fn regular(&self) -> Self {
        let lo = self.low.max(0);
        let coeffs: Vec<C> = (lo..self.end()).map(|n| self.at(n)).collect();
        Series { center: self.center, low: lo, coeffs, exact: self.exact, zero: self.zero.clone() }
    }

    /// Drops everything from exponent `prec` on (inexact result).
    pub fn truncated(&self, prec: i32) -> Self {
        if let Some(p) = self.prec() {
            if p <= prec {
                return self.clone();
            }
        }
        let lo = self.low.min(prec);
        let coeffs: Vec<C> = (lo..prec).map(|n| self.get(n).expect("within precision")).collect();
        Series { center: self.center, low: lo, coeffs, exact: false, zero: self.zero.clone() }
    }

    /// Same germ viewed as exact (the caller asserts nothing follows).
    pub fn as_exact(&self) -> Self {
        let mut s = self.clone();
        s.exact = true;
        s
    }

    fn combine(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        let low = self.low.min(other.low);
        let (end, exact) = match (self.prec(), other.prec()) {
            (None, None) => (self.end().max(other.end()), true),
            (Some(p), None) | (None, Some(p)) => (p, false),
            (Some(p), Some(q)) => (p.min(q), false),
        };
        let end = end.max(low);
        let coeffs = (low..end).map(|n| f(&self.at(n), &other.at(n))).collect();
        Series { center: self.center, low, coeffs, exact, zero: self.zero.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.plus(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.minus(b))
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        let mut s = self.clone();
        for x in s.coeffs.iter_mut() {
            *x = x.times(c);
        }
        s
    }

    /// Multiplication by `(sigma - center)^k`.
    pub fn mul_pow(&self, k: i32) -> Self {
        let mut s = self.clone();
        s.low += k;
        s
    }

    /// `Theta(f)(sigma) = conj(f(conj sigma))`: conjugated coefficients at the conjugate point.
    pub fn theta(&self) -> Self {
        Series {
            center: self.center.conj(),
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| c.conjugated()).collect(),
            exact: self.exact,
            zero: self.zero.clone(),
        }
    }

    /// `g(sigma) = f(sigma + h)`: same coefficients around `center - h`.
    pub fn argument_shift(&self, h: Cx<T>) -> Self {
        let mut s = self.clone();
        s.center -= h;
        s
    }

    /// Re-labels the center (used to snap numerically equal points).
    pub fn with_center(&self, c: Cx<T>) -> Self {
        let mut s = self.clone();
        s.center = c;
        s
    }

    /// Largest coefficient magnitude.
    pub fn max_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| {
            let v = c.magnitude();
            if v > m {
                v
            } else {
                m
            }
        })
    }

    /// Evaluates the stored terms at `sigma`.
    pub fn eval(&self, sigma: Cx<T>) -> C {
        let s = sigma - self.center;
        let mut acc = self.zero.clone();
        for c in self.coeffs.iter().rev() {
            acc = acc.times(s).plus(c);
        }
        let mut p = cone::<T>();
        let base = if self.low < 0 { cone::<T>() / s } else { s };
        for _ in 0..self.low.unsigned_abs() {
            p *= base;
        }
        acc.times(p)
    }
}

/// Cauchy product with a coefficient-level bilinear map.
pub fn product<T, A, B, C>(
    a: &Series<T, A>,
    b: &Series<T, B>,
    zero: C,
    f: impl Fn(&A, &B) -> C,
) -> Series<T, C>
where
    T: Real,
    A: Coef<T>,
    B: Coef<T>,
    C: Coef<T>,
{
    let low = a.low + b.low;
    if (a.exact && a.coeffs.is_empty()) || (b.exact && b.coeffs.is_empty()) {
        return Series::zero(a.center, zero);
    }
    let (end, exact) = match (a.prec(), b.prec()) {
        (None, None) => (a.end() + b.end() - 1, true),
        (None, Some(pb)) => (pb + a.low, false),
        (Some(pa), None) => (pa + b.low, false),
        (Some(pa), Some(pb)) => ((pa + b.low).min(pb + a.low), false),
    };
    let end = end.max(low);
    let mut coeffs = Vec::with_capacity((end - low) as usize);
    for n in low..end {
        let mut acc = zero.zero_like();
        for (i, ai) in a.coeffs.iter().enumerate() {
            let ea = a.low + i as i32;
            let eb = n - ea;
            if eb < b.low {
                break;
            }
            let bi = (eb - b.low) as usize;
            if bi < b.coeffs.len() {
                acc = acc.plus(&f(ai, &b.coeffs[bi]));
            }
        }
        coeffs.push(acc);
    }
    Series::new(a.center, low, coeffs, exact, zero)
}

/// Matrix germ from a polynomial re-expanded at `center` (exact).
pub fn matrix_germ_from_poly<T: Real>(p: &crate::MatrixPolynomial<T>, center: Cx<T>) -> MatrixGerm<T> {
    let d = p.dim();
    Series::new(center, 0, p.taylor_at(center), true, CMat::zeros(d, d))
}

/// `P * u` for a matrix germ and a vector germ.
pub fn mat_vec<T: Real>(p: &MatrixGerm<T>, u: &LaurentGerm<T>) -> LaurentGerm<T> {
    let rows = p.zero_coef().nrows();
    product(p, u, CVec::zeros(rows), |a, b| a * b)
}

/// `P * Q` for matrix germs.
pub fn mat_mat<T: Real>(p: &MatrixGerm<T>, q: &MatrixGerm<T>) -> MatrixGerm<T> {
    let z = CMat::zeros(p.zero_coef().nrows(), q.zero_coef().ncols());
    product(p, q, z, |a, b| a * b)
}

/// Constant matrix times a matrix germ.
pub fn left_mul<T: Real>(m: &CMat<T>, p: &MatrixGerm<T>) -> MatrixGerm<T> {
    let coeffs = p.coeffs.iter().map(|c| m * c).collect();
    Series::new(p.center, p.low, coeffs, p.exact, CMat::zeros(m.nrows(), p.zero_coef().ncols()))
}

/// Matrix germ times a constant matrix.
pub fn right_mul<T: Real>(p: &MatrixGerm<T>, m: &CMat<T>) -> MatrixGerm<T> {
    let coeffs = p.coeffs.iter().map(|c| c * m).collect();
    Series::new(p.center, p.low, coeffs, p.exact, CMat::zeros(p.zero_coef().nrows(), m.ncols()))
}

/// Constant matrix times a vector germ.
pub fn mat_const_vec<T: Real>(m: &CMat<T>, u: &LaurentGerm<T>) -> LaurentGerm<T> {
    let coeffs = u.coeffs.iter().map(|c| m * c).collect();
    Series::new(u.center, u.low, coeffs, u.exact, CVec::zeros(m.nrows()))
}

/// Scalar germ times vector germ.
pub fn scalar_vec<T: Real>(f: &ScalarGerm<T>, u: &LaurentGerm<T>) -> LaurentGerm<T> {
    product(f, u, u.zero_coef(), |a, b| b * *a)
}

/// Conjugate-transposed matrix germ coefficients at the conjugate point:
/// the germ of `sigma -> M(conj sigma)^H`.
pub fn mat_star<T: Real>(p: &MatrixGerm<T>) -> MatrixGerm<T> {
    let coeffs = p.coeffs.iter().map(|c| c.adjoint()).collect();
    let z = p.zero_coef();
    Series::new(p.center.conj(), p.low, coeffs, p.exact, CMat::zeros(z.ncols(), z.nrows()))
}

/// Inverse of a holomorphic matrix germ with invertible constant term, to
/// the germ's precision or to `order` terms when the germ is exact.
pub fn mat_inverse<T: Real>(p: &MatrixGerm<T>, order: usize) -> Option<MatrixGerm<T>> {
    if p.low != 0 {
        return None;
    }
    let n = p.zero_coef().nrows();
    let x0 = crate::linalg::inverse(&p.at(0))?;
    let terms = match p.prec() {
        Some(pr) => (pr as usize).min(order.max(1)),
        None => order.max(1),
    };
    let mut xs: Vec<CMat<T>> = vec![x0.clone()];
    for k in 1..terms {
        let mut acc = CMat::<T>::zeros(n, n);
        for j in 1..=k {
            acc += p.at(j as i32) * &xs[k - j];
        }
        xs.push(-(&x0 * acc));
    }
    Some(Series::new(p.center, 0, xs, false, CMat::zeros(n, n)))
}

/// Reciprocal of a scalar germ with nonzero leading coefficient at `low`.
pub fn scalar_inverse<T: Real>(f: &ScalarGerm<T>, terms: usize) -> ScalarGerm<T> {
    let a0 = f.coeffs[0];
    let inv0 = cone::<T>() / a0;
    let avail = match f.prec() {
        Some(p) => ((p - f.low) as usize).min(terms),
        None => terms,
    };
    let mut out = vec![inv0];
    for k in 1..avail {
        let mut acc = czero::<T>();
        for j in 1..=k {
            acc += f.get(f.low + j as i32).unwrap_or(czero()) * out[k - j];
        }
        out.push(-acc * inv0);
    }
    Series::new(f.center, -f.low, out, false, czero())
}

/// Square root of a holomorphic scalar germ with `f(center) != 0`
/// (principal branch for the constant term).
pub fn scalar_sqrt<T: Real>(f: &ScalarGerm<T>, terms: usize) -> ScalarGerm<T> {
    assert_eq!(f.low, 0, "square root needs a holomorphic germ");
    let avail = match f.prec() {
        Some(p) => (p as usize).min(terms),
        None => terms,
    };
    let g0 = crate::scalar::csqrt(f.coeffs[0]);
    let two = Cx::new(T::lit(2.0), T::zero());
    let mut g = vec![g0];
    for k in 1..avail {
        let mut acc = f.get(k as i32).unwrap_or(czero());
        for j in 1..k {
            acc -= g[j] * g[k - j];
        }
        g.push(acc / (two * g0));
    }
    Series::new(f.center, 0, g, false, czero())
}

/// Exact scalar polynomial germ `sum c_k (sigma - center)^k`.
pub fn scalar_poly<T: Real>(center: Cx<T>, coeffs: Vec<Cx<T>>) -> ScalarGerm<T> {
    Series::new(center, 0, coeffs, true, czero())
}

/// True when two points agree to `rel * max(1, |a|)`.
pub fn same_point<T: Real>(a: Cx<T>, b: Cx<T>, rel: T) -> bool {
    cabs(a - b) <= rel * crate::scalar::scale_of(a)
}
