//! Matrix polynomials `P(sigma) = sum_k A_k sigma^k`.

use crate::error::{ConeError, Result};
use crate::linalg;
use crate::scalar::{cpowi, czero, iunit, CMat, Cx, Real};

/// A square matrix polynomial of dimension `dim`; `coeffs[k]` multiplies `sigma^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial<T: Real> {
    dim: usize,
    coeffs: Vec<CMat<T>>,
}

impl<T: Real> MatrixPolynomial<T> {
    pub fn new(coeffs: Vec<CMat<T>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(ConeError::InvalidModel("polynomial needs at least one coefficient".into()));
        };
        let dim = first.nrows();
        if dim == 0 {
            return Err(ConeError::InvalidModel("dimension must be positive".into()));
        }
        for (k, a) in coeffs.iter().enumerate() {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(ConeError::DimensionMismatch(format!(
                    "coefficient {k} is {}x{}, expected {dim}x{dim}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(MatrixPolynomial { dim, coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        MatrixPolynomial { dim, coeffs: vec![CMat::zeros(dim, dim)] }
    }

    /// Scalar (1×1) polynomial from its coefficients, lowest degree first.
    pub fn scalar(coeffs: &[Cx<T>]) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![CMat::zeros(1, 1)]
        } else {
            coeffs.iter().map(|&c| CMat::from_element(1, 1, c)).collect()
        };
        MatrixPolynomial { dim: 1, coeffs }
    }

    /// `diag(p_1, ..., p_d)` from scalar coefficient lists.
    pub fn diagonal(entries: &[Vec<Cx<T>>]) -> Self {
        let d = entries.len();
        let m = entries.iter().map(|e| e.len()).max().unwrap_or(1).max(1);
        let mut coeffs = vec![CMat::zeros(d, d); m];
        for (i, e) in entries.iter().enumerate() {
            for (k, &c) in e.iter().enumerate() {
                coeffs[k][(i, i)] = c;
            }
        }
        MatrixPolynomial { dim: d, coeffs }
    }

    /// Constant polynomial.
    pub fn constant(a: CMat<T>) -> Self {
        let dim = a.nrows();
        MatrixPolynomial { dim, coeffs: vec![a] }
    }

    /// `sigma * I - shift * I`-style linear polynomial `a0 + a1 sigma`.
    pub fn linear(a0: CMat<T>, a1: CMat<T>) -> Self {
        let dim = a0.nrows();
        MatrixPolynomial { dim, coeffs: vec![a0, a1] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nominal degree (length of the coefficient list minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMat<T>] {
        &self.coeffs
    }

    pub fn leading(&self) -> &CMat<T> {
        self.coeffs.last().expect("nonempty")
    }

    pub fn is_zero(&self, tol: T) -> bool {
        self.coeffs.iter().all(|a| linalg::max_abs(a) <= tol)
    }

    /// Drops trailing coefficients whose entries are all exactly zero.
    pub fn trimmed(&self) -> Self {
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().is_some_and(|a| a.iter().all(|z| *z == czero())) {
            c.pop();
        }
        MatrixPolynomial { dim: self.dim, coeffs: c }
    }

    /// Horner evaluation.
    pub fn eval(&self, sigma: Cx<T>) -> CMat<T> {
        let mut acc = self.leading().clone();
        for a in self.coeffs.iter().rev().skip(1) {
            acc = acc * sigma + a;
        }
        acc
    }

    /// Derivative polynomial.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.dim);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a * Cx::new(T::lit(k as f64), T::zero()))
            .collect();
        MatrixPolynomial { dim: self.dim, coeffs }
    }

    /// Coefficients of `P(center + s)` in powers of `s` (exact re-expansion).
    pub fn taylor_at(&self, center: Cx<T>) -> Vec<CMat<T>> {
        // Repeated synthetic division by (sigma - center).
        let mut a = self.coeffs.clone();
        let n = a.len();
        for k in 0..n {
            for i in (k..n - 1).rev() {
                let next = a[i + 1].clone() * center;
                a[i] += next;
            }
        }
        a
    }

    /// `Q(sigma) = P(sigma + h)`.
    pub fn shifted(&self, h: Cx<T>) -> Self {
        MatrixPolynomial { dim: self.dim, coeffs: self.taylor_at(h) }
    }

    /// `sigma -> P(conj sigma)^H`: conjugate-transposed coefficients.
    pub fn star(&self) -> Self {
        MatrixPolynomial { dim: self.dim, coeffs: self.coeffs.iter().map(|a| a.adjoint()).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                let mut a = CMat::zeros(self.dim, self.dim);
                if let Some(x) = self.coeffs.get(k) {
                    a += x;
                }
                if let Some(y) = other.coeffs.get(k) {
                    a += y;
                }
                a
            })
            .collect();
        MatrixPolynomial { dim: self.dim, coeffs }
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        MatrixPolynomial { dim: self.dim, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![CMat::zeros(self.dim, other.dim); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        MatrixPolynomial { dim: self.dim, coeffs }
    }

    /// `E * P * F` for constant matrices.
    pub fn sandwich(&self, e: &CMat<T>, f: &CMat<T>) -> Self {
        MatrixPolynomial { dim: self.dim, coeffs: self.coeffs.iter().map(|a| e * a * f).collect() }
    }

    /// Largest coefficient-entry deviation from `other`, padding with zeros.
    pub fn distance(&self, other: &Self) -> T {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut worst = T::zero();
        for k in 0..n {
            let z = CMat::zeros(self.dim, self.dim);
            let a = self.coeffs.get(k).unwrap_or(&z);
            let b = other.coeffs.get(k).unwrap_or(&z);
            let d = linalg::max_abs(&(a - b));
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// Number of zeros of `det P` inside the circle, by the argument principle
    /// `(1/2 pi i) \oint tr(P^{-1} P') d sigma` with the trapezoid rule.
    pub fn det_winding(&self, center: Cx<T>, radius: T, nodes: usize) -> Result<i64> {
        let dp = self.derivative();
        let mut acc = czero::<T>();
        let two_pi = T::two_pi();
        for k in 0..nodes {
            let th = two_pi * T::lit(k as f64) / T::lit(nodes as f64);
            let e = Cx::new(th.cos(), th.sin());
            let s = center + e * radius;
            let p = self.eval(s);
            let inv = linalg::inverse(&p).ok_or(ConeError::ContourTouchesSpectrum {
                center: crate::error::point(center),
                radius: radius.to_f64_lossy(),
                point: crate::error::point(s),
            })?;
            let tr = (inv * dp.eval(s)).trace();
            // d sigma = i r e^{i theta} d theta; the 1/(2 pi i) cancels the i.
            acc += tr * e * radius;
        }
        let w = acc / Cx::new(T::lit(nodes as f64), T::zero());
        Ok(w.re.round().to_i64().unwrap_or(0))
    }

    /// Naive power-sum evaluation, used as an oracle for Horner.
    pub fn eval_naive(&self, sigma: Cx<T>) -> CMat<T> {
        let mut acc = CMat::zeros(self.dim, self.dim);
        for (k, a) in self.coeffs.iter().enumerate() {
            acc += a * cpowi(sigma, k as i32);
        }
        acc
    }

    /// Multiplies by the scalar polynomial `(sigma - s0)^k` coefficientwise.
    pub fn times_power(&self, s0: Cx<T>, k: usize) -> Self {
        let mut p = self.clone();
        let lin = MatrixPolynomial {
            dim: self.dim,
            coeffs: vec![CMat::identity(self.dim, self.dim) * (-s0), CMat::identity(self.dim, self.dim)],
        };
        for _ in 0..k {
            p = p.mul(&lin);
        }
        p
    }

    /// Entrywise maximum coefficient modulus.
    pub fn coefficient_scale(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, a| {
            let v = linalg::max_abs(a);
            if v > m {
                v
            } else {
                m
            }
        })
    }

    /// Shift of the argument by `i k`: `sigma -> P(sigma + i k)`.
    pub fn shifted_imag(&self, k: usize) -> Self {
        self.shifted(iunit::<T>() * T::lit(k as f64))
    }
}

/// Scalar polynomial value helper for 1×1 polynomials.
pub fn scalar_value<T: Real>(p: &MatrixPolynomial<T>, sigma: Cx<T>) -> Cx<T> {
    p.eval(sigma)[(0, 0)]
}

