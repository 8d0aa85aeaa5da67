//! Mellin side of scalar models in `f64`: the cut-off `omega`, the function
//! `Phi`, germs and full transforms of model functions, weighted inner
//! products, and the Green-identity evaluation of the adjoint pairing in
//! `x`-space.
//!
//! Everything is written in the variable `t = log x`, where `x D_x` becomes
//! `D = -i d/dt` and `x^{i p} (log x)^k` becomes `e^{i p t} t^k`.

use crate::config::Tolerances;
use crate::error::{ConeError, Result};
use crate::model::{ConeModel, Placement};
use crate::pairing::Meromorphic;
use crate::series::{LaurentGerm, Series};
use crate::spectrum::SpectralPoint;
use crate::MatrixPolynomial;
use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

const I: C = C::new(0.0, 1.0);

/// Truncated Taylor series `sum c_k h^k` used for forward-mode derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(x: f64, n: usize) -> Self {
        let mut v = vec![0.0; n];
        v[0] = x;
        Jet(v)
    }

    pub fn variable(x: f64, n: usize) -> Self {
        let mut j = Jet::constant(x, n);
        if n > 1 {
            j.0[1] = 1.0;
        }
        j
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn affine(&self, scale: f64, shift: f64) -> Jet {
        let mut v: Vec<f64> = self.0.iter().map(|a| a * scale).collect();
        v[0] += shift;
        Jet(v)
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.len();
        Jet((0..n).map(|k| (0..=k).map(|j| self.0[j] * o.0[k - j]).sum()).collect())
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| o.0[j] * c[k - j]).sum();
            c[k] = (self.0[k] - s) / o.0[0];
        }
        Jet(c)
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.0[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet(b)
    }

    /// The `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.0[k] * (1..=k).map(|i| i as f64).product::<f64>()
    }
}

/// Smooth cut-off `omega`: 1 on `(0, x_lo]`, 0 on `[x_hi, inf)`, built from `e^{-1/s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile { x_lo: 0.25, x_hi: 0.75 }
    }
}

impl CutoffProfile {
    pub fn new(x_lo: f64, x_hi: f64) -> Result<Self> {
        if !(0.0 < x_lo && x_lo < x_hi && x_hi < 1.0) {
            return Err(ConeError::InvalidModel(format!("cutoff needs 0 < x_lo < x_hi < 1, got ({x_lo}, {x_hi})")));
        }
        Ok(CutoffProfile { x_lo, x_hi })
    }

    pub fn t_lo(&self) -> f64 {
        self.x_lo.ln()
    }

    pub fn t_hi(&self) -> f64 {
        self.x_hi.ln()
    }

    /// Taylor jet of the smooth step `h(s) / (h(s) + h(1 - s))` at `s`.
    fn step_jet(s: &Jet) -> Jet {
        let n = s.len();
        let x = s.0[0];
        if x <= 0.002 {
            return Jet::constant(0.0, n);
        }
        if x >= 0.998 {
            return Jet::constant(1.0, n);
        }
        let one = Jet::constant(1.0, n);
        let h = |u: &Jet| one.div(u).affine(-1.0, 0.0).exp();
        let a = h(s);
        let b = h(&s.affine(-1.0, 1.0));
        a.div(&a.add(&b))
    }

    /// `omega(x)`.
    pub fn omega(&self, x: f64) -> f64 {
        let s = (x - self.x_lo) / (self.x_hi - self.x_lo);
        1.0 - Self::step_jet(&Jet::constant(s, 1)).0[0]
    }

    /// Jet of `W(t) = omega(e^t)` with `n` Taylor terms.
    pub fn w_jet(&self, t: f64, n: usize) -> Jet {
        let x = Jet::variable(t, n).exp();
        let s = x.affine(1.0 / (self.x_hi - self.x_lo), -self.x_lo / (self.x_hi - self.x_lo));
        Self::step_jet(&s).affine(-1.0, 1.0)
    }

    /// `W'(t)`, memoized per thread since the quadrature nodes recur across `sigma`.
    fn w_prime_cached(&self, t: f64) -> f64 {
        thread_local! {
            static CACHE: RefCell<HashMap<(u64, u64, u64), f64>> = RefCell::new(HashMap::new());
        }
        let key = (self.x_lo.to_bits(), self.x_hi.to_bits(), t.to_bits());
        CACHE.with(|c| {
            if let Some(&v) = c.borrow().get(&key) {
                return v;
            }
            let v = self.w_derivative(t, 1);
            let mut c = c.borrow_mut();
            if c.len() > 1 << 20 {
                c.clear();
            }
            c.insert(key, v);
            v
        })
    }

    /// `W^{(k)}(t)`.
    pub fn w_derivative(&self, t: f64, k: usize) -> f64 {
        self.w_jet(t, k + 1).derivative(k)
    }
}

fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(std::num::NonZeroUsize::new(20).expect("nonzero")))
        .as_node_weight_pairs()
}

fn gl_panel(f: &dyn Fn(f64) -> Vec<C>, a: f64, b: f64, n: usize) -> Vec<C> {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = vec![C::new(0.0, 0.0); n];
    for &(x, w) in gl_rule() {
        let v = f(m + h * x);
        for (s, y) in acc.iter_mut().zip(v) {
            *s += y * (w * h);
        }
    }
    acc
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Adaptive composite Gauss–Legendre for vector-valued integrands.
pub fn integrate(f: &dyn Fn(f64) -> Vec<C>, a: f64, b: f64, n: usize, rel: f64) -> Result<Vec<C>> {
    // Start from a uniform panel split so narrow features are resolved.
    let panels = 16;
    let h = (b - a) / panels as f64;
    let mut work: Vec<(f64, f64, Vec<C>, usize)> =
        (0..panels).map(|k| (a + k as f64 * h, a + (k + 1) as f64 * h)).map(|(x, y)| (x, y, gl_panel(f, x, y, n), 0)).collect();
    let scale = {
        let mut tot = vec![C::new(0.0, 0.0); n];
        for (_, _, v, _) in &work {
            for (s, y) in tot.iter_mut().zip(v) {
                *s += y;
            }
        }
        max_abs(&tot).max(1e-300)
    };
    let mut tot = vec![C::new(0.0, 0.0); n];
    let mut err_sum = 0.0;
    while let Some((x, y, coarse, depth)) = work.pop() {
        let m = 0.5 * (x + y);
        let l = gl_panel(f, x, m, n);
        let r = gl_panel(f, m, y, n);
        let fine: Vec<C> = l.iter().zip(&r).map(|(p, q)| p + q).collect();
        let err = max_diff(&fine, &coarse);
        let budget = rel * scale * (y - x) / (b - a);
        if err <= budget.max(1e-15 * scale * (y - x) / (b - a)) || depth >= 40 {
            if depth >= 40 && err > budget {
                err_sum += err;
            }
            for (s, v) in tot.iter_mut().zip(&fine) {
                *s += v;
            }
        } else {
            work.push((x, m, l, depth + 1));
            work.push((m, y, r, depth + 1));
        }
    }
    if err_sum > rel * scale * 10.0 {
        return Err(ConeError::QuadratureFailure { estimate: err_sum });
    }
    Ok(tot)
}

/// `Phi^{(j)}(sigma) = -i \int (-i t)^j e^{-i sigma t} W'(t) dt` for `j = 0..=k`.
pub fn phi_derivatives(profile: &CutoffProfile, sigma: C, k: usize, rel: f64) -> Result<Vec<C>> {
    let f = |t: f64| {
        let w1 = profile.w_prime_cached(t);
        let e = (-I * sigma * t).exp() * w1 * (-I);
        let mut out = Vec::with_capacity(k + 1);
        let mut p = C::new(1.0, 0.0);
        for _ in 0..=k {
            out.push(e * p);
            p *= -I * t;
        }
        out
    };
    integrate(&f, profile.t_lo(), profile.t_hi(), k + 1, rel)
}

/// `Phi(sigma) = \int x^{-i sigma} D_x omega(x) dx`.
pub fn phi(profile: &CutoffProfile, sigma: C, rel: f64) -> Result<C> {
    Ok(phi_derivatives(profile, sigma, 0, rel)?[0])
}

/// Taylor coefficients `Phi_n`, `n < count`, at `center` via a Cauchy integral.
pub fn phi_taylor(profile: &CutoffProfile, center: C, count: usize, radius: f64, nodes: usize, rel: f64) -> Result<Vec<C>> {
    let mut vals = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let th = 2.0 * PI * k as f64 / nodes as f64;
        vals.push((th, phi(profile, center + C::from_polar(radius, th), rel)?));
    }
    Ok((0..count)
        .map(|n| {
            let s: C = vals.iter().map(|&(th, v)| v * C::from_polar(1.0, -(n as f64) * th)).sum();
            s / (nodes as f64 * radius.powi(n as i32))
        })
        .collect())
}

/// One term `c * omega * x^{i p} (log x)^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfTerm {
    pub c: C,
    pub p: C,
    pub k: usize,
}

/// A finite sum of terms `c * omega(x) * x^{i p} (log x)^k` for one cut-off.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFunction {
    pub terms: Vec<MfTerm>,
    pub cutoff: CutoffProfile,
}

impl ModelFunction {
    pub fn new(terms: Vec<MfTerm>, cutoff: CutoffProfile) -> Self {
        ModelFunction { terms, cutoff }
    }

    /// `c * omega * x^{i p} (log x)^k`.
    pub fn monomial(c: C, p: C, k: usize, cutoff: CutoffProfile) -> Self {
        ModelFunction { terms: vec![MfTerm { c, p, k }], cutoff }
    }

    pub fn scale(&self, s: C) -> Self {
        let terms = self.terms.iter().map(|t| MfTerm { c: t.c * s, ..*t }).collect();
        ModelFunction { terms, cutoff: self.cutoff }
    }

    pub fn add(&self, o: &ModelFunction) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().copied());
        ModelFunction { terms, cutoff: self.cutoff }
    }

    /// The function whose Mellin principal part is the given scalar germ:
    /// `pp(M[omega x^{i p} log^k]) = i (-i)^k k! (sigma - p)^{-k-1}`.
    pub fn from_principal_part(g: &LaurentGerm<f64>, cutoff: CutoffProfile) -> Self {
        let pp = g.principal();
        let mut terms = Vec::new();
        for n in 1..=(-pp.low).max(0) {
            let a = pp.at(-n)[0];
            let k = (n - 1) as usize;
            let norm = I * (-I).powu(k as u32) * factorial(k);
            if a != C::new(0.0, 0.0) {
                terms.push(MfTerm { c: a / norm, p: g.center, k });
            }
        }
        ModelFunction { terms, cutoff }
    }

    /// The Mellin transform as a function of `sigma`.
    pub fn transform(&self) -> MellinTransform {
        MellinTransform { u: self.clone(), rel: 1e-12 }
    }

    /// Distinct exponents `p`.
    pub fn exponents(&self) -> Vec<C> {
        let mut out: Vec<C> = Vec::new();
        for t in &self.terms {
            if !out.iter().any(|q| (q - t.p).norm() <= 1e-12 * t.p.norm().max(1.0)) {
                out.push(t.p);
            }
        }
        out
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `u_hat(sigma) = sum c i^k d^k/d lambda^k [Phi(lambda)/lambda]` at `lambda = sigma - p`.
#[derive(Debug, Clone)]
pub struct MellinTransform {
    pub u: ModelFunction,
    pub rel: f64,
}

impl MellinTransform {
    pub fn value(&self, sigma: C) -> Result<C> {
        let mut acc = C::new(0.0, 0.0);
        for t in &self.u.terms {
            let lam = sigma - t.p;
            let phis = phi_derivatives(&self.u.cutoff, lam, t.k, self.rel)?;
            let mut d = C::new(0.0, 0.0);
            for (j, ph) in phis.iter().enumerate() {
                let r = t.k - j;
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                d += binom(t.k, j) * ph * sign * factorial(r) / lam.powu(r as u32 + 1);
            }
            acc += t.c * I.powu(t.k as u32) * d;
        }
        Ok(acc)
    }
}

impl Meromorphic<f64> for MellinTransform {
    fn eval_at(&self, sigma: C) -> DVector<C> {
        DVector::from_element(1, self.value(sigma).unwrap_or(C::new(f64::NAN, f64::NAN)))
    }
}

/// Laurent germ of the Mellin transform at `sigma0`: closed-form principal
/// part plus `tail` Taylor coefficients computed by a Cauchy integral.
pub fn mellin_germ(u: &ModelFunction, sigma0: C, tail: usize, tol: &Tolerances) -> Result<LaurentGerm<f64>> {
    let near = |p: C| (p - sigma0).norm() <= tol.coincide * 1e3 * sigma0.norm().max(1.0);
    let mut order = 0usize;
    for t in &u.terms {
        if near(t.p) {
            order = order.max(t.k + 1);
        }
    }
    let mut coeffs = vec![C::new(0.0, 0.0); order];
    for t in &u.terms {
        if near(t.p) {
            // i (-i)^k k! (sigma - sigma0)^{-k-1}
            coeffs[order - t.k - 1] += t.c * I * (-I).powu(t.k as u32) * factorial(t.k);
        }
    }
    let mut all: Vec<DVector<C>> = coeffs.into_iter().map(|c| DVector::from_element(1, c)).collect();
    if tail > 0 {
        let others: Vec<C> = u.exponents().into_iter().filter(|&p| !near(p)).collect();
        let mut r: f64 = 0.5;
        for p in others {
            r = r.min(0.5 * (p - sigma0).norm());
        }
        let pp: Series<f64, C> = Series::new(sigma0, -(order as i32), all.iter().map(|v| v[0]).collect(), true, C::new(0.0, 0.0));
        let mt = u.transform();
        let nodes = 128;
        let mut vals = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let th = 2.0 * PI * k as f64 / nodes as f64;
            let s = sigma0 + C::from_polar(r, th);
            vals.push((th, mt.value(s)? - pp.eval(s)));
        }
        for n in 0..tail {
            let s: C = vals.iter().map(|&(th, v)| v * C::from_polar(1.0, -(n as f64) * th)).sum();
            all.push(DVector::from_element(1, s / (nodes as f64 * r.powi(n as i32))));
        }
    }
    Ok(Series::new(sigma0, -(order as i32), all, tail == 0, DVector::zeros(1)))
}

/// One `x`-space term `c * W^{(w)}(t) * e^{alpha t} * t^m` for a given cut-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XTerm {
    pub c: C,
    pub w: usize,
    pub alpha: C,
    pub m: usize,
}

/// A function of `t = log x` as a sum of [`XTerm`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct XFunction {
    pub terms: Vec<XTerm>,
    pub cutoff: CutoffProfile,
}

impl XFunction {
    pub fn from_model(u: &ModelFunction) -> Self {
        let terms = u.terms.iter().map(|t| XTerm { c: t.c, w: 0, alpha: I * t.p, m: t.k }).collect();
        XFunction { terms, cutoff: u.cutoff }
    }

    fn shift_exponent(&mut self, by: f64) {
        for t in self.terms.iter_mut() {
            t.alpha += by;
        }
    }

    /// Applies `Q(D)`, `D = -i d/dt`, exactly via the Leibniz rule
    /// `Q(D)(W G) = sum_r (D^r W) Q^{(r)}(D) G / r!` and
    /// `Q(D) e^{i s t} t^m = e^{i s t} sum_j Q^{(j)}(s)/j! (-i)^j m!/(m-j)! t^{m-j}`.
    fn apply_poly(&self, q: &[C]) -> XFunction {
        let deg = q.len().saturating_sub(1);
        let derivs = poly_derivatives(q);
        let mut out = Vec::new();
        for t in &self.terms {
            let s = -I * t.alpha;
            for r in 0..=deg {
                let dr = &derivs[r];
                let wr = (-I).powu(r as u32) / factorial(r);
                let inner_derivs = poly_derivatives(dr);
                for j in 0..=t.m.min(deg.saturating_sub(r)) {
                    let qj = eval_poly(&inner_derivs[j], s) / factorial(j);
                    let c = t.c * wr * qj * (-I).powu(j as u32) * (factorial(t.m) / factorial(t.m - j));
                    if c != C::new(0.0, 0.0) {
                        out.push(XTerm { c, w: t.w + r, alpha: t.alpha, m: t.m - j });
                    }
                }
            }
        }
        XFunction { terms: out, cutoff: self.cutoff }
    }

    /// Merges like terms and drops coefficients below `rel` times the largest.
    fn simplified(&self, rel: f64) -> XFunction {
        let mut out: Vec<XTerm> = Vec::new();
        for t in &self.terms {
            match out.iter_mut().find(|o| o.w == t.w && o.m == t.m && (o.alpha - t.alpha).norm() <= 1e-13 * t.alpha.norm().max(1.0)) {
                Some(o) => o.c += t.c,
                None => out.push(*t),
            }
        }
        let scale = out.iter().map(|t| t.c.norm()).fold(0.0, f64::max);
        out.retain(|t| t.c.norm() > rel * scale.max(1e-300));
        XFunction { terms: out, cutoff: self.cutoff }
    }

    fn add(&self, o: &XFunction) -> XFunction {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().copied());
        XFunction { terms, cutoff: self.cutoff }
    }
}

fn eval_poly(q: &[C], s: C) -> C {
    q.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// `[Q, Q', Q'', ...]` as coefficient lists.
fn poly_derivatives(q: &[C]) -> Vec<Vec<C>> {
    let mut out = vec![q.to_vec()];
    for _ in 1..q.len().max(1) {
        let last = out.last().cloned().unwrap_or_default();
        let d: Vec<C> = last.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect();
        out.push(d);
    }
    out.push(Vec::new());
    out
}

fn scalar_coeffs(p: &MatrixPolynomial<f64>) -> Vec<C> {
    p.coeffs().iter().map(|a| a[(0, 0)]).collect()
}

/// `A u` for a scalar model `A = x^{-nu} sum_k P_k(x D_x) x^k` (or its
/// left-placed form `x^{-nu} sum_k x^k P_k(x D_x)`).
pub fn apply_model(model: &ConeModel<f64>, u: &XFunction) -> Result<XFunction> {
    if model.dim() != 1 {
        return Err(ConeError::NotScalar(model.dim()));
    }
    let mut acc = XFunction { terms: Vec::new(), cutoff: u.cutoff };
    for (k, pk) in model.indicial().iter().enumerate() {
        let q = scalar_coeffs(pk);
        if q.iter().all(|c| *c == C::new(0.0, 0.0)) {
            continue;
        }
        let piece = match model.placement() {
            Placement::Right => {
                let mut v = u.clone();
                v.shift_exponent(k as f64);
                v.apply_poly(&q)
            }
            Placement::Left => {
                let mut v = u.apply_poly(&q);
                v.shift_exponent(k as f64);
                v
            }
        };
        acc = acc.add(&piece);
    }
    acc.shift_exponent(-model.nu());
    Ok(acc.simplified(1e-11))
}

/// `\int_{-inf}^a t^m e^{lambda t} dt` for `Re lambda > 0`.
fn tail_integral(m: usize, lambda: C, a: f64) -> C {
    let mut s = C::new(0.0, 0.0);
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * (factorial(m) / factorial(m - j)) * a.powi((m - j) as i32) / lambda.powu(j as u32 + 1);
    }
    (lambda * a).exp() * s
}

/// `(f, g) = \int f conj(g) e^{nu t} dt`, i.e. `\int_0^1 f conj(g) x^{nu - 1} dx`.
pub fn weighted_inner_x(f: &XFunction, g: &XFunction, nu: f64, rel: f64) -> Result<C> {
    let a = f.cutoff.t_lo().min(g.cutoff.t_lo());
    let b = f.cutoff.t_hi().max(g.cutoff.t_hi());
    let mut total = C::new(0.0, 0.0);
    // Region where both cut-offs are identically 1: only w = 0 terms survive.
    for s in f.terms.iter().filter(|t| t.w == 0) {
        for r in g.terms.iter().filter(|t| t.w == 0) {
            let lambda = s.alpha + r.alpha.conj() + nu;
            if lambda.re <= 0.0 {
                return Err(ConeError::Divergent { exponent: format!("{lambda}") });
            }
            total += s.c * r.c.conj() * tail_integral(s.m + r.m, lambda, a);
        }
    }
    let wmax = f.terms.iter().chain(&g.terms).map(|t| t.w).max().unwrap_or(0);
    let integrand = |t: f64| {
        let jf = f.cutoff.w_jet(t, wmax + 1);
        let jg = g.cutoff.w_jet(t, wmax + 1);
        let fv: C = f.terms.iter().map(|x| x.c * jf.derivative(x.w) * (x.alpha * t).exp() * t.powi(x.m as i32)).sum();
        let gv: C = g.terms.iter().map(|x| x.c * jg.derivative(x.w) * (x.alpha * t).exp() * t.powi(x.m as i32)).sum();
        vec![fv * gv.conj() * (nu * t).exp()]
    };
    total += integrate(&integrand, a, b, 1, rel)?[0];
    Ok(total)
}

/// Weighted inner product of model functions.
pub fn weighted_inner(u: &ModelFunction, v: &ModelFunction, nu: f64) -> Result<C> {
    weighted_inner_x(&XFunction::from_model(u), &XFunction::from_model(v), nu, 1e-10)
}

/// `[u, v]_A = (A u, v) - (u, A^* v)` evaluated in `x`-space.
pub fn green_pairing_direct(model: &ConeModel<f64>, u: &ModelFunction, v: &ModelFunction) -> Result<C> {
    green_pairing_with(model, u, v, &Tolerances::default())
}

pub fn green_pairing_with(model: &ConeModel<f64>, u: &ModelFunction, v: &ModelFunction, tol: &Tolerances) -> Result<C> {
    if model.dim() != 1 {
        return Err(ConeError::NotScalar(model.dim()));
    }
    let nu = model.nu();
    let xu = XFunction::from_model(u);
    let xv = XFunction::from_model(v);
    let au = apply_model(model, &xu)?;
    let asv = apply_model(&model.formal_adjoint(), &xv)?;
    let a = weighted_inner_x(&au, &xv, nu, tol.quad_rel)?;
    let b = weighted_inner_x(&xu, &asv, nu, tol.quad_rel)?;
    Ok(a - b)
}

/// Model functions whose principal parts are the basis elements at one point
/// (the `x`-space realization of the raw chain basis for a scalar model).
pub fn basis_functions(elements: &[crate::extension::ExtendedBasisElement<f64>], cutoff: CutoffProfile) -> Vec<ModelFunction> {
    elements
        .iter()
        .map(|e| {
            let mut f = ModelFunction::new(Vec::new(), cutoff);
            for p in &e.parts {
                f = f.add(&ModelFunction::from_principal_part(p, cutoff));
            }
            f
        })
        .collect()
}

/// Coordinates of a scalar model function in a global basis, from the
/// principal parts of its Mellin transform.
pub fn coordinates_in(
    u: &ModelFunction,
    basis: &crate::extension::GlobalBasis<f64>,
    tol: &Tolerances,
) -> Result<Vec<C>> {
    let mut out = Vec::with_capacity(basis.dim());
    for pb in &basis.points {
        let g = mellin_germ(u, pb.sigma0, 0, tol)?;
        let c = crate::chains::reduce_germ(&g, &pb.chains, tol)?;
        for e in &pb.elements {
            out.push(c.coords[e.j][e.l]);
        }
    }
    Ok(out)
}

/// Spectral point helper for scalar models in tests and reports.
pub fn scalar_points(model: &ConeModel<f64>, tol: &Tolerances) -> Result<Vec<SpectralPoint<f64>>> {
    Ok(crate::extension::strip_spectrum(model, tol)?.sigma)
}

/// A basis of `E(A)` given by explicit model functions, with the matrix
/// whose columns are their coordinates in the raw chain basis.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub names: Vec<String>,
    pub functions: Vec<ModelFunction>,
    pub matrix: DMatrix<C>,
}

impl Dictionary {
    pub fn new(
        names: Vec<String>,
        functions: Vec<ModelFunction>,
        basis: &crate::extension::GlobalBasis<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = basis.dim();
        if functions.len() != n || names.len() != n {
            return Err(ConeError::DimensionMismatch(format!(
                "dictionary has {} functions for a basis of dimension {n}",
                functions.len()
            )));
        }
        let mut matrix = DMatrix::zeros(n, n);
        for (k, f) in functions.iter().enumerate() {
            for (r, c) in coordinates_in(f, basis, tol)?.into_iter().enumerate() {
                matrix[(r, k)] = c;
            }
        }
        if n > 0 && crate::linalg::rank(&matrix, tol.rank) < n {
            return Err(ConeError::DimensionMismatch("dictionary functions do not span E(A)".into()));
        }
        Ok(Dictionary { names, functions, matrix })
    }

    /// `omega x^{i p} (i log x)^k` for `k < mult` at every point, in basis
    /// order. Only meaningful when no basis element carries shifted parts.
    pub fn standard(basis: &crate::extension::GlobalBasis<f64>, cutoff: CutoffProfile, tol: &Tolerances) -> Result<Self> {
        if basis.points.iter().any(|pb| pb.n_shift > 0 && pb.elements.iter().any(|e| e.parts.len() > 1)) {
            return Err(ConeError::InvalidModel("standard dictionary needs basis elements without shifted parts".into()));
        }
        let mut names = Vec::new();
        let mut functions = Vec::new();
        for pb in &basis.points {
            let mult: usize = pb.chains.mults.iter().sum();
            for k in 0..mult {
                let c = I.powu(k as u32);
                functions.push(ModelFunction::monomial(c, pb.sigma0, k, cutoff));
                names.push(monomial_name(pb.sigma0, k));
            }
        }
        Dictionary::new(names, functions, basis, tol)
    }

    /// Raw coordinates of `sum_k c_k f_k`.
    pub fn to_raw(&self, c: &[C]) -> Vec<C> {
        (&self.matrix * DVector::from_column_slice(c)).iter().copied().collect()
    }

    /// Dictionary coordinates of a raw vector.
    pub fn from_raw(&self, raw: &[C]) -> Option<Vec<C>> {
        let inv = crate::linalg::inverse(&self.matrix)?;
        Some((inv * DVector::from_column_slice(raw)).iter().copied().collect())
    }

    /// The raw domain spanned by dictionary vectors.
    pub fn domain(&self, labels: Vec<crate::extension::BasisLabel>, vecs: &[Vec<C>]) -> crate::extension::DomainSubspace<f64> {
        let raw: Vec<Vec<C>> = vecs.iter().map(|v| self.to_raw(v)).collect();
        crate::extension::DomainSubspace::from_vectors(labels, &raw)
    }

    /// Gram matrix `[f_a, f_b]` from the raw Gram (same dictionary on both sides).
    pub fn gram(&self, g: &crate::pairing::PairingGram<f64>) -> DMatrix<C> {
        g.change_basis(&self.matrix, &self.matrix)
    }
}

fn monomial_name(p: C, k: usize) -> String {
    let mut s = String::from("omega");
    if p.norm() > 1e-14 {
        s.push_str(&format!(" x^(i*({}))", crate::pairing::format_complex(p)));
    }
    match k {
        0 => {}
        1 => s.push_str(" (i log x)"),
        _ => s.push_str(&format!(" (i log x)^{k}")),
    }
    s
}
