//! Local theory at one spectral point: kernel/range splitting, the Schur
//! complement family, singular chains with their partial multiplicities, and
//! reduction of germs to chain coordinates.

use crate::config::Tolerances;
use crate::error::{point, ConeError, Result};
use crate::linalg;
use crate::pairing::iota;
use crate::polynomial::MatrixPolynomial;
use crate::scalar::{cabs, czero, CMat, CVec, Cx, Real};
use crate::series::{
    left_mul, mat_inverse, mat_mat, mat_star, mat_vec, matrix_germ_from_poly, right_mul, scalar_inverse,
    scalar_sqrt, scalar_vec, LaurentGerm, MatrixGerm, ScalarGerm, Series,
};

/// Orthonormal bases from the SVD `P(sigma0) = U S V^H`.
#[derive(Debug, Clone)]
pub struct KernelRangeSplit<T: Real> {
    /// `K = ker P(sigma0)` (columns of `V` for zero singular values).
    pub kernel: CMat<T>,
    /// `R^perp` (columns of `U` for zero singular values).
    pub corange: CMat<T>,
    /// `K^perp`.
    pub kernel_perp: CMat<T>,
    /// `R = rg P(sigma0)`.
    pub range: CMat<T>,
    pub singular_values: Vec<T>,
}

impl<T: Real> KernelRangeSplit<T> {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    /// The split of the adjoint symbol at the conjugate point.
    pub fn swapped(&self) -> Self {
        KernelRangeSplit {
            kernel: self.corange.clone(),
            corange: self.kernel.clone(),
            kernel_perp: self.range.clone(),
            range: self.kernel_perp.clone(),
            singular_values: self.singular_values.clone(),
        }
    }
}

/// Magnitude of `P` near `sigma0`, used to make rank thresholds relative.
pub fn local_scale<T: Real>(p: &MatrixPolynomial<T>, sigma0: Cx<T>) -> T {
    let r = crate::scalar::scale_of(sigma0);
    let mut acc = T::zero();
    let mut pw = T::one();
    for a in p.coeffs() {
        acc += a.norm() * pw;
        pw *= r;
    }
    if acc > T::zero() {
        acc
    } else {
        T::one()
    }
}

pub fn kernel_range_split<T: Real>(
    p: &MatrixPolynomial<T>,
    sigma0: Cx<T>,
    tol: &Tolerances,
) -> Result<KernelRangeSplit<T>> {
    let m = p.eval(sigma0);
    let d = p.dim();
    let f = linalg::full_svd(&m);
    let thr = T::lit(tol.rank) * local_scale(p, sigma0);
    let r = f.s.iter().filter(|&&s| s > thr).count();
    if r == d {
        return Err(ConeError::NotSpectral(point(sigma0)));
    }
    Ok(KernelRangeSplit {
        kernel: f.v.columns(r, d - r).into_owned(),
        corange: f.u.columns(r, d - r).into_owned(),
        kernel_perp: f.v.columns(0, r).into_owned(),
        range: f.u.columns(0, r).into_owned(),
        singular_values: f.s,
    })
}

/// Block data of the decomposition along `K + K^perp -> R^perp + R`.
#[derive(Debug, Clone)]
pub struct SchurFamily<T: Real> {
    pub split: KernelRangeSplit<T>,
    /// The Schur complement `P11 - P12 P22^{-1} P21 : K -> R^perp`.
    pub family: MatrixGerm<T>,
    pub p12: MatrixGerm<T>,
    pub p21: MatrixGerm<T>,
    pub p22_inv: MatrixGerm<T>,
}

impl<T: Real> SchurFamily<T> {
    /// The same data for `P^*` at the conjugate point.
    pub fn adjoint(&self) -> Self {
        SchurFamily {
            split: self.split.swapped(),
            family: mat_star(&self.family),
            p12: mat_star(&self.p21),
            p21: mat_star(&self.p12),
            p22_inv: mat_star(&self.p22_inv),
        }
    }

    /// Lifts a `K`-valued germ to the full space: `V0 u - V1 P22^{-1} P21 u`.
    pub fn lift(&self, u: &LaurentGerm<T>) -> LaurentGerm<T> {
        let a = crate::series::mat_const_vec(&self.split.kernel, u);
        let corr = mat_vec(&mat_mat(&self.p22_inv, &self.p21), u);
        let b = crate::series::mat_const_vec(&self.split.kernel_perp, &corr);
        a.sub(&b)
    }
}

/// Taylor coefficients of the Schur complement family to order `order`.
pub fn schur_family<T: Real>(
    p: &MatrixPolynomial<T>,
    sigma0: Cx<T>,
    order: usize,
    tol: &Tolerances,
) -> Result<SchurFamily<T>> {
    let split = kernel_range_split(p, sigma0, tol)?;
    let full = matrix_germ_from_poly(p, sigma0).truncated(order as i32 + 1);
    let (u0, u1, v0, v1) = (&split.corange, &split.range, &split.kernel, &split.kernel_perp);
    let block = |l: &CMat<T>, r: &CMat<T>| right_mul(&left_mul(&l.adjoint(), &full), r);
    let p11 = block(u0, v0);
    let p12 = block(u0, v1);
    let p21 = block(u1, v0);
    let p22 = block(u1, v1);
    let c = linalg::cond(&p22.at(0));
    if c.to_f64_lossy() > tol.max_cond {
        return Err(ConeError::BlockNotInvertible { cond: c.to_f64_lossy() });
    }
    let p22_inv = mat_inverse(&p22, order + 1).ok_or(ConeError::BlockNotInvertible { cond: f64::INFINITY })?;
    let corr = mat_mat(&mat_mat(&p12, &p22_inv), &p21);
    let family = p11.sub(&corr).truncated(order as i32 + 1);
    Ok(SchurFamily { split, family, p12, p21, p22_inv })
}

/// Partial multiplicities from ranks of block Toeplitz matrices:
/// `#{j : mu_j >= k} = dim ker T_{k-1} - dim ker T_{k-2}`.
pub fn toeplitz_multiplicities<T: Real>(taylor: &[CMat<T>], scale: T, rel: T, max_len: usize) -> Vec<usize> {
    let d = taylor[0].nrows();
    let thr = rel * scale;
    let mut counts: Vec<usize> = Vec::new();
    let mut prev_ker = 0usize;
    for k in 0..max_len {
        let n = (k + 1) * d;
        let mut t = CMat::<T>::zeros(n, n);
        for r in 0..=k {
            for c in 0..=r {
                if let Some(a) = taylor.get(r - c) {
                    t.view_mut((r * d, c * d), (d, d)).copy_from(a);
                }
            }
        }
        let s = t.singular_values();
        let rank = s.iter().filter(|&&x| x > thr).count();
        let ker = n - rank;
        let c = ker.saturating_sub(prev_ker);
        let c = match counts.last() {
            Some(&last) => c.min(last),
            None => c,
        };
        if c == 0 {
            break;
        }
        counts.push(c);
        prev_ker = ker;
    }
    let mut mults = Vec::new();
    for (m, &c) in counts.iter().enumerate() {
        let next = counts.get(m + 1).copied().unwrap_or(0);
        for _ in 0..c.saturating_sub(next) {
            mults.push(m + 1);
        }
    }
    mults.sort_unstable_by(|a, b| b.cmp(a));
    mults
}

/// Partial multiplicities of a matrix polynomial at a point by the rank test.
pub fn rank_multiplicities<T: Real>(p: &MatrixPolynomial<T>, sigma0: Cx<T>, tol: &Tolerances) -> Vec<usize> {
    let taylor = p.taylor_at(sigma0);
    let bound = p.dim() * p.degree() + 1;
    toeplitz_multiplicities(&taylor, local_scale(p, sigma0), T::lit(tol.rank), bound)
}

/// Solves `P x = f` for a holomorphic matrix germ `P` with `det P` vanishing
/// to finite order, where `mu` bounds the pole order of `P^{-1}`.
/// Returns `x` with coefficients up to (excluding) `want_end` or as far as
/// the data allow.
pub fn laurent_solve<T: Real>(
    p: &MatrixGerm<T>,
    f: &LaurentGerm<T>,
    mu: usize,
    want_end: i32,
    tol: &Tolerances,
) -> Result<LaurentGerm<T>> {
    let n = p.zero_coef().ncols();
    let f = f.trimmed(T::zero());
    if f.exact && f.coeffs.is_empty() {
        return Ok(Series::zero(p.center, CVec::zeros(n)));
    }
    let lx = f.low - mu as i32;
    let mu_i = mu as i32;
    // Blocks needed: (want_end - lx) + mu; bounded by the known data.
    let mut k_blocks = (want_end - lx) + mu_i;
    if let Some(pf) = f.prec() {
        k_blocks = k_blocks.min(pf - lx);
    }
    if let Some(pp) = p.prec() {
        k_blocks = k_blocks.min(pp);
    }
    let end = lx + k_blocks - mu_i;
    if end <= lx {
        return Err(ConeError::TruncationTooShort { order: want_end.max(0) as usize });
    }
    if mu == 0 {
        let lu = p.at(0).lu();
        let mut xs: Vec<CVec<T>> = Vec::new();
        for e in lx..end {
            let mut rhs = f.at(e);
            for (k, x) in xs.iter().enumerate().rev() {
                let order = (e - lx) - k as i32;
                rhs -= p.at(order) * x;
            }
            let x = lu.solve(&rhs).ok_or(ConeError::NotSpectral(point(p.center)))?;
            xs.push(x);
        }
        return Ok(Series::new(p.center, lx, xs, false, CVec::zeros(n)));
    }
    let kb = k_blocks as usize;
    // Rescale sigma - sigma0 = rho * s so the Taylor coefficients stay O(1);
    // the Toeplitz system is badly scaled otherwise when other roots are near.
    let norms: Vec<T> = (0..kb).map(|n| p.at(n as i32).norm()).collect();
    let s_ref = norms.iter().take(mu + 1).fold(T::zero(), |m, &x| if x > m { x } else { m });
    let mut rho = T::one();
    if s_ref > T::zero() {
        for (n, &pn) in norms.iter().enumerate().skip(1) {
            if pn > T::zero() {
                let r = (s_ref / pn).powf(T::one() / T::lit(n as f64));
                if r < rho {
                    rho = r;
                }
            }
        }
    }
    let rpow = |e: i32| Cx::new(rho.powi(e), T::zero());
    let rows = f.zero_coef().len();
    let mut t = CMat::<T>::zeros(kb * rows, kb * n);
    let mut rhs = CMat::<T>::zeros(kb * rows, 1);
    for r in 0..kb {
        for c in 0..=r {
            let a = p.at((r - c) as i32) * rpow((r - c) as i32);
            t.view_mut((r * rows, c * n), (rows, n)).copy_from(&a);
        }
        let e = lx + r as i32;
        let fr = f.at(e) * rpow(e);
        rhs.view_mut((r * rows, 0), (rows, 1)).copy_from(&fr);
    }
    let x = linalg::lstsq(&t, &rhs, T::lit(tol.rank) * T::lit(1e-2));
    let resid = (&t * &x - &rhs).norm();
    let fscale = rhs.norm().max(T::lit(1e-300));
    if resid > T::lit(tol.res) * fscale * T::lit(1e3) {
        return Err(ConeError::NotInSpan { residual: (resid / fscale).to_f64_lossy() });
    }
    let keep = (end - lx) as usize;
    let xs: Vec<CVec<T>> = (0..keep)
        .map(|b| x.view((b * n, 0), (n, 1)).column(0).into_owned() * rpow(-(lx + b as i32)))
        .collect();
    Ok(Series::new(p.center, lx, xs, false, CVec::zeros(n)))
}

/// A singular chain together with the data that transforms along with it.
#[derive(Debug, Clone)]
struct ChainData<T: Real> {
    /// `K`-valued germ (coordinates in the kernel basis).
    psi: LaurentGerm<T>,
    /// `beta = family * psi`, holomorphic, `R^perp` coordinates.
    beta: LaurentGerm<T>,
    mu: usize,
}

impl<T: Real> ChainData<T> {
    fn lead(&self) -> CVec<T> {
        self.psi.at(-(self.mu as i32))
    }

    /// `self - coeff * (sigma - sigma0)^shift * other`.
    fn axpy(&mut self, other: &ChainData<T>, coeff: &ScalarGerm<T>, shift: i32) {
        self.psi = self.psi.sub(&scalar_vec(coeff, &other.psi).mul_pow(shift));
        self.beta = self.beta.sub(&scalar_vec(coeff, &other.beta).mul_pow(shift));
    }

    fn scale(&mut self, c: Cx<T>) {
        self.psi = self.psi.scale(c);
        self.beta = self.beta.scale(c);
    }

    fn times(&mut self, g: &ScalarGerm<T>) {
        self.psi = scalar_vec(g, &self.psi);
        self.beta = scalar_vec(g, &self.beta);
    }
}

/// Singular chains `psi_j` at one point with partial multiplicities `mu_j`.
#[derive(Debug, Clone)]
pub struct SingularChainBasis<T: Real> {
    pub sigma0: Cx<T>,
    /// Full-space chains, nonincreasing pole order; principal part plus tail.
    pub chains: Vec<LaurentGerm<T>>,
    pub mults: Vec<usize>,
    pub kernel_basis: CMat<T>,
    pub corange_basis: CMat<T>,
    /// `beta_j = family * psi_j` in `R^perp` coordinates.
    pub betas: Vec<LaurentGerm<T>>,
    /// Chains in kernel coordinates.
    pub reduced: Vec<LaurentGerm<T>>,
    pub truncation: usize,
    pub schur: SchurFamily<T>,
}

impl<T: Real> SingularChainBasis<T> {
    pub fn algebraic_mult(&self) -> usize {
        self.mults.iter().sum()
    }

    /// Principal part of `(sigma - sigma0)^l psi_j`.
    pub fn element(&self, j: usize, l: usize) -> LaurentGerm<T> {
        self.chains[j].mul_pow(l as i32).principal()
    }

    /// Leading coefficients `psi_{j0}` in the full space.
    pub fn leading(&self) -> Vec<CVec<T>> {
        self.chains.iter().zip(&self.mults).map(|(c, &m)| c.at(-(m as i32))).collect()
    }

    fn from_data(schur: SchurFamily<T>, sigma0: Cx<T>, data: Vec<ChainData<T>>, truncation: usize) -> Self {
        let prec = truncation as i32 + 1;
        let chains = data.iter().map(|c| schur.lift(&c.psi).truncated(prec).with_center(sigma0)).collect();
        SingularChainBasis {
            sigma0,
            mults: data.iter().map(|c| c.mu).collect(),
            kernel_basis: schur.split.kernel.clone(),
            corange_basis: schur.split.corange.clone(),
            betas: data.iter().map(|c| c.beta.truncated(prec).with_center(sigma0)).collect(),
            reduced: data.iter().map(|c| c.psi.truncated(prec).with_center(sigma0)).collect(),
            chains,
            truncation,
            schur,
        }
    }

    fn data(&self) -> Vec<ChainData<T>> {
        self.reduced
            .iter()
            .zip(&self.betas)
            .zip(&self.mults)
            .map(|((p, b), &mu)| ChainData { psi: p.clone(), beta: b.clone(), mu })
            .collect()
    }

    /// Chains of `P^*` at the conjugate point dual to these ones:
    /// `psi*_j = (sigma - conj sigma0)^{-mu_j} btilde_j` with
    /// `iota(beta_i, btilde_j) = delta_ij`.
    pub fn dual(&self) -> Result<SingularChainBasis<T>> {
        let n = self.mults.len();
        let center = self.sigma0.conj();
        let prec = self.betas.iter().filter_map(|b| b.prec()).min().unwrap_or(self.truncation as i32 + 1);
        let mut bcoef = Vec::new();
        for k in 0..prec {
            let mut m = CMat::<T>::zeros(n, n);
            for (j, b) in self.betas.iter().enumerate() {
                m.set_column(j, &b.at(k));
            }
            bcoef.push(m);
        }
        let bgerm = Series::new(self.sigma0, 0, bcoef, false, CMat::zeros(n, n));
        let cinv = mat_inverse(&bgerm, prec as usize).ok_or(ConeError::DegeneratePairing { expected: n, found: 0 })?;
        let schur = self.schur.adjoint();
        let mut data = Vec::with_capacity(n);
        for j in 0..n {
            let coeffs: Vec<CVec<T>> = cinv.coeffs.iter().map(|c| c.row(j).transpose().map(|z| z.conj())).collect();
            let bt = Series::new(center, 0, coeffs, false, CVec::zeros(n));
            let psi = bt.mul_pow(-(self.mults[j] as i32));
            let beta = mat_vec(&schur.family, &psi);
            data.push(ChainData { psi, beta, mu: self.mults[j] });
        }
        Ok(SingularChainBasis::from_data(schur, center, data, self.truncation))
    }
}

fn trim_chain<T: Real>(c: &mut ChainData<T>, rel: T) {
    let scale = c.psi.max_norm().max(T::lit(1e-300));
    let trimmed = c.psi.trimmed(rel * scale);
    let mu = if trimmed.low < 0 { (-trimmed.low) as usize } else { 0 };
    c.psi = trimmed;
    c.mu = mu;
}

/// Default truncation order `max(a, 2 ceil(nu) + 2)`.
pub fn default_truncation(algebraic_mult: usize, n_terms: usize) -> usize {
    algebraic_mult.max(2 * n_terms + 2)
}

/// Singular chains at `sigma0`, doubling the truncation order when needed.
pub fn singular_chains<T: Real>(
    p: &MatrixPolynomial<T>,
    sigma0: Cx<T>,
    truncation: usize,
    tol: &Tolerances,
) -> Result<SingularChainBasis<T>> {
    let mut l = truncation.max(1);
    loop {
        match singular_chains_at(p, sigma0, l, tol) {
            Err(ConeError::TruncationTooShort { .. }) if l < tol.max_truncation => {
                l = (2 * l).min(tol.max_truncation);
            }
            other => return other,
        }
    }
}

/// Singular chains at a fixed truncation order.
pub fn singular_chains_at<T: Real>(
    p: &MatrixPolynomial<T>,
    sigma0: Cx<T>,
    truncation: usize,
    tol: &Tolerances,
) -> Result<SingularChainBasis<T>> {
    let split = kernel_range_split(p, sigma0, tol)?;
    let dk = split.kernel_dim();
    let rank_mults = rank_multiplicities(p, sigma0, tol);
    let a: usize = rank_mults.iter().sum();
    let mu1 = rank_mults.first().copied().unwrap_or(1).max(1);
    if rank_mults.len() != dk {
        return Err(ConeError::MultiplicityMismatch { rank: rank_mults, elimination: vec![1; dk] });
    }
    if mu1 > truncation.max(1) || a > 4 * truncation.max(1) {
        return Err(ConeError::TruncationTooShort { order: truncation });
    }
    let internal = truncation + 3 * mu1 + a + 4;
    let schur = schur_family(p, sigma0, internal, tol)?;
    let want_end = (truncation + a + 2) as i32;
    let lead_tol = T::lit(tol.lead);

    // Columns of the inverse family.
    let mut data = Vec::with_capacity(dk);
    for j in 0..dk {
        let mut e = CVec::<T>::zeros(dk);
        e[j] = crate::scalar::cone();
        let rhs = Series::constant(sigma0, e.clone());
        let psi = laurent_solve(&schur.family, &rhs, mu1, want_end, tol)?;
        let mut c = ChainData { psi, beta: rhs, mu: 0 };
        trim_chain(&mut c, T::lit(tol.res));
        data.push(c);
    }

    // Elimination until leading coefficients are independent.
    let mut guard = 0usize;
    'outer: loop {
        guard += 1;
        if guard > 64 * dk * mu1.max(1) + 64 {
            return Err(ConeError::MultiplicityMismatch {
                rank: rank_mults,
                elimination: data.iter().map(|c| c.mu).collect(),
            });
        }
        let mut order: Vec<usize> = (0..dk).collect();
        order.sort_by(|&x, &y| data[y].mu.cmp(&data[x].mu).then(x.cmp(&y)));
        let mut accepted: Vec<usize> = Vec::new();
        let mut q: Vec<CVec<T>> = Vec::new();
        let mut idx = 0;
        while idx < order.len() {
            let level = data[order[idx]].mu;
            let mut group: Vec<usize> = order[idx..].iter().copied().take_while(|&k| data[k].mu == level).collect();
            idx += group.len();
            while !group.is_empty() {
                // Largest residual first.
                let mut best = 0;
                let mut best_r = -T::one();
                let mut best_rel = T::zero();
                for (gi, &k) in group.iter().enumerate() {
                    let c = data[k].lead();
                    let mut r = c.clone();
                    for qi in &q {
                        let proj = qi.dotc(&r);
                        r -= qi * proj;
                    }
                    let rn = r.norm();
                    if rn > best_r {
                        best_r = rn;
                        best = gi;
                        best_rel = rn / c.norm().max(T::lit(1e-300));
                    }
                }
                let k = group.remove(best);
                if best_rel <= lead_tol || level == 0 {
                    // Dependent: cancel the leading coefficient with higher chains.
                    if accepted.is_empty() || level == 0 {
                        return Err(ConeError::MultiplicityMismatch {
                            rank: rank_mults,
                            elimination: data.iter().map(|c| c.mu).collect(),
                        });
                    }
                    let mut a_mat = CMat::<T>::zeros(dk, accepted.len());
                    for (col, &j) in accepted.iter().enumerate() {
                        a_mat.set_column(col, &data[j].lead());
                    }
                    let rhs = CMat::from_column_slice(dk, 1, data[k].lead().as_slice());
                    let alpha = linalg::lstsq(&a_mat, &rhs, T::lit(1e-12));
                    let mut target = data[k].clone();
                    for (col, &j) in accepted.iter().enumerate() {
                        let shift = data[j].mu as i32 - target.mu as i32;
                        let coeff = Series::constant(sigma0, alpha[(col, 0)]);
                        target.axpy(&data[j], &coeff, shift);
                    }
                    trim_chain(&mut target, T::lit(tol.res));
                    data[k] = target;
                    continue 'outer;
                }
                let c = data[k].lead();
                let mut r = c.clone();
                for _ in 0..2 {
                    for qi in &q {
                        let proj = qi.dotc(&r);
                        r -= qi * proj;
                    }
                }
                let rn = r.norm();
                q.push(r / Cx::new(rn, T::zero()));
                accepted.push(k);
            }
        }
        break;
    }

    data.sort_by_key(|x| std::cmp::Reverse(x.mu));
    let elim: Vec<usize> = data.iter().map(|c| c.mu).collect();
    if elim != rank_mults {
        return Err(ConeError::MultiplicityMismatch { rank: rank_mults, elimination: elim });
    }

    // Orthonormal leading coefficients, highest order first.
    for k in 0..dk {
        for j in 0..k {
            let a = dot_lead(&data[k], &data[j]);
            if cabs(a) > T::zero() {
                let shift = data[j].mu as i32 - data[k].mu as i32;
                let src = data[j].clone();
                data[k].axpy(&src, &Series::constant(sigma0, a), shift);
            }
        }
        let nrm = data[k].lead().norm();
        data[k].scale(Cx::new(T::one() / nrm, T::zero()));
    }

    // psi_{j,l} orthogonal to psi_{k,0} whenever mu_k >= mu_j - l, l > 0.
    for j in 0..dk {
        let mu_j = data[j].mu;
        for l in 1..mu_j {
            let n = (mu_j - l) as i32;
            let coef = data[j].psi.at(-n);
            let snapshot = data.clone();
            for (k, ck) in snapshot.iter().enumerate() {
                if ck.mu as i32 >= n {
                    let a = ck.lead().dotc(&coef);
                    if cabs(a) > T::zero() {
                        let shift = ck.mu as i32 - n;
                        data[j].axpy(&snapshot[k], &Series::constant(sigma0, a), shift);
                    }
                }
            }
        }
    }

    // Deterministic phases: the largest entry of each full leading coefficient is real positive.
    for c in data.iter_mut() {
        let full_lead = &schur.split.kernel * c.lead();
        let ph = linalg::phase_fix(&full_lead);
        c.scale(ph);
    }

    Ok(SingularChainBasis::from_data(schur, sigma0, data, truncation))
}

fn dot_lead<T: Real>(a: &ChainData<T>, b: &ChainData<T>) -> Cx<T> {
    b.lead().dotc(&a.lead())
}

/// Coordinates of a germ in the basis `(sigma - sigma0)^l psi_j` modulo holomorphic germs.
#[derive(Debug, Clone)]
pub struct GermCoordinates<T: Real> {
    /// `coords[j][l]` multiplies `(sigma - sigma0)^l psi_j`.
    pub coords: Vec<Vec<Cx<T>>>,
    /// Principal part left over after matching.
    pub residual: LaurentGerm<T>,
}

impl<T: Real> GermCoordinates<T> {
    pub fn flatten(&self) -> Vec<Cx<T>> {
        self.coords.iter().flatten().copied().collect()
    }

    pub fn residual_norm(&self) -> T {
        self.residual.max_norm()
    }
}

/// Matches principal-part coefficients from the deepest pole upward.
pub fn reduce_germ_unchecked<T: Real>(u: &LaurentGerm<T>, basis: &SingularChainBasis<T>) -> GermCoordinates<T> {
    let mut r = u.principal().with_center(basis.sigma0);
    let lead = basis.leading();
    let n_chains = basis.mults.len();
    let mut coords: Vec<Vec<Cx<T>>> = basis.mults.iter().map(|&m| vec![czero(); m]).collect();
    let deepest = (-r.low).max(basis.mults.first().copied().unwrap_or(0) as i32);
    let d = u.zero_coef().len();
    for n in (1..=deepest).rev() {
        let active: Vec<usize> = (0..n_chains).filter(|&j| basis.mults[j] as i32 >= n).collect();
        if active.is_empty() {
            continue;
        }
        let target = r.at(-n);
        let mut a = CMat::<T>::zeros(d, active.len());
        for (c, &j) in active.iter().enumerate() {
            a.set_column(c, &lead[j]);
        }
        let x = linalg::lstsq(&a, &CMat::from_column_slice(d, 1, target.as_slice()), T::lit(1e-12));
        for (c, &j) in active.iter().enumerate() {
            let l = basis.mults[j] - n as usize;
            let xc = x[(c, 0)];
            coords[j][l] = xc;
            let contrib = basis.chains[j].mul_pow(l as i32).principal().scale(xc);
            r = r.sub(&contrib).principal();
        }
    }
    GermCoordinates { coords, residual: r }
}

/// [`reduce_germ_unchecked`] with the span check.
pub fn reduce_germ<T: Real>(
    u: &LaurentGerm<T>,
    basis: &SingularChainBasis<T>,
    tol: &Tolerances,
) -> Result<GermCoordinates<T>> {
    if !crate::series::same_point(u.center, basis.sigma0, T::lit(tol.coincide) * T::lit(1e3)) {
        return Err(ConeError::BasePointMismatch { left: point(u.center), right: point(basis.sigma0) });
    }
    let g = reduce_germ_unchecked(u, basis);
    let scale = u.principal().max_norm().max(T::one());
    let res = g.residual_norm();
    if res > T::lit(tol.res) * scale {
        return Err(ConeError::NotInSpan { residual: res.to_f64_lossy() });
    }
    Ok(g)
}

/// Rebuilds the germ `sum_j p_j psi_j` (principal part) from coordinates.
pub fn combine_chains<T: Real>(coords: &[Vec<Cx<T>>], basis: &SingularChainBasis<T>) -> LaurentGerm<T> {
    let d = basis.kernel_basis.nrows();
    let mut acc = Series::zero(basis.sigma0, CVec::zeros(d));
    for (j, cj) in coords.iter().enumerate() {
        for (l, &c) in cj.iter().enumerate() {
            acc = acc.add(&basis.element(j, l).scale(c));
        }
    }
    acc
}

/// Normalizes chains at a real point so that the holomorphic germs
/// `b_j = (sigma - sigma0)^{mu_j} psi_j` satisfy `iota(b_i, b_j) = delta_ij`.
pub fn holomorphic_gram_schmidt<T: Real>(
    basis: &SingularChainBasis<T>,
    tol: &Tolerances,
) -> Result<SingularChainBasis<T>> {
    if basis.sigma0.im.abs().to_f64_lossy() > tol.edge {
        return Err(ConeError::NotRealPoint(point(basis.sigma0)));
    }
    let sigma0 = Cx::new(basis.sigma0.re, T::zero());
    let mut data = basis.data();
    for c in data.iter_mut() {
        c.psi = c.psi.with_center(sigma0);
        c.beta = c.beta.with_center(sigma0);
    }
    let terms = basis.truncation + 2;
    let hol = |c: &ChainData<T>| c.psi.mul_pow(c.mu as i32);
    for i in 0..data.len() {
        for k in 0..i {
            let bi = hol(&data[i]);
            let ek = hol(&data[k]);
            let c = iota(&bi, &ek)?;
            let shift = data[k].mu as i32 - data[i].mu as i32;
            let src = data[k].clone();
            data[i].axpy(&src, &c, shift);
        }
        let bi = hol(&data[i]);
        let h = iota(&bi, &bi)?;
        let g = scalar_sqrt(&h, terms);
        let ginv = scalar_inverse(&g, terms);
        data[i].times(&ginv);
    }
    Ok(SingularChainBasis::from_data(basis.schur.clone(), sigma0, data, basis.truncation))
}
