//! Global extension theory on `E(A) = D_max / D_min`: strip spectrum,
//! extended basis via the pole-shift recursion, and the lattice of domains.

use crate::chains::{default_truncation, laurent_solve, rank_multiplicities, singular_chains, SingularChainBasis};
use crate::config::Tolerances;
use crate::error::{point, ConeError, Point, Result};
use crate::linalg;
use crate::model::ConeModel;
use crate::pairing::{Meromorphic, PairingGram};
use crate::polynomial::MatrixPolynomial;
use crate::scalar::{cabs, iunit, CMat, CVec, Cx, Real};
use crate::series::{mat_vec, matrix_germ_from_poly, LaurentGerm, Series};
use crate::spectrum::{polynomial_spectrum, SpectralPoint, Strip};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;

/// `N(sigma0)`: the largest `k` with `Im sigma0 - k > -nu/2`.
pub fn shift_count(im: f64, nu: f64) -> usize {
    let mut k = 0usize;
    // Shifts landing on the weight line (to round-off) do not count.
    while im - (k as f64 + 1.0) > -nu / 2.0 + 1e-9 {
        k += 1;
    }
    k
}

/// `Sigma(A)`, its downward integer shifts inside the strip, and `N(sigma0)`.
#[derive(Debug, Clone)]
pub struct StripSpectrum<T: Real> {
    pub sigma: Vec<SpectralPoint<T>>,
    pub sigma_prime: Vec<Cx<T>>,
    pub shifts: Vec<usize>,
}

pub fn strip_spectrum<T: Real>(model: &ConeModel<T>, tol: &Tolerances) -> Result<StripSpectrum<T>> {
    let nu = model.nu().to_f64_lossy();
    let sigma = polynomial_spectrum(model.p0(), Strip::weight(nu), tol)?;
    let sigma = crate::spectrum::with_partial_mults(model.p0(), sigma, tol);
    let mut sigma_prime = Vec::new();
    let mut shifts = Vec::new();
    for pt in &sigma {
        let im = pt.sigma0.im.to_f64_lossy();
        let n = shift_count(im, nu);
        for k in 0..=n {
            let z = pt.sigma0 - iunit::<T>() * T::lit(k as f64);
            if !sigma_prime.iter().any(|&w| crate::series::same_point(w, z, T::lit(tol.coincide))) {
                sigma_prime.push(z);
            }
        }
        shifts.push(n);
    }
    Ok(StripSpectrum { sigma, sigma_prime, shifts })
}

/// Global label `(sigma0, j, l)` of an extended basis element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisLabel {
    pub sigma0: Point,
    pub j: usize,
    pub l: usize,
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = crate::scalar::round_sig(self.sigma0.0, 15);
        let im = crate::scalar::round_sig(self.sigma0.1, 15);
        write!(f, "({re},{im},{},{})", self.j, self.l)
    }
}

/// `Psi_{sigma0, j, l} = sum_theta psi_{sigma0, j, l, theta}`.
#[derive(Debug, Clone)]
pub struct ExtendedBasisElement<T: Real> {
    pub sigma0: Cx<T>,
    pub j: usize,
    pub l: usize,
    /// Principal parts at `sigma0 - i theta`, `theta = 0..=N(sigma0)`.
    pub parts: Vec<LaurentGerm<T>>,
}

impl<T: Real> ExtendedBasisElement<T> {
    pub fn label(&self) -> BasisLabel {
        BasisLabel { sigma0: point(self.sigma0), j: self.j, l: self.l }
    }
}

impl<T: Real> Meromorphic<T> for ExtendedBasisElement<T> {
    fn eval_at(&self, sigma: Cx<T>) -> CVec<T> {
        let mut acc = self.parts[0].eval(sigma);
        for p in &self.parts[1..] {
            acc += p.eval(sigma);
        }
        acc
    }
}

/// Chains and extended elements at one point of `Sigma(A)`.
#[derive(Debug, Clone)]
pub struct PointBasis<T: Real> {
    pub sigma0: Cx<T>,
    pub chains: SingularChainBasis<T>,
    pub n_shift: usize,
    pub elements: Vec<ExtendedBasisElement<T>>,
}

/// The basis `{Psi_{sigma0, j, l}}` of `E(A)` over all of `Sigma(A)`.
#[derive(Debug, Clone)]
pub struct GlobalBasis<T: Real> {
    pub nu: T,
    pub dim_space: usize,
    pub points: Vec<PointBasis<T>>,
}

impl<T: Real> GlobalBasis<T> {
    pub fn elements(&self) -> impl Iterator<Item = &ExtendedBasisElement<T>> {
        self.points.iter().flat_map(|p| p.elements.iter())
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        self.elements().map(|e| e.label()).collect()
    }

    pub fn dim(&self) -> usize {
        self.points.iter().map(|p| p.elements.len()).sum()
    }

    /// Global indices of the elements at a point.
    pub fn indices_at(&self, sigma0: Cx<T>, tol: &Tolerances) -> Vec<usize> {
        self.elements()
            .enumerate()
            .filter(|(_, e)| crate::series::same_point(e.sigma0, sigma0, T::lit(tol.cluster)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn point(&self, sigma0: Cx<T>, tol: &Tolerances) -> Option<&PointBasis<T>> {
        self.points.iter().find(|p| crate::series::same_point(p.sigma0, sigma0, T::lit(tol.cluster)))
    }
}

/// Solves `P_0 x = s` near a point of `Sigma'` and returns the principal part.
fn shifted_principal<T: Real>(
    p0: &MatrixPolynomial<T>,
    z: Cx<T>,
    s: &LaurentGerm<T>,
    spectrum: &[SpectralPoint<T>],
    tol: &Tolerances,
) -> Result<LaurentGerm<T>> {
    let d = p0.dim();
    if s.trimmed(T::zero()).coeffs.is_empty() {
        return Ok(Series::zero(z, CVec::zeros(d)));
    }
    let mut center = z;
    let mut mu = 0usize;
    for pt in spectrum {
        let dist = cabs(pt.sigma0 - z);
        let scale = crate::scalar::scale_of(z);
        if dist <= T::lit(tol.coincide) * scale {
            center = pt.sigma0;
            mu = rank_multiplicities(p0, center, tol).first().copied().unwrap_or(0);
        } else if dist <= T::lit(tol.cluster) * scale {
            return Err(ConeError::ShiftCollision { shifted: point(z), other: point(pt.sigma0) });
        }
    }
    let pg = matrix_germ_from_poly(p0, center);
    let x = laurent_solve(&pg, &s.with_center(center), mu, 0, tol)?;
    Ok(x.principal().with_center(z).scale(-crate::scalar::cone::<T>()))
}

/// Extended basis elements at one spectral point of a right-placed model.
pub fn extended_basis<T: Real>(
    model: &ConeModel<T>,
    sigma0: &SpectralPoint<T>,
    spectrum: &[SpectralPoint<T>],
    tol: &Tolerances,
) -> Result<PointBasis<T>> {
    let model = model.normal_ordered();
    let nu = model.nu().to_f64_lossy();
    let n = shift_count(sigma0.sigma0.im.to_f64_lossy(), nu);
    let l = default_truncation(sigma0.algebraic_mult, model.n_terms());
    let chains = singular_chains(model.p0(), sigma0.sigma0, l, tol)?;
    let d = model.dim();
    let mut elements = Vec::new();
    for (j, chain) in chains.chains.iter().enumerate() {
        let mut base: Vec<LaurentGerm<T>> = vec![chain.principal()];
        for th in 1..=n {
            let z = sigma0.sigma0 - iunit::<T>() * T::lit(th as f64);
            let mut s: LaurentGerm<T> = Series::zero(z, CVec::zeros(d));
            for zeta in 0..th {
                let k = th - zeta;
                let Some(pk) = model.indicial().get(k) else { continue };
                if pk.is_zero(T::zero()) {
                    continue;
                }
                let shifted = base[zeta].argument_shift(iunit::<T>() * T::lit(k as f64)).with_center(z);
                s = s.add(&mat_vec(&matrix_germ_from_poly(pk, z), &shifted));
            }
            base.push(shifted_principal(model.p0(), z, &s, spectrum, tol)?);
        }
        for ll in 0..chains.mults[j] {
            let parts = base.iter().map(|b| b.mul_pow(ll as i32).principal()).collect();
            elements.push(ExtendedBasisElement { sigma0: sigma0.sigma0, j, l: ll, parts });
        }
    }
    Ok(PointBasis { sigma0: sigma0.sigma0, chains, n_shift: n, elements })
}

/// Extended basis over all of `Sigma(A)`.
pub fn global_basis<T: Real>(model: &ConeModel<T>, tol: &Tolerances) -> Result<GlobalBasis<T>> {
    let model = model.normal_ordered();
    let ss = strip_spectrum(&model, tol)?;
    let mut points = Vec::with_capacity(ss.sigma.len());
    for pt in &ss.sigma {
        points.push(extended_basis(&model, pt, &ss.sigma, tol)?);
    }
    Ok(GlobalBasis { nu: model.nu(), dim_space: model.dim(), points })
}

/// Residual of the holomorphy constraint
/// `pp sum_{theta <= k} P_{k - theta}(sigma) parts[theta](sigma + i(k - theta))` at `sigma0 - i k`.
pub fn holomorphy_residual<T: Real>(model: &ConeModel<T>, e: &ExtendedBasisElement<T>) -> T {
    let model = model.normal_ordered();
    let d = model.dim();
    let mut worst = T::zero();
    for k in 0..e.parts.len() {
        let z = e.sigma0 - iunit::<T>() * T::lit(k as f64);
        let mut s: LaurentGerm<T> = Series::zero(z, CVec::zeros(d));
        for th in 0..=k {
            let Some(pk) = model.indicial().get(k - th) else { continue };
            let shifted = e.parts[th].argument_shift(iunit::<T>() * T::lit((k - th) as f64)).with_center(z);
            s = s.add(&mat_vec(&matrix_germ_from_poly(pk, z), &shifted));
        }
        let r = s.principal().max_norm();
        if r > worst {
            worst = r;
        }
    }
    worst
}

/// `D_min = D_max` exactly when `Sigma(A)` is empty.
pub fn min_equals_max<T: Real>(model: &ConeModel<T>, tol: &Tolerances) -> Result<bool> {
    Ok(strip_spectrum(model, tol)?.sigma.is_empty())
}

/// A subspace of `E(A)` in coordinates of a global basis.
#[derive(Debug, Clone)]
pub struct DomainSubspace<T: Real> {
    pub labels: Vec<BasisLabel>,
    /// Orthonormal columns.
    pub coords: CMat<T>,
}

impl<T: Real> DomainSubspace<T> {
    /// Span of the given columns (orthonormalized; dependent columns dropped).
    pub fn new(labels: Vec<BasisLabel>, columns: CMat<T>) -> Self {
        assert_eq!(columns.nrows(), labels.len(), "coordinate length must match the basis");
        let q = linalg::range_basis(&columns, T::lit(1e-10));
        DomainSubspace { labels, coords: q }
    }

    pub fn from_vectors(labels: Vec<BasisLabel>, vecs: &[Vec<Cx<T>>]) -> Self {
        let n = labels.len();
        let cols: Vec<CVec<T>> = vecs.iter().map(|v| CVec::from_column_slice(v)).collect();
        DomainSubspace::new(labels, linalg::hstack(n, &cols))
    }

    /// `D_min`.
    pub fn zero(labels: Vec<BasisLabel>) -> Self {
        let n = labels.len();
        DomainSubspace { labels, coords: CMat::zeros(n, 0) }
    }

    /// `D_max`.
    pub fn full(labels: Vec<BasisLabel>) -> Self {
        let n = labels.len();
        DomainSubspace { labels, coords: linalg::identity(n) }
    }

    /// Span of selected basis elements.
    pub fn coordinate_span(labels: Vec<BasisLabel>, idx: &[usize]) -> Self {
        let n = labels.len();
        let mut c = CMat::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            c[(i, k)] = crate::scalar::cone();
        }
        DomainSubspace { labels, coords: c }
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.labels.len()
    }

    /// Equality as subspaces: equal dimension and principal angles below `tol.angle`.
    pub fn same_as(&self, other: &Self, tol: &Tolerances) -> bool {
        match linalg::max_principal_sine(&self.coords, &other.coords) {
            Some(s) => s.to_f64_lossy() < tol.angle,
            None => false,
        }
    }

    /// Sine of the largest principal angle (`None` for unequal dimensions).
    pub fn angle_to(&self, other: &Self) -> Option<f64> {
        linalg::max_principal_sine(&self.coords, &other.coords).map(|s| s.to_f64_lossy())
    }

    /// `self ⊆ other` up to `tol.angle`.
    pub fn is_subspace_of(&self, other: &Self, tol: &Tolerances) -> bool {
        if self.dim() == 0 {
            return true;
        }
        let r = &self.coords - &other.coords * (other.coords.adjoint() * &self.coords);
        r.norm().to_f64_lossy() < tol.angle * (self.dim() as f64).sqrt().max(1.0)
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut c = CMat::zeros(self.ambient_dim(), self.dim() + other.dim());
        c.columns_mut(0, self.dim()).copy_from(&self.coords);
        c.columns_mut(self.dim(), other.dim()).copy_from(&other.coords);
        DomainSubspace::new(self.labels.clone(), c)
    }

    pub fn to_json(&self) -> Value {
        let cols: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|j| self.coords.column(j).iter().map(|&z| round_pair(z)).collect())
            .collect();
        json!({
            "basis_labels": self.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "dim": self.dim(),
            "coords": cols,
        })
    }
}

fn round_pair<T: Real>(z: Cx<T>) -> [f64; 2] {
    [crate::scalar::round_sig(z.re.to_f64_lossy(), 15), crate::scalar::round_sig(z.im.to_f64_lossy(), 15)]
}

/// `D^perp = {v : [u, v] = 0 for all u in D}` in `E(A^*)` coordinates.
///
/// With `[u, v] = a^T G conj(b)` this is the null space of `C^H conj(G)`.
pub fn adjoint_domain<T: Real>(d: &DomainSubspace<T>, g: &PairingGram<T>, tol: &Tolerances) -> Result<DomainSubspace<T>> {
    let m = d.coords.adjoint() * g.g.map(|z| z.conj());
    let n = g.g.ncols();
    let null = if d.dim() == 0 { linalg::identity(n) } else { linalg::null_space(&m, T::lit(tol.rank)) };
    let expected = n.saturating_sub(d.dim());
    if null.ncols() != expected || g.g.nrows() != g.g.ncols() {
        return Err(ConeError::DegeneratePairing { expected, found: null.ncols() });
    }
    Ok(DomainSubspace { labels: g.cols.clone(), coords: null })
}

/// `D = D^perp` for a symmetric model (same basis on both sides).
pub fn is_selfadjoint<T: Real>(
    d: &DomainSubspace<T>,
    g: &PairingGram<T>,
    model: &ConeModel<T>,
    tol: &Tolerances,
) -> Result<bool> {
    if !model.symmetry_check(tol) {
        return Err(ConeError::NotSymmetric { deviation: model.symmetry_deviation().to_f64_lossy() });
    }
    let perp = adjoint_domain(d, g, tol)?;
    Ok(perp.same_as(d, tol))
}

/// Index difference `dim D2 - dim D1`.
pub fn relative_index<T: Real>(d1: &DomainSubspace<T>, d2: &DomainSubspace<T>) -> i64 {
    d2.dim() as i64 - d1.dim() as i64
}

/// Principal-part coordinates over every pole point of a basis.
struct PoleLayout<T: Real> {
    points: Vec<(Cx<T>, usize)>,
    d: usize,
}

impl<T: Real> PoleLayout<T> {
    fn new(basis: &GlobalBasis<T>, tol: &Tolerances) -> Self {
        let mut points: Vec<(Cx<T>, usize)> = Vec::new();
        for e in basis.elements() {
            for p in &e.parts {
                let order = p.pole_order(T::zero());
                if order == 0 {
                    continue;
                }
                match points.iter_mut().find(|(c, _)| crate::series::same_point(*c, p.center, T::lit(tol.coincide) * T::lit(1e3))) {
                    Some(slot) => slot.1 = slot.1.max(order),
                    None => points.push((p.center, order)),
                }
            }
        }
        PoleLayout { points, d: basis.dim_space }
    }

    fn len(&self) -> usize {
        self.points.iter().map(|(_, m)| m * self.d).sum()
    }

    fn flatten(&self, germs: &[LaurentGerm<T>], tol: &Tolerances) -> CVec<T> {
        let mut v = CVec::<T>::zeros(self.len());
        for g in germs {
            let mut off = 0;
            for &(c, m) in &self.points {
                if crate::series::same_point(c, g.center, T::lit(tol.coincide) * T::lit(1e3)) {
                    for n in 1..=m {
                        let coef = g.get(-(n as i32)).unwrap_or_else(|| CVec::zeros(self.d));
                        for i in 0..self.d {
                            v[off + (n - 1) * self.d + i] += coef[i];
                        }
                    }
                }
                off += m * self.d;
            }
        }
        v
    }
}

/// Flattened principal parts `F` of the basis and of `sigma * basis`.
fn flattened_sigma_action<T: Real>(basis: &GlobalBasis<T>, tol: &Tolerances) -> (CMat<T>, CMat<T>, Vec<Cx<T>>) {
    let layout = PoleLayout::new(basis, tol);
    let mut f = Vec::new();
    let mut sf = Vec::new();
    for e in basis.elements() {
        f.push(layout.flatten(&e.parts, tol));
        let moved: Vec<LaurentGerm<T>> =
            e.parts.iter().map(|p| p.scale(p.center).add(&p.mul_pow(1)).principal()).collect();
        sf.push(layout.flatten(&moved, tol));
    }
    let rows = layout.len();
    (linalg::hstack(rows, &f), linalg::hstack(rows, &sf), layout.points.iter().map(|p| p.0).collect())
}

/// Matrix of multiplication by `sigma` restricted to `D`, with the invariance residual.
pub fn sigma_action<T: Real>(d: &DomainSubspace<T>, basis: &GlobalBasis<T>, tol: &Tolerances) -> (CMat<T>, T) {
    let (f, sf, _) = flattened_sigma_action(basis, tol);
    let x = &f * &d.coords;
    let y = &sf * &d.coords;
    let m = linalg::lstsq(&x, &y, T::lit(1e-12));
    let r = (&x * &m - &y).norm();
    let scale = y.norm().max(T::one());
    (m, r / scale)
}

/// Invariance of `D` under multiplication by `sigma` (modulo holomorphic germs).
pub fn saturation_check<T: Real>(d: &DomainSubspace<T>, basis: &GlobalBasis<T>, tol: &Tolerances) -> bool {
    if d.dim() == 0 {
        return true;
    }
    let (_, r) = sigma_action(d, basis, tol);
    r.to_f64_lossy() < tol.angle
}

/// Splits a saturated `D` into its components at the pole points.
pub fn saturate_decompose<T: Real>(
    d: &DomainSubspace<T>,
    basis: &GlobalBasis<T>,
    tol: &Tolerances,
) -> Result<Vec<(Cx<T>, DomainSubspace<T>)>> {
    let (m, r) = sigma_action(d, basis, tol);
    if r.to_f64_lossy() >= tol.angle {
        return Err(ConeError::NotInvariant { residual: r.to_f64_lossy() });
    }
    let (_, _, points) = flattened_sigma_action(basis, tol);
    let k = d.dim();
    let mut out = Vec::new();
    let mut total = 0;
    for p in points {
        let shifted = &m - linalg::identity::<T>(k) * p;
        let mut pw = linalg::identity::<T>(k);
        for _ in 0..k {
            pw = &pw * &shifted;
        }
        let null = linalg::null_space(&pw, T::lit(1e-8));
        // Scale-aware: treat tiny powers as zero.
        let null = if pw.norm().to_f64_lossy() < 1e-10 { linalg::identity(k) } else { null };
        if null.ncols() > 0 {
            total += null.ncols();
            out.push((p, DomainSubspace::new(d.labels.clone(), &d.coords * null)));
        }
    }
    if total != k {
        return Err(ConeError::NotInvariant { residual: (k as f64 - total as f64).abs() });
    }
    Ok(out)
}

/// `D_{sigma0, 1/2}`: elements with `l >= mu_j / 2` at a real point.
pub fn half_domain<T: Real>(basis: &GlobalBasis<T>, sigma0: Cx<T>, tol: &Tolerances) -> Result<DomainSubspace<T>> {
    if sigma0.im.abs().to_f64_lossy() > tol.edge {
        return Err(ConeError::NotRealPoint(point(sigma0)));
    }
    let pb = basis.point(sigma0, tol).ok_or(ConeError::NotSpectral(point(sigma0)))?;
    if let Some(&m) = pb.chains.mults.iter().find(|&&m| m % 2 == 1) {
        return Err(ConeError::OddMultiplicity { sigma: point(sigma0), mult: m });
    }
    let idx = half_indices(basis, pb, tol);
    Ok(DomainSubspace::coordinate_span(basis.labels(), &idx))
}

fn half_indices<T: Real>(basis: &GlobalBasis<T>, pb: &PointBasis<T>, tol: &Tolerances) -> Vec<usize> {
    let all = basis.indices_at(pb.sigma0, tol);
    all.into_iter()
        .zip(&pb.elements)
        .filter(|(_, e)| e.l >= pb.chains.mults[e.j] / 2)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of the basis elements spanning the Friedrichs domain.
pub fn friedrichs_indices<T: Real>(basis: &GlobalBasis<T>, tol: &Tolerances) -> Result<Vec<usize>> {
    let mut idx = Vec::new();
    for pb in &basis.points {
        let im = pb.sigma0.im.to_f64_lossy();
        if im.abs() <= tol.edge {
            if let Some(&m) = pb.chains.mults.iter().find(|&&m| m % 2 == 1) {
                return Err(ConeError::OddMultiplicity { sigma: point(pb.sigma0), mult: m });
            }
            idx.extend(half_indices(basis, pb, tol));
        } else if im < 0.0 {
            idx.extend(basis.indices_at(pb.sigma0, tol));
        }
    }
    idx.sort_unstable();
    Ok(idx)
}

/// The Friedrichs domain of a symmetric, semibounded model.
pub fn friedrichs_domain<T: Real>(
    model: &ConeModel<T>,
    basis: &GlobalBasis<T>,
    tol: &Tolerances,
) -> Result<DomainSubspace<T>> {
    check_friedrichs_preconditions(model, tol)?;
    let idx = friedrichs_indices(basis, tol)?;
    Ok(DomainSubspace::coordinate_span(basis.labels(), &idx))
}

/// The symmetry and positivity screens required before a Friedrichs computation.
pub fn check_friedrichs_preconditions<T: Real>(model: &ConeModel<T>, tol: &Tolerances) -> Result<()> {
    if !model.symmetry_check(tol) {
        return Err(ConeError::NotSymmetric { deviation: model.symmetry_deviation().to_f64_lossy() });
    }
    let radius = T::lit(tol.pos_radius);
    if !model.positivity_check(tol.pos_samples, radius, tol)? {
        let (min_eig, at) = model.min_real_eigenvalue(tol.pos_samples, radius);
        return Err(ConeError::NotPositive { min_eig: min_eig.to_f64_lossy(), at: at.to_f64_lossy() });
    }
    Ok(())
}

/// Outcome of comparing the domains of two models.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Indicial coefficients agree for `k = 0..=ceil(nu - 1)`.
    pub coefficient_criterion: bool,
    /// Spectra and extended bases coincide.
    pub bases_coincide: bool,
    pub max_domains_equal: bool,
    /// Indicial coefficients agree for `k < nu / 2`.
    pub friedrichs_coefficient_criterion: bool,
    /// The elements spanning the Friedrichs domains coincide.
    pub friedrichs_bases_coincide: bool,
    pub friedrichs_domains_equal: bool,
}

fn germs_close<T: Real>(a: &LaurentGerm<T>, b: &LaurentGerm<T>, tol: &Tolerances) -> bool {
    let an = a.principal().max_norm();
    let bn = b.principal().max_norm();
    if an.to_f64_lossy() <= tol.res && bn.to_f64_lossy() <= tol.res {
        return true;
    }
    if !crate::series::same_point(a.center, b.center, T::lit(tol.cluster)) {
        return false;
    }
    let diff = a.principal().sub(&b.principal().with_center(a.center)).max_norm();
    diff.to_f64_lossy() <= tol.res * an.max(bn).to_f64_lossy().max(1.0)
}

fn elements_close<T: Real>(a: &ExtendedBasisElement<T>, b: &ExtendedBasisElement<T>, tol: &Tolerances) -> bool {
    if a.j != b.j || a.l != b.l || a.parts.len() != b.parts.len() {
        return false;
    }
    a.parts.iter().zip(&b.parts).all(|(x, y)| germs_close(x, y, tol))
}

/// [`domain_stability`] on precomputed bases.
pub fn domain_stability_with<T: Real>(
    m0: &ConeModel<T>,
    m1: &ConeModel<T>,
    b0: &GlobalBasis<T>,
    b1: &GlobalBasis<T>,
    tol: &Tolerances,
) -> Result<StabilityReport> {
    if m0.dim() != m1.dim() || (m0.nu() - m1.nu()).abs().to_f64_lossy() > tol.sym {
        return Err(ConeError::DimensionMismatch("domain comparison needs equal nu and d".into()));
    }
    let (a, b) = (m0.normal_ordered(), m1.normal_ordered());
    let nu = m0.nu().to_f64_lossy();
    let agree = |k: usize| {
        let zero = MatrixPolynomial::zero(a.dim());
        let pa = a.indicial().get(k).unwrap_or(&zero);
        let pb = b.indicial().get(k).unwrap_or(&zero);
        pa.distance(pb).to_f64_lossy() <= tol.sym
    };
    let top = crate::model::terms_for_nu((nu - 1.0).max(0.0));
    let coefficient_criterion = (0..=top.min(a.n_terms().saturating_sub(1))).all(agree);
    let friedrichs_coefficient_criterion = (0..a.n_terms()).filter(|&k| (k as f64) < nu / 2.0).all(agree);

    let ea: Vec<_> = b0.elements().collect();
    let eb: Vec<_> = b1.elements().collect();
    let same_points = b0.points.len() == b1.points.len()
        && b0.points.iter().zip(&b1.points).all(|(p, q)| {
            crate::series::same_point(p.sigma0, q.sigma0, T::lit(tol.cluster)) && p.chains.mults == q.chains.mults
        });
    let bases_coincide = same_points && ea.len() == eb.len() && ea.iter().zip(&eb).all(|(x, y)| elements_close(x, y, tol));

    let fa = friedrichs_indices(b0, tol).ok();
    let fb = friedrichs_indices(b1, tol).ok();
    let friedrichs_bases_coincide = match (&fa, &fb) {
        (Some(ia), Some(ib)) => {
            ia.len() == ib.len()
                && ia.iter().zip(ib).all(|(&i, &k)| {
                    crate::series::same_point(ea[i].sigma0, eb[k].sigma0, T::lit(tol.cluster))
                        && elements_close(ea[i], eb[k], tol)
                })
        }
        _ => false,
    };
    Ok(StabilityReport {
        coefficient_criterion,
        bases_coincide,
        max_domains_equal: coefficient_criterion || bases_coincide,
        friedrichs_coefficient_criterion,
        friedrichs_bases_coincide,
        friedrichs_domains_equal: friedrichs_coefficient_criterion || friedrichs_bases_coincide,
    })
}

/// Whether `D_max` (and `D_F`) are unchanged between two models with the same `nu` and `d`.
pub fn domain_stability<T: Real>(m0: &ConeModel<T>, m1: &ConeModel<T>, tol: &Tolerances) -> Result<StabilityReport> {
    let b0 = global_basis(m0, tol)?;
    let b1 = global_basis(m1, tol)?;
    domain_stability_with(m0, m1, &b0, &b1, tol)
}
