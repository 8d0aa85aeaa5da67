//! The twelve acceptance criteria, shared by the `acceptance` test target
//! and `cone-ext reproduce-paper`.
//!
//! Each criterion returns a one-line detail on success and an explanation
//! on failure. The pairing prefactor is a parameter so the sign-flip
//! mutation can be run through exactly the same code.

use cone_ext::chains::{reduce_germ, singular_chains, default_truncation};
use cone_ext::extension::{
    adjoint_domain, friedrichs_domain, friedrichs_indices, global_basis, half_domain, is_selfadjoint, min_equals_max,
    relative_index, saturation_check, BasisLabel, DomainSubspace,
};
use cone_ext::linalg;
use cone_ext::mellin::{green_pairing_with, CutoffProfile, Dictionary, MellinTransform, ModelFunction};
use cone_ext::pairing::{contour_pairing, nondegeneracy_check, pairing_gram_with_factor, Circle, Meromorphic};
use cone_ext::series::Series;
use cone_ext::{fixtures, Basis, CMat, ConeError, Domain, Gram, Model, Tolerances, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::cell::RefCell;
use std::collections::HashMap;
use std::time::Instant;

const I: C64 = C64::new(0.0, 1.0);

/// Knobs for a suite run.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Prefactor of the residue sum in the Gram matrix; `i` is correct.
    pub pairing_factor: C64,
    pub tol: Tolerances,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 20240607, pairing_factor: I, tol: Tolerances::default() }
    }
}

/// The result of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Wall time; left out of JSON so reports stay deterministic.
    #[serde(skip)]
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} [{:>2}] {} ({:.3} s): {}", self.id, self.title, self.seconds, self.detail)
    }
}

type Check = fn(&SuiteOptions) -> Result<String, String>;

/// `(id, title, time budget in seconds, check)`.
pub const CRITERIA: [(u32, &str, Option<f64>, Check); 12] = [
    (1, "CEx1 Gram in the (omega, i omega log x) dictionary", Some(0.1), c1_cex1_gram),
    (2, "three-route agreement on CEx1 and b = 0.5", Some(5.0), c2_three_routes),
    (3, "b = 0.5 Gram and selfadjoint lines", None, c3_beta_minus),
    (4, "CEx1 selfadjoint family and Friedrichs member", None, c4_cex1_family),
    (5, "Friedrichs domain of the a = 0.6 model", None, c5_a06_friedrichs),
    (6, "partial multiplicities of engineered pencils", Some(30.0), c6_multiplicities),
    (7, "adjoint multiplicities of engineered pencils", None, c7_adjoint_multiplicities),
    (8, "even multiplicities of Q*Q pencils", None, c8_even_multiplicities),
    (9, "Gram nondegeneracy and adjoint involution", None, c9_nondegeneracy),
    (10, "half-space orthogonality at real points", None, c10_half_orthogonality),
    (11, "min = max criterion and relative indices", None, c11_relative_index),
    (12, "cut-off independence of the pairings", None, c12_cutoff_independence),
];

pub fn run_criterion(id: u32, opts: &SuiteOptions) -> Option<Outcome> {
    let &(id, title, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let res = check(opts);
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(b) = budget {
        if seconds >= b {
            passed = false;
            detail = format!("{detail}; exceeded the {b} s budget");
        }
    }
    Some(Outcome { id, title, passed, detail, seconds })
}

pub fn run_all(opts: &SuiteOptions) -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0, opts)).collect()
}

fn err(e: ConeError) -> String {
    format!("error: {e}")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs_diff(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Basis and Gram of a symmetric model (the basis of `A^*` is the same).
fn basis_and_gram(m: &Model, opts: &SuiteOptions) -> Result<(Basis, Gram), String> {
    let b = global_basis(m, &opts.tol).map_err(err)?;
    let g = pairing_gram_with_factor(m, &b, &b, opts.pairing_factor, &opts.tol).map_err(err)?;
    Ok((b, g))
}

/// Bases of `A` and `A^*` with the Gram between them and the Gram of `A^*` against `A`.
fn dual_grams(m: &Model, opts: &SuiteOptions) -> Result<(Basis, Basis, Gram, Gram), String> {
    let star = m.formal_adjoint();
    let b = global_basis(m, &opts.tol).map_err(err)?;
    let bs = global_basis(&star, &opts.tol).map_err(err)?;
    let g = pairing_gram_with_factor(m, &b, &bs, opts.pairing_factor, &opts.tol).map_err(err)?;
    let gs = pairing_gram_with_factor(&star, &bs, &b, opts.pairing_factor, &opts.tol).map_err(err)?;
    Ok((b, bs, g, gs))
}

/// `(omega, i omega log x)` for CEx1.
fn cex1_dictionary(b: &Basis, cutoff: CutoffProfile, tol: &Tolerances) -> Result<Dictionary, String> {
    let f = vec![
        ModelFunction::monomial(c(1.0, 0.0), c(0.0, 0.0), 0, cutoff),
        ModelFunction::monomial(I, c(0.0, 0.0), 1, cutoff),
    ];
    Dictionary::new(vec!["omega".into(), "i omega log x".into()], f, b, tol).map_err(err)
}

/// `(omega x^{ib}, omega x^{-ib})` for `b = 0.5`.
fn b05_dictionary(b: &Basis, cutoff: CutoffProfile, tol: &Tolerances) -> Result<Dictionary, String> {
    let f = vec![
        ModelFunction::monomial(c(1.0, 0.0), c(0.5, 0.0), 0, cutoff),
        ModelFunction::monomial(c(1.0, 0.0), c(-0.5, 0.0), 0, cutoff),
    ];
    Dictionary::new(vec!["omega x^(i/2)".into(), "omega x^(-i/2)".into()], f, b, tol).map_err(err)
}

fn c1_cex1_gram(opts: &SuiteOptions) -> Result<String, String> {
    let (b, g) = basis_and_gram(&fixtures::cex1_a2(), opts)?;
    let dict = cex1_dictionary(&b, CutoffProfile::default(), &opts.tol)?;
    let gd = dict.gram(&g);
    let want = CMat::<f64>::from_row_slice(2, 2, &[c(0.0, 0.0), I, I, c(0.0, 0.0)]);
    let d = max_abs_diff(&gd, &want);
    ensure(d < 1e-10, || format!("max |G - i[[0,1],[1,0]]| = {d:.3e}, G = {:?}", gd.as_slice()))?;
    Ok(format!("max |G - i[[0,1],[1,0]]| = {d:.3e}"))
}

/// Memoised Mellin transform, evaluated at the contour nodes once.
struct CachedTransform {
    inner: MellinTransform,
    cache: RefCell<HashMap<(u64, u64), DVector<C64>>>,
}

impl CachedTransform {
    fn new(f: &ModelFunction) -> Self {
        CachedTransform { inner: f.transform(), cache: RefCell::new(HashMap::new()) }
    }
}

impl Meromorphic<f64> for CachedTransform {
    fn eval_at(&self, sigma: C64) -> DVector<C64> {
        let key = (sigma.re.to_bits(), sigma.im.to_bits());
        if let Some(v) = self.cache.borrow().get(&key) {
            return v.clone();
        }
        let v = self.inner.eval_at(sigma);
        self.cache.borrow_mut().insert(key, v.clone());
        v
    }
}

/// One entry computed by each route.
#[derive(Debug, Clone, Copy)]
struct ThreeRoutes {
    closed: C64,
    contour: C64,
    x_space: C64,
}

/// Every dictionary pair of a scalar model by the closed form, the contour
/// route on full Mellin transforms (n = 256, r = 0.5 around each point) and
/// the x-space Green identity.
fn three_routes(m: &Model, dict: &Dictionary, g: &Gram, tol: &Tolerances) -> Result<Vec<ThreeRoutes>, String> {
    let gd = dict.gram(g);
    let b = global_basis(m, tol).map_err(err)?;
    let transforms: Vec<CachedTransform> = dict.functions.iter().map(CachedTransform::new).collect();
    let n = dict.functions.len();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for k in 0..n {
            let mut ct = c(0.0, 0.0);
            for pb in &b.points {
                ct += contour_pairing(&transforms[a], &transforms[k], m.p0(), Circle::new(pb.sigma0, 0.5), 256);
            }
            let x = green_pairing_with(m, &dict.functions[a], &dict.functions[k], tol).map_err(err)?;
            out.push(ThreeRoutes { closed: gd[(a, k)], contour: ct, x_space: x });
        }
    }
    Ok(out)
}

fn c2_three_routes(opts: &SuiteOptions) -> Result<String, String> {
    let mut worst_ct: f64 = 0.0;
    let mut worst_x: f64 = 0.0;
    for (m, cex1) in [(fixtures::cex1_a2(), true), (fixtures::beta_minus_b05(), false)] {
        let (b, g) = basis_and_gram(&m, opts)?;
        let dict = if cex1 {
            cex1_dictionary(&b, CutoffProfile::default(), &opts.tol)?
        } else {
            b05_dictionary(&b, CutoffProfile::default(), &opts.tol)?
        };
        for r in three_routes(&m, &dict, &g, &opts.tol)? {
            worst_ct = worst_ct.max((r.closed - r.contour).norm());
            worst_x = worst_x.max((r.closed - r.x_space).norm());
        }
    }
    let detail = format!("8 pairs; closed vs contour {worst_ct:.3e}, closed vs x-space {worst_x:.3e}");
    ensure(worst_ct < 1e-8 && worst_x < 1e-6, || detail.clone())?;
    Ok(detail)
}

fn c3_beta_minus(opts: &SuiteOptions) -> Result<String, String> {
    let m = fixtures::beta_minus_b05();
    let (b, g) = basis_and_gram(&m, opts)?;
    let dict = b05_dictionary(&b, CutoffProfile::default(), &opts.tol)?;
    let gd = dict.gram(&g);
    let want = CMat::<f64>::from_row_slice(2, 2, &[I, c(0.0, 0.0), c(0.0, 0.0), -I]);
    let d = max_abs_diff(&gd, &want);
    ensure(d < 1e-10, || format!("max |G - diag(i, -i)| = {d:.3e}"))?;
    for lam in [0.0, std::f64::consts::FRAC_PI_2, 1.234] {
        let dom = dict.domain(b.labels(), &[vec![c(1.0, 0.0), C64::from_polar(1.0, lam)]]);
        let sa = is_selfadjoint(&dom, &g, &m, &opts.tol).map_err(err)?;
        ensure(sa, || format!("span(1, e^(i {lam})) is not selfadjoint"))?;
    }
    let dom = dict.domain(b.labels(), &[vec![c(1.0, 0.0), c(2.0, 0.0)]]);
    let sa = is_selfadjoint(&dom, &g, &m, &opts.tol).map_err(err)?;
    ensure(!sa, || "span(1, 2) reported selfadjoint".into())?;
    Ok(format!("max |G - diag(i, -i)| = {d:.3e}; 3 selfadjoint lines, span(1, 2) rejected"))
}

fn c4_cex1_family(opts: &SuiteOptions) -> Result<String, String> {
    let m = fixtures::cex1_a2();
    let (b, g) = basis_and_gram(&m, opts)?;
    let dict = cex1_dictionary(&b, CutoffProfile::default(), &opts.tol)?;
    for k in 0..8 {
        let lam = k as f64 * std::f64::consts::TAU / 8.0 + 0.1;
        let e = C64::from_polar(1.0, lam);
        let dom = dict.domain(b.labels(), &[vec![e + 1.0, e - 1.0]]);
        let sa = is_selfadjoint(&dom, &g, &m, &opts.tol).map_err(err)?;
        ensure(sa, || format!("lambda = {lam:.4}: not selfadjoint"))?;
    }
    let f = friedrichs_domain(&m, &b, &opts.tol).map_err(err)?;
    let member = dict.domain(b.labels(), &[vec![c(2.0, 0.0), c(0.0, 0.0)]]);
    let angle = f.angle_to(&member).ok_or_else(|| format!("Friedrichs domain has dimension {}", f.dim()))?;
    ensure(angle < 1e-8, || format!("sin angle(D_F, lambda = 0 member) = {angle:.3e}"))?;
    Ok(format!("8 selfadjoint members; sin angle(D_F, lambda = 0) = {angle:.3e}"))
}

fn c5_a06_friedrichs(opts: &SuiteOptions) -> Result<String, String> {
    let t = &opts.tol;
    let m = fixtures::cex1_a06();
    let (b, g) = basis_and_gram(&m, opts)?;
    let f = friedrichs_domain(&m, &b, t).map_err(err)?;
    // omega e_0: Mellin principal part i sigma^{-1} e_0, reduced in the chain basis at 0.
    let pb0 = b.point(c(0.0, 0.0), t).ok_or("no spectral point at 0")?;
    let germ = Series::new(c(0.0, 0.0), -1, vec![DVector::from_vec(vec![I, c(0.0, 0.0)])], true, DVector::zeros(2));
    let coords = reduce_germ(&germ, &pb0.chains, t).map_err(err)?;
    let mut omega = vec![c(0.0, 0.0); b.dim()];
    for (idx, e) in b.indices_at(c(0.0, 0.0), t).into_iter().zip(&pb0.elements) {
        omega[idx] = coords.coords[e.j][e.l];
    }
    let mut vecs = vec![omega];
    for idx in b.indices_at(c(0.0, -0.6), t) {
        let mut v = vec![c(0.0, 0.0); b.dim()];
        v[idx] = c(1.0, 0.0);
        vecs.push(v);
    }
    let expected = DomainSubspace::from_vectors(b.labels(), &vecs);
    ensure(f.dim() == 2, || format!("dim D_F = {}", f.dim()))?;
    let angle = f.angle_to(&expected).ok_or("dimension mismatch")?;
    ensure(angle < 1e-8, || format!("sin angle(D_F, span(omega) + D_(-0.6i)) = {angle:.3e}"))?;
    let sa = is_selfadjoint(&f, &g, &m, t).map_err(err)?;
    let sat = saturation_check(&f, &b, t);
    ensure(sa && sat, || format!("selfadjoint {sa}, saturated {sat}"))?;
    Ok(format!("dim 2, sin angle = {angle:.3e}, selfadjoint and saturated"))
}

fn c6_multiplicities(opts: &SuiteOptions) -> Result<String, String> {
    let pencils = fixtures::engineered_pencils(opts.seed, 100, 4, 3);
    for (k, e) in pencils.iter().enumerate() {
        let total: usize = e.mults.iter().sum();
        let b = singular_chains(&e.p, e.sigma0, default_truncation(total, 1), &opts.tol).map_err(err)?;
        ensure(b.mults == e.mults, || format!("pencil {k}: constructed {:?}, recovered {:?}", e.mults, b.mults))?;
        let w = e.p.det_winding(e.sigma0, 0.05, 512).map_err(err)?;
        ensure(w == total as i64, || format!("pencil {k}: winding {w}, sum of multiplicities {total}"))?;
    }
    Ok("100 pencils: multiplicities and det winding agree".into())
}

fn c7_adjoint_multiplicities(opts: &SuiteOptions) -> Result<String, String> {
    let pencils = fixtures::engineered_pencils(opts.seed, 100, 4, 3);
    for (k, e) in pencils.iter().enumerate() {
        let l = default_truncation(e.mults.iter().sum(), 1);
        let a = singular_chains(&e.p, e.sigma0, l, &opts.tol).map_err(err)?;
        let s = singular_chains(&e.p.star(), e.sigma0.conj(), l, &opts.tol).map_err(err)?;
        ensure(a.mults == s.mults, || format!("pencil {k}: {:?} vs adjoint {:?}", a.mults, s.mults))?;
    }
    Ok("100 pencils: mults(P, s) = mults(P*, conj s)".into())
}

fn c8_even_multiplicities(opts: &SuiteOptions) -> Result<String, String> {
    let pencils = fixtures::positive_pencils(opts.seed.wrapping_add(1), 50, 3, 2);
    let mut models = 0;
    for (k, e) in pencils.iter().enumerate() {
        let total: usize = e.mults.iter().sum();
        let b = singular_chains(&e.p, e.sigma0, default_truncation(total, 1), &opts.tol).map_err(err)?;
        ensure(b.mults.iter().all(|m| m % 2 == 0), || format!("pencil {k}: odd multiplicity in {:?}", b.mults))?;
        // Where the pencil defines a model, the Friedrichs construction must not see an odd chain.
        let Ok(m) = Model::stationary(2.0, e.p.clone(), "qq") else { continue };
        let Ok(basis) = global_basis(&m, &opts.tol) else { continue };
        models += 1;
        if let Err(e) = friedrichs_indices(&basis, &opts.tol) {
            return Err(format!("pencil {k}: {e}"));
        }
    }
    Ok(format!("50 pencils even; {models} models without OddMultiplicity"))
}

fn random_subspace(rng: &mut ChaCha8Rng, labels: Vec<BasisLabel>, n: usize) -> Domain {
    let k = rng.random_range(0..=n);
    if k == 0 {
        return DomainSubspace::zero(labels);
    }
    let vecs: Vec<Vec<C64>> =
        (0..k).map(|_| (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
    DomainSubspace::from_vectors(labels, &vecs)
}

fn c9_nondegeneracy(opts: &SuiteOptions) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(2));
    let mut min_det = f64::INFINITY;
    let mut blocks = 0;
    for m in fixtures::zoo() {
        let (b, _, g, gs) = dual_grams(&m, opts)?;
        let rep = nondegeneracy_check(&g, true, &opts.tol);
        for blk in &rep.blocks {
            min_det = min_det.min(blk.abs_det);
            blocks += 1;
        }
        ensure(rep.ok, || format!("{}: degenerate conjugate block", m.label()))?;
        for _ in 0..50 {
            let d = random_subspace(&mut rng, b.labels(), b.dim());
            let perp = adjoint_domain(&d, &g, &opts.tol).map_err(err)?;
            let back = adjoint_domain(&perp, &gs, &opts.tol).map_err(err)?;
            ensure(back.same_as(&d, &opts.tol), || format!("{}: (D^perp)^perp != D", m.label()))?;
        }
    }
    Ok(format!("{blocks} blocks, min |det| = {min_det:.3e}; involution on 50 subspaces per model"))
}

fn c10_half_orthogonality(opts: &SuiteOptions) -> Result<String, String> {
    let t = &opts.tol;
    let mut worst: f64 = 0.0;
    let mut checked = Vec::new();
    for m in fixtures::zoo() {
        let (b, bs, g, _) = dual_grams(&m, opts)?;
        let mut any = false;
        for pb in &b.points {
            if pb.sigma0.im.abs() > t.edge {
                continue;
            }
            let (h, hs) = match (half_domain(&b, pb.sigma0, t), half_domain(&bs, pb.sigma0.conj(), t)) {
                (Ok(h), Ok(hs)) => (h, hs),
                (Err(ConeError::OddMultiplicity { .. }), _) | (_, Err(ConeError::OddMultiplicity { .. })) => continue,
                (Err(e), _) | (_, Err(e)) => return Err(format!("{}: {e}", m.label())),
            };
            let block = h.coords.transpose() * &g.g * hs.coords.map(|z| z.conj());
            worst = worst.max(linalg::max_abs(&block));
            any = true;
        }
        if any {
            checked.push(m.label().to_string());
        }
    }
    ensure(worst < 1e-10, || format!("max |G| on half spaces = {worst:.3e}"))?;
    Ok(format!("max |G| on half spaces = {worst:.3e} ({})", checked.join(", ")))
}

fn c11_relative_index(opts: &SuiteOptions) -> Result<String, String> {
    let t = &opts.tol;
    let shifted = fixtures::shifted();
    let bs = global_basis(&shifted, t).map_err(err)?;
    ensure(bs.dim() == 0 && min_equals_max(&shifted, t).map_err(err)?, || format!("shifted: dim E = {}", bs.dim()))?;
    let b = global_basis(&fixtures::cex1_a2(), t).map_err(err)?;
    let idx = relative_index::<f64>(&DomainSubspace::zero(b.labels()), &DomainSubspace::full(b.labels()));
    ensure(idx == 2, || format!("CEx1 relative_index(D_min, D_max) = {idx}"))?;

    let b = global_basis(&fixtures::cex1_a06(), t).map_err(err)?;
    let n = b.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(3));
    for k in 0..20 {
        let d1 = random_subspace(&mut rng, b.labels(), n);
        let d2 = d1.sum(&random_subspace(&mut rng, b.labels(), n));
        let d3 = d2.sum(&random_subspace(&mut rng, b.labels(), n));
        ensure(d1.is_subspace_of(&d2, t) && d2.is_subspace_of(&d3, t), || format!("triple {k} is not nested"))?;
        // Quotient dimensions from ranks of stacked coordinates.
        let quot = |lo: &Domain, hi: &Domain| {
            let mut s = CMat::<f64>::zeros(n, lo.dim() + hi.dim());
            s.columns_mut(0, lo.dim()).copy_from(&lo.coords);
            s.columns_mut(lo.dim(), hi.dim()).copy_from(&hi.coords);
            linalg::rank(&s, 1e-10) as i64 - lo.dim() as i64
        };
        let (i12, i23, i13) = (relative_index(&d1, &d2), relative_index(&d2, &d3), relative_index(&d1, &d3));
        ensure(i12 + i23 == i13, || format!("triple {k}: {i12} + {i23} != {i13}"))?;
        ensure(i12 == quot(&d1, &d2) && i13 == quot(&d1, &d3), || format!("triple {k}: index differs from dim D2/D1"))?;
    }
    Ok("shifted dim E = 0; CEx1 index 2; 20 nested triples additive".into())
}

fn c12_cutoff_independence(opts: &SuiteOptions) -> Result<String, String> {
    let narrow = CutoffProfile::new(0.1, 0.5).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (m, cex1) in [(fixtures::cex1_a2(), true), (fixtures::beta_minus_b05(), false)] {
        let (b, g) = basis_and_gram(&m, opts)?;
        let mk = |p: CutoffProfile| {
            if cex1 {
                cex1_dictionary(&b, p, &opts.tol)
            } else {
                b05_dictionary(&b, p, &opts.tol)
            }
        };
        let r0 = three_routes(&m, &mk(CutoffProfile::default())?, &g, &opts.tol)?;
        let r1 = three_routes(&m, &mk(narrow)?, &g, &opts.tol)?;
        for (a, z) in r0.iter().zip(&r1) {
            worst = worst.max((a.closed - z.closed).norm());
            worst = worst.max((a.contour - z.contour).norm());
            worst = worst.max((a.x_space - z.x_space).norm());
        }
    }
    ensure(worst < 1e-8, || format!("max change = {worst:.3e}"))?;
    Ok(format!("max change over 8 pairs and 3 routes = {worst:.3e}"))
}
