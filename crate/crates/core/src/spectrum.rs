//! Boundary spectrum: roots of `det P_0` by companion linearization and
//! complex Schur decomposition, clustered into spectral points.

use crate::chains::rank_multiplicities;
use crate::config::Tolerances;
use crate::error::{point, ConeError, Result};
use crate::model::ConeModel;
use crate::polynomial::MatrixPolynomial;
use crate::scalar::{cabs, czero, CMat, Cx, Real};
use nalgebra::Schur;
use serde::{Deserialize, Serialize};

/// A horizontal strip `im_lo < Im sigma < im_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Strip {
    pub fn new(im_lo: f64, im_hi: f64) -> Self {
        Strip { im_lo, im_hi }
    }

    /// The weight strip `|Im sigma| < nu / 2`.
    pub fn weight(nu: f64) -> Self {
        Strip { im_lo: -nu / 2.0, im_hi: nu / 2.0 }
    }

    pub fn contains(&self, im: f64) -> bool {
        im > self.im_lo && im < self.im_hi
    }
}

/// A root of `det P_0` with its multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint<T: Real> {
    pub sigma0: Cx<T>,
    pub algebraic_mult: usize,
    /// Partial multiplicities, nonincreasing; empty until chains are computed.
    pub partial_mults: Vec<usize>,
}

/// All eigenvalues of the companion pencil of `P` (roots of `det P`, with repetition).
pub fn polynomial_roots<T: Real>(p: &MatrixPolynomial<T>) -> Vec<Cx<T>> {
    let p = p.trimmed();
    let m = p.degree();
    let d = p.dim();
    if m == 0 {
        return Vec::new();
    }
    let Some(lead_inv) = crate::linalg::inverse(p.leading()) else {
        return Vec::new();
    };
    let n = m * d;
    let mut c = CMat::<T>::zeros(n, n);
    for b in 0..m.saturating_sub(1) {
        for i in 0..d {
            c[(b * d + i, (b + 1) * d + i)] = crate::scalar::cone();
        }
    }
    for k in 0..m {
        let blk = -(&lead_inv * &p.coeffs()[k]);
        c.view_mut(((m - 1) * d, k * d), (d, d)).copy_from(&blk);
    }
    let (_, t) = Schur::new(c).unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

fn snap_root<T: Real>(z: Cx<T>) -> Cx<T> {
    let eps = T::lit(1e-13) * crate::scalar::scale_of(z);
    crate::scalar::snap(z, eps)
}

/// Groups roots into clusters; nearby clusters are merged only when the rank
/// test confirms the combined multiplicity at the centroid.
pub fn cluster_roots<T: Real>(p: &MatrixPolynomial<T>, roots: &[Cx<T>], tol: &Tolerances) -> Vec<SpectralPoint<T>> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            let thr = T::lit(tol.cluster) * crate::scalar::scale_of(roots[a]);
            if cabs(roots[a] - roots[b]) <= thr {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: Vec<Vec<Cx<T>>> = Vec::new();
    let mut root_of: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(roots[i]),
            None => {
                root_of.push(r);
                groups.push(vec![roots[i]]);
            }
        }
    }
    let centroid = |g: &[Cx<T>]| {
        let s = g.iter().fold(czero::<T>(), |a, &b| a + b);
        s / Cx::new(T::lit(g.len() as f64), T::zero())
    };
    // Second stage: split multiple roots can spread far beyond `cluster`.
    // Clusters whose centroids chain together within `cluster_merge` are
    // merged when the rank test at the joint centroid confirms the count.
    let cents: Vec<Cx<T>> = groups.iter().map(|g| centroid(g)).collect();
    let k = groups.len();
    let mut comp: Vec<usize> = (0..k).collect();
    for a in 0..k {
        for b in a + 1..k {
            let thr = T::lit(tol.cluster_merge) * crate::scalar::scale_of(cents[a]);
            if cabs(cents[a] - cents[b]) <= thr {
                let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                comp[ra] = rb;
            }
        }
    }
    let mut merged_groups: Vec<Vec<Cx<T>>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for a in 0..k {
        let r = find(&mut comp, a);
        if seen.contains(&r) {
            continue;
        }
        seen.push(r);
        let members: Vec<usize> = (0..k).filter(|&b| find(&mut comp, b) == r).collect();
        if members.len() == 1 {
            merged_groups.push(groups[a].clone());
            continue;
        }
        let all: Vec<Cx<T>> = members.iter().flat_map(|&b| groups[b].iter().copied()).collect();
        let c = snap_root(centroid(&all));
        let mult: usize = rank_multiplicities(p, c, tol).iter().sum();
        if mult == all.len() {
            merged_groups.push(all);
        } else {
            merged_groups.extend(members.iter().map(|&b| groups[b].clone()));
        }
    }
    let groups = merged_groups;
    let mut pts: Vec<SpectralPoint<T>> = groups
        .iter()
        .map(|g| SpectralPoint { sigma0: snap_root(centroid(g)), algebraic_mult: g.len(), partial_mults: Vec::new() })
        .collect();
    sort_points(&mut pts, tol);
    pts
}

/// Orders by `Im` descending, then `Re` ascending.
pub fn sort_points<T: Real>(pts: &mut [SpectralPoint<T>], tol: &Tolerances) {
    pts.sort_by(|x, y| {
        let (a, b) = (x.sigma0, y.sigma0);
        let thr = tol.cluster * crate::scalar::scale_of(a).to_f64_lossy().max(crate::scalar::scale_of(b).to_f64_lossy());
        let di = (a.im - b.im).to_f64_lossy();
        if di.abs() > thr {
            b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal)
        } else {
            a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
}

/// Spectral points of a matrix polynomial inside a strip.
pub fn polynomial_spectrum<T: Real>(
    p: &MatrixPolynomial<T>,
    strip: Strip,
    tol: &Tolerances,
) -> Result<Vec<SpectralPoint<T>>> {
    let roots = polynomial_roots(p);
    for &z in &roots {
        let im = z.im.to_f64_lossy();
        for line in [strip.im_lo, strip.im_hi] {
            if (im - line).abs() < tol.edge {
                return Err(ConeError::RootOnBoundary { sigma: point(z), line, tol: tol.edge });
            }
        }
    }
    let inside: Vec<Cx<T>> = roots.into_iter().filter(|z| strip.contains(z.im.to_f64_lossy())).collect();
    Ok(cluster_roots(p, &inside, tol))
}

/// `spec_b` of a model inside a strip.
pub fn boundary_spectrum<T: Real>(
    model: &ConeModel<T>,
    strip: Strip,
    tol: &Tolerances,
) -> Result<Vec<SpectralPoint<T>>> {
    polynomial_spectrum(model.p0(), strip, tol)
}

/// Fills `partial_mults` by the rank test.
pub fn with_partial_mults<T: Real>(
    p: &MatrixPolynomial<T>,
    mut pts: Vec<SpectralPoint<T>>,
    tol: &Tolerances,
) -> Vec<SpectralPoint<T>> {
    for pt in pts.iter_mut() {
        pt.partial_mults = rank_multiplicities(p, pt.sigma0, tol);
    }
    pts
}
